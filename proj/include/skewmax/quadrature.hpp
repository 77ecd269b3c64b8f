#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "skewmax/geometry.hpp"

namespace skewmax {

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
inline Rule1D gauss_legendre(int n) {
  require(n >= 1, "gauss_legendre needs at least one node");
  Rule1D r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * x * p2 - (j - 1.0) * p3) / j;
      }
      dp = n * (x * p1 - p2) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

/// Gauss-Legendre rule mapped to [a, b].
inline Rule1D gauss_legendre(int n, double a, double b) {
  Rule1D r = gauss_legendre(n);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (auto &x : r.nodes) x = mid + half * x;
  for (auto &w : r.weights) w *= half;
  return r;
}

/// Product rule on the unit ball B_1: Gauss-Legendre in the radius (with the
/// r^{d-1} Jacobian folded into the weights) times a uniform angular rule.
/// In 3D the polar angle uses Gauss-Legendre in cos(theta).
/// Weights sum to |B_1|; `radii[k]` is |nodes[k]|.
template <int D>
struct BallRule {
  std::vector<Vec<D>> nodes;
  std::vector<double> weights;
  std::vector<double> radii;
  Rule1D radial;  // on [0, 1], weights include r^{d-1}
  int angular_count = 0;

  std::size_t size() const { return nodes.size(); }
  double volume() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }

  static BallRule product(int n_radial, int n_polar, int n_azimuth) {
    require(n_radial >= 1, "ball rule needs radial nodes");
    BallRule b;
    b.radial = gauss_legendre(n_radial, 0.0, 1.0);
    for (std::size_t i = 0; i < b.radial.nodes.size(); ++i)
      b.radial.weights[i] *= ipow(b.radial.nodes[i], D - 1);

    std::vector<Vec<D>> dirs;
    std::vector<double> dir_w;
    if constexpr (D == 1) {
      dirs = {Vec<1>{{-1.0}}, Vec<1>{{1.0}}};
      dir_w = {1.0, 1.0};
    } else if constexpr (D == 2) {
      require(n_azimuth >= 1, "ball rule needs angular nodes");
      for (int k = 0; k < n_azimuth; ++k) {
        const double th = 2.0 * std::numbers::pi * (k + 0.5) / n_azimuth;
        dirs.push_back(Vec<2>{{std::cos(th), std::sin(th)}});
        dir_w.push_back(2.0 * std::numbers::pi / n_azimuth);
      }
    } else {
      require(n_polar >= 1 && n_azimuth >= 1, "ball rule needs angular nodes");
      const Rule1D mu = gauss_legendre(n_polar);
      for (int a = 0; a < n_polar; ++a) {
        const double ct = mu.nodes[a], st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int k = 0; k < n_azimuth; ++k) {
          const double ph = 2.0 * std::numbers::pi * (k + 0.5) / n_azimuth;
          dirs.push_back(Vec<3>{{st * std::cos(ph), st * std::sin(ph), ct}});
          dir_w.push_back(mu.weights[a] * 2.0 * std::numbers::pi / n_azimuth);
        }
      }
    }
    b.angular_count = static_cast<int>(dirs.size());
    for (std::size_t i = 0; i < b.radial.nodes.size(); ++i) {
      for (std::size_t k = 0; k < dirs.size(); ++k) {
        b.nodes.push_back(b.radial.nodes[i] * dirs[k]);
        b.weights.push_back(b.radial.weights[i] * dir_w[k]);
        b.radii.push_back(b.radial.nodes[i]);
      }
    }
    return b;
  }

  /// Rule with at most `n` nodes; the angular resolution is fixed per
  /// dimension and the radial count absorbs the rest.
  static BallRule with_size(int n) {
    require(n >= 2, "ball rule needs at least two nodes");
    if constexpr (D == 1) {
      return product(std::max(1, n / 2), 0, 0);
    } else if constexpr (D == 2) {
      const int az = n >= 64 ? 16 : 8;
      return product(std::max(2, n / az), 0, az);
    } else {
      const int polar = n >= 2048 ? 8 : 4;
      const int az = 2 * polar;
      return product(std::max(2, n / (polar * az)), polar, az);
    }
  }
};

/// Uniform sample in the open ball of radius r about the origin.
template <int D, class Engine>
Vec<D> uniform_in_ball(Engine &engine, double r) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Vec<D> p;
    for (int i = 0; i < D; ++i) p[i] = u(engine);
    if (dot(p, p) < 1.0) return r * p;
  }
}

}  // namespace skewmax
