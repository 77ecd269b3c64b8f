#pragma once

// Brute-force reference implementations used by the unit tests and the
// acceptance binary. They share no code with the library paths they check
// beyond the field evaluators and the discrete-ball predicate.

#include <algorithm>
#include <cmath>
#include <vector>

#include "skewmax/covering.hpp"
#include "skewmax/hl_maximal.hpp"
#include "skewmax/mollify.hpp"

namespace oracle {

using namespace skewmax;

/// Unnormalized bump exp(-1/(1-r^2)).
inline double bump(double r2) { return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

/// u_eps(t, x) and grad u_eps(t, x) by a midpoint sum over an n^d Cartesian
/// lattice on [-1, 1]^d, normalized by the same lattice sum of the bump. The
/// bump is flat to all orders at |y| = 1, so the midpoint rule converges fast.
template <int D>
struct Convolution {
  Vec<D> velocity;
  Mat<D> gradient;
};

template <int D>
Convolution<D> dense_convolution(const VelocityField<D> &field, double eps, double t, const Vec<D> &x, int n) {
  const double h = 2.0 / n;
  double z = 0.0;
  Convolution<D> out{};
  std::array<int, D> idx{};
  while (true) {
    Vec<D> y;
    double r2 = 0.0;
    for (int a = 0; a < D; ++a) {
      y[a] = -1.0 + (idx[a] + 0.5) * h;
      r2 += y[a] * y[a];
    }
    const double w = bump(r2);
    if (w > 0.0) {
      z += w;
      out.velocity += w * field.evaluate(t, x - eps * y);
      out.gradient += w * field.gradient(t, x - eps * y);
    }
    int a = D - 1;
    while (a >= 0 && ++idx[a] == n) idx[a--] = 0;
    if (a < 0) break;
  }
  out.velocity *= 1.0 / z;
  out.gradient *= 1.0 / z;
  return out;
}

/// max(|g|, max over radii of the mean of |g| over the lattice ball), where
/// the ball lives on the covering space: every integer offset o with
/// |o h| <= r counts once, even if two offsets land on the same torus node.
template <int D>
std::vector<double> brute_force_hl(const ScalarGrid<D> &g, const std::vector<double> &radii) {
  const int n = g.n;
  const double h = g.spacing();
  const std::size_t N = g.size();
  std::vector<double> out(N);
  for (std::size_t f = 0; f < N; ++f) {
    std::array<int, D> c{};
    std::size_t rem = f;
    for (int a = D - 1; a >= 0; --a) {
      c[a] = static_cast<int>(rem % n);
      rem /= n;
    }
    double best = std::abs(g.values[f]);
    for (double r : radii) {
      const int reach = static_cast<int>(std::floor(r / h)) + 1;
      double sum = 0.0;
      std::size_t count = 0;
      std::array<int, D> off;
      off.fill(-reach);
      while (true) {
        long long dist2 = 0;
        for (int a = 0; a < D; ++a) dist2 += static_cast<long long>(off[a]) * off[a];
        if (in_discrete_ball(dist2, h, r)) {
          std::size_t q = 0;
          for (int a = 0; a < D; ++a) q = q * n + static_cast<std::size_t>(((c[a] + off[a]) % n + n) % n);
          sum += std::abs(g.values[q]);
          ++count;
        }
        int a = D - 1;
        while (a >= 0 && ++off[a] > reach) off[a--] = -reach;
        if (a < 0) break;
      }
      best = std::max(best, sum / static_cast<double>(count));
    }
    out[f] = best;
  }
  return out;
}

/// Straightforward greedy: visit cylinders by decreasing radius (lowest
/// index first on ties); keep one unless it meets an already kept cylinder.
template <int D>
std::vector<std::size_t> reference_greedy(const std::vector<SkewedCylinder<D>> &family, int n_probe) {
  std::vector<std::size_t> order(family.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return family[a].epsilon() > family[b].epsilon(); });
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    bool clash = false;
    for (std::size_t k : kept)
      if (cylinders_intersect(family[k], family[i], n_probe).intersects) {
        clash = true;
        break;
      }
    if (!clash) kept.push_back(i);
  }
  return kept;
}

}  // namespace oracle
