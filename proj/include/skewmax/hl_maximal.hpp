#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "skewmax/field.hpp"
#include "skewmax/parallel.hpp"

namespace skewmax {

/// Scalar samples on the uniform periodic grid x_j = j h, h = L / n, with the
/// same n on every axis. Row-major, last axis fastest.
template <int D>
struct ScalarGrid {
  int n = 0;
  double period = 1.0;
  std::vector<double> values;

  double spacing() const { return period / n; }
  std::size_t size() const { return values.size(); }
  static std::size_t node_count(int n) {
    std::size_t s = 1;
    for (int a = 0; a < D; ++a) s *= static_cast<std::size_t>(n);
    return s;
  }
  Vec<D> node(std::size_t f) const {
    Vec<D> x;
    for (int a = D - 1; a >= 0; --a) {
      x[a] = static_cast<double>(f % n) * spacing();
      f /= n;
    }
    return x;
  }
  void validate() const {
    require(n >= 4, "scalar grid needs at least 4 nodes per axis");
    require(period > 0.0, "scalar grid period must be positive");
    require(values.size() == node_count(n), "scalar grid has the wrong number of values");
  }
};

/// Radii 1.5 h, 1.5 sqrt(2) h, ... up to L/2 (the last radius is exactly L/2).
inline std::vector<double> default_radius_grid(double h, double period) {
  std::vector<double> r;
  for (double v = 1.5 * h; v < 0.5 * period; v *= std::numbers::sqrt2) r.push_back(v);
  r.push_back(0.5 * period);
  return r;
}

inline void validate_radius_grid(std::span<const double> radii, double h, double period) {
  require(!radii.empty(), "radius grid is empty");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    require(radii[i] > h && radii[i] <= 0.5 * period * (1.0 + 1e-12), "radii must lie in (h, L/2]");
    if (i > 0) require(radii[i] > radii[i - 1] && radii[i] <= 2.0 * radii[i - 1] * (1.0 + 1e-12),
                       "radius grid must increase with ratio at most 2");
  }
}

/// Whether the lattice offset with squared integer length q lies in the
/// closed discrete ball of radius r. Every ball routine (and the brute-force
/// reference in the tests) uses this exact expression.
inline bool in_discrete_ball(long long q, double h, double r) { return static_cast<double>(q) * h * h <= r * r; }

namespace detail {

/// Half-widths along the last axis for each prefix offset (o_0..o_{D-2}).
template <int D>
struct BallRows {
  std::vector<std::array<int, D>> prefixes;  // last entry unused
  std::vector<int> half_width;
  long long count = 0;
};

template <int D>
BallRows<D> ball_rows(double h, double r) {
  BallRows<D> rows;
  const int reach = static_cast<int>(std::floor(r / h)) + 1;
  std::array<int, D> o{};
  auto emit = [&](long long q0) {
    if (!in_discrete_ball(q0, h, r)) return;
    int w = 0;
    while (in_discrete_ball(q0 + static_cast<long long>(w + 1) * (w + 1), h, r)) ++w;
    rows.prefixes.push_back(o);
    rows.half_width.push_back(w);
    rows.count += 2 * w + 1;
  };
  if constexpr (D == 1) {
    emit(0);
  } else if constexpr (D == 2) {
    for (o[0] = -reach; o[0] <= reach; ++o[0]) emit(static_cast<long long>(o[0]) * o[0]);
  } else {
    for (o[0] = -reach; o[0] <= reach; ++o[0])
      for (o[1] = -reach; o[1] <= reach; ++o[1]) emit(static_cast<long long>(o[0]) * o[0] + static_cast<long long>(o[1]) * o[1]);
  }
  return rows;
}

}  // namespace detail

/// Discrete spatial maximal function on a periodic grid:
///   M|g|(x_j) = max(|g(x_j)|, max_r  mean of |g| over lattice nodes within r of x_j).
/// The ball is taken on the covering space, so at r close to L/2 an offset
/// that wraps onto an already counted node is counted again.
/// Ball sums use per-row cyclic prefix sums along the last axis.
template <int D>
ScalarGrid<D> hl_maximal(const ScalarGrid<D> &g, std::span<const double> radii) {
  g.validate();
  const double h = g.spacing();
  validate_radius_grid(radii, h, g.period);
  const int n = g.n;
  const std::size_t N = g.size();
  const std::size_t lines = N / n;

  // prefix[line][k] = sum of |g| over positions 0..k-1 of the line tripled
  std::vector<double> prefix(lines * (3 * n + 1));
  for (std::size_t l = 0; l < lines; ++l) {
    double *p = &prefix[l * (3 * n + 1)];
    p[0] = 0.0;
    for (int k = 0; k < 3 * n; ++k) p[k + 1] = p[k] + std::abs(g.values[l * n + (k % n)]);
  }

  ScalarGrid<D> out{n, g.period, std::vector<double>(N)};
  for (std::size_t f = 0; f < N; ++f) out.values[f] = std::abs(g.values[f]);

  for (double r : radii) {
    const auto rows = detail::ball_rows<D>(h, r);
    for (std::size_t f = 0; f < N; ++f) {
      const int j = static_cast<int>(f % n);
      std::size_t line_idx[3] = {0, 0, 0};
      std::size_t rem = f / n;
      for (int a = D - 2; a >= 0; --a) {
        line_idx[a] = rem % n;
        rem /= n;
      }
      double sum = 0.0;
      for (std::size_t q = 0; q < rows.prefixes.size(); ++q) {
        std::size_t line = 0;
        for (int a = 0; a < D - 1; ++a) {
          const int c = static_cast<int>((static_cast<long long>(line_idx[a]) + rows.prefixes[q][a] % n + n) % n);
          line = line * n + static_cast<std::size_t>(c);
        }
        const int w = rows.half_width[q];
        const double *p = &prefix[line * (3 * n + 1)];
        sum += p[j + w + n + 1] - p[j - w + n];
      }
      out.values[f] = std::max(out.values[f], sum / static_cast<double>(rows.count));
    }
  }
  return out;
}

/// M(|grad u|^power) sampled per time sample on a uniform grid and
/// interpolated multilinearly in space, linearly in time.
template <int D>
class HLMaximalField {
 public:
  HLMaximalField(const VelocityField<D> &field, int n, int time_samples, double power = 1.0,
                 std::vector<double> radii = {})
      : domain_(field.domain()), n_(n), power_(power) {
    require(n >= 4, "maximal-function grid needs at least 4 nodes per axis");
    require(time_samples >= 1, "maximal-function grid needs a time sample");
    require(power >= 1.0, "maximal-function power must be at least 1");
    nt_ = field.steady() ? 1 : std::max(2, time_samples);
    const double h = domain_.period / n_;
    radii_ = radii.empty() ? default_radius_grid(h, domain_.period) : std::move(radii);
    const std::size_t N = ScalarGrid<D>::node_count(n_);
    values_.resize(static_cast<std::size_t>(nt_) * N);
    for (int k = 0; k < nt_; ++k) {
      ScalarGrid<D> g{n_, domain_.period, std::vector<double>(N)};
      const double t = time_of(k);
      for (std::size_t f = 0; f < N; ++f) g.values[f] = std::pow(frobenius(field.gradient(t, g.node(f))), power_);
      const auto m = hl_maximal(g, radii_);
      std::copy(m.values.begin(), m.values.end(), values_.begin() + static_cast<std::ptrdiff_t>(k * N));
    }
  }

  const Domain<D> &domain() const { return domain_; }
  int grid_size() const { return n_; }
  int time_samples() const { return nt_; }
  double power() const { return power_; }
  const std::vector<double> &radii() const { return radii_; }
  double time_of(int k) const {
    return nt_ == 1 ? domain_.t_start : domain_.t_start + k * (domain_.t_end - domain_.t_start) / (nt_ - 1);
  }
  /// Grid values at time sample k.
  std::span<const double> slice(int k) const {
    const std::size_t N = ScalarGrid<D>::node_count(n_);
    return {values_.data() + k * N, N};
  }
  double max_value() const { return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end()); }

  double value(double t, const Vec<D> &x) const {
    const auto ts = time_stencil(t, domain_.t_start, domain_.t_end, nt_);
    std::array<int, D> dims;
    dims.fill(n_);
    const double h = domain_.period / n_;
    const auto lo = slice(ts.lo);
    const double a = interpolate_periodic<D>(dims, h, x, [&](std::size_t f) { return lo[f]; });
    if (ts.hi == ts.lo) return a;
    const auto hi = slice(ts.hi);
    return std::lerp(a, interpolate_periodic<D>(dims, h, x, [&](std::size_t f) { return hi[f]; }), ts.frac);
  }

 private:
  Domain<D> domain_;
  int n_;
  int nt_ = 1;
  double power_;
  std::vector<double> radii_;
  std::vector<double> values_;
};

}  // namespace skewmax
