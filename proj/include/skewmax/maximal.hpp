#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "skewmax/cylinder.hpp"

namespace skewmax {

/// Spacetime sample points (t_k, x_origin + idx * h), k < nt, idx_a < n[a].
/// Flat order: time first, then row-major space.
template <int D>
struct SpacetimeGrid {
  double t_origin = 0.0;
  double dt = 1.0;
  int nt = 1;
  Vec<D> x_origin;
  double h = 1.0;
  std::array<int, D> n{};

  /// Cell-centred samples of [t0, t1] x prod [lo_a, hi_a].
  static SpacetimeGrid cell_centered(double t0, double t1, int nt, const Vec<D> &lo, const Vec<D> &hi, double h) {
    require(t1 > t0 && nt >= 1, "spacetime grid needs a time range and samples");
    require(h > 0.0, "spacetime grid spacing must be positive");
    SpacetimeGrid g;
    g.nt = nt;
    g.dt = (t1 - t0) / nt;
    g.t_origin = t0 + 0.5 * g.dt;
    g.h = h;
    for (int a = 0; a < D; ++a) {
      g.n[a] = std::max(1, static_cast<int>(std::lround((hi[a] - lo[a]) / h)));
      g.x_origin[a] = lo[a] + 0.5 * h;
    }
    return g;
  }

  std::size_t spatial_size() const {
    std::size_t s = 1;
    for (int v : n) s *= static_cast<std::size_t>(v);
    return s;
  }
  std::size_t size() const { return static_cast<std::size_t>(nt) * spatial_size(); }
  double cell_volume() const { return dt * ipow(h, D); }
  double time(std::size_t p) const { return t_origin + static_cast<double>(p / spatial_size()) * dt; }
  Vec<D> point(std::size_t p) const {
    std::size_t rem = p % spatial_size();
    Vec<D> x;
    for (int a = D - 1; a >= 0; --a) {
      x[a] = x_origin[a] + static_cast<double>(rem % n[a]) * h;
      rem /= n[a];
    }
    return x;
  }
};

/// Scalar function of (t, x) with an optional box outside which it vanishes.
/// The box lets sweeps skip cylinders that cannot meet the support.
template <int D>
struct SpacetimeFunction {
  std::function<double(double, const Vec<D> &)> eval;
  struct Box {
    double t_lo, t_hi;
    Vec<D> lo, hi;
  };
  std::optional<Box> support;

  double operator()(double t, const Vec<D> &x) const { return eval(t, x); }
};

namespace detail {

/// Whether [a, b] meets [c, d] + m L for some integer m.
inline bool circle_overlap(double a, double b, double c, double d, double L) {
  const double m_lo = std::floor((a - d) / L), m_hi = std::ceil((b - c) / L);
  for (double m = m_lo; m <= m_hi; m += 1.0)
    if (c + m * L <= b && d + m * L >= a) return true;
  return false;
}

template <int D>
bool may_meet(const SkewedCylinder<D> &c, const typename SpacetimeFunction<D>::Box &box) {
  if (c.time_end() < box.t_lo || c.time_start() > box.t_hi) return false;
  Vec<D> lo = c.centerline().points.front(), hi = lo;
  for (const auto &p : c.centerline().points)
    for (int a = 0; a < D; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  for (int a = 0; a < D; ++a)
    if (!circle_overlap(lo[a] - c.radius(), hi[a] + c.radius(), box.lo[a], box.hi[a], c.period())) return false;
  return true;
}

}  // namespace detail

/// eps-grid 2h, 2 sqrt(2) h, ... capped at (and including) L/8.
inline std::vector<double> default_epsilon_grid(double h, double period) {
  std::vector<double> e;
  const double top = period / 8.0;
  for (double v = 2.0 * h; v < top * (1.0 - 1e-12); v *= std::numbers::sqrt2) e.push_back(v);
  e.push_back(top);
  return e;
}

template <int D>
struct MaximalField {
  SpacetimeGrid<D> grid;
  std::vector<double> eps_grid;
  double eta = 0.0;
  std::vector<double> values;
  std::vector<double> argmax_eps;   // 0 where no admissible radius was found
  std::vector<std::uint64_t> mask;  // bit i set iff eps_grid[i] is admissible

  int admissible_count(std::size_t p) const { return std::popcount(mask[p]); }
  bool flagged(std::size_t p) const { return mask[p] == 0; }
  double flagged_fraction() const {
    std::size_t f = 0;
    for (auto m : mask) f += m == 0;
    return mask.empty() ? 0.0 : static_cast<double>(f) / mask.size();
  }
  double max_value() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }
};

struct SweepOptions {
  int n_time = 16;        // cylinder quadrature for the averages of f
  int n_ball = 0;         // 0 selects 64 d
  int step_budget = kDefaultStepBudget;
  MollifyRoute route = MollifyRoute::automatic;
  int workers = 1;
};

/// M_Q for several functions in one sweep: cylinders and admissibility are
/// shared, and averages of |f_i| are taken only over admissible cylinders.
template <int D>
std::vector<MaximalField<D>> skewed_maximal_many(const VelocityField<D> &field, const Mollifier<D> &m,
                                                 std::span<const SpacetimeFunction<D>> fs, double eta,
                                                 const SpacetimeGrid<D> &grid, std::span<const double> eps_grid,
                                                 const HLMaximalField<D> &hl, const SweepOptions &opt = {}) {
  require(eta > 0.0, "eta must be positive");
  require(!eps_grid.empty() && eps_grid.size() <= 64, "eps grid needs 1 to 64 entries");
  for (double e : eps_grid) detail::require_radius(field.domain(), e);
  const auto adm_q = default_admissibility_quadrature<D>();
  const CylinderQuadrature<D> f_q(opt.n_time, opt.n_ball > 0 ? opt.n_ball : 64 * D);
  std::vector<MollifiedVelocity<D>> flows;
  for (double e : eps_grid) flows.emplace_back(field, m, e, opt.route);

  const std::size_t P = grid.size();
  std::vector<MaximalField<D>> out(fs.size());
  for (auto &mf : out) {
    mf.grid = grid;
    mf.eps_grid.assign(eps_grid.begin(), eps_grid.end());
    mf.eta = eta;
    mf.values.assign(P, 0.0);
    mf.argmax_eps.assign(P, 0.0);
    mf.mask.assign(P, 0);
  }
  const auto &dom = field.domain();
  parallel_for(P, opt.workers, [&](std::size_t p) {
    const double t = grid.time(p);
    const Vec<D> x = grid.point(p);
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
      const double e2 = eps_grid[i] * eps_grid[i];
      if (t - e2 < dom.t_start || t + e2 > dom.t_end) continue;
      const auto c = make_cylinder(flows[i], t, x, opt.step_budget);
      if (!is_admissible(c, eta, hl, adm_q).admissible) continue;
      bits |= std::uint64_t{1} << i;
      for (std::size_t k = 0; k < fs.size(); ++k) {
        const auto &f = fs[k];
        if (f.support && !detail::may_meet(c, *f.support)) continue;
        const double avg = average_over(c, [&](double s, const Vec<D> &y) { return std::abs(f(s, y)); }, f_q);
        auto &mf = out[k];
        if (avg > mf.values[p]) {
          mf.values[p] = avg;
          mf.argmax_eps[p] = eps_grid[i];
        }
      }
    }
    for (std::size_t k = 0; k < fs.size(); ++k) {
      out[k].mask[p] = bits;
      if (bits && out[k].argmax_eps[p] == 0.0) out[k].argmax_eps[p] = eps_grid[std::countr_zero(bits)];
    }
  });
  return out;
}

template <int D>
MaximalField<D> skewed_maximal(const VelocityField<D> &field, const Mollifier<D> &m, const SpacetimeFunction<D> &f,
                               double eta, const SpacetimeGrid<D> &grid, std::span<const double> eps_grid,
                               const HLMaximalField<D> &hl, const SweepOptions &opt = {}) {
  return std::move(skewed_maximal_many<D>(field, m, std::span<const SpacetimeFunction<D>>(&f, 1), eta, grid, eps_grid,
                                          hl, opt)
                       .front());
}

/// Signed cylinder averages f_eps on the grid (no admissibility filter).
template <int D>
std::vector<double> f_epsilon(const VelocityField<D> &field, const Mollifier<D> &m, const SpacetimeFunction<D> &f,
                              double eps, const SpacetimeGrid<D> &grid, const SweepOptions &opt = {}) {
  const MollifiedVelocity<D> u(field, m, eps, opt.route);
  const CylinderQuadrature<D> q(opt.n_time, opt.n_ball > 0 ? opt.n_ball : 64 * D);
  std::vector<double> out(grid.size());
  parallel_for(grid.size(), opt.workers, [&](std::size_t p) {
    const auto c = make_cylinder(u, grid.time(p), grid.point(p), opt.step_budget);
    if (f.support && !detail::may_meet(c, *f.support)) return;
    out[p] = average_over(c, [&](double s, const Vec<D> &y) { return f(s, y); }, q);
  });
  return out;
}

/// Samples of f on the grid.
template <int D>
std::vector<double> sample_on(const SpacetimeFunction<D> &f, const SpacetimeGrid<D> &grid) {
  std::vector<double> out(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) out[p] = f(grid.time(p), grid.point(p));
  return out;
}

/// Cell-counted L^p norm (p = INFINITY gives the max norm).
inline double grid_norm(std::span<const double> v, double cell_volume, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p);
  return std::pow(s * cell_volume, 1.0 / p);
}

/// Cell-counted measure of {v > lambda}.
inline double superlevel_measure(std::span<const double> v, double lambda, double cell_volume) {
  std::size_t c = 0;
  for (double x : v) c += x > lambda;
  return static_cast<double>(c) * cell_volume;
}

/// CSV: t, x_1..x_d, value, argmax_eps, admissible_count.
template <int D>
void write_maximal_csv(std::ostream &out, const MaximalField<D> &mf) {
  out << "t";
  for (int a = 0; a < D; ++a) out << ",x_" << (a + 1);
  out << ",value,argmax_eps,admissible_count\n" << std::setprecision(12);
  for (std::size_t p = 0; p < mf.values.size(); ++p) {
    out << mf.grid.time(p);
    const auto x = mf.grid.point(p);
    for (int a = 0; a < D; ++a) out << ',' << x[a];
    out << ',' << mf.values[p] << ',' << mf.argmax_eps[p] << ',' << mf.admissible_count(p) << '\n';
  }
}

}  // namespace skewmax
