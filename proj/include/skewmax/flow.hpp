#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "skewmax/mollify.hpp"

namespace skewmax {

inline constexpr int kDefaultStepBudget = 64;

/// Samples of s -> X_eps(t, x; s) on a uniform s-grid, ascending in s.
/// Positions are unwrapped (continuous on the covering space); reduce with
/// wrap() for storage on the torus.
template <int D>
struct Trajectory {
  double anchor_time = 0.0;
  Vec<D> anchor;
  double epsilon = 0.0;
  std::vector<double> times;
  std::vector<Vec<D>> points;

  double first_time() const { return times.front(); }
  double last_time() const { return times.back(); }
  std::size_t size() const { return times.size(); }

  /// Linear interpolation between samples; clamps outside the sampled span.
  Vec<D> at(double s) const {
    const std::size_t n = times.size();
    if (n == 1 || s <= times.front()) return points.front();
    if (s >= times.back()) return points.back();
    const double u = (s - times.front()) / (times.back() - times.front()) * static_cast<double>(n - 1);
    std::size_t k = std::min(static_cast<std::size_t>(u), n - 2);
    // guard against the uniform-grid estimate landing one cell off
    while (k > 0 && times[k] > s) --k;
    while (k + 2 < n && times[k + 1] < s) ++k;
    const double frac = (s - times[k]) / (times[k + 1] - times[k]);
    Vec<D> r;
    for (int i = 0; i < D; ++i) r[i] = std::lerp(points[k][i], points[k + 1][i], frac);
    return r;
  }
};

namespace detail {

template <int D>
Vec<D> rk4_step(const MollifiedVelocity<D> &u, double s, const Vec<D> &x, double h) {
  const Vec<D> k1 = u.velocity(s, x);
  const Vec<D> k2 = u.velocity(s + 0.5 * h, x + (0.5 * h) * k1);
  const Vec<D> k3 = u.velocity(s + 0.5 * h, x + (0.5 * h) * k2);
  const Vec<D> k4 = u.velocity(s + h, x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline int step_count(double span, double eps, int step_budget) {
  require(step_budget >= 64, "step budget must be at least 64");
  const double h = eps * eps / step_budget;
  if (!(h >= 1e-14)) throw numerical_error("flow step underflow (eps^2 / budget below 1e-14)");
  // the tolerance keeps span = eps^2 at exactly `step_budget` steps
  return std::max(1, static_cast<int>(std::ceil(std::abs(span) / h - 1e-9)));
}

}  // namespace detail

/// X_eps(t, x; s_target) without storing intermediate samples.
template <int D>
Vec<D> flow_map(const MollifiedVelocity<D> &u, double t, const Vec<D> &x, double s_target,
                int step_budget = kDefaultStepBudget) {
  const double span = s_target - t;
  if (span == 0.0) return x;
  const int n = detail::step_count(span, u.epsilon(), step_budget);
  const double h = span / n;
  Vec<D> p = x;
  for (int k = 0; k < n; ++k) p = detail::rk4_step(u, t + k * h, p, h);
  return p;
}

/// Fixed-step RK4 with h <= eps^2 / step_budget from (t, x) to s_target.
template <int D>
Trajectory<D> integrate_flow(const MollifiedVelocity<D> &u, double t, const Vec<D> &x, double s_target,
                             int step_budget = kDefaultStepBudget) {
  Trajectory<D> tr;
  tr.anchor_time = t;
  tr.anchor = x;
  tr.epsilon = u.epsilon();
  const double span = s_target - t;
  const int n = span == 0.0 ? 0 : detail::step_count(span, u.epsilon(), step_budget);
  tr.times.reserve(n + 1);
  tr.points.reserve(n + 1);
  tr.times.push_back(t);
  tr.points.push_back(x);
  if (n > 0) {
    const double h = span / n;
    Vec<D> p = x;
    for (int k = 0; k < n; ++k) {
      p = detail::rk4_step(u, t + k * h, p, h);
      tr.times.push_back(k + 1 == n ? s_target : t + (k + 1) * h);
      tr.points.push_back(p);
    }
  }
  if (span < 0.0) {
    std::reverse(tr.times.begin(), tr.times.end());
    std::reverse(tr.points.begin(), tr.points.end());
  }
  return tr;
}

template <int D>
Trajectory<D> integrate_flow(const VelocityField<D> &field, const Mollifier<D> &m, double eps, double t,
                             const Vec<D> &x, double s_target, int step_budget = kDefaultStepBudget) {
  return integrate_flow(MollifiedVelocity<D>(field, m, eps), t, x, s_target, step_budget);
}

/// Samples over the full span [t - eps^2, t + eps^2]: `step_budget` steps on
/// each side of the anchor, so the anchor sample is exact.
template <int D>
Trajectory<D> centerline(const MollifiedVelocity<D> &u, double t, const Vec<D> &x, int step_budget = kDefaultStepBudget) {
  const double e2 = u.epsilon() * u.epsilon();
  Trajectory<D> back = integrate_flow(u, t, x, t - e2, step_budget);
  const Trajectory<D> fwd = integrate_flow(u, t, x, t + e2, step_budget);
  back.times.insert(back.times.end(), fwd.times.begin() + 1, fwd.times.end());
  back.points.insert(back.points.end(), fwd.points.begin() + 1, fwd.points.end());
  return back;
}

/// |X_eps(s, X_eps(t, x; s); t) - x|, the round-trip residual.
template <int D>
double flow_inverse_check(const MollifiedVelocity<D> &u, double t, const Vec<D> &x, double s,
                          int step_budget = kDefaultStepBudget) {
  const Vec<D> there = flow_map(u, t, x, s, step_budget);
  return norm(flow_map(u, s, there, t, step_budget) - x);
}

template <int D>
double flow_inverse_check(const VelocityField<D> &field, const Mollifier<D> &m, double eps, double t, const Vec<D> &x,
                          double s, int step_budget = kDefaultStepBudget) {
  return flow_inverse_check(MollifiedVelocity<D>(field, m, eps), t, x, s, step_budget);
}

}  // namespace skewmax
