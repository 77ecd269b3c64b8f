#pragma once

#include <cmath>
#include <string>

#include "skewmax/maximal.hpp"

namespace skewmax {

/// A spacetime test function with its known sup norm.
template <int D>
struct TestFunction {
  std::string name;
  SpacetimeFunction<D> fn;
  double sup = 1.0;
};

template <int D>
TestFunction<D> constant_function(double c) {
  return {"constant", {[c](double, const Vec<D> &) { return c; }, std::nullopt}, std::abs(c)};
}

/// Indicator of |t - t_c| < half_t, |x_a - c_a| < half_x (torus distance per axis).
template <int D>
TestFunction<D> box_indicator(double t_c, double half_t, const Vec<D> &c, double half_x, double period) {
  SpacetimeFunction<D> f;
  f.eval = [=](double t, const Vec<D> &x) {
    if (std::abs(t - t_c) >= half_t) return 0.0;
    for (int a = 0; a < D; ++a)
      if (std::abs(torus_delta(x[a], c[a], period)) >= half_x) return 0.0;
    return 1.0;
  };
  f.support = typename SpacetimeFunction<D>::Box{t_c - half_t, t_c + half_t, c - Vec<D>::filled(half_x),
                                                 c + Vec<D>::filled(half_x)};
  return {"box", std::move(f), 1.0};
}

/// exp(1 - 1/(1 - rho^2)) with rho^2 = ((t - t_c)/half_t)^2 + |x - c|^2 / half_x^2; peak 1.
template <int D>
TestFunction<D> smooth_bump(double t_c, double half_t, const Vec<D> &c, double half_x, double period) {
  SpacetimeFunction<D> f;
  f.eval = [=](double t, const Vec<D> &x) {
    const double dt = (t - t_c) / half_t;
    const double dx = torus_distance(x, c, period) / half_x;
    const double rho2 = dt * dt + dx * dx;
    return rho2 >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - rho2));
  };
  f.support = typename SpacetimeFunction<D>::Box{t_c - half_t, t_c + half_t, c - Vec<D>::filled(half_x),
                                                 c + Vec<D>::filled(half_x)};
  return {"bump", std::move(f), 1.0};
}

/// Sum of two boxes of equal size whose spatial centres differ by `offset`
/// along the first axis; the boxes are disjoint when offset > 2 half_x.
template <int D>
TestFunction<D> two_boxes(double t_c, double half_t, const Vec<D> &c, double half_x, double offset, double period) {
  const auto a = box_indicator<D>(t_c, half_t, c, half_x, period);
  Vec<D> c2 = c;
  c2[0] += offset;
  const auto b = box_indicator<D>(t_c, half_t, c2, half_x, period);
  SpacetimeFunction<D> f;
  f.eval = [fa = a.fn, fb = b.fn](double t, const Vec<D> &x) { return fa(t, x) + fb(t, x); };
  Vec<D> lo = c - Vec<D>::filled(half_x), hi = c2 + Vec<D>::filled(half_x);
  f.support = typename SpacetimeFunction<D>::Box{t_c - half_t, t_c + half_t, lo, hi};
  return {"two-box", std::move(f), offset > 2.0 * half_x ? 1.0 : 2.0};
}

/// Gaussian in time times 1 + 0.5 sin(k x_1) cos(k x_2) with k = 2 pi / L
/// (sin(k x_1) alone in 1D); smooth, positive and periodic in space.
template <int D>
TestFunction<D> smooth_wave(double t_c, double sigma, double period) {
  const double k = 2.0 * std::numbers::pi / period;
  SpacetimeFunction<D> f;
  f.eval = [=](double t, const Vec<D> &x) {
    const double g = std::exp(-0.5 * (t - t_c) * (t - t_c) / (sigma * sigma));
    double w = std::sin(k * x[0]);
    if constexpr (D >= 2) w *= std::cos(k * x[1]);
    return g * (1.0 + 0.5 * w);
  };
  return {"wave", std::move(f), 1.5};
}

}  // namespace skewmax
