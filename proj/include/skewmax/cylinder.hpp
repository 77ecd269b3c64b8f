#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "skewmax/flow.hpp"
#include "skewmax/hl_maximal.hpp"
#include "skewmax/parallel.hpp"
#include "skewmax/quadrature.hpp"

namespace skewmax {

/// Q = {(s, y) : |s - t| < eps^2, |y - X_eps(t, x; s)| < radius}.
/// `radius` equals eps except for dilated copies, which keep the time span
/// and centerline of the original.
template <int D>
class SkewedCylinder {
 public:
  SkewedCylinder(Trajectory<D> centerline, double period, double radius)
      : line_(std::move(centerline)), period_(period), radius_(radius) {}

  double center_time() const { return line_.anchor_time; }
  const Vec<D> &center() const { return line_.anchor; }
  double epsilon() const { return line_.epsilon; }
  double radius() const { return radius_; }
  double dilation() const { return radius_ / line_.epsilon; }
  double period() const { return period_; }
  double time_start() const { return line_.anchor_time - line_.epsilon * line_.epsilon; }
  double time_end() const { return line_.anchor_time + line_.epsilon * line_.epsilon; }
  const Trajectory<D> &centerline() const { return line_; }

  /// Centerline position at time s (unwrapped).
  Vec<D> position(double s) const { return line_.at(s); }

  /// Whether the span lies inside the horizon (S, T) of the flow.
  bool eligible(const Domain<D> &domain) const {
    return time_start() >= domain.t_start && time_end() <= domain.t_end;
  }

  bool contains(double s, const Vec<D> &y) const {
    return std::abs(s - center_time()) < epsilon() * epsilon() && torus_distance(y, position(s), period_) < radius_;
  }

  /// 2 eps^2 |B_radius|.
  double measure() const {
    return 2.0 * epsilon() * epsilon() * unit_ball_volume(D) * ipow(radius_, D);
  }

  /// Upper bound of the Euclidean spacetime diameter from the centerline samples.
  double diameter() const {
    double best = 0.0;
    const auto &ts = line_.times;
    const auto &ps = line_.points;
    for (std::size_t i = 0; i < ts.size(); ++i)
      for (std::size_t j = i + 1; j < ts.size(); ++j) {
        const double ds = ts[j] - ts[i];
        const double dy = norm(ps[j] - ps[i]) + 2.0 * radius_;
        best = std::max(best, std::sqrt(ds * ds + dy * dy));
      }
    return std::max(best, 2.0 * radius_);
  }

 private:
  Trajectory<D> line_;
  double period_;
  double radius_;
};

template <int D>
SkewedCylinder<D> make_cylinder(const MollifiedVelocity<D> &u, double t, const Vec<D> &x,
                                int step_budget = kDefaultStepBudget) {
  const auto &dom = u.domain();
  const double e2 = u.epsilon() * u.epsilon();
  require(t + e2 > dom.t_start && t - e2 < dom.t_end, "cylinder time span lies entirely outside (S, T)");
  return SkewedCylinder<D>(centerline(u, t, x, step_budget), dom.period, u.epsilon());
}

template <int D>
SkewedCylinder<D> make_cylinder(const VelocityField<D> &field, const Mollifier<D> &m, double eps, double t,
                                const Vec<D> &x, int step_budget = kDefaultStepBudget) {
  return make_cylinder(MollifiedVelocity<D>(field, m, eps), t, x, step_budget);
}

/// Same span and centerline, spatial radius scaled by lambda.
template <int D>
SkewedCylinder<D> dilate(const SkewedCylinder<D> &c, double lambda) {
  require(std::isfinite(lambda) && lambda > 0.0, "dilation factor must be positive");
  const double r = lambda * c.radius();
  require(r <= 0.5 * c.period() * (1.0 + 1e-12), "dilated radius would wrap around the torus (exceeds L/2)");
  return SkewedCylinder<D>(c.centerline(), c.period(), r);
}

/// Tensorized cylinder rule: n_time midpoint slices times a ball rule
/// normalized to unit mass.
template <int D>
struct CylinderQuadrature {
  int n_time;
  BallRule<D> ball;
  std::vector<double> unit_weights;

  CylinderQuadrature(int n_time_, int n_ball) : n_time(n_time_) {
    require(n_time >= 8, "cylinder quadrature needs n_time >= 8");
    require(n_ball >= 32, "cylinder quadrature needs n_ball >= 32");
    ball = BallRule<D>::with_size(n_ball);
    const double v = ball.volume();
    for (double w : ball.weights) unit_weights.push_back(w / v);
  }
  int n_ball() const { return static_cast<int>(ball.size()); }
  double slice_time(const SkewedCylinder<D> &c, int k) const {
    const double e2 = c.epsilon() * c.epsilon();
    return c.time_start() + (k + 0.5) * (2.0 * e2 / n_time);
  }
};

template <int D>
CylinderQuadrature<D> default_admissibility_quadrature() {
  return CylinderQuadrature<D>(16, 64 * D);
}

/// Quadrature mean of f(s, y) over the cylinder. The result is clamped to
/// the range of the sampled node values, so it never leaves [min f, max f].
template <int D, class F>
double average_over(const SkewedCylinder<D> &c, F &&f, const CylinderQuadrature<D> &q) {
  double acc = 0.0, lo = INFINITY, hi = -INFINITY;
  for (int k = 0; k < q.n_time; ++k) {
    const double s = q.slice_time(c, k);
    const Vec<D> p = c.position(s);
    double slice = 0.0;
    for (std::size_t j = 0; j < q.ball.size(); ++j) {
      const double v = f(s, wrap(p + c.radius() * q.ball.nodes[j], c.period()));
      if (!std::isfinite(v)) throw numerical_error("integrand is not finite at a cylinder quadrature node");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      slice += q.unit_weights[j] * v;
    }
    acc += slice;
  }
  return std::clamp(acc / q.n_time, lo, hi);
}

template <int D, class F>
double average_over(const SkewedCylinder<D> &c, F &&f, int n_time, int n_ball) {
  return average_over(c, std::forward<F>(f), CylinderQuadrature<D>(n_time, n_ball));
}

struct AdmissibilityReport {
  double value = 0.0;  // eps^2 times the mean of M(|grad u|)
  double threshold = 0.0;
  bool eligible = false;  // span inside (S, T)
  bool admissible = false;
  int n_time = 0;
  int n_ball = 0;
};

/// eps^2 * mean of M(|grad u|) over the cylinder compared with eta. The
/// average is only computed for eligible cylinders.
template <int D>
AdmissibilityReport is_admissible(const SkewedCylinder<D> &c, double eta, const HLMaximalField<D> &hl,
                                  const CylinderQuadrature<D> &q) {
  require(eta > 0.0, "eta must be positive");
  AdmissibilityReport r;
  r.threshold = eta;
  r.n_time = q.n_time;
  r.n_ball = q.n_ball();
  r.eligible = c.eligible(hl.domain());
  if (!r.eligible) return r;
  r.value = c.epsilon() * c.epsilon() * average_over(c, [&](double s, const Vec<D> &y) { return hl.value(s, y); }, q);
  r.admissible = r.value < eta;
  return r;
}

template <int D>
AdmissibilityReport is_admissible(const SkewedCylinder<D> &c, double eta, const HLMaximalField<D> &hl) {
  return is_admissible(c, eta, hl, default_admissibility_quadrature<D>());
}

struct RadiusScan {
  std::optional<double> largest;  // largest admissible radius on the grid
  std::vector<bool> mask;         // admissible flag per grid entry
  std::vector<double> values;     // admissibility value per entry (0 if ineligible)
};

/// Admissibility at every entry of a descending eps-grid around (t, x).
template <int D>
RadiusScan smallest_admissible_radius(const VelocityField<D> &field, const Mollifier<D> &m, double eta, double t,
                                      const Vec<D> &x, std::span<const double> eps_grid, const HLMaximalField<D> &hl,
                                      const CylinderQuadrature<D> &q) {
  require(!eps_grid.empty(), "eps grid is empty");
  for (std::size_t i = 1; i < eps_grid.size(); ++i) require(eps_grid[i] < eps_grid[i - 1], "eps grid must be descending");
  RadiusScan scan;
  for (double eps : eps_grid) {
    const auto c = make_cylinder(MollifiedVelocity<D>(field, m, eps), t, x);
    const auto rep = is_admissible(c, eta, hl, q);
    scan.mask.push_back(rep.admissible);
    scan.values.push_back(rep.value);
    if (rep.admissible && !scan.largest) scan.largest = eps;
  }
  return scan;
}

struct Intersection {
  bool intersects = false;
  double witness_time = 0.0;  // first probe time with overlapping balls
};

/// Probe-based test: spans overlap and at one of n_probe uniform times on the
/// common span (endpoints included) the centres are closer than the radii sum.
template <int D>
Intersection cylinders_intersect(const SkewedCylinder<D> &a, const SkewedCylinder<D> &b, int n_probe = 64) {
  require(n_probe >= 16, "intersection test needs at least 16 probes");
  const double lo = std::max(a.time_start(), b.time_start());
  const double hi = std::min(a.time_end(), b.time_end());
  if (!(lo < hi)) return {};
  const double reach = a.radius() + b.radius();
  for (int i = 0; i < n_probe; ++i) {
    const double t = i + 1 == n_probe ? hi : lo + i * (hi - lo) / (n_probe - 1);
    if (torus_distance(a.position(t), b.position(t), a.period()) < reach) return {true, t};
  }
  return {};
}

struct DualMeasure {
  double estimate = 0.0;    // hit-or-miss Monte Carlo measure of the dual cylinder
  double std_error = 0.0;
  double reference = 0.0;   // |Q_eps| = 2 eps^2 |B_eps|
  double roundtrip_fraction = 0.0;  // share of pushed-forward samples that land back inside
  std::size_t samples = 0;
};

/// Measure of {(t, x) : |t - s| < eps^2, |X_eps(t, x; s) - y| < eps}.
///
/// Members satisfy |x - y| < eps + U eps^2 with U bounding |u_eps|, so the
/// estimate samples t uniformly in the span and x uniformly in that ball and
/// counts hits; no flow-invariance is assumed. As a second diagnostic, points
/// x' drawn in B_eps(y) are transported to x = X_eps(s, x'; t) and the
/// membership of (t, x) is re-verified.
template <int D>
DualMeasure dual_cylinder_measure(const MollifiedVelocity<D> &u, double s, const Vec<D> &y, std::size_t n_mc,
                                  std::uint64_t seed, int workers = 1, int step_budget = kDefaultStepBudget) {
  require(n_mc >= 4096, "dual cylinder measure needs at least 4096 samples");
  const double eps = u.epsilon(), e2 = eps * eps;
  const double reach = eps + u.speed_bound() * e2;
  std::vector<unsigned char> hit(n_mc), back(n_mc);
  sample_blocks(n_mc, seed, 0, workers, [&](std::size_t i, std::mt19937_64 &engine) {
    std::uniform_real_distribution<double> span(-e2, e2);
    const double t = s + span(engine);
    const Vec<D> x = y + uniform_in_ball<D>(engine, reach);
    hit[i] = norm(flow_map(u, t, x, s, step_budget) - y) < eps;
  });
  sample_blocks(n_mc, seed, 1, workers, [&](std::size_t i, std::mt19937_64 &engine) {
    std::uniform_real_distribution<double> span(-e2, e2);
    const double t = s + span(engine);
    const Vec<D> x = flow_map(u, s, y + uniform_in_ball<D>(engine, eps), t, step_budget);
    back[i] = norm(flow_map(u, t, x, s, step_budget) - y) < eps;
  });
  std::size_t hits = 0, backs = 0;
  for (std::size_t i = 0; i < n_mc; ++i) {
    hits += hit[i];
    backs += back[i];
  }
  DualMeasure r;
  r.samples = n_mc;
  const double box = 2.0 * e2 * unit_ball_volume(D) * ipow(reach, D);
  const double p = static_cast<double>(hits) / n_mc;
  r.estimate = box * p;
  r.std_error = box * std::sqrt(p * (1.0 - p) / n_mc);
  r.reference = cylinder_measure(D, eps);
  r.roundtrip_fraction = static_cast<double>(backs) / n_mc;
  return r;
}

template <int D>
DualMeasure dual_cylinder_measure(const VelocityField<D> &field, const Mollifier<D> &m, double eps, double s,
                                  const Vec<D> &y, std::size_t n_mc, std::uint64_t seed, int workers = 1) {
  return dual_cylinder_measure(MollifiedVelocity<D>(field, m, eps), s, y, n_mc, seed, workers);
}

/// A cylinder request: centre (t, x) and radius eps.
template <int D>
struct CylinderSpec {
  double t = 0.0;
  Vec<D> x;
  double eps = 0.0;
};

/// Cylinder family file: CSV rows `t,x_1,..,x_d,epsilon`; an optional header
/// row starting with 't' and '#' comment lines are skipped.
template <int D>
std::vector<CylinderSpec<D>> read_cylinder_family(std::istream &in) {
  std::vector<CylinderSpec<D>> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line[0] == '#' || line[0] == 't') continue;
    std::vector<double> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        cells.push_back(std::stod(cell));
      } catch (const std::logic_error &) {
        throw io_error("cylinder family row " + std::to_string(row) + " has a non-numeric entry");
      }
    }
    if (cells.size() != static_cast<std::size_t>(D + 2))
      throw io_error("cylinder family row " + std::to_string(row) + " needs t, x_1..x_d, epsilon");
    CylinderSpec<D> c;
    c.t = cells[0];
    for (int i = 0; i < D; ++i) c.x[i] = cells[1 + i];
    c.eps = cells[D + 1];
    out.push_back(c);
  }
  return out;
}

template <int D>
void write_cylinder_family(std::ostream &out, const std::vector<CylinderSpec<D>> &family) {
  out << "t";
  for (int i = 0; i < D; ++i) out << ",x_" << (i + 1);
  out << ",epsilon\n" << std::setprecision(17);
  for (const auto &c : family) {
    out << c.t;
    for (int i = 0; i < D; ++i) out << ',' << c.x[i];
    out << ',' << c.eps << '\n';
  }
}

}  // namespace skewmax
