#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <vector>

#include "skewmax/cylinder.hpp"

namespace skewmax {

/// 2 (16/3) 9^{2d} + 9^d: the explicit constant assembled in the
/// satellite-union argument (future and past slabs plus the middle slab).
constexpr double covering_constant_bound(int d) {
  return 2.0 * (16.0 / 3.0) * ipow(9.0, 2 * d) + ipow(9.0, d);
}

struct MonteCarloMeasure {
  double estimate = 0.0;
  double std_error = 0.0;
  double box_volume = 0.0;
  std::size_t samples = 0;
};

/// Hit-or-miss measure of the union over the family's bounding spacetime box.
/// Per axis the box is capped at one period, so every torus point has exactly
/// one representative.
template <int D>
MonteCarloMeasure union_measure(const std::vector<SkewedCylinder<D>> &family, std::size_t n_mc, std::uint64_t seed,
                                int workers = 1) {
  require(n_mc >= 65536, "union measure needs at least 65536 samples");
  require(!family.empty(), "union measure of an empty family");
  double t_lo = INFINITY, t_hi = -INFINITY;
  Vec<D> lo = Vec<D>::filled(INFINITY), hi = Vec<D>::filled(-INFINITY);
  const double L = family.front().period();
  for (const auto &c : family) {
    t_lo = std::min(t_lo, c.time_start());
    t_hi = std::max(t_hi, c.time_end());
    for (const auto &p : c.centerline().points)
      for (int a = 0; a < D; ++a) {
        lo[a] = std::min(lo[a], p[a] - c.radius());
        hi[a] = std::max(hi[a], p[a] + c.radius());
      }
  }
  double box = t_hi - t_lo;
  for (int a = 0; a < D; ++a) {
    hi[a] = std::min(hi[a], lo[a] + L);
    box *= hi[a] - lo[a];
  }
  if (!(box > 0.0)) throw precondition_error("union measure: degenerate bounding box");

  std::vector<unsigned char> hit(n_mc);
  sample_blocks(n_mc, seed, 2, workers, [&](std::size_t i, std::mt19937_64 &engine) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double t = t_lo + (t_hi - t_lo) * u01(engine);
    Vec<D> y;
    for (int a = 0; a < D; ++a) y[a] = lo[a] + (hi[a] - lo[a]) * u01(engine);
    for (const auto &c : family)
      if (c.contains(t, y)) {
        hit[i] = 1;
        return;
      }
  });
  std::size_t hits = 0;
  for (auto h : hit) hits += h;
  const double p = static_cast<double>(hits) / n_mc;
  return {box * p, box * std::sqrt(p * (1.0 - p) / n_mc), box, n_mc};
}

struct Removal {
  std::size_t index;      // removed family member
  std::size_t selection;  // position in `selected` of the cylinder that removed it
  double witness_time;    // probe time at which they overlap
};

struct CoverReport {
  std::size_t family_size = 0;
  std::vector<std::size_t> selected;  // family indices in selection order
  std::vector<Removal> removals;
  int n_probe = 0;
  std::vector<double> sup_at_step;  // max remaining radius when each selection was made
  double selected_measure = 0.0;    // sum of |Q^{alpha_j}|
  MonteCarloMeasure union_mc;
  double empirical_constant = 0.0;  // |union| / sum |Q^{alpha_j}|
  // pairwise re-check of the selection at n_probe, and at 4x the probes
  std::size_t disjointness_violations = 0;
  std::size_t refined_violations = 0;
  int certificate_probes = 0;
};

/// Greedy selection: repeatedly take the largest remaining radius (lowest
/// index on ties, which exceeds half the sup) and drop everything it meets.
template <int D>
CoverReport greedy_cover(const std::vector<SkewedCylinder<D>> &family, int n_probe = 64, std::size_t n_mc = 0,
                         std::uint64_t seed = 0, int workers = 1) {
  CoverReport r;
  r.family_size = family.size();
  r.n_probe = n_probe;
  std::vector<std::size_t> working(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) working[i] = i;
  while (!working.empty()) {
    std::size_t best = working.front();
    for (std::size_t i : working)
      if (family[i].epsilon() > family[best].epsilon()) best = i;
    const std::size_t j = r.selected.size();
    r.selected.push_back(best);
    r.sup_at_step.push_back(family[best].epsilon());
    std::vector<Intersection> hits(working.size());
    parallel_for(working.size(), workers, [&](std::size_t k) {
      if (working[k] != best) hits[k] = cylinders_intersect(family[best], family[working[k]], n_probe);
    });
    std::vector<std::size_t> rest;
    for (std::size_t k = 0; k < working.size(); ++k) {
      if (working[k] == best) continue;
      if (hits[k].intersects) r.removals.push_back({working[k], j, hits[k].witness_time});
      else rest.push_back(working[k]);
    }
    working = std::move(rest);
  }
  for (std::size_t i : r.selected) r.selected_measure += family[i].measure();

  r.certificate_probes = 4 * n_probe;
  for (std::size_t a = 0; a < r.selected.size(); ++a)
    for (std::size_t b = a + 1; b < r.selected.size(); ++b) {
      const auto &ca = family[r.selected[a]], &cb = family[r.selected[b]];
      r.disjointness_violations += cylinders_intersect(ca, cb, n_probe).intersects;
      r.refined_violations += cylinders_intersect(ca, cb, r.certificate_probes).intersects;
    }

  if (n_mc > 0 && !family.empty()) {
    r.union_mc = union_measure(family, n_mc, seed, workers);
    r.empirical_constant = r.union_mc.estimate / r.selected_measure;
  }
  return r;
}

/// CSV: order, index, t, x_1..x_d, epsilon.
template <int D>
void write_cover_csv(std::ostream &out, const std::vector<SkewedCylinder<D>> &family, const CoverReport &r) {
  out << "order,index,t";
  for (int a = 0; a < D; ++a) out << ",x_" << (a + 1);
  out << ",epsilon\n" << std::setprecision(12);
  for (std::size_t j = 0; j < r.selected.size(); ++j) {
    const auto &c = family[r.selected[j]];
    out << j << ',' << r.selected[j] << ',' << c.center_time();
    for (int a = 0; a < D; ++a) out << ',' << c.center()[a];
    out << ',' << c.epsilon() << '\n';
  }
}

inline void write_cover_summary(std::ostream &out, int d, const CoverReport &r) {
  out << std::setprecision(8);
  out << "family_size " << r.family_size << '\n'
      << "selected " << r.selected.size() << '\n'
      << "removed " << r.removals.size() << '\n'
      << "probes " << r.n_probe << '\n'
      << "certificate_probes " << r.certificate_probes << '\n'
      << "disjointness_violations " << r.disjointness_violations << '\n'
      << "refined_violations " << r.refined_violations << '\n'
      << "selected_measure " << r.selected_measure << '\n'
      << "union_measure " << r.union_mc.estimate << '\n'
      << "union_std_error " << r.union_mc.std_error << '\n'
      << "empirical_constant " << r.empirical_constant << '\n'
      << "constant_bound " << covering_constant_bound(d) << '\n';
}

/// Time split of a satellite against the anchor span (S^a, T^a): measures
/// of the parts with t >= T^a, t <= S^a, and S^a < t < T^a.
struct TimeSplit {
  double future = 0.0;
  double past = 0.0;
  double middle = 0.0;
};

template <int D>
TimeSplit time_split(const SkewedCylinder<D> &anchor, const SkewedCylinder<D> &sat) {
  const double ball = unit_ball_volume(D) * ipow(sat.radius(), D);
  auto len = [](double a, double b) { return std::max(0.0, b - a); };
  TimeSplit s;
  s.future = ball * len(std::max(sat.time_start(), anchor.time_end()), sat.time_end());
  s.past = ball * len(sat.time_start(), std::min(sat.time_end(), anchor.time_start()));
  s.middle = ball * len(std::max(sat.time_start(), anchor.time_start()), std::min(sat.time_end(), anchor.time_end()));
  return s;
}

/// Radius class i with 2^{-i} eps_a <= eps_b < 2^{1-i} eps_a (i >= 0 when eps_b < 2 eps_a).
inline int radius_class(double eps_anchor, double eps_sat) {
  int i = static_cast<int>(std::ceil(std::log2(eps_anchor / eps_sat)));
  while (eps_sat < std::ldexp(eps_anchor, -i)) ++i;
  while (eps_sat >= std::ldexp(eps_anchor, 1 - i)) --i;
  return i;
}

struct SatelliteReport {
  std::map<int, std::vector<std::size_t>> classes;  // radius class -> satellites
  bool partition_ok = false;
  std::vector<TimeSplit> splits;
  std::size_t middle_samples = 0;
  std::size_t middle_violations = 0;  // middle-slab samples outside 9 Q^a
  MonteCarloMeasure union_mc;
  double ratio = 0.0;  // |union of satellites| / |Q^a|
  double bound = 0.0;
};

/// Checks the satellite hypotheses, groups satellites by radius class, samples
/// the middle slabs against 9 Q^a, and measures the union relative to |Q^a|.
template <int D>
SatelliteReport satellite_union_check(const SkewedCylinder<D> &anchor, const std::vector<SkewedCylinder<D>> &sats,
                                      int n_probe = 64, std::size_t middle_per_satellite = 256,
                                      std::size_t n_mc = 65536, std::uint64_t seed = 0, int workers = 1) {
  require(!sats.empty(), "satellite check needs at least one satellite");
  for (const auto &b : sats) {
    require(b.epsilon() < 2.0 * anchor.epsilon(), "satellite radius must be below twice the anchor radius");
    require(cylinders_intersect(anchor, b, n_probe).intersects, "satellite does not intersect the anchor");
  }
  SatelliteReport r;
  r.bound = covering_constant_bound(D);
  std::vector<int> seen(sats.size(), 0);
  for (std::size_t k = 0; k < sats.size(); ++k) r.classes[radius_class(anchor.epsilon(), sats[k].epsilon())].push_back(k);
  r.partition_ok = true;
  for (const auto &[i, members] : r.classes) {
    if (i < 0) r.partition_ok = false;
    for (std::size_t k : members) {
      ++seen[k];
      const double e = sats[k].epsilon();
      if (!(std::ldexp(anchor.epsilon(), -i) <= e && e < std::ldexp(anchor.epsilon(), 1 - i))) r.partition_ok = false;
    }
  }
  for (int s : seen)
    if (s != 1) r.partition_ok = false;

  const auto big = dilate(anchor, 9.0);
  for (std::size_t k = 0; k < sats.size(); ++k) {
    r.splits.push_back(time_split(anchor, sats[k]));
    const double lo = std::max(anchor.time_start(), sats[k].time_start());
    const double hi = std::min(anchor.time_end(), sats[k].time_end());
    if (!(lo < hi)) continue;
    auto engine = block_engine(seed, 3, k);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (std::size_t i = 0; i < middle_per_satellite; ++i) {
      const double t = lo + (hi - lo) * u01(engine);
      const Vec<D> y = sats[k].position(t) + uniform_in_ball<D>(engine, sats[k].radius());
      ++r.middle_samples;
      if (!big.contains(t, y)) ++r.middle_violations;
    }
  }
  r.union_mc = union_measure(sats, n_mc, seed, workers);
  r.ratio = r.union_mc.estimate / anchor.measure();
  return r;
}

struct ClosenessReport {
  double max_ratio = 0.0;  // max over probes of (|X^b - X^a| + eps_b) / eps_a
  std::size_t violations = 0;
  int n_probe = 0;
};

/// Over n_probe common times: |X^b(t) - X^a(t)| + eps_b <= 9 eps_a.
template <int D>
ClosenessReport closeness_check(const SkewedCylinder<D> &a, const SkewedCylinder<D> &b, int n_probe = 64) {
  require(n_probe >= 2, "closeness check needs probes");
  require(b.epsilon() < 2.0 * a.epsilon(), "closeness needs eps_b < 2 eps_a");
  require(cylinders_intersect(a, b).intersects, "closeness needs intersecting cylinders");
  const double lo = std::max(a.time_start(), b.time_start());
  const double hi = std::min(a.time_end(), b.time_end());
  ClosenessReport r;
  r.n_probe = n_probe;
  for (int i = 0; i < n_probe; ++i) {
    const double t = lo + i * (hi - lo) / (n_probe - 1);
    const double ratio = (torus_distance(b.position(t), a.position(t), a.period()) + b.epsilon()) / a.epsilon();
    r.max_ratio = std::max(r.max_ratio, ratio);
    if (ratio > 9.0) ++r.violations;
  }
  return r;
}

struct StreamlineReport {
  double max_own_ratio = 0.0;    // max |X_{eps_a}(seed; t) - X^a(t)| / eps_a, bound 2
  double max_cross_ratio = 0.0;  // max |X_{eps_b}(seed; t) - X_{eps_a}(seed; t)| / eps_a, bound 1
  std::size_t own_violations = 0;
  std::size_t cross_violations = 0;
  std::size_t seeds = 0;
  std::size_t partners = 0;
};

/// Seed streamlines through a cylinder stay near its centerline (bound
/// 2 eps_a over the span), and streamlines of a partner radius eps_b < 2 eps_a
/// through a common seed stay within eps_a of each other on the common span.
/// Partners are (velocity at eps_b, cylinder at eps_b); a seed is paired with
/// every partner that contains it.
template <int D>
StreamlineReport streamline_closeness_check(
    const MollifiedVelocity<D> &ua, const SkewedCylinder<D> &alpha, const std::vector<std::pair<double, Vec<D>>> &seeds,
    const std::vector<std::pair<MollifiedVelocity<D>, SkewedCylinder<D>>> &partners = {}, int n_probe = 33) {
  require(n_probe >= 2, "streamline check needs probes");
  StreamlineReport r;
  const double ea = alpha.epsilon();
  for (const auto &[t0, x0] : seeds) {
    require(alpha.contains(t0, x0), "seed lies outside the cylinder");
    ++r.seeds;
    const auto back = integrate_flow(ua, t0, x0, alpha.time_start());
    const auto fwd = integrate_flow(ua, t0, x0, alpha.time_end());
    auto own = [&](double t) { return t <= t0 ? back.at(t) : fwd.at(t); };
    // compare on the torus: the seed may be a wrapped copy of a centerline point
    auto gap = [&](const Vec<D> &p, const Vec<D> &q) { return torus_distance(p, q, alpha.period()); };
    for (int i = 0; i < n_probe; ++i) {
      const double t = alpha.time_start() + i * (alpha.time_end() - alpha.time_start()) / (n_probe - 1);
      const double ratio = gap(own(t), alpha.position(t)) / ea;
      r.max_own_ratio = std::max(r.max_own_ratio, ratio);
      if (ratio > 2.0) ++r.own_violations;
    }
    for (const auto &[ub, beta] : partners) {
      require(beta.epsilon() < 2.0 * ea, "partner radius must be below twice the cylinder radius");
      if (!beta.contains(t0, x0)) continue;
      ++r.partners;
      const double lo = std::max(alpha.time_start(), beta.time_start());
      const double hi = std::min(alpha.time_end(), beta.time_end());
      const auto bb = integrate_flow(ub, t0, x0, lo);
      const auto bf = integrate_flow(ub, t0, x0, hi);
      for (int i = 0; i < n_probe; ++i) {
        const double t = lo + i * (hi - lo) / (n_probe - 1);
        const Vec<D> pb = t <= t0 ? bb.at(t) : bf.at(t);
        const double ratio = gap(pb, own(t)) / ea;
        r.max_cross_ratio = std::max(r.max_cross_ratio, ratio);
        if (ratio > 1.0) ++r.cross_violations;
      }
    }
  }
  return r;
}

}  // namespace skewmax
