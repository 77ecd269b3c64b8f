#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "skewmax/checks.hpp"

using namespace skewmax;

namespace {

const Domain<2> unit2{1.0, 0.0, 1.0};

struct Maker {
  VelocityField<2> field;
  Mollifier<2> m = make_mollifier<2>();
  SkewedCylinder<2> operator()(double eps, double t, Vec<2> x) const { return make_cylinder(field, m, eps, t, x); }
};

const Maker upright{make_analytic_field<2>("zero", {}, unit2)};

}  // namespace

TEST(CoveringConstant, ExplicitValue) {
  EXPECT_EQ(covering_constant_bound(2), 70065.0);
  EXPECT_EQ(covering_constant_bound(1), 2.0 * 16.0 / 3.0 * 81.0 + 9.0);
}

TEST(Greedy, DisjointFamilyIsKeptWhole) {
  std::vector<SkewedCylinder<2>> fam;
  for (int i = 0; i < 4; ++i) fam.push_back(upright(0.05, 0.5, Vec<2>{{0.1 + 0.2 * i, 0.5}}));
  const auto r = greedy_cover(fam);
  EXPECT_EQ(r.selected.size(), 4u);
  EXPECT_TRUE(r.removals.empty());
  EXPECT_EQ(r.disjointness_violations, 0u);
  EXPECT_NEAR(r.selected_measure, 4 * fam[0].measure(), 1e-18);
}

TEST(Greedy, DuplicatesCollapseToOne) {
  std::vector<SkewedCylinder<2>> fam(5, upright(0.05, 0.5, Vec<2>{{0.3, 0.3}}));
  const auto r = greedy_cover(fam);
  ASSERT_EQ(r.selected.size(), 1u);
  EXPECT_EQ(r.selected[0], 0u);
  EXPECT_EQ(r.removals.size(), 4u);
}

TEST(Greedy, MatchesReferenceOnRandomUprightFamily) {
  std::mt19937_64 e(21);
  std::uniform_real_distribution<double> u01;
  std::vector<SkewedCylinder<2>> fam;
  for (int i = 0; i < 100; ++i) {
    const double eps = 0.01 + 0.05 * u01(e);
    fam.push_back(upright(eps, 0.45 + 0.1 * u01(e), Vec<2>{{u01(e), u01(e)}}));
  }
  const auto r = greedy_cover(fam, 64, 65536, 3, 2);
  EXPECT_EQ(r.selected, oracle::reference_greedy(fam, 64));
  EXPECT_EQ(r.disjointness_violations, 0u);
  for (std::size_t j = 1; j < r.sup_at_step.size(); ++j) EXPECT_LE(r.sup_at_step[j], r.sup_at_step[j - 1]);
  for (const auto &rm : r.removals) EXPECT_LT(fam[rm.index].epsilon(), 2.0 * fam[r.selected[rm.selection]].epsilon());
  // the union is at most the explicit constant times the kept measure
  EXPECT_LE(r.union_mc.estimate, covering_constant_bound(2) * r.selected_measure);
  EXPECT_GE(r.empirical_constant, 1.0 - 3.0 * r.union_mc.std_error / r.selected_measure);
}

TEST(Greedy, CheckPassesOnTaylorGreenFamily) {
  const auto tg = make_analytic_field<2>("taylor-green", {}, unit2);
  const auto m = make_mollifier<2>();
  const HLMaximalField<2> hl(tg, 32, 9);
  const AdmissibleSampler<2> smp{tg, m, hl, 0.01};
  const auto fam = random_admissible_family(smp, 40, 0.004, 0.03, 8);
  ASSERT_EQ(fam.size(), 40u);
  const auto r = check_cover(fam, 64, 65536, 8);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.metric("radius_rule_violations"), 0.0);
}

TEST(Greedy, WritersListSelections) {
  std::vector<SkewedCylinder<2>> fam{upright(0.05, 0.5, Vec<2>{{0.2, 0.2}}), upright(0.08, 0.5, Vec<2>{{0.25, 0.2}})};
  const auto r = greedy_cover(fam, 64, 65536, 1);
  std::ostringstream csv, summary;
  write_cover_csv(csv, fam, r);
  write_cover_summary(summary, 2, r);
  EXPECT_EQ(csv.str().rfind("order,index,t,x_1,x_2,epsilon\n0,1,", 0), 0u);
  EXPECT_NE(summary.str().find("selected 1\n"), std::string::npos);
  EXPECT_NE(summary.str().find("constant_bound 70065\n"), std::string::npos);
}

TEST(UnionMeasure, SingleDisjointAndDilated) {
  const auto a = upright(0.05, 0.5, Vec<2>{{0.3, 0.3}});
  const auto b = upright(0.05, 0.5, Vec<2>{{0.7, 0.7}});
  const auto one = union_measure<2>({a}, 262144, 1);
  EXPECT_NEAR(one.estimate, a.measure(), 4.0 * one.std_error + 1e-18);
  const auto two = union_measure<2>({a, b}, 262144, 2);
  EXPECT_NEAR(two.estimate, 2.0 * a.measure(), 4.0 * two.std_error);
  const auto big = union_measure<2>({dilate(a, 3.0)}, 262144, 3);
  EXPECT_NEAR(big.estimate / one.estimate, 9.0, 0.2);
  EXPECT_THROW(union_measure<2>({a}, 1000, 1), precondition_error);
  EXPECT_THROW(union_measure<2>({}, 65536, 1), precondition_error);
}

TEST(Satellites, RadiusClassesPartition) {
  EXPECT_EQ(radius_class(1.0, 1.5), 0);
  EXPECT_EQ(radius_class(1.0, 1.0), 0);
  EXPECT_EQ(radius_class(1.0, 0.6), 1);
  EXPECT_EQ(radius_class(1.0, 0.5), 1);
  EXPECT_EQ(radius_class(1.0, 0.25), 2);
  EXPECT_EQ(radius_class(1.0, 0.2), 3);
}

TEST(Satellites, CopiesOfTheAnchorHaveRatioOne) {
  const auto a = upright(0.05, 0.5, Vec<2>{{0.5, 0.5}});
  const std::vector<SkewedCylinder<2>> sats(3, a);
  const auto r = satellite_union_check(a, sats, 64, 128, 262144, 4);
  EXPECT_TRUE(r.partition_ok);
  EXPECT_EQ(r.middle_violations, 0u);
  EXPECT_NEAR(r.ratio, 1.0, 4.0 * r.union_mc.std_error / a.measure());
  const auto split = r.splits.front();
  EXPECT_EQ(split.future, 0.0);
  EXPECT_EQ(split.past, 0.0);
  EXPECT_NEAR(split.middle, a.measure(), 1e-18);
}

TEST(Satellites, TimeSplitAddsUp) {
  const auto a = upright(0.08, 0.5, Vec<2>{{0.5, 0.5}});
  const auto b = upright(0.12, 0.503, Vec<2>{{0.55, 0.5}});
  const auto s = time_split(a, b);
  EXPECT_GT(s.future, 0.0);
  EXPECT_GT(s.past, 0.0);
  EXPECT_NEAR(s.future + s.past + s.middle, b.measure(), 1e-15);
}

TEST(Satellites, RejectsNonSatellites) {
  const auto a = upright(0.05, 0.5, Vec<2>{{0.5, 0.5}});
  EXPECT_THROW(satellite_union_check<2>(a, {upright(0.11, 0.5, Vec<2>{{0.5, 0.5}})}), precondition_error);
  EXPECT_THROW(satellite_union_check<2>(a, {upright(0.05, 0.5, Vec<2>{{0.1, 0.1}})}), precondition_error);
}

TEST(Closeness, Examples) {
  const double eps = 0.05;
  const auto a = upright(eps, 0.5, Vec<2>{{0.3, 0.3}});
  EXPECT_NEAR(closeness_check(a, a).max_ratio, 1.0, 1e-15);
  const auto touching = closeness_check(a, upright(eps, 0.5, Vec<2>{{0.3 + 1.9 * eps, 0.3}}));
  EXPECT_NEAR(touching.max_ratio, 2.9, 1e-12);
  EXPECT_LT(touching.max_ratio, 5.0);
  EXPECT_EQ(touching.violations, 0u);
  EXPECT_THROW(closeness_check(a, upright(eps, 0.5, Vec<2>{{0.6, 0.3}})), precondition_error);
  EXPECT_THROW(closeness_check(a, upright(0.1, 0.5, Vec<2>{{0.3, 0.3}})), precondition_error);
}

TEST(Closeness, StreamlineFromTheCentreIsTheCenterline) {
  const Maker tg{make_analytic_field<2>("taylor-green", {}, unit2)};
  const MollifiedVelocity<2> u(tg.field, tg.m, 0.06);
  const auto a = make_cylinder(u, 0.5, Vec<2>{{0.2, 0.3}});
  const auto r = streamline_closeness_check<2>(u, a, {{0.5, Vec<2>{{0.2, 0.3}}}});
  EXPECT_EQ(r.seeds, 1u);
  EXPECT_LT(r.max_own_ratio, 1e-12);
  EXPECT_THROW(streamline_closeness_check<2>(u, a, {{0.5, Vec<2>{{0.5, 0.5}}}}), precondition_error);
}

TEST(Closeness, StreamlinesStayClose) {
  const Maker tg{make_analytic_field<2>("taylor-green", {}, unit2)};
  const MollifiedVelocity<2> ua(tg.field, tg.m, 0.04), ub(tg.field, tg.m, 0.06);
  const auto a = make_cylinder(ua, 0.5, Vec<2>{{0.2, 0.3}});
  const auto b = make_cylinder(ub, 0.5005, Vec<2>{{0.21, 0.3}});
  std::vector<std::pair<double, Vec<2>>> seeds{{0.5, Vec<2>{{0.22, 0.31}}}, {0.501, a.position(0.501)}};
  const auto r = streamline_closeness_check<2>(ua, a, seeds, {{ub, b}});
  EXPECT_EQ(r.own_violations, 0u);
  EXPECT_EQ(r.cross_violations, 0u);
  EXPECT_GT(r.partners, 0u);
}
