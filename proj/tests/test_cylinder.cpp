#include <gtest/gtest.h>

#include <sstream>

#include "skewmax/checks.hpp"

using namespace skewmax;

namespace {

const Domain<2> unit2{1.0, 0.0, 1.0};

SkewedCylinder<2> cylinder(const char *name, std::vector<double> params, double eps, double t, Vec<2> x) {
  return make_cylinder(make_analytic_field<2>(name, std::move(params), unit2), make_mollifier<2>(), eps, t, x);
}

}  // namespace

TEST(Cylinder, ZeroFieldIsUpright) {
  const Vec<2> x{{0.5, 0.5}};
  const auto c = cylinder("zero", {}, 0.1, 0.5, x);
  EXPECT_TRUE(c.contains(0.5, Vec<2>{{0.59, 0.5}}));
  EXPECT_FALSE(c.contains(0.5, Vec<2>{{0.61, 0.5}}));
  EXPECT_TRUE(c.contains(0.5 + 0.0099, Vec<2>{{0.5, 0.45}}));
  EXPECT_FALSE(c.contains(0.5 + 0.0101, x));
  EXPECT_EQ(c.position(0.505), x);
  // wraps across the boundary
  const auto edge = cylinder("zero", {}, 0.1, 0.5, Vec<2>{{0.02, 0.5}});
  EXPECT_TRUE(edge.contains(0.5, Vec<2>{{0.95, 0.5}}));
}

TEST(Cylinder, ConstantFieldTilts) {
  const auto c = cylinder("constant", {1.0, 0.5}, 0.1, 0.5, Vec<2>{{0.5, 0.5}});
  const auto p = c.position(0.505);
  EXPECT_NEAR(p[0], 0.505, 1e-14);
  EXPECT_NEAR(p[1], 0.5025, 1e-14);
  EXPECT_TRUE(c.contains(0.505, Vec<2>{{0.6, 0.5025}}));
  EXPECT_FALSE(c.contains(0.495, Vec<2>{{0.6, 0.5025}}));
}

TEST(Cylinder, MeasureAndDilation) {
  const auto c = cylinder("taylor-green", {}, 0.1, 0.5, Vec<2>{{0.3, 0.3}});
  EXPECT_NEAR(c.measure(), 6.2832e-4, 1e-8);
  const auto same = dilate(c, 1.0);
  EXPECT_EQ(same.radius(), c.radius());
  EXPECT_EQ(same.position(0.505), c.position(0.505));
  const auto small = cylinder("taylor-green", {}, 0.05, 0.5, Vec<2>{{0.3, 0.3}});
  const auto nine = dilate(small, 9.0);
  EXPECT_NEAR(nine.radius(), 0.45, 1e-15);
  EXPECT_EQ(nine.time_start(), small.time_start());
  EXPECT_NEAR(nine.measure(), 81.0 * small.measure(), 1e-15);
  EXPECT_THROW(dilate(c, 9.0), precondition_error);
  EXPECT_THROW(dilate(c, 0.0), precondition_error);
}

TEST(Cylinder, RejectsSpanOutsideHorizon) {
  EXPECT_THROW(cylinder("zero", {}, 0.1, 1.5, Vec<2>{}), precondition_error);
  const auto c = cylinder("zero", {}, 0.1, 0.005, Vec<2>{});
  EXPECT_FALSE(c.eligible(unit2));
}

TEST(Average, OneAndSecondMoment) {
  const Vec<2> x{{0.5, 0.5}};
  const auto c = cylinder("zero", {}, 0.1, 0.5, x);
  EXPECT_NEAR(average_over(c, [](double, const Vec<2> &) { return 1.0; }, 16, 256), 1.0, 1e-14);
  const double m2 = average_over(
      c, [&](double, const Vec<2> &y) { const auto d = torus_delta(y, x, 1.0); return dot(d, d); }, 16, 256);
  EXPECT_NEAR(m2, 0.01 / 2.0, 1e-3 * 0.005);
  const double inside = average_over(c, [&](double s, const Vec<2> &y) { return c.contains(s, y) ? 1.0 : 0.0; }, 16, 256);
  EXPECT_EQ(inside, 1.0);
}

TEST(Average, SatisfiesJensen) {
  const auto c = cylinder("taylor-green", {}, 0.08, 0.5, Vec<2>{{0.2, 0.7}});
  auto f = [](double s, const Vec<2> &y) { return 1.0 + s + std::sin(6.0 * y[0]) * std::cos(5.0 * y[1]); };
  const double mean = average_over(c, f, 16, 256);
  for (int p : {2, 3}) {
    const double mp = average_over(c, [&](double s, const Vec<2> &y) { return std::pow(f(s, y), p); }, 16, 256);
    EXPECT_LE(std::pow(mean, p), mp * (1.0 + 1e-12));
  }
}

TEST(Average, RejectsNonFiniteAndSmallRules) {
  const auto c = cylinder("zero", {}, 0.1, 0.5, Vec<2>{});
  EXPECT_THROW(average_over(c, [](double, const Vec<2> &) { return NAN; }, 16, 256), numerical_error);
  EXPECT_THROW(CylinderQuadrature<2>(4, 256), precondition_error);
}

TEST(Admissibility, ShearThresholds) {
  const auto shear = make_analytic_field<2>("linear-shear", {}, unit2);
  const auto m = make_mollifier<2>();
  const HLMaximalField<2> hl(shear, 32, 1);
  const Vec<2> x{{0.5, 0.5}};
  const auto big = is_admissible(make_cylinder(shear, m, 0.1, 0.5, x), 0.01, hl);
  EXPECT_TRUE(big.eligible);
  EXPECT_NEAR(big.value, 0.01, 1e-12);
  EXPECT_FALSE(big.admissible);
  const auto small = is_admissible(make_cylinder(shear, m, 0.05, 0.5, x), 0.01, hl);
  EXPECT_NEAR(small.value, 0.0025, 1e-12);
  EXPECT_TRUE(small.admissible);

  const std::vector<double> grid{0.1, 0.05, 0.025};
  const auto scan = smallest_admissible_radius(shear, m, 0.01, 0.5, x, grid, hl, default_admissibility_quadrature<2>());
  ASSERT_TRUE(scan.largest.has_value());
  EXPECT_EQ(*scan.largest, 0.05);
  EXPECT_EQ(scan.mask, (std::vector<bool>{false, true, true}));
  const std::vector<double> ascending{0.025, 0.05};
  EXPECT_THROW(smallest_admissible_radius(shear, m, 0.01, 0.5, x, ascending, hl, default_admissibility_quadrature<2>()),
               precondition_error);
}

TEST(Admissibility, IneligibleCylinderIsNotAdmissible) {
  const auto zero = make_analytic_field<2>("zero", {}, unit2);
  const HLMaximalField<2> hl(zero, 16, 1);
  const auto r = is_admissible(make_cylinder(zero, make_mollifier<2>(), 0.1, 0.995, Vec<2>{}), 1.0, hl);
  EXPECT_FALSE(r.eligible);
  EXPECT_FALSE(r.admissible);
}

TEST(Intersection, Examples) {
  const double eps = 0.05;
  const auto a = cylinder("zero", {}, eps, 0.5, Vec<2>{{0.3, 0.3}});
  EXPECT_FALSE(cylinders_intersect(a, cylinder("zero", {}, eps, 0.5, Vec<2>{{0.3 + 2 * eps, 0.3}})).intersects);
  EXPECT_TRUE(cylinders_intersect(a, cylinder("zero", {}, eps, 0.5, Vec<2>{{0.3 + 1.9 * eps, 0.3}})).intersects);
  EXPECT_FALSE(cylinders_intersect(a, cylinder("zero", {}, eps, 0.5 + 3 * eps * eps, Vec<2>{{0.3, 0.3}})).intersects);
  EXPECT_THROW(cylinders_intersect(a, a, 8), precondition_error);
}

TEST(DualMeasure, ZeroFieldIsExact) {
  const auto zero = make_analytic_field<2>("zero", {}, unit2);
  const auto d = dual_cylinder_measure(zero, make_mollifier<2>(), 0.1, 0.5, Vec<2>{{0.5, 0.5}}, 4096, 1);
  EXPECT_NEAR(d.estimate, d.reference, 1e-15);
  EXPECT_EQ(d.roundtrip_fraction, 1.0);
}

TEST(DualMeasure, TaylorGreenPreservesMeasure) {
  const auto tg = make_analytic_field<2>("taylor-green", {}, unit2);
  const auto d = dual_cylinder_measure(tg, make_mollifier<2>(), 0.1, 0.5, Vec<2>{{0.3, 0.6}}, 65536, 2);
  EXPECT_NEAR(d.estimate / d.reference, 1.0, 0.02);
  EXPECT_LE(3.0 * d.std_error / d.reference, 0.02);
  EXPECT_THROW(dual_cylinder_measure(tg, make_mollifier<2>(), 0.1, 0.5, Vec<2>{}, 100, 2), precondition_error);
}

TEST(Nesting, UprightCylindersNest) {
  const Vec<2> x{{0.4, 0.4}};
  EXPECT_FALSE(find_non_nested(cylinder("zero", {}, 0.05, 0.5, x), cylinder("zero", {}, 0.1, 0.5, x)).has_value());
}

TEST(Nesting, StrongFlowsBreakNesting) {
  // Different radii give different mollified velocities, so the centerlines
  // drift apart. At amplitude 200 an eps = 0.1 cylinder is not contained in
  // the eps = L/8 cylinder with the same centre for almost every centre.
  int found = 0;
  for (const Vec<2> x : {Vec<2>{{0.1, 0.2}}, Vec<2>{{0.3, 0.05}}, Vec<2>{{0.45, 0.3}}, Vec<2>{{0.15, 0.4}}}) {
    const auto small = cylinder("taylor-green", {200.0}, 0.1, 0.5, x);
    const auto big = cylinder("taylor-green", {200.0}, 0.125, 0.5, x);
    if (const auto w = find_non_nested(small, big)) {
      EXPECT_TRUE(small.contains(w->first, w->second));
      EXPECT_FALSE(big.contains(w->first, w->second));
      ++found;
    }
  }
  EXPECT_GT(found, 0);
}

TEST(FamilyIo, RoundTripAndErrors) {
  std::vector<CylinderSpec<2>> fam{{0.5, Vec<2>{{0.1, 0.2}}, 0.05}, {0.25, Vec<2>{{0.9, 0.3}}, 0.0125}};
  std::stringstream buf;
  write_cylinder_family(buf, fam);
  const auto back = read_cylinder_family<2>(buf);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].t, 0.25);
  EXPECT_EQ(back[1].x, fam[1].x);
  EXPECT_EQ(back[1].eps, 0.0125);
  std::istringstream short_row("0.5,0.1,0.05\n");
  EXPECT_THROW(read_cylinder_family<2>(short_row), io_error);
  std::istringstream junk("0.5,abc,0.2,0.05\n");
  EXPECT_THROW(read_cylinder_family<2>(junk), io_error);
}
