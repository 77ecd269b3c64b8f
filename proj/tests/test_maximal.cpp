#include <gtest/gtest.h>

#include <sstream>

#include "skewmax/checks.hpp"

using namespace skewmax;

namespace {

const Domain<2> unit2{1.0, 0.0, 1.0};

struct Fixture {
  VelocityField<2> field;
  Mollifier<2> m = make_mollifier<2>();
  HLMaximalField<2> hl;
  SpacetimeGrid<2> grid = SpacetimeGrid<2>::cell_centered(0.3, 0.7, 3, Vec<2>{}, Vec<2>::filled(1.0), 1.0 / 8);
  std::vector<double> eps{0.1, 0.0707, 0.05};

  explicit Fixture(VelocityField<2> f) : field(std::move(f)), hl(field, 16, 5) {}

  MaximalField<2> run(const SpacetimeFunction<2> &f, double eta, int workers = 1) const {
    SweepOptions opt;
    opt.workers = workers;
    return skewed_maximal(field, m, f, eta, grid, eps, hl, opt);
  }
};

SpacetimeFunction<2> box(double t_c = 0.5) {
  return box_indicator<2>(t_c, 0.05, Vec<2>{{0.5, 0.5}}, 0.2, 1.0).fn;
}

}  // namespace

TEST(Maximal, ConstantFunctionGivesItsModulus) {
  const Fixture fx(make_analytic_field<2>("taylor-green", {}, unit2));
  const auto mf = fx.run(constant_function<2>(-3.0).fn, 0.05);
  for (std::size_t p = 0; p < mf.values.size(); ++p) {
    if (mf.flagged(p)) EXPECT_EQ(mf.values[p], 0.0);
    else EXPECT_NEAR(mf.values[p], 3.0, 1e-14);
  }
  EXPECT_LT(mf.flagged_fraction(), 1.0);
}

TEST(Maximal, ZeroFieldMatchesUprightBruteForce) {
  const Fixture fx(make_analytic_field<2>("zero", {}, unit2));
  const auto f = smooth_bump<2>(0.5, 0.1, Vec<2>{{0.5, 0.5}}, 0.3, 1.0).fn;
  const auto mf = fx.run(f, 0.01);
  EXPECT_EQ(mf.flagged_fraction(), 0.0);
  const auto ref = upright_maximal<2>(f, unit2, fx.grid, fx.eps, 16, 128);
  for (std::size_t p = 0; p < ref.size(); ++p) EXPECT_NEAR(mf.values[p], ref[p], 1e-12);
}

TEST(Maximal, IsSublinearAndHomogeneous) {
  const Fixture fx(make_analytic_field<2>("taylor-green", {}, unit2));
  const auto f = box(0.5);
  const auto g = smooth_bump<2>(0.45, 0.1, Vec<2>{{0.3, 0.6}}, 0.25, 1.0).fn;
  SpacetimeFunction<2> sum{[&](double t, const Vec<2> &x) { return f(t, x) + g(t, x); }, std::nullopt};
  SpacetimeFunction<2> scaled{[&](double t, const Vec<2> &x) { return -2.5 * f(t, x); }, std::nullopt};
  const auto mf = fx.run(f, 0.05), mg = fx.run(g, 0.05), ms = fx.run(sum, 0.05), ma = fx.run(scaled, 0.05);
  for (std::size_t p = 0; p < mf.values.size(); ++p) {
    EXPECT_LE(ms.values[p], mf.values[p] + mg.values[p] + 1e-12);
    EXPECT_NEAR(ma.values[p], 2.5 * mf.values[p], 1e-12);
  }
}

TEST(Maximal, DominatesEveryAdmissibleAverage) {
  const Fixture fx(make_analytic_field<2>("taylor-green", {}, unit2));
  const auto f = box(0.5);
  const auto mf = fx.run(f, 0.05);
  for (std::size_t i = 0; i < fx.eps.size(); ++i) {
    const auto fe = f_epsilon(fx.field, fx.m, f, fx.eps[i], fx.grid);
    for (std::size_t p = 0; p < fe.size(); ++p)
      if (mf.mask[p] >> i & 1) EXPECT_GE(mf.values[p], std::abs(fe[p]) - 1e-14);
  }
}

TEST(Maximal, ArgmaxIsAnAdmissibleGridRadius) {
  const Fixture fx(make_analytic_field<2>("taylor-green", {2.0}, unit2));
  const auto mf = fx.run(box(0.5), 0.05);
  for (std::size_t p = 0; p < mf.values.size(); ++p) {
    if (mf.flagged(p)) {
      EXPECT_EQ(mf.argmax_eps[p], 0.0);
      continue;
    }
    const auto it = std::find(fx.eps.begin(), fx.eps.end(), mf.argmax_eps[p]);
    ASSERT_NE(it, fx.eps.end());
    EXPECT_TRUE(mf.mask[p] >> (it - fx.eps.begin()) & 1);
    EXPECT_EQ(mf.admissible_count(p), std::popcount(mf.mask[p]));
  }
}

TEST(Maximal, StrongShearFlagsPoints) {
  // |grad u| = 40 everywhere, so eps^2 * 40 < 0.01 fails for every grid radius
  const Fixture fx(make_analytic_field<2>("linear-shear", {40.0}, unit2));
  const auto mf = fx.run(box(0.5), 0.01);
  EXPECT_EQ(mf.flagged_fraction(), 1.0);
  EXPECT_EQ(mf.max_value(), 0.0);
}

TEST(Maximal, IndependentOfWorkerCount) {
  const Fixture fx(make_analytic_field<2>("taylor-green", {}, unit2));
  const auto one = fx.run(box(0.5), 0.05, 1), three = fx.run(box(0.5), 0.05, 3);
  EXPECT_EQ(one.values, three.values);
  EXPECT_EQ(one.mask, three.mask);
}

TEST(Maximal, RejectsBadInputs) {
  const Fixture fx(make_analytic_field<2>("zero", {}, unit2));
  EXPECT_THROW(fx.run(box(0.5), 0.0), precondition_error);
  const std::vector<double> too_big{0.2};
  EXPECT_THROW(skewed_maximal(fx.field, fx.m, box(0.5), 0.1, fx.grid, too_big, fx.hl), precondition_error);
}

TEST(GridHelpers, NormsAndLevels) {
  const std::vector<double> v{1.0, -2.0, 0.0, 3.0};
  EXPECT_DOUBLE_EQ(grid_norm(v, 0.5, 1.0), 3.0);
  EXPECT_DOUBLE_EQ(grid_norm(v, 0.5, 2.0), std::sqrt(7.0));
  EXPECT_EQ(grid_norm(v, 0.5, INFINITY), 3.0);
  EXPECT_EQ(superlevel_measure(v, 0.5, 0.25), 0.5);
  const auto e = default_epsilon_grid(1.0 / 128, 1.0);
  EXPECT_NEAR(e.front(), 2.0 / 128, 1e-15);
  EXPECT_EQ(e.back(), 0.125);
  const auto g = SpacetimeGrid<2>::cell_centered(0.0, 1.0, 4, Vec<2>{}, Vec<2>::filled(0.5), 0.125);
  EXPECT_EQ(g.size(), 64u);
  EXPECT_NEAR(g.time(63), 0.875, 1e-15);
  EXPECT_NEAR(g.point(63)[1], 0.4375, 1e-15);
}

TEST(GridHelpers, CsvHasOneRowPerPoint) {
  const Fixture fx(make_analytic_field<2>("zero", {}, unit2));
  const auto mf = fx.run(box(0.5), 0.01);
  std::ostringstream out;
  write_maximal_csv(out, mf);
  const auto text = out.str();
  EXPECT_EQ(text.rfind("t,x_1,x_2,value,argmax_eps,admissible_count\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), mf.values.size() + 1);
}
