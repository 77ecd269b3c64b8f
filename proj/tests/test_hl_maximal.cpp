#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace skewmax;

namespace {

template <int D>
ScalarGrid<D> random_grid(int n, std::uint64_t seed) {
  std::mt19937_64 e(seed);
  std::normal_distribution<double> g;
  ScalarGrid<D> s{n, 1.0, std::vector<double>(ScalarGrid<D>::node_count(n))};
  for (double &v : s.values) v = g(e);
  return s;
}

}  // namespace

TEST(HlMaximal, ConstantIsFixed) {
  ScalarGrid<2> g{16, 1.0, std::vector<double>(256, -2.5)};
  const auto m = hl_maximal(g, default_radius_grid(g.spacing(), 1.0));
  for (double v : m.values) EXPECT_NEAR(v, 2.5, 1e-13);
}

TEST(HlMaximal, IndicatorOnALineMatchesBruteForce) {
  ScalarGrid<1> g{256, 1.0, std::vector<double>(256, 0.0)};
  for (int i = 100; i < 140; ++i) g.values[i] = 1.0;
  const auto radii = default_radius_grid(g.spacing(), 1.0);
  const auto fast = hl_maximal(g, radii);
  const auto slow = oracle::brute_force_hl(g, radii);
  for (std::size_t f = 0; f < g.size(); ++f) EXPECT_NEAR(fast.values[f], slow[f], 1e-12) << f;
  // inside the indicator the value is one; far away it decays like 40 h / 2 r
  EXPECT_NEAR(fast.values[120], 1.0, 1e-15);
  EXPECT_GT(fast.values[0], 0.0);
  EXPECT_LT(fast.values[0], 0.5);
}

TEST(HlMaximal, RandomGridsMatchBruteForce) {
  {
    const auto g = random_grid<2>(16, 1);
    const auto radii = default_radius_grid(g.spacing(), 1.0);
    const auto fast = hl_maximal(g, radii);
    const auto slow = oracle::brute_force_hl(g, radii);
    for (std::size_t f = 0; f < g.size(); ++f) EXPECT_NEAR(fast.values[f], slow[f], 1e-12);
  }
  {
    const auto g = random_grid<3>(8, 2);
    const std::vector<double> radii{0.2, 0.3, 0.5};
    const auto fast = hl_maximal(g, radii);
    const auto slow = oracle::brute_force_hl(g, radii);
    for (std::size_t f = 0; f < g.size(); ++f) EXPECT_NEAR(fast.values[f], slow[f], 1e-12);
  }
}

TEST(HlMaximal, DominatesAndIsMonotoneAndBounded) {
  const auto g = random_grid<2>(32, 3);
  auto bigger = g;
  for (double &v : bigger.values) v = std::abs(v) + 0.1;
  const auto radii = default_radius_grid(g.spacing(), 1.0);
  const auto mg = hl_maximal(g, radii), mb = hl_maximal(bigger, radii);
  double sup = 0.0;
  for (double v : g.values) sup = std::max(sup, std::abs(v));
  for (std::size_t f = 0; f < g.size(); ++f) {
    EXPECT_GE(mg.values[f], std::abs(g.values[f]));
    EXPECT_LE(mg.values[f], mb.values[f] + 1e-14);
    EXPECT_LE(mg.values[f], sup + 1e-14);
  }
}

TEST(HlMaximal, RadiusGridValidation) {
  const double h = 1.0 / 32;
  const auto r = default_radius_grid(h, 1.0);
  EXPECT_NEAR(r.front(), 1.5 * h, 1e-15);
  EXPECT_EQ(r.back(), 0.5);
  EXPECT_NO_THROW(validate_radius_grid(r, h, 1.0));
  EXPECT_THROW(validate_radius_grid(std::vector<double>{}, h, 1.0), precondition_error);
  EXPECT_THROW(validate_radius_grid(std::vector<double>{0.5 * h}, h, 1.0), precondition_error);
  EXPECT_THROW(validate_radius_grid(std::vector<double>{0.1, 0.3}, h, 1.0), precondition_error);
  EXPECT_THROW(validate_radius_grid(std::vector<double>{0.1, 0.6}, h, 1.0), precondition_error);
  ScalarGrid<2> bad{16, 1.0, std::vector<double>(10)};
  EXPECT_THROW(hl_maximal(bad, r), precondition_error);
}

TEST(HlMaximalField, ShearGradientIsIdenticallyOne) {
  const auto shear = make_analytic_field<2>("linear-shear", {}, Domain<2>{1.0, 0.0, 1.0});
  const HLMaximalField<2> hl(shear, 32, 5);
  EXPECT_EQ(hl.time_samples(), 1);
  for (double v : hl.slice(0)) EXPECT_NEAR(v, 1.0, 1e-13);
  EXPECT_NEAR(hl.value(0.3, Vec<2>{{0.123, 0.987}}), 1.0, 1e-13);
  const HLMaximalField<2> squared(make_analytic_field<2>("linear-shear", {3.0}, Domain<2>{1.0, 0.0, 1.0}), 16, 1, 2.0);
  EXPECT_NEAR(squared.max_value(), 9.0, 1e-12);
}

TEST(HlMaximalField, UnsteadyFieldsGetTimeSamples) {
  const auto tg = make_analytic_field<2>("taylor-green", {1.0, 2.0}, Domain<2>{1.0, 0.0, 1.0});
  const HLMaximalField<2> hl(tg, 16, 5);
  EXPECT_EQ(hl.time_samples(), 5);
  // the field decays, so its maximal function does too
  EXPECT_GT(hl.value(0.0, Vec<2>{{0.1, 0.1}}), hl.value(1.0, Vec<2>{{0.1, 0.1}}));
  EXPECT_THROW(HLMaximalField<2>(tg, 16, 5, 0.5), precondition_error);
}
