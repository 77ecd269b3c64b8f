#include <gtest/gtest.h>

#include "skewmax/checks.hpp"
#include "skewmax/flow.hpp"

using namespace skewmax;

namespace {

const Domain<2> unit2{1.0, 0.0, 1.0};

MollifiedVelocity<2> mollified(const char *name, std::vector<double> params, double eps) {
  return MollifiedVelocity<2>(make_analytic_field<2>(name, std::move(params), unit2), make_mollifier<2>(), eps);
}

}  // namespace

TEST(Flow, ZeroFieldStaysPut) {
  const auto u = mollified("zero", {}, 0.1);
  const Vec<2> x{{0.3, 0.6}};
  EXPECT_EQ(flow_map(u, 0.5, x, 0.51), x);
  EXPECT_EQ(flow_inverse_check(u, 0.5, x, 0.49), 0.0);
}

TEST(Flow, ConstantFieldTranslates) {
  const auto u = mollified("constant", {0.7, -0.2}, 0.1);
  const Vec<2> x{{0.3, 0.6}};
  const auto y = flow_map(u, 0.5, x, 0.51);
  EXPECT_NEAR(y[0], 0.3 + 0.007, 1e-14);
  EXPECT_NEAR(y[1], 0.6 - 0.002, 1e-14);
  EXPECT_LT(flow_inverse_check(u, 0.5, x, 0.51), 1e-14);
}

TEST(Flow, ShearIsIntegratedExactly) {
  const auto u = mollified("linear-shear", {1.0}, 0.1);
  const Vec<2> x{{0.2, 0.5}};
  const auto y = flow_map(u, 0.3, x, 0.31);
  EXPECT_NEAR(y[0], 0.2 + 0.5 * 0.01, 1e-14);
  EXPECT_EQ(y[1], 0.5);
}

TEST(Flow, TaylorGreenRoundTrip) {
  const double eps = 0.05;
  const auto u = mollified("taylor-green", {}, eps);
  const Vec<2> x{{0.1, 0.2}};
  EXPECT_LE(flow_inverse_check(u, 0.5, x, 0.5 + eps * eps), 1e-6 * eps);
  EXPECT_LE(flow_inverse_check(u, 0.5, x, 0.5 - eps * eps), 1e-6 * eps);
}

TEST(Flow, StepCountRespectsBudget) {
  EXPECT_EQ(detail::step_count(0.01, 0.1, 64), 64);
  EXPECT_EQ(detail::step_count(-0.01, 0.1, 128), 128);
  EXPECT_EQ(detail::step_count(0.005, 0.1, 64), 32);
  EXPECT_THROW(detail::step_count(0.01, 0.1, 32), precondition_error);
  EXPECT_THROW(detail::step_count(0.01, 1e-8, 64), numerical_error);
}

TEST(Flow, CenterlineIsAnchoredAndAscending) {
  const double eps = 0.08;
  const auto u = mollified("taylor-green", {}, eps);
  const Vec<2> x{{0.4, 0.15}};
  const auto c = centerline(u, 0.5, x);
  ASSERT_EQ(c.size(), 2u * kDefaultStepBudget + 1);
  EXPECT_EQ(c.points[kDefaultStepBudget], x);
  EXPECT_EQ(c.times[kDefaultStepBudget], 0.5);
  EXPECT_NEAR(c.first_time(), 0.5 - eps * eps, 1e-15);
  EXPECT_NEAR(c.last_time(), 0.5 + eps * eps, 1e-15);
  for (std::size_t k = 1; k < c.size(); ++k) EXPECT_LT(c.times[k - 1], c.times[k]);
  EXPECT_EQ(c.at(0.5), x);
  EXPECT_EQ(c.at(-1.0), c.points.front());
  // matches an independent integration to the same endpoint
  EXPECT_LT(norm(c.at(c.last_time()) - flow_map(u, 0.5, x, 0.5 + eps * eps)), 1e-15);
}

TEST(Flow, RungeKuttaIsFourthOrder) {
  // A large amplitude makes the truncation error visible above round-off.
  const double eps = 0.1;
  const auto u = mollified("taylor-green", {200.0}, eps);
  const Vec<2> x{{0.13, 0.29}};
  const double s = 0.5 + eps * eps;
  const auto reference = flow_map(u, 0.5, x, s, 4096);
  const double coarse = norm(flow_map(u, 0.5, x, s, 64) - reference);
  const double fine = norm(flow_map(u, 0.5, x, s, 128) - reference);
  ASSERT_GT(coarse, 1e-12);
  EXPECT_GE(coarse / fine, 8.0);
}

TEST(Flow, JacobianDeterminantIsOne) {
  const double eps = 0.06;
  const auto u = mollified("taylor-green", {3.0}, eps);
  const double h = 1e-6, s = 0.4 + eps * eps;
  for (const Vec<2> x : {Vec<2>{{0.1, 0.2}}, Vec<2>{{0.7, 0.35}}, Vec<2>{{0.5, 0.9}}}) {
    Mat<2> jac;
    for (int j = 0; j < 2; ++j) {
      auto p = x, m = x;
      p[j] += h;
      m[j] -= h;
      const auto d = (flow_map(u, 0.4, p, s) - flow_map(u, 0.4, m, s)) * (1.0 / (2 * h));
      for (int i = 0; i < 2; ++i) jac[i][j] = d[i];
    }
    EXPECT_NEAR(jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0], 1.0, 1e-6);
  }
}

TEST(Flow, CheckPassesOnTaylorGreen) {
  const auto tg = make_analytic_field<2>("taylor-green", {}, unit2);
  const auto r = check_flow(tg, make_mollifier<2>(), 20, 2, 4096, 5);
  EXPECT_TRUE(r.passed) << r.note;
  EXPECT_LE(r.metric("roundtrip_worst_over_eps"), 1e-6);
}
