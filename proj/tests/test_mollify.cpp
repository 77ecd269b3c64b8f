#include <gtest/gtest.h>

#include "oracles.hpp"
#include "skewmax/checks.hpp"

using namespace skewmax;

namespace {

const Domain<2> unit2{1.0, 0.0, 1.0};

// Midpoint lattice sum of the bump over [-1, 1]^d.
template <int D>
double lattice_mass(int n) {
  const double h = 2.0 / n;
  double z = 0.0;
  std::array<int, D> idx{};
  while (true) {
    double r2 = 0.0;
    for (int a = 0; a < D; ++a) {
      const double y = -1.0 + (idx[a] + 0.5) * h;
      r2 += y * y;
    }
    z += oracle::bump(r2);
    int a = D - 1;
    while (a >= 0 && ++idx[a] == n) idx[a--] = 0;
    if (a < 0) break;
  }
  return z * ipow(h, D);
}

}  // namespace

TEST(Mollifier, NormalizationMatchesIndependentIntegral) {
  const Mollifier<1> line(64);
  EXPECT_NEAR(line.normalization(), lattice_mass<1>(200000), 1e-8 * line.normalization());
  EXPECT_NEAR(line.integral(), 1.0, 1e-8);
  const Mollifier<2> disc(512);
  EXPECT_NEAR(disc.normalization(), lattice_mass<2>(2000), 1e-7);
  const Mollifier<3> ball(4096);
  EXPECT_NEAR(ball.normalization(), lattice_mass<3>(300), 1e-6);
}

TEST(Mollifier, SupportIsTheUnitBall) {
  const auto m = make_mollifier<2>();
  EXPECT_EQ(m.radial(1.5), 0.0);
  EXPECT_EQ(m(Vec<2>{{0.8, 0.8}}), 0.0);
  EXPECT_GT(m(Vec<2>{{0.5, 0.5}}), 0.0);
}

TEST(Mollifier, SupNormsInTwoDimensions) {
  const auto m = make_mollifier<2>();
  EXPECT_NEAR(m.sup_norm(), 0.7886, 1e-4);
  EXPECT_NEAR(m.moment_sup_norm(), 0.2831, 1e-4);
  // the moment peak is a maximum of r phi(r)
  for (double r = 0.01; r < 1.0; r += 0.01) EXPECT_LE(r * m.radial(r), m.moment_sup_norm() + 1e-15);
}

TEST(Mollifier, RejectsTooFewNodes) { EXPECT_THROW(Mollifier<2>(16), precondition_error); }

TEST(Mollify, ConstantAndAffineFieldsAreFixed) {
  const auto m = make_mollifier<2>();
  const Vec<2> x{{0.3, 0.7}};
  const auto c = make_analytic_field<2>("constant", {0.4, -1.1}, unit2);
  const auto uc = mollified_velocity(c, m, 0.1, 0.5, x);
  EXPECT_NEAR(uc[0], 0.4, 1e-14);
  EXPECT_NEAR(uc[1], -1.1, 1e-14);
  const auto shear = make_analytic_field<2>("linear-shear", {2.0}, unit2);
  const auto us = mollified_velocity(shear, m, 0.1, 0.5, x);
  EXPECT_NEAR(us[0], 1.4, 1e-13);
  EXPECT_NEAR(us[1], 0.0, 1e-15);
  EXPECT_NEAR(mollified_gradient(shear, m, 0.1, 0.5, x)[0][1], 2.0, 1e-13);
}

TEST(Mollify, TaylorGreenAgreesWithDenseConvolution) {
  const auto tg = make_analytic_field<2>("taylor-green", {}, unit2);
  const auto m = make_mollifier<2>();
  const Vec<2> x{{0.25, 0.25}};
  const auto ref = oracle::dense_convolution(tg, 0.05, 0.0, x, 400);
  for (auto route : {MollifyRoute::quadrature, MollifyRoute::spectral}) {
    const MollifiedVelocity<2> u(tg, m, 0.05, route);
    const auto v = u.velocity(0.0, x);
    const auto g = u.gradient(0.0, x);
    for (int i = 0; i < 2; ++i) {
      EXPECT_NEAR(v[i], ref.velocity[i], 1e-4) << route_name(route);
      for (int j = 0; j < 2; ++j) EXPECT_NEAR(g[i][j], ref.gradient[i][j], 1e-4) << route_name(route);
    }
  }
}

TEST(Mollify, SpectralAndQuadratureRoutesAgree) {
  const auto m2 = make_mollifier<2>();
  const auto tg = make_analytic_field<2>("taylor-green", {1.3, 0.5}, Domain<2>{2.0, 0.0, 1.0});
  const auto m3 = make_mollifier<3>();
  const auto abc = make_analytic_field<3>("abc", {}, Domain<3>{1.0, 0.0, 1.0});
  std::mt19937_64 e(4);
  std::uniform_real_distribution<double> u01;
  for (int s = 0; s < 20; ++s) {
    const double eps = 0.02 + 0.1 * u01(e);
    const Vec<2> x{{2 * u01(e), 2 * u01(e)}};
    const MollifiedVelocity<2> q(tg, m2, eps, MollifyRoute::quadrature), f(tg, m2, eps, MollifyRoute::spectral);
    EXPECT_LT(norm(q.velocity(0.3, x) - f.velocity(0.3, x)), 1e-9);
    EXPECT_LT(norm(q.d_epsilon(0.3, x) - f.d_epsilon(0.3, x)), 1e-8);
    const Vec<3> y{{u01(e), u01(e), u01(e)}};
    const double eps3 = 0.02 + 0.1 * u01(e);
    const MollifiedVelocity<3> q3(abc, m3, eps3, MollifyRoute::quadrature), f3(abc, m3, eps3, MollifyRoute::spectral);
    EXPECT_LT(norm(q3.velocity(0.3, y) - f3.velocity(0.3, y)), 1e-8);
  }
}

TEST(Mollify, EpsilonDerivativeMatchesFiniteDifference) {
  const auto tg = make_analytic_field<2>("taylor-green", {}, unit2);
  const auto m = make_mollifier<2>();
  const double eps = 0.08, h = 1e-4;
  const Vec<2> x{{0.13, 0.41}};
  const auto d = d_epsilon_velocity(tg, m, eps, 0.2, x);
  const auto fd = (mollified_velocity(tg, m, eps + h, 0.2, x) - mollified_velocity(tg, m, eps - h, 0.2, x)) *
                  (1.0 / (2.0 * h));
  EXPECT_LE(norm(d - fd), 1e-3 * norm(fd));
}

TEST(Mollify, CachedGridIsCloseToQuadrature) {
  const auto tg = make_analytic_field<2>("taylor-green", {}, unit2);
  const auto m = make_mollifier<2>();
  const MollifiedVelocity<2> q(tg, m, 0.05, MollifyRoute::quadrature), c(tg, m, 0.05, MollifyRoute::cached_grid, 128);
  const Vec<2> x{{0.31, 0.77}};
  EXPECT_LT(norm(q.velocity(0.4, x) - c.velocity(0.4, x)), 1e-3);
}

TEST(Mollify, RejectsRadiusOutsideRange) {
  const auto tg = make_analytic_field<2>("taylor-green", {}, unit2);
  const auto m = make_mollifier<2>();
  EXPECT_THROW(mollified_velocity(tg, m, 0.2, 0.0, Vec<2>{}), precondition_error);
  EXPECT_THROW(mollified_velocity(tg, m, 0.0, 0.0, Vec<2>{}), precondition_error);
  EXPECT_THROW(MollifiedVelocity<2>(tg, m, -0.1), precondition_error);
  EXPECT_THROW(parse_route("fourier"), precondition_error);
}

TEST(Mollify, GradientEstimatesHoldOnTaylorGreen) {
  const auto tg = make_analytic_field<2>("taylor-green", {}, unit2);
  const auto r = check_gradient_estimates(tg, make_mollifier<2>(), 100, 3);
  EXPECT_TRUE(r.passed) << r.note;
  EXPECT_EQ(r.metric("violations_d_epsilon"), 0.0);
}
