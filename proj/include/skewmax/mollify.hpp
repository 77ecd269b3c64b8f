#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <vector>

#include "skewmax/field.hpp"
#include "skewmax/quadrature.hpp"

namespace skewmax {

/// Unnormalized bump exp(-1/(1-r^2)) on the open unit ball.
inline double bump_profile(double r) {
  if (r >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r * r));
}

/// Radius where r * bump(r) peaks: the root of (1 - r^2)^2 = 2 r^2.
inline constexpr double kMomentPeakRadius = 0.51763809020504152;  // (sqrt 6 - sqrt 2) / 2

/// Normalized radial mollifier with a fixed ball quadrature. Copies share the
/// immutable tables.
template <int D>
class Mollifier {
 public:
  /// Ball rule with `node_count` nodes; normalization is checked against a
  /// radial rule of twice the resolution.
  explicit Mollifier(int node_count) {
    require(node_count >= 32 * D, "mollifier needs at least 32*d quadrature nodes");
    auto t = std::make_shared<Tables>();
    t->rule = BallRule<D>::with_size(node_count);
    double z = 0.0;
    for (std::size_t j = 0; j < t->rule.size(); ++j) z += t->rule.weights[j] * bump_profile(t->rule.radii[j]);
    const double z_check = radial_integral(2 * static_cast<int>(t->rule.radial.nodes.size()), [](double) { return 1.0; });
    if (!(std::abs(z - z_check) <= 1e-8 * z_check))
      throw numerical_error("mollifier normalization misses 1e-8 with " + std::to_string(node_count) + " nodes");
    t->normalization = z;
    t->kernel.resize(t->rule.size());
    for (std::size_t j = 0; j < t->rule.size(); ++j)
      t->kernel[j] = t->rule.weights[j] * bump_profile(t->rule.radii[j]) / z;
    t->fine_normalization = radial_integral(kFineRadial, [](double) { return 1.0; });
    tables_ = std::move(t);
  }

  int dimension() const { return D; }
  std::size_t size() const { return tables_->rule.size(); }
  const BallRule<D> &rule() const { return tables_->rule; }
  /// w_j * phi(y_j); sums to one.
  const std::vector<double> &kernel_weights() const { return tables_->kernel; }
  double normalization() const { return tables_->normalization; }

  double operator()(const Vec<D> &y) const { return radial(norm(y)); }
  double radial(double r) const { return bump_profile(r) / tables_->normalization; }

  /// Quadrature of phi; equals one up to round-off by construction.
  double integral() const {
    double s = 0.0;
    for (double k : tables_->kernel) s += k;
    return s;
  }
  /// ||phi||_inf, attained at the origin.
  double sup_norm() const { return radial(0.0); }
  /// ||y phi(y)||_inf.
  double moment_sup_norm() const { return kMomentPeakRadius * radial(kMomentPeakRadius); }

  /// Fourier multiplier of phi at |xi| = rho, i.e. the integral of
  /// phi(y) cos(xi . y); multiplier(0) = 1.
  double multiplier(double rho) const {
    if (rho == 0.0) return 1.0;
    return radial_integral(kFineRadial, [rho](double r) {
             if constexpr (D == 1) return std::cos(rho * r);
             else if constexpr (D == 2) return std::cyl_bessel_j(0.0, rho * r);
             else return std::sph_bessel(0u, rho * r);
           }) /
           tables_->fine_normalization;
  }
  /// d/drho of `multiplier`.
  double multiplier_derivative(double rho) const {
    if (rho == 0.0) return 0.0;
    return -radial_integral(kFineRadial, [rho](double r) {
             if constexpr (D == 1) return r * std::sin(rho * r);
             else if constexpr (D == 2) return r * std::cyl_bessel_j(1.0, rho * r);
             else return r * std::sph_bessel(1u, rho * r);
           }) /
           tables_->fine_normalization;
  }

 private:
  static constexpr int kFineRadial = 96;

  /// |S^{d-1}| times the integral over [0,1] of bump(r) g(r) r^{d-1} dr.
  template <class G>
  static double radial_integral(int n, G &&g) {
    const Rule1D q = gauss_legendre(n, 0.0, 1.0);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += q.weights[i] * bump_profile(q.nodes[i]) * g(q.nodes[i]) * ipow(q.nodes[i], D - 1);
    return unit_sphere_area(D) * s;
  }

  struct Tables {
    BallRule<D> rule;
    std::vector<double> kernel;
    double normalization = 0.0;
    double fine_normalization = 0.0;
  };
  std::shared_ptr<const Tables> tables_;
};

/// Default node counts: 64 in 1D, 32 radial x 16 angles in 2D,
/// 32 radial x 8 polar x 16 azimuthal in 3D.
template <int D>
constexpr int default_mollifier_nodes() {
  if constexpr (D == 1) return 64;
  else if constexpr (D == 2) return 512;
  else return 4096;
}

template <int D>
Mollifier<D> make_mollifier(int node_count = default_mollifier_nodes<D>()) {
  return Mollifier<D>(node_count);
}

namespace detail {
template <int D>
void require_radius(const Domain<D> &domain, double eps) {
  require(std::isfinite(eps) && eps > 0.0 && eps <= domain.max_radius() * (1.0 + 1e-12),
          "mollification radius must lie in (0, L/8]");
}
}  // namespace detail

/// u_eps(t, x) = sum_j w_j phi(y_j) u(t, x - eps y_j).
template <int D>
Vec<D> mollified_velocity(const VelocityField<D> &field, const Mollifier<D> &m, double eps, double t, const Vec<D> &x) {
  detail::require_radius(field.domain(), eps);
  Vec<D> acc;
  if (!field.domain().in_span(t)) return acc;
  const auto &nodes = m.rule().nodes;
  const auto &k = m.kernel_weights();
  for (std::size_t j = 0; j < nodes.size(); ++j) acc += k[j] * field.evaluate(t, x - eps * nodes[j]);
  return acc;
}

/// grad u_eps(t, x) = sum_j w_j phi(y_j) grad u(t, x - eps y_j).
template <int D>
Mat<D> mollified_gradient(const VelocityField<D> &field, const Mollifier<D> &m, double eps, double t, const Vec<D> &x) {
  detail::require_radius(field.domain(), eps);
  Mat<D> acc;
  if (!field.domain().in_span(t)) return acc;
  const auto &nodes = m.rule().nodes;
  const auto &k = m.kernel_weights();
  for (std::size_t j = 0; j < nodes.size(); ++j) acc += k[j] * field.gradient(t, x - eps * nodes[j]);
  return acc;
}

/// d/deps u_eps(t, x) = sum_j w_j phi(y_j) grad u(t, x - eps y_j) (-y_j).
template <int D>
Vec<D> d_epsilon_velocity(const VelocityField<D> &field, const Mollifier<D> &m, double eps, double t, const Vec<D> &x) {
  detail::require_radius(field.domain(), eps);
  Vec<D> acc;
  if (!field.domain().in_span(t)) return acc;
  const auto &nodes = m.rule().nodes;
  const auto &k = m.kernel_weights();
  for (std::size_t j = 0; j < nodes.size(); ++j) acc -= k[j] * (field.gradient(t, x - eps * nodes[j]) * nodes[j]);
  return acc;
}

/// How a MollifiedVelocity evaluates u_eps.
///   quadrature   the ball-rule sums above, on demand
///   spectral     closed-form multiplier; catalog fields only (each is a
///                single-shell Fourier sum or affine, so u_eps = m(eps k) u)
///   cached_grid  u_eps precomputed by quadrature at grid nodes, then
///                interpolated like a gridded field
///   automatic    spectral for catalog fields, quadrature otherwise
enum class MollifyRoute { automatic, quadrature, spectral, cached_grid };

inline std::string_view route_name(MollifyRoute r) {
  switch (r) {
    case MollifyRoute::automatic: return "automatic";
    case MollifyRoute::quadrature: return "quadrature";
    case MollifyRoute::spectral: return "spectral";
    case MollifyRoute::cached_grid: return "cached-grid";
  }
  return "?";
}

inline MollifyRoute parse_route(std::string_view s) {
  if (s == "automatic") return MollifyRoute::automatic;
  if (s == "quadrature") return MollifyRoute::quadrature;
  if (s == "spectral") return MollifyRoute::spectral;
  if (s == "cached-grid") return MollifyRoute::cached_grid;
  throw precondition_error("unknown mollification route '" + std::string(s) + "'");
}

/// u_eps for one fixed eps, the right-hand side of the mollified flow.
template <int D>
class MollifiedVelocity {
 public:
  MollifiedVelocity(VelocityField<D> field, Mollifier<D> m, double eps, MollifyRoute route = MollifyRoute::automatic,
                    int cache_nodes = 64)
      : field_(std::move(field)), m_(std::move(m)), eps_(eps) {
    detail::require_radius(field_.domain(), eps_);
    if (route == MollifyRoute::automatic)
      route = field_.is_analytic() ? MollifyRoute::spectral : MollifyRoute::quadrature;
    route_ = route;
    if (route_ == MollifyRoute::spectral) {
      require(field_.is_analytic(), "spectral mollification needs a catalog field");
      const double kappa = field_.analytic()->wavenumber();
      factor_ = kappa == 0.0 ? 1.0 : m_.multiplier(eps_ * kappa);
      d_factor_ = kappa == 0.0 ? 0.0 : kappa * m_.multiplier_derivative(eps_ * kappa);
    } else if (route_ == MollifyRoute::cached_grid) {
      build_cache(cache_nodes);
    }
  }

  const VelocityField<D> &field() const { return field_; }
  const Mollifier<D> &mollifier() const { return m_; }
  double epsilon() const { return eps_; }
  MollifyRoute route() const { return route_; }
  const Domain<D> &domain() const { return field_.domain(); }
  /// |u_eps| <= sup |u| since phi >= 0 integrates to one.
  double speed_bound() const { return field_.speed_bound(); }

  Vec<D> velocity(double t, const Vec<D> &x) const {
    switch (route_) {
      case MollifyRoute::spectral: return factor_ * field_.evaluate(t, x);
      case MollifyRoute::cached_grid:
        if (!domain().in_span(t)) return Vec<D>{};
        return cache_->velocity(t, x);
      default: return mollified_velocity(field_, m_, eps_, t, x);
    }
  }

  Mat<D> gradient(double t, const Vec<D> &x) const {
    switch (route_) {
      case MollifyRoute::spectral: return factor_ * field_.gradient(t, x);
      case MollifyRoute::cached_grid:
        if (!domain().in_span(t)) return Mat<D>{};
        return cache_->gradient(t, x);
      default: return mollified_gradient(field_, m_, eps_, t, x);
    }
  }

  Vec<D> d_epsilon(double t, const Vec<D> &x) const {
    if (route_ == MollifyRoute::spectral) return d_factor_ * field_.evaluate(t, x);
    return d_epsilon_velocity(field_, m_, eps_, t, x);
  }

 private:
  void build_cache(int n) {
    GriddedSamples<D> s;
    s.domain = field_.domain();
    if (const auto *g = field_.gridded()) {
      s.n = g->samples().n;
      s.nt = g->samples().nt;
    } else {
      require(n >= 4, "cached grid needs at least 4 nodes per axis");
      s.n.fill(n);
      s.nt = field_.steady() ? 1 : 33;
    }
    s.values.assign(static_cast<std::size_t>(s.nt) * s.nodes() * D, 0.0);
    for (int k = 0; k < s.nt; ++k)
      for (std::size_t f = 0; f < s.nodes(); ++f) {
        Vec<D> x;
        std::size_t rem = f;
        for (int a = D - 1; a >= 0; --a) {
          x[a] = static_cast<double>(rem % s.n[a]) * s.spacing(a);
          rem /= s.n[a];
        }
        const auto u = mollified_velocity(field_, m_, eps_, s.time_of(k), x);
        for (int c = 0; c < D; ++c) s.at(k, f, c) = u[c];
      }
    cache_ = std::make_shared<const GriddedField<D>>(std::move(s));
  }

  VelocityField<D> field_;
  Mollifier<D> m_;
  double eps_;
  MollifyRoute route_ = MollifyRoute::quadrature;
  double factor_ = 1.0;
  double d_factor_ = 0.0;
  std::shared_ptr<const GriddedField<D>> cache_;
};

}  // namespace skewmax
