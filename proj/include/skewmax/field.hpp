#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "skewmax/geometry.hpp"

namespace skewmax {

enum class Catalog { zero, constant, linear_shear, taylor_green, abc };

inline std::string_view catalog_name(Catalog c) {
  switch (c) {
    case Catalog::zero: return "zero";
    case Catalog::constant: return "constant";
    case Catalog::linear_shear: return "linear-shear";
    case Catalog::taylor_green: return "taylor-green";
    case Catalog::abc: return "abc";
  }
  return "?";
}

inline Catalog parse_catalog(std::string_view name) {
  if (name == "zero") return Catalog::zero;
  if (name == "constant") return Catalog::constant;
  if (name == "linear-shear") return Catalog::linear_shear;
  if (name == "taylor-green") return Catalog::taylor_green;
  if (name == "abc") return Catalog::abc;
  throw precondition_error("unknown analytic field '" + std::string(name) + "'");
}

/// Closed-form divergence-free fields on the torus.
///
///   zero          u = 0
///   constant      u = c                               params: c_1..c_d
///   linear-shear  u = (a x_2, 0, ...)                 params: [a = 1]; d >= 2
///   taylor-green  u = A(t) (sin kx cos ky, -cos kx sin ky)          (d = 2)
///                 u = A(t) (sin kx cos ky cos kz, -cos kx sin ky cos kz, 0)
///                 A(t) = U exp(-nu t)                 params: [U = 1, nu = 0]
///   abc           u = (A sin kz + C cos ky, B sin kx + A cos kz,
///                      C sin ky + B cos kx)           params: [A, B, C = 1]; d = 3
///
/// with k = 2 pi / L. The trigonometric fields are single-shell Fourier sums
/// (every mode has |wavevector| = `wavenumber()`), so convolution with a
/// radial kernel multiplies them by one scalar. The shear is affine and is
/// evaluated on the covering space (it is periodic in x_1 only).
template <int D>
class AnalyticField {
 public:
  AnalyticField(Catalog kind, std::vector<double> params, Domain<D> domain)
      : kind_(kind), params_(std::move(params)), domain_(domain) {
    domain_.validate();
    k_ = 2.0 * std::numbers::pi / domain_.period;
    switch (kind_) {
      case Catalog::zero:
        require(params_.empty(), "zero field takes no parameters");
        break;
      case Catalog::constant:
        require(params_.size() == static_cast<std::size_t>(D), "constant field needs d components");
        break;
      case Catalog::linear_shear:
        require(D >= 2, "linear-shear requires d >= 2");
        require(params_.size() <= 1, "linear-shear takes at most one parameter");
        if (params_.empty()) params_ = {1.0};
        break;
      case Catalog::taylor_green:
        require(D >= 2, "taylor-green requires d = 2 or 3");
        require(params_.size() <= 2, "taylor-green takes [amplitude, decay]");
        if (params_.empty()) params_.push_back(1.0);
        if (params_.size() == 1) params_.push_back(0.0);
        break;
      case Catalog::abc:
        require(D == 3, "abc requires d = 3");
        require(params_.empty() || params_.size() == 3, "abc takes [A, B, C]");
        if (params_.empty()) params_ = {1.0, 1.0, 1.0};
        break;
    }
    for (double p : params_) require(std::isfinite(p), "field parameters must be finite");
  }

  Catalog kind() const { return kind_; }
  const std::vector<double> &params() const { return params_; }
  const Domain<D> &domain() const { return domain_; }

  /// |wavevector| shared by all Fourier modes; 0 for affine fields.
  double wavenumber() const {
    switch (kind_) {
      case Catalog::taylor_green: return k_ * std::sqrt(static_cast<double>(D));
      case Catalog::abc: return k_;
      default: return 0.0;
    }
  }

  bool steady() const { return kind_ != Catalog::taylor_green || params_[1] == 0.0; }

  /// Upper bound of |u| over the domain.
  double speed_bound() const {
    switch (kind_) {
      case Catalog::zero: return 0.0;
      case Catalog::constant: {
        Vec<D> c;
        for (int i = 0; i < D; ++i) c[i] = params_[i];
        return norm(c);
      }
      // over the fundamental cell widened by L/8 on each side
      case Catalog::linear_shear: return std::abs(params_[0]) * 1.25 * domain_.period;
      case Catalog::taylor_green:
        return std::abs(params_[0]) *
               std::max(std::exp(-params_[1] * domain_.t_start), std::exp(-params_[1] * domain_.t_end));
      case Catalog::abc: {
        const double a = std::abs(params_[0]), b = std::abs(params_[1]), c = std::abs(params_[2]);
        return std::sqrt((a + c) * (a + c) + (b + a) * (b + a) + (c + b) * (c + b));
      }
    }
    return 0.0;
  }

  Vec<D> velocity(double t, const Vec<D> &x) const {
    Vec<D> u;
    switch (kind_) {
      case Catalog::zero: break;
      case Catalog::constant:
        for (int i = 0; i < D; ++i) u[i] = params_[i];
        break;
      case Catalog::linear_shear:
        if constexpr (D >= 2) u[0] = params_[0] * x[1];
        break;
      case Catalog::taylor_green: {
        const double a = amplitude(t);
        const double sx = std::sin(k_ * x[0]), cx = std::cos(k_ * x[0]);
        const double sy = std::sin(k_ * x[1 % D]), cy = std::cos(k_ * x[1 % D]);
        double cz = 1.0;
        if constexpr (D == 3) cz = std::cos(k_ * x[2]);
        u[0] = a * sx * cy * cz;
        if constexpr (D >= 2) u[1] = -a * cx * sy * cz;
        break;
      }
      case Catalog::abc:
        if constexpr (D == 3) {
          const double A = params_[0], B = params_[1], C = params_[2];
          u[0] = A * std::sin(k_ * x[2]) + C * std::cos(k_ * x[1]);
          u[1] = B * std::sin(k_ * x[0]) + A * std::cos(k_ * x[2]);
          u[2] = C * std::sin(k_ * x[1]) + B * std::cos(k_ * x[0]);
        }
        break;
    }
    return u;
  }

  Mat<D> gradient(double t, const Vec<D> &x) const {
    Mat<D> g;
    switch (kind_) {
      case Catalog::zero:
      case Catalog::constant: break;
      case Catalog::linear_shear:
        if constexpr (D >= 2) g[0][1] = params_[0];
        break;
      case Catalog::taylor_green:
        if constexpr (D >= 2) {
          const double a = amplitude(t) * k_;
          const double sx = std::sin(k_ * x[0]), cx = std::cos(k_ * x[0]);
          const double sy = std::sin(k_ * x[1]), cy = std::cos(k_ * x[1]);
          double cz = 1.0, sz = 0.0;
          if constexpr (D == 3) {
            cz = std::cos(k_ * x[2]);
            sz = std::sin(k_ * x[2]);
          }
          g[0][0] = a * cx * cy * cz;
          g[0][1] = -a * sx * sy * cz;
          g[1][0] = a * sx * sy * cz;
          g[1][1] = -a * cx * cy * cz;
          if constexpr (D == 3) {
            g[0][2] = -a * sx * cy * sz;
            g[1][2] = a * cx * sy * sz;
          }
        }
        break;
      case Catalog::abc:
        if constexpr (D == 3) {
          const double A = params_[0] * k_, B = params_[1] * k_, C = params_[2] * k_;
          g[0][1] = -C * std::sin(k_ * x[1]);
          g[0][2] = A * std::cos(k_ * x[2]);
          g[1][0] = B * std::cos(k_ * x[0]);
          g[1][2] = -A * std::sin(k_ * x[2]);
          g[2][0] = -B * std::sin(k_ * x[0]);
          g[2][1] = C * std::cos(k_ * x[1]);
        }
        break;
    }
    return g;
  }

 private:
  double amplitude(double t) const { return params_[0] * std::exp(-params_[1] * t); }

  Catalog kind_;
  std::vector<double> params_;
  Domain<D> domain_;
  double k_ = 0.0;
};

/// Velocity samples on a uniform periodic grid: node j along an axis sits at
/// j L / n; time sample k at S + k (T - S) / (nt - 1) (a single sample means
/// a steady field). Storage is [time][row-major node][component].
template <int D>
struct GriddedSamples {
  Domain<D> domain;
  std::array<int, D> n{};
  int nt = 1;
  std::vector<double> values;
  /// Optional explicit node coordinates per axis; when present they must be
  /// the uniform periodic nodes.
  std::vector<std::vector<double>> axis_coords;

  std::size_t nodes() const {
    std::size_t s = 1;
    for (int v : n) s *= static_cast<std::size_t>(v);
    return s;
  }
  double spacing(int axis) const { return domain.period / n[axis]; }
  double time_of(int k) const {
    return nt == 1 ? domain.t_start : domain.t_start + k * (domain.t_end - domain.t_start) / (nt - 1);
  }
  std::size_t flat(const std::array<int, D> &idx) const {
    std::size_t f = 0;
    for (int i = 0; i < D; ++i) f = f * n[i] + static_cast<std::size_t>(idx[i]);
    return f;
  }
  double &at(int k, std::size_t node, int comp) { return values[(k * nodes() + node) * D + comp]; }
  double at(int k, std::size_t node, int comp) const { return values[(k * nodes() + node) * D + comp]; }

  void validate() const {
    domain.validate();
    for (int v : n) require(v >= 4, "gridded field needs at least 4 nodes per axis");
    require(nt >= 1, "gridded field needs a time sample");
    require(values.size() == static_cast<std::size_t>(nt) * nodes() * D,
            "gridded samples have the wrong number of values");
    for (double v : values) require(std::isfinite(v), "gridded samples contain NaN/Inf");
    if (!axis_coords.empty()) {
      require(axis_coords.size() == static_cast<std::size_t>(D), "axis coordinates needed for every axis");
      for (int a = 0; a < D; ++a) {
        require(axis_coords[a].size() == static_cast<std::size_t>(n[a]), "axis coordinate count mismatch");
        const double h = spacing(a);
        for (int j = 0; j < n[a]; ++j)
          require(std::abs(axis_coords[a][j] - (axis_coords[a][0] + j * h)) <= 1e-9 * domain.period,
                  "grid is not uniform");
      }
    }
  }
};

/// Node index and fractional offset along one periodic axis.
struct AxisStencil {
  int lo, hi;
  double frac;
};

inline AxisStencil axis_stencil(double x, double h, int n) {
  const double s = x / h;
  double fl = std::floor(s);
  double frac = s - fl;
  long long i = static_cast<long long>(fl) % n;
  if (i < 0) i += n;
  return {static_cast<int>(i), static_cast<int>((i + 1) % n), frac};
}

/// Multilinear interpolation of a periodic scalar grid. Uses lerp so constant
/// data is reproduced exactly.
template <int D, class Get>
double interpolate_periodic(const std::array<int, D> &n, double h, const Vec<D> &x, Get &&get) {
  std::array<AxisStencil, D> st;
  for (int a = 0; a < D; ++a) st[a] = axis_stencil(x[a], h, n[a]);
  auto node = [&](int corner) {
    std::size_t f = 0;
    for (int a = 0; a < D; ++a) {
      const int bit = (corner >> (D - 1 - a)) & 1;
      f = f * n[a] + static_cast<std::size_t>(bit ? st[a].hi : st[a].lo);
    }
    return get(f);
  };
  if constexpr (D == 1) {
    return std::lerp(node(0), node(1), st[0].frac);
  } else if constexpr (D == 2) {
    return std::lerp(std::lerp(node(0), node(1), st[1].frac), std::lerp(node(2), node(3), st[1].frac), st[0].frac);
  } else {
    const double a0 = std::lerp(std::lerp(node(0), node(1), st[2].frac), std::lerp(node(2), node(3), st[2].frac), st[1].frac);
    const double a1 = std::lerp(std::lerp(node(4), node(5), st[2].frac), std::lerp(node(6), node(7), st[2].frac), st[1].frac);
    return std::lerp(a0, a1, st[0].frac);
  }
}

/// Time bracket for a uniformly sampled series.
struct TimeStencil {
  int lo, hi;
  double frac;
};

inline TimeStencil time_stencil(double t, double t0, double t1, int nt) {
  if (nt == 1) return {0, 0, 0.0};
  const double s = std::clamp((t - t0) / (t1 - t0) * (nt - 1), 0.0, static_cast<double>(nt - 1));
  int lo = std::min(static_cast<int>(std::floor(s)), nt - 2);
  return {lo, lo + 1, s - lo};
}

/// Field backed by samples: multilinear in space, linear in time. Gradients
/// interpolate node-centred differences.
template <int D>
class GriddedField {
 public:
  explicit GriddedField(GriddedSamples<D> samples) : s_(std::move(samples)) {
    s_.validate();
    h_ = s_.spacing(0);
    for (int a = 1; a < D; ++a) require(std::abs(s_.spacing(a) - h_) <= 1e-12 * h_, "gridded field needs equal spacing per axis");
    grad_.resize(static_cast<std::size_t>(s_.nt) * s_.nodes() * D * D);
    for (int k = 0; k < s_.nt; ++k)
      for (std::size_t f = 0; f < s_.nodes(); ++f) {
        const auto g = node_gradient(k, f);
        for (int i = 0; i < D; ++i)
          for (int j = 0; j < D; ++j) grad_[((k * s_.nodes() + f) * D + i) * D + j] = g[i][j];
      }
    for (double v : s_.values) speed_ = std::max(speed_, std::abs(v));
    speed_ *= std::sqrt(static_cast<double>(D));
  }

  const Domain<D> &domain() const { return s_.domain; }
  const GriddedSamples<D> &samples() const { return s_; }
  bool steady() const { return s_.nt == 1; }
  double speed_bound() const { return speed_; }

  Vec<D> velocity(double t, const Vec<D> &x) const {
    const auto ts = time_stencil(t, s_.domain.t_start, s_.domain.t_end, s_.nt);
    Vec<D> u;
    for (int c = 0; c < D; ++c) {
      const double a = interpolate_periodic<D>(s_.n, h_, x, [&](std::size_t f) { return s_.at(ts.lo, f, c); });
      const double b = ts.hi == ts.lo ? a : interpolate_periodic<D>(s_.n, h_, x, [&](std::size_t f) { return s_.at(ts.hi, f, c); });
      u[c] = std::lerp(a, b, ts.frac);
    }
    return u;
  }

  Mat<D> gradient(double t, const Vec<D> &x) const {
    const auto ts = time_stencil(t, s_.domain.t_start, s_.domain.t_end, s_.nt);
    Mat<D> g;
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) {
        auto get = [&](int k) {
          return [&, k](std::size_t f) { return grad_[((k * s_.nodes() + f) * D + i) * D + j]; };
        };
        const double a = interpolate_periodic<D>(s_.n, h_, x, get(ts.lo));
        const double b = ts.hi == ts.lo ? a : interpolate_periodic<D>(s_.n, h_, x, get(ts.hi));
        g[i][j] = std::lerp(a, b, ts.frac);
      }
    return g;
  }

  /// Centred-difference divergence at a node.
  double node_divergence(int k, std::size_t f) const { return node_gradient(k, f).trace(); }

 private:
  Mat<D> node_gradient(int k, std::size_t f) const {
    std::array<int, D> idx;
    std::size_t rem = f;
    for (int a = D - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % s_.n[a]);
      rem /= s_.n[a];
    }
    Mat<D> g;
    for (int j = 0; j < D; ++j) {
      auto p = idx, m = idx;
      p[j] = (idx[j] + 1) % s_.n[j];
      m[j] = (idx[j] - 1 + s_.n[j]) % s_.n[j];
      const std::size_t fp = s_.flat(p), fm = s_.flat(m);
      for (int i = 0; i < D; ++i) g[i][j] = (s_.at(k, fp, i) - s_.at(k, fm, i)) / (2.0 * s_.spacing(j));
    }
    return g;
  }

  GriddedSamples<D> s_;
  double h_ = 0.0;
  std::vector<double> grad_;
  double speed_ = 0.0;
};

/// Immutable velocity field, analytic or gridded. Queries are pure; values
/// outside [S, T] are zero (the zero extension of the flow's horizon).
template <int D>
class VelocityField {
 public:
  explicit VelocityField(AnalyticField<D> f) : impl_(std::make_shared<const Impl>(std::move(f))) {}
  explicit VelocityField(GriddedField<D> f) : impl_(std::make_shared<const Impl>(std::move(f))) {}

  const Domain<D> &domain() const {
    return std::visit([](const auto &f) -> const Domain<D> & { return f.domain(); }, *impl_);
  }
  bool is_analytic() const { return std::holds_alternative<AnalyticField<D>>(*impl_); }
  const AnalyticField<D> *analytic() const { return std::get_if<AnalyticField<D>>(impl_.get()); }
  const GriddedField<D> *gridded() const { return std::get_if<GriddedField<D>>(impl_.get()); }
  bool steady() const {
    return std::visit([](const auto &f) { return f.steady(); }, *impl_);
  }
  double speed_bound() const {
    return std::visit([](const auto &f) { return f.speed_bound(); }, *impl_);
  }
  std::string describe() const {
    if (const auto *a = analytic()) return std::string(catalog_name(a->kind()));
    return "gridded";
  }

  Vec<D> evaluate(double t, const Vec<D> &x) const {
    if (!domain().in_span(t)) return Vec<D>{};
    return std::visit([&](const auto &f) { return f.velocity(t, x); }, *impl_);
  }
  Mat<D> gradient(double t, const Vec<D> &x) const {
    if (!domain().in_span(t)) return Mat<D>{};
    return std::visit([&](const auto &f) { return f.gradient(t, x); }, *impl_);
  }

 private:
  using Impl = std::variant<AnalyticField<D>, GriddedField<D>>;
  std::shared_ptr<const Impl> impl_;
};

template <int D>
VelocityField<D> make_analytic_field(std::string_view name, std::vector<double> params, const Domain<D> &domain) {
  return VelocityField<D>(AnalyticField<D>(parse_catalog(name), std::move(params), domain));
}

/// Sample any field onto a grid (used to build gridded fixtures).
template <int D>
GriddedSamples<D> sample_field(const VelocityField<D> &field, int n, int nt) {
  GriddedSamples<D> s;
  s.domain = field.domain();
  s.n.fill(n);
  s.nt = nt;
  s.values.assign(static_cast<std::size_t>(nt) * s.nodes() * D, 0.0);
  const double h = s.spacing(0);
  for (int k = 0; k < nt; ++k)
    for (std::size_t f = 0; f < s.nodes(); ++f) {
      Vec<D> x;
      std::size_t rem = f;
      for (int a = D - 1; a >= 0; --a) {
        x[a] = static_cast<double>(rem % n) * h;
        rem /= n;
      }
      const auto u = field.evaluate(s.time_of(k), x);
      for (int c = 0; c < D; ++c) s.at(k, f, c) = u[c];
    }
  return s;
}

}  // namespace skewmax
