#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace skewmax {

/// Raised when a caller violates an operation's documented precondition.
struct precondition_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure cannot meet its accuracy contract.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised on malformed input files or failed writes.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string &what) {
  if (!ok) throw precondition_error(what);
}

template <int D>
struct Vec {
  static_assert(D >= 1 && D <= 3, "dimension must be 1, 2 or 3");
  std::array<double, D> c{};

  constexpr double &operator[](int i) { return c[i]; }
  constexpr double operator[](int i) const { return c[i]; }

  constexpr Vec &operator+=(const Vec &o) {
    for (int i = 0; i < D; ++i) c[i] += o.c[i];
    return *this;
  }
  constexpr Vec &operator-=(const Vec &o) {
    for (int i = 0; i < D; ++i) c[i] -= o.c[i];
    return *this;
  }
  constexpr Vec &operator*=(double s) {
    for (int i = 0; i < D; ++i) c[i] *= s;
    return *this;
  }
  friend constexpr Vec operator+(Vec a, const Vec &b) { return a += b; }
  friend constexpr Vec operator-(Vec a, const Vec &b) { return a -= b; }
  friend constexpr Vec operator*(double s, Vec a) { return a *= s; }
  friend constexpr Vec operator*(Vec a, double s) { return a *= s; }
  friend constexpr bool operator==(const Vec &, const Vec &) = default;

  static constexpr Vec filled(double v) {
    Vec r;
    r.c.fill(v);
    return r;
  }
};

template <int D>
constexpr double dot(const Vec<D> &a, const Vec<D> &b) {
  double s = 0.0;
  for (int i = 0; i < D; ++i) s += a[i] * b[i];
  return s;
}

template <int D>
double norm(const Vec<D> &a) {
  return std::sqrt(dot(a, a));
}

/// Row-major D x D matrix; for velocity gradients entry (i, j) is du_i/dx_j.
template <int D>
struct Mat {
  std::array<Vec<D>, D> rows{};

  constexpr Vec<D> &operator[](int i) { return rows[i]; }
  constexpr const Vec<D> &operator[](int i) const { return rows[i]; }

  constexpr Mat &operator+=(const Mat &o) {
    for (int i = 0; i < D; ++i) rows[i] += o.rows[i];
    return *this;
  }
  constexpr Mat &operator*=(double s) {
    for (int i = 0; i < D; ++i) rows[i] *= s;
    return *this;
  }
  friend constexpr Mat operator+(Mat a, const Mat &b) { return a += b; }
  friend constexpr Mat operator*(double s, Mat a) { return a *= s; }

  constexpr double trace() const {
    double t = 0.0;
    for (int i = 0; i < D; ++i) t += rows[i][i];
    return t;
  }
};

template <int D>
constexpr Vec<D> operator*(const Mat<D> &m, const Vec<D> &v) {
  Vec<D> r;
  for (int i = 0; i < D; ++i) r[i] = dot(m[i], v);
  return r;
}

/// Frobenius norm; the pointwise |grad u| used throughout.
template <int D>
double frobenius(const Mat<D> &m) {
  double s = 0.0;
  for (int i = 0; i < D; ++i) s += dot(m[i], m[i]);
  return std::sqrt(s);
}

/// Spatial/temporal extent of a flow: a d-torus of period L over (S, T).
template <int D>
struct Domain {
  static constexpr int dimension = D;
  double period = 1.0;
  double t_start = 0.0;
  double t_end = 1.0;

  void validate() const {
    require(std::isfinite(period) && period > 0.0, "domain period must be positive");
    require(std::isfinite(t_start) && std::isfinite(t_end), "domain time span must be finite");
    require(t_start < t_end, "domain requires S < T");
  }
  /// Radii above this would let a ball wrap onto itself.
  double max_radius() const { return period / 8.0; }
  bool in_span(double t) const { return t >= t_start && t <= t_end; }
};

/// Reduce x into [0, L).
inline double wrap(double x, double L) {
  double r = std::fmod(x, L);
  if (r < 0.0) r += L;
  if (r >= L) r -= L;
  return r;
}

template <int D>
Vec<D> wrap(Vec<D> x, double L) {
  for (int i = 0; i < D; ++i) x[i] = wrap(x[i], L);
  return x;
}

/// Minimal-image difference a - b on a circle of length L, in [-L/2, L/2].
inline double torus_delta(double a, double b, double L) {
  double d = std::fmod(a - b, L);
  if (d > 0.5 * L) d -= L;
  if (d < -0.5 * L) d += L;
  return d;
}

template <int D>
Vec<D> torus_delta(const Vec<D> &a, const Vec<D> &b, double L) {
  Vec<D> r;
  for (int i = 0; i < D; ++i) r[i] = torus_delta(a[i], b[i], L);
  return r;
}

template <int D>
double torus_distance(const Vec<D> &a, const Vec<D> &b, double L) {
  return norm(torus_delta(a, b, L));
}

/// |B_1| in R^d.
constexpr double unit_ball_volume(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi / 3.0;
    default: return 0.0;
  }
}

/// Surface measure of the unit sphere S^{d-1} (for d = 1 the two points +-1).
constexpr double unit_sphere_area(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    default: return 0.0;
  }
}

/// Spacetime measure of a parabolic cylinder of radius eps: 2 eps^2 |B_eps|.
constexpr double cylinder_measure(int d, double eps) {
  double v = unit_ball_volume(d);
  for (int i = 0; i < d; ++i) v *= eps;
  return 2.0 * eps * eps * v;
}

constexpr double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace skewmax
