#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <utility>
#include <vector>

#include "skewmax/field.hpp"

namespace skewmax {

namespace detail {

struct FftwPlan {
  fftw_plan plan = nullptr;
  ~FftwPlan() {
    if (plan) fftw_destroy_plan(plan);
  }
};

struct FftwBuffer {
  fftw_complex *data = nullptr;
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {
    if (!data) throw numerical_error("fftw allocation failed");
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer &) = delete;
  FftwBuffer &operator=(const FftwBuffer &) = delete;
  FftwBuffer(FftwBuffer &&o) noexcept : data(std::exchange(o.data, nullptr)) {}
  FftwBuffer &operator=(FftwBuffer &&) = delete;
};

}  // namespace detail

/// Discrete Helmholtz projection matched to the centred-difference divergence:
/// with symbol g_j(k) = sin(2 pi k_j / n_j) / h_j, each Fourier coefficient
/// loses its component along g. The result has zero centred-difference
/// divergence up to round-off, and the map is an orthogonal projection
/// (idempotent, annihilates centred-difference gradients).
template <int D>
GriddedSamples<D> project_samples(GriddedSamples<D> s) {
  s.validate();
  const std::size_t N = s.nodes();
  std::vector<detail::FftwBuffer> comp;
  comp.reserve(D);
  for (int c = 0; c < D; ++c) comp.emplace_back(N);

  std::array<int, D> dims = s.n;
  detail::FftwPlan fwd, bwd;
  // Plans are created before filling; FFTW_ESTIMATE leaves the buffers alone.
  fwd.plan = fftw_plan_dft(D, dims.data(), comp[0].data, comp[0].data, FFTW_FORWARD, FFTW_ESTIMATE);
  bwd.plan = fftw_plan_dft(D, dims.data(), comp[0].data, comp[0].data, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!fwd.plan || !bwd.plan) throw numerical_error("fftw planning failed");

  std::vector<std::array<double, D>> symbol(N);
  for (std::size_t f = 0; f < N; ++f) {
    std::size_t rem = f;
    for (int a = D - 1; a >= 0; --a) {
      const int k = static_cast<int>(rem % s.n[a]);
      rem /= s.n[a];
      symbol[f][a] = std::sin(2.0 * std::numbers::pi * k / s.n[a]) / s.spacing(a);
    }
  }

  for (int t = 0; t < s.nt; ++t) {
    for (int c = 0; c < D; ++c) {
      for (std::size_t f = 0; f < N; ++f) {
        comp[c].data[f][0] = s.at(t, f, c);
        comp[c].data[f][1] = 0.0;
      }
      fftw_execute_dft(fwd.plan, comp[c].data, comp[c].data);
    }
    for (std::size_t f = 0; f < N; ++f) {
      double g2 = 0.0;
      for (int a = 0; a < D; ++a) g2 += symbol[f][a] * symbol[f][a];
      if (g2 <= 1e-300) continue;
      double re = 0.0, im = 0.0;
      for (int a = 0; a < D; ++a) {
        re += symbol[f][a] * comp[a].data[f][0];
        im += symbol[f][a] * comp[a].data[f][1];
      }
      for (int a = 0; a < D; ++a) {
        comp[a].data[f][0] -= symbol[f][a] * re / g2;
        comp[a].data[f][1] -= symbol[f][a] * im / g2;
      }
    }
    for (int c = 0; c < D; ++c) {
      fftw_execute_dft(bwd.plan, comp[c].data, comp[c].data);
      for (std::size_t f = 0; f < N; ++f) s.at(t, f, c) = comp[c].data[f][0] / static_cast<double>(N);
    }
  }
  return s;
}

/// Project ingested samples onto discretely divergence-free fields.
template <int D>
VelocityField<D> project_divergence_free(GriddedSamples<D> samples) {
  return VelocityField<D>(GriddedField<D>(project_samples(std::move(samples))));
}

/// Largest |centred-difference divergence| over all nodes and time samples.
template <int D>
double max_node_divergence(const GriddedField<D> &f) {
  double m = 0.0;
  for (int k = 0; k < f.samples().nt; ++k)
    for (std::size_t n = 0; n < f.samples().nodes(); ++n) m = std::max(m, std::abs(f.node_divergence(k, n)));
  return m;
}

}  // namespace skewmax
