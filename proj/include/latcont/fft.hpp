#pragma once

#include <fftw3.h>

#include "latcont/grid.hpp"

namespace latcont {

namespace detail {

// Centered (k in [-N,N]) <-> FFTW (index in [0,M)) reordering, per axis:
// position p = k mod M.
inline std::size_t centered_to_fftw(const Box& box, std::size_t idx) {
  const int M = box.points_per_axis();
  std::size_t out = 0;
  std::vector<int> n = box.unflatten(idx);
  for (int j = 0; j < box.dim; ++j) {
    const int p = n[j] >= 0 ? n[j] : n[j] + M;
    out = out * M + static_cast<std::size_t>(p);
  }
  return out;
}

struct FftBuffer {
  fftw_complex* data = nullptr;
  std::size_t n = 0;
  explicit FftBuffer(std::size_t count) : n(count) {
    data = fftw_alloc_complex(count);
    if (!data) throw Error("fftw allocation failed");
  }
  ~FftBuffer() { fftw_free(data); }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;
};

// In-place complex DFT over the centered box; sign -1 is the forward kernel
// e^{-2 pi i k n / M}. FFTW_ESTIMATE keeps plans (and hence output bits)
// reproducible run to run.
inline void centered_fft(const Box& box, std::vector<cdouble>& values, int sign) {
  const std::size_t tot = box.total();
  if (values.size() != tot) throw Error("centered_fft: size mismatch");
  FftBuffer buf(tot);
  for (std::size_t idx = 0; idx < tot; ++idx) {
    const std::size_t p = centered_to_fftw(box, idx);
    buf.data[p][0] = values[idx].real();
    buf.data[p][1] = values[idx].imag();
  }
  std::vector<int> dims(box.dim, box.points_per_axis());
  fftw_plan plan = fftw_plan_dft(box.dim, dims.data(), buf.data, buf.data,
                                 sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plan) throw Error("fftw planning failed");
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  for (std::size_t idx = 0; idx < tot; ++idx) {
    const std::size_t p = centered_to_fftw(box, idx);
    values[idx] = cdouble(buf.data[p][0], buf.data[p][1]);
  }
}

}  // namespace detail

// Forward transform on the canonical torus grid:
// u_hat(xi_k) = (h/2pi)^{d/2} sum_n u(n) e^{-i h n . xi_k}.
inline TorusFunction dft(const GridFunction& g) {
  TorusFunction t = TorusFunction::zeros(g.h, g.box, g.channels);
  const double scale = std::pow(g.h / (2.0 * pi), g.box.dim / 2.0);
  for (int c = 0; c < g.channels; ++c) {
    t.values[c] = g.values[c];
    detail::centered_fft(g.box, t.values[c], -1);
    for (auto& v : t.values[c]) v *= scale;
  }
  return t;
}

// Inverse transform (exact quadrature of the torus integral on the canonical
// grid): u(n) = (h/2pi)^{d/2} (2pi/(Mh))^d sum_k u_hat(xi_k) e^{+i h n . xi_k}.
inline GridFunction idft(const TorusFunction& t) {
  GridFunction g = GridFunction::zeros(t.h, t.box, t.channels);
  const double M = t.box.points_per_axis();
  const double scale = std::pow(2.0 * pi / t.h, t.box.dim / 2.0) / std::pow(M, t.box.dim);
  for (int c = 0; c < t.channels; ++c) {
    g.values[c] = t.values[c];
    detail::centered_fft(t.box, g.values[c], +1);
    for (auto& v : g.values[c]) v *= scale;
  }
  return g;
}

// Exact finite-sum transform at arbitrary xi points (one column per channel).
// Separable per-axis phase contraction keeps it O(M^d) per point.
inline std::vector<VectorXcd> dft_at(const GridFunction& g, const std::vector<VectorXd>& xis) {
  std::vector<VectorXcd> out;
  out.reserve(xis.size());
  const double scale = std::pow(g.h / (2.0 * pi), g.box.dim / 2.0);
  const int M = g.box.points_per_axis();
  const int N = g.box.halfwidth;
  for (const auto& xi : xis) {
    if (xi.size() != g.box.dim) throw Error("dft_at: wrong xi dimension");
    std::vector<std::vector<cdouble>> w(g.box.dim, std::vector<cdouble>(M));
    for (int j = 0; j < g.box.dim; ++j)
      for (int n = -N; n <= N; ++n) w[j][n + N] = std::exp(-iu * (g.h * n * xi[j]));
    VectorXcd acc(g.channels);
    for (int c = 0; c < g.channels; ++c) {
      KahanSumC sum;
      for_each_index(g.box, [&](std::size_t idx, const std::vector<int>& n) {
        cdouble phase = w[0][n[0] + N];
        for (int j = 1; j < g.box.dim; ++j) phase *= w[j][n[j] + N];
        sum.add(g.values[c][idx] * phase);
      });
      acc[c] = scale * sum.value();
    }
    out.push_back(acc);
  }
  return out;
}

// L^2(T_h^d) norm by exact grid quadrature.
inline double torus_l2(const TorusFunction& t) {
  KahanSum acc;
  for (const auto& ch : t.values)
    for (const auto& v : ch) acc.add(std::norm(v));
  return std::sqrt(t.node_volume() * acc.value());
}

}  // namespace latcont
