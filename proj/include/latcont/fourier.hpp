#pragma once

#include "latcont/fft.hpp"

namespace latcont {

// sin(pi t)/(pi t) with exact Kronecker values at (near-)integers.
inline double sinc(double t) {
  const double r = std::round(t);
  if (std::abs(t - r) < 1e-12) return r == 0.0 ? 1.0 : 0.0;
  return std::sin(pi * t) / (pi * t);
}

// Band-limited interpolant u~(x) = sum_n u(n) prod_j sinc(x_j/h - n_j),
// truncated to the box. Exact at lattice points by construction.
inline std::vector<VectorXcd> cardinal_interpolate(const GridFunction& g,
                                                   const std::vector<VectorXd>& points) {
  std::vector<VectorXcd> out;
  out.reserve(points.size());
  const int M = g.box.points_per_axis();
  const int N = g.box.halfwidth;
  for (const auto& x : points) {
    if (x.size() != g.box.dim) throw Error("cardinal_interpolate: wrong point dimension");
    std::vector<std::vector<double>> w(g.box.dim, std::vector<double>(M));
    for (int j = 0; j < g.box.dim; ++j)
      for (int n = -N; n <= N; ++n) w[j][n + N] = sinc(x[j] / g.h - n);
    VectorXcd acc(g.channels);
    for (int c = 0; c < g.channels; ++c) {
      KahanSumC sum;
      for_each_index(g.box, [&](std::size_t idx, const std::vector<int>& n) {
        double weight = w[0][n[0] + N];
        for (int j = 1; j < g.box.dim; ++j) weight *= w[j][n[j] + N];
        if (weight != 0.0) sum.add(weight * g.values[c][idx]);
      });
      acc[c] = sum.value();
    }
    out.push_back(acc);
  }
  return out;
}

// Dense evaluation of the interpolant on the refined mesh h/refine over the
// same physical box, via a zero-padded inverse transform (the periodized
// interpolant; agrees with the sinc series to spectral accuracy for data that
// decays inside the box).
inline GridFunction resample(const GridFunction& g, int refine) {
  if (refine < 1) throw Error("resample: refine must be >= 1");
  if (refine == 1) return g;
  const int d = g.box.dim;
  const int M = g.box.points_per_axis();
  const int N = g.box.halfwidth;
  const std::size_t padM = static_cast<std::size_t>(refine) * M;
  TorusFunction spec = dft(g);

  // padM = refine*(2N+1) may be even; handle the reorder manually instead of
  // reusing Box (which assumes odd point counts).
  std::vector<int> dims(d, static_cast<int>(padM));
  const double hf = g.h / refine;
  GridFunction out = GridFunction::zeros(hf, Box{d, refine * N}, g.channels);
  const double scale =
      std::pow(g.h / (2.0 * pi), d / 2.0) * std::pow(2.0 * pi / (M * g.h), d);

  std::size_t padTot = 1;
  for (int j = 0; j < d; ++j) padTot *= padM;

  for (int c = 0; c < g.channels; ++c) {
    detail::FftBuffer buf(padTot);
    for (std::size_t i = 0; i < padTot; ++i) buf.data[i][0] = buf.data[i][1] = 0.0;
    for_each_index(g.box, [&](std::size_t idx, const std::vector<int>& k) {
      std::size_t p = 0;
      for (int j = 0; j < d; ++j) {
        const std::size_t pj = k[j] >= 0 ? static_cast<std::size_t>(k[j])
                                         : static_cast<std::size_t>(k[j] + static_cast<int>(padM));
        p = p * padM + pj;
      }
      buf.data[p][0] = spec.values[c][idx].real();
      buf.data[p][1] = spec.values[c][idx].imag();
    });
    fftw_plan plan =
        fftw_plan_dft(d, dims.data(), buf.data, buf.data, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!plan) throw Error("fftw planning failed");
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    for_each_index(out.box, [&](std::size_t idx, const std::vector<int>& m) {
      std::size_t p = 0;
      for (int j = 0; j < d; ++j) {
        const int mm = m[j] >= 0 ? m[j] : m[j] + static_cast<int>(padM);
        p = p * padM + static_cast<std::size_t>(mm);
      }
      out.values[c][idx] = scale * cdouble(buf.data[p][0], buf.data[p][1]);
    });
  }
  return out;
}

// Pointwise gauge phase u(n) -> e^{i sign n . d1} u(n).
inline GridFunction gauge_phase(const GridFunction& g, const VectorXd& d1, int sign = +1) {
  if (d1.size() != g.box.dim) throw Error("gauge_phase: wrong d1 dimension");
  GridFunction out = g;
  for_each_index(g.box, [&](std::size_t idx, const std::vector<int>& n) {
    double phase = 0;
    for (int j = 0; j < g.box.dim; ++j) phase += n[j] * d1[j];
    const cdouble f = std::exp(iu * (sign * phase));
    for (int c = 0; c < g.channels; ++c) out.values[c][idx] = f * g.values[c][idx];
  });
  return out;
}

// ||<D>^m <x>^s u||_{L^2}: weight in x, Fourier multiplier <xi>^m on the
// canonical grid. m = 0 reduces exactly to the weighted L^2 norm.
inline double norm_sobolev_hms(const GridFunction& g, int m, double s) {
  GridFunction w = g;
  if (s != 0.0) {
    for_each_index(g.box, [&](std::size_t idx, const std::vector<int>& n) {
      double r2 = 0;
      for (int j = 0; j < g.box.dim; ++j) r2 += sq(g.h * n[j]);
      const double weight = std::pow(1.0 + r2, s / 2.0);
      for (int c = 0; c < g.channels; ++c) w.values[c][idx] *= weight;
    });
  }
  TorusFunction t = dft(w);
  KahanSum acc;
  for_each_index(t.box, [&](std::size_t idx, const std::vector<int>& k) {
    const VectorXd xi = t.node(k);
    const double mult = std::pow(1.0 + xi.squaredNorm(), m);  // <xi>^{2m}
    for (int c = 0; c < t.channels; ++c) acc.add(mult * std::norm(t.values[c][idx]));
  });
  return std::pow(g.h, g.box.dim / 2.0) * std::sqrt(t.node_volume() * acc.value());
}

inline double weighted_norm(const GridFunction& g, const NormSpec& spec) {
  switch (spec.kind) {
    case NormSpec::Kind::L2: return norm_l2(g);
    case NormSpec::Kind::WeightedL2: return norm_weighted_l2(g, spec.s);
    case NormSpec::Kind::Besov: return norm_besov(g);
    case NormSpec::Kind::BesovStar: return norm_besov_star(g);
    case NormSpec::Kind::SobolevHms: return norm_sobolev_hms(g, spec.m, spec.s);
  }
  throw Error("weighted_norm: unknown kind");
}

}  // namespace latcont
