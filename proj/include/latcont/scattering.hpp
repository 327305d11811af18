#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <latcont/green.hpp>
#include <latcont/problem.hpp>

// Stationary scattering on the square lattice: energy-surface trace, the
// amplitude kernel born - correction, and its continuum counterpart. The
// kernel of the deviation S(E) = I - 2 pi i A(E) is evaluated on direction
// pairs; the correction applies the full resolvent at E + i0 to the incident
// distorted wave V exp(i h n . xi(omega')) and pairs it against the outgoing
// phase, so the discrete and continuum formulas match term by term as h -> 0.

namespace latcont {

inline std::vector<VectorXd> unit_circle_grid(int count) {
  if (count < 1) throw ConfigError("direction grid needs at least one point");
  std::vector<VectorXd> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    const double t = 2.0 * pi * j / count;
    VectorXd w(2);
    w << std::cos(t), std::sin(t);
    out.push_back(std::move(w));
  }
  return out;
}

// Restriction of the lattice Fourier transform to the energy surface,
// weighted by |grad P_h|^{-1/2}. Off-grid momenta, so the sum is taken
// directly with per-axis phase tables.
inline std::vector<cdouble> trace_operator(double E, double h, const GridFunction& f,
                                           const std::vector<VectorXd>& omegas) {
  if (f.channels != 1) throw ConfigError("surface trace is defined for scalar data");
  const int d = f.box.dim;
  const int half = f.box.halfwidth;
  const int m = f.box.points_per_axis();
  const double front = std::pow(h / (2.0 * pi), 0.5 * d);

  std::vector<cdouble> out;
  out.reserve(omegas.size());
  std::vector<std::vector<cdouble>> phase(static_cast<std::size_t>(d));
  for (const VectorXd& w : omegas) {
    if (w.size() != d) throw ConfigError("direction dimension does not match the data");
    const SurfacePoint p = square_surface_point(E, h, w);
    for (int j = 0; j < d; ++j) {
      auto& col = phase[static_cast<std::size_t>(j)];
      col.assign(static_cast<std::size_t>(m), cdouble{});
      for (int n = -half; n <= half; ++n)
        col[static_cast<std::size_t>(n + half)] = std::exp(-iu * (h * n * p.xi[j]));
    }
    KahanSumC acc;
    for_each_index(f.box, [&](std::size_t idx, const std::vector<int>& n) {
      cdouble ph = f.values[0][idx];
      for (int j = 0; j < d; ++j) ph *= phase[static_cast<std::size_t>(j)][static_cast<std::size_t>(n[j] + half)];
      acc.add(ph);
    });
    out.push_back(front / std::sqrt(p.grad_norm) * acc.value());
  }
  return out;
}

struct Amplitude {
  double E = 0.0;
  VectorXd omega;        // outgoing direction
  VectorXd omega_prime;  // incident direction
  cdouble born{};
  cdouble full{};
  double h = 0.0;  // 0 marks the continuum limit
};

// Amplitude kernel sampled on a direction grid; row = outgoing, column =
// incident. err_estimate carries the per-entry extrapolation residue when a
// boundary-value ladder produced the matrix, zeros otherwise.
struct AmplitudeGrid {
  double E = 0.0;
  double h = 0.0;
  std::vector<VectorXd> directions;
  Eigen::MatrixXcd born;
  Eigen::MatrixXcd full;
  Eigen::MatrixXd err_estimate;
  std::map<std::string, double> diagnostics;
};

namespace detail {

// Potential samples and plane-wave columns shared by every rung of the
// epsilon ladder.
struct AmplitudeWork {
  Box sbox{2, 0};
  std::vector<std::array<int, 2>> nodes;
  VectorXd v;
  VectorXcd vc;                   // complex copy for Eigen products
  Eigen::MatrixXcd emat;          // emat(n, i) = exp(i h n . xi_i)
  std::vector<SurfacePoint> surface;
  Eigen::MatrixXd pair_weight;    // a_h(xi_i, xi_j)
};

inline AmplitudeWork amplitude_work(double E, double h, const PotentialSpec& V,
                                    const std::vector<VectorXd>& omegas) {
  if (omegas.empty()) throw ConfigError("amplitude needs at least one direction");
  AmplitudeWork w;
  w.surface.reserve(omegas.size());
  for (const VectorXd& o : omegas) {
    if (o.size() != 2) throw ConfigError("lattice amplitudes are two-dimensional");
    w.surface.push_back(square_surface_point(E, h, o));
  }
  const int c = static_cast<int>(omegas.size());
  w.pair_weight.resize(c, c);
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j)
      w.pair_weight(i, j) = 1.0 / std::sqrt(w.surface[static_cast<std::size_t>(i)].grad_norm *
                                            w.surface[static_cast<std::size_t>(j)].grad_norm);

  const int vhalf = V.zero() ? 0 : static_cast<int>(std::ceil(V.support_radius / h));
  w.sbox = Box{2, vhalf};
  const std::size_t total = w.sbox.total();
  w.nodes.resize(total);
  w.v.resize(static_cast<Eigen::Index>(total));
  w.emat.resize(static_cast<Eigen::Index>(total), c);
  VectorXd x(2);
  for_each_index(w.sbox, [&](std::size_t idx, const std::vector<int>& n) {
    w.nodes[idx] = {n[0], n[1]};
    x << h * n[0], h * n[1];
    w.v[static_cast<Eigen::Index>(idx)] = V(x);
    for (int i = 0; i < c; ++i)
      w.emat(static_cast<Eigen::Index>(idx), i) =
          std::exp(iu * (h * (n[0] * w.surface[static_cast<std::size_t>(i)].xi[0] +
                              n[1] * w.surface[static_cast<std::size_t>(i)].xi[1])));
  });
  w.vc = w.v.cast<cdouble>();
  return w;
}

// Quadrature size for the lattice kernel: the integrand's branch points sit
// at distance ~ h eps / (2 sqrt(E)) from the real axis, so the trapezoid
// needs points in proportion to its inverse to keep the error negligible.
inline int amplitude_quad_points(double E, double h, double eps) {
  const double needed = 64.0 * std::sqrt(E) / (h * eps);
  const double capped = std::min(needed, 8.0e6);
  return next_smooth_size(std::max(1 << 18, static_cast<int>(std::ceil(capped))));
}

inline Eigen::MatrixXcd amplitude_correction(const AmplitudeWork& w, double h, cdouble z,
                                             int quad_points, double* rcond_out) {
  const std::size_t total = w.nodes.size();
  const int nmax = 2 * w.sbox.halfwidth;
  SquareLatticeKernel ker(h, z, nmax, quad_points);
  Eigen::MatrixXcd kmat(total, total);
  for (std::size_t i = 0; i < total; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const cdouble kij =
          ker.at(w.nodes[i][0] - w.nodes[j][0], w.nodes[i][1] - w.nodes[j][1]);
      kmat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kij;
      kmat(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = kij;
    }
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(total),
                                                  static_cast<Eigen::Index>(total));
  a += kmat * w.vc.asDiagonal();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  const double rc = lu.rcond();
  if (rcond_out) *rcond_out = rc;
  if (!(rc > 1e-12))
    throw NearSingularError("potential reduction is numerically singular at this energy", rc);
  const Eigen::MatrixXcd psi = w.vc.asDiagonal() * w.emat;  // incident waves cut to supp V
  const Eigen::MatrixXcd u = lu.solve(kmat * psi);
  const double front = std::pow(h / (2.0 * pi), 2);
  Eigen::MatrixXcd corr = w.emat.adjoint() * (w.vc.asDiagonal() * u);
  corr *= front;
  return corr;
}

}  // namespace detail

// Amplitude at a fixed spectral parameter z off the real axis, with the
// surface pairing still taken at the real energy E. The ladder version below
// extrapolates these matrices to the boundary z = E + i0.
inline AmplitudeGrid discrete_amplitude_grid_at(double E, double h, const PotentialSpec& V,
                                                const std::vector<VectorXd>& omegas, cdouble z,
                                                int quad_points = 0) {
  if (!(z.imag() > 0.0)) throw ConfigError("fixed-parameter amplitudes need Im z > 0");
  const detail::AmplitudeWork w = detail::amplitude_work(E, h, V, omegas);
  const int c = static_cast<int>(omegas.size());

  AmplitudeGrid g;
  g.E = E;
  g.h = h;
  g.directions = omegas;
  const double front = std::pow(h / (2.0 * pi), 2);
  g.born = w.emat.adjoint() * (w.vc.asDiagonal() * w.emat);
  g.born *= front;
  g.born = g.born.cwiseProduct(w.pair_weight.cast<cdouble>());
  g.err_estimate = Eigen::MatrixXd::Zero(c, c);
  if (V.zero()) {
    g.full = g.born;
    return g;
  }
  double rc = 1.0;
  const int qp = quad_points > 0 ? quad_points
                                 : detail::amplitude_quad_points(E, h, z.imag());
  const Eigen::MatrixXcd corr = detail::amplitude_correction(w, h, z, qp, &rc);
  g.full = g.born - corr.cwiseProduct(w.pair_weight.cast<cdouble>());
  g.diagnostics["rcond"] = rc;
  return g;
}

// Born term plus the limiting-absorption correction: the resolvent at
// E + i eps is applied to each incident column, the pairing contracted, and
// the epsilon ladder extrapolated entrywise to the real axis.
inline AmplitudeGrid discrete_amplitude_grid(double E, double h, const PotentialSpec& V,
                                             const std::vector<VectorXd>& omegas,
                                             std::vector<double> eps_ladder = {}) {
  const detail::AmplitudeWork w = detail::amplitude_work(E, h, V, omegas);
  const int c = static_cast<int>(omegas.size());

  AmplitudeGrid g;
  g.E = E;
  g.h = h;
  g.directions = omegas;
  const double front = std::pow(h / (2.0 * pi), 2);
  g.born = w.emat.adjoint() * (w.vc.asDiagonal() * w.emat);
  g.born *= front;
  g.born = g.born.cwiseProduct(w.pair_weight.cast<cdouble>());
  g.err_estimate = Eigen::MatrixXd::Zero(c, c);
  if (V.zero()) {
    g.full = g.born;
    return g;
  }

  if (eps_ladder.empty()) eps_ladder = lap_epsilons(E);
  double rcond_min = 1.0;
  std::vector<Eigen::MatrixXcd> ladder;
  ladder.reserve(eps_ladder.size());
  for (double eps : eps_ladder) {
    double rc = 1.0;
    const cdouble z{E, eps};
    ladder.push_back(
        detail::amplitude_correction(w, h, z, detail::amplitude_quad_points(E, h, eps), &rc));
    rcond_min = std::min(rcond_min, rc);
  }

  const double scale = ladder.back().cwiseAbs().maxCoeff();
  const double floor = 1e-10 * scale + 1e-15;
  Eigen::MatrixXcd corr(c, c);
  double err_max = 0.0;
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j) {
      std::vector<cdouble> rungs;
      rungs.reserve(ladder.size());
      for (const auto& m : ladder) rungs.push_back(m(i, j));
      auto ext = richardson_limit(
          rungs, [](const cdouble& x, const cdouble& y) { return std::abs(x - y); }, floor);
      corr(i, j) = ext.limit;
      g.err_estimate(i, j) = ext.err_estimate * w.pair_weight(i, j);
      err_max = std::max(err_max, g.err_estimate(i, j));
    }
  g.full = g.born - corr.cwiseProduct(w.pair_weight.cast<cdouble>());
  g.diagnostics["rcond_min"] = rcond_min;
  g.diagnostics["ladder_terms"] = static_cast<double>(eps_ladder.size());
  g.diagnostics["ladder_err_max"] = err_max;
  return g;
}

inline Amplitude discrete_amplitude(double E, double h, const VectorXd& omega,
                                    const VectorXd& omega_prime, const PotentialSpec& V,
                                    const std::vector<double>& eps_ladder = {}) {
  const AmplitudeGrid g = discrete_amplitude_grid(E, h, V, {omega, omega_prime}, eps_ladder);
  Amplitude a;
  a.E = E;
  a.h = h;
  a.omega = omega;
  a.omega_prime = omega_prime;
  a.born = g.born(0, 1);
  a.full = g.full(0, 1);
  return a;
}

// Normalisation of the continuum kernel: the term-by-term h -> 0 limit of
// the lattice formula, using |grad |xi|^2| = 2 sqrt(E) on the sphere.
inline double continuum_amplitude_constant(double E) {
  if (E <= 0.0) throw WindowError("continuum amplitudes need E > 0");
  return 1.0 / (std::pow(2.0 * pi, 2) * 2.0 * std::sqrt(E));
}

namespace detail {

// Plain midpoint quadrature of int V(x) exp(-i q . x) dx over the support
// square; the integrand is smooth and compactly supported, so this converges
// faster than any power of the cell size.
inline cdouble potential_fourier_integral(const PotentialSpec& V, const VectorXd& q, int cells) {
  if (V.zero()) return {};
  const double r = V.support_radius;
  const double step = 2.0 * r / cells;
  KahanSumC acc;
  VectorXd x(2);
  for (int i = 0; i < cells; ++i) {
    x[0] = -r + step * (i + 0.5);
    for (int j = 0; j < cells; ++j) {
      x[1] = -r + step * (j + 0.5);
      const double vv = V(x);
      if (vv != 0.0) acc.add(vv * std::exp(-iu * (q[0] * x[0] + q[1] * x[1])));
    }
  }
  return step * step * acc.value();
}

}  // namespace detail

// Continuum amplitude kernel on a direction grid: Born integral by midpoint
// quadrature plus the outgoing-kernel correction, one Lippmann-Schwinger
// solve per incident column.
inline AmplitudeGrid continuum_amplitude_grid(double E, const PotentialSpec& V,
                                              const std::vector<VectorXd>& omegas,
                                              double step = 0.005, int born_cells = 1024) {
  if (omegas.empty()) throw ConfigError("amplitude needs at least one direction");
  for (const VectorXd& o : omegas)
    if (o.size() != 2) throw ConfigError("continuum amplitudes are two-dimensional");
  const double ce = continuum_amplitude_constant(E);
  const double k = std::sqrt(E);
  const int c = static_cast<int>(omegas.size());

  AmplitudeGrid g;
  g.E = E;
  g.h = 0.0;
  g.directions = omegas;
  g.born.resize(c, c);
  g.full.resize(c, c);
  g.err_estimate = Eigen::MatrixXd::Zero(c, c);
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j)
      g.born(i, j) =
          ce * detail::potential_fourier_integral(V, k * (omegas[static_cast<std::size_t>(i)] -
                                                          omegas[static_cast<std::size_t>(j)]),
                                                  born_cells);
  if (V.zero()) {
    g.full = g.born;
    return g;
  }

  const int shalf = static_cast<int>(std::ceil(V.support_radius / step));
  const Box sbox{2, shalf};
  double contraction = 0.0;
  double residual = 0.0;
  for (int j = 0; j < c; ++j) {
    const VectorXd& wj = omegas[static_cast<std::size_t>(j)];
    const GridFunction psi = sample(step, sbox, 1, [&](const VectorXd& x, VectorXcd& out) {
      out[0] = V(x) * std::exp(iu * (k * wj.dot(x)));
    });
    const ContinuumFieldResult sol =
        continuum_potential_field(cdouble{E, 0.0}, step, V, psi, shalf);
    contraction = std::max(contraction, sol.contraction);
    residual = std::max(residual, sol.residual);
    for (int i = 0; i < c; ++i) {
      const VectorXd& wi = omegas[static_cast<std::size_t>(i)];
      KahanSumC acc;
      for_each_index(sbox, [&](std::size_t idx, const std::vector<int>& n) {
        VectorXd x(2);
        x << step * n[0], step * n[1];
        const double vv = V(x);
        if (vv != 0.0)
          acc.add(vv * std::exp(-iu * (k * wi.dot(x))) * sol.u.values[0][idx]);
      });
      g.full(i, j) = g.born(i, j) - ce * step * step * acc.value();
    }
  }
  g.diagnostics["contraction_max"] = contraction;
  g.diagnostics["residual_max"] = residual;
  return g;
}

inline Amplitude continuum_amplitude(double E, const VectorXd& omega, const VectorXd& omega_prime,
                                     const PotentialSpec& V, double step = 0.005,
                                     int born_cells = 1024) {
  const AmplitudeGrid g = continuum_amplitude_grid(E, V, {omega, omega_prime}, step, born_cells);
  Amplitude a;
  a.E = E;
  a.h = 0.0;
  a.omega = omega;
  a.omega_prime = omega_prime;
  a.born = g.born(0, 1);
  a.full = g.full(0, 1);
  return a;
}

// Mesh-refinement table for the amplitude kernel: the sup over the direction
// grid of |A_h - A|, together with the Born-only gap and its fitted order.
struct AmplitudeConvergence {
  double E = 0.0;
  std::vector<double> h_values;
  std::vector<double> full_gap;
  std::vector<double> born_gap;
  double born_fit_order = 0.0;
  bool decreasing = false;
  bool halved = false;
  AmplitudeGrid continuum;
  std::vector<AmplitudeGrid> lattice;
};

inline AmplitudeConvergence amplitude_convergence_table(double E, const PotentialSpec& V,
                                                        const std::vector<double>& h_values,
                                                        int omega_count = 16,
                                                        double continuum_step = 0.005,
                                                        const std::vector<double>& eps_ladder = {}) {
  if (h_values.size() < 2) throw ConfigError("convergence table needs at least two mesh sizes");
  for (std::size_t i = 0; i + 1 < h_values.size(); ++i)
    if (!(h_values[i] > h_values[i + 1]) || !(h_values[i + 1] > 0.0))
      throw ConfigError("mesh sizes must be positive and strictly decreasing");

  const std::vector<VectorXd> omegas = unit_circle_grid(omega_count);
  AmplitudeConvergence table;
  table.E = E;
  table.h_values = h_values;
  table.continuum = continuum_amplitude_grid(E, V, omegas, continuum_step);
  for (double h : h_values) {
    table.lattice.push_back(discrete_amplitude_grid(E, h, V, omegas, eps_ladder));
    const AmplitudeGrid& g = table.lattice.back();
    table.full_gap.push_back((g.full - table.continuum.full).cwiseAbs().maxCoeff());
    table.born_gap.push_back((g.born - table.continuum.born).cwiseAbs().maxCoeff());
  }
  table.born_fit_order = fit_order(table.h_values, table.born_gap);
  table.decreasing = strictly_decreasing(table.full_gap);
  table.halved = table.full_gap.back() <= 0.5 * table.full_gap.front();
  return table;
}

}  // namespace latcont
