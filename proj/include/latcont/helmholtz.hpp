#pragma once

// Resolvent solves for the scaled lattice operators: Fourier-multiplier route
// on periodic boxes at complex energy, the infinite-lattice kernel route for
// square-lattice boundary values, momentum cutoffs and the near/far split,
// and the radiation-direction diagnostic.

#include "latcont/fourier.hpp"
#include "latcont/green.hpp"
#include "latcont/spectral.hpp"

namespace latcont {

// --- energy window ---------------------------------------------------------

inline double energy_window_top(const ScalingRegime& r, double h) {
  return r.window * std::pow(h, -r.nu);
}

// Refuse energies beyond the trusted expansion window; boundary-value queries
// must also stay strictly inside the limiting band.
inline void check_energy_window(const ScalingRegime& r, double h, const EnergyQuery& q) {
  const double top = 0.999 * energy_window_top(r, h);
  if (r.kind == RegimeKind::Conical) {
    if (std::abs(q.E) >= top)
      throw WindowError("energy magnitude beyond the conical expansion window");
    if (q.real_axis() && q.E == 0.0)
      throw WindowError("boundary value at the conical tip is degenerate");
  } else {
    if (q.E >= top) throw WindowError("energy beyond the expansion window");
    if (q.real_axis() && q.E <= 0.0)
      throw WindowError("boundary values exist inside the limiting band only");
  }
}

// --- gauge-twisted stencil application --------------------------------------

// A_h u = h^{-nu} (L(d1 + h D) - E0) u on the periodic box, as a plain
// stencil with phase-twisted coefficients.
inline GridFunction apply_scaled_operator(const ScalingRegime& r, const GridFunction& u) {
  const TrigPolyMatrix tw = r.model.symbol.twisted(r.d1);
  const int s = tw.size;
  if (u.channels != s) throw ConfigError("channel count does not match the lattice");
  if (u.box.dim != tw.dim) throw ConfigError("dimension does not match the lattice");
  const int M = u.box.points_per_axis();
  const int N = u.box.halfwidth;
  GridFunction out = GridFunction::zeros(u.h, u.box, s);
  std::vector<int> shifted(u.box.dim);
  for (const auto& term : tw.terms) {
    for_each_index(u.box, [&](std::size_t idx, const std::vector<int>& n) {
      for (int j = 0; j < u.box.dim; ++j) {
        int v = n[j] - term.offset[j];
        if (v < -N) v += M;
        if (v > N) v -= M;
        shifted[j] = v;
      }
      const std::size_t src = u.box.flatten(shifted);
      for (int c = 0; c < s; ++c) {
        cdouble acc{0.0, 0.0};
        for (int cc = 0; cc < s; ++cc) acc += term.coeff(c, cc) * u.values[cc][src];
        out.values[c][idx] += acc;
      }
    });
  }
  const double scale = std::pow(u.h, -r.nu);
  for (int c = 0; c < s; ++c)
    for (std::size_t i = 0; i < out.values[c].size(); ++i)
      out.values[c][i] = scale * (out.values[c][i] - r.reference_energy * u.values[c][i]);
  return out;
}

// --- momentum cutoff ---------------------------------------------------------

// Plateau radii of the data cutoff in the h*xi variable: generous around a
// band minimum, tight around a conical point (stay clear of the other valley).
inline std::pair<double, double> chi_cut_radii(const ScalingRegime& r) {
  if (r.kind == RegimeKind::Conical) return {pi / 6.0, pi / 3.0};
  return {2.0 * pi / 3.0, 5.0 * pi / 6.0};
}

inline double chi_cut_value(const ScalingRegime& r, double h, const VectorXd& xi) {
  const auto [r1, r2] = chi_cut_radii(r);
  return radial_plateau(h * xi.norm(), r1, r2);
}

// --- free resolvent on the periodic box ---------------------------------------

// u = F^{-1} (A_h(xi) - z)^{-1} chi_d f_hat at complex energy. The result
// carries the band-projected part, the L2 size of the orthogonal remainder,
// and residual diagnostics measured against the cut data chi_d f.
inline SolveResult free_resolvent_apply(const ScalingRegime& r, const EnergyQuery& q,
                                        const GridFunction& f) {
  const int s = r.model.symbol.size;
  if (f.channels != s) throw ConfigError("data channels do not match the lattice");
  if (f.box.dim != r.dim()) throw ConfigError("data dimension does not match the lattice");
  check_energy_window(r, f.h, q);
  if (q.real_axis())
    throw ConfigError("the multiplier route needs Im z != 0; boundary values go through the ladder");
  const cdouble z = q.z();
  const double h = f.h;

  TorusFunction t = dft(f);
  TorusFunction proj = TorusFunction::zeros(h, t.box, s);
  TorusFunction cut = TorusFunction::zeros(h, t.box, s);
  const MatrixXcd eye = MatrixXcd::Identity(s, s);
  double min_denom = std::numeric_limits<double>::infinity();
  VectorXcd rhs(s), sol(s);
  for_each_index(t.box, [&](std::size_t idx, const std::vector<int>& k) {
    const VectorXd xi = t.node(k);
    const double chi = chi_cut_value(r, h, xi);
    for (int c = 0; c < s; ++c) rhs[c] = chi * t.values[c][idx];

    const MatrixXcd m = scaled_symbol(r, h, xi) - z * eye;
    if (s == 1) {
      min_denom = std::min(min_denom, std::abs(m(0, 0)));
      sol[0] = rhs[0] / m(0, 0);
    } else {
      Eigen::PartialPivLU<MatrixXcd> lu(m);
      sol = lu.solve(rhs);
      min_denom = std::min(min_denom, std::abs(z.imag()));
    }
    const MatrixXcd P = band_projection(r.model.symbol, r.d1 + h * xi, r.bands);
    const VectorXcd pr = P * sol;
    for (int c = 0; c < s; ++c) {
      cut.values[c][idx] = rhs[c];
      t.values[c][idx] = sol[c];
      proj.values[c][idx] = pr[c];
    }
  });
  if (!(min_denom > 1e-13 * std::max(1.0, std::abs(z))))
    throw NearSingularError("multiplier denominator vanished on the grid", min_denom);

  SolveResult res;
  res.u = idft(t);
  res.projected_part = idft(proj);
  GridFunction rem = res.u;
  rem -= res.projected_part;
  res.remainder_norm = norm_l2(rem);

  GridFunction fcut = idft(cut);
  GridFunction residual = apply_scaled_operator(r, res.u);
  GridFunction zu = res.u;
  zu *= z;
  residual -= zu;
  residual -= fcut;
  const double fnorm = std::max(norm_l2(fcut), 1e-300);
  GridFunction defect = fcut;
  defect -= f;
  res.diagnostics["residual_rel"] = norm_l2(residual) / fnorm;
  res.diagnostics["cut_defect"] = norm_l2(defect);
  res.diagnostics["min_denominator"] = min_denom;
  return res;
}

// --- boundary values through the epsilon ladder --------------------------------

// R(E + i0) (or the Minus side) with an optional potential. Realized with the
// infinite-lattice kernel, which exists for the square regime only; lattices
// with flat bands or embedded thresholds are refused outright.
inline SolveResult lap_extrapolate(const ScalingRegime& r, const EnergyQuery& q,
                                   const PotentialSpec& V, const GridFunction& f,
                                   int out_halfwidth, int ladder_terms = 6) {
  if (!q.real_axis()) throw ConfigError("the epsilon ladder starts from the real axis");
  if (r.id.rfind("kagome", 0) == 0 || r.id.rfind("subdivision", 0) == 0)
    throw ConfigError("flat-band lattices do not admit real-axis boundary values here");
  if (r.id != "square")
    throw ConfigError("real-axis boundary values are implemented for the square regime only");
  if (r.dim() != 2) throw ConfigError("the kernel route is two-dimensional");
  check_energy_window(r, f.h, q);

  LapFieldResult lap = square_lap_field(f.h, q, V, f, out_halfwidth, ladder_terms);
  SolveResult res;
  res.u = lap.u;
  res.projected_part = lap.u;  // single band: the projection is the identity
  res.remainder_norm = 0.0;
  res.diagnostics["ladder_err_estimate"] = lap.err_estimate;
  res.diagnostics["rcond"] = lap.rcond;
  for (std::size_t i = 0; i < lap.ladder_diffs.size(); ++i)
    res.diagnostics["ladder_diff_" + std::to_string(i)] = lap.ladder_diffs[i];
  for (std::size_t i = 0; i < lap.extrapolant_diffs.size(); ++i)
    res.diagnostics["extrapolant_diff_" + std::to_string(i)] = lap.extrapolant_diffs[i];
  return res;
}

// --- near/far frequency split ---------------------------------------------

struct SplitResult {
  SolveResult full;
  GridFunction near_part;  // frequencies around the dispersion surface
  GridFunction far_part;   // elliptic region: near zero and near infinity
  double c0 = 0.0;         // annulus constant actually used
};

// Radial bounds of the dispersion surface |xi| with P_{h,b}(xi) = E, located
// by sign changes along grid edges. Returns {min, max}; empty -> AnnulusError.
inline std::pair<double, double> surface_radial_bounds(const ScalingRegime& r, double h, double E,
                                                       const Box& box) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  TorusFunction probe = TorusFunction::zeros(h, box, 1);
  const int nb = r.band_count();
  std::vector<std::vector<double>> vals(nb);
  for (auto& v : vals) v.resize(box.total());
  for_each_index(box, [&](std::size_t idx, const std::vector<int>& k) {
    const VectorXd roots = scaled_roots(r, h, probe.node(k));
    for (int b = 0; b < nb; ++b) vals[b][idx] = roots[b] - E;
  });
  const int M = box.points_per_axis();
  for_each_index(box, [&](std::size_t idx, const std::vector<int>& k) {
    for (int j = 0; j < box.dim; ++j) {
      if (k[j] + 1 > box.halfwidth) continue;
      std::vector<int> kk(k);
      kk[j] += 1;
      const std::size_t nidx = box.flatten(kk);
      for (int b = 0; b < nb; ++b) {
        const double a = vals[b][idx], c = vals[b][nidx];
        if (a == 0.0 || (a < 0.0) != (c < 0.0)) {
          const double t = a / (a - c);  // linear interpolation along the edge
          VectorXd xi = probe.node(k);
          xi[j] += t * 2.0 * pi / (M * h);
          lo = std::min(lo, xi.norm());
          hi = std::max(hi, xi.norm());
        }
      }
    }
  });
  if (!(hi > 0.0) || !std::isfinite(lo))
    throw AnnulusError("no dispersion surface found at this energy");
  return {lo, hi};
}

// chi1 is 1 near zero frequency and near the lattice scale, 0 on the annulus
// holding the dispersion surface; chi2 = 1 - chi1.
inline double chi_far_value(double rho, double c0) {
  return radial_plateau(rho, c0 / 3.0, 2.0 * c0 / 3.0) +
         (1.0 - radial_plateau(rho, 2.0 / c0, 3.0 / c0));
}

inline SplitResult split_near_far(const ScalingRegime& r, const EnergyQuery& q,
                                  const GridFunction& f, double c0 = 0.0) {
  SplitResult out;
  out.full = free_resolvent_apply(r, q, f);
  const double h = f.h;

  const auto [lo, hi] = surface_radial_bounds(r, h, q.E, f.box);
  if (c0 == 0.0) {
    c0 = std::min(lo / 1.1, 1.0 / (1.1 * hi));  // ten percent margin on both ends
    if (!(c0 > 0.0)) throw AnnulusError("surface touches zero frequency; no annulus exists");
  }
  if (lo < c0 || hi > 1.0 / c0)
    throw AnnulusError("dispersion surface escapes the annulus [c0, 1/c0]");
  out.c0 = c0;

  TorusFunction t = dft(out.full.u);
  TorusFunction far = TorusFunction::zeros(h, t.box, t.channels);
  for_each_index(t.box, [&](std::size_t idx, const std::vector<int>& k) {
    const double chi1 = chi_far_value(t.node(k).norm(), c0);
    for (int c = 0; c < t.channels; ++c) {
      far.values[c][idx] = chi1 * t.values[c][idx];
      t.values[c][idx] *= 1.0 - chi1;
    }
  });
  out.far_part = idft(far);
  out.near_part = idft(t);
  return out;
}

// --- radiation diagnostics -----------------------------------------------

// Smooth momentum localization around xi0 (torus metric).
inline GridFunction momentum_localize(const GridFunction& u, const VectorXd& xi0, double r1,
                                      double r2) {
  TorusFunction t = dft(u);
  const double period = 2.0 * pi / u.h;
  for_each_index(t.box, [&](std::size_t idx, const std::vector<int>& k) {
    VectorXd d = t.node(k) - xi0;
    for (int j = 0; j < d.size(); ++j) d[j] -= period * std::round(d[j] / period);
    const double chi = radial_plateau(d.norm(), r1, r2);
    for (int c = 0; c < t.channels; ++c) t.values[c][idx] *= chi;
  });
  return idft(t);
}

// (1/R) h^d sum over the cone {x: -x.v > delta |x| |v|, |x| <= R} of |u|^2,
// one value per requested radius. The cone opens around -v, so it captures
// energy arriving from infinity along the group direction v.
inline std::vector<double> cone_flux_profile(const GridFunction& u, const VectorXd& v, double delta,
                                             const std::vector<double>& radii) {
  const double vn = v.norm();
  if (!(vn > 0.0)) throw ConfigError("cone direction must be nonzero");
  std::vector<KahanSum> acc(radii.size());
  for_each_index(u.box, [&](std::size_t idx, const std::vector<int>& n) {
    double xn2 = 0.0, xv = 0.0;
    for (int j = 0; j < u.box.dim; ++j) {
      const double x = u.h * n[j];
      xn2 += x * x;
      xv += x * v[j];
    }
    const double xn = std::sqrt(xn2);
    if (!(-xv > delta * xn * vn)) return;
    double a2 = 0.0;
    for (int c = 0; c < u.channels; ++c) a2 += std::norm(u.values[c][idx]);
    for (std::size_t i = 0; i < radii.size(); ++i)
      if (xn <= radii[i]) acc[i].add(a2);
  });
  const double cell = std::pow(u.h, u.box.dim);
  std::vector<double> out(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) out[i] = cell * acc[i].value() / radii[i];
  return out;
}

struct RadiationDiagnostic {
  SurfacePoint point;
  std::vector<double> radii;   // dyadic, largest first
  std::vector<double> fluxes;  // incoming-cone flux at each radius
  double flux = 0.0;           // at the largest radius
};

// Localize u around the surface point for omega and measure the flux arriving
// through the incoming cone. Square regime (the surface parametrization is
// explicit there).
inline RadiationDiagnostic radiation_diagnostic(const GridFunction& u, const ScalingRegime& r,
                                                double E, const VectorXd& omega, double delta = 0.5,
                                                double chi_radius = 0.3, int levels = 4) {
  if (r.id != "square") throw ConfigError("radiation diagnostic is parametrized for the square regime");
  RadiationDiagnostic diag;
  diag.point = square_surface_point(E, u.h, omega);
  GridFunction w = momentum_localize(u, diag.point.xi, 0.5 * chi_radius, chi_radius);
  const VectorXd v = square_grad_ph(u.h, diag.point.xi);
  const double rmax = u.h * u.box.halfwidth;
  for (int j = 0; j < levels; ++j) diag.radii.push_back(rmax / std::pow(2.0, j));
  diag.fluxes = cone_flux_profile(w, v, delta, diag.radii);
  diag.flux = diag.fluxes.empty() ? 0.0 : diag.fluxes.front();
  return diag;
}

// Both branches R(E +- i eps) applied to a Gaussian source on a large box,
// streamed through raw transforms so the box can be much larger than any
// GridFunction the rest of the toolkit touches. Returns the incoming-cone
// fluxes of the two localized branch solutions and their ratio.
struct BranchFluxResult {
  double plus_flux = 0.0;
  double minus_flux = 0.0;
  double ratio = 0.0;
  double epsilon = 0.0;
  int box_halfwidth = 0;
};

inline BranchFluxResult square_branch_flux_experiment(double h, double E, double radius,
                                                      const VectorXd& omega, double source_sigma,
                                                      double delta = 0.5, double epsilon = 0.0,
                                                      double chi_radius = 0.3) {
  BranchFluxResult out;
  const int half = static_cast<int>(std::lround(radius / h));
  const int M = 2 * half + 1;
  const SurfacePoint sp = square_surface_point(E, h, omega);
  const VectorXd v = square_grad_ph(h, sp.xi);
  if (epsilon <= 0.0) epsilon = 2.0 * v.norm() / radius;  // a few wave crossings fit the box
  out.epsilon = epsilon;
  out.box_halfwidth = half;

  const std::size_t mm = static_cast<std::size_t>(M) * M;
  detail::FftBuffer buf(mm);
  fftw_plan fwd = fftw_plan_dft_2d(M, M, buf.data, buf.data, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_plan bwd = fftw_plan_dft_2d(M, M, buf.data, buf.data, FFTW_BACKWARD, FFTW_ESTIMATE);
  const double dxi = 2.0 * pi / (M * h);
  const double vn = v.norm();

  for (int branch = 0; branch < 2; ++branch) {
    const cdouble z{E, branch == 0 ? epsilon : -epsilon};
    // source in index order (centered index = fftw index - half, row-major)
    for (int i1 = 0; i1 < M; ++i1) {
      const double x1 = h * (i1 - half);
      for (int i2 = 0; i2 < M; ++i2) {
        const double x2 = h * (i2 - half);
        const std::size_t idx = static_cast<std::size_t>(i1) * M + i2;
        buf.data[idx][0] = std::exp(-(x1 * x1 + x2 * x2) / (2.0 * source_sigma * source_sigma));
        buf.data[idx][1] = 0.0;
      }
    }
    fftw_execute(fwd);
    // multiplier chi_loc / (P_h - z), with the centered-grid phase folded in
    VectorXd xi(2);
    for (int i1 = 0; i1 < M; ++i1) {
      // fftw bin i corresponds to centered frequency k via e^{-2 pi i k (n+half)/M};
      // the (n+half) shift contributes a pure phase that cancels between the
      // forward and backward passes, so only the bin -> k folding matters.
      const int k1 = i1 <= M / 2 ? i1 : i1 - M;
      xi[0] = dxi * k1;
      for (int i2 = 0; i2 < M; ++i2) {
        const int k2 = i2 <= M / 2 ? i2 : i2 - M;
        xi[1] = dxi * k2;
        VectorXd d = xi - sp.xi;
        const double chi = radial_plateau(d.norm(), 0.5 * chi_radius, chi_radius);
        const std::size_t idx = static_cast<std::size_t>(i1) * M + i2;
        if (chi == 0.0) {
          buf.data[idx][0] = buf.data[idx][1] = 0.0;
          continue;
        }
        const cdouble mult = chi / ((square_ph(h, xi) - z) * static_cast<double>(mm));
        const cdouble w = cdouble{buf.data[idx][0], buf.data[idx][1]} * mult;
        buf.data[idx][0] = w.real();
        buf.data[idx][1] = w.imag();
      }
    }
    fftw_execute(bwd);
    KahanSum acc;
    for (int i1 = 0; i1 < M; ++i1) {
      const double x1 = h * (i1 - half);
      for (int i2 = 0; i2 < M; ++i2) {
        const double x2 = h * (i2 - half);
        const double xn = std::hypot(x1, x2);
        if (xn > radius) continue;
        if (!(-(x1 * v[0] + x2 * v[1]) > delta * xn * vn)) continue;
        const std::size_t idx = static_cast<std::size_t>(i1) * M + i2;
        acc.add(buf.data[idx][0] * buf.data[idx][0] + buf.data[idx][1] * buf.data[idx][1]);
      }
    }
    const double flux = h * h * acc.value() / radius;
    (branch == 0 ? out.plus_flux : out.minus_flux) = flux;
  }
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);
  out.ratio = out.plus_flux / std::max(out.minus_flux, 1e-300);
  return out;
}

// --- potential solve ------------------------------------------------------

// (A_h + V - z) u = chi_d f by dense reduction on the support of V. Complex
// energies use the periodic multiplier kernel on the data box; real-axis
// queries go through the square-lattice epsilon ladder.
inline SolveResult potential_solve(const ScalingRegime& r, const EnergyQuery& q,
                                   const PotentialSpec& V, const GridFunction& f) {
  if (r.model.symbol.size != 1)
    throw ConfigError("potential solves are implemented for scalar lattices");
  if (f.box.dim != 2) throw ConfigError("potential solves are two-dimensional");
  if (q.real_axis()) {
    check_energy_window(r, f.h, q);
    return lap_extrapolate(r, q, V, f, f.box.halfwidth);
  }
  if (V.zero()) return free_resolvent_apply(r, q, f);
  check_energy_window(r, f.h, q);

  const double h = f.h;
  const cdouble z = q.z();
  const int vhalf = static_cast<int>(std::ceil(V.support_radius / h));
  if (f.box.halfwidth < 2 * vhalf)
    throw ConfigError("data box too small to hold the potential interaction range");

  // exact periodic kernel K = (A_h - z)^{-1} delta and multiplier transforms
  TorusFunction mult = TorusFunction::zeros(h, f.box, 1);
  for_each_index(f.box, [&](std::size_t idx, const std::vector<int>& k) {
    mult.values[0][idx] = 1.0 / (scaled_symbol(r, h, mult.node(k))(0, 0) - z);
  });
  const auto apply_resolvent = [&](const GridFunction& g, bool cut) {
    TorusFunction t = dft(g);
    for_each_index(f.box, [&](std::size_t idx, const std::vector<int>& k) {
      const double chi = cut ? chi_cut_value(r, h, t.node(k)) : 1.0;
      t.values[0][idx] *= chi * mult.values[0][idx];
    });
    return idft(t);
  };

  GridFunction kper;
  {
    GridFunction delta = GridFunction::zeros(h, f.box, 1);
    delta.values[0][f.box.flatten(std::vector<int>(2, 0))] = 1.0;
    kper = apply_resolvent(delta, false);
  }
  GridFunction u_free = apply_resolvent(f, true);

  const Box vbox{2, vhalf};
  const std::size_t tot = vbox.total();
  std::vector<double> vvals(tot);
  std::vector<std::array<int, 2>> coords(tot);
  for_each_index(vbox, [&](std::size_t idx, const std::vector<int>& n) {
    VectorXd x(2);
    x[0] = h * n[0];
    x[1] = h * n[1];
    vvals[idx] = V(x);
    coords[idx] = {n[0], n[1]};
  });
  MatrixXcd a = MatrixXcd::Identity(tot, tot);
  for (std::size_t i = 0; i < tot; ++i)
    for (std::size_t j = 0; j < tot; ++j) {
      const std::vector<int> d{coords[i][0] - coords[j][0], coords[i][1] - coords[j][1]};
      a(i, j) += kper.values[0][f.box.flatten(d)] * vvals[j];
    }
  Eigen::PartialPivLU<MatrixXcd> lu(a);
  const double rc = lu.rcond();
  if (!(rc > 1e-12)) throw NearSingularError("potential reduction matrix is numerically singular", rc);
  VectorXcd rhs(tot);
  for (std::size_t i = 0; i < tot; ++i) rhs[i] = u_free.values[0][f.box.flatten({coords[i][0], coords[i][1]})];
  const VectorXcd u_supp = lu.solve(rhs);

  GridFunction w = GridFunction::zeros(h, f.box, 1);
  for (std::size_t i = 0; i < tot; ++i)
    w.values[0][f.box.flatten({coords[i][0], coords[i][1]})] = vvals[i] * u_supp[i];
  GridFunction correction = apply_resolvent(w, false);

  SolveResult res;
  res.u = u_free;
  res.u -= correction;
  res.projected_part = res.u;
  res.remainder_norm = 0.0;
  res.diagnostics["rcond"] = rc;

  // residual against the cut data chi_d f
  TorusFunction tf = dft(f);
  for_each_index(f.box, [&](std::size_t idx, const std::vector<int>& k) {
    tf.values[0][idx] *= chi_cut_value(r, h, tf.node(k));
  });
  GridFunction fcut = idft(tf);
  GridFunction residual = apply_scaled_operator(r, res.u);
  for_each_index(f.box, [&](std::size_t idx, const std::vector<int>& n) {
    VectorXd x(2);
    x[0] = h * n[0];
    x[1] = h * n[1];
    residual.values[0][idx] += V(x) * res.u.values[0][idx] - z * res.u.values[0][idx];
  });
  residual -= fcut;
  GridFunction defect = fcut;
  defect -= f;
  res.diagnostics["residual_rel"] = norm_l2(residual) / std::max(norm_l2(fcut), 1e-300);
  res.diagnostics["cut_defect"] = norm_l2(defect);
  return res;
}

// --- continuum reference solve ---------------------------------------------

// Limit-model field on a fine periodic grid by Fourier multiplier. Simple
// minima use the constant eigenprojection at the expansion point; the
// hexagonal conical regime inverts its 2x2 generator in closed form. Other
// conical regimes have no continuum oracle here.
inline GridFunction continuum_reference_solve(const ScalingRegime& r, cdouble z,
                                              const GridFunction& f) {
  const int s = r.model.symbol.size;
  if (f.channels != s) throw ConfigError("data channels do not match the lattice");
  if (z.imag() == 0.0) throw ConfigError("the continuum multiplier route needs Im z != 0");
  TorusFunction t = dft(f);
  VectorXcd vec(s), sol(s);
  if (r.kind == RegimeKind::GlobalMinimum) {
    const MatrixXcd p0 = band_projection(r.model.symbol, r.d1, r.bands);
    for_each_index(t.box, [&](std::size_t idx, const std::vector<int>& k) {
      const VectorXd xi = t.node(k);
      const cdouble denom = limit_symbol(r, xi) - z;
      for (int c = 0; c < s; ++c) vec[c] = t.values[c][idx];
      sol = (p0 * vec) / denom;
      for (int c = 0; c < s; ++c) t.values[c][idx] = sol[c];
    });
  } else if (r.id == "hexagonal-dirac") {
    for_each_index(t.box, [&](std::size_t idx, const std::vector<int>& k) {
      const VectorXd xi = t.node(k);
      const MatrixXcd d = dirac_matrix(r, xi);
      const cdouble denom = d(0, 1) * d(1, 0) - z * z;  // zeta1^2 + zeta2^2 - z^2
      for (int c = 0; c < s; ++c) vec[c] = t.values[c][idx];
      sol = (d * vec + z * vec) / denom;
      for (int c = 0; c < s; ++c) t.values[c][idx] = sol[c];
    });
  } else {
    throw ConfigError("no continuum reference for this conical regime");
  }
  return idft(t);
}

}  // namespace latcont
