#pragma once

// Square-lattice machinery on the infinite grid h Z^2: the outgoing resolvent
// kernel through closed-form fiber integrals, epsilon-ladder extrapolation to
// the real axis, finite-rank potential reduction, and the matching continuum
// Helmholtz kernel with log-corrected quadrature weights.

#include <array>
#include <numbers>

#include <Eigen/LU>

#include "latcont/fft.hpp"
#include "latcont/problem.hpp"

namespace latcont {

namespace detail {

// Smallest 5-smooth size >= n, keeps the convolution FFTs fast.
inline int next_smooth_size(int n) {
  for (int p = std::max(n, 1);; ++p) {
    int r = p;
    for (int f : {2, 3, 5})
      while (r % f == 0) r /= f;
    if (r == 1) return p;
  }
}

}  // namespace detail

// Linear convolution out(n) = sum_m ker(n - m) src(m) over the source box,
// evaluated on a centered box of the given halfwidth. Scalar kernel, applied
// channel by channel. Two dimensions only.
inline GridFunction convolve_kernel(const std::function<cdouble(int, int)>& ker,
                                    const GridFunction& src, int out_halfwidth) {
  if (src.box.dim != 2) throw Error("convolve_kernel handles d = 2 only");
  const int ns = src.box.halfwidth;
  const int lag = ns + out_halfwidth;
  const int p = detail::next_smooth_size(2 * lag + 1);
  const std::size_t pp = static_cast<std::size_t>(p) * p;

  detail::FftBuffer a(pp), b(pp);
  fftw_plan fwd_a = fftw_plan_dft_2d(p, p, a.data, a.data, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_plan fwd_b = fftw_plan_dft_2d(p, p, b.data, b.data, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_plan bwd_b = fftw_plan_dft_2d(p, p, b.data, b.data, FFTW_BACKWARD, FFTW_ESTIMATE);

  for (std::size_t i = 0; i < pp; ++i) a.data[i][0] = a.data[i][1] = 0.0;
  for (int i1 = 0; i1 < p; ++i1) {
    const int k1 = i1 <= p / 2 ? i1 : i1 - p;
    if (std::abs(k1) > lag) continue;
    for (int i2 = 0; i2 < p; ++i2) {
      const int k2 = i2 <= p / 2 ? i2 : i2 - p;
      if (std::abs(k2) > lag) continue;
      const cdouble v = ker(k1, k2);
      const std::size_t idx = static_cast<std::size_t>(i1) * p + i2;
      a.data[idx][0] = v.real();
      a.data[idx][1] = v.imag();
    }
  }
  fftw_execute(fwd_a);

  Box out_box{2, out_halfwidth};
  GridFunction out = GridFunction::zeros(src.h, out_box, src.channels);
  const auto wrap = [p](int k) { return ((k % p) + p) % p; };
  for (int c = 0; c < src.channels; ++c) {
    for (std::size_t i = 0; i < pp; ++i) b.data[i][0] = b.data[i][1] = 0.0;
    for_each_index(src.box, [&](std::size_t idx, const std::vector<int>& n) {
      const std::size_t j = static_cast<std::size_t>(wrap(n[0])) * p + wrap(n[1]);
      b.data[j][0] = src.values[c][idx].real();
      b.data[j][1] = src.values[c][idx].imag();
    });
    fftw_execute(fwd_b);
    for (std::size_t i = 0; i < pp; ++i) {
      const cdouble prod = cdouble{a.data[i][0], a.data[i][1]} * cdouble{b.data[i][0], b.data[i][1]};
      b.data[i][0] = prod.real();
      b.data[i][1] = prod.imag();
    }
    fftw_execute(bwd_b);
    const double scale = 1.0 / static_cast<double>(pp);
    for_each_index(out_box, [&](std::size_t idx, const std::vector<int>& n) {
      const std::size_t j = static_cast<std::size_t>(wrap(n[0])) * p + wrap(n[1]);
      out.values[c][idx] = scale * cdouble{b.data[j][0], b.data[j][1]};
    });
  }
  fftw_destroy_plan(fwd_a);
  fftw_destroy_plan(fwd_b);
  fftw_destroy_plan(bwd_b);
  return out;
}

// --- outgoing Hankel function -------------------------------------------------

// H0^(1)(w) for complex w with Im w >= 0. Power series below |w| = 11, large
// argument expansion beyond; both branches push truncation error below 1e-10.
inline cdouble hankel0_out(cdouble w) {
  const double aw = std::abs(w);
  if (aw == 0.0) throw Error("hankel0_out: singular at 0");
  if (aw <= 11.0) {
    const cdouble q = 0.25 * w * w;
    cdouble term{1.0, 0.0};
    cdouble j0 = term;
    cdouble ysum{0.0, 0.0};
    double harmonic = 0.0;
    for (int k = 1; k <= 60; ++k) {
      term *= -q / static_cast<double>(k * k);
      harmonic += 1.0 / k;
      j0 += term;
      ysum += -term * harmonic;
      if (std::abs(term) < 1e-18 * (1.0 + std::abs(j0))) break;
    }
    const double egamma = std::numbers::egamma_v<double>;
    const cdouble y0 = (2.0 / pi) * ((std::log(w / 2.0) + egamma) * j0 + ysum);
    return j0 + iu * y0;
  }
  // sqrt(2/(pi w)) e^{i(w - pi/4)} sum_k ((2k-1)!!)^2 / k! * (-i/(8w))^k
  cdouble sum{1.0, 0.0};
  cdouble term{1.0, 0.0};
  double prev = 1.0;
  for (int k = 1; k <= 40; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (odd * odd / k) * (-iu / (8.0 * w));
    if (std::abs(term) > prev) break;  // divergent tail reached
    prev = std::abs(term);
    sum += term;
    if (prev < 1e-17) break;
  }
  return std::sqrt(2.0 / (pi * w)) * std::exp(iu * (w - pi / 4.0)) * sum;
}

// Outgoing 2-D Helmholtz kernel (i/4) H0^(1)(k r); k may be complex (Im k >= 0).
inline cdouble helmholtz_green2d(cdouble k, double r) { return 0.25 * iu * hankel0_out(k * r); }

inline double bessel_j0(double x) {
  if (x == 0.0) return 1.0;
  return hankel0_out(cdouble{std::abs(x), 0.0}).real();
}

// --- square-lattice symbol helpers --------------------------------------------

inline double square_ph(double h, const VectorXd& xi) {
  double s = 0.0;
  for (int j = 0; j < xi.size(); ++j) s += sq(std::sin(0.5 * h * xi[j]));
  return 4.0 / (h * h) * s;
}

inline VectorXd square_grad_ph(double h, const VectorXd& xi) {
  VectorXd g(xi.size());
  for (int j = 0; j < xi.size(); ++j) g[j] = (2.0 / h) * std::sin(h * xi[j]);
  return g;
}

// --- resolvent kernel on the infinite square lattice ---------------------------
//
// For the scaled five-point operator on h Z^2 and Im z != 0, integrating the
// second momentum coordinate in closed form leaves one fiber integral
//   K(n1, n2) = (h^3 / 4 pi) Int e^{i h n1 xi} rho(xi)^{|n2|} / s(xi) d xi,
// where for w(xi) = 2 - cos(h xi) - h^2 z / 2 the factor rho solves
// rho^2 - 2 w rho + 1 = 0 with |rho| < 1 and s = (1 - rho^2) / (2 rho).
// A uniform trapezoid rule over the fiber is spectrally accurate (the
// integrand is analytic in a strip) and one inverse FFT per row of |n2|
// produces every n1 at once.
class SquareLatticeKernel {
 public:
  SquareLatticeKernel(double h, cdouble z, int nmax, int quad_points = 1 << 18)
      : h_(h), z_(z), nmax_(nmax), table_(nmax + 1, nmax + 1) {
    if (h <= 0.0) throw ConfigError("kernel needs h > 0");
    if (nmax < 0) throw ConfigError("kernel needs nmax >= 0");
    if (z.imag() == 0.0)
      throw NearSingularError("kernel needs Im z != 0; reach the real axis through the epsilon ladder", 0.0);
    const int m = quad_points;
    detail::FftBuffer in(m), out(m);
    fftw_plan plan = fftw_plan_dft_1d(m, in.data, out.data, FFTW_BACKWARD, FFTW_ESTIMATE);

    std::vector<cdouble> rho(m), acc(m);
    for (int j = 0; j < m; ++j) {
      const double t = -pi + 2.0 * pi * j / m;  // t = h xi
      const cdouble w = 2.0 - std::cos(t) - 0.5 * h * h * z;
      const cdouble s0 = std::sqrt(w * w - 1.0);
      cdouble r = w - s0;
      if (std::abs(r) > 1.0) r = w + s0;
      rho[j] = r;
      acc[j] = 2.0 * r / (1.0 - r * r);  // 1/s on the branch tied to rho
    }
    const double front = h * h / (2.0 * m);
    for (int n2 = 0; n2 <= nmax; ++n2) {
      if (n2 > 0)
        for (int j = 0; j < m; ++j) acc[j] *= rho[j];
      for (int j = 0; j < m; ++j) {
        in.data[j][0] = acc[j].real();
        in.data[j][1] = acc[j].imag();
      }
      fftw_execute(plan);
      for (int n1 = 0; n1 <= nmax; ++n1) {
        const double parity = (n1 % 2 == 0) ? 1.0 : -1.0;
        table_(n1, n2) = front * parity * cdouble{out.data[n1][0], out.data[n1][1]};
      }
    }
    fftw_destroy_plan(plan);
  }

  cdouble at(int n1, int n2) const {
    n1 = std::abs(n1);
    n2 = std::abs(n2);
    if (n1 > nmax_ || n2 > nmax_) throw Error("kernel offset outside the tabulated range");
    return table_(n1, n2);
  }

  double h() const { return h_; }
  cdouble z() const { return z_; }
  int nmax() const { return nmax_; }

 private:
  double h_;
  cdouble z_;
  int nmax_;
  MatrixXcd table_;
};

// Free field u = R0(z) f on a centered output box, both on step h.
inline GridFunction square_free_field(const SquareLatticeKernel& kernel, const GridFunction& f,
                                      int out_halfwidth) {
  if (f.channels != 1) throw ConfigError("square-lattice solves are scalar");
  if (f.h != kernel.h()) throw ConfigError("kernel and data live on different grids");
  if (kernel.nmax() < out_halfwidth + f.box.halfwidth)
    throw ConfigError("kernel table too small for the requested output box");
  return convolve_kernel([&](int a, int b) { return kernel.at(a, b); }, f, out_halfwidth);
}

// --- epsilon ladder and first-order extrapolation ------------------------------

inline std::vector<double> lap_epsilons(double E, int terms = 6, double start_factor = 0.1) {
  if (E <= 0.0) throw ConfigError("epsilon ladder needs E > 0");
  if (terms < 2) throw ConfigError("epsilon ladder needs at least two rungs");
  std::vector<double> eps(terms);
  for (int k = 0; k < terms; ++k) eps[k] = start_factor * E * std::pow(2.0, -k);
  return eps;
}

template <class T>
struct RichardsonResult {
  T limit;
  double err_estimate = 0.0;
  std::vector<double> diffs;  // distances between successive extrapolants
};

// First-order Richardson along a ratio-1/2 ladder: v_k = 2 u_{k+1} - u_k.
// The returned limit is the last extrapolant; the error estimate is the
// distance between the last two. Throws when the extrapolants stop
// contracting (no boundary limit at this energy).
template <class T, class DistFn>
RichardsonResult<T> richardson_limit(const std::vector<T>& u, DistFn dist, double floor = 0.0) {
  if (u.size() < 2) throw ConfigError("extrapolation needs at least two ladder rungs");
  std::vector<T> v;
  v.reserve(u.size() - 1);
  for (std::size_t k = 0; k + 1 < u.size(); ++k) {
    T w = u[k + 1];
    w *= 2.0;
    w -= u[k];
    v.push_back(std::move(w));
  }
  RichardsonResult<T> res{v.back(), 0.0, {}};
  for (std::size_t k = 1; k < v.size(); ++k) res.diffs.push_back(dist(v[k], v[k - 1]));
  if (!res.diffs.empty()) res.err_estimate = res.diffs.back();
  if (res.diffs.size() >= 2) {
    // After first-order elimination a ladder with a boundary limit contracts
    // its extrapolant increments by about 1/4 per rung; slow ratios near 1
    // (logarithmic divergence) stay above 3/4.
    const double prev = res.diffs[res.diffs.size() - 2];
    const double last = res.diffs.back();
    if (last > floor && last > 0.75 * prev)
      throw NoLimitError("epsilon extrapolants are not contracting; no boundary limit detected");
  }
  return res;
}

inline RichardsonResult<GridFunction> richardson_limit_field(const std::vector<GridFunction>& u,
                                                             double floor = 0.0) {
  return richardson_limit(
      u,
      [](const GridFunction& a, const GridFunction& b) {
        GridFunction d = a;
        d -= b;
        return norm_l2(d);
      },
      floor);
}

// --- finite-rank potential reduction -------------------------------------------

// Dense solve of (I + R0(z) V) u = rhs restricted to the support box of V.
// One LU factorization is shared across right-hand sides.
class SquarePotentialReduction {
 public:
  SquarePotentialReduction(const SquareLatticeKernel& kernel, const PotentialSpec& V)
      : h_(kernel.h()) {
    if (V.zero()) throw ConfigError("potential reduction needs a nonzero potential");
    const int half = static_cast<int>(std::ceil(V.support_radius / h_));
    if (kernel.nmax() < 2 * half) throw ConfigError("kernel table too small for the potential support");
    box_ = Box{2, half};
    const std::size_t tot = box_.total();
    v_.resize(tot);
    std::vector<std::array<int, 2>> coords(tot);
    for_each_index(box_, [&](std::size_t idx, const std::vector<int>& n) {
      VectorXd x(2);
      x[0] = h_ * n[0];
      x[1] = h_ * n[1];
      v_[idx] = V(x);
      coords[idx] = {n[0], n[1]};
    });
    MatrixXcd a = MatrixXcd::Identity(tot, tot);
    for (std::size_t i = 0; i < tot; ++i)
      for (std::size_t j = 0; j < tot; ++j)
        a(i, j) += kernel.at(coords[i][0] - coords[j][0], coords[i][1] - coords[j][1]) * v_[j];
    lu_.compute(a);
    rcond_ = lu_.rcond();
    if (!(rcond_ > 1e-12))
      throw NearSingularError("potential reduction matrix is numerically singular", rcond_);
  }

  // Solution values on the support box.
  VectorXcd solve(const VectorXcd& rhs) const { return lu_.solve(rhs); }

  const Box& support_box() const { return box_; }
  const std::vector<double>& potential_values() const { return v_; }
  double rcond() const { return rcond_; }
  double h() const { return h_; }

 private:
  double h_;
  Box box_;
  std::vector<double> v_;
  Eigen::PartialPivLU<MatrixXcd> lu_;
  double rcond_;
};

// Full potential solve u = R0 f - R0 (V u) on the output box; u on supp V is
// obtained from the dense reduction first.
inline GridFunction square_potential_field(const SquareLatticeKernel& kernel, const PotentialSpec& V,
                                           const GridFunction& f, int out_halfwidth,
                                           double* rcond_out = nullptr) {
  GridFunction free_out = square_free_field(kernel, f, out_halfwidth);
  if (V.zero()) {
    if (rcond_out) *rcond_out = 1.0;
    return free_out;
  }
  SquarePotentialReduction red(kernel, V);
  if (rcond_out) *rcond_out = red.rcond();
  const Box& vbox = red.support_box();
  GridFunction free_v = square_free_field(kernel, f, vbox.halfwidth);
  VectorXcd rhs(vbox.total());
  for (std::size_t i = 0; i < vbox.total(); ++i) rhs[i] = free_v.values[0][i];
  const VectorXcd u_supp = red.solve(rhs);
  GridFunction w = GridFunction::zeros(kernel.h(), vbox, 1);
  for (std::size_t i = 0; i < vbox.total(); ++i)
    w.values[0][i] = red.potential_values()[i] * u_supp[i];
  GridFunction correction = square_free_field(kernel, w, out_halfwidth);
  free_out -= correction;
  return free_out;
}

// Boundary-value field R(E + i0) f (or the Minus side) on the square lattice:
// solve down the epsilon ladder and extrapolate node by node.
struct LapFieldResult {
  GridFunction u;
  double err_estimate = 0.0;
  std::vector<double> ladder_diffs;      // raw solution increments down the ladder
  std::vector<double> extrapolant_diffs; // Richardson extrapolant increments
  double rcond = 1.0;
};

inline LapFieldResult square_lap_field(double h, const EnergyQuery& query, const PotentialSpec& V,
                                       const GridFunction& f, int out_halfwidth, int ladder_terms = 6,
                                       int quad_points = 1 << 18) {
  if (!query.real_axis()) throw ConfigError("the epsilon ladder starts from the real axis");
  const double sign = query.side == EnergyQuery::Side::Plus ? 1.0 : -1.0;
  const std::vector<double> eps = lap_epsilons(query.E, ladder_terms);
  const int vhalf = V.zero() ? 0 : static_cast<int>(std::ceil(V.support_radius / h));
  const int nmax = std::max(out_halfwidth + f.box.halfwidth,
                            std::max(vhalf + f.box.halfwidth, std::max(2 * vhalf, out_halfwidth + vhalf)));
  LapFieldResult res;
  std::vector<GridFunction> ladder;
  ladder.reserve(eps.size());
  for (double e : eps) {
    SquareLatticeKernel kernel(h, cdouble{query.E, sign * e}, nmax, quad_points);
    double rc = 1.0;
    ladder.push_back(square_potential_field(kernel, V, f, out_halfwidth, &rc));
    res.rcond = std::min(res.rcond, rc);
    if (ladder.size() >= 2) {
      GridFunction d = ladder.back();
      d -= ladder[ladder.size() - 2];
      res.ladder_diffs.push_back(norm_l2(d));
    }
  }
  auto ext = richardson_limit_field(ladder, 1e-13 * norm_l2(ladder.back()));
  res.u = std::move(ext.limit);
  res.err_estimate = ext.err_estimate;
  res.extrapolant_diffs = std::move(ext.diffs);
  return res;
}

// --- dispersion surface points -------------------------------------------------

struct SurfacePoint {
  double E = 0.0;
  VectorXd omega;      // unit direction
  VectorXd xi;         // momentum on the surface P_h(xi) = E
  double grad_norm = 0.0;
};

inline SurfacePoint square_surface_point(double E, double h, const VectorXd& omega) {
  if (omega.size() == 0 || omega.norm() == 0.0) throw ConfigError("direction must be nonzero");
  if (E <= 0.0 || E >= 4.0 / (h * h))
    throw WindowError("energy outside the directional band window (0, 4/h^2)");
  const VectorXd w = omega / omega.norm();
  VectorXd xi(w.size());
  for (int j = 0; j < w.size(); ++j) xi[j] = (2.0 / h) * std::asin(0.5 * h * std::sqrt(E) * w[j]);
  SurfacePoint p;
  p.E = E;
  p.omega = w;
  p.xi = std::move(xi);
  p.grad_norm = square_grad_ph(h, p.xi).norm();
  return p;
}

// --- continuum Helmholtz kernel with corrected quadrature weights ---------------
//
// Samples of (i/4) H0^(1)(k |y|) on a step-a grid, usable as trapezoid weights
// a^2 sum c(n - m) f(m) for convolution against smooth data. Near the origin
// the log singularity is replaced by exact cell averages: with
// G = -(1/2pi) ln|y| + S and S smooth, the cell average of the log part is
// -(1/2pi)(ln a + U(n)) where U(n) is the unit-cell average of ln|.| around
// the integer offset n. The singularity makes the overall scheme second
// order in a, with a small constant: the local Euler-Maclaurin term of the
// tail vanishes because ln|y| is harmonic away from the origin, and only the
// algebraic spectral tail of the log survives.
class ContinuumKernel2D {
 public:
  ContinuumKernel2D(cdouble z, double step) : a_(step) {
    if (step <= 0.0) throw ConfigError("continuum kernel needs a positive step");
    if (z == cdouble{0.0, 0.0}) throw ConfigError("continuum kernel needs z != 0");
    k_ = std::sqrt(z);
    if (k_.imag() < 0.0) k_ = -k_;  // outgoing branch
    const double egamma = std::numbers::egamma_v<double>;
    const cdouble s0 = 0.25 * iu - (std::log(k_ / 2.0) + egamma) / (2.0 * pi);
    for (int n1 = -2; n1 <= 2; ++n1)
      for (int n2 = -2; n2 <= 2; ++n2) {
        const std::size_t idx = static_cast<std::size_t>(n1 + 2) * 5 + (n2 + 2);
        if (n1 == 0 && n2 == 0) {
          patch_[idx] = -(std::log(a_) + cell_log_average(0, 0)) / (2.0 * pi) + s0;
        } else {
          const double r = std::hypot(n1, n2);
          patch_[idx] = helmholtz_green2d(k_, a_ * r) +
                        (std::log(r) - cell_log_average(n1, n2)) / (2.0 * pi);
        }
      }
  }

  cdouble at(int n1, int n2) const {
    if (std::abs(n1) <= 2 && std::abs(n2) <= 2)
      return patch_[static_cast<std::size_t>(n1 + 2) * 5 + (n2 + 2)];
    return helmholtz_green2d(k_, a_ * std::hypot(n1, n2));
  }

  cdouble wavenumber() const { return k_; }
  double step() const { return a_; }

  // Average of ln|y| over the unit cell centered at the integer offset n.
  static double cell_log_average(int n1, int n2) {
    if (n1 == 0 && n2 == 0) return 0.5 * (0.5 * pi - std::numbers::ln2_v<double> - 3.0);
    if (std::abs(n1) > 2 || std::abs(n2) > 2) throw Error("cell average cached for |n| <= 2 only");
    static const std::array<double, 25> cache = [] {
      std::array<double, 25> c{};
      const int m = 256;
      for (int a = -2; a <= 2; ++a)
        for (int b = -2; b <= 2; ++b) {
          if (a == 0 && b == 0) continue;
          KahanSum s;
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
              const double x = a + (i + 0.5) / m - 0.5;
              const double y = b + (j + 0.5) / m - 0.5;
              s.add(0.5 * std::log(x * x + y * y));
            }
          c[static_cast<std::size_t>(a + 2) * 5 + (b + 2)] = s.value() / (m * m);
        }
      return c;
    }();
    return cache[static_cast<std::size_t>(n1 + 2) * 5 + (n2 + 2)];
  }

 private:
  cdouble k_;
  double a_;
  std::array<cdouble, 25> patch_;
};

// Continuum Lippmann-Schwinger solve u = G f - G (V u) by Neumann iteration on
// the support box of V; needs the iteration to contract (weak potential).
struct ContinuumFieldResult {
  GridFunction u;
  int iterations = 0;
  double contraction = 0.0;
  double residual = 0.0;
};

inline ContinuumFieldResult continuum_potential_field(cdouble z, double step, const PotentialSpec& V,
                                                      const GridFunction& f, int out_halfwidth) {
  if (f.box.dim != 2 || f.channels != 1) throw ConfigError("continuum solves are scalar and 2-D");
  if (f.h != step) throw ConfigError("data must be sampled on the quadrature grid");
  ContinuumKernel2D kernel(z, step);
  const auto ker = [&](int a, int b) { return kernel.at(a, b); };
  const cdouble a2{step * step, 0.0};

  GridFunction g_out = convolve_kernel(ker, f, out_halfwidth);
  g_out *= a2;
  if (V.zero()) return {std::move(g_out), 0, 0.0, 0.0};

  const int vhalf = static_cast<int>(std::ceil(V.support_radius / step));
  const Box vbox{2, vhalf};
  std::vector<double> v(vbox.total());
  for_each_index(vbox, [&](std::size_t idx, const std::vector<int>& n) {
    VectorXd x(2);
    x[0] = step * n[0];
    x[1] = step * n[1];
    v[idx] = V(x);
  });

  GridFunction g_v = convolve_kernel(ker, f, vhalf);
  g_v *= a2;
  GridFunction u = g_v;
  ContinuumFieldResult res;
  double prev_delta = -1.0;
  for (int it = 1; it <= 300; ++it) {
    GridFunction w = GridFunction::zeros(step, vbox, 1);
    for (std::size_t i = 0; i < vbox.total(); ++i) w.values[0][i] = v[i] * u.values[0][i];
    GridFunction gw = convolve_kernel(ker, w, vhalf);
    gw *= a2;
    GridFunction next = g_v;
    next -= gw;
    GridFunction d = next;
    d -= u;
    const double delta = norm_l2(d);
    const double scale = norm_l2(next);
    res.iterations = it;
    if (prev_delta > 0.0) res.contraction = delta / prev_delta;
    prev_delta = delta;
    u = std::move(next);
    if (delta <= 1e-13 * std::max(scale, 1e-300)) break;
    if (it >= 20 && res.contraction > 0.9)
      throw NearSingularError("continuum iteration is not contracting; potential too strong",
                              res.contraction);
    if (it == 300)
      throw NearSingularError("continuum iteration failed to converge", res.contraction);
  }
  {
    GridFunction w = GridFunction::zeros(step, vbox, 1);
    for (std::size_t i = 0; i < vbox.total(); ++i) w.values[0][i] = v[i] * u.values[0][i];
    GridFunction gw = convolve_kernel(ker, w, vhalf);
    gw *= a2;
    GridFunction resid = u;
    resid += gw;
    resid -= g_v;
    res.residual = norm_l2(resid) / std::max(norm_l2(g_v), 1e-300);

    GridFunction corr = convolve_kernel(ker, w, out_halfwidth);
    corr *= a2;
    g_out -= corr;
  }
  res.u = std::move(g_out);
  return res;
}

}  // namespace latcont
