#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <latcont/helmholtz.hpp>

// Finite-scale checks of the inequalities behind the limiting-absorption
// machinery: dyadic sequence bounds, the Riemann-sum error law, slab
// estimates against the Besov norms, difference-operator commutators with
// polynomial weights, and the a priori resolvent inequality.

namespace latcont {

// alpha = sup b_n / 2^n, beta = sup 2^{-n} (b_0 + ... + b_n); the dyadic
// summation lemma asserts alpha <= beta <= 3 alpha.
struct AlphaBetaResult {
  double alpha = 0.0;
  double beta = 0.0;
  bool holds = false;
};

inline AlphaBetaResult alpha_beta_check(const std::vector<double>& b) {
  if (b.empty()) throw ConfigError("sequence check needs at least one term");
  AlphaBetaResult r;
  double partial = 0.0;
  double pow2 = 1.0;
  for (double v : b) {
    if (v < 0.0) throw ConfigError("sequence check needs nonnegative terms");
    partial += v;
    r.alpha = std::max(r.alpha, v / pow2);
    r.beta = std::max(r.beta, partial / pow2);
    pow2 *= 2.0;
  }
  const double slack = 1e-12 * (1.0 + r.alpha);
  r.holds = r.alpha <= r.beta + slack && r.beta <= 3.0 * r.alpha + slack;
  return r;
}

// A = dyadic-radius sup of (h^d / 2^j) sum_{|hn| <= 2^j} |u|^2, B = the same
// sup over all radii R > 1; the equivalence lemma asserts A <= B <= 2A.
struct DyadicSupResult {
  double dyadic = 0.0;      // A
  double continuous = 0.0;  // B
  bool holds = false;
};

inline DyadicSupResult dyadic_sup_check(const GridFunction& g) {
  const double rmax = g.h * g.box.halfwidth * std::sqrt(static_cast<double>(g.box.dim));
  const int jmax = std::max(0, static_cast<int>(std::ceil(std::log2(std::max(rmax, 2.0)))));
  const double hd = std::pow(g.h, g.box.dim);
  std::vector<KahanSum> balls(static_cast<std::size_t>(jmax) + 1);
  for_each_index(g.box, [&](std::size_t idx, const std::vector<int>& n) {
    double r2 = 0.0;
    for (int j = 0; j < g.box.dim; ++j) r2 += sq(g.h * n[j]);
    const double r = std::sqrt(r2);
    double a = 0.0;
    for (int c = 0; c < g.channels; ++c) a += std::norm(g.values[c][idx]);
    const int first = r <= 1.0 ? 0 : static_cast<int>(std::ceil(std::log2(r)));
    for (int j = first; j <= jmax; ++j) balls[static_cast<std::size_t>(j)].add(a);
  });
  DyadicSupResult r;
  for (int j = 0; j <= jmax; ++j)
    r.dyadic = std::max(r.dyadic, hd * balls[static_cast<std::size_t>(j)].value() /
                                      std::pow(2.0, j));
  const double bs = norm_besov_star(g);
  r.continuous = bs * bs;
  const double slack = 1e-12 * (1.0 + r.dyadic);
  r.holds = r.dyadic <= r.continuous + slack && r.continuous <= 2.0 * r.dyadic + slack;
  return r;
}

// |h^d sum f(hn) - int f dx| against the C h law, with the reference integral
// from a midpoint rule refined well past the smallest lattice spacing.
struct RiemannSumResult {
  std::vector<double> h_values;
  std::vector<double> lattice_sums;
  double reference = 0.0;
  std::vector<double> errors;
  double fitted_order = 0.0;
  double c_fitted = 0.0;  // errors[0] / h[0]
  bool within_linear_law = false;
};

inline RiemannSumResult riemann_sum_check(const std::function<double(const VectorXd&)>& f,
                                          int dim, double radius,
                                          const std::vector<double>& h_values) {
  if (dim < 1 || dim > 2) throw ConfigError("riemann sum check supports dimensions 1 and 2");
  if (h_values.size() < 2) throw ConfigError("riemann sum check needs at least two mesh sizes");
  for (std::size_t i = 0; i + 1 < h_values.size(); ++i)
    if (!(h_values[i] > h_values[i + 1]) || !(h_values[i + 1] > 0.0))
      throw ConfigError("mesh sizes must be positive and strictly decreasing");

  RiemannSumResult r;
  r.h_values = h_values;
  VectorXd x(dim);
  for (double h : h_values) {
    const int half = static_cast<int>(std::ceil(radius / h));
    KahanSum acc;
    if (dim == 1) {
      for (int n = -half; n <= half; ++n) {
        x[0] = h * n;
        acc.add(f(x));
      }
    } else {
      for (int n1 = -half; n1 <= half; ++n1)
        for (int n2 = -half; n2 <= half; ++n2) {
          x << h * n1, h * n2;
          acc.add(f(x));
        }
    }
    r.lattice_sums.push_back(std::pow(h, dim) * acc.value());
  }

  const double step = h_values.back() / 8.0;
  const int cells = static_cast<int>(std::ceil(2.0 * radius / step));
  const double cell = 2.0 * radius / cells;
  KahanSum ref;
  if (dim == 1) {
    for (int i = 0; i < cells; ++i) {
      x[0] = -radius + cell * (i + 0.5);
      ref.add(f(x));
    }
  } else {
    for (int i = 0; i < cells; ++i)
      for (int j = 0; j < cells; ++j) {
        x << -radius + cell * (i + 0.5), -radius + cell * (j + 0.5);
        ref.add(f(x));
      }
  }
  r.reference = std::pow(cell, dim) * ref.value();

  for (double s : r.lattice_sums) r.errors.push_back(std::abs(s - r.reference));
  r.fitted_order = fit_order(r.h_values, r.errors);
  r.c_fitted = r.errors.front() / r.h_values.front();
  r.within_linear_law = true;
  for (std::size_t i = 0; i < r.errors.size(); ++i)
    if (r.errors[i] > 1.05 * r.c_fitted * r.h_values[i]) r.within_linear_law = false;
  return r;
}

// Discretizations of the slab estimates: the x1-integrated cross-section
// norm against sqrt(2) ||f||_B, and ||f||_{B*} against sqrt(2) times the
// cross-section sup. Slack covers the half-cell overshoot of the slab count.
struct SlabCheckResult {
  double integrated = 0.0;
  double besov = 0.0;
  double besov_star = 0.0;
  double profile_sup = 0.0;
  bool integral_holds = false;
  bool sup_holds = false;
};

inline SlabCheckResult slab_inequality_check(const GridFunction& g) {
  const std::vector<double> profile = slab_profile(g);
  SlabCheckResult r;
  KahanSum acc;
  for (double p : profile) {
    acc.add(p);
    r.profile_sup = std::max(r.profile_sup, p);
  }
  r.integrated = g.h * acc.value();
  r.besov = norm_besov(g);
  r.besov_star = norm_besov_star(g);
  const double slack = 1.0 + g.h / 2.0;
  r.integral_holds = r.integrated <= std::sqrt(2.0) * r.besov * slack;
  r.sup_holds = r.besov_star <= std::sqrt(2.0) * r.profile_sup * slack;
  return r;
}

// max over axes of (||[D_j, w]u|| + ||[D_j^*, w]u||) / ||<x>^{-(s+1)} u||
// for the weight w = <x>^{-s}; the commutator lemma bounds it by a constant
// depending only on s.
struct CommutatorCheckResult {
  double ratio = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
};

inline CommutatorCheckResult commutator_check(const GridFunction& u, double s) {
  if (s < 0.0) throw ConfigError("commutator check needs s >= 0");
  const double h = u.h;
  auto weight = [&](const std::vector<int>& n, int shift_axis, int shift) {
    double r2 = 0.0;
    for (int j = 0; j < u.box.dim; ++j) {
      const double c = h * (n[j] + (j == shift_axis ? shift : 0));
      r2 += c * c;
    }
    return std::pow(1.0 + r2, -s / 2.0);
  };
  auto read = [&](const std::vector<int>& n, int axis, int shift) -> cdouble {
    std::vector<int> m = n;
    m[static_cast<std::size_t>(axis)] += shift;
    if (std::abs(m[static_cast<std::size_t>(axis)]) > u.box.halfwidth) return {};
    cdouble acc{};
    for (int c = 0; c < u.channels; ++c) acc += u.values[c][u.box.flatten(m)];
    return acc;  // channels stacked; the bound is per-component anyway
  };

  CommutatorCheckResult out;
  const double denom = norm_weighted_l2(u, -(s + 1.0));
  out.denominator = denom;
  if (denom == 0.0) return out;
  for (int axis = 0; axis < u.box.dim; ++axis) {
    KahanSum fwd, bwd;
    for_each_index(u.box, [&](std::size_t, const std::vector<int>& n) {
      const double w0 = weight(n, axis, 0);
      const cdouble um = read(n, axis, -1);
      const cdouble up = read(n, axis, +1);
      fwd.add(std::norm((w0 - weight(n, axis, -1)) / h * um));
      bwd.add(std::norm((w0 - weight(n, axis, +1)) / h * up));
    });
    const double hd = std::pow(h, u.box.dim);
    const double num = std::sqrt(hd * fwd.value()) + std::sqrt(hd * bwd.value());
    out.numerator = std::max(out.numerator, num);
  }
  out.ratio = out.numerator / denom;
  return out;
}

// a priori inequality for (-Delta_disc - z) u = f on the square lattice:
// ||<x>^{-s} u||_{H^2} <= C (||f||_{L^{2,-s}} + ||u||_{L^{2,-s}}). The data
// is re-derived from the solved field so the pair satisfies the equation
// exactly and the spectral cut plays no role.
struct AprioriCheckResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

inline AprioriCheckResult apriori_inequality_check(double h, cdouble z, const GridFunction& f,
                                                   double s) {
  if (f.channels != 1) throw ConfigError("a priori check runs on scalar square-lattice data");
  if (f.h != h) throw ConfigError("a priori check: data lives on a different mesh");
  const ScalingRegime reg = make_regime("square", f.box.dim);
  const GridFunction u = free_resolvent_apply(reg, EnergyQuery::complex_energy(z), f).u;
  GridFunction feff = apply_scaled_operator(reg, u);
  GridFunction shift = u;
  shift *= z;
  feff -= shift;

  AprioriCheckResult r;
  r.lhs = norm_sobolev_hms(u, 2, -s);
  r.rhs = norm_weighted_l2(feff, -s) + norm_weighted_l2(u, -s);
  r.ratio = r.rhs == 0.0 ? 0.0 : r.lhs / r.rhs;
  return r;
}

}  // namespace latcont
