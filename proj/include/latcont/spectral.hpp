#pragma once

#include "latcont/lattice.hpp"

namespace latcont {

enum class RegimeKind { GlobalMinimum, Conical };

// One entry of the small-h scaling catalog: which band cluster of which model
// is blown up around which momentum, at which rate, and how far the expansion
// can be trusted in energy.
struct ScalingRegime {
  std::string id;
  LatticeModel model;
  RegimeKind kind = RegimeKind::GlobalMinimum;
  double reference_energy = 0.0;
  int nu = 2;
  VectorXd d1;               // conjugation momentum; zero for minimum regimes
  std::vector<int> bands;    // sorted band indices entering the limit
  double window = 0.0;       // energy distance to the nearest foreign feature
  double cutoff_radius = 0.0;  // momentum cutoff in eta units; 0 means none
  int valley = +1;

  int dim() const { return model.dim; }
  int band_count() const { return static_cast<int>(bands.size()); }
};

inline std::vector<std::string> regime_catalog() {
  return {"square",          "triangular",      "ladder",
          "hexagonal-bottom", "hexagonal-dirac", "kagome-bottom",
          "kagome-dirac",    "subdivision-bottom", "subdivision-dirac"};
}

inline ScalingRegime make_regime(const std::string& id, int dim = 2, int valley = +1) {
  if (valley != +1 && valley != -1) throw ConfigError("valley must be +1 or -1");
  ScalingRegime r;
  r.id = id;
  r.valley = valley;
  auto K = [&](int s) {
    VectorXd v(2);
    v << s * 2 * pi / 3, -s * 2 * pi / 3;
    return v;
  };
  if (id == "square") {
    r.model = build_lattice(LatticeName::Square, dim);
    r.reference_energy = -2.0 * dim;
    r.d1 = VectorXd::Zero(dim);
    r.bands = {0};
    r.window = 4.0;
  } else if (id == "triangular") {
    r.model = build_lattice(LatticeName::Triangular, 2);
    r.reference_energy = -1.0;
    r.d1 = VectorXd::Zero(2);
    r.bands = {0};
    r.window = 4.0 / 3.0;
  } else if (id == "ladder") {
    r.model = build_lattice(LatticeName::LadderSquare, dim);
    r.reference_energy = -1.0;
    r.d1 = VectorXd::Zero(dim);
    r.bands = {0};
    r.window = 4.0 / (2.0 * dim + 1.0);
  } else if (id == "hexagonal-bottom") {
    r.model = build_lattice(LatticeName::Hexagonal, 2);
    r.reference_energy = -1.0;
    r.d1 = VectorXd::Zero(2);
    r.bands = {0};
    r.window = 2.0 / 3.0;
  } else if (id == "hexagonal-dirac") {
    r.model = build_lattice(LatticeName::Hexagonal, 2);
    r.kind = RegimeKind::Conical;
    r.reference_energy = 0.0;
    r.nu = 1;
    r.d1 = K(valley);
    r.bands = {0, 1};
    r.window = 1.0 / 3.0;
    r.cutoff_radius = pi / 3.0;
  } else if (id == "kagome-bottom") {
    r.model = build_lattice(LatticeName::Kagome, 2);
    r.reference_energy = -1.0;
    r.d1 = VectorXd::Zero(2);
    r.bands = {0};
    r.window = 0.5;
  } else if (id == "kagome-dirac") {
    r.model = build_lattice(LatticeName::Kagome, 2);
    r.kind = RegimeKind::Conical;
    r.reference_energy = -0.25;
    r.nu = 1;
    r.d1 = K(valley);
    r.bands = {0, 1};
    r.window = 0.25;
    r.cutoff_radius = pi / 3.0;
  } else if (id == "subdivision-bottom") {
    r.model = build_lattice(LatticeName::SubdivisionSquare, dim);
    r.reference_energy = -1.0;
    r.d1 = VectorXd::Zero(dim);
    r.bands = {0};
    r.window = 1.0 - std::sqrt(1.0 - 1.0 / dim);
  } else if (id == "subdivision-dirac") {
    r.model = build_lattice(LatticeName::SubdivisionSquare, dim);
    r.kind = RegimeKind::Conical;
    r.reference_energy = 0.0;
    r.nu = 1;
    r.d1 = VectorXd::Constant(dim, pi);
    r.bands = {0, dim};
    r.window = 0.3;
    r.cutoff_radius = pi / 3.0;
  } else {
    throw ConfigError("unknown regime: " + id);
  }
  return r;
}

// h^{-nu} (L(d1 + h xi) - E0), the full matrix symbol in blown-up momentum.
inline MatrixXcd scaled_symbol(const ScalingRegime& r, double h, const VectorXd& xi) {
  const VectorXd eta = r.d1 + h * xi;
  MatrixXcd L = r.model.symbol.eval(eta);
  L -= r.reference_energy * MatrixXcd::Identity(L.rows(), L.cols());
  return std::pow(h, -r.nu) * L;
}

// Scaled dispersion branches (selected bands only), ascending.
inline VectorXd scaled_roots(const ScalingRegime& r, double h, const VectorXd& xi) {
  const VectorXd all = characteristic_roots(r.model, r.d1 + h * xi);
  VectorXd out(r.band_count());
  const double scale = std::pow(h, -r.nu);
  for (int i = 0; i < r.band_count(); ++i)
    out[i] = scale * (all[r.bands[i]] - r.reference_energy);
  return out;
}

// xi1^2 - xi1 xi2 + xi2^2, the quadratic form shared by the six-fold models.
inline double hexform(const VectorXd& xi) {
  return sq(xi[0]) - xi[0] * xi[1] + sq(xi[1]);
}

// Continuum dispersion branch values in the same band order as scaled_roots.
inline VectorXd limit_branches(const ScalingRegime& r, const VectorXd& xi) {
  VectorXd out(r.band_count());
  if (r.id == "square") {
    out[0] = xi.squaredNorm();
  } else if (r.id == "triangular") {
    out[0] = hexform(xi) / 3.0;
  } else if (r.id == "ladder") {
    out[0] = xi.squaredNorm() / (2.0 * r.dim() + 1.0);
  } else if (r.id == "hexagonal-bottom") {
    out[0] = hexform(xi) / 9.0;
  } else if (r.id == "hexagonal-dirac") {
    const double c = std::sqrt(hexform(xi)) / 3.0;
    out[0] = -c;
    out[1] = c;
  } else if (r.id == "kagome-bottom") {
    out[0] = hexform(xi) / 12.0;
  } else if (r.id == "kagome-dirac") {
    const double c = std::sqrt(hexform(xi)) / 4.0;
    out[0] = -c;
    out[1] = c;
  } else if (r.id == "subdivision-bottom") {
    out[0] = xi.squaredNorm() / (8.0 * r.dim());
  } else if (r.id == "subdivision-dirac") {
    const double c = xi.norm() / (2.0 * std::sqrt(double(r.dim())));
    out[0] = -c;
    out[1] = c;
  } else {
    throw ConfigError("unknown regime: " + r.id);
  }
  return out;
}

// Scalar limit symbol for minimum regimes.
inline double limit_symbol(const ScalingRegime& r, const VectorXd& xi) {
  if (r.kind != RegimeKind::GlobalMinimum)
    throw ConfigError("scalar limit symbol defined for minimum regimes only");
  return limit_branches(r, xi)[0];
}

// 2x2 massless generator of the hexagonal conical limit; the valley enters
// through the sign of the first Pauli component.
inline MatrixXcd dirac_matrix(const ScalingRegime& r, const VectorXd& xi) {
  if (r.id != "hexagonal-dirac")
    throw ConfigError("matrix limit is available for the hexagonal conical regime");
  const double z1 = std::sqrt(3.0) / 6.0 * (xi[0] - xi[1]);
  const double z2 = -(xi[0] + xi[1]) / 6.0;
  const double a = r.valley * z1;
  MatrixXcd D(2, 2);
  D << 0.0, cdouble(a, -z2), cdouble(a, z2), 0.0;
  return D;
}

// ---- spectral projections ----------------------------------------------

// Orthogonal projection onto the selected eigenbranches, by diagonalization.
inline MatrixXcd band_projection(const TrigPolyMatrix& symbol, const VectorXd& eta,
                                 const std::vector<int>& bands) {
  EigenSystem es = eigen_system(symbol.eval(eta));
  MatrixXcd P = MatrixXcd::Zero(symbol.size, symbol.size);
  for (int b : bands) {
    if (b < 0 || b >= symbol.size) throw ConfigError("band index out of range");
    P += es.vectors.col(b) * es.vectors.col(b).adjoint();
  }
  return P;
}

// Same projection by a resolvent contour integral around each cluster of
// selected roots. The circle radius balances the convergence factors of the
// enclosed and excluded roots, and the trapezoid count adapts so the
// quadrature tail stays below ~1e-13. Fails loudly when the margin is too
// thin for that to be feasible.
inline MatrixXcd riesz_projection(const TrigPolyMatrix& symbol, const VectorXd& eta,
                                  const std::vector<int>& bands,
                                  double gap_floor = 1e-6, int node_cap = 200000) {
  EigenSystem es = eigen_system(symbol.eval(eta));
  const int s = symbol.size;
  std::vector<int> sel(bands);
  std::sort(sel.begin(), sel.end());
  const MatrixXcd L = symbol.eval(eta);
  const MatrixXcd I = MatrixXcd::Identity(s, s);
  MatrixXcd P = MatrixXcd::Zero(s, s);

  // group selected indices into runs of consecutive band numbers
  std::size_t i = 0;
  while (i < sel.size()) {
    std::size_t j = i;
    while (j + 1 < sel.size() && sel[j + 1] == sel[j] + 1) ++j;
    if (j - i + 1 == static_cast<std::size_t>(s)) {
      P += I;  // every root enclosed
      i = j + 1;
      continue;
    }
    const double lo = es.values[sel[i]];
    const double hi = es.values[sel[j]];
    double gap = std::numeric_limits<double>::infinity();
    for (int b = 0; b < s; ++b) {
      bool inside = false;
      for (std::size_t q = i; q <= j; ++q) inside = inside || sel[q] == b;
      if (inside) continue;
      gap = std::min(gap,
                     std::min(std::abs(es.values[b] - lo), std::abs(es.values[b] - hi)));
    }
    if (gap < gap_floor) throw GapError("cluster not separated", gap);
    const double half = 0.5 * (hi - lo);
    const double radius = half > 0 ? std::sqrt(half * (half + gap)) : 0.5 * gap;
    const double q_in = half > 0 ? half / radius : 0.0;
    const double q_out = radius / (half + gap);
    const double q = std::max(q_in, q_out);
    int nodes = 64;
    if (q > 0) {
      const double need = std::log(1e-13) / std::log(q);
      if (need > node_cap) throw GapError("cluster margin too thin", gap);
      nodes = std::max(64, static_cast<int>(std::ceil(need)));
    }
    const double center = 0.5 * (lo + hi);
    for (int n = 0; n < nodes; ++n) {
      const double th = 2.0 * pi * (n + 0.5) / nodes;
      const cdouble w = center + radius * std::exp(iu * th);
      P += (radius * std::exp(iu * th) / double(nodes)) *
           (w * I - L).partialPivLu().solve(I);
    }
    i = j + 1;
  }
  return P;
}

// ---- finite differences and critical points -----------------------------

// Central difference gradient with one Richardson pass.
inline VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f,
                            const VectorXd& eta, double step = 1e-3) {
  const int d = static_cast<int>(eta.size());
  auto grad = [&](double s) {
    VectorXd g(d);
    for (int j = 0; j < d; ++j) {
      VectorXd p = eta, m = eta;
      p[j] += s;
      m[j] -= s;
      g[j] = (f(p) - f(m)) / (2 * s);
    }
    return g;
  };
  VectorXd g1 = grad(step), g2 = grad(step / 2);
  return (4.0 * g2 - g1) / 3.0;
}

// Central difference Hessian with one Richardson pass.
inline MatrixXd fd_hessian(const std::function<double(const VectorXd&)>& f,
                           const VectorXd& eta, double step = 1e-3) {
  const int d = static_cast<int>(eta.size());
  auto hess = [&](double s) {
    MatrixXd H(d, d);
    const double f0 = f(eta);
    for (int a = 0; a < d; ++a) {
      VectorXd p = eta, m = eta;
      p[a] += s;
      m[a] -= s;
      H(a, a) = (f(p) - 2 * f0 + f(m)) / (s * s);
      for (int b = a + 1; b < d; ++b) {
        VectorXd pp = eta, pm = eta, mp = eta, mm = eta;
        pp[a] += s; pp[b] += s;
        pm[a] += s; pm[b] -= s;
        mp[a] -= s; mp[b] += s;
        mm[a] -= s; mm[b] -= s;
        H(a, b) = H(b, a) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * s * s);
      }
    }
    return H;
  };
  MatrixXd H1 = hess(step), H2 = hess(step / 2);
  return (4.0 * H2 - H1) / 3.0;
}

enum class CriticalKind { Minimum, Maximum, Saddle, ConicalTouch, FlatBand };

inline std::string to_string(CriticalKind k) {
  switch (k) {
    case CriticalKind::Minimum: return "minimum";
    case CriticalKind::Maximum: return "maximum";
    case CriticalKind::Saddle: return "saddle";
    case CriticalKind::ConicalTouch: return "conical";
    case CriticalKind::FlatBand: return "flat";
  }
  return "?";
}

struct CriticalPoint {
  VectorXd eta;
  int band = 0;
  double value = 0.0;
  CriticalKind kind = CriticalKind::Minimum;
  MatrixXd hessian;        // empty for conical touches and flat bands
  double gradient_norm = 0.0;
  double band_gap = 0.0;   // distance to the nearest other branch at eta
};

namespace detail {

inline double wrap_angle(double t) {
  t = std::fmod(t + pi, 2 * pi);
  if (t < 0) t += 2 * pi;
  return t - pi;
}

inline VectorXd wrap_eta(VectorXd eta) {
  for (int j = 0; j < eta.size(); ++j) eta[j] = wrap_angle(eta[j]);
  return eta;
}

inline bool same_point(const VectorXd& a, const VectorXd& b, double tol) {
  for (int j = 0; j < a.size(); ++j)
    if (std::abs(wrap_angle(a[j] - b[j])) > tol) return false;
  return true;
}

// Newton iteration for a stationary point of a smooth function.
inline bool newton_stationary(const std::function<double(const VectorXd&)>& f,
                              VectorXd& eta, double& grad_norm) {
  for (int it = 0; it < 60; ++it) {
    VectorXd g = fd_gradient(f, eta);
    grad_norm = g.norm();
    if (grad_norm < 1e-11) return true;
    MatrixXd H = fd_hessian(f, eta);
    Eigen::FullPivLU<MatrixXd> lu(H);
    if (!lu.isInvertible()) return false;
    VectorXd delta = lu.solve(-g);
    const double cap = 0.3;
    if (delta.norm() > cap) delta *= cap / delta.norm();
    eta += delta;
  }
  VectorXd g = fd_gradient(f, eta);
  grad_norm = g.norm();
  return grad_norm < 1e-9;
}

}  // namespace detail

// Locate and classify stationary points of one dispersion branch, plus the
// points where it touches a neighbor. Grid scan filtered by gradient size,
// then Newton polish. Touches are probed for linear (conical) growth of the
// branch gap; tangential touches fall through to the smooth classifier.
inline std::vector<CriticalPoint> find_extrema(const LatticeModel& model, int band,
                                               int grid = 48) {
  if (band < 0 || band >= model.sublattices) throw ConfigError("band out of range");
  const int d = model.dim;
  if (grid % 6 != 0) grid += 6 - grid % 6;  // keep the six-fold momenta on the scan

  auto f = [&model, band](const VectorXd& eta) {
    return characteristic_roots(model, eta)[band];
  };
  auto gap_info = [&](const VectorXd& eta, int& other) {
    VectorXd r = characteristic_roots(model, eta);
    double g = std::numeric_limits<double>::infinity();
    other = -1;
    for (int b = 0; b < model.sublattices; ++b) {
      if (b == band) continue;
      const double gb = std::abs(r[b] - r[band]);
      if (gb < g) {
        g = gb;
        other = b;
      }
    }
    return g;
  };

  std::vector<CriticalPoint> out;

  // enumerate scan nodes
  std::size_t total = 1;
  for (int j = 0; j < d; ++j) total *= grid;
  const double step = 2 * pi / grid;
  std::vector<VectorXd> nodes(total);
  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    VectorXd eta(d);
    for (int j = d - 1; j >= 0; --j) {
      eta[j] = -pi + step * double(rem % grid);
      rem /= grid;
    }
    nodes[flat] = eta;
    const double v = f(eta);
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }

  if (vmax - vmin < 1e-12) {
    CriticalPoint cp;
    cp.eta = VectorXd::Zero(d);
    cp.band = band;
    cp.value = f(cp.eta);
    cp.kind = CriticalKind::FlatBand;
    int other;
    cp.band_gap = gap_info(cp.eta, other);
    out.push_back(cp);
    return out;
  }

  auto push_unique = [&](const CriticalPoint& cp) {
    for (const auto& have : out)
      if (detail::same_point(have.eta, cp.eta, 1e-5) && have.kind == cp.kind) return;
    out.push_back(cp);
  };

  // measures how the branch gap grows away from a touch point: ~2 for a cone,
  // ~4 for a tangency
  auto gap_growth_ratio = [&](const VectorXd& e, int other) {
    auto gap_at = [&](const VectorXd& p) {
      VectorXd r = characteristic_roots(model, p);
      return std::abs(r[other] - r[band]);
    };
    double g1 = 0, g2 = 0;
    for (int j = 0; j < d; ++j)
      for (int sgn : {-1, 1}) {
        VectorXd p = e;
        p[j] += sgn * 5e-4;
        g1 = std::max(g1, gap_at(p));
        p[j] += sgn * 5e-4;
        g2 = std::max(g2, gap_at(p));
      }
    return g1 > 0 ? g2 / g1 : 4.0;
  };

  // pass 1: touch points of the branch with its nearest neighbor
  for (std::size_t flat = 0; flat < total; ++flat) {
    int other;
    if (gap_info(nodes[flat], other) > 0.35 || other < 0) continue;
    auto gap2 = [&](const VectorXd& e) {
      VectorXd r = characteristic_roots(model, e);
      return sq(r[other] - r[band]);
    };
    VectorXd e = nodes[flat];
    double gn = 0;
    if (!detail::newton_stationary(gap2, e, gn)) continue;
    if (gap2(e) > 1e-18) continue;  // avoided crossing, not a touch
    if (gap_growth_ratio(e, other) > 3.0) continue;  // tangency: handled below
    CriticalPoint cp;
    cp.eta = detail::wrap_eta(e);
    cp.band = band;
    cp.value = characteristic_roots(model, cp.eta)[band];
    cp.kind = CriticalKind::ConicalTouch;
    cp.gradient_norm = std::sqrt(gap2(cp.eta));
    cp.band_gap = 0.0;
    push_unique(cp);
  }

  auto near_cone = [&](const VectorXd& eta) {
    for (const auto& cp : out)
      if (cp.kind == CriticalKind::ConicalTouch && detail::same_point(cp.eta, eta, 1e-4))
        return true;
    return false;
  };

  // pass 2: smooth stationary points, started wherever the gradient is small
  const double start_threshold = 2.0 * step;
  for (std::size_t flat = 0; flat < total; ++flat) {
    if (near_cone(nodes[flat])) continue;
    if (fd_gradient(f, nodes[flat]).norm() > start_threshold) continue;
    VectorXd e = nodes[flat];
    double gn = 0;
    if (!detail::newton_stationary(f, e, gn)) continue;
    e = detail::wrap_eta(e);
    if (near_cone(e)) continue;
    int other;
    const double gap = gap_info(e, other);
    if (gap < 1e-8 && gap_growth_ratio(e, other) < 3.0) continue;  // cone tip
    CriticalPoint cp;
    cp.eta = e;
    cp.band = band;
    cp.value = f(e);
    cp.gradient_norm = gn;
    cp.band_gap = gap;
    cp.hessian = fd_hessian(f, e);
    Eigen::SelfAdjointEigenSolver<MatrixXd> hs(cp.hessian);
    const double floor = 1e-6;
    int pos = 0, neg = 0;
    for (int j = 0; j < d; ++j) {
      if (hs.eigenvalues()[j] > floor) ++pos;
      if (hs.eigenvalues()[j] < -floor) ++neg;
    }
    if (pos == d)
      cp.kind = CriticalKind::Minimum;
    else if (neg == d)
      cp.kind = CriticalKind::Maximum;
    else
      cp.kind = CriticalKind::Saddle;
    push_unique(cp);
  }

  std::sort(out.begin(), out.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.value != b.value) return a.value < b.value;
    for (int j = 0; j < a.eta.size(); ++j)
      if (a.eta[j] != b.eta[j]) return a.eta[j] < b.eta[j];
    return false;
  });
  return out;
}

// ---- scaling limit measurement ------------------------------------------

struct OrderFit {
  std::vector<double> hs;
  std::vector<double> errors;
  double order = 0.0;
};

// Worst-case distance between scaled branches and their continuum limit over
// a deterministic fan of momenta, for a ladder of h.
inline OrderFit scaling_limit_error(const ScalingRegime& r,
                                    const std::vector<double>& hs,
                                    int directions = 12, int radii = 5,
                                    double xi_max = 1.0) {
  OrderFit fit;
  fit.hs = hs;
  std::vector<VectorXd> xis;
  if (r.dim() == 1) {
    for (int i = 1; i <= radii; ++i) {
      VectorXd xi(1);
      xi[0] = xi_max * i / radii;
      xis.push_back(xi);
      xis.push_back(-xi);
    }
  } else if (r.dim() == 2) {
    for (int a = 0; a < directions; ++a) {
      const double th = 2 * pi * (a + 0.37) / directions;
      for (int i = 1; i <= radii; ++i) {
        VectorXd xi(2);
        xi << std::cos(th), std::sin(th);
        xi *= xi_max * i / radii;
        xis.push_back(xi);
      }
    }
  } else {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> gauss;
    for (int a = 0; a < directions; ++a) {
      VectorXd dir(r.dim());
      for (int j = 0; j < r.dim(); ++j) dir[j] = gauss(rng);
      dir.normalize();
      for (int i = 1; i <= radii; ++i) xis.push_back(xi_max * i / radii * dir);
    }
  }
  for (double h : hs) {
    double worst = 0;
    for (const auto& xi : xis) {
      VectorXd got = scaled_roots(r, h, xi);
      VectorXd want = limit_branches(r, xi);
      worst = std::max(worst, (got - want).cwiseAbs().maxCoeff());
    }
    fit.errors.push_back(worst);
  }
  fit.order = fit_order(fit.hs, fit.errors);
  return fit;
}

// Worst-case deviation of the scaled hexagonal two-band symbol from its
// massless generator over the same momentum fan, for a ladder of h. The
// remainder is the O(h) Taylor tail of the hopping exponentials.
inline OrderFit dirac_limit_check(const ScalingRegime& r, const std::vector<double>& hs,
                                  int directions = 12, int radii = 5, double xi_max = 1.0) {
  if (r.id != "hexagonal-dirac")
    throw ConfigError("the generator comparison is defined for the hexagonal conical regime");
  OrderFit fit;
  fit.hs = hs;
  std::vector<VectorXd> xis;
  for (int a = 0; a < directions; ++a) {
    const double th = 2 * pi * (a + 0.37) / directions;
    for (int i = 1; i <= radii; ++i) {
      VectorXd xi(2);
      xi << std::cos(th), std::sin(th);
      xi *= xi_max * i / radii;
      xis.push_back(xi);
    }
  }
  for (double h : hs) {
    double worst = 0;
    for (const auto& xi : xis)
      worst = std::max(worst, (scaled_symbol(r, h, xi) - dirac_matrix(r, xi)).norm());
    fit.errors.push_back(worst);
  }
  fit.order = fit_order(fit.hs, fit.errors);
  return fit;
}

// ---- constant block transforms ------------------------------------------

// Momentum-independent unitary splitting the doubled models into shifted
// copies of their base symbol.
inline MatrixXcd constant_block_transform(const LatticeModel& m) {
  const double rt = 1.0 / std::sqrt(2.0);
  if (m.name == LatticeName::LadderSquare) {
    MatrixXcd T(2, 2);
    T << rt, -rt, rt, rt;
    return T;
  }
  if (m.name == LatticeName::Graphite) {
    MatrixXcd T = MatrixXcd::Zero(4, 4);
    for (int i = 0; i < 2; ++i) {
      T(i, i) = rt;
      T(i, i + 2) = -rt;
      T(i + 2, i) = rt;
      T(i + 2, i + 2) = rt;
    }
    return T;
  }
  throw ConfigError(std::string("no constant block transform for ") + to_string(m.name));
}

// Largest off-diagonal-block entry of T^* L(eta) T, block size = s/2.
inline double block_offdiagonal_defect(const LatticeModel& m, const VectorXd& eta) {
  const MatrixXcd T = constant_block_transform(m);
  const MatrixXcd B = T.adjoint() * m.symbol.eval(eta) * T;
  const int half = m.sublattices / 2;
  double worst = 0;
  for (int i = 0; i < m.sublattices; ++i)
    for (int j = 0; j < m.sublattices; ++j)
      if ((i < half) != (j < half)) worst = std::max(worst, std::abs(B(i, j)));
  return worst;
}

}  // namespace latcont
