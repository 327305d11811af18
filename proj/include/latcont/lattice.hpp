#pragma once

#include "latcont/trigpoly.hpp"

namespace latcont {

enum class LatticeName {
  Square,
  Triangular,
  LadderSquare,
  Hexagonal,
  Graphite,
  Kagome,
  SubdivisionSquare,
};

inline const char* to_string(LatticeName n) {
  switch (n) {
    case LatticeName::Square: return "square";
    case LatticeName::Triangular: return "triangular";
    case LatticeName::LadderSquare: return "ladder";
    case LatticeName::Hexagonal: return "hexagonal";
    case LatticeName::Graphite: return "graphite";
    case LatticeName::Kagome: return "kagome";
    case LatticeName::SubdivisionSquare: return "subdivision";
  }
  return "?";
}

inline LatticeName lattice_from_string(const std::string& s) {
  for (LatticeName n : {LatticeName::Square, LatticeName::Triangular, LatticeName::LadderSquare,
                        LatticeName::Hexagonal, LatticeName::Graphite, LatticeName::Kagome,
                        LatticeName::SubdivisionSquare})
    if (s == to_string(n)) return n;
  throw ConfigError("unknown lattice: " + s);
}

// Symbol of the (negative) discrete Hamiltonian at mesh 1. The square form is
// the un-normalized -sum_j (S_j + S_j^*); the others carry their vertex-degree
// normalizations.
struct LatticeModel {
  LatticeName name;
  int dim = 2;          // number of momentum variables
  int sublattices = 1;  // channels s
  int degree = 0;       // representative vertex degree
  TrigPolyMatrix symbol;

  std::string id() const { return to_string(name); }
};

namespace detail {

inline std::vector<int> offs(std::initializer_list<int> v) { return std::vector<int>(v); }

inline MatrixXcd entry(int s, int r, int c, cdouble v) {
  MatrixXcd m = MatrixXcd::Zero(s, s);
  m(r, c) = v;
  return m;
}

inline void add_term(TrigPolyMatrix& p, std::vector<int> k, const MatrixXcd& c) {
  for (auto& t : p.terms)
    if (t.offset == k) {
      t.coeff += c;
      return;
    }
  p.terms.push_back({std::move(k), c});
}

// Pair of terms realizing coeff * exp(+i eta_axis) at (r,c) plus the Hermitian
// mirror at (c,r). exp(+i eta.e) = exp(-i eta.(-e)).
inline void add_hopping(TrigPolyMatrix& p, int r, int c, const std::vector<int>& k, cdouble v) {
  add_term(p, k, entry(p.size, r, c, v));
  std::vector<int> mk(k.size());
  for (std::size_t j = 0; j < k.size(); ++j) mk[j] = -k[j];
  add_term(p, mk, entry(p.size, c, r, std::conj(v)));
}

}  // namespace detail

inline LatticeModel build_lattice(LatticeName name, int dim = 2) {
  using detail::add_hopping;
  using detail::add_term;
  using detail::entry;

  LatticeModel m;
  m.name = name;
  m.dim = dim;

  auto ej = [dim](int j, int sign) {
    std::vector<int> k(dim, 0);
    k[j] = sign;
    return k;
  };

  switch (name) {
    case LatticeName::Square: {
      if (dim < 1) throw ConfigError("square lattice needs dim >= 1");
      m.sublattices = 1;
      m.degree = 2 * dim;
      m.symbol.dim = dim;
      m.symbol.size = 1;
      for (int j = 0; j < dim; ++j) {
        add_term(m.symbol, ej(j, +1), entry(1, 0, 0, -1.0));
        add_term(m.symbol, ej(j, -1), entry(1, 0, 0, -1.0));
      }
      break;  // symbol: -2 sum cos(eta_j), minimum -2d at 0
    }
    case LatticeName::Triangular: {
      if (dim != 2) throw ConfigError("triangular lattice is two-dimensional");
      m.sublattices = 1;
      m.degree = 6;
      m.symbol.dim = 2;
      m.symbol.size = 1;
      const cdouble c = -1.0 / 6.0;
      for (auto& k : {detail::offs({1, 0}), detail::offs({-1, 0}), detail::offs({0, 1}),
                      detail::offs({0, -1}), detail::offs({1, -1}), detail::offs({-1, 1})})
        add_term(m.symbol, k, entry(1, 0, 0, c));
      break;  // symbol: -(1/3)(cos eta1 + cos eta2 + cos(eta1-eta2))
    }
    case LatticeName::LadderSquare: {
      if (dim < 1) throw ConfigError("ladder lattice needs dim >= 1");
      m.sublattices = 2;
      m.degree = 2 * dim + 1;
      m.symbol.dim = dim;
      m.symbol.size = 2;
      const double w = -1.0 / (2.0 * dim + 1.0);
      for (int j = 0; j < dim; ++j)
        for (int sgn : {+1, -1}) {
          MatrixXcd diag = MatrixXcd::Zero(2, 2);
          diag(0, 0) = diag(1, 1) = w;
          add_term(m.symbol, ej(j, sgn), diag);
        }
      MatrixXcd rung = MatrixXcd::Zero(2, 2);
      rung(0, 1) = rung(1, 0) = w;
      add_term(m.symbol, std::vector<int>(dim, 0), rung);
      break;
    }
    case LatticeName::Hexagonal: {
      if (dim != 2) throw ConfigError("hexagonal lattice is two-dimensional");
      m.sublattices = 2;
      m.degree = 3;
      m.symbol.dim = 2;
      m.symbol.size = 2;
      const cdouble c = -1.0 / 3.0;
      // (1,2) entry -(1/3)(1 + e^{+i eta1} + e^{+i eta2})
      add_hopping(m.symbol, 0, 1, detail::offs({0, 0}), c);
      add_hopping(m.symbol, 0, 1, detail::offs({-1, 0}), c);
      add_hopping(m.symbol, 0, 1, detail::offs({0, -1}), c);
      break;
    }
    case LatticeName::Graphite: {
      if (dim != 2) throw ConfigError("graphite model uses two momentum variables");
      m.sublattices = 4;
      m.degree = 4;
      m.symbol.dim = 2;
      m.symbol.size = 4;
      const cdouble c = -0.25;
      // In-plane blocks: (1,2) and (3,4) entries -(1/4)(1 + e^{-i eta1} + e^{-i eta2}).
      for (int base : {0, 2}) {
        add_hopping(m.symbol, base, base + 1, detail::offs({0, 0}), c);
        add_hopping(m.symbol, base, base + 1, detail::offs({1, 0}), c);
        add_hopping(m.symbol, base, base + 1, detail::offs({0, 1}), c);
      }
      // Vertical couplings -(1/4) between the two layers.
      add_hopping(m.symbol, 0, 2, detail::offs({0, 0}), c);
      add_hopping(m.symbol, 1, 3, detail::offs({0, 0}), c);
      break;
    }
    case LatticeName::Kagome: {
      if (dim != 2) throw ConfigError("kagome lattice is two-dimensional");
      m.sublattices = 3;
      m.degree = 4;
      m.symbol.dim = 2;
      m.symbol.size = 3;
      const cdouble c = -0.25;
      // (1,2): -(1/4)(1 + e^{i(eta1-eta2)}), (1,3): -(1/4)(1 + e^{i eta1}),
      // (2,3): -(1/4)(1 + e^{i eta2}).
      add_hopping(m.symbol, 0, 1, detail::offs({0, 0}), c);
      add_hopping(m.symbol, 0, 1, detail::offs({-1, 1}), c);
      add_hopping(m.symbol, 0, 2, detail::offs({0, 0}), c);
      add_hopping(m.symbol, 0, 2, detail::offs({-1, 0}), c);
      add_hopping(m.symbol, 1, 2, detail::offs({0, 0}), c);
      add_hopping(m.symbol, 1, 2, detail::offs({0, -1}), c);
      break;
    }
    case LatticeName::SubdivisionSquare: {
      if (dim < 1) throw ConfigError("subdivision lattice needs dim >= 1");
      m.sublattices = dim + 1;
      m.degree = 2 * dim;
      m.symbol.dim = dim;
      m.symbol.size = dim + 1;
      const cdouble c = -1.0 / (2.0 * std::sqrt(static_cast<double>(dim)));
      for (int j = 0; j < dim; ++j) {
        // (1, j+2) entry -(1/(2 sqrt d))(1 + e^{-i eta_j}).
        add_hopping(m.symbol, 0, j + 1, std::vector<int>(dim, 0), c);
        add_hopping(m.symbol, 0, j + 1, ej(j, +1), c);
      }
      break;
    }
  }
  m.sublattices = m.symbol.size;
  return m;
}

inline VectorXd characteristic_roots(const LatticeModel& model, const VectorXd& eta) {
  return characteristic_roots(model.symbol, eta);
}

// Closed-form traces used as sum-rule cross-checks.
inline double closed_form_trace(const LatticeModel& m, const VectorXd& eta) {
  double sum_cos = 0;
  for (int j = 0; j < m.dim; ++j) sum_cos += std::cos(eta[j]);
  switch (m.name) {
    case LatticeName::Square: return -2.0 * sum_cos;
    case LatticeName::Triangular:
      return -(std::cos(eta[0]) + std::cos(eta[1]) + std::cos(eta[0] - eta[1])) / 3.0;
    case LatticeName::LadderSquare: return -4.0 * sum_cos / (2.0 * m.dim + 1.0);
    default: return 0.0;  // off-diagonal catalogs
  }
}

}  // namespace latcont
