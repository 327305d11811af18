#pragma once

#include <random>

#include "latcont/core.hpp"

namespace latcont {

// Matrix trigonometric polynomial L(eta) = sum_k C_k exp(-i eta.k) with integer
// multi-index offsets k. Hermitian iff C_{-k} = C_k^H for every term.
struct TrigPolyMatrix {
  int dim = 0;
  int size = 1;  // number of internal channels s
  struct Term {
    std::vector<int> offset;
    MatrixXcd coeff;
  };
  std::vector<Term> terms;

  MatrixXcd eval(const VectorXd& eta) const {
    if (eta.size() != dim) throw Error("trig poly: wrong eta dimension");
    MatrixXcd out = MatrixXcd::Zero(size, size);
    for (const auto& t : terms) {
      double phase = 0;
      for (int j = 0; j < dim; ++j) phase -= eta[j] * t.offset[j];
      out += t.coeff * std::exp(iu * phase);
    }
    return out;
  }

  // Same polynomial with every offset phase-twisted: C_k -> C_k exp(-i k.d1),
  // which realizes the gauge-conjugated operator as a plain stencil.
  TrigPolyMatrix twisted(const VectorXd& d1) const {
    TrigPolyMatrix out = *this;
    for (auto& t : out.terms) {
      double phase = 0;
      for (int j = 0; j < dim; ++j) phase -= d1[j] * t.offset[j];
      t.coeff *= std::exp(iu * phase);
    }
    return out;
  }

  int max_offset() const {
    int m = 0;
    for (const auto& t : terms)
      for (int v : t.offset) m = std::max(m, std::abs(v));
    return m;
  }

  double hermiticity_defect(const VectorXd& eta) const {
    const MatrixXcd L = eval(eta);
    return (L - L.adjoint()).cwiseAbs().maxCoeff();
  }
};

// Ascending eigenvalues of the Hermitian symbol at eta.
inline VectorXd characteristic_roots(const TrigPolyMatrix& symbol, const VectorXd& eta,
                                     double herm_tol = 1e-11) {
  const MatrixXcd L = symbol.eval(eta);
  if ((L - L.adjoint()).cwiseAbs().maxCoeff() > herm_tol)
    throw Error("characteristic_roots: symbol is not Hermitian at the requested point");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(L);
  if (es.info() != Eigen::Success) throw Error("characteristic_roots: eigensolver failed");
  return es.eigenvalues();
}

struct EigenSystem {
  VectorXd values;   // ascending
  MatrixXcd vectors; // columns
};

inline EigenSystem eigen_system(const MatrixXcd& L) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(L);
  if (es.info() != Eigen::Success) throw Error("eigen_system: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

// Coefficients c[0..s] of det(L(eta) - lambda I) = sum_j c[j] lambda^j via
// Faddeev-LeVerrier; independent of the eigensolver route.
inline std::vector<cdouble> characteristic_polynomial(const TrigPolyMatrix& symbol,
                                                      const VectorXd& eta) {
  const MatrixXcd A = symbol.eval(eta);
  const int s = symbol.size;
  // det(lambda I - A) = lambda^s + a_1 lambda^{s-1} + ... + a_s
  std::vector<cdouble> a(s + 1);
  a[0] = 1.0;
  MatrixXcd M = MatrixXcd::Zero(s, s);
  for (int k = 1; k <= s; ++k) {
    M = A * M + a[k - 1] * MatrixXcd::Identity(s, s);
    a[k] = -(A * M).trace() / static_cast<double>(k);
  }
  // Convert to det(A - lambda I) = (-1)^s det(lambda I - A).
  std::vector<cdouble> c(s + 1);
  const double sign = (s % 2 == 0) ? 1.0 : -1.0;
  for (int k = 0; k <= s; ++k) c[s - k] = sign * a[k];
  return c;
}

inline VectorXd random_eta(int dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-pi, pi);
  VectorXd eta(dim);
  for (int j = 0; j < dim; ++j) eta[j] = dist(rng);
  return eta;
}

}  // namespace latcont
