#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace latcont {

using cdouble = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cdouble iu{0.0, 1.0};

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};
struct ConfigError : Error {
  using Error::Error;
};
struct WindowError : Error {
  using Error::Error;
};
struct GapError : Error {
  double measured_gap = 0.0;
  GapError(const std::string& msg, double gap) : Error(msg), measured_gap(gap) {}
};
struct AnnulusError : Error {
  using Error::Error;
};
struct NearSingularError : Error {
  double condition = 0.0;
  NearSingularError(const std::string& msg, double cond) : Error(msg), condition(cond) {}
};
struct NoLimitError : Error {
  using Error::Error;
};
struct FormatError : Error {
  using Error::Error;
};

// <x> = sqrt(1+|x|^2)
inline double jbracket(double r2) { return std::sqrt(1.0 + r2); }

inline double sq(double x) { return x * x; }

// Cubic-free C^inf step: 0 for t<=0, 1 for t>=1, built from exp(-1/t).
inline double smoothstep_inf(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

// Radial plateau: 1 on [0,r1], smooth descent on [r1,r2], 0 beyond.
inline double radial_plateau(double r, double r1, double r2) {
  if (r <= r1) return 1.0;
  if (r >= r2) return 0.0;
  return smoothstep_inf((r2 - r) / (r2 - r1));
}

// Uniform box [-halfwidth, halfwidth]^dim of lattice indices, row-major.
struct Box {
  int dim = 0;
  int halfwidth = 0;

  int points_per_axis() const { return 2 * halfwidth + 1; }
  std::size_t total() const {
    std::size_t t = 1;
    for (int j = 0; j < dim; ++j) t *= static_cast<std::size_t>(points_per_axis());
    return t;
  }
  std::size_t flatten(const std::vector<int>& n) const {
    const int M = points_per_axis();
    std::size_t idx = 0;
    for (int j = 0; j < dim; ++j) {
      if (n[j] < -halfwidth || n[j] > halfwidth) throw Error("box index out of range");
      idx = idx * M + static_cast<std::size_t>(n[j] + halfwidth);
    }
    return idx;
  }
  std::vector<int> unflatten(std::size_t idx) const {
    const int M = points_per_axis();
    std::vector<int> n(dim);
    for (int j = dim - 1; j >= 0; --j) {
      n[j] = static_cast<int>(idx % M) - halfwidth;
      idx /= M;
    }
    return n;
  }
  bool operator==(const Box& o) const { return dim == o.dim && halfwidth == o.halfwidth; }
};

// Visit every multi-index of the box in flat (row-major) order.
template <class F>
void for_each_index(const Box& box, F&& f) {
  const std::size_t tot = box.total();
  const int M = box.points_per_axis();
  std::vector<int> n(box.dim, -box.halfwidth);
  for (std::size_t idx = 0; idx < tot; ++idx) {
    f(idx, n);
    for (int j = box.dim - 1; j >= 0; --j) {
      if (++n[j] <= box.halfwidth) break;
      n[j] = -box.halfwidth;
    }
  }
  (void)M;
}

inline double norm2(const std::vector<int>& n) {
  double s = 0;
  for (int v : n) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

// Compensated accumulation keeps the Riemann-sum floors near machine epsilon.
struct KahanSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  double value() const { return s; }
};

struct KahanSumC {
  KahanSum re, im;
  void add(cdouble z) {
    re.add(z.real());
    im.add(z.imag());
  }
  cdouble value() const { return {re.value(), im.value()}; }
};

// Least-squares slope of log(err) against log(h); rows with err<=0 are floored.
inline double fit_order(const std::vector<double>& hs, const std::vector<double>& errs) {
  if (hs.size() != errs.size() || hs.size() < 2) throw Error("fit_order needs >= 2 rows");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(hs.size());
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double x = std::log(hs[i]);
    const double y = std::log(std::max(errs[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

// printf-style double formatting; the default round-trips exactly.
inline std::string format_double(double v, const char* fmt = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

}  // namespace latcont
