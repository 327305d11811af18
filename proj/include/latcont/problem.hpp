#pragma once

#include <functional>
#include <map>
#include <string>

#include "latcont/grid.hpp"

namespace latcont {

// Energy parameter z = E + i*eps (Plus) or E - i*eps (Minus). eps = 0 means
// the boundary value E +- i0, reached through the epsilon ladder.
struct EnergyQuery {
  double E = 1.0;
  double epsilon = 0.0;
  enum class Side { Plus, Minus };
  Side side = Side::Plus;

  cdouble z() const { return {E, side == Side::Plus ? epsilon : -epsilon}; }
  bool real_axis() const { return epsilon == 0.0; }

  static EnergyQuery complex_energy(cdouble z) {
    EnergyQuery q;
    q.E = z.real();
    q.epsilon = std::abs(z.imag());
    q.side = z.imag() >= 0.0 ? Side::Plus : Side::Minus;
    return q;
  }
  static EnergyQuery boundary(double E, Side side = Side::Plus) { return {E, 0.0, side}; }
};

// Real-valued compactly supported potential x -> V(x).
struct PotentialSpec {
  std::function<double(const VectorXd&)> evaluator;
  double support_radius = 0.0;

  bool zero() const { return !evaluator || support_radius <= 0.0; }
  double operator()(const VectorXd& x) const {
    if (zero() || x.norm() >= support_radius) return 0.0;
    return evaluator(x);
  }
};

struct SolveResult {
  GridFunction u;
  GridFunction projected_part;
  double remainder_norm = 0.0;
  double radiation_flux = 0.0;
  std::map<std::string, double> diagnostics;
};

// --- analytic presets --------------------------------------------------------
//
// Grammar: "none" | "gaussian:sigma=0.5[,height=1]" | "bump:radius=1[,height=1]"
//          | "file:<path-base>" (GridFunction binary + sidecar)

namespace detail {

inline std::map<std::string, double> parse_preset_params(const std::string& s) {
  std::map<std::string, double> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    const std::string item = s.substr(pos, comma - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("preset parameter needs key=value: " + item);
    try {
      out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("preset parameter is not numeric: " + item);
    }
    pos = comma + 1;
  }
  return out;
}

inline double param_or(const std::map<std::string, double>& p, const std::string& key, double dflt) {
  auto it = p.find(key);
  return it == p.end() ? dflt : it->second;
}

}  // namespace detail

// Smooth compactly supported bump, value `height` at the origin, zero for |x| >= radius.
inline std::function<double(const VectorXd&)> bump_profile(double radius, double height) {
  if (radius <= 0.0) throw ConfigError("bump radius must be positive");
  return [radius, height](const VectorXd& x) {
    const double r2 = x.squaredNorm() / (radius * radius);
    if (r2 >= 1.0) return 0.0;
    return height * std::exp(1.0 - 1.0 / (1.0 - r2));
  };
}

inline std::function<double(const VectorXd&)> gaussian_profile(double sigma, double height) {
  if (sigma <= 0.0) throw ConfigError("gaussian sigma must be positive");
  return [sigma, height](const VectorXd& x) {
    return height * std::exp(-x.squaredNorm() / (2.0 * sigma * sigma));
  };
}

inline PotentialSpec make_potential(const std::string& spec) {
  if (spec.empty() || spec == "none") return {};
  const std::size_t colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (name == "bump") {
    auto p = detail::parse_preset_params(rest);
    const double radius = detail::param_or(p, "radius", 1.0);
    const double height = detail::param_or(p, "height", 1.0);
    return {bump_profile(radius, height), radius};
  }
  if (name == "gaussian") {
    auto p = detail::parse_preset_params(rest);
    const double sigma = detail::param_or(p, "sigma", 0.5);
    const double height = detail::param_or(p, "height", 1.0);
    // Effective support: the tail beyond 12 sigma is below double precision.
    return {gaussian_profile(sigma, height), 12.0 * sigma};
  }
  throw ConfigError("unknown potential preset: " + spec);
}

// Right-hand-side data from a preset (channel 0 carries the profile) or a file.
inline GridFunction make_rhs(const std::string& spec, double h, Box box, int channels) {
  const std::size_t colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  if (name == "file") {
    if (colon == std::string::npos) throw ConfigError("file preset needs a path: file:<base>");
    GridFunction g = load_grid(spec.substr(colon + 1));
    if (g.h != h || !(g.box == box) || g.channels != channels)
      throw ConfigError("loaded data does not match the requested grid shape");
    return g;
  }
  std::function<double(const VectorXd&)> profile;
  if (name == "gaussian" || name == "bump") {
    PotentialSpec p = make_potential(spec);
    profile = [p](const VectorXd& x) { return p(x); };
  } else if (spec == "none") {
    profile = [](const VectorXd&) { return 0.0; };
  } else {
    throw ConfigError("unknown data preset: " + spec);
  }
  GridFunction g = GridFunction::zeros(h, box, channels);
  for_each_index(box, [&](std::size_t idx, const std::vector<int>& n) {
    VectorXd x(box.dim);
    for (int j = 0; j < box.dim; ++j) x[j] = h * n[j];
    g.values[0][idx] = profile(x);
  });
  return g;
}

}  // namespace latcont
