#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <functional>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "latcont/checks.hpp"
#include "latcont/experiments.hpp"
#include "latcont/scattering.hpp"

// Configuration-driven experiment orchestration. A run takes an
// ExperimentConfig (parsed from key/value text or JSON), validates it, solves,
// and persists report.json + tables/*.csv + solutions/*.bin under output_dir.
// Every float is printed with up to 17 significant digits, so reruns with the
// same config and seed are byte-identical.

namespace latcont {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kReportSchema = "lattice-continuum-report/1";

enum class ExperimentKind {
  Spectrum,
  Extrema,
  DiracLimit,
  Resolve,
  Converge,
  Scatter,
  ScatterConverge,
  InequalityChecks,
};

inline const std::vector<std::pair<ExperimentKind, const char*>>& experiment_names() {
  static const std::vector<std::pair<ExperimentKind, const char*>> table = {
      {ExperimentKind::Spectrum, "spectrum"},
      {ExperimentKind::Extrema, "extrema"},
      {ExperimentKind::DiracLimit, "dirac-limit"},
      {ExperimentKind::Resolve, "resolve"},
      {ExperimentKind::Converge, "converge"},
      {ExperimentKind::Scatter, "scatter"},
      {ExperimentKind::ScatterConverge, "scatter-converge"},
      {ExperimentKind::InequalityChecks, "checks"},
  };
  return table;
}

inline std::string to_string(ExperimentKind k) {
  for (const auto& [kind, name] : experiment_names())
    if (kind == k) return name;
  return "?";
}

inline ExperimentKind experiment_from_string(const std::string& s) {
  for (const auto& [kind, name] : experiment_names())
    if (s == name) return kind;
  throw ConfigError("unknown experiment: " + s);
}

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Converge;
  std::string lattice = "square";
  std::string regime = "square";
  std::vector<double> h_list = {0.2, 0.1, 0.05};
  cdouble energy{1.0, 0.2};
  std::string potential = "none";
  std::string rhs = "gaussian:sigma=1";
  double weight_s = 0.25;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::string preset;       // named catalog experiment; overrides the physics fields
  int grid = 64;            // momentum mesh per axis (spectrum, extrema scan)
  double box_radius = 12.8; // half-width of the solve box
  int omega_grid = 16;      // scattering direction count
  int valley = +1;          // conical valley selector
};

// --- canonical text, hashing -------------------------------------------------

namespace detail {

inline std::string trim(std::string s) {
  const auto sp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && sp(s.front())) s.erase(s.begin());
  while (!s.empty() && sp(s.back())) s.pop_back();
  return s;
}

inline double parse_double(const std::string& s, const std::string& field) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError(field + ": not a number: " + s);
  }
  if (trim(s.substr(used)) != "") throw ConfigError(field + ": trailing junk: " + s);
  return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t next = s.find(sep, pos);
    if (next == std::string::npos) next = s.size();
    const std::string item = trim(s.substr(pos, next - pos));
    if (!item.empty()) out.push_back(item);
    pos = next + 1;
  }
  return out;
}

}  // namespace detail

// Accepts "1.5", "1+0.2i", "-2e-3i", "0.5,0.1", "(0.5,0.1)".
inline cdouble parse_energy(std::string s) {
  s = detail::trim(s);
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);
  if (s.find(',') != std::string::npos) {
    const auto parts = detail::split(s, ',');
    if (parts.size() != 2) throw ConfigError("energy: expected re,im: " + s);
    return {detail::parse_double(parts[0], "energy"), detail::parse_double(parts[1], "energy")};
  }
  if (!s.empty() && (s.back() == 'i' || s.back() == 'I')) {
    s.pop_back();
    // Split at the last +/- that is not an exponent sign.
    std::size_t cut = std::string::npos;
    for (std::size_t j = s.size(); j-- > 1;) {
      if ((s[j] == '+' || s[j] == '-') && s[j - 1] != 'e' && s[j - 1] != 'E') {
        cut = j;
        break;
      }
    }
    if (cut == std::string::npos) {
      const std::string im = detail::trim(s);
      if (im.empty() || im == "+") return {0.0, 1.0};
      if (im == "-") return {0.0, -1.0};
      return {0.0, detail::parse_double(im, "energy")};
    }
    const double re = detail::parse_double(s.substr(0, cut), "energy");
    std::string im = detail::trim(s.substr(cut));
    if (im == "+") im = "1";
    if (im == "-") im = "-1";
    return {re, detail::parse_double(im, "energy")};
  }
  return {detail::parse_double(s, "energy"), 0.0};
}

// Canonical serialization: fixed key order, 17 significant digits. The output
// directory is excluded on purpose, so the hash identifies the computation,
// not where its artifacts land.
inline std::string canonical_config_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "experiment=" << to_string(c.experiment) << "\n";
  os << "lattice=" << c.lattice << "\n";
  os << "regime=" << c.regime << "\n";
  os << "h_list=";
  for (std::size_t i = 0; i < c.h_list.size(); ++i)
    os << (i ? "," : "") << format_double(c.h_list[i]);
  os << "\n";
  os << "energy=" << format_double(c.energy.real()) << "," << format_double(c.energy.imag())
     << "\n";
  os << "potential=" << c.potential << "\n";
  os << "rhs=" << c.rhs << "\n";
  os << "weight_s=" << format_double(c.weight_s) << "\n";
  os << "seed=" << c.seed << "\n";
  os << "preset=" << c.preset << "\n";
  os << "grid=" << c.grid << "\n";
  os << "box_radius=" << format_double(c.box_radius) << "\n";
  os << "omega_grid=" << c.omega_grid << "\n";
  os << "valley=" << c.valley << "\n";
  return os.str();
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t x = 1469598103934665603ull;
  for (unsigned char c : s) {
    x ^= c;
    x *= 1099511628211ull;
  }
  return x;
}

inline std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_config_text(c))));
  return buf;
}

// --- parsing ------------------------------------------------------------------
//
// Plain-text grammar, one pair per line:
//     # comment                 (also ; comments)
//     [section]                 (headers are allowed and ignored)
//     key = value
// Keys match the ExperimentConfig fields; h_list is comma-separated, energy is
// "re,im" or "a+bi". The same schema is accepted as a flat JSON object.

inline void apply_config_value(ExperimentConfig& c, const std::string& key,
                               const std::string& value) {
  if (key == "experiment") {
    c.experiment = experiment_from_string(value);
  } else if (key == "lattice") {
    c.lattice = value;
  } else if (key == "regime") {
    c.regime = value;
  } else if (key == "h_list") {
    c.h_list.clear();
    for (const std::string& item : detail::split(value, ','))
      c.h_list.push_back(detail::parse_double(item, "h_list"));
  } else if (key == "energy") {
    c.energy = parse_energy(value);
  } else if (key == "potential") {
    c.potential = value;
  } else if (key == "rhs") {
    c.rhs = value;
  } else if (key == "weight_s") {
    c.weight_s = detail::parse_double(value, "weight_s");
  } else if (key == "seed") {
    try {
      c.seed = std::stoull(value);
    } catch (const std::exception&) {
      throw ConfigError("seed: not an integer: " + value);
    }
  } else if (key == "output_dir") {
    c.output_dir = value;
  } else if (key == "preset") {
    c.preset = value;
  } else if (key == "grid") {
    c.grid = static_cast<int>(detail::parse_double(value, "grid"));
  } else if (key == "box_radius") {
    c.box_radius = detail::parse_double(value, "box_radius");
  } else if (key == "omega_grid") {
    c.omega_grid = static_cast<int>(detail::parse_double(value, "omega_grid"));
  } else if (key == "valley") {
    c.valley = static_cast<int>(detail::parse_double(value, "valley"));
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

inline ExperimentConfig parse_config_text(const std::string& text,
                                          ExperimentConfig c = ExperimentConfig{}) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    apply_config_value(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return c;
}

inline ExperimentConfig parse_config_json(const nlohmann::json& j,
                                          ExperimentConfig c = ExperimentConfig{}) {
  if (!j.is_object()) throw ConfigError("config JSON must be an object");
  for (const auto& [key, value] : j.items()) {
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_array()) {
      std::ostringstream os;
      for (std::size_t i = 0; i < value.size(); ++i)
        os << (i ? "," : "") << format_double(value[i].get<double>());
      text = os.str();
    } else if (value.is_number_integer() || value.is_number_unsigned()) {
      text = std::to_string(value.get<long long>());
    } else if (value.is_number()) {
      text = format_double(value.get<double>());
    } else {
      throw ConfigError("config key has unsupported JSON type: " + key);
    }
    apply_config_value(c, key, text);
  }
  return c;
}

inline ExperimentConfig parse_config(const std::string& text,
                                     ExperimentConfig base = ExperimentConfig{}) {
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    if (ch == '{') return parse_config_json(nlohmann::json::parse(text), std::move(base));
    break;
  }
  return parse_config_text(text, std::move(base));
}

inline ExperimentConfig load_config_file(const std::string& path,
                                         ExperimentConfig base = ExperimentConfig{}) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

// --- validation ----------------------------------------------------------------

struct ValidationIssue {
  std::string field;
  std::string message;
};

inline std::vector<ValidationIssue> validate(const ExperimentConfig& c) {
  std::vector<ValidationIssue> out;
  const auto flag = [&out](const std::string& field, const std::string& msg) {
    out.push_back({field, msg});
  };
  const auto k = c.experiment;
  const bool needs_regime = k == ExperimentKind::DiracLimit || k == ExperimentKind::Resolve ||
                            k == ExperimentKind::Converge;

  bool lattice_ok = true;
  try {
    lattice_from_string(c.lattice);
  } catch (const ConfigError& e) {
    lattice_ok = false;
    flag("lattice", e.what());
  }

  ScalingRegime regime;
  bool regime_ok = false;
  if (needs_regime) {
    try {
      regime = make_regime(c.regime, 2, c.valley);
      regime_ok = true;
      if (lattice_ok && regime.model.id() != c.lattice)
        flag("regime", "regime '" + c.regime + "' lives on the " + regime.model.id() +
                           " lattice, not " + c.lattice);
    } catch (const Error& e) {
      flag("regime", e.what());
    }
  }

  if (c.h_list.empty()) flag("h_list", "at least one mesh size is required");
  for (double h : c.h_list)
    if (!(h > 0.0)) {
      flag("h_list", "mesh sizes must be positive");
      break;
    }
  for (std::size_t i = 0; i + 1 < c.h_list.size(); ++i)
    if (!(c.h_list[i] > c.h_list[i + 1])) {
      flag("h_list", "mesh sizes must be strictly decreasing");
      break;
    }
  const bool ladder = k == ExperimentKind::Converge || k == ExperimentKind::ScatterConverge ||
                      k == ExperimentKind::DiracLimit;
  if (ladder && c.h_list.size() < 2)
    flag("h_list", "convergence experiments need at least two mesh sizes");

  if (!(c.weight_s >= 0.0)) flag("weight_s", "weight exponent must be >= 0");
  if (c.grid < 2) flag("grid", "momentum mesh needs at least 2 points per axis");
  if (!(c.box_radius > 0.0)) flag("box_radius", "box radius must be positive");
  if (c.omega_grid < 2) flag("omega_grid", "direction grid needs at least 2 directions");
  if (c.output_dir.empty()) flag("output_dir", "output directory is required");

  if (!c.preset.empty()) {
    const auto names = experiment_catalog();
    if (std::find(names.begin(), names.end(), c.preset) == names.end())
      flag("preset", "unknown catalog experiment: " + c.preset);
    else if (k != ExperimentKind::Converge)
      flag("preset", "catalog presets apply to the converge experiment");
  }

  for (const char* field : {"potential", "rhs"}) {
    const std::string& spec = field[0] == 'p' ? c.potential : c.rhs;
    if (spec.rfind("file:", 0) == 0) continue;  // file existence is a run-time concern
    try {
      make_potential(spec);
    } catch (const ConfigError& e) {
      flag(field, e.what());
    }
  }

  const bool real_energy = c.energy.imag() == 0.0;
  if (k == ExperimentKind::Resolve || k == ExperimentKind::Converge) {
    if (real_energy && regime_ok) {
      const std::string fam = regime.model.id();
      if (fam == "kagome" || fam == "subdivision") {
        flag("energy", fam + " regimes are continuum-limited at complex energy only; "
                             "a real-axis boundary value needs Im z > 0 here");
      } else {
        try {
          check_energy_window(regime, c.h_list.empty() ? 1.0 : c.h_list.front(),
                              EnergyQuery::boundary(c.energy.real()));
        } catch (const WindowError& e) {
          flag("energy", e.what());
        }
        if (k == ExperimentKind::Converge && c.regime != "square" && c.preset.empty())
          flag("regime",
               "real-axis convergence runs against the square-lattice radial reference only");
      }
    }
  }
  if (k == ExperimentKind::DiracLimit && regime_ok && c.regime != "hexagonal-dirac")
    flag("regime", "the generator-limit sweep is defined for the hexagonal-dirac regime");
  if (k == ExperimentKind::Scatter || k == ExperimentKind::ScatterConverge) {
    if (!real_energy)
      flag("energy", "scattering amplitudes live on the real axis; drop the imaginary part");
    else if (!(c.energy.real() > 0.0))
      flag("energy", "scattering needs E > 0 inside the limiting band");
    if (lattice_ok && c.lattice != "square")
      flag("lattice", "the amplitude pipeline is implemented on the square lattice");
    if (c.potential.rfind("file:", 0) == 0)
      flag("potential", "amplitude quadratures need an analytic potential preset");
  }
  if (k == ExperimentKind::Converge && c.rhs.rfind("file:", 0) == 0)
    flag("rhs", "convergence sweeps realize the data at every mesh size; use an analytic preset");
  if (k == ExperimentKind::InequalityChecks && !(c.energy.imag() > 0.0))
    flag("energy", "the a priori inequality sweep needs Im z > 0");
  return out;
}

// --- report --------------------------------------------------------------------

struct ReportRow {
  double h = 0.0;
  double error_norm = 0.0;
  double residual = 0.0;
  std::map<std::string, double> diagnostics;
};

struct ConvergenceReport {
  std::string experiment;
  std::string config_hash;
  std::string tool_version = kToolVersion;
  std::vector<ReportRow> rows;  // sorted by decreasing h
  double fitted_order = 0.0;
  bool pass = false;
  std::map<std::string, double> summary;
  std::vector<std::string> errors;
};

namespace detail {

inline std::string json_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x",
                        static_cast<unsigned>(static_cast<unsigned char>(ch)));
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out + "\"";
}

inline void write_number_map(std::ostream& os, const std::map<std::string, double>& m,
                             const std::string& indent) {
  if (m.empty()) {
    os << "{}";
    return;
  }
  os << "{";
  bool first = true;
  for (const auto& [key, value] : m) {
    os << (first ? "\n" : ",\n") << indent << "  " << json_quote(key) << ": "
       << format_double(value);
    first = false;
  }
  os << "\n" << indent << "}";
}

}  // namespace detail

// The one serialization point for reports: numbers go through format_double
// (17 significant digits), map keys are sorted, so identical runs serialize to
// identical bytes.
inline void write_report_json(const ConvergenceReport& r, const ExperimentConfig& c,
                              std::ostream& os) {
  using detail::json_quote;
  os << "{\n";
  os << "  \"schema\": " << json_quote(kReportSchema) << ",\n";
  os << "  \"tool_version\": " << json_quote(r.tool_version) << ",\n";
  os << "  \"experiment\": " << json_quote(r.experiment) << ",\n";
  os << "  \"config_hash\": " << json_quote(r.config_hash) << ",\n";
  os << "  \"config\": {\n";
  os << "    \"experiment\": " << json_quote(to_string(c.experiment)) << ",\n";
  os << "    \"lattice\": " << json_quote(c.lattice) << ",\n";
  os << "    \"regime\": " << json_quote(c.regime) << ",\n";
  os << "    \"h_list\": [";
  for (std::size_t i = 0; i < c.h_list.size(); ++i)
    os << (i ? ", " : "") << format_double(c.h_list[i]);
  os << "],\n";
  os << "    \"energy\": [" << format_double(c.energy.real()) << ", "
     << format_double(c.energy.imag()) << "],\n";
  os << "    \"potential\": " << json_quote(c.potential) << ",\n";
  os << "    \"rhs\": " << json_quote(c.rhs) << ",\n";
  os << "    \"weight_s\": " << format_double(c.weight_s) << ",\n";
  os << "    \"seed\": " << c.seed << ",\n";
  os << "    \"preset\": " << json_quote(c.preset) << ",\n";
  os << "    \"grid\": " << c.grid << ",\n";
  os << "    \"box_radius\": " << format_double(c.box_radius) << ",\n";
  os << "    \"omega_grid\": " << c.omega_grid << ",\n";
  os << "    \"valley\": " << c.valley << "\n";
  os << "  },\n";
  os << "  \"rows\": [";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const ReportRow& row = r.rows[i];
    os << (i ? ",\n" : "\n");
    os << "    {\"h\": " << format_double(row.h)
       << ", \"error_norm\": " << format_double(row.error_norm)
       << ", \"residual\": " << format_double(row.residual) << ", \"diagnostics\": ";
    detail::write_number_map(os, row.diagnostics, "    ");
    os << "}";
  }
  os << (r.rows.empty() ? "" : "\n  ") << "],\n";
  os << "  \"fitted_order\": " << format_double(r.fitted_order) << ",\n";
  os << "  \"pass\": " << (r.pass ? "true" : "false") << ",\n";
  os << "  \"summary\": ";
  detail::write_number_map(os, r.summary, "  ");
  os << ",\n";
  os << "  \"errors\": [";
  for (std::size_t i = 0; i < r.errors.size(); ++i)
    os << (i ? ", " : "") << json_quote(r.errors[i]);
  os << "]\n";
  os << "}\n";
}

// --- execution -------------------------------------------------------------------

namespace detail {

// Fans independent row chunks out to a small worker pool; the caller assembles
// results by index, so the outcome does not depend on the thread count.
inline void parallel_rows(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned workers =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()), 8u);
  if (workers <= 1 || n < 2 * workers) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  for (auto& t : pool) t.join();
}

inline std::ofstream open_artifact(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open for writing: " + path.string());
  return os;
}

// Momentum mesh covering [-pi, pi) per axis. Lattices with conical touches at
// the zone corners +-(2pi/3, -(2pi/3)) get the nearest node snapped onto the
// exact corner so the spectrum table contains the degenerate rows; everything
// else keeps the uniform mesh.
inline std::vector<double> spectrum_axis(const LatticeModel& m, int grid) {
  std::vector<double> vals(grid);
  for (int j = 0; j < grid; ++j) vals[j] = -pi + 2.0 * pi * j / grid;
  if (m.name == LatticeName::Hexagonal || m.name == LatticeName::Kagome) {
    for (double target : {-2.0 * pi / 3.0, 2.0 * pi / 3.0}) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < vals.size(); ++j)
        if (std::abs(vals[j] - target) < std::abs(vals[best] - target)) best = j;
      vals[best] = target;
    }
  }
  return vals;
}

inline ExperimentData preset_data(const std::string& rhs, int channels) {
  const PotentialSpec p = make_potential(rhs);
  if (p.zero()) throw ConfigError("the convergence data preset must be nonzero");
  ExperimentData data;
  data.radial = [p](double t) {
    VectorXd x(2);
    x << t, 0.0;
    return p(x);
  };
  data.weights = VectorXcd::Zero(channels);
  data.weights[0] = 1.0;  // presets load channel 0, matching make_rhs
  return data;
}

inline void rows_from_table(const ConvergenceTable& t, ConvergenceReport& report) {
  for (std::size_t i = 0; i < t.h_values.size(); ++i) {
    ReportRow row;
    row.h = t.h_values[i];
    row.error_norm = t.errors[i];
    const std::string suffix = "_h" + format_double(row.h, "%g");
    for (const auto& [key, value] : t.diagnostics) {
      if (key.size() > suffix.size() &&
          key.compare(key.size() - suffix.size(), suffix.size(), suffix) == 0)
        row.diagnostics[key.substr(0, key.size() - suffix.size())] = value;
    }
    const auto res = row.diagnostics.find("residual_rel");
    if (res != row.diagnostics.end()) row.residual = res->second;
    report.rows.push_back(std::move(row));
  }
  for (const auto& [key, value] : t.diagnostics)
    if (key.find("_h") == std::string::npos) report.summary[key] = value;
  report.fitted_order = t.fitted_order;
  report.pass = t.decreasing && t.halved;
  report.summary["decreasing"] = t.decreasing ? 1.0 : 0.0;
  report.summary["halved"] = t.halved ? 1.0 : 0.0;
}

inline void write_error_table(const ConvergenceReport& r, const std::filesystem::path& dir) {
  auto os = open_artifact(dir / "tables" / "errors.csv");
  os << "h,error_norm,residual\n";
  for (const ReportRow& row : r.rows)
    os << format_double(row.h) << "," << format_double(row.error_norm) << ","
       << format_double(row.residual) << "\n";
}

// --- per-experiment bodies ---------------------------------------------------

inline void execute_spectrum(const ExperimentConfig& c, ConvergenceReport& report,
                             const std::filesystem::path& dir) {
  const LatticeModel model = build_lattice(lattice_from_string(c.lattice), 2);
  const std::vector<double> axis = spectrum_axis(model, c.grid);
  const std::size_t n = axis.size() * axis.size();
  const int bands = model.sublattices;
  std::vector<VectorXd> rows(n);
  parallel_rows(n, [&](std::size_t i) {
    VectorXd eta(2);
    eta << axis[i / axis.size()], axis[i % axis.size()];
    rows[i] = characteristic_roots(model, eta);
  });

  auto os = open_artifact(dir / "tables" / "spectrum.csv");
  os << "eta1,eta2";
  for (int b = 0; b < bands; ++b) os << ",lambda" << b;
  os << "\n";
  double min_abs = std::numeric_limits<double>::infinity();
  std::size_t touching = 0;
  for (std::size_t i = 0; i < n; ++i) {
    os << format_double(axis[i / axis.size()]) << "," << format_double(axis[i % axis.size()]);
    for (int b = 0; b < bands; ++b) os << "," << format_double(rows[i][b]);
    os << "\n";
    const double amin = rows[i].cwiseAbs().minCoeff();
    min_abs = std::min(min_abs, amin);
    if (amin <= 1e-10) ++touching;
  }
  report.summary["rows"] = static_cast<double>(n);
  report.summary["bands"] = bands;
  report.summary["min_abs_value"] = min_abs;
  report.summary["zero_value_rows"] = static_cast<double>(touching);
  // Conical catalogs must expose their degenerate rows exactly.
  const bool conical =
      model.name == LatticeName::Hexagonal || model.name == LatticeName::Kagome;
  report.pass = !conical || touching >= 2;
}

inline void execute_extrema(const ExperimentConfig& c, ConvergenceReport& report,
                            const std::filesystem::path& dir) {
  const LatticeModel model = build_lattice(lattice_from_string(c.lattice), 2);
  auto os = open_artifact(dir / "tables" / "extrema.csv");
  os << "band,kind,eta1,eta2,value,gradient_norm,band_gap\n";
  bool ok = true;
  std::size_t count = 0;
  for (int band = 0; band < model.sublattices; ++band) {
    for (const CriticalPoint& p : find_extrema(model, band, c.grid)) {
      os << band << "," << to_string(p.kind) << "," << format_double(p.eta[0]) << ","
         << format_double(p.eta[1]) << "," << format_double(p.value) << ","
         << format_double(p.gradient_norm) << "," << format_double(p.band_gap) << "\n";
      ++count;
      if (p.kind == CriticalKind::Minimum || p.kind == CriticalKind::Maximum ||
          p.kind == CriticalKind::Saddle)
        ok = ok && p.gradient_norm <= 1e-8;
    }
  }
  report.summary["critical_points"] = static_cast<double>(count);
  report.pass = ok && count > 0;
}

inline void execute_dirac_limit(const ExperimentConfig& c, ConvergenceReport& report,
                                const std::filesystem::path& dir) {
  const ScalingRegime r = make_regime(c.regime, 2, c.valley);
  const OrderFit fit = dirac_limit_check(r, c.h_list);
  ConvergenceTable t;
  t.h_values = fit.hs;
  t.errors = fit.errors;
  finalize_table(t);
  rows_from_table(t, report);
  write_error_table(report, dir);
}

inline void execute_resolve(const ExperimentConfig& c, ConvergenceReport& report,
                            const std::filesystem::path& dir) {
  const ScalingRegime r = make_regime(c.regime, 2, c.valley);
  const double h = c.h_list.front();
  const Box box{r.dim(), radius_halfwidth(c.box_radius, h)};
  const GridFunction f = make_rhs(c.rhs, h, box, r.model.sublattices);
  const PotentialSpec V = make_potential(c.potential);
  const EnergyQuery q = EnergyQuery::complex_energy(c.energy);
  const SolveResult sol =
      V.zero() && !q.real_axis() ? free_resolvent_apply(r, q, f) : potential_solve(r, q, V, f);

  save_grid(f, (dir / "solutions" / "rhs").string());
  save_grid(sol.u, (dir / "solutions" / "u").string());
  ReportRow row;
  row.h = h;
  row.diagnostics = sol.diagnostics;
  row.diagnostics["remainder_norm"] = sol.remainder_norm;
  row.diagnostics["u_norm"] = norm_l2(sol.u);
  const auto res = sol.diagnostics.find("residual_rel");
  if (res != sol.diagnostics.end()) row.residual = res->second;
  report.rows.push_back(std::move(row));
  report.summary["u_weighted_norm"] = norm_weighted_l2(sol.u, -c.weight_s);
  report.pass = q.real_axis() || report.rows.front().residual <= 1e-6;
}

inline void execute_converge(const ExperimentConfig& c, ConvergenceReport& report,
                             const std::filesystem::path& dir) {
  ConvergenceTable t;
  if (!c.preset.empty()) {
    t = run_convergence(make_experiment(c.preset), c.h_list);
  } else if (c.energy.imag() == 0.0) {
    const PotentialSpec V = make_potential(c.potential);
    const PotentialSpec shape = make_potential(c.rhs);
    const ExperimentData data = preset_data(c.rhs, 1);
    const double data_radius = std::min(shape.support_radius, 0.9 * c.box_radius);
    t = lap_convergence_table(c.energy.real(), V, data, data_radius, c.h_list, c.weight_s,
                              c.box_radius);
  } else {
    const ScalingRegime r = make_regime(c.regime, 2, c.valley);
    const PotentialSpec V = make_potential(c.potential);
    const ExperimentData data = preset_data(c.rhs, r.model.sublattices);
    t = multiplier_convergence_table(r, c.energy, V, data, c.h_list, c.weight_s, c.box_radius);
  }
  rows_from_table(t, report);
  write_error_table(report, dir);
}

inline void write_amplitude_table(const AmplitudeGrid& g, std::ostream& os, bool header) {
  if (header) os << "E,h,omega,omega_prime,re_born,im_born,re_full,im_full\n";
  const int n = static_cast<int>(g.directions.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double th_out = std::atan2(g.directions[i][1], g.directions[i][0]);
      const double th_in = std::atan2(g.directions[j][1], g.directions[j][0]);
      os << format_double(g.E) << "," << format_double(g.h) << "," << format_double(th_out)
         << "," << format_double(th_in) << "," << format_double(g.born(i, j).real()) << ","
         << format_double(g.born(i, j).imag()) << "," << format_double(g.full(i, j).real())
         << "," << format_double(g.full(i, j).imag()) << "\n";
    }
}

inline void execute_scatter(const ExperimentConfig& c, ConvergenceReport& report,
                            const std::filesystem::path& dir) {
  const PotentialSpec V = make_potential(c.potential);
  const double E = c.energy.real();
  const AmplitudeGrid g =
      discrete_amplitude_grid(E, c.h_list.front(), V, unit_circle_grid(c.omega_grid));
  auto os = open_artifact(dir / "tables" / "amplitudes.csv");
  write_amplitude_table(g, os, true);
  ReportRow row;
  row.h = g.h;
  row.diagnostics = g.diagnostics;
  report.rows.push_back(std::move(row));
  report.summary["max_abs_full"] = g.full.cwiseAbs().maxCoeff();
  report.summary["max_abs_born"] = g.born.cwiseAbs().maxCoeff();
  report.summary["max_err_estimate"] = g.err_estimate.maxCoeff();
  report.pass = true;
}

inline void execute_scatter_converge(const ExperimentConfig& c, ConvergenceReport& report,
                                     const std::filesystem::path& dir) {
  const PotentialSpec V = make_potential(c.potential);
  const AmplitudeConvergence conv =
      amplitude_convergence_table(c.energy.real(), V, c.h_list, c.omega_grid);
  for (std::size_t i = 0; i < conv.h_values.size(); ++i) {
    ReportRow row;
    row.h = conv.h_values[i];
    row.error_norm = conv.full_gap[i];
    row.diagnostics["born_gap"] = conv.born_gap[i];
    report.rows.push_back(std::move(row));
  }
  report.fitted_order = conv.born_fit_order;
  report.pass = conv.decreasing && conv.halved;
  report.summary["decreasing"] = conv.decreasing ? 1.0 : 0.0;
  report.summary["halved"] = conv.halved ? 1.0 : 0.0;
  report.summary["born_fit_order"] = conv.born_fit_order;

  write_error_table(report, dir);
  auto os = open_artifact(dir / "tables" / "amplitudes.csv");
  write_amplitude_table(conv.continuum, os, true);
  for (const AmplitudeGrid& g : conv.lattice) write_amplitude_table(g, os, false);
}

inline void execute_checks(const ExperimentConfig& c, ConvergenceReport& report,
                           const std::filesystem::path& dir) {
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  double worst_beta = 0.0, worst_b = 0.0;
  bool holds = true;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> b(1 + trial % 40);
    for (double& x : b) x = unif(rng);
    const AlphaBetaResult ab = alpha_beta_check(b);
    holds = holds && ab.holds;
    if (ab.alpha > 0) worst_beta = std::max(worst_beta, ab.beta / ab.alpha);
  }
  for (int trial = 0; trial < 60; ++trial) {
    GridFunction g = GridFunction::zeros(0.25, Box{2, 24}, 1);
    for (auto& v : g.values[0]) v = cdouble{unif(rng) - 0.5, unif(rng) - 0.5};
    const DyadicSupResult ds = dyadic_sup_check(g);
    holds = holds && ds.holds;
    if (ds.dyadic > 0) worst_b = std::max(worst_b, ds.continuous / ds.dyadic);
  }
  report.summary["beta_over_alpha_max"] = worst_beta;
  report.summary["continuous_over_dyadic_max"] = worst_b;

  const double sigma = 0.05;
  const RiemannSumResult rs = riemann_sum_check(
      [sigma](const VectorXd& x) {
        return std::exp(-x.squaredNorm() / (2 * sigma * sigma)) / (2 * pi * sigma * sigma);
      },
      2, 2.0, c.h_list.size() >= 2 ? c.h_list : std::vector<double>{0.2, 0.1, 0.05});
  report.summary["riemann_order"] = rs.fitted_order;
  holds = holds && rs.within_linear_law && rs.fitted_order >= 1.0;

  double apriori_lo = std::numeric_limits<double>::infinity(), apriori_hi = 0.0;
  double commutator_max = 0.0;
  for (double h : c.h_list) {
    const Box box{2, radius_halfwidth(c.box_radius, h)};
    const GridFunction f = sample(h, box, 1, [](const VectorXd& x, VectorXcd& v) {
      v[0] = std::exp(-x.squaredNorm() / 2.0);
    });
    const AprioriCheckResult ap = apriori_inequality_check(h, c.energy, f, c.weight_s);
    apriori_lo = std::min(apriori_lo, ap.ratio);
    apriori_hi = std::max(apriori_hi, ap.ratio);

    GridFunction u = GridFunction::zeros(h, box, 1);
    for (auto& v : u.values[0]) v = cdouble{unif(rng) - 0.5, unif(rng) - 0.5};
    const CommutatorCheckResult cm = commutator_check(u, std::max(c.weight_s, 0.5));
    commutator_max = std::max(commutator_max, cm.ratio);

    ReportRow row;
    row.h = h;
    row.diagnostics["apriori_ratio"] = ap.ratio;
    row.diagnostics["commutator_ratio"] = cm.ratio;
    report.rows.push_back(std::move(row));
  }
  report.summary["apriori_spread"] = apriori_hi / apriori_lo;
  report.summary["commutator_ratio_max"] = commutator_max;
  holds = holds && worst_beta <= 3.0 && worst_b <= 2.0 && apriori_hi / apriori_lo <= 2.0 &&
          commutator_max <= 8.0;
  report.pass = holds;

  auto os = open_artifact(dir / "tables" / "checks.csv");
  os << "h,apriori_ratio,commutator_ratio\n";
  for (const ReportRow& row : report.rows)
    os << format_double(row.h) << "," << format_double(row.diagnostics.at("apriori_ratio"))
       << "," << format_double(row.diagnostics.at("commutator_ratio")) << "\n";
}

}  // namespace detail

// Runs a validated config and persists the artifacts. Solver failures land in
// report.errors rather than escaping; the report is written either way.
inline ConvergenceReport execute(const ExperimentConfig& c) {
  namespace fs = std::filesystem;
  const fs::path dir = c.output_dir;
  ConvergenceReport report;
  report.experiment = to_string(c.experiment);
  report.config_hash = config_hash(c);
  try {
    switch (c.experiment) {
      case ExperimentKind::Spectrum: detail::execute_spectrum(c, report, dir); break;
      case ExperimentKind::Extrema: detail::execute_extrema(c, report, dir); break;
      case ExperimentKind::DiracLimit: detail::execute_dirac_limit(c, report, dir); break;
      case ExperimentKind::Resolve: detail::execute_resolve(c, report, dir); break;
      case ExperimentKind::Converge: detail::execute_converge(c, report, dir); break;
      case ExperimentKind::Scatter: detail::execute_scatter(c, report, dir); break;
      case ExperimentKind::ScatterConverge:
        detail::execute_scatter_converge(c, report, dir);
        break;
      case ExperimentKind::InequalityChecks: detail::execute_checks(c, report, dir); break;
    }
  } catch (const Error& e) {
    report.pass = false;
    report.errors.push_back(e.what());
  }
  auto os = detail::open_artifact(dir / "report.json");
  write_report_json(report, c, os);
  return report;
}

// CLI entry: validation errors go to `diag` and skip the run entirely.
inline int run_experiment(const ExperimentConfig& c, std::ostream& diag) {
  const auto issues = validate(c);
  if (!issues.empty()) {
    for (const ValidationIssue& issue : issues)
      diag << "config error [" << issue.field << "]: " << issue.message << "\n";
    return 2;
  }
  const ConvergenceReport report = execute(c);
  for (const std::string& e : report.errors) diag << "run error: " << e << "\n";
  diag << (report.pass ? "PASS" : "FAIL") << " " << report.experiment << " ("
       << (std::filesystem::path(c.output_dir) / "report.json").string() << ")\n";
  return report.pass && report.errors.empty() ? 0 : 1;
}

}  // namespace latcont
