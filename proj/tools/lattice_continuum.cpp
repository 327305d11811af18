// Command-line front end: one subcommand per experiment, flags mirroring the
// ExperimentConfig fields. A --config file (key/value text or JSON) seeds the
// configuration; explicit flags override it; the subcommand fixes the
// experiment kind. Exit codes: 0 pass, 1 failed gates or solver error,
// 2 configuration problem.

#include <deque>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "latcont/latcont.hpp"

namespace {

using latcont::ExperimentConfig;
using latcont::ExperimentKind;

struct SubOptions {
  CLI::App* app = nullptr;
  ExperimentKind kind{};
  ExperimentConfig base;  // per-subcommand defaults
  std::string config_path;
  // raw flag values; only flags the user actually passed are applied.
  // A deque keeps the value slots at stable addresses for the option bindings.
  std::deque<std::pair<std::string, std::string>> kv;
  std::vector<CLI::Option*> opts;
};

void add_field(SubOptions& s, const std::string& flag, const std::string& key,
               const std::string& help) {
  s.kv.emplace_back(key, "");
  auto& slot = s.kv.back().second;
  s.opts.push_back(s.app->add_option(flag, slot, help));
}

SubOptions* make_subcommand(CLI::App& app, std::vector<std::unique_ptr<SubOptions>>& subs,
                            ExperimentKind kind, const std::string& help) {
  auto s = std::make_unique<SubOptions>();
  s->kind = kind;
  s->app = app.add_subcommand(latcont::to_string(kind), help);
  s->app->add_option("--config", s->config_path,
                     "configuration file (key/value text or JSON); flags override it");
  add_field(*s, "--lattice", "lattice", "lattice name (see `info`)");
  add_field(*s, "--regime", "regime", "scaling regime id (see `info`)");
  add_field(*s, "--h-list", "h_list", "mesh sizes, comma separated, strictly decreasing");
  add_field(*s, "--E,--energy", "energy", "energy: real `1`, complex `1+0.2i` or `1,0.2`");
  add_field(*s, "--potential", "potential",
            "potential preset: none | gaussian:sigma=.. | bump:radius=.. | file:<base>");
  add_field(*s, "--rhs", "rhs", "data preset: gaussian:sigma=.. | bump:radius=.. | file:<base>");
  add_field(*s, "--s,--weight-s", "weight_s", "weight exponent of the L2,-s norm");
  add_field(*s, "--seed", "seed", "random seed for the randomized checks");
  add_field(*s, "--out,--output-dir", "output_dir", "artifact directory");
  add_field(*s, "--preset", "preset", "named catalog experiment (converge only)");
  add_field(*s, "--grid", "grid", "momentum mesh points per axis");
  add_field(*s, "--box-radius", "box_radius", "half-width of the solve box");
  add_field(*s, "--omega-grid", "omega_grid", "scattering direction count");
  add_field(*s, "--valley", "valley", "conical valley selector (+1 or -1)");
  subs.push_back(std::move(s));
  return subs.back().get();
}

ExperimentConfig build_config(const SubOptions& s) {
  ExperimentConfig c = s.base;
  if (!s.config_path.empty()) c = latcont::load_config_file(s.config_path, c);
  for (std::size_t i = 0; i < s.kv.size(); ++i)
    if (s.opts[i]->count() > 0) latcont::apply_config_value(c, s.kv[i].first, s.kv[i].second);
  c.experiment = s.kind;
  return c;
}

int print_info() {
  std::cout << "lattice-continuum " << latcont::kToolVersion << "\n\n";
  std::cout << "lattices (sites per cell):\n";
  for (latcont::LatticeName n :
       {latcont::LatticeName::Square, latcont::LatticeName::Triangular,
        latcont::LatticeName::LadderSquare, latcont::LatticeName::Hexagonal,
        latcont::LatticeName::Graphite, latcont::LatticeName::Kagome,
        latcont::LatticeName::SubdivisionSquare}) {
    const latcont::LatticeModel m = latcont::build_lattice(n, 2);
    std::cout << "  " << m.id() << " (" << m.sublattices << ")\n";
  }
  std::cout << "\nscaling regimes (reference energy, scaling power, window):\n";
  for (const std::string& id : latcont::regime_catalog()) {
    const latcont::ScalingRegime r = latcont::make_regime(id, 2);
    std::cout << "  " << id << " on " << r.model.id() << ": E0=" << r.reference_energy
              << ", nu=" << r.nu << ", window=" << r.window << "\n";
  }
  std::cout << "\nconverge presets:\n";
  for (const std::string& name : latcont::experiment_catalog()) std::cout << "  " << name << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete-to-continuum lattice toolkit"};
  app.require_subcommand(1);
  CLI::App* info = app.add_subcommand("info", "list lattices, regimes and presets");

  std::vector<std::unique_ptr<SubOptions>> subs;
  make_subcommand(app, subs, ExperimentKind::Spectrum,
                  "band surfaces over the momentum cell, as plot-ready CSV");
  make_subcommand(app, subs, ExperimentKind::Extrema,
                  "critical points of every band: location, kind, gap");
  auto* dl = make_subcommand(app, subs, ExperimentKind::DiracLimit,
                             "deviation of the scaled symbol from its conical generator");
  dl->base.regime = "hexagonal-dirac";
  dl->base.lattice = "hexagonal";
  dl->base.h_list = {0.1, 0.05, 0.025};
  make_subcommand(app, subs, ExperimentKind::Resolve,
                  "single resolvent solve; writes the field as binary + sidecar");
  make_subcommand(app, subs, ExperimentKind::Converge,
                  "mesh-refinement sweep against the continuum reference");
  auto* sc = make_subcommand(app, subs, ExperimentKind::Scatter,
                             "scattering amplitudes on a direction grid at fixed mesh");
  sc->base.energy = {1.0, 0.0};
  sc->base.potential = "bump:radius=1";
  auto* scc = make_subcommand(app, subs, ExperimentKind::ScatterConverge,
                              "amplitude convergence toward the continuum kernel");
  scc->base.energy = {1.0, 0.0};
  scc->base.potential = "bump:radius=1";
  auto* ck = make_subcommand(app, subs, ExperimentKind::InequalityChecks,
                             "randomized inequality battery: dyadic, a priori, commutator");
  ck->base.h_list = {0.2, 0.1, 0.05};

  CLI11_PARSE(app, argc, argv);
  if (info->parsed()) return print_info();
  try {
    for (const auto& s : subs)
      if (s->app->parsed()) return latcont::run_experiment(build_config(*s), std::cerr);
  } catch (const latcont::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
