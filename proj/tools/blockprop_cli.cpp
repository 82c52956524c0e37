// Experiment runner: closed-form age sweeps, propagation dynamics, the
// evolutionary game, and the seeded agent simulation, all emitting
// figure-ready CSV plus JSON manifests.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blockprop/experiments.hpp"

namespace bp = blockprop;
namespace ex = blockprop::experiments;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::uint64_t> seeds;
  double step = -1.0;
  double horizon = -1.0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "network parameter file (key=value or JSON)");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--seeds", o.seeds, "seed list")->delimiter(',');
  cmd->add_option("--step", o.step, "integrator step");
  cmd->add_option("--horizon", o.horizon, "integration horizon");
}

/// Flags override config-file keys, which override preset defaults.
void apply_common(ex::ExperimentSpec& spec, const CommonOpts& o) {
  if (!o.config_path.empty()) spec.net = bp::load_network_params(o.config_path, spec.net);
  spec.output_dir = o.out_dir;
  if (!o.seeds.empty()) spec.seeds = o.seeds;
  if (o.step > 0) spec.step = o.step;
  if (o.horizon > 0) spec.horizon = o.horizon;
}

int run(const ex::ExperimentSpec& spec) {
  const auto manifest = ex::run_experiment(spec);
  std::printf("%s: wrote %zu files to %s (%.1f ms)\n", spec.name.c_str(), manifest.files.size(),
              spec.output_dir.c_str(), manifest.wall_time_ms);
  return 0;
}

std::vector<double> parse_grid(const std::string& text) {
  // "lo:hi:count" or comma list
  std::vector<double> out;
  const auto c1 = text.find(':');
  if (c1 != std::string::npos) {
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos) throw bp::ValidationError("grid must be lo:hi:count");
    const double lo = std::stod(text.substr(0, c1));
    const double hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    const int n = std::stoi(text.substr(c2 + 1));
    if (n < 1) throw bp::ValidationError("grid count must be >= 1");
    for (int i = 0; i < n; ++i)
      out.push_back(n == 1 ? lo : lo + (hi - lo) * i / static_cast<double>(n - 1));
    return out;
  }
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    out.push_back(std::stod(text.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"block propagation modeling toolkit"};
  app.require_subcommand(1);

  CommonOpts common;

  // aobi-sweep
  auto* sweep = app.add_subcommand("aobi-sweep", "minimum average AoBI over a packing-rate grid");
  std::string tau_grid_text = "0.5:5:46";
  std::vector<double> sweep_omegas;
  sweep->add_option("--tau-grid", tau_grid_text, "tau grid, lo:hi:count or comma list");
  sweep->add_option("--omegas", sweep_omegas, "one output per forwarding density")->delimiter(',');
  add_common(sweep, common);

  // epidemic
  auto* epi = app.add_subcommand("epidemic", "integrate the five-state propagation model");
  double pf = 0.5, pe = 0.1, pi = 0.2, pr = 0.3;
  std::vector<double> pf_grid, pr_grid;
  epi->add_option("--pf", pf, "forwarding probability");
  epi->add_option("--pe", pe, "evil probability");
  epi->add_option("--pi", pi, "immunity probability");
  epi->add_option("--pr", pr, "recovery probability");
  epi->add_option("--pf-grid", pf_grid, "one trajectory per forwarding probability")->delimiter(',');
  epi->add_option("--pr-grid", pr_grid, "one trajectory per recovery probability")->delimiter(',');
  add_common(epi, common);

  // steady-state
  auto* ss = app.add_subcommand("steady-state", "consensus-level surface over two probabilities");
  std::string fixed_axis = "p_e";
  int ss_points = 19;
  ss->add_option("--fixed", fixed_axis, "probability held fixed: p_f, p_e, or p_i");
  ss->add_option("--points", ss_points, "grid points per axis");
  ss->add_option("--pf", pf, "fixed forwarding probability");
  ss->add_option("--pe", pe, "fixed evil probability");
  ss->add_option("--pi", pi, "fixed immunity probability");
  add_common(ss, common);

  // evogame
  auto* game = app.add_subcommand("evogame", "replicator trajectories and equilibrium reports");
  double di = 0.3, dp = 0.5, du = 0.2, risk = 1.0, eps = 0.1;
  int grid_per_axis = 5;
  game->add_option("--di", di, "extra propagation reward");
  game->add_option("--dp", dp, "basic validation reward");
  game->add_option("--du", du, "basic propagation reward");
  game->add_option("--risk", risk, "punishment risk");
  game->add_option("--eps", eps, "unit cost of punishment risk");
  game->add_option("--grid", grid_per_axis, "interior starts per axis");
  add_common(game, common);

  // abm
  auto* abm_cmd = app.add_subcommand("abm", "seeded agent simulation on the miner network");
  std::int64_t epochs = 80;
  std::string contacts = "mobile";
  abm_cmd->add_option("--pf", pf, "forwarding probability");
  abm_cmd->add_option("--pe", pe, "evil probability");
  abm_cmd->add_option("--pi", pi, "immunity probability");
  abm_cmd->add_option("--pr", pr, "recovery probability");
  abm_cmd->add_option("--epochs", epochs, "epochs to simulate");
  abm_cmd->add_option("--contacts", contacts, "static or mobile contact fabric");
  add_common(abm_cmd, common);

  // compare
  auto* cmp = app.add_subcommand("compare", "forwarding probability under the four mechanisms");
  cmp->add_option("--epochs", epochs, "epochs to simulate");
  add_common(cmp, common);

  // preset
  auto* preset = app.add_subcommand("preset", "run a named built-in experiment");
  std::string preset_name;
  preset->add_option("name", preset_name, "preset name (see list)")->required();
  add_common(preset, common);

  // list
  auto* list = app.add_subcommand("list", "catalog of built-in experiments");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& s : ex::list_experiments())
        std::printf("%-22s %s\n", s.name.c_str(), ex::to_string(s.kind));
      return 0;
    }

    ex::ExperimentSpec spec;
    if (sweep->parsed()) {
      spec.name = "aobi-sweep";
      spec.kind = ex::Kind::AobiSweep;
      spec.tau_grid = parse_grid(tau_grid_text);
      spec.omega_grid = sweep_omegas;
    } else if (epi->parsed()) {
      spec.name = "epidemic";
      spec.kind = ex::Kind::EpidemicRun;
      spec.probs = {pf, pe, pr, pi};
      spec.pf_grid = pf_grid;
      spec.pr_grid = pr_grid;
    } else if (ss->parsed()) {
      spec.name = "steady-state";
      spec.kind = ex::Kind::SteadyStateSurface;
      spec.probs = {pf, pe, pr, pi};
      const auto pts = ex::linspace(0.05, 0.95, ss_points);
      if (fixed_axis == "p_e") {
        spec.axis1 = bp::epidemic::ProbAxis::Forwarding;
        spec.axis2 = bp::epidemic::ProbAxis::Immunity;
      } else if (fixed_axis == "p_i") {
        spec.axis1 = bp::epidemic::ProbAxis::Forwarding;
        spec.axis2 = bp::epidemic::ProbAxis::Evil;
      } else if (fixed_axis == "p_f") {
        spec.axis1 = bp::epidemic::ProbAxis::Evil;
        spec.axis2 = bp::epidemic::ProbAxis::Immunity;
      } else {
        throw bp::ValidationError("--fixed must be p_f, p_e, or p_i");
      }
      spec.axis1_values = pts;
      spec.axis2_values = pts;
    } else if (game->parsed()) {
      spec.name = "evogame";
      spec.kind = ex::Kind::GamePortrait;
      spec.pay = bp::PayoffParams::from_deltas(di, dp, du, risk, eps);
      spec.starts = ex::interior_grid(grid_per_axis);
    } else if (abm_cmd->parsed()) {
      spec.name = "abm";
      spec.kind = ex::Kind::AbmRun;
      spec.probs = {pf, pe, pr, pi};
      spec.epochs = epochs;
      if (contacts == "static") spec.contacts = bp::abm::ContactModel::StaticGraph;
      else if (contacts == "mobile") spec.contacts = bp::abm::ContactModel::PerEpochRandom;
      else throw bp::ValidationError("--contacts must be static or mobile");
      if (spec.seeds.empty()) spec.seeds = ex::default_seeds(1);
    } else if (cmp->parsed()) {
      spec = ex::find_preset("fig4");
      spec.name = "compare";
      spec.epochs = epochs;
    } else if (preset->parsed()) {
      spec = ex::find_preset(preset_name);
    } else {
      return 1;
    }

    if (spec.seeds.empty() && ex::is_stochastic(spec.kind)) spec.seeds = ex::default_seeds(30);
    apply_common(spec, common);
    return run(spec);
  } catch (const bp::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
