#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "blockprop/abm.hpp"
#include "blockprop/aobi.hpp"
#include "blockprop/epidemic.hpp"
#include "blockprop/evogame.hpp"
#include "blockprop/io.hpp"
#include "blockprop/params.hpp"

namespace blockprop::experiments {

inline constexpr const char* kArtifactVersion = "1.0.0";

enum class Kind { AobiSweep, EpidemicRun, SteadyStateSurface, GamePortrait, AbmRun, MechanismCompare };

inline const char* to_string(Kind k) {
  switch (k) {
    case Kind::AobiSweep: return "aobi_sweep";
    case Kind::EpidemicRun: return "epidemic_run";
    case Kind::SteadyStateSurface: return "steady_state_surface";
    case Kind::GamePortrait: return "game_portrait";
    case Kind::AbmRun: return "abm_run";
    case Kind::MechanismCompare: return "mechanism_compare";
  }
  return "?";
}

/// Everything a named experiment needs. Kind-specific fields are ignored by
/// the other kinds; validate_spec checks the ones the kind requires.
struct ExperimentSpec {
  std::string name;
  Kind kind = Kind::AobiSweep;
  std::string output_dir = "out";
  std::vector<std::uint64_t> seeds;

  // closed-form sweeps
  NetworkParams net;
  std::vector<double> tau_grid;
  std::vector<double> omega_grid;          // one sweep file per entry when set
  std::vector<std::int64_t> n_grid;        // likewise
  std::vector<std::int64_t> k_grid;        // likewise

  // propagation dynamics
  PropagationProbabilities probs;
  std::vector<double> pf_grid;             // one trajectory per entry when set
  std::vector<double> pr_grid;             // likewise
  std::optional<epidemic::StateDensities> start;  // default: single seeded spreader
  double step = epidemic::kDefaultStep;
  double horizon = epidemic::kDefaultHorizon;
  std::size_t csv_stride = 25;             // thin dense trajectories for plotting

  // steady-state surface
  epidemic::ProbAxis axis1 = epidemic::ProbAxis::Forwarding;
  epidemic::ProbAxis axis2 = epidemic::ProbAxis::Immunity;
  std::vector<double> axis1_values;
  std::vector<double> axis2_values;

  // evolutionary game
  PayoffParams pay = PayoffParams::from_deltas(0.3, 0.5, 0.2, 1.0, 0.1);
  std::vector<evogame::GameState> starts;

  // agent runs
  std::int64_t epochs = 60;
  abm::ContactModel contacts = abm::ContactModel::PerEpochRandom;
  std::vector<abm::Mechanism> mechanisms;
};

inline bool is_stochastic(Kind k) { return k == Kind::AbmRun || k == Kind::MechanismCompare; }

inline void validate_spec(const ExperimentSpec& s) {
  if (s.name.empty()) throw ValidationError("experiment spec: name must not be empty");
  if (s.output_dir.empty()) throw ValidationError("experiment spec: output_dir must not be empty");
  if (is_stochastic(s.kind) && s.seeds.empty())
    throw ValidationError("experiment spec '" + s.name + "': stochastic kind needs seeds");
  switch (s.kind) {
    case Kind::AobiSweep:
      if (s.tau_grid.empty()) throw ValidationError("aobi sweep '" + s.name + "': tau_grid is empty");
      validate(s.net);
      break;
    case Kind::EpidemicRun:
      validate_probabilities(s.probs);
      if (!(s.step > 0) || s.horizon < s.step)
        throw ValidationError("epidemic run '" + s.name + "': bad step/horizon");
      break;
    case Kind::SteadyStateSurface:
      if (s.axis1_values.empty() || s.axis2_values.empty())
        throw ValidationError("surface '" + s.name + "': axis grids must not be empty");
      if (s.axis1 == s.axis2) throw ValidationError("surface '" + s.name + "': axes must differ");
      break;
    case Kind::GamePortrait:
      s.pay.check();
      if (s.starts.empty()) throw ValidationError("portrait '" + s.name + "': starts are empty");
      break;
    case Kind::AbmRun:
      validate_probabilities(s.probs);
      if (s.epochs < 0) throw ValidationError("abm run '" + s.name + "': epochs must be >= 0");
      break;
    case Kind::MechanismCompare:
      validate_probabilities(s.probs);
      if (s.mechanisms.empty())
        throw ValidationError("compare '" + s.name + "': mechanism list is empty");
      break;
  }
}

struct RunManifest {
  std::string name;
  std::vector<std::string> files;  // paths written, relative to output_dir
  double wall_time_ms = 0.0;
};

namespace detail {

inline std::string num_tag(double v) {
  std::string s = io::fmt(v);
  for (char& c : s)
    if (c == '.') c = 'p';
  return s;
}

inline nlohmann::json spec_echo(const ExperimentSpec& s) {
  nlohmann::json j{{"name", s.name},
                   {"kind", to_string(s.kind)},
                   {"artifact_version", kArtifactVersion},
                   {"rng_algorithm", CounterRng::algorithm()}};
  j["seeds"] = s.seeds;
  switch (s.kind) {
    case Kind::AobiSweep:
      j["net"] = {{"n_miners", s.net.n_miners},
                  {"n_base_stations", s.net.n_base_stations},
                  {"k_adjacent", s.net.k_adjacent},
                  {"cloud_compute", s.net.cloud_compute},
                  {"b_max", s.net.b_max},
                  {"t_pack", s.net.t_pack},
                  {"t_mine", s.net.t_mine},
                  {"r_validate", s.net.r_validate},
                  {"p_size", s.net.p_size},
                  {"r_c", s.net.r_c},
                  {"bandwidth_w", s.net.bandwidth_w},
                  {"omega_bar", s.net.omega_bar},
                  {"tau", s.net.tau},
                  {"lambda_rate", s.net.lambda_rate}};
      j["tau_grid_size"] = s.tau_grid.size();
      break;
    case Kind::EpidemicRun:
    case Kind::AbmRun:
    case Kind::MechanismCompare:
      j["probs"] = {{"p_f", s.probs.p_f}, {"p_e", s.probs.p_e}, {"p_r", s.probs.p_r}, {"p_i", s.probs.p_i}};
      j["epochs"] = s.epochs;
      j["contacts"] = s.contacts == abm::ContactModel::StaticGraph ? "static_graph" : "per_epoch_random";
      j["n"] = s.net.n_miners;
      j["k"] = s.net.k_adjacent;
      break;
    case Kind::SteadyStateSurface:
      j["axis1"] = epidemic::to_string(s.axis1);
      j["axis2"] = epidemic::to_string(s.axis2);
      break;
    case Kind::GamePortrait:
      j["pay"] = {{"extra_reward", s.pay.extra_reward},
                  {"delta_p", s.pay.delta_p},
                  {"delta_u", s.pay.delta_u},
                  {"punishment_risk", s.pay.punishment_risk},
                  {"epsilon", s.pay.epsilon}};
      j["starts"] = s.starts.size();
      break;
  }
  return j;
}

}  // namespace detail

/// Execute one experiment, writing deterministic data files plus a manifest.
/// Re-running an identical spec rewrites byte-identical data; only the
/// manifest's wall time differs.
inline RunManifest run_experiment(const ExperimentSpec& spec) {
  validate_spec(spec);
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  std::error_code ec;
  fs::create_directories(spec.output_dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + spec.output_dir + "'");
  {
    std::ofstream probe(fs::path(spec.output_dir) / ".write_probe");
    if (!probe) throw ValidationError("output directory '" + spec.output_dir + "' is not writable");
  }
  fs::remove(fs::path(spec.output_dir) / ".write_probe", ec);

  RunManifest manifest;
  manifest.name = spec.name;
  auto emit = [&](const std::string& rel) { manifest.files.push_back(rel); };
  auto path_of = [&](const std::string& rel) {
    return (fs::path(spec.output_dir) / rel).string();
  };

  switch (spec.kind) {
    case Kind::AobiSweep: {
      auto write_variant = [&](const NetworkParams& p, const std::string& rel) {
        io::write_tau_sweep_csv(path_of(rel), aobi::aobi_tau_sweep(p, spec.tau_grid));
        emit(rel);
      };
      if (!spec.omega_grid.empty()) {
        for (double w : spec.omega_grid) {
          NetworkParams p = spec.net;
          p.omega_bar = w;
          write_variant(p, spec.name + "_omega" + detail::num_tag(w) + ".csv");
        }
      } else if (!spec.n_grid.empty()) {
        for (std::int64_t n : spec.n_grid) {
          NetworkParams p = spec.net;
          p.n_miners = n;
          write_variant(p, spec.name + "_n" + std::to_string(n) + ".csv");
        }
      } else if (!spec.k_grid.empty()) {
        for (std::int64_t k : spec.k_grid) {
          NetworkParams p = spec.net;
          p.k_adjacent = k;
          write_variant(p, spec.name + "_k" + std::to_string(k) + ".csv");
        }
      } else {
        write_variant(spec.net, spec.name + ".csv");
      }
      break;
    }

    case Kind::EpidemicRun: {
      const auto start =
          spec.start ? *spec.start : epidemic::initial_densities(spec.net.n_miners);
      auto run_one = [&](const PropagationProbabilities& p, const std::string& rel) {
        const auto tr = epidemic::integrate(start, p, spec.net.k_adjacent, spec.horizon, spec.step);
        io::write_trajectory_csv(path_of(rel), tr, spec.csv_stride);
        emit(rel);
      };
      if (!spec.pf_grid.empty()) {
        for (double v : spec.pf_grid) {
          PropagationProbabilities p = spec.probs;
          p.p_f = v;
          run_one(p, spec.name + "_pf" + detail::num_tag(v) + ".csv");
        }
      } else if (!spec.pr_grid.empty()) {
        for (double v : spec.pr_grid) {
          PropagationProbabilities p = spec.probs;
          p.p_r = v;
          run_one(p, spec.name + "_pr" + detail::num_tag(v) + ".csv");
        }
      } else {
        run_one(spec.probs, spec.name + ".csv");
      }
      break;
    }

    case Kind::SteadyStateSurface: {
      const auto surf = epidemic::consensus_level_surface(spec.probs, spec.axis1, spec.axis1_values,
                                                          spec.axis2, spec.axis2_values);
      const std::string rel = spec.name + ".csv";
      io::write_surface_csv(path_of(rel), surf);
      emit(rel);
      break;
    }

    case Kind::GamePortrait: {
      int idx = 0;
      for (const auto& st : spec.starts) {
        const auto sol = evogame::solve_game(st.x, st.y, spec.pay);
        const std::string rel = spec.name + "_start" + std::to_string(idx++) + ".csv";
        io::write_game_trajectory_csv(path_of(rel), sol);
        emit(rel);
      }
      const std::string eq = spec.name + "_equilibria.json";
      io::write_equilibria_json(path_of(eq), evogame::classify_equilibria(spec.pay));
      emit(eq);
      break;
    }

    case Kind::AbmRun: {
      const auto net = abm::build_network(spec.net.n_miners, spec.net.k_adjacent, spec.seeds.front());
      std::vector<std::vector<double>> mean(spec.epochs + 1, std::vector<double>(5, 0.0));
      for (std::uint64_t seed : spec.seeds) {
        const auto tr = abm::run_simulation(net, spec.probs, nullptr, spec.epochs, seed, spec.contacts);
        const std::string rel = spec.name + "_seed" + std::to_string(seed) + ".csv";
        io::write_sim_trace_csv(path_of(rel), tr);
        emit(rel);
        const std::string mrel = spec.name + "_seed" + std::to_string(seed) + "_manifest.json";
        io::write_run_manifest_json(path_of(mrel), tr, spec.probs);
        emit(mrel);
        for (std::int64_t e = 0; e <= spec.epochs; ++e) {
          const auto& r = tr.epochs[e];
          const double n = static_cast<double>(net.n);
          mean[e][0] += r.count_ignorant / n;
          mean[e][1] += r.count_spreader / n;
          mean[e][2] += r.count_unspreader / n;
          mean[e][3] += r.count_refuser / n;
          mean[e][4] += r.count_evildoer / n;
        }
      }
      const std::string rel = spec.name + "_mean_densities.csv";
      auto out = io::open_out(path_of(rel));
      out << "epoch,i,s,u,r,e\n";
      const auto ns = static_cast<double>(spec.seeds.size());
      for (std::int64_t e = 0; e <= spec.epochs; ++e) {
        out << e;
        for (int c = 0; c < 5; ++c) out << ',' << io::fmt(mean[e][c] / ns);
        out << '\n';
      }
      emit(rel);
      break;
    }

    case Kind::MechanismCompare: {
      const auto net = abm::build_network(spec.net.n_miners, spec.net.k_adjacent, spec.seeds.front());
      const auto series =
          abm::compare_mechanisms(net, spec.probs, spec.mechanisms, spec.epochs, spec.seeds, spec.contacts);
      for (const auto& s : series) {
        const std::string rel = spec.name + "_" + s.name + ".csv";
        io::write_mechanism_series_csv(path_of(rel), s);
        emit(rel);
      }
      break;
    }
  }

  const auto t1 = std::chrono::steady_clock::now();
  manifest.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  nlohmann::json mj = detail::spec_echo(spec);
  mj["files"] = manifest.files;
  mj["wall_time_ms"] = manifest.wall_time_ms;
  auto out = io::open_out(path_of(spec.name + "_manifest.json"));
  out << mj.dump(2) << '\n';
  return manifest;
}

// ---------------------------------------------------------------------------
// Preset catalog

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

inline std::vector<std::uint64_t> default_seeds(int n) {
  std::vector<std::uint64_t> s(n);
  for (int i = 0; i < n; ++i) s[i] = static_cast<std::uint64_t>(i + 1);
  return s;
}

inline std::vector<evogame::GameState> interior_grid(int per_axis) {
  std::vector<evogame::GameState> g;
  for (int i = 1; i <= per_axis; ++i)
    for (int j = 1; j <= per_axis; ++j)
      g.push_back({static_cast<double>(i) / (per_axis + 1.0),
                   static_cast<double>(j) / (per_axis + 1.0)});
  return g;
}


/// Payoffs used by the incentive-mechanism presets. The propagation cost is
/// 0.2; the incentive strength I/M picks the propagation reward.
inline PayoffParams bpim_payoffs(double incentive_strength) {
  const double cost = 0.2;
  return PayoffParams::from_raw(/*reward_validate=*/0.5, /*cost_validate=*/0.0,
                                /*reward_propagate=*/incentive_strength * cost,
                                /*cost_propagate=*/cost,
                                /*extra_reward=*/0.2, /*punishment_risk=*/1.0,
                                /*epsilon=*/0.1);
}

/// Built-in experiments reproducing the headline result structure. Stable
/// names; every spec round-trips through validate_spec.
inline std::vector<ExperimentSpec> list_experiments() {
  std::vector<ExperimentSpec> out;

  // strategy portraits under the three payoff regimes
  {
    ExperimentSpec s;
    s.name = "fig3a";
    s.kind = Kind::GamePortrait;
    s.pay = PayoffParams::from_deltas(0.3, 0.5, 0.2, 1.0, 0.1);
    s.starts = interior_grid(5);
    out.push_back(s);
  }
  {
    ExperimentSpec s;
    s.name = "fig3b";
    s.kind = Kind::GamePortrait;
    s.pay = PayoffParams::from_deltas(0.1, 0.6, -0.3, 2.0, 0.1);  // threshold ~0.556
    s.starts.clear();
    for (double x0 : {0.1, 0.3, 0.5, 0.7, 0.9})
      for (double y0 : {0.7, 0.8, 0.9}) s.starts.push_back({x0, y0});
    out.push_back(s);
  }
  {
    ExperimentSpec s;
    s.name = "fig3c";
    s.kind = Kind::GamePortrait;
    s.pay = PayoffParams::from_deltas(0.05, 0.3, -0.6, 1.0, 0.1);  // threshold > 1
    s.starts = interior_grid(5);
    out.push_back(s);
  }

  // mechanism comparison
  {
    ExperimentSpec s;
    s.name = "fig4";
    s.kind = Kind::MechanismCompare;
    s.net.n_miners = 4000;
    s.net.k_adjacent = 3;
    s.probs = {0.2, 0.1, 0.3, 0.2};
    s.epochs = 60;
    s.seeds = default_seeds(30);
    s.mechanisms = {abm::Gossip{0.2}, abm::ProbabilisticFlooding{},
                    abm::Greedy{bpim_payoffs(2.0), 0.2}, abm::Bpim{bpim_payoffs(2.0), 0.2, 0.2}};
    out.push_back(s);
  }

  // density curves vs forwarding probability
  auto density_preset = [](const std::string& name) {
    ExperimentSpec s;
    s.name = name;
    s.kind = Kind::EpidemicRun;
    s.net.n_miners = 4000;
    s.net.k_adjacent = 3;
    s.probs = {0.5, 0.1, 0.3, 0.2};
    s.pf_grid = {0.3, 0.5, 0.7, 0.9};
    s.horizon = 100.0;
    return s;
  };
  out.push_back(density_preset("fig5"));   // refusers
  out.push_back(density_preset("fig6"));   // spreaders

  // minimum average age vs packing rate
  {
    ExperimentSpec s;
    s.name = "fig7";
    s.kind = Kind::AobiSweep;
    s.net.cloud_compute = 1e19;  // condition value ~0.03: monotone regime
    s.tau_grid = linspace(0.5, 5.0, 46);
    s.omega_grid = {0.6, 0.7, 0.8, 0.9, 1.0};
    out.push_back(s);
  }
  {
    ExperimentSpec s;
    s.name = "fig8";
    s.kind = Kind::AobiSweep;
    s.tau_grid = linspace(0.5, 5.0, 46);
    s.omega_grid = {0.6, 0.7, 0.8, 0.9, 1.0};
    out.push_back(s);
  }
  {
    ExperimentSpec s;
    s.name = "fig9";
    s.kind = Kind::AobiSweep;
    s.tau_grid = linspace(0.5, 5.0, 46);
    s.n_grid = {1000, 2000, 3000, 4000};
    out.push_back(s);
  }
  {
    ExperimentSpec s;
    s.name = "fig10";
    s.kind = Kind::AobiSweep;
    s.net.n_miners = 1000;
    s.net.omega_bar = 0.5;
    s.tau_grid = linspace(0.5, 5.0, 46);
    s.k_grid = {2, 3, 4, 5, 6};  // k = 2 lands on the omega*k = 1 branch
    out.push_back(s);
  }

  // unspreaders vs recovery probability
  {
    ExperimentSpec s;
    s.name = "fig11";
    s.kind = Kind::EpidemicRun;
    s.net.n_miners = 4000;
    s.net.k_adjacent = 3;
    s.probs = {0.5, 0.1, 0.3, 0.2};
    s.pr_grid = {0.1, 0.3, 0.5, 0.7};
    s.horizon = 100.0;
    out.push_back(s);
  }
  // evildoers vs forwarding probability
  out.push_back(density_preset("fig12"));

  // consensus-level surfaces, one per fixed probability
  {
    ExperimentSpec s;
    s.name = "consensus-surface-pe";
    s.kind = Kind::SteadyStateSurface;
    s.probs = {0.5, 0.1, 0.3, 0.2};
    s.axis1 = epidemic::ProbAxis::Forwarding;
    s.axis2 = epidemic::ProbAxis::Immunity;
    s.axis1_values = linspace(0.05, 0.95, 19);
    s.axis2_values = linspace(0.05, 0.95, 19);
    out.push_back(s);
  }
  {
    ExperimentSpec s;
    s.name = "consensus-surface-pi";
    s.kind = Kind::SteadyStateSurface;
    s.probs = {0.5, 0.1, 0.3, 0.2};
    s.axis1 = epidemic::ProbAxis::Forwarding;
    s.axis2 = epidemic::ProbAxis::Evil;
    s.axis1_values = linspace(0.05, 0.95, 19);
    s.axis2_values = linspace(0.05, 0.95, 19);
    out.push_back(s);
  }
  {
    ExperimentSpec s;
    s.name = "consensus-surface-pf";
    s.kind = Kind::SteadyStateSurface;
    s.probs = {0.5, 0.1, 0.3, 0.2};
    s.axis1 = epidemic::ProbAxis::Evil;
    s.axis2 = epidemic::ProbAxis::Immunity;
    s.axis1_values = linspace(0.05, 0.95, 19);
    s.axis2_values = linspace(0.05, 0.95, 19);
    out.push_back(s);
  }

  // agent validation run at the canonical probability point
  {
    ExperimentSpec s;
    s.name = "abm-validation";
    s.kind = Kind::AbmRun;
    s.net.n_miners = 4000;
    s.net.k_adjacent = 3;
    s.probs = {0.5, 0.1, 0.3, 0.2};
    s.epochs = 80;
    s.seeds = default_seeds(30);
    out.push_back(s);
  }

  return out;
}

inline ExperimentSpec find_preset(const std::string& name) {
  for (auto& s : list_experiments())
    if (s.name == name) return s;
  throw ValidationError("unknown preset '" + name + "'");
}

}  // namespace blockprop::experiments
