#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "blockprop/abm.hpp"
#include "blockprop/aobi.hpp"
#include "blockprop/epidemic.hpp"
#include "blockprop/evogame.hpp"

namespace blockprop::io {

/// Fixed-width-independent numeric formatting; the same value always prints
/// the same bytes, which the reproducibility contract relies on.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  return out;
}

inline void write_tau_sweep_csv(const std::string& path,
                                const std::vector<std::pair<double, aobi::AobiBreakdown>>& sweep) {
  auto out = open_out(path);
  out << "tau,monitoring_s,validation_s,communication_s,total_s,rounds,branch\n";
  for (const auto& [tau, b] : sweep) {
    out << fmt(tau) << ',' << fmt(b.monitoring_term) << ',' << fmt(b.validation_term) << ','
        << fmt(b.communication_term) << ',' << fmt(b.total) << ',' << b.rounds.rounds << ','
        << aobi::to_string(b.rounds.branch) << '\n';
  }
}

inline void write_trajectory_csv(const std::string& path, const epidemic::EpidemicTrajectory& tr,
                                 std::size_t stride = 1) {
  if (stride == 0) stride = 1;
  auto out = open_out(path);
  out << "t,i,s,u,r,e\n";
  for (std::size_t i = 0; i < tr.times.size(); i += stride) {
    const auto& s = tr.states[i];
    out << fmt(tr.times[i]) << ',' << fmt(s.ignorant) << ',' << fmt(s.spreader) << ','
        << fmt(s.unspreader) << ',' << fmt(s.refuser) << ',' << fmt(s.evildoer) << '\n';
  }
  // always keep the terminal point
  if ((tr.times.size() - 1) % stride != 0) {
    const auto& s = tr.states.back();
    out << fmt(tr.times.back()) << ',' << fmt(s.ignorant) << ',' << fmt(s.spreader) << ','
        << fmt(s.unspreader) << ',' << fmt(s.refuser) << ',' << fmt(s.evildoer) << '\n';
  }
}

inline void write_surface_csv(const std::string& path, const epidemic::ConsensusSurface& s) {
  auto out = open_out(path);
  out << epidemic::to_string(s.axis1) << '\\' << epidemic::to_string(s.axis2);
  for (double v : s.axis2_values) out << ',' << fmt(v);
  out << '\n';
  for (std::size_t i1 = 0; i1 < s.axis1_values.size(); ++i1) {
    out << fmt(s.axis1_values[i1]);
    for (std::size_t i2 = 0; i2 < s.axis2_values.size(); ++i2) out << ',' << fmt(s.at(i1, i2));
    out << '\n';
  }
}

/// Replicator trajectory; the epoch column counts reporting epochs, one per
/// time unit of the flow (twenty integrator steps).
inline void write_game_trajectory_csv(const std::string& path, const evogame::GameSolution& sol) {
  auto out = open_out(path);
  out << "epoch,x,y\n";
  const double per_step = evogame::kGameStep;
  for (std::size_t i = 0; i < sol.trajectory.size(); ++i) {
    out << fmt(static_cast<double>(i) * per_step) << ',' << fmt(sol.trajectory[i].x) << ','
        << fmt(sol.trajectory[i].y) << '\n';
  }
}

inline nlohmann::json equilibria_json(const std::vector<evogame::EquilibriumReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    arr.push_back({{"point", {r.point.x, r.point.y}},
                   {"det", r.det_j},
                   {"tr", r.tr_j},
                   {"class", evogame::to_string(r.classification)}});
  }
  return arr;
}

inline void write_equilibria_json(const std::string& path,
                                  const std::vector<evogame::EquilibriumReport>& reports) {
  auto out = open_out(path);
  out << equilibria_json(reports).dump(2) << '\n';
}

inline void write_sim_trace_csv(const std::string& path, const abm::SimTrace& tr) {
  auto out = open_out(path);
  out << "epoch,count_i,count_s,count_u,count_r,count_e,p_f_effective,transmissions\n";
  for (std::size_t e = 0; e < tr.epochs.size(); ++e) {
    const auto& r = tr.epochs[e];
    out << e << ',' << r.count_ignorant << ',' << r.count_spreader << ',' << r.count_unspreader
        << ',' << r.count_refuser << ',' << r.count_evildoer << ',' << fmt(r.p_f_effective) << ','
        << r.transmissions << '\n';
  }
}

inline void write_run_manifest_json(const std::string& path, const abm::SimTrace& tr,
                                    const PropagationProbabilities& probs) {
  nlohmann::json j{
      {"seed", tr.seed},
      {"n", tr.n},
      {"k", tr.k},
      {"mechanism", tr.mechanism},
      {"contacts", tr.contacts == abm::ContactModel::StaticGraph ? "static_graph"
                                                                 : "per_epoch_random"},
      {"probs", {{"p_f", probs.p_f}, {"p_e", probs.p_e}, {"p_r", probs.p_r}, {"p_i", probs.p_i}}},
      {"rng_algorithm", tr.rng_algorithm},
      {"epochs", tr.epochs.empty() ? 0 : tr.epochs.size() - 1}};
  if (tr.empirical_aobi_s) j["empirical_aobi_s"] = *tr.empirical_aobi_s;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

inline void write_mechanism_series_csv(const std::string& path,
                                       const abm::MechanismSeries& series) {
  auto out = open_out(path);
  out << "epoch,forward_probability,refusers\n";
  for (std::size_t e = 0; e < series.mean_forward_probability.size(); ++e) {
    out << e << ',' << fmt(series.mean_forward_probability[e]) << ','
        << fmt(series.mean_refusers[e]) << '\n';
  }
}

}  // namespace blockprop::io
