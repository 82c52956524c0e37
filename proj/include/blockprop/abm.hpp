#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "blockprop/aobi.hpp"
#include "blockprop/evogame.hpp"
#include "blockprop/params.hpp"
#include "blockprop/rng.hpp"

namespace blockprop::abm {

enum class MinerState : std::uint8_t { Ignorant, Spreader, Unspreader, Refuser, Evildoer };

/// Random k-regular miner graph. Adjacency is flat: neighbors of miner m live
/// at [m*k, (m+1)*k).
struct MinerNetwork {
  std::int64_t n = 0;
  std::int64_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::int32_t> adjacency;

  std::int32_t neighbor(std::int64_t miner, std::int64_t j) const {
    return adjacency[miner * k + j];
  }
};

/// Configuration-model pairing with whole-shuffle rejection of self-loops and
/// duplicate edges. Identical (n, k, seed) always yields identical adjacency.
inline MinerNetwork build_network(std::int64_t n, std::int64_t k, std::uint64_t seed) {
  if (n < 2) throw ValidationError("build_network: need n >= 2");
  if (k < 1 || k >= n) throw ValidationError("build_network: need 1 <= k < n");
  if ((n * k) % 2 != 0) throw ValidationError("build_network: n * k must be even");

  CounterRng rng(seed);
  std::vector<std::int32_t> stubs(static_cast<std::size_t>(n * k));
  for (std::int64_t m = 0; m < n; ++m)
    for (std::int64_t j = 0; j < k; ++j) stubs[m * k + j] = static_cast<std::int32_t>(m);

  constexpr int kMaxAttempts = 400;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    for (std::size_t i = stubs.size() - 1; i > 0; --i)
      std::swap(stubs[i], stubs[rng.below(i + 1)]);

    bool ok = true;
    std::vector<std::uint64_t> edge_keys;
    edge_keys.reserve(stubs.size() / 2);
    for (std::size_t i = 0; i + 1 < stubs.size() && ok; i += 2) {
      const auto a = stubs[i], b = stubs[i + 1];
      if (a == b) { ok = false; break; }
      const auto lo = static_cast<std::uint64_t>(std::min(a, b));
      const auto hi = static_cast<std::uint64_t>(std::max(a, b));
      edge_keys.push_back(lo * static_cast<std::uint64_t>(n) + hi);
    }
    if (ok) {
      std::sort(edge_keys.begin(), edge_keys.end());
      ok = std::adjacent_find(edge_keys.begin(), edge_keys.end()) == edge_keys.end();
    }
    if (!ok) continue;

    MinerNetwork net;
    net.n = n;
    net.k = k;
    net.seed = seed;
    net.adjacency.assign(static_cast<std::size_t>(n * k), -1);
    std::vector<std::int32_t> fill(static_cast<std::size_t>(n), 0);
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
      const auto a = stubs[i], b = stubs[i + 1];
      net.adjacency[a * k + fill[a]++] = b;
      net.adjacency[b * k + fill[b]++] = a;
    }
    return net;
  }
  throw ValidationError("build_network: pairing failed repeatedly; try a different seed");
}

/// How spreaders meet their k contacts each epoch.
///
/// StaticGraph keeps the fixed adjacency of the MinerNetwork. PerEpochRandom
/// re-draws k distinct partners per spreader per epoch, the contact process
/// the mean-field equations actually describe (mobile miners); the static
/// fabric at k=3 chokes the cascade because one neighbor is always the miner
/// the block arrived from.
enum class ContactModel { StaticGraph, PerEpochRandom };

struct StepResult {
  std::int64_t transmissions = 0;
  std::int64_t useful_contacts = 0;       // contacts that resolved an ignorant
  std::int64_t resolved_to_spreader = 0;  // resolutions that joined the spreaders
};

namespace detail {

/// One synchronous epoch. Phases run against the epoch-start snapshot, in the
/// fixed order: ignorant->evildoer, spreader contacts, immunity conversions,
/// evildoer recovery. forward_prob gives each miner's probability of joining
/// the spreaders when first contacted; newly converted miners act next epoch.
/// feedback, when non-null, receives per-sender useful/redundant contact
/// counts for mechanisms that learn from acknowledgments.
inline StepResult advance_epoch(const MinerNetwork& net, std::vector<MinerState>& states,
                                const PropagationProbabilities& probs,
                                const std::vector<double>& forward_prob, ContactModel contacts,
                                CounterRng& rng,
                                std::vector<std::pair<std::int32_t, std::int32_t>>* feedback) {
  const std::int64_t n = net.n;
  const std::int64_t k = net.k;
  const std::vector<MinerState> old = states;
  std::vector<MinerState>& out = states;

  // Phase 1: round start, ignorants may turn evildoer.
  std::vector<std::uint8_t> turned_evil(static_cast<std::size_t>(n), 0);
  for (std::int64_t m = 0; m < n; ++m) {
    if (old[m] == MinerState::Ignorant && rng.bernoulli(probs.p_e)) {
      out[m] = MinerState::Evildoer;
      turned_evil[m] = 1;
    }
  }

  // Phase 2: every epoch-start spreader pushes the block to its k contacts.
  StepResult res;
  std::vector<std::uint8_t> resolved(static_cast<std::size_t>(n), 0);
  std::vector<std::uint8_t> to_refuser(static_cast<std::size_t>(n), 0);
  std::vector<std::int32_t> scratch(static_cast<std::size_t>(k));
  for (std::int64_t m = 0; m < n; ++m) {
    if (old[m] != MinerState::Spreader) continue;
    const std::int32_t* targets = nullptr;
    if (contacts == ContactModel::StaticGraph) {
      targets = &net.adjacency[m * k];
    } else {
      // k distinct partners, never self; k is small so rejection is cheap
      for (std::int64_t j = 0; j < k; ++j) {
        std::int32_t t;
        bool fresh;
        do {
          t = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(n)));
          fresh = (t != m);
          for (std::int64_t q = 0; q < j && fresh; ++q)
            if (scratch[q] == t) fresh = false;
        } while (!fresh);
        scratch[j] = t;
      }
      targets = scratch.data();
    }
    std::int32_t useful = 0, redundant = 0;
    for (std::int64_t j = 0; j < k; ++j) {
      const std::int32_t t = targets[j];
      ++res.transmissions;
      if (old[t] == MinerState::Ignorant && !turned_evil[t] && !resolved[t]) {
        resolved[t] = 1;
        ++res.useful_contacts;
        ++useful;
        if (rng.bernoulli(forward_prob[t])) {
          out[t] = MinerState::Spreader;
          ++res.resolved_to_spreader;
        } else {
          out[t] = MinerState::Unspreader;
        }
      } else {
        ++redundant;
        if (old[t] == MinerState::Spreader && rng.bernoulli(probs.p_i))
          to_refuser[t] = 1;  // receiving the block again
      }
    }
    if (feedback) feedback->emplace_back(useful, redundant);
  }

  // Phase 3: after the interaction, spreaders and unspreaders may turn immune.
  for (std::int64_t m = 0; m < n; ++m) {
    if (old[m] == MinerState::Spreader && (to_refuser[m] || rng.bernoulli(probs.p_i)))
      out[m] = MinerState::Refuser;
    else if (old[m] == MinerState::Unspreader && rng.bernoulli(probs.p_i))
      out[m] = MinerState::Refuser;
  }

  // Phase 4: round end, evildoers may revert.
  for (std::int64_t m = 0; m < n; ++m)
    if (old[m] == MinerState::Evildoer && rng.bernoulli(probs.p_r))
      out[m] = MinerState::Ignorant;

  return res;
}

}  // namespace detail

/// One epoch with a uniform forwarding probability (probs.p_f) on the static
/// fabric.
inline StepResult step(const MinerNetwork& net, std::vector<MinerState>& states,
                       const PropagationProbabilities& probs, CounterRng& rng,
                       ContactModel contacts = ContactModel::StaticGraph) {
  validate_probabilities(probs);
  if (static_cast<std::int64_t>(states.size()) != net.n)
    throw ValidationError("step: state vector size does not match the network");
  std::vector<double> fp(static_cast<std::size_t>(net.n), probs.p_f);
  return detail::advance_epoch(net, states, probs, fp, contacts, rng, nullptr);
}

// ---------------------------------------------------------------------------
// Propagation mechanisms

/// Fixed forwarding probability; what the plain protocol does today.
struct Gossip {
  double p_fixed = 0.2;
};

/// Per-miner probability adapted multiplicatively from acknowledgment
/// history: up on a useful forward, down on a redundant one. The down rate is
/// small enough that the population never learns itself below its start.
struct ProbabilisticFlooding {
  double learning_rate = 0.05;
  double down_rate = 0.004;
  double p0 = 0.2;
  double p_min = 0.01;
};

/// Myopic best response: forward exactly when the one-shot payoff of
/// forwarding beats withholding under the current estimate of how many peers
/// forward.
struct Greedy {
  PayoffParams pay;
  double y_estimate0 = 0.2;
};

/// Replicator-driven incentive mechanism: the receiver forwarding level from
/// the solved game schedules every miner's probability per epoch.
struct Bpim {
  PayoffParams pay;
  double x0 = 0.2;
  double y0 = 0.2;
};

using Mechanism = std::variant<Gossip, ProbabilisticFlooding, Greedy, Bpim>;

inline std::string mechanism_name(const Mechanism& m) {
  if (std::holds_alternative<Gossip>(m)) return "gossip";
  if (std::holds_alternative<ProbabilisticFlooding>(m)) return "probabilistic_flooding";
  if (std::holds_alternative<Greedy>(m)) return "greedy";
  return "bpim";
}

struct EpochRecord {
  std::int64_t count_ignorant = 0;
  std::int64_t count_spreader = 0;
  std::int64_t count_unspreader = 0;
  std::int64_t count_refuser = 0;
  std::int64_t count_evildoer = 0;
  double p_f_effective = 0.0;
  std::int64_t transmissions = 0;
};

struct SimTrace {
  std::int64_t n = 0;
  std::int64_t k = 0;
  std::uint64_t seed = 0;
  std::string rng_algorithm{CounterRng::algorithm()};
  std::string mechanism = "fixed";
  ContactModel contacts = ContactModel::StaticGraph;
  std::vector<EpochRecord> epochs;            // index 0 is the initial assignment
  std::optional<double> empirical_aobi_s;     // filled once an age is sampled

  bool complete() const {
    return !epochs.empty() && epochs.back().count_spreader == 0 &&
           epochs.back().count_unspreader == 0;
  }
  /// Time-averaged forwarding probability over epochs with live spreaders.
  double realized_forward_density() const {
    double sum = 0.0;
    std::int64_t active = 0;
    for (const auto& e : epochs)
      if (e.count_spreader > 0) { sum += e.p_f_effective; ++active; }
    return active ? sum / static_cast<double>(active) : 0.0;
  }
};

namespace detail {

inline EpochRecord record_counts(const std::vector<MinerState>& states) {
  EpochRecord r;
  for (MinerState s : states) {
    switch (s) {
      case MinerState::Ignorant: ++r.count_ignorant; break;
      case MinerState::Spreader: ++r.count_spreader; break;
      case MinerState::Unspreader: ++r.count_unspreader; break;
      case MinerState::Refuser: ++r.count_refuser; break;
      case MinerState::Evildoer: ++r.count_evildoer; break;
    }
  }
  return r;
}

}  // namespace detail

/// Seeded run from the single-spreader initial assignment. When a mechanism
/// is supplied, it overrides probs.p_f with its own per-miner schedule; the
/// other three probabilities keep acting as given.
inline SimTrace run_simulation(const MinerNetwork& net, const PropagationProbabilities& probs,
                               const Mechanism* mechanism, std::int64_t epochs,
                               std::uint64_t seed,
                               ContactModel contacts = ContactModel::StaticGraph) {
  validate_probabilities(probs);
  if (epochs < 0) throw ValidationError("run_simulation: epochs must be >= 0");
  const std::int64_t n = net.n;

  CounterRng rng(seed);
  std::vector<MinerState> states(static_cast<std::size_t>(n), MinerState::Ignorant);
  states[rng.below(static_cast<std::uint64_t>(n))] = MinerState::Spreader;

  std::vector<double> fp(static_cast<std::size_t>(n), probs.p_f);
  std::vector<double> bpim_schedule;
  double greedy_y_estimate = 0.0;
  if (mechanism) {
    if (const auto* g = std::get_if<Gossip>(mechanism)) {
      std::fill(fp.begin(), fp.end(), g->p_fixed);
    } else if (const auto* pf = std::get_if<ProbabilisticFlooding>(mechanism)) {
      std::fill(fp.begin(), fp.end(), pf->p0);
    } else if (const auto* gr = std::get_if<Greedy>(mechanism)) {
      greedy_y_estimate = gr->y_estimate0;
      const auto rev = evogame::expected_revenues({0.0, greedy_y_estimate}, gr->pay);
      std::fill(fp.begin(), fp.end(), rev.g1y > rev.g1n ? 1.0 : 0.0);
    } else if (const auto* bp = std::get_if<Bpim>(mechanism)) {
      bpim_schedule = evogame::receiver_series(bp->x0, bp->y0, bp->pay, epochs);
      std::fill(fp.begin(), fp.end(), bpim_schedule[0]);
    }
  }

  SimTrace trace;
  trace.n = n;
  trace.k = net.k;
  trace.seed = seed;
  trace.contacts = contacts;
  trace.mechanism = mechanism ? mechanism_name(*mechanism) : "fixed";
  trace.epochs.reserve(epochs + 1);

  auto mean_fp = [&fp, n]() {
    return std::accumulate(fp.begin(), fp.end(), 0.0) / static_cast<double>(n);
  };

  EpochRecord r0 = detail::record_counts(states);
  r0.p_f_effective = mean_fp();
  trace.epochs.push_back(r0);

  std::vector<std::pair<std::int32_t, std::int32_t>> feedback;
  for (std::int64_t e = 1; e <= epochs; ++e) {
    feedback.clear();
    // the game schedule drives epoch e's interactions with its epoch-e level
    if (!bpim_schedule.empty()) std::fill(fp.begin(), fp.end(), bpim_schedule[e]);
    std::vector<std::int64_t> senders;
    if (mechanism && std::holds_alternative<ProbabilisticFlooding>(*mechanism)) {
      for (std::int64_t m = 0; m < n; ++m)
        if (states[m] == MinerState::Spreader) senders.push_back(m);
    }

    const StepResult sr = detail::advance_epoch(
        net, states, probs, fp, contacts, rng,
        mechanism && std::holds_alternative<ProbabilisticFlooding>(*mechanism) ? &feedback
                                                                               : nullptr);

    if (mechanism) {
      if (const auto* pf = std::get_if<ProbabilisticFlooding>(mechanism)) {
        // feedback entries line up with the epoch's senders in index order
        for (std::size_t s = 0; s < senders.size(); ++s) {
          double& p = fp[senders[s]];
          for (std::int32_t u = 0; u < feedback[s].first; ++u) p *= 1.0 + pf->learning_rate;
          for (std::int32_t d = 0; d < feedback[s].second; ++d) p *= 1.0 - pf->down_rate;
          p = std::min(1.0, std::max(pf->p_min, p));
        }
      } else if (const auto* gr = std::get_if<Greedy>(mechanism)) {
        // miners estimate peer willingness from the conversions they observe
        if (sr.useful_contacts > 0)
          greedy_y_estimate = static_cast<double>(sr.resolved_to_spreader) /
                              static_cast<double>(sr.useful_contacts);
        const auto rev = evogame::expected_revenues({0.0, greedy_y_estimate}, gr->pay);
        std::fill(fp.begin(), fp.end(), rev.g1y > rev.g1n ? 1.0 : 0.0);
      }
    }

    EpochRecord rec = detail::record_counts(states);
    rec.p_f_effective = mean_fp();
    rec.transmissions = sr.transmissions;
    trace.epochs.push_back(rec);
  }
  return trace;
}

inline SimTrace run_simulation(const MinerNetwork& net, const PropagationProbabilities& probs,
                               std::int64_t epochs, std::uint64_t seed,
                               ContactModel contacts = ContactModel::StaticGraph) {
  return run_simulation(net, probs, nullptr, epochs, seed, contacts);
}

// ---------------------------------------------------------------------------
// Empirical age of block information

/// Sampled consensus timeline for one block, mining end as the time origin.
/// Per-miner availability decomposes exactly into mining end plus the
/// validation and communication sums.
struct BlockTimeline {
  double mining_end = 0.0;
  std::vector<double> freshest_tx_time;    // negative offsets behind mining_end
  std::vector<double> validation_draw;     // summed over consensus rounds
  std::vector<double> communication_draw;  // summed over consensus rounds
  std::vector<double> availability;
};

/// Per-round mean validation time at its lower bound.
inline double per_round_validation_mean(const NetworkParams& p) {
  const double n = static_cast<double>(p.n_miners);
  const double b = static_cast<double>(p.b_max);
  return p.r_validate * n * b * b / (4.0 * p.cloud_compute * p.tau * p.t_pack);
}

/// Per-round mean communication time at its lower bound.
inline double per_round_communication_mean(const NetworkParams& p, double omega) {
  const double n = static_cast<double>(p.n_miners);
  const double m = static_cast<double>(p.n_base_stations);
  return p.p_size * p.tau * p.t_pack * omega * n / (m * p.r_c * p.bandwidth_w);
}

/// Draw one block timeline: the monitoring gap is a uniform cut of each
/// miner's exponential inter-generation interval (mean 1/(2 lambda)); service
/// times are per-round exponentials at their lower-bound means, accumulated
/// over the given number of rounds.
inline BlockTimeline sample_timeline(const NetworkParams& p, std::int64_t rounds, double omega,
                                     CounterRng& rng) {
  if (rounds < 1) throw ValidationError("sample_timeline: rounds must be >= 1");
  const double vmean = per_round_validation_mean(p);
  const double cmean = per_round_communication_mean(p, omega);
  const auto n = static_cast<std::size_t>(p.n_miners);

  BlockTimeline tl;
  tl.freshest_tx_time.resize(n);
  tl.validation_draw.resize(n);
  tl.communication_draw.resize(n);
  tl.availability.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double gap = rng.exponential(1.0 / p.lambda_rate);
    tl.freshest_tx_time[i] = -(rng.uniform() * gap);
    // sum of `rounds` exponentials via a product of uniforms: one log each
    double uv = 1.0, uc = 1.0;
    for (std::int64_t j = 0; j < rounds; ++j) {
      uv *= 1.0 - rng.uniform();
      uc *= 1.0 - rng.uniform();
    }
    tl.validation_draw[i] = vmean > 0.0 ? -vmean * std::log(uv) : 0.0;
    tl.communication_draw[i] = cmean > 0.0 ? -cmean * std::log(uc) : 0.0;
    tl.availability[i] = tl.mining_end + tl.validation_draw[i] + tl.communication_draw[i];
  }
  return tl;
}

/// Mean elapsed time from each miner's freshest transaction to block
/// availability, for a completed propagation run.
inline double empirical_aobi(const SimTrace& trace, const BlockTimeline& timeline,
                             const NetworkParams& p) {
  validate(p);
  if (!trace.complete())
    throw ValidationError("empirical_aobi: trace still has live spreaders or unspreaders");
  if (timeline.availability.size() != static_cast<std::size_t>(p.n_miners))
    throw ValidationError("empirical_aobi: timeline size does not match n_miners");
  double sum = 0.0;
  for (std::size_t i = 0; i < timeline.availability.size(); ++i)
    sum += timeline.availability[i] - timeline.freshest_tx_time[i];
  return sum / static_cast<double>(timeline.availability.size());
}

/// Same, recording the sampled age on the trace.
inline double empirical_aobi(SimTrace& trace, const BlockTimeline& timeline,
                             const NetworkParams& p) {
  const double age = empirical_aobi(static_cast<const SimTrace&>(trace), timeline, p);
  trace.empirical_aobi_s = age;
  return age;
}

/// Monte-Carlo mean age over repeated timeline draws at the closed-form
/// operating point; converges to the minimum average AoBI as runs grow.
inline double monte_carlo_aobi(const NetworkParams& p, std::int64_t runs, std::uint64_t seed) {
  validate(p);
  if (runs < 1) throw ValidationError("monte_carlo_aobi: runs must be >= 1");
  const auto rounds = aobi::consensus_rounds(p).rounds;
  CounterRng rng(seed);
  double total = 0.0;
  for (std::int64_t r = 0; r < runs; ++r) {
    const BlockTimeline tl = sample_timeline(p, rounds, p.omega_bar, rng);
    double sum = 0.0;
    for (std::size_t i = 0; i < tl.availability.size(); ++i)
      sum += tl.availability[i] - tl.freshest_tx_time[i];
    total += sum / static_cast<double>(tl.availability.size());
  }
  return total / static_cast<double>(runs);
}

// ---------------------------------------------------------------------------
// Mechanism comparison

struct MechanismSeries {
  std::string name;
  std::vector<double> mean_forward_probability;  // per epoch, averaged over seeds
  std::vector<double> mean_refusers;             // per epoch fraction, averaged over seeds
};

/// Run every mechanism over the common seed list and average the per-epoch
/// forwarding probability and refuser fraction. Aggregation follows seed-list
/// order, so the result is schedule-independent.
inline std::vector<MechanismSeries> compare_mechanisms(
    const MinerNetwork& net, const PropagationProbabilities& probs,
    const std::vector<Mechanism>& mechanisms, std::int64_t epochs,
    const std::vector<std::uint64_t>& seeds,
    ContactModel contacts = ContactModel::PerEpochRandom) {
  if (seeds.empty()) throw ValidationError("compare_mechanisms: need at least one seed");
  std::vector<MechanismSeries> out;
  out.reserve(mechanisms.size());
  for (const auto& mech : mechanisms) {
    MechanismSeries series;
    series.name = mechanism_name(mech);
    series.mean_forward_probability.assign(epochs + 1, 0.0);
    series.mean_refusers.assign(epochs + 1, 0.0);
    for (std::uint64_t seed : seeds) {
      const SimTrace tr = run_simulation(net, probs, &mech, epochs, seed, contacts);
      for (std::int64_t e = 0; e <= epochs; ++e) {
        series.mean_forward_probability[e] += tr.epochs[e].p_f_effective;
        series.mean_refusers[e] +=
            static_cast<double>(tr.epochs[e].count_refuser) / static_cast<double>(net.n);
      }
    }
    const auto s = static_cast<double>(seeds.size());
    for (auto& v : series.mean_forward_probability) v /= s;
    for (auto& v : series.mean_refusers) v /= s;
    out.push_back(std::move(series));
  }
  return out;
}

}  // namespace blockprop::abm
