#pragma once

// Synthetic data: closed-form influence distributions and two network
// generators (latent homophily, copying dynamics). Network runs accumulate
// counts over independent graph realizations, each with its own RNG stream
// derived from the master seed, until exactly M dyad samples are collected.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "contagion/errors.hpp"
#include "contagion/model.hpp"
#include "contagion/polynomial.hpp"

namespace contagion {

struct EmpiricalDistribution {
  int T = 4;
  std::vector<std::uint64_t> counts;
  std::string generator;
  std::uint64_t seed = 0;

  EmpiricalDistribution() = default;
  explicit EmpiricalDistribution(int horizon) : T(horizon), counts(outcome_count(horizon), 0) {}

  std::uint64_t M() const {
    std::uint64_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }

  std::vector<double> frequencies() const {
    const double total = static_cast<double>(M());
    if (total == 0.0) throw UsageError("EmpiricalDistribution: no samples");
    std::vector<double> p(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) p[i] = static_cast<double>(counts[i]) / total;
    return p;
  }

  void add(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    ++counts[(seq_to_index(a) << T) | seq_to_index(b)];
  }

  EmpiricalDistribution& merge(const EmpiricalDistribution& o) {
    if (o.T != T) throw UsageError("EmpiricalDistribution: cannot merge different horizons");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
    return *this;
  }
};

enum class InfluenceKind { Delayed, Instant };

struct InfluenceModel {
  InfluenceKind kind = InfluenceKind::Delayed;
  double delta = 0.0;
  int T = 4;
};

/// Closed-form outcome probabilities. A is i.i.d. uniform. Delayed: B_1 is
/// uniform and B_t copies A_{t-1} with probability delta, else is uniform.
/// Instant: B_t copies A_t with probability delta for every t.
template <class Coeff = double>
std::vector<Coeff> exact_distribution(const InfluenceModel& m) {
  if (m.delta < 0.0 || m.delta > 1.0) throw UsageError("exact_distribution: delta must be in [0, 1]");
  if (m.T < 1 || m.T > 8) throw UsageError("exact_distribution: T must be in [1, 8]");
  const Coeff delta = CoeffTraits<Coeff>::from_double(m.delta);
  const Coeff half = Coeff(1) / Coeff(2);
  const Coeff miss = (Coeff(1) - delta) * half;
  const Coeff hit = delta + miss;
  Coeff base = Coeff(1);
  for (int t = 0; t < m.T; ++t) base *= half;
  std::vector<Coeff> p(outcome_count(m.T));
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto o = OutcomeIndex::from_linear(k, m.T);
    Coeff v = base;
    if (m.kind == InfluenceKind::Delayed) {
      v *= half;
      for (int t = 1; t < m.T; ++t) v *= o.b[t] == o.a[t - 1] ? hit : miss;
    } else {
      for (int t = 0; t < m.T; ++t) v *= o.b[t] == o.a[t] ? hit : miss;
    }
    p[k] = v;
  }
  return p;
}

/// M i.i.d. draws from a frequency vector over 2^{2T} outcomes.
inline EmpiricalDistribution sample_counts(std::span<const double> p, int T, std::uint64_t M,
                                           std::uint64_t seed) {
  if (p.size() != outcome_count(T)) throw UsageError("sample_counts: distribution size mismatch");
  EmpiricalDistribution emp(T);
  emp.seed = seed;
  emp.generator = "multinomial";
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(p.begin(), p.end());
  for (std::uint64_t i = 0; i < M; ++i) ++emp.counts[pick(rng)];
  return emp;
}

inline std::mt19937_64 realization_rng(std::uint64_t master, std::uint64_t realization) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(realization),
                    static_cast<std::uint32_t>(realization >> 32)};
  return std::mt19937_64(seq);
}

struct Edge {
  std::size_t source;
  std::size_t target;
};

// ---------------------------------------------------------------------------

/// Each node carries a static trait r ~ U[0,1]. Directed edge i -> j forms
/// with probability edge_base * exp(-kappa |r_i - r_j|) * exp(-eta |r_j - 1/2|).
/// States follow a per-node Markov chain with P(0->1) = p01_base + p01_slope r
/// and P(1->0) = p10_base + p10_slope r, started from its stationary law.
struct LatentHomophilyConfig {
  int T = 4;
  std::size_t nodes = 200;
  double edge_base = 0.05;
  double kappa = 4.0;
  double eta = 2.0;
  double p01_base = 0.2;
  double p01_slope = 0.3;
  double p10_base = 0.5;
  double p10_slope = -0.3;
  std::uint64_t M = 400'000;
  std::uint64_t seed = 1;
};

struct CopyingConfig {
  int T = 4;
  std::size_t nodes = 100;
  double type_fraction = 0.6;
  double p_within = 0.1;
  double p_cross = 0.02;
  std::size_t sweeps_per_epoch = 1;  // one sweep = |E| copy events
  std::uint64_t M = 400'000;
  std::uint64_t seed = 1;
};

namespace detail {

template <class Run>
EmpiricalDistribution accumulate_realizations(int T, std::uint64_t M, std::uint64_t seed,
                                              const std::string& name, Run run) {
  if (M == 0) throw UsageError(name + ": M must be positive");
  EmpiricalDistribution emp(T);
  emp.generator = name;
  emp.seed = seed;
  std::uint64_t have = 0;
  std::size_t empty_streak = 0;
  std::vector<BitSeq> states;
  std::vector<Edge> edges;
  for (std::uint64_t r = 0; have < M; ++r) {
    auto rng = realization_rng(seed, r);
    edges.clear();
    run(rng, states, edges);
    if (edges.empty()) {
      if (++empty_streak >= 1000) throw GenerationError(name + ": configuration produces no edges");
      continue;
    }
    empty_streak = 0;
    for (const auto& e : edges) {
      if (have == M) break;
      emp.add(states[e.source], states[e.target]);
      ++have;
    }
  }
  return emp;
}

}  // namespace detail

inline EmpiricalDistribution simulate_latent_homophily(const LatentHomophilyConfig& cfg) {
  if (cfg.T < 2 || cfg.T > 8) throw UsageError("latent homophily: T must be in [2, 8]");
  if (cfg.nodes < 2) throw UsageError("latent homophily: need at least 2 nodes");
  if (cfg.edge_base < 0.0 || cfg.edge_base > 1.0) {
    throw UsageError("latent homophily: edge_base must be in [0, 1]");
  }
  auto flip = [](double base, double slope, double r) { return std::clamp(base + slope * r, 0.0, 1.0); };
  auto outside = [](double v) { return v < 0.0 || v > 1.0; };
  for (double r : {0.0, 1.0}) {
    if (outside(cfg.p01_base + cfg.p01_slope * r) || outside(cfg.p10_base + cfg.p10_slope * r)) {
      throw UsageError("latent homophily: transition probabilities leave [0, 1]");
    }
  }
  return detail::accumulate_realizations(
      cfg.T, cfg.M, cfg.seed, "latent-homophily",
      [&](std::mt19937_64& rng, std::vector<BitSeq>& states, std::vector<Edge>& edges) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<double> trait(cfg.nodes);
        for (auto& r : trait) r = unit(rng);
        for (std::size_t i = 0; i < cfg.nodes; ++i) {
          for (std::size_t j = 0; j < cfg.nodes; ++j) {
            if (i == j) continue;
            const double w = cfg.edge_base * std::exp(-cfg.kappa * std::fabs(trait[i] - trait[j])) *
                             std::exp(-cfg.eta * std::fabs(trait[j] - 0.5));
            if (unit(rng) < w) edges.push_back({i, j});
          }
        }
        states.assign(cfg.nodes, BitSeq(static_cast<std::size_t>(cfg.T)));
        for (std::size_t i = 0; i < cfg.nodes; ++i) {
          const double up = flip(cfg.p01_base, cfg.p01_slope, trait[i]);
          const double down = flip(cfg.p10_base, cfg.p10_slope, trait[i]);
          const double stationary_one = up + down > 0.0 ? up / (up + down) : 0.5;
          std::uint8_t s = unit(rng) < stationary_one;
          for (int t = 0; t < cfg.T; ++t) {
            if (t > 0) s = s ? (unit(rng) < down ? 0 : 1) : (unit(rng) < up ? 1 : 0);
            states[i][static_cast<std::size_t>(t)] = s;
          }
        }
      });
}

/// Two node types with assortative linking; states start uniform. Each sweep
/// picks |E| edges uniformly at random and the target copies the source's
/// state. The first observation is the initial state, later ones follow
/// every `sweeps_per_epoch` sweeps. Each directed edge yields one (A = source,
/// B = target) sample.
inline EmpiricalDistribution simulate_copying(const CopyingConfig& cfg) {
  if (cfg.T < 2 || cfg.T > 8) throw UsageError("copying: T must be in [2, 8]");
  if (cfg.nodes < 2) throw UsageError("copying: need at least 2 nodes");
  if (cfg.type_fraction < 0.0 || cfg.type_fraction > 1.0) {
    throw UsageError("copying: type_fraction must be in [0, 1]");
  }
  if (cfg.p_within < 0.0 || cfg.p_within > 1.0 || cfg.p_cross < 0.0 || cfg.p_cross > 1.0) {
    throw UsageError("copying: edge probabilities must be in [0, 1]");
  }
  if (cfg.sweeps_per_epoch == 0) throw UsageError("copying: sweeps_per_epoch must be positive");
  const auto first_type = static_cast<std::size_t>(std::lround(cfg.type_fraction * cfg.nodes));
  return detail::accumulate_realizations(
      cfg.T, cfg.M, cfg.seed, "copying",
      [&](std::mt19937_64& rng, std::vector<BitSeq>& states, std::vector<Edge>& edges) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::size_t i = 0; i < cfg.nodes; ++i) {
          for (std::size_t j = 0; j < cfg.nodes; ++j) {
            if (i == j) continue;
            const bool same = (i < first_type) == (j < first_type);
            if (unit(rng) < (same ? cfg.p_within : cfg.p_cross)) edges.push_back({i, j});
          }
        }
        std::vector<std::uint8_t> now(cfg.nodes);
        for (auto& s : now) s = unit(rng) < 0.5;
        states.assign(cfg.nodes, BitSeq(static_cast<std::size_t>(cfg.T)));
        if (edges.empty()) return;
        std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
        for (int t = 0; t < cfg.T; ++t) {
          if (t > 0) {
            for (std::size_t k = 0; k < cfg.sweeps_per_epoch * edges.size(); ++k) {
              const Edge& e = edges[pick(rng)];
              now[e.target] = now[e.source];
            }
          }
          for (std::size_t i = 0; i < cfg.nodes; ++i) states[i][static_cast<std::size_t>(t)] = now[i];
        }
      });
}

}  // namespace contagion
