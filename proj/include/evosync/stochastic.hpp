#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "evosync/dynamics.hpp"
#include "evosync/scenario.hpp"
#include "evosync/state.hpp"

namespace evosync {

// Integer strategy counts per population; counts[p][m] owners of population p
// play local strategy m.
class AgentPopulationState {
 public:
  AgentPopulationState() = default;
  explicit AgentPopulationState(std::vector<std::vector<std::int64_t>> counts);

  // Rounds shares to counts by largest remainder so each block sums to N^p.
  static AgentPopulationState from_shares(const Scenario& scenario, const SocialState& shares);

  const std::vector<std::vector<std::int64_t>>& counts() const { return counts_; }
  std::int64_t count(std::size_t p, std::size_t m) const { return counts_[p][m]; }
  std::int64_t& count(std::size_t p, std::size_t m) { return counts_[p][m]; }

  // Throws ValidationError unless the counts are nonnegative and match N^p.
  void check(const Scenario& scenario) const;
  SocialState proportions(const Scenario& scenario) const;

  bool operator==(const AgentPopulationState&) const = default;

 private:
  std::vector<std::vector<std::int64_t>> counts_;
};

struct StochasticConfig {
  std::uint64_t seed = 0;
  double clock_rate = 1.0;  // revision opportunities per agent per unit time
  // R_max; switch probability on a ring is ρ/R_max. Zero selects
  // auto_rate_bound() at the initial state.
  double rate_bound = 0.0;
  double horizon = 5.0;
  double record_interval = 0.1;

  void validate() const;
};

struct AgentSample {
  double time = 0.0;
  SocialState state;
  PayoffTable payoffs;
  AgentPopulationState counts;
};

struct AgentTrajectory {
  std::vector<AgentSample> samples;
  std::uint64_t events = 0;
  std::uint64_t switches = 0;
  double rate_bound = 0.0;
  // Expected motion is time_scale · (mean dynamics), i.e. clock_rate/R_max.
  double time_scale = 1.0;
};

using Rng = std::mt19937_64;

// Seed of run `index` in an ensemble: splitmix64(master + index·0x9E3779B97F4A7C15).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// 1.5 × the largest total outflow rate Σ_i ρ_{m,i} at the given state, with a
// floor of 1e-9.
double auto_rate_bound(const Scenario& scenario, const RevisionProtocol& protocol,
                       const SocialState& state);

// Target strategy of a revising agent currently on `current`: i ≠ current with
// probability ρ_{current,i}/rate_bound, otherwise `current`. Throws
// ConfigurationError when the total outflow rate exceeds rate_bound.
std::size_t sample_revision(const RevisionProtocol& protocol, const PayoffTable& payoffs,
                            const SocialState& proportions, std::size_t population,
                            std::size_t current, double rate_bound, Rng& rng);

// Continuous-time event-driven simulation with per-agent Poisson clocks.
AgentTrajectory simulate(const Scenario& scenario, const RevisionProtocol& protocol,
                         const AgentPopulationState& initial, const StochasticConfig& config);

// `runs` independent simulations with seeds derive_seed(config.seed, i).
// Results are in run order. The serial version is the reference.
std::vector<AgentTrajectory> simulate_ensemble(const Scenario& scenario,
                                               const RevisionProtocol& protocol,
                                               const AgentPopulationState& initial,
                                               const StochasticConfig& config, std::size_t runs);
std::vector<AgentTrajectory> simulate_ensemble_serial(const Scenario& scenario,
                                                      const RevisionProtocol& protocol,
                                                      const AgentPopulationState& initial,
                                                      const StochasticConfig& config,
                                                      std::size_t runs);

// Per-sample mean of the proportions across runs (all runs share sample times).
std::vector<SocialState> ensemble_mean(const std::vector<AgentTrajectory>& runs);

}  // namespace evosync
