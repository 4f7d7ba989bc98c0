#include "evosync/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "evosync/errors.hpp"
#include "evosync/parallel.hpp"
#include "evosync/payoff.hpp"

namespace evosync {
namespace {

// Fills rates[i] = ρ_{current,i} (zero at i == current) and returns the total.
double outflow_rates(const RevisionProtocol& protocol, std::size_t p, std::span<const double> x,
                     std::span<const double> pi, std::size_t current, std::vector<double>& rates) {
  rates.assign(x.size(), 0.0);
  if (protocol.frozen(p)) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i == current) continue;
    const double excess = pi[i] - pi[current];
    if (excess <= 0.0) continue;
    double r = 0.0;
    for (const auto& c : protocol.components(p)) {
      r += c.weight *
           (c.kind == ProtocolKind::PairwiseProportionalImitation ? x[i] * excess : excess);
    }
    rates[i] = r;
    total += r;
  }
  return total;
}

std::size_t draw_target(std::span<const double> rates, double total, std::size_t current,
                        double rate_bound, Rng& rng) {
  if (total > rate_bound * (1.0 + 1e-12)) {
    throw ConfigurationError("total switch rate " + std::to_string(total) +
                             " exceeds the rate bound " + std::to_string(rate_bound) +
                             "; raise stochastic.rate_bound");
  }
  if (total <= 0.0) return current;
  std::uniform_real_distribution<double> unif(0.0, rate_bound);
  const double u = unif(rng);
  double cum = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    cum += rates[i];
    if (rates[i] > 0.0 && u < cum) return i;
  }
  return current;
}

}  // namespace

AgentPopulationState::AgentPopulationState(std::vector<std::vector<std::int64_t>> counts)
    : counts_(std::move(counts)) {}

AgentPopulationState AgentPopulationState::from_shares(const Scenario& scenario,
                                                       const SocialState& shares) {
  scenario.check_state(shares);
  std::vector<std::vector<std::int64_t>> counts;
  for (std::size_t p = 0; p < scenario.num_populations(); ++p) {
    const auto n = static_cast<std::int64_t>(scenario.population(p).size);
    const auto x = shares.block(p);
    std::vector<std::int64_t> c(x.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::int64_t assigned = 0;
    for (std::size_t m = 0; m < x.size(); ++m) {
      const double exact = x[m] * static_cast<double>(n);
      c[m] = static_cast<std::int64_t>(std::floor(exact));
      assigned += c[m];
      remainders.emplace_back(exact - std::floor(exact), m);
    }
    // Largest remainder first; ties go to the lower index.
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) {
      ++c[remainders[k % remainders.size()].second];
    }
    counts.push_back(std::move(c));
  }
  return AgentPopulationState(std::move(counts));
}

void AgentPopulationState::check(const Scenario& scenario) const {
  if (counts_.size() != scenario.num_populations()) {
    throw ValidationError("agent state has the wrong number of populations");
  }
  for (std::size_t p = 0; p < counts_.size(); ++p) {
    const auto& pop = scenario.population(p);
    if (counts_[p].size() != pop.strategies.size()) {
      throw ValidationError("population " + std::to_string(p) + ": wrong number of counts");
    }
    std::int64_t total = 0;
    for (auto c : counts_[p]) {
      if (c < 0) throw ValidationError("population " + std::to_string(p) + ": negative count");
      total += c;
    }
    if (total != static_cast<std::int64_t>(pop.size)) {
      throw ValidationError("population " + std::to_string(p) + ": counts sum to " +
                            std::to_string(total) + ", size is " + std::to_string(pop.size));
    }
  }
}

SocialState AgentPopulationState::proportions(const Scenario& scenario) const {
  check(scenario);
  SocialState s(scenario.layout());
  for (std::size_t p = 0; p < counts_.size(); ++p) {
    const double n = static_cast<double>(scenario.population(p).size);
    for (std::size_t m = 0; m < counts_[p].size(); ++m) {
      s(p, m) = static_cast<double>(counts_[p][m]) / n;
    }
  }
  return s;
}

void StochasticConfig::validate() const {
  if (!(clock_rate > 0.0) || !std::isfinite(clock_rate)) {
    throw ValidationError("clock rate must be positive");
  }
  if (!(rate_bound >= 0.0) || !std::isfinite(rate_bound)) {
    throw ValidationError("rate bound must be nonnegative (0 selects automatic)");
  }
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw ValidationError("horizon must be nonnegative");
  }
  if (!(record_interval > 0.0)) throw ValidationError("record interval must be positive");
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + index * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double auto_rate_bound(const Scenario& scenario, const RevisionProtocol& protocol,
                       const SocialState& state) {
  const auto payoffs = payoff_table(scenario, state);
  std::vector<double> rates;
  double worst = 0.0;
  for (std::size_t p = 0; p < scenario.num_populations(); ++p) {
    const auto x = state.block(p);
    for (std::size_t m = 0; m < x.size(); ++m) {
      worst = std::max(worst, outflow_rates(protocol, p, x, payoffs.payoff.block(p), m, rates));
    }
  }
  return std::max(1.5 * worst, 1e-9);
}

std::size_t sample_revision(const RevisionProtocol& protocol, const PayoffTable& payoffs,
                            const SocialState& proportions, std::size_t population,
                            std::size_t current, double rate_bound, Rng& rng) {
  if (!(proportions.layout() == payoffs.payoff.layout())) {
    throw StructuralError("payoff table does not match the state layout");
  }
  if (population >= proportions.populations() || population >= protocol.populations()) {
    throw StructuralError("unknown population " + std::to_string(population));
  }
  const auto x = proportions.block(population);
  if (current >= x.size()) throw StructuralError("strategy index out of range");
  if (!(rate_bound > 0.0)) throw ValidationError("rate bound must be positive");
  std::vector<double> rates;
  const double total =
      outflow_rates(protocol, population, x, payoffs.payoff.block(population), current, rates);
  return draw_target(rates, total, current, rate_bound, rng);
}

AgentTrajectory simulate(const Scenario& scenario, const RevisionProtocol& protocol,
                         const AgentPopulationState& initial, const StochasticConfig& config) {
  config.validate();
  initial.check(scenario);
  if (protocol.populations() != scenario.num_populations()) {
    throw StructuralError("protocol and scenario disagree on the population count");
  }

  AgentTrajectory traj;
  AgentPopulationState counts = initial;
  SocialState x = counts.proportions(scenario);
  PayoffTable payoffs = payoff_table(scenario, x);
  traj.rate_bound =
      config.rate_bound > 0.0 ? config.rate_bound : auto_rate_bound(scenario, protocol, x);
  traj.time_scale = config.clock_rate / traj.rate_bound;

  std::vector<std::int64_t> sizes;
  for (const auto& pop : scenario.populations()) sizes.push_back(static_cast<std::int64_t>(pop.size));
  const std::int64_t agents = std::accumulate(sizes.begin(), sizes.end(), std::int64_t{0});

  Rng rng(config.seed);
  std::exponential_distribution<double> wait(static_cast<double>(agents) * config.clock_rate);
  std::uniform_int_distribution<std::int64_t> pick(0, agents - 1);
  std::vector<double> rates;

  const auto records =
      static_cast<std::size_t>(std::floor(config.horizon / config.record_interval + 1e-9)) + 1;
  std::size_t next_record = 0;
  auto record_until = [&](double t) {
    while (next_record < records &&
           static_cast<double>(next_record) * config.record_interval <= t) {
      traj.samples.push_back(
          {static_cast<double>(next_record) * config.record_interval, x, payoffs, counts});
      ++next_record;
    }
  };

  double t = 0.0;
  while (true) {
    t += wait(rng);
    record_until(std::min(t, config.horizon));
    if (t > config.horizon) break;

    // Locate the ringing agent: population first, then strategy.
    std::int64_t idx = pick(rng);
    std::size_t p = 0;
    while (idx >= sizes[p]) idx -= sizes[p++];
    std::size_t m = 0;
    while (idx >= counts.count(p, m)) idx -= counts.count(p, m++);

    ++traj.events;
    const double total = outflow_rates(protocol, p, x.block(p), payoffs.payoff.block(p), m, rates);
    const std::size_t target = draw_target(rates, total, m, traj.rate_bound, rng);
    if (target != m) {
      --counts.count(p, m);
      ++counts.count(p, target);
      const double n = static_cast<double>(sizes[p]);
      x(p, m) = static_cast<double>(counts.count(p, m)) / n;
      x(p, target) = static_cast<double>(counts.count(p, target)) / n;
      evaluate_payoffs(scenario, x.values(), payoffs);
      ++traj.switches;
    }
  }
  return traj;
}

namespace {

template <class Loop>
std::vector<AgentTrajectory> run_ensemble(Loop loop, const Scenario& scenario,
                                          const RevisionProtocol& protocol,
                                          const AgentPopulationState& initial,
                                          const StochasticConfig& config, std::size_t runs) {
  std::vector<AgentTrajectory> out(runs);
  loop(runs, [&](std::size_t i) {
    StochasticConfig c = config;
    c.seed = derive_seed(config.seed, i);
    out[i] = simulate(scenario, protocol, initial, c);
  });
  return out;
}

}  // namespace

std::vector<AgentTrajectory> simulate_ensemble(const Scenario& scenario,
                                               const RevisionProtocol& protocol,
                                               const AgentPopulationState& initial,
                                               const StochasticConfig& config, std::size_t runs) {
  return run_ensemble([](std::size_t n, auto&& body) { parallel_for(n, body); }, scenario,
                      protocol, initial, config, runs);
}

std::vector<AgentTrajectory> simulate_ensemble_serial(const Scenario& scenario,
                                                      const RevisionProtocol& protocol,
                                                      const AgentPopulationState& initial,
                                                      const StochasticConfig& config,
                                                      std::size_t runs) {
  return run_ensemble([](std::size_t n, auto&& body) { serial_for(n, body); }, scenario,
                      protocol, initial, config, runs);
}

std::vector<SocialState> ensemble_mean(const std::vector<AgentTrajectory>& runs) {
  if (runs.empty()) return {};
  std::vector<SocialState> mean;
  const auto samples = runs.front().samples.size();
  for (std::size_t k = 0; k < samples; ++k) {
    SocialState acc(runs.front().samples[k].state.layout());
    for (const auto& r : runs) {
      if (r.samples.size() != samples) throw StructuralError("runs have different sample counts");
      const auto v = r.samples[k].state.values();
      for (std::size_t i = 0; i < v.size(); ++i) acc.values()[i] += v[i];
    }
    for (double& v : acc.values()) v /= static_cast<double>(runs.size());
    mean.push_back(std::move(acc));
  }
  return mean;
}

}  // namespace evosync
