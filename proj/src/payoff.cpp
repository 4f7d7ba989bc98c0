#include "evosync/payoff.hpp"

#include <algorithm>
#include <vector>

#include "evosync/errors.hpp"

namespace evosync {
namespace {

double selector_mass(const Scenario& sc, std::span<const double> x, std::size_t region) {
  const auto& layout = sc.layout();
  double mass = 0.0;
  for (const auto& s : sc.selectors(region)) {
    mass += x[layout.offset(s.population) + s.strategy] *
            static_cast<double>(sc.population(s.population).size);
  }
  return std::max(mass, sc.denominator_floor() * sc.total_size());
}

double weighted_mass(const Scenario& sc, std::span<const double> x, std::size_t region) {
  const auto& layout = sc.layout();
  double mass = 0.0;
  for (const auto& s : sc.selectors(region)) {
    const auto& pop = sc.population(s.population);
    mass += x[layout.offset(s.population) + s.strategy] * static_cast<double>(pop.size) *
            pop.data_quality[s.strategy];
  }
  return std::max(mass, sc.denominator_floor() * sc.total_size() * sc.min_quality(region));
}

void check(const Scenario& sc, const SocialState& state) { sc.check_state(state); }

}  // namespace

double effective_selector_mass(const Scenario& scenario, const SocialState& state,
                               std::size_t region) {
  check(scenario, state);
  (void)scenario.region(region);
  return selector_mass(scenario, state.values(), region);
}

double sensing_distance(const Scenario& scenario, const SocialState& state,
                        std::size_t population, std::size_t region) {
  scenario.require_strategy(population, region);
  return scenario.region(region).route_length /
         effective_selector_mass(scenario, state, region);
}

double total_energy(const Scenario& scenario, const SocialState& state, std::size_t population,
                    std::size_t region) {
  const auto k = scenario.require_strategy(population, region);
  const auto& pop = scenario.population(population);
  const double d = sensing_distance(scenario, state, population, region);
  return pop.propulsion_power * pop.traversal_distance[k] / pop.traversal_speed +
         pop.hover_power * d / pop.sensing_speed;
}

double reward_share(const Scenario& scenario, const SocialState& state, std::size_t population,
                    std::size_t region) {
  const auto k = scenario.require_strategy(population, region);
  check(scenario, state);
  const auto& pop = scenario.population(population);
  return pop.data_quality[k] * scenario.region(region).reward_pool /
         weighted_mass(scenario, state.values(), region);
}

double payoff(const Scenario& scenario, const SocialState& state, std::size_t population,
              std::size_t region) {
  return reward_share(scenario, state, population, region) -
         scenario.population(population).unit_energy_cost *
             total_energy(scenario, state, population, region);
}

void evaluate_payoffs(const Scenario& scenario, std::span<const double> x, PayoffTable& out) {
  thread_local std::vector<double> mass;
  thread_local std::vector<double> wmass;
  const auto regions = scenario.num_regions();
  mass.resize(regions);
  wmass.resize(regions);
  for (std::size_t m = 0; m < regions; ++m) {
    mass[m] = selector_mass(scenario, x, m);
    wmass[m] = weighted_mass(scenario, x, m);
  }
  const auto& layout = scenario.layout();
  out.average.resize(scenario.num_populations());
  for (std::size_t p = 0; p < scenario.num_populations(); ++p) {
    const auto& pop = scenario.population(p);
    auto pi = out.payoff.block(p);
    double avg = 0.0;
    for (std::size_t k = 0; k < pop.strategies.size(); ++k) {
      const auto m = pop.strategies[k];
      const auto& region = scenario.regions()[m];
      const double reward = pop.data_quality[k] * region.reward_pool / wmass[m];
      const double energy = pop.propulsion_power * pop.traversal_distance[k] / pop.traversal_speed +
                            pop.hover_power * (region.route_length / mass[m]) / pop.sensing_speed;
      pi[k] = reward - pop.unit_energy_cost * energy;
      avg += x[layout.offset(p) + k] * pi[k];
    }
    out.average[p] = avg;
  }
}

PayoffTable payoff_table(const Scenario& scenario, const SocialState& state) {
  check(scenario, state);
  PayoffTable t{BlockVector(scenario.layout()), {}};
  evaluate_payoffs(scenario, state.values(), t);
  return t;
}

}  // namespace evosync
