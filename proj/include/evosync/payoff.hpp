#pragma once

#include <cstddef>
#include <span>

#include "evosync/scenario.hpp"
#include "evosync/state.hpp"

namespace evosync {

// Region arguments below are region ids; population arguments are indices.

// max(Σ_q x^q_m N^q, δ·N): the number of devices sharing region m, floored so
// that it never vanishes.
double effective_selector_mass(const Scenario& scenario, const SocialState& state,
                               std::size_t region);

// Even split of the region's route among its selectors: D_m / mass.
double sensing_distance(const Scenario& scenario, const SocialState& state,
                        std::size_t population, std::size_t region);

// Traversal plus sensing energy in Joules: η1·l/v + η2·d/u.
double total_energy(const Scenario& scenario, const SocialState& state,
                    std::size_t population, std::size_t region);

// Quality-weighted share of the reward pool,
// b^p_m R_m / max(Σ_q x^q_m N^q b^q_m, δ·N·min_q b^q_m).
double reward_share(const Scenario& scenario, const SocialState& state,
                    std::size_t population, std::size_t region);

// Net utility: reward share minus energy cost.
double payoff(const Scenario& scenario, const SocialState& state, std::size_t population,
              std::size_t region);

PayoffTable payoff_table(const Scenario& scenario, const SocialState& state);

// Allocation-free kernel behind payoff_table. `x` is the flat social state;
// `out` must already have the scenario's layout. No validation is done, so
// intermediate integrator stages slightly off the simplex are accepted.
void evaluate_payoffs(const Scenario& scenario, std::span<const double> x, PayoffTable& out);

}  // namespace evosync
