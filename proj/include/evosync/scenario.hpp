#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "evosync/state.hpp"

namespace evosync {

// A VSP sensing task: one region, one route, one reward pool.
struct RegionSpec {
  std::size_t id = 0;
  double route_length = 0.0;  // D_m, meters
  double reward_pool = 0.0;   // R_m, currency
};

// A group of interchangeable device owners. Per-strategy vectors are aligned
// with `strategies` (entry k describes region strategies[k]).
struct PopulationSpec {
  std::size_t id = 0;
  std::size_t size = 1;                      // N^p
  std::vector<std::size_t> strategies;       // region ids, S^p
  std::vector<double> traversal_distance;    // l^p_m, meters
  double unit_energy_cost = 0.0;             // ζ^p, currency per Joule
  double propulsion_power = 0.0;             // η^p_1, W
  double hover_power = 0.0;                  // η^p_2, W
  double traversal_speed = 1.0;              // v^p, m/s
  double sensing_speed = 1.0;                // u^p, m/s
  std::vector<double> data_quality;          // b^p_m
  double smith_probability = 0.0;            // α^{p,1}
};

// Checks one entry in isolation; `index` is its position in the scenario.
// Throw ValidationError or StructuralError.
void validate_region(const RegionSpec& region, std::size_t index);
void validate_population(const PopulationSpec& population, std::size_t index,
                         std::size_t num_regions);

// Immutable game instance. The constructor validates every invariant and
// precomputes, per region, which (population, local strategy) pairs select it.
class Scenario {
 public:
  static constexpr double kDefaultDenominatorFloor = 1e-6;

  struct Selector {
    std::size_t population;
    std::size_t strategy;  // local index within the population's strategy set
  };

  Scenario(std::vector<RegionSpec> regions, std::vector<PopulationSpec> populations,
           double denominator_floor = kDefaultDenominatorFloor);

  std::size_t num_regions() const { return regions_.size(); }
  std::size_t num_populations() const { return populations_.size(); }
  const std::vector<RegionSpec>& regions() const { return regions_; }
  const std::vector<PopulationSpec>& populations() const { return populations_; }
  const RegionSpec& region(std::size_t m) const;
  const PopulationSpec& population(std::size_t p) const;

  const Layout& layout() const { return layout_; }
  std::size_t total_strategies() const { return layout_.size(); }
  double total_size() const { return total_size_; }
  double denominator_floor() const { return floor_; }

  // Local index of `region` in population p's strategy set, if present.
  std::optional<std::size_t> strategy_index(std::size_t p, std::size_t region) const;
  // Like strategy_index but throws StructuralError when absent.
  std::size_t require_strategy(std::size_t p, std::size_t region) const;
  std::span<const Selector> selectors(std::size_t region) const;
  // min_q b^q_m over populations that can select region m (1 if none can).
  double min_quality(std::size_t region) const { return min_quality_[region]; }

  SocialState uniform_state() const;
  // Throws ValidationError unless the state has this layout and lies on Θ.
  void check_state(const SocialState& state, double tol = 1e-9) const;

  Scenario with_smith_probability(std::size_t p, double alpha) const;
  // Keeps the listed populations (in the given order) and all regions.
  Scenario restricted_to(std::span<const std::size_t> populations) const;

 private:
  std::vector<RegionSpec> regions_;
  std::vector<PopulationSpec> populations_;
  double floor_;
  Layout layout_;
  double total_size_ = 0.0;
  std::vector<std::vector<Selector>> selectors_;
  std::vector<double> min_quality_;
};

}  // namespace evosync
