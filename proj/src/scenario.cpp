#include "evosync/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "evosync/errors.hpp"

namespace evosync {
namespace {

std::string pop_name(std::size_t p) { return "population " + std::to_string(p); }

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void validate_region(const RegionSpec& r, std::size_t m) {
  const auto name = "region " + std::to_string(m);
  if (r.id != m) throw StructuralError(name + " has id " + std::to_string(r.id));
  require(finite(r.route_length) && r.route_length > 0.0, name + ": route length must be > 0");
  require(finite(r.reward_pool) && r.reward_pool >= 0.0, name + ": reward pool must be >= 0");
}

void validate_population(const PopulationSpec& pop, std::size_t p, std::size_t num_regions) {
  const auto name = pop_name(p);
  if (pop.id != p) throw StructuralError(name + " has id " + std::to_string(pop.id));
  require(pop.size >= 1, name + ": size must be >= 1");
  require(!pop.strategies.empty(), name + ": empty strategy set");
  require(pop.traversal_distance.size() == pop.strategies.size(),
          name + ": one traversal distance per strategy required");
  require(pop.data_quality.size() == pop.strategies.size(),
          name + ": one data quality per strategy required");
  require(finite(pop.traversal_speed) && pop.traversal_speed > 0.0, name + ": traversal speed must be > 0");
  require(finite(pop.sensing_speed) && pop.sensing_speed > 0.0, name + ": sensing speed must be > 0");
  require(finite(pop.propulsion_power) && pop.propulsion_power >= 0.0, name + ": propulsion power must be >= 0");
  require(finite(pop.hover_power) && pop.hover_power >= 0.0, name + ": hover power must be >= 0");
  require(finite(pop.unit_energy_cost) && pop.unit_energy_cost >= 0.0, name + ": unit energy cost must be >= 0");
  require(finite(pop.smith_probability) && pop.smith_probability >= 0.0 && pop.smith_probability <= 1.0,
          name + ": smith probability must lie in [0, 1]");
  for (std::size_t k = 0; k < pop.strategies.size(); ++k) {
    const auto region = pop.strategies[k];
    if (region >= num_regions) {
      throw StructuralError(name + " references unknown region " + std::to_string(region));
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (pop.strategies[j] == region) {
        throw StructuralError(name + " lists region " + std::to_string(region) + " twice");
      }
    }
    require(finite(pop.traversal_distance[k]) && pop.traversal_distance[k] >= 0.0,
            name + ": traversal distance must be >= 0");
    require(finite(pop.data_quality[k]) && pop.data_quality[k] > 0.0,
            name + ": data quality must be > 0");
  }
}

Scenario::Scenario(std::vector<RegionSpec> regions, std::vector<PopulationSpec> populations,
                   double denominator_floor)
    : regions_(std::move(regions)), populations_(std::move(populations)), floor_(denominator_floor) {
  require(!regions_.empty(), "scenario needs at least one region");
  require(!populations_.empty(), "scenario needs at least one population");
  require(finite(floor_) && floor_ > 0.0, "denominator floor must be positive");
  for (std::size_t m = 0; m < regions_.size(); ++m) validate_region(regions_[m], m);

  std::vector<std::size_t> sizes;
  selectors_.assign(regions_.size(), {});
  min_quality_.assign(regions_.size(), std::numeric_limits<double>::infinity());
  for (std::size_t p = 0; p < populations_.size(); ++p) {
    const auto& pop = populations_[p];
    validate_population(pop, p, regions_.size());
    for (std::size_t k = 0; k < pop.strategies.size(); ++k) {
      selectors_[pop.strategies[k]].push_back({p, k});
      min_quality_[pop.strategies[k]] = std::min(min_quality_[pop.strategies[k]], pop.data_quality[k]);
    }
    sizes.push_back(pop.strategies.size());
    total_size_ += static_cast<double>(pop.size);
  }
  for (auto& q : min_quality_) {
    if (!std::isfinite(q)) q = 1.0;
  }
  layout_ = Layout(sizes);
}

const RegionSpec& Scenario::region(std::size_t m) const {
  if (m >= regions_.size()) throw StructuralError("unknown region " + std::to_string(m));
  return regions_[m];
}

const PopulationSpec& Scenario::population(std::size_t p) const {
  if (p >= populations_.size()) throw StructuralError("unknown population " + std::to_string(p));
  return populations_[p];
}

std::optional<std::size_t> Scenario::strategy_index(std::size_t p, std::size_t region) const {
  const auto& s = population(p).strategies;
  const auto it = std::find(s.begin(), s.end(), region);
  if (it == s.end()) return std::nullopt;
  return static_cast<std::size_t>(it - s.begin());
}

std::size_t Scenario::require_strategy(std::size_t p, std::size_t region) const {
  (void)this->region(region);
  auto k = strategy_index(p, region);
  if (!k) {
    throw StructuralError("region " + std::to_string(region) + " is not a strategy of " +
                          pop_name(p));
  }
  return *k;
}

std::span<const Scenario::Selector> Scenario::selectors(std::size_t region) const {
  (void)this->region(region);
  return selectors_[region];
}

SocialState Scenario::uniform_state() const {
  SocialState s(layout_);
  for (std::size_t p = 0; p < num_populations(); ++p) {
    auto b = s.block(p);
    std::fill(b.begin(), b.end(), 1.0 / static_cast<double>(b.size()));
  }
  return s;
}

void Scenario::check_state(const SocialState& state, double tol) const {
  if (!(state.layout() == layout_)) {
    throw ValidationError("social state does not match the scenario's strategy layout");
  }
  state.validate(tol);
}

Scenario Scenario::with_smith_probability(std::size_t p, double alpha) const {
  auto pops = populations_;
  if (p >= pops.size()) throw StructuralError("unknown population " + std::to_string(p));
  pops[p].smith_probability = alpha;
  return Scenario(regions_, std::move(pops), floor_);
}

Scenario Scenario::restricted_to(std::span<const std::size_t> keep) const {
  std::vector<PopulationSpec> pops;
  for (auto p : keep) {
    pops.push_back(population(p));
    pops.back().id = pops.size() - 1;
  }
  return Scenario(regions_, std::move(pops), floor_);
}

}  // namespace evosync
