#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evosync/analysis.hpp"
#include "evosync/dynamics.hpp"
#include "evosync/errors.hpp"
#include "evosync/integrator.hpp"
#include "evosync/scenario.hpp"
#include "evosync/stochastic.hpp"

namespace evosync::io {

// Schema violation in a scenario document; `path` is a JSON pointer.
class SchemaError : public ValidationError {
 public:
  SchemaError(std::string path, const std::string& message)
      : ValidationError(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

enum class ProtocolChoice { Hybrid, Replicator, Smith };

struct ProtocolSettings {
  ProtocolChoice kind = ProtocolChoice::Hybrid;
  std::vector<double> alpha;          // Smith probability per population
  std::vector<std::size_t> frozen;    // populations that never revise
};

struct StochasticSettings {
  double clock_rate = 1.0;
  double rate_bound = 0.0;  // 0 = automatic
  double horizon = 5.0;
  double record_interval = 0.1;
  std::size_t runs = 20;
};

struct FieldSettings {
  Coordinate u{0, 0};
  Coordinate v{1, 0};
  std::size_t resolution_u = 20;
  std::size_t resolution_v = 20;
  std::vector<std::vector<double>> fixed;  // empty: use the initial state
};

struct EquilibriaSettings {
  std::size_t population = 0;  // population whose first two shares span the seed grid
  std::size_t grid = 10;
  double residual_tolerance = 1e-6;
  double cluster_tolerance = 1e-3;
  double refine_time = 1e4;
};

struct SweepSettings {
  std::size_t population = 0;
  std::vector<double> alpha_values;
};

// Fully resolved contents of a scenario document. Distances are meters.
struct ScenarioFile {
  std::vector<RegionSpec> regions;
  std::vector<PopulationSpec> populations;
  double denominator_floor = Scenario::kDefaultDenominatorFloor;
  ProtocolSettings protocol;
  std::vector<std::vector<double>> initial_state;
  IntegratorConfig integrator;
  StochasticSettings stochastic;
  FieldSettings field;
  EquilibriaSettings equilibria;
  SweepSettings sweep;
  std::uint64_t seed = 0;

  // Scenario with each population's Smith probability set from the protocol
  // section (0 for replicator, 1 for smith).
  Scenario scenario() const;
  RevisionProtocol revision_protocol() const;
  SocialState initial() const;
  StochasticConfig stochastic_config() const;
  DirectionFieldSpec field_spec() const;
  EquilibriumConfig equilibrium_config() const;
};

// Canonical tree: every section present, SI units, sorted keys.
nlohmann::json to_json(const ScenarioFile& file);

// Validates the tree (unknown keys, types, ranges) and then every scenario
// invariant. Errors are SchemaError with the offending path.
ScenarioFile from_json(const nlohmann::json& tree);

// Applies "dotted.path=value". Array elements are addressed by index; the
// value is parsed as JSON when possible and taken as a string otherwise.
void apply_override(nlohmann::json& tree, std::string_view assignment);

nlohmann::json read_json(const std::filesystem::path& path);
ScenarioFile load_scenario(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides = {});

// Samples a scenario with `populations` × `regions` entries uniformly from
// the default parameter ranges. Deterministic per seed.
ScenarioFile generate_scenario(std::uint64_t seed, std::size_t populations = 3,
                               std::size_t regions = 3);

inline constexpr std::uint64_t kDefaultScenarioSeed = 2022;

}  // namespace evosync::io
