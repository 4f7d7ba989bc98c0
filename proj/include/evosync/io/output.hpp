#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evosync/analysis.hpp"
#include "evosync/integrator.hpp"
#include "evosync/io/scenario_file.hpp"
#include "evosync/scenario.hpp"
#include "evosync/stochastic.hpp"

// Output formats. Every CSV starts with a "# manifest_sha256=<hex>" comment
// line followed by a header row; numbers use the shortest representation that
// round-trips, with '.' as decimal separator.
namespace evosync::io {

std::string sha256_hex(std::string_view data);
std::string format_number(double value);

struct Manifest {
  nlohmann::json tree;  // tool, version, command, seed, config
  std::string hash;     // SHA-256 of tree.dump()

  // tree plus a top-level "sha256" entry, as written to manifest.json.
  nlohmann::json document() const;
};

Manifest make_manifest(const ScenarioFile& file, std::string_view command);

// step, time, x_<p>_<region>..., pi_<p>_<region>..., pibar_<p>...
std::vector<std::string> trajectory_columns(const Scenario& scenario);
void write_trajectory_csv(std::ostream& out, const Scenario& scenario, const Trajectory& trajectory,
                          std::string_view manifest_hash);

// run, step, time, ode_time, then the trajectory columns, then n_<p>_<region>...
void write_agents_csv(std::ostream& out, const Scenario& scenario,
                      const std::vector<AgentTrajectory>& runs, std::string_view manifest_hash);

// u, v, du, dv, skipped
void write_field_csv(std::ostream& out, const std::vector<FieldPoint>& field,
                     std::string_view manifest_hash);

// alpha, steps, converged
void write_sweep_csv(std::ostream& out, const std::vector<SweepEntry>& sweep,
                     std::string_view manifest_hash);

nlohmann::json equilibria_json(const Scenario& scenario, const EquilibriumSearch& search,
                               std::size_t seeds, std::string_view manifest_hash);

}  // namespace evosync::io
