#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "evosync/dynamics.hpp"
#include "evosync/integrator.hpp"
#include "evosync/scenario.hpp"
#include "evosync/state.hpp"

namespace evosync {

struct Coordinate {
  std::size_t population = 0;
  std::size_t strategy = 0;  // local index
  bool operator==(const Coordinate&) const = default;
};

// Two free coordinates swept over [0, 1] on a regular grid. All other entries
// come from `fixed`, except that the last strategy of each varied population
// absorbs the remainder 1 − Σ(others).
struct DirectionFieldSpec {
  Coordinate u;
  Coordinate v;
  SocialState fixed;
  std::size_t resolution_u = 20;
  std::size_t resolution_v = 20;
};

struct FieldPoint {
  double u = 0.0;
  double v = 0.0;
  double du = 0.0;
  double dv = 0.0;
  bool skipped = false;  // the grid point falls outside the simplex
  bool operator==(const FieldPoint&) const = default;
};

// Throws ValidationError for axes that cannot be varied or a grid with no
// valid point.
void validate_field_spec(const Scenario& scenario, const DirectionFieldSpec& spec);

// State at grid point (u, v), or nullopt when it leaves the simplex.
std::optional<SocialState> grid_state(const DirectionFieldSpec& spec, double u, double v);

// Grid in row-major order (u outer, v inner).
std::vector<FieldPoint> direction_field(const Scenario& scenario,
                                        const RevisionProtocol& protocol,
                                        const DirectionFieldSpec& spec);
std::vector<FieldPoint> direction_field_serial(const Scenario& scenario,
                                               const RevisionProtocol& protocol,
                                               const DirectionFieldSpec& spec);

struct EquilibriumConfig {
  IntegratorConfig integrator;
  double residual_tolerance = 1e-6;
  double cluster_tolerance = 1e-3;
  // Extra integration time allowed after τ-convergence to drive the field
  // residual below residual_tolerance.
  double refine_time = 1e4;
};

struct EquilibriumReport {
  SocialState state;
  double residual = 0.0;  // L∞ norm of the field at `state`
  std::vector<Coordinate> extinct;  // shares below the extinction threshold
  std::size_t basin_samples = 0;    // seeds that ended in this cluster
  bool interior() const { return extinct.empty(); }
};

struct EquilibriumSearch {
  std::vector<EquilibriumReport> equilibria;
  std::vector<std::size_t> non_converged;  // seed indices
};

// Endpoint of one seed, or nullopt when it fails to settle.
std::optional<SocialState> settle(const Scenario& scenario, const RevisionProtocol& protocol,
                                  const SocialState& seed, const EquilibriumConfig& config);

EquilibriumSearch find_equilibria(const Scenario& scenario, const RevisionProtocol& protocol,
                                  const std::vector<SocialState>& seeds,
                                  const EquilibriumConfig& config);
EquilibriumSearch find_equilibria_serial(const Scenario& scenario,
                                         const RevisionProtocol& protocol,
                                         const std::vector<SocialState>& seeds,
                                         const EquilibriumConfig& config);

// Seeds on a resolution × resolution grid over the first two strategies of
// `population` (last strategy implicit); others taken from `base`. Grid
// points off the simplex are dropped.
std::vector<SocialState> seed_grid(const SocialState& base, std::size_t population,
                                   std::size_t resolution);

struct SweepEntry {
  double alpha = 0.0;
  std::optional<std::size_t> steps;  // convergence step; nullopt if never
};

// For each α, sets population's Smith probability, integrates the hybrid
// dynamics and records the convergence step.
std::vector<SweepEntry> alpha_sweep(const Scenario& scenario, std::size_t population,
                                    const std::vector<double>& alpha_values,
                                    const SocialState& initial, const IntegratorConfig& config);
std::vector<SweepEntry> alpha_sweep_serial(const Scenario& scenario, std::size_t population,
                                           const std::vector<double>& alpha_values,
                                           const SocialState& initial,
                                           const IntegratorConfig& config);

// Spearman rank correlation with average ranks for ties. Non-converged sweep
// entries rank above every converged one.
double spearman(const std::vector<double>& a, const std::vector<double>& b);
double sweep_rank_correlation(const std::vector<SweepEntry>& sweep);

}  // namespace evosync
