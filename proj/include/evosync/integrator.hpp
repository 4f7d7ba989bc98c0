#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "evosync/dynamics.hpp"
#include "evosync/scenario.hpp"
#include "evosync/state.hpp"

namespace evosync {

struct IntegratorConfig {
  double step_size = 0.01;
  double max_time = 1e4;  // 10^6 steps at the default step size
  double convergence_tau = 0.05;
  double extinction_threshold = 1e-3;
  std::size_t record_stride = 10;
  bool stop_on_convergence = true;

  void validate() const;
  std::size_t max_steps() const;
};

struct TrajectorySample {
  std::size_t step = 0;
  double time = 0.0;
  SocialState state;
  PayoffTable payoffs;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::size_t steps = 0;
  bool converged = false;
  std::optional<std::size_t> convergence_step;
  std::optional<double> convergence_time;
  // Largest per-step L1 correction applied by the simplex repair.
  double max_repair = 0.0;

  const SocialState& final_state() const { return samples.back().state; }
  const PayoffTable& final_payoffs() const { return samples.back().payoffs; }
};

// Writes the time derivative at (state, payoffs) into the third argument.
using FieldFunction =
    std::function<void(std::span<const double>, const PayoffTable&, VectorField&)>;

FieldFunction make_field(const RevisionProtocol& protocol);

// Clamps negative entries to zero and rescales each block to unit sum.
// Returns the L1 size of the correction.
double repair_onto_simplex(SocialState& state);

// One classical RK4 step followed by simplex repair.
SocialState step(const Scenario& scenario, const RevisionProtocol& protocol,
                 const SocialState& state, double h);

// Reusable RK4 stepper; holds stage buffers so repeated steps do not allocate.
class Rk4Stepper {
 public:
  Rk4Stepper(const Scenario& scenario, FieldFunction field);

  // Advances `state` in place by h; returns the repair magnitude. The step is
  // split into RK4 substeps where the field would move some share by more
  // than half of max(share, 1e-3), or where the stage-based estimate of h·|λ|
  // exceeds 2; smooth regions take a single step of h. Throws
  // IntegrationError on a non-finite or unresolvably stiff field.
  double advance(SocialState& state, double h);

  static constexpr double kShareFloor = 1e-3;
  static constexpr double kMaxRelativeMove = 0.5;
  static constexpr double kMaxStiffness = 2.0;
  static constexpr std::size_t kMaxSubsteps = 10'000'000;

 private:
  void eval(std::span<const double> x, VectorField& out);
  // Largest substep allowed by the relative-move limit, from k1_ at x.
  double stable_step(std::span<const double> x) const;
  // One RK4 step from `state`, with k1_ already evaluated there. Returns the
  // stiffness estimate h·|λ|.
  double rk4(SocialState& state, double h);

  const Scenario& scenario_;
  FieldFunction field_;
  PayoffTable payoffs_;
  VectorField k1_, k2_, k3_, k4_;
  std::vector<double> stage_;
  std::vector<double> saved_;
};

// Spread max π − min π over strategies above the extinction threshold.
double payoff_spread(const SocialState& state, const PayoffTable& payoffs, std::size_t p,
                     double extinction_threshold);

// True when every active population's spread is ≤ τ. Inactive (frozen)
// populations are ignored; an empty mask means all are active.
bool payoffs_converged(const SocialState& state, const PayoffTable& payoffs,
                       const IntegratorConfig& config, const std::vector<bool>& frozen = {});

// First recorded sample time at which payoffs_converged holds.
std::optional<double> converged_at(const Trajectory& trajectory, const IntegratorConfig& config,
                                   const std::vector<bool>& frozen = {});

Trajectory integrate(const Scenario& scenario, const RevisionProtocol& protocol,
                     const SocialState& initial, const IntegratorConfig& config);

// Integrates an arbitrary field (e.g. a time-reversed one). Convergence is
// judged on populations not marked frozen.
Trajectory integrate_field(const Scenario& scenario, const FieldFunction& field,
                           const SocialState& initial, const IntegratorConfig& config,
                           const std::vector<bool>& frozen = {});

}  // namespace evosync
