#include "evosync/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "evosync/errors.hpp"
#include "evosync/payoff.hpp"

namespace evosync {

void IntegratorConfig::validate() const {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw ValidationError("step size must be positive");
  }
  if (!(max_time >= 0.0) || !std::isfinite(max_time)) {
    throw ValidationError("max time must be nonnegative");
  }
  if (!(convergence_tau > 0.0)) throw ValidationError("convergence tau must be positive");
  if (!(extinction_threshold >= 0.0 && extinction_threshold < 1.0)) {
    throw ValidationError("extinction threshold must lie in [0, 1)");
  }
  if (record_stride == 0) throw ValidationError("record stride must be >= 1");
}

std::size_t IntegratorConfig::max_steps() const {
  return static_cast<std::size_t>(std::llround(max_time / step_size));
}

FieldFunction make_field(const RevisionProtocol& protocol) {
  return [protocol](std::span<const double> x, const PayoffTable& pi, VectorField& out) {
    protocol_field_into(protocol, x, pi, out);
  };
}

double repair_onto_simplex(SocialState& state) {
  double repair = 0.0;
  for (std::size_t p = 0; p < state.populations(); ++p) {
    auto b = state.block(p);
    double sum = 0.0;
    for (double& x : b) {
      if (x < 0.0) {
        repair += -x;
        x = 0.0;
      }
      sum += x;
    }
    if (!(sum > 0.0)) {
      throw IntegrationError("population " + std::to_string(p) + " lost all mass", state.raw());
    }
    for (double& x : b) {
      const double scaled = x / sum;
      repair += std::abs(scaled - x);
      x = scaled;
    }
  }
  return repair;
}

Rk4Stepper::Rk4Stepper(const Scenario& scenario, FieldFunction field)
    : scenario_(scenario),
      field_(std::move(field)),
      payoffs_{BlockVector(scenario.layout()), {}},
      k1_(scenario.layout()),
      k2_(scenario.layout()),
      k3_(scenario.layout()),
      k4_(scenario.layout()),
      stage_(scenario.total_strategies()) {}

void Rk4Stepper::eval(std::span<const double> x, VectorField& out) {
  evaluate_payoffs(scenario_, x, payoffs_);
  field_(x, payoffs_, out);
  for (double v : out.values()) {
    if (!std::isfinite(v)) {
      throw IntegrationError("vector field is not finite",
                             std::vector<double>(x.begin(), x.end()));
    }
  }
}

double Rk4Stepper::stable_step(std::span<const double> x) const {
  double rate = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    rate = std::max(rate, std::abs(k1_.values()[i]) / std::max(x[i], kShareFloor));
  }
  return rate > 0.0 ? kMaxRelativeMove / rate : std::numeric_limits<double>::infinity();
}

double Rk4Stepper::rk4(SocialState& state, double h) {
  const auto x = state.values();
  const auto n = x.size();
  for (std::size_t i = 0; i < n; ++i) stage_[i] = x[i] + 0.5 * h * k1_.values()[i];
  eval(stage_, k2_);
  for (std::size_t i = 0; i < n; ++i) stage_[i] = x[i] + 0.5 * h * k2_.values()[i];
  eval(stage_, k3_);
  for (std::size_t i = 0; i < n; ++i) stage_[i] = x[i] + h * k3_.values()[i];
  eval(stage_, k4_);
  double d21 = 0.0, d32 = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d21 = std::max(d21, std::abs(k2_.values()[i] - k1_.values()[i]));
    d32 = std::max(d32, std::abs(k3_.values()[i] - k2_.values()[i]));
    scale = std::max(scale, std::abs(k1_.values()[i]));
    x[i] += h / 6.0 *
            (k1_.values()[i] + 2.0 * k2_.values()[i] + 2.0 * k3_.values()[i] + k4_.values()[i]);
  }
  // Shampine's estimate of h·|λ| from successive stage differences.
  if (d21 <= 1e-12 * (1.0 + scale)) return 0.0;
  return 2.0 * d32 / d21;
}

double Rk4Stepper::advance(SocialState& state, double h) {
  double repaired = 0.0;
  double done = 0.0;
  eval(state.values(), k1_);
  for (std::size_t sub = 1;; ++sub) {
    double dt = std::min(h - done, stable_step(state.values()));
    saved_ = state.raw();
    while (rk4(state, dt) > kMaxStiffness) {
      std::copy(saved_.begin(), saved_.end(), state.values().begin());
      dt *= 0.5;
      if (dt < 1e-12 * h) {
        throw IntegrationError("vector field too stiff to resolve", state.raw());
      }
    }
    repaired += repair_onto_simplex(state);
    done += dt;
    if (h - done <= 1e-12 * h) break;
    if (sub == kMaxSubsteps) {
      throw IntegrationError("vector field too stiff to resolve within one step",
                             state.raw());
    }
    eval(state.values(), k1_);
  }
  return repaired;
}

SocialState step(const Scenario& scenario, const RevisionProtocol& protocol,
                 const SocialState& state, double h) {
  scenario.check_state(state);
  if (!(h > 0.0)) throw ValidationError("step size must be positive");
  Rk4Stepper stepper(scenario, make_field(protocol));
  SocialState next = state;
  stepper.advance(next, h);
  return next;
}

double payoff_spread(const SocialState& state, const PayoffTable& payoffs, std::size_t p,
                     double extinction_threshold) {
  return payoffs.spread(state, p, extinction_threshold);
}

bool payoffs_converged(const SocialState& state, const PayoffTable& payoffs,
                       const IntegratorConfig& config, const std::vector<bool>& frozen) {
  for (std::size_t p = 0; p < state.populations(); ++p) {
    if (!frozen.empty() && frozen[p]) continue;
    if (payoff_spread(state, payoffs, p, config.extinction_threshold) > config.convergence_tau) {
      return false;
    }
  }
  return true;
}

std::optional<double> converged_at(const Trajectory& trajectory, const IntegratorConfig& config,
                                   const std::vector<bool>& frozen) {
  for (const auto& s : trajectory.samples) {
    if (payoffs_converged(s.state, s.payoffs, config, frozen)) return s.time;
  }
  return std::nullopt;
}

Trajectory integrate_field(const Scenario& scenario, const FieldFunction& field,
                           const SocialState& initial, const IntegratorConfig& config,
                           const std::vector<bool>& frozen) {
  config.validate();
  scenario.check_state(initial);

  Trajectory traj;
  SocialState state = initial;
  PayoffTable payoffs = payoff_table(scenario, state);
  const double h = config.step_size;
  auto record = [&](std::size_t k) {
    traj.samples.push_back({k, static_cast<double>(k) * h, state, payoffs});
  };

  record(0);
  if (payoffs_converged(state, payoffs, config, frozen)) {
    traj.converged = true;
    traj.convergence_step = 0;
    traj.convergence_time = 0.0;
    if (config.stop_on_convergence) return traj;
  }

  Rk4Stepper stepper(scenario, field);
  const std::size_t max_steps = config.max_steps();
  std::size_t k = 0;
  while (k < max_steps) {
    ++k;
    traj.max_repair = std::max(traj.max_repair, stepper.advance(state, h));
    evaluate_payoffs(scenario, state.values(), payoffs);
    const bool done = !traj.converged && payoffs_converged(state, payoffs, config, frozen);
    if (done) {
      traj.converged = true;
      traj.convergence_step = k;
      traj.convergence_time = static_cast<double>(k) * h;
    }
    const bool last = k == max_steps || (done && config.stop_on_convergence);
    if (k % config.record_stride == 0 || last) record(k);
    if (done && config.stop_on_convergence) break;
  }
  traj.steps = k;
  return traj;
}

Trajectory integrate(const Scenario& scenario, const RevisionProtocol& protocol,
                     const SocialState& initial, const IntegratorConfig& config) {
  if (protocol.populations() != scenario.num_populations()) {
    throw StructuralError("protocol and scenario disagree on the population count");
  }
  return integrate_field(scenario, make_field(protocol), initial, config, protocol.frozen_mask());
}

}  // namespace evosync
