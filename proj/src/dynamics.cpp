#include "evosync/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "evosync/errors.hpp"
#include "evosync/payoff.hpp"

namespace evosync {
namespace {

double positive_part(double v) { return v > 0.0 ? v : 0.0; }

void replicator_block(std::span<const double> x, std::span<const double> pi,
                      std::span<double> out) {
  double avg = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) avg += x[i] * pi[i];
  for (std::size_t m = 0; m < x.size(); ++m) out[m] = x[m] * (pi[m] - avg);
}

void smith_block(std::span<const double> x, std::span<const double> pi, std::span<double> out) {
  for (std::size_t m = 0; m < x.size(); ++m) {
    double inflow = 0.0;
    double outflow = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      inflow += x[j] * positive_part(pi[m] - pi[j]);
      outflow += positive_part(pi[j] - pi[m]);
    }
    out[m] = inflow - x[m] * outflow;
  }
}

double kind_rate(ProtocolKind kind, std::span<const double> x, std::span<const double> pi,
                 std::size_t from, std::size_t to) {
  const double excess = positive_part(pi[to] - pi[from]);
  switch (kind) {
    case ProtocolKind::PairwiseProportionalImitation:
      return x[to] * excess;
    case ProtocolKind::PairwiseComparison:
      return excess;
  }
  return 0.0;
}

void check_payoffs(const SocialState& state, const PayoffTable& payoffs) {
  if (!(state.layout() == payoffs.payoff.layout())) {
    throw StructuralError("payoff table does not match the state layout");
  }
}

}  // namespace

RevisionProtocol::RevisionProtocol(std::vector<std::vector<ProtocolComponent>> mixtures)
    : mixtures_(std::move(mixtures)), frozen_(mixtures_.size(), false) {
  for (std::size_t p = 0; p < mixtures_.size(); ++p) {
    double total = 0.0;
    for (const auto& c : mixtures_[p]) {
      if (!std::isfinite(c.weight) || c.weight < 0.0 || c.weight > 1.0) {
        throw ValidationError("population " + std::to_string(p) +
                              ": protocol weights must lie in [0, 1]");
      }
      total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ValidationError("population " + std::to_string(p) +
                            ": protocol weights sum to " + std::to_string(total));
    }
  }
}

RevisionProtocol RevisionProtocol::imitation(std::size_t populations) {
  return RevisionProtocol(std::vector<std::vector<ProtocolComponent>>(
      populations, {{ProtocolKind::PairwiseProportionalImitation, 1.0}}));
}

RevisionProtocol RevisionProtocol::comparison(std::size_t populations) {
  return RevisionProtocol(std::vector<std::vector<ProtocolComponent>>(
      populations, {{ProtocolKind::PairwiseComparison, 1.0}}));
}

RevisionProtocol RevisionProtocol::hybrid(std::span<const double> smith_probability) {
  std::vector<std::vector<ProtocolComponent>> mix;
  for (double a : smith_probability) {
    mix.push_back({{ProtocolKind::PairwiseComparison, a},
                   {ProtocolKind::PairwiseProportionalImitation, 1.0 - a}});
  }
  return RevisionProtocol(std::move(mix));
}

RevisionProtocol RevisionProtocol::from_scenario(const Scenario& scenario) {
  std::vector<double> alpha;
  for (const auto& p : scenario.populations()) alpha.push_back(p.smith_probability);
  return hybrid(alpha);
}

double RevisionProtocol::weight(std::size_t p, ProtocolKind kind) const {
  double w = 0.0;
  for (const auto& c : mixtures_.at(p)) {
    if (c.kind == kind) w += c.weight;
  }
  return w;
}

RevisionProtocol& RevisionProtocol::freeze(std::size_t p) {
  frozen_.at(p) = true;
  return *this;
}

double switch_rate(const RevisionProtocol& protocol, const PayoffTable& payoffs,
                   const SocialState& state, std::size_t population, std::size_t from,
                   std::size_t to) {
  check_payoffs(state, payoffs);
  if (population >= state.populations() || population >= protocol.populations()) {
    throw StructuralError("unknown population " + std::to_string(population));
  }
  const auto x = state.block(population);
  if (from >= x.size() || to >= x.size()) throw StructuralError("strategy index out of range");
  if (from == to) throw StructuralError("switch rate from a strategy to itself is undefined");
  if (protocol.frozen(population)) return 0.0;
  const auto pi = payoffs.payoff.block(population);
  double rate = 0.0;
  for (const auto& c : protocol.components(population)) {
    rate += c.weight * kind_rate(c.kind, x, pi, from, to);
  }
  return rate;
}

VectorField mean_dynamics(const RevisionProtocol& protocol, const Scenario& scenario,
                          const SocialState& state, const PayoffTable& payoffs) {
  scenario.check_state(state);
  check_payoffs(state, payoffs);
  if (protocol.populations() != scenario.num_populations()) {
    throw StructuralError("protocol and scenario disagree on the population count");
  }
  VectorField field(state.layout());
  for (std::size_t p = 0; p < state.populations(); ++p) {
    const auto x = state.block(p);
    auto out = field.block(p);
    for (std::size_t m = 0; m < x.size(); ++m) {
      double inflow = 0.0;
      double outflow = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (i == m) continue;
        inflow += x[i] * switch_rate(protocol, payoffs, state, p, i, m);
        outflow += switch_rate(protocol, payoffs, state, p, m, i);
      }
      out[m] = inflow - x[m] * outflow;
    }
  }
  return field;
}

VectorField mean_dynamics(const RevisionProtocol& protocol, const Scenario& scenario,
                          const SocialState& state) {
  return mean_dynamics(protocol, scenario, state, payoff_table(scenario, state));
}

VectorField replicator_field(const Scenario& scenario, const SocialState& state,
                             const PayoffTable& payoffs) {
  scenario.check_state(state);
  check_payoffs(state, payoffs);
  VectorField field(state.layout());
  for (std::size_t p = 0; p < state.populations(); ++p) {
    replicator_block(state.block(p), payoffs.payoff.block(p), field.block(p));
  }
  return field;
}

VectorField smith_field(const Scenario& scenario, const SocialState& state,
                        const PayoffTable& payoffs) {
  scenario.check_state(state);
  check_payoffs(state, payoffs);
  VectorField field(state.layout());
  for (std::size_t p = 0; p < state.populations(); ++p) {
    smith_block(state.block(p), payoffs.payoff.block(p), field.block(p));
  }
  return field;
}

VectorField hybrid_field(const Scenario& scenario, const SocialState& state,
                         const PayoffTable& payoffs, std::span<const double> alpha) {
  if (alpha.size() != state.populations()) {
    throw ValidationError("need one Smith probability per population");
  }
  for (double a : alpha) {
    if (!std::isfinite(a) || a < 0.0 || a > 1.0) {
      throw ValidationError("Smith probability must lie in [0, 1]");
    }
  }
  const auto smith = smith_field(scenario, state, payoffs);
  const auto repl = replicator_field(scenario, state, payoffs);
  VectorField field(state.layout());
  for (std::size_t p = 0; p < state.populations(); ++p) {
    const auto s = smith.block(p);
    const auto r = repl.block(p);
    auto out = field.block(p);
    for (std::size_t m = 0; m < out.size(); ++m) {
      out[m] = alpha[p] * s[m] + (1.0 - alpha[p]) * r[m];
    }
  }
  return field;
}

void protocol_field_into(const RevisionProtocol& protocol, std::span<const double> x,
                         const PayoffTable& payoffs, VectorField& out) {
  thread_local std::vector<double> scratch;
  const auto& layout = out.layout();
  for (std::size_t p = 0; p < layout.blocks(); ++p) {
    auto o = out.block(p);
    std::fill(o.begin(), o.end(), 0.0);
    if (protocol.frozen(p)) continue;
    const auto xp = x.subspan(layout.offset(p), layout.block_size(p));
    const auto pi = payoffs.payoff.block(p);
    scratch.resize(o.size());
    const double w_imit = protocol.weight(p, ProtocolKind::PairwiseProportionalImitation);
    const double w_cmp = protocol.weight(p, ProtocolKind::PairwiseComparison);
    if (w_imit > 0.0) {
      replicator_block(xp, pi, scratch);
      for (std::size_t m = 0; m < o.size(); ++m) o[m] += w_imit * scratch[m];
    }
    if (w_cmp > 0.0) {
      smith_block(xp, pi, scratch);
      for (std::size_t m = 0; m < o.size(); ++m) o[m] += w_cmp * scratch[m];
    }
  }
}

VectorField protocol_field(const RevisionProtocol& protocol, const Scenario& scenario,
                           const SocialState& state, const PayoffTable& payoffs) {
  scenario.check_state(state);
  check_payoffs(state, payoffs);
  if (protocol.populations() != scenario.num_populations()) {
    throw StructuralError("protocol and scenario disagree on the population count");
  }
  VectorField field(state.layout());
  protocol_field_into(protocol, state.values(), payoffs, field);
  return field;
}

}  // namespace evosync
