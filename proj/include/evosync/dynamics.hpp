#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "evosync/scenario.hpp"
#include "evosync/state.hpp"

namespace evosync {

enum class ProtocolKind {
  // ρ_{m,i} = x_i [π_i − π_m]_+  (mean dynamics: replicator)
  PairwiseProportionalImitation,
  // ρ_{m,i} = [π_i − π_m]_+      (mean dynamics: Smith)
  PairwiseComparison,
};

struct ProtocolComponent {
  ProtocolKind kind;
  double weight;
};

// Per-population mixture of revision protocols. A population may also be
// frozen: its members never receive revision opportunities, so every switch
// rate out of it is zero.
class RevisionProtocol {
 public:
  // Each population's weights must be nonnegative and sum to one (1e-9).
  explicit RevisionProtocol(std::vector<std::vector<ProtocolComponent>> mixtures);

  static RevisionProtocol imitation(std::size_t populations);
  static RevisionProtocol comparison(std::size_t populations);
  // Smith with probability alpha[p], replicator otherwise.
  static RevisionProtocol hybrid(std::span<const double> smith_probability);
  static RevisionProtocol from_scenario(const Scenario& scenario);

  std::size_t populations() const { return mixtures_.size(); }
  std::span<const ProtocolComponent> components(std::size_t p) const { return mixtures_[p]; }
  // Total weight of `kind` in population p (components may repeat a kind).
  double weight(std::size_t p, ProtocolKind kind) const;

  RevisionProtocol& freeze(std::size_t p);
  bool frozen(std::size_t p) const { return frozen_[p]; }
  const std::vector<bool>& frozen_mask() const { return frozen_; }

 private:
  std::vector<std::vector<ProtocolComponent>> mixtures_;
  std::vector<bool> frozen_;
};

// Conditional switch rate ρ^p_{from,to} (local strategy indices). Throws
// StructuralError when from == to or an index is out of range.
double switch_rate(const RevisionProtocol& protocol, const PayoffTable& payoffs,
                   const SocialState& state, std::size_t population, std::size_t from,
                   std::size_t to);

// Generic inflow-minus-outflow evaluation over switch_rate; O(Σ_p |S^p|²).
VectorField mean_dynamics(const RevisionProtocol& protocol, const Scenario& scenario,
                          const SocialState& state);
VectorField mean_dynamics(const RevisionProtocol& protocol, const Scenario& scenario,
                          const SocialState& state, const PayoffTable& payoffs);

// ẋ^p_m = x^p_m (π^p_m − π̄^p)
VectorField replicator_field(const Scenario& scenario, const SocialState& state,
                             const PayoffTable& payoffs);

// ẋ^p_m = Σ_j x^p_j [π^p_m − π^p_j]_+ − x^p_m Σ_j [π^p_j − π^p_m]_+
VectorField smith_field(const Scenario& scenario, const SocialState& state,
                        const PayoffTable& payoffs);

// α^p·smith + (1−α^p)·replicator per population. Throws ValidationError for
// α outside [0, 1] or a length mismatch.
VectorField hybrid_field(const Scenario& scenario, const SocialState& state,
                         const PayoffTable& payoffs, std::span<const double> alpha);

// Closed-form field of an arbitrary protocol mixture (frozen blocks are zero).
VectorField protocol_field(const RevisionProtocol& protocol, const Scenario& scenario,
                           const SocialState& state, const PayoffTable& payoffs);

// Kernel behind protocol_field: writes into `out`, which must share the
// state's layout. Skips the simplex check so integrator stages can use it.
void protocol_field_into(const RevisionProtocol& protocol, std::span<const double> x,
                         const PayoffTable& payoffs, VectorField& out);

}  // namespace evosync
