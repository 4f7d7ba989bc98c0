#include "evosync/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "evosync/errors.hpp"
#include "evosync/parallel.hpp"
#include "evosync/payoff.hpp"

namespace evosync {
namespace {

double grid_value(std::size_t i, std::size_t resolution) {
  return resolution <= 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(resolution - 1);
}

// Sets the implicit last coordinate of block p; false when it would be negative.
bool absorb_remainder(SocialState& s, std::size_t p) {
  auto b = s.block(p);
  double others = 0.0;
  for (std::size_t k = 0; k + 1 < b.size(); ++k) others += b[k];
  const double last = 1.0 - others;
  if (last < -1e-12) return false;
  b.back() = std::max(last, 0.0);
  return true;
}

double field_residual(const Scenario& scenario, const RevisionProtocol& protocol,
                      const SocialState& state) {
  return protocol_field(protocol, scenario, state, payoff_table(scenario, state)).max_abs();
}

FieldPoint evaluate_point(const Scenario& scenario, const RevisionProtocol& protocol,
                          const DirectionFieldSpec& spec, std::size_t index) {
  FieldPoint pt;
  pt.u = grid_value(index / spec.resolution_v, spec.resolution_u);
  pt.v = grid_value(index % spec.resolution_v, spec.resolution_v);
  const auto state = grid_state(spec, pt.u, pt.v);
  if (!state) {
    pt.skipped = true;
    return pt;
  }
  const auto field = protocol_field(protocol, scenario, *state, payoff_table(scenario, *state));
  pt.du = field(spec.u.population, spec.u.strategy);
  pt.dv = field(spec.v.population, spec.v.strategy);
  return pt;
}

template <class Loop>
std::vector<FieldPoint> run_field(Loop loop, const Scenario& scenario,
                                  const RevisionProtocol& protocol,
                                  const DirectionFieldSpec& spec) {
  validate_field_spec(scenario, spec);
  std::vector<FieldPoint> out(spec.resolution_u * spec.resolution_v);
  loop(out.size(), [&](std::size_t i) { out[i] = evaluate_point(scenario, protocol, spec, i); });
  return out;
}

EquilibriumSearch cluster(const Scenario& scenario, const RevisionProtocol& protocol,
                          const std::vector<std::optional<SocialState>>& endpoints,
                          const EquilibriumConfig& config) {
  EquilibriumSearch out;
  for (std::size_t i = 0; i < endpoints.size(); ++i) {
    if (!endpoints[i]) {
      out.non_converged.push_back(i);
      continue;
    }
    const auto& end = *endpoints[i];
    auto hit = std::find_if(out.equilibria.begin(), out.equilibria.end(), [&](const auto& r) {
      return r.state.max_abs_diff(end) <= config.cluster_tolerance;
    });
    if (hit != out.equilibria.end()) {
      ++hit->basin_samples;
      continue;
    }
    EquilibriumReport rep;
    rep.state = end;
    rep.residual = field_residual(scenario, protocol, end);
    rep.basin_samples = 1;
    for (std::size_t p = 0; p < end.populations(); ++p) {
      const auto b = end.block(p);
      for (std::size_t m = 0; m < b.size(); ++m) {
        if (b[m] < config.integrator.extinction_threshold) rep.extinct.push_back({p, m});
      }
    }
    out.equilibria.push_back(std::move(rep));
  }
  return out;
}

template <class Loop>
EquilibriumSearch run_equilibria(Loop loop, const Scenario& scenario,
                                 const RevisionProtocol& protocol,
                                 const std::vector<SocialState>& seeds,
                                 const EquilibriumConfig& config) {
  config.integrator.validate();
  for (const auto& s : seeds) scenario.check_state(s);
  std::vector<std::optional<SocialState>> endpoints(seeds.size());
  loop(seeds.size(),
       [&](std::size_t i) { endpoints[i] = settle(scenario, protocol, seeds[i], config); });
  return cluster(scenario, protocol, endpoints, config);
}

template <class Loop>
std::vector<SweepEntry> run_sweep(Loop loop, const Scenario& scenario, std::size_t population,
                                  const std::vector<double>& alpha_values,
                                  const SocialState& initial, const IntegratorConfig& config) {
  config.validate();
  scenario.check_state(initial);
  (void)scenario.population(population);
  for (double a : alpha_values) {
    if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("sweep values must lie in [0, 1]");
  }
  std::vector<SweepEntry> out(alpha_values.size());
  loop(alpha_values.size(), [&](std::size_t i) {
    const auto sc = scenario.with_smith_probability(population, alpha_values[i]);
    const auto traj = integrate(sc, RevisionProtocol::from_scenario(sc), initial, config);
    out[i] = {alpha_values[i], traj.convergence_step};
  });
  return out;
}

constexpr auto kParallel = [](std::size_t n, auto&& body) { parallel_for(n, body); };
constexpr auto kSerial = [](std::size_t n, auto&& body) { serial_for(n, body); };

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

void validate_field_spec(const Scenario& scenario, const DirectionFieldSpec& spec) {
  if (!(spec.fixed.layout() == scenario.layout())) {
    throw ValidationError("fixed state does not match the scenario layout");
  }
  for (double x : spec.fixed.values()) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw ValidationError("fixed coordinates must be >= 0");
  }
  for (const auto* axis : {&spec.u, &spec.v}) {
    if (axis->population >= scenario.num_populations()) {
      throw ValidationError("axis references unknown population " +
                            std::to_string(axis->population));
    }
    const auto n = scenario.layout().block_size(axis->population);
    if (axis->strategy + 1 >= n) {
      throw ValidationError("axis strategy " + std::to_string(axis->strategy) + " of population " +
                            std::to_string(axis->population) +
                            " is not free (the last strategy absorbs the remainder)");
    }
  }
  if (spec.u == spec.v) throw ValidationError("the two axes must differ");
  if (spec.resolution_u == 0 || spec.resolution_v == 0) {
    throw ValidationError("grid resolution must be >= 1");
  }
  for (std::size_t i = 0; i < spec.resolution_u * spec.resolution_v; ++i) {
    if (grid_state(spec, grid_value(i / spec.resolution_v, spec.resolution_u),
                   grid_value(i % spec.resolution_v, spec.resolution_v))) {
      return;
    }
  }
  throw ValidationError("no grid point of the direction field lies on the simplex");
}

std::optional<SocialState> grid_state(const DirectionFieldSpec& spec, double u, double v) {
  SocialState s = spec.fixed;
  s(spec.u.population, spec.u.strategy) = u;
  s(spec.v.population, spec.v.strategy) = v;
  if (!absorb_remainder(s, spec.u.population)) return std::nullopt;
  if (spec.v.population != spec.u.population && !absorb_remainder(s, spec.v.population)) {
    return std::nullopt;
  }
  if (!s.on_simplex(1e-9)) return std::nullopt;
  return s;
}

std::vector<FieldPoint> direction_field(const Scenario& scenario,
                                        const RevisionProtocol& protocol,
                                        const DirectionFieldSpec& spec) {
  return run_field(kParallel, scenario, protocol, spec);
}

std::vector<FieldPoint> direction_field_serial(const Scenario& scenario,
                                               const RevisionProtocol& protocol,
                                               const DirectionFieldSpec& spec) {
  return run_field(kSerial, scenario, protocol, spec);
}

std::optional<SocialState> settle(const Scenario& scenario, const RevisionProtocol& protocol,
                                  const SocialState& seed, const EquilibriumConfig& config) {
  const auto traj = integrate(scenario, protocol, seed, config.integrator);
  if (!traj.converged) return std::nullopt;
  SocialState state = traj.final_state();

  const double h = config.integrator.step_size;
  const auto budget = static_cast<std::size_t>(std::llround(config.refine_time / h));
  Rk4Stepper stepper(scenario, make_field(protocol));
  constexpr std::size_t kCheckEvery = 10;
  for (std::size_t k = 0;; k += kCheckEvery) {
    if (field_residual(scenario, protocol, state) < config.residual_tolerance) return state;
    if (k >= budget) return std::nullopt;
    for (std::size_t j = 0; j < kCheckEvery; ++j) stepper.advance(state, h);
  }
}

EquilibriumSearch find_equilibria(const Scenario& scenario, const RevisionProtocol& protocol,
                                  const std::vector<SocialState>& seeds,
                                  const EquilibriumConfig& config) {
  return run_equilibria(kParallel, scenario, protocol, seeds, config);
}

EquilibriumSearch find_equilibria_serial(const Scenario& scenario,
                                         const RevisionProtocol& protocol,
                                         const std::vector<SocialState>& seeds,
                                         const EquilibriumConfig& config) {
  return run_equilibria(kSerial, scenario, protocol, seeds, config);
}

std::vector<SocialState> seed_grid(const SocialState& base, std::size_t population,
                                   std::size_t resolution) {
  if (population >= base.populations() || base.layout().block_size(population) < 3) {
    throw ValidationError("seed grid needs a population with at least three strategies");
  }
  DirectionFieldSpec spec{{population, 0}, {population, 1}, base, resolution, resolution};
  std::vector<SocialState> seeds;
  for (std::size_t i = 0; i < resolution; ++i) {
    for (std::size_t j = 0; j < resolution; ++j) {
      if (auto s = grid_state(spec, grid_value(i, resolution), grid_value(j, resolution))) {
        seeds.push_back(std::move(*s));
      }
    }
  }
  return seeds;
}

std::vector<SweepEntry> alpha_sweep(const Scenario& scenario, std::size_t population,
                                    const std::vector<double>& alpha_values,
                                    const SocialState& initial, const IntegratorConfig& config) {
  return run_sweep(kParallel, scenario, population, alpha_values, initial, config);
}

std::vector<SweepEntry> alpha_sweep_serial(const Scenario& scenario, std::size_t population,
                                           const std::vector<double>& alpha_values,
                                           const SocialState& initial,
                                           const IntegratorConfig& config) {
  return run_sweep(kSerial, scenario, population, alpha_values, initial, config);
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ValidationError("spearman: length mismatch");
  if (a.size() < 2) return 0.0;
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  // A constant sequence has no rank order; report no correlation.
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double sweep_rank_correlation(const std::vector<SweepEntry>& sweep) {
  std::vector<double> alpha;
  std::vector<double> steps;
  for (const auto& e : sweep) {
    alpha.push_back(e.alpha);
    steps.push_back(e.steps ? static_cast<double>(*e.steps)
                            : std::numeric_limits<double>::infinity());
  }
  return spearman(alpha, steps);
}

}  // namespace evosync
