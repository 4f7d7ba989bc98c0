#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "evosync/dynamics.hpp"
#include "evosync/io/scenario_file.hpp"
#include "evosync/scenario.hpp"
#include "evosync/state.hpp"
#include "oracles.hpp"

namespace testing {

// Population over all `regions` regions with uniform parameters.
inline evosync::PopulationSpec population(std::size_t id, std::size_t size, std::size_t regions,
                                          double quality = 1.0) {
  evosync::PopulationSpec p;
  p.id = id;
  p.size = size;
  for (std::size_t m = 0; m < regions; ++m) {
    p.strategies.push_back(m);
    p.traversal_distance.push_back(500.0);
    p.data_quality.push_back(quality);
  }
  p.unit_energy_cost = 0.001;
  p.propulsion_power = 16.0;
  p.hover_power = 16.0;
  p.traversal_speed = 4.0;
  p.sensing_speed = 4.0;
  return p;
}

inline std::vector<evosync::RegionSpec> regions(std::size_t count, double route = 1000.0,
                                                double reward = 1000.0) {
  std::vector<evosync::RegionSpec> r;
  for (std::size_t m = 0; m < count; ++m) r.push_back({m, route, reward});
  return r;
}

// P identical populations over M identical regions: the uniform state is a
// rest point of every protocol.
inline evosync::Scenario symmetric(std::size_t P, std::size_t M, std::size_t size = 100) {
  std::vector<evosync::PopulationSpec> pops;
  for (std::size_t p = 0; p < P; ++p) pops.push_back(population(p, size, M));
  return evosync::Scenario(regions(M), pops);
}

// Scenario drawn from wide ranges, with random strategy subsets.
inline evosync::Scenario random_scenario(std::mt19937_64& rng) {
  auto U = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto I = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
  const std::size_t M = static_cast<std::size_t>(I(2, 5));
  const std::size_t P = static_cast<std::size_t>(I(1, 4));
  std::vector<evosync::RegionSpec> rs;
  for (std::size_t m = 0; m < M; ++m) rs.push_back({m, U(1000, 1800), U(1000, 2000)});
  std::vector<evosync::PopulationSpec> ps;
  for (std::size_t p = 0; p < P; ++p) {
    evosync::PopulationSpec s;
    s.id = p;
    s.size = static_cast<std::size_t>(I(50, 250));
    for (std::size_t m = 0; m < M; ++m) {
      if (M > 2 && I(0, 4) == 0 && s.strategies.size() + (M - m) > 2) continue;
      s.strategies.push_back(m);
      s.traversal_distance.push_back(U(300, 1000));
      s.data_quality.push_back(U(1, 5));
    }
    s.unit_energy_cost = 0.001;
    s.propulsion_power = U(16, 20);
    s.hover_power = U(16, 20);
    s.traversal_speed = U(3, 5);
    s.sensing_speed = U(3, 5);
    s.smith_probability = U(0, 1);
    ps.push_back(std::move(s));
  }
  return evosync::Scenario(rs, ps);
}

// Uniform draw from each population's simplex (Dirichlet(1, ..., 1)).
inline evosync::SocialState random_state(const evosync::Scenario& sc, std::mt19937_64& rng,
                                         double min_share = 0.0) {
  evosync::SocialState s(sc.layout());
  std::exponential_distribution<double> e(1.0);
  for (std::size_t p = 0; p < sc.num_populations(); ++p) {
    auto b = s.block(p);
    double sum = 0.0;
    for (double& x : b) sum += (x = e(rng));
    const double n = static_cast<double>(b.size());
    for (double& x : b) x = min_share + (1.0 - n * min_share) * x / sum;
  }
  return s;
}

inline oracle::State blocks(const evosync::SocialState& s) {
  oracle::State out;
  for (std::size_t p = 0; p < s.populations(); ++p) {
    const auto b = s.block(p);
    out.emplace_back(b.begin(), b.end());
  }
  return out;
}

// Translate a Scenario into the oracle's plain description.
inline std::pair<std::vector<oracle::Region>, std::vector<oracle::Population>> describe(
    const evosync::Scenario& sc) {
  std::vector<oracle::Region> rs;
  for (const auto& r : sc.regions()) rs.push_back({r.route_length, r.reward_pool});
  std::vector<oracle::Population> ps;
  for (const auto& p : sc.populations()) {
    oracle::Population o;
    o.N = static_cast<double>(p.size);
    for (auto m : p.strategies) o.regions.push_back(static_cast<int>(m));
    o.l = p.traversal_distance;
    o.b = p.data_quality;
    o.zeta = p.unit_energy_cost;
    o.eta1 = p.propulsion_power;
    o.eta2 = p.hover_power;
    o.v = p.traversal_speed;
    o.u = p.sensing_speed;
    ps.push_back(o);
  }
  return {rs, ps};
}

// Payoff table with the given values on a one-population layout.
inline evosync::PayoffTable table(const evosync::SocialState& x, std::vector<double> pi) {
  evosync::PayoffTable t{evosync::BlockVector(x.layout(), std::move(pi)), {}};
  for (std::size_t p = 0; p < x.populations(); ++p) {
    double a = 0.0;
    for (std::size_t m = 0; m < x.block(p).size(); ++m) a += x(p, m) * t.payoff(p, m);
    t.average.push_back(a);
  }
  return t;
}

// Populations 1 and 2 of the default scenario. The first is frozen at its
// initial state and the second revises by pure imitation.
struct FrozenPair {
  evosync::Scenario scenario;
  evosync::RevisionProtocol protocol;
  evosync::SocialState base;
};

inline FrozenPair frozen_pair() {
  const auto file = evosync::io::generate_scenario(evosync::io::kDefaultScenarioSeed);
  const std::vector<std::size_t> keep{0, 1};
  auto sc = file.scenario().restricted_to(keep).with_smith_probability(1, 0.0);
  auto proto = evosync::RevisionProtocol::from_scenario(sc);
  proto.freeze(0);
  return {std::move(sc), std::move(proto),
          evosync::SocialState::from_blocks({{0.3, 0.3, 0.4}, {0.4, 0.4, 0.2}})};
}

}  // namespace testing
