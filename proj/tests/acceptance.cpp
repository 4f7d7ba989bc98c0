// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "evosync/analysis.hpp"
#include "evosync/app/run.hpp"
#include "evosync/integrator.hpp"
#include "evosync/io/scenario_file.hpp"
#include "evosync/payoff.hpp"
#include "evosync/stochastic.hpp"
#include "helpers.hpp"

using namespace evosync;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("%s %2d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

RevisionProtocol random_protocol(const Scenario& sc, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> alpha;
  for (std::size_t p = 0; p < sc.num_populations(); ++p) {
    const double r = u(rng);
    alpha.push_back(r < 0.2 ? 0.0 : r < 0.4 ? 1.0 : u(rng));
  }
  auto proto = RevisionProtocol::hybrid(alpha);
  if (sc.num_populations() > 1 && u(rng) < 0.2) proto.freeze(rng() % sc.num_populations());
  return proto;
}

Outcome equal_payoff_convergence() {
  const auto file = io::generate_scenario(io::kDefaultScenarioSeed);
  const auto sc = file.scenario();
  const auto start = Clock::now();
  const auto tr = integrate(sc, file.revision_protocol(), file.initial(), file.integrator);
  const double secs = seconds_since(start);
  double spread = 0.0;
  for (std::size_t p = 0; p < sc.num_populations(); ++p) {
    spread = std::max(spread, payoff_spread(tr.final_state(), tr.final_payoffs(), p,
                                            file.integrator.extinction_threshold));
  }
  const bool ok = tr.converged && tr.steps <= 1000000 && spread <= 0.05 && secs < 10.0;
  return {ok, "steps=" + std::to_string(tr.steps) + fmt(" max_spread=%.3g", spread) +
                  fmt(" runtime=%.3gs", secs)};
}

Outcome alpha_monotonicity() {
  const auto file = io::generate_scenario(io::kDefaultScenarioSeed);
  std::vector<double> alphas;
  for (int i = 0; i <= 10; ++i) alphas.push_back(i / 10.0);
  const auto start = Clock::now();
  const auto sweep = alpha_sweep(file.scenario(), 2, alphas, file.initial(), file.integrator);
  const double secs = seconds_since(start);
  const double rho = sweep_rank_correlation(sweep);
  std::string steps;
  bool all = true;
  for (const auto& e : sweep) {
    steps += (steps.empty() ? "" : ",") + (e.steps ? std::to_string(*e.steps) : std::string("-"));
    all &= e.steps.has_value();
  }
  return {all && rho <= -0.8 && secs < 120.0,
          fmt("spearman=%.3f", rho) + " steps=[" + steps + "]" + fmt(" runtime=%.3gs", secs)};
}

Outcome equilibrium_multiplicity() {
  const auto pair = testing::frozen_pair();
  EquilibriumConfig config;
  const auto seeds = seed_grid(pair.base, 1, 10);
  const auto res = find_equilibria(pair.scenario, pair.protocol, seeds, config);
  std::size_t interior = 0, extinct = 0;
  double worst = 0.0;
  for (const auto& e : res.equilibria) {
    (e.interior() ? interior : extinct) += 1;
    worst = std::max(worst, e.residual);
  }
  return {interior >= 1 && extinct >= 1 && worst < 1e-6,
          "equilibria=" + std::to_string(res.equilibria.size()) + " interior=" +
              std::to_string(interior) + " extinction=" + std::to_string(extinct) +
              fmt(" max_residual=%.3g", worst)};
}

Outcome simplex_preservation() {
  std::mt19937_64 rng(404);
  double worst_sum = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const auto sc = testing::random_scenario(rng);
    const auto x = testing::random_state(sc, rng);
    const auto proto = random_protocol(sc, rng);
    const auto f = protocol_field(proto, sc, x, payoff_table(sc, x));
    for (std::size_t p = 0; p < sc.num_populations(); ++p) {
      worst_sum = std::max(worst_sum, std::abs(f.block_sum(p)));
    }
  }
  double worst_repair = 0.0;
  bool on_simplex = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto sc = testing::random_scenario(rng);
    auto x = testing::random_state(sc, rng);
    const auto proto = random_protocol(sc, rng);
    Rk4Stepper stepper(sc, make_field(proto));
    for (int k = 0; k < 1000; ++k) {
      worst_repair = std::max(worst_repair, stepper.advance(x, 0.01));
    }
    on_simplex &= x.on_simplex(1e-12);
  }
  return {worst_sum <= 1e-9 && worst_repair < 1e-6 && on_simplex,
          fmt("max|sum|=%.3g", worst_sum) + fmt(" max_repair=%.3g", worst_repair)};
}

Outcome closed_form_equivalence() {
  std::mt19937_64 rng(505);
  double worst_r = 0.0, worst_s = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto sc = testing::random_scenario(rng);
    const auto x = testing::random_state(sc, rng);
    const auto t = payoff_table(sc, x);
    const auto P = sc.num_populations();
    worst_r = std::max(worst_r, mean_dynamics(RevisionProtocol::imitation(P), sc, x, t)
                                    .max_abs_diff(replicator_field(sc, x, t)));
    worst_s = std::max(worst_s, mean_dynamics(RevisionProtocol::comparison(P), sc, x, t)
                                    .max_abs_diff(smith_field(sc, x, t)));
  }
  return {worst_r <= 1e-12 && worst_s <= 1e-12,
          fmt("replicator=%.3g", worst_r) + fmt(" smith=%.3g", worst_s)};
}

Outcome hybrid_linearity() {
  std::mt19937_64 rng(606);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto sc = testing::random_scenario(rng);
    const auto x = testing::random_state(sc, rng);
    const auto t = payoff_table(sc, x);
    const auto r = replicator_field(sc, x, t);
    const auto s = smith_field(sc, x, t);
    for (double a : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const std::vector<double> alpha(sc.num_populations(), a);
      const auto h = hybrid_field(sc, x, t, alpha);
      for (std::size_t i = 0; i < h.size(); ++i) {
        const double mix = a * s.values()[i] + (1.0 - a) * r.values()[i];
        worst = std::max(worst, std::abs(h.values()[i] - mix));
      }
    }
  }
  return {worst <= 1e-12, fmt("max_diff=%.3g", worst)};
}

Outcome reward_conservation() {
  std::mt19937_64 rng(707);
  double worst = 0.0;
  int states = 0;
  while (states < 1000) {
    const auto sc = testing::random_scenario(rng);
    const auto x = testing::random_state(sc, rng);
    bool above = true;
    for (std::size_t m = 0; m < sc.num_regions() && above; ++m) {
      if (sc.selectors(m).empty()) continue;
      const double floor =
          sc.denominator_floor() * sc.total_size() * sc.min_quality(m);
      above = effective_selector_mass(sc, x, m) > floor;
    }
    if (!above) continue;
    ++states;
    for (std::size_t m = 0; m < sc.num_regions(); ++m) {
      if (sc.selectors(m).empty()) continue;
      double paid = 0.0;
      for (const auto& s : sc.selectors(m)) {
        paid += x(s.population, s.strategy) *
                static_cast<double>(sc.population(s.population).size) *
                reward_share(sc, x, s.population, m);
      }
      const double R = sc.region(m).reward_pool;
      worst = std::max(worst, std::abs(paid - R) / R);
    }
  }
  return {worst <= 1e-6, fmt("max_rel_err=%.3g", worst)};
}

// Identical populations over identical regions with random shared parameters.
Scenario random_symmetric(std::mt19937_64& rng) {
  auto U = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  const std::size_t P = 1 + rng() % 4;
  const std::size_t M = 2 + rng() % 4;
  auto pop = testing::population(0, 50 + rng() % 201, M, U(1, 5));
  const double l = U(300, 1000);
  for (auto& d : pop.traversal_distance) d = l;
  pop.propulsion_power = U(16, 20);
  pop.hover_power = U(16, 20);
  pop.traversal_speed = U(3, 5);
  pop.sensing_speed = U(3, 5);
  std::vector<PopulationSpec> pops;
  for (std::size_t p = 0; p < P; ++p) {
    pops.push_back(pop);
    pops.back().id = p;
  }
  return Scenario(testing::regions(M, U(1000, 1800), U(1000, 2000)), pops);
}

Outcome stationarity() {
  std::mt19937_64 rng(808);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto sc = random_symmetric(rng);
    const auto x = sc.uniform_state();
    const auto t = payoff_table(sc, x);
    worst = std::max({worst, replicator_field(sc, x, t).max_abs(), smith_field(sc, x, t).max_abs()});
  }
  bool extinct_stay = true;
  std::size_t steps = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto sc = testing::random_scenario(rng);
    auto x = testing::random_state(sc, rng);
    for (std::size_t p = 0; p < sc.num_populations(); ++p) {
      if (x.block(p).size() > 2) x(p, rng() % x.block(p).size()) = 0.0;
    }
    x(0, 0) = 0.0;
    repair_onto_simplex(x);
    std::vector<std::size_t> zeros;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x.values()[i] == 0.0) zeros.push_back(i);
    }
    IntegratorConfig config;
    config.record_stride = 1;
    config.max_time = 100.0;
    const auto tr = integrate(sc, RevisionProtocol::imitation(sc.num_populations()), x, config);
    steps += tr.steps;
    for (const auto& s : tr.samples) {
      for (auto i : zeros) extinct_stay &= s.state.values()[i] == 0.0;
    }
  }
  return {worst <= 1e-9 && extinct_stay,
          fmt("max|field|=%.3g", worst) + " extinct_preserved=" +
              (extinct_stay ? "yes" : "no") + " steps=" + std::to_string(steps)};
}

// Default scenario with every population of size n. Rewards and route lengths
// scale with n so that payoffs, and hence the mean dynamics, do not depend on n.
Scenario scaled_default(std::size_t n) {
  const auto file = io::generate_scenario(io::kDefaultScenarioSeed);
  const double k = static_cast<double>(n) / 100.0;
  auto regions = file.regions;
  for (auto& r : regions) {
    r.reward_pool *= k;
    r.route_length *= k;
  }
  auto pops = file.scenario().populations();
  for (auto& p : pops) p.size = n;
  return Scenario(regions, pops, file.denominator_floor);
}

Outcome mean_field_oracle() {
  const auto file = io::generate_scenario(io::kDefaultScenarioSeed);
  const auto x0 = file.initial();
  const double horizon = 6.0;

  // The ODE does not depend on n; integrate it once.
  const auto ode_sc = scaled_default(100);
  const auto proto = RevisionProtocol::from_scenario(ode_sc);
  IntegratorConfig ic;
  ic.stop_on_convergence = false;
  ic.max_time = horizon;
  ic.record_stride = 10;
  const auto ode = integrate(ode_sc, proto, x0, ic);
  // Twice the largest outflow at x0, kept fixed across sizes; the clock rate
  // equals the bound so agent time and ODE time coincide.
  const double bound = 2.0 * auto_rate_bound(ode_sc, proto, x0) / 1.5;

  std::string detail;
  std::vector<double> devs;
  for (std::size_t n : {100, 1000, 10000}) {
    const auto sc = scaled_default(n);
    StochasticConfig config;
    config.seed = 2024;
    config.rate_bound = bound;
    config.clock_rate = bound;
    config.horizon = horizon;
    config.record_interval = 0.1;
    const auto init = AgentPopulationState::from_shares(sc, x0);
    const auto runs = simulate_ensemble(sc, RevisionProtocol::from_scenario(sc), init, config, 20);
    const auto mean = ensemble_mean(runs);
    double dev = 0.0;
    for (std::size_t k = 0; k < mean.size() && k < ode.samples.size(); ++k) {
      dev = std::max(dev, mean[k].max_abs_diff(ode.samples[k].state));
    }
    devs.push_back(dev);
    detail += (detail.empty() ? "" : " ") + ("N=" + std::to_string(n)) + fmt(":%.4f", dev);
  }
  const bool monotone = devs[1] <= devs[0] && devs[2] <= devs[1];
  return {devs[2] <= 0.03 && monotone, detail + fmt(" bound=%.3g", bound)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "evosync_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const auto scenario = root / "scenario.json";
  {
    std::ostringstream out, err;
    app::RunOptions g{"generate", {}, scenario};
    g.seed = io::kDefaultScenarioSeed;
    if (app::run(g, out, err) != 0) return {false, "generate failed: " + err.str()};
  }
  std::size_t files = 0;
  for (const char* cmd : {"simulate", "agents", "field", "equilibria", "sweep"}) {
    for (const char* side : {"a", "b"}) {
      app::RunOptions opt{cmd, scenario, root / cmd / side};
      opt.seed = 77;
      opt.overrides = {"stochastic.runs=4"};
      std::ostringstream out, err;
      if (app::run(opt, out, err) != 0) return {false, std::string(cmd) + " failed: " + err.str()};
    }
    for (const auto& entry : fs::directory_iterator(root / cmd / "a")) {
      const auto other = root / cmd / "b" / entry.path().filename();
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
        return {false, "differs: " + std::string(cmd) + "/" + entry.path().filename().string()};
      }
      ++files;
    }
  }
  fs::remove_all(root);
  return {true, std::to_string(files) + " output files byte-identical across two runs"};
}

}  // namespace

int main() {
  report(1, "equal-payoff convergence", equal_payoff_convergence);
  report(2, "alpha monotonicity", alpha_monotonicity);
  report(3, "equilibrium multiplicity", equilibrium_multiplicity);
  report(4, "simplex preservation", simplex_preservation);
  report(5, "closed-form equivalence", closed_form_equivalence);
  report(6, "hybrid linearity", hybrid_linearity);
  report(7, "reward conservation", reward_conservation);
  report(8, "stationarity", stationarity);
  report(9, "mean-field oracle", mean_field_oracle);
  report(10, "determinism", determinism);
  std::printf("%s: %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
