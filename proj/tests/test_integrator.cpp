#include <doctest.h>

#include <cmath>
#include <random>

#include "evosync/errors.hpp"
#include "evosync/integrator.hpp"
#include "evosync/io/scenario_file.hpp"
#include "evosync/payoff.hpp"
#include "helpers.hpp"

using namespace evosync;

namespace {

// Replicator field computed from the oracle payoffs only.
std::vector<double> oracle_replicator(const Scenario& sc, const std::vector<double>& flat) {
  const auto [rs, ps] = testing::describe(sc);
  oracle::State x;
  std::size_t k = 0;
  for (const auto& p : ps) {
    x.emplace_back(flat.begin() + static_cast<long>(k), flat.begin() + static_cast<long>(k + p.regions.size()));
    k += p.regions.size();
  }
  const auto pi = oracle::payoffs(rs, ps, x, sc.denominator_floor());
  std::vector<double> out;
  for (std::size_t p = 0; p < x.size(); ++p) {
    double avg = 0.0;
    for (std::size_t m = 0; m < x[p].size(); ++m) avg += x[p][m] * pi[p][m];
    for (std::size_t m = 0; m < x[p].size(); ++m) out.push_back(x[p][m] * (pi[p][m] - avg));
  }
  return out;
}

// Smith field from the oracle payoffs.
std::vector<double> oracle_smith(const Scenario& sc, const std::vector<double>& flat) {
  const auto [rs, ps] = testing::describe(sc);
  oracle::State x;
  std::size_t k = 0;
  for (const auto& p : ps) {
    x.emplace_back(flat.begin() + static_cast<long>(k), flat.begin() + static_cast<long>(k + p.regions.size()));
    k += p.regions.size();
  }
  const auto pi = oracle::payoffs(rs, ps, x, sc.denominator_floor());
  std::vector<double> out;
  for (std::size_t p = 0; p < x.size(); ++p) {
    for (std::size_t m = 0; m < x[p].size(); ++m) {
      double in = 0.0, away = 0.0;
      for (std::size_t j = 0; j < x[p].size(); ++j) {
        in += x[p][j] * std::max(pi[p][m] - pi[p][j], 0.0);
        away += std::max(pi[p][j] - pi[p][m], 0.0);
      }
      out.push_back(in - x[p][m] * away);
    }
  }
  return out;
}

double max_spread(const Scenario& sc, const SocialState& x, double threshold = 1e-3) {
  const auto t = payoff_table(sc, x);
  double s = 0.0;
  for (std::size_t p = 0; p < sc.num_populations(); ++p) {
    s = std::max(s, payoff_spread(x, t, p, threshold));
  }
  return s;
}

}  // namespace

TEST_CASE("config validation") {
  IntegratorConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.max_steps() == 1000000);
  c.step_size = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.convergence_tau = -1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.extinction_threshold = 1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.record_stride = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("simplex repair") {
  auto x = SocialState::from_blocks({{0.5 + 1e-12, -1e-12, 0.5}});
  const double moved = repair_onto_simplex(x);
  CHECK(x(0, 1) == 0.0);
  CHECK(x(0, 0) + x(0, 1) + x(0, 2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(moved > 0.0);
  CHECK(moved < 1e-11);

  auto clean = SocialState::from_blocks({{0.25, 0.75}});
  CHECK(repair_onto_simplex(clean) == 0.0);

  auto dead = SocialState::from_blocks({{-0.5, -0.5}});
  CHECK_THROWS_AS(repair_onto_simplex(dead), IntegrationError);
}

TEST_CASE("single steps") {
  SUBCASE("rest point is unchanged") {
    const auto sc = testing::symmetric(2, 3);
    const auto x = sc.uniform_state();
    const auto y = step(sc, RevisionProtocol::comparison(2), x, 0.01);
    CHECK(y.max_abs_diff(x) <= 1e-15);
  }

  SUBCASE("RK4 is within O(h^2) of explicit Euler") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
      const auto sc = testing::random_scenario(rng);
      const auto x = testing::random_state(sc, rng, 0.05);
      const auto proto = RevisionProtocol::imitation(sc.num_populations());
      double prev = 0.0;
      for (double h : {1e-2, 5e-3, 2.5e-3}) {
        const auto rk = step(sc, proto, x, h);
        const auto eu = oracle::euler(x.raw(), h, [&](const std::vector<double>& v) {
          return oracle_replicator(sc, v);
        });
        double d = 0.0;
        for (std::size_t i = 0; i < eu.size(); ++i) d = std::max(d, std::abs(rk.raw()[i] - eu[i]));
        // Halving h should roughly quarter the gap.
        if (prev > 1e-13) CHECK(d < prev * 0.3);
        prev = d;
      }
    }
  }

  SUBCASE("stiff steps are subdivided") {
    // A nearly empty region pays about 100 against about 10 elsewhere, so a
    // single RK4 step of 0.01 would overshoot.
    const auto sc = testing::symmetric(1, 3);
    const auto x = SocialState::from_blocks({{0.6, 0.3, 0.1}});
    const auto y = step(sc, RevisionProtocol::comparison(1), x, 0.01);
    auto ref = x.raw();
    for (int k = 0; k < 100000; ++k) {
      ref = oracle::euler(ref, 1e-7, [&](const std::vector<double>& v) { return oracle_smith(sc, v); });
    }
    double d = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) d = std::max(d, std::abs(y.raw()[i] - ref[i]));
    CHECK(d < 1e-4);
    CHECK(y.on_simplex(1e-12));

    Rk4Stepper stepper(sc, make_field(RevisionProtocol::comparison(1)));
    auto z = x;
    CHECK(stepper.advance(z, 0.01) < 1e-12);
  }

  SUBCASE("non-finite field") {
    const auto sc = testing::symmetric(1, 2);
    FieldFunction bad = [](std::span<const double>, const PayoffTable&, VectorField& out) {
      out.values()[0] = std::nan("");
    };
    Rk4Stepper stepper(sc, bad);
    auto x = sc.uniform_state();
    CHECK_THROWS_AS(stepper.advance(x, 0.01), IntegrationError);
    try {
      stepper.advance(x, 0.01);
    } catch (const IntegrationError& e) {
      CHECK(e.state().size() == 2);
    }
  }
}

TEST_CASE("convergence detection") {
  const auto sc = testing::symmetric(1, 3);
  const auto x = sc.uniform_state();
  IntegratorConfig config;

  SUBCASE("first crossing") {
    Trajectory tr;
    const std::vector<double> spreads{0.5, 0.2, 0.04, 0.01};
    for (std::size_t k = 0; k < spreads.size(); ++k) {
      tr.samples.push_back({k * 10, 0.1 * static_cast<double>(k), x,
                            testing::table(x, {1.0, 1.0 + spreads[k], 1.0})});
    }
    const auto t = converged_at(tr, config);
    REQUIRE(t.has_value());
    CHECK(*t == doctest::Approx(0.2));
  }

  SUBCASE("identical payoffs converge at time zero") {
    const auto tr = integrate(sc, RevisionProtocol::comparison(1), x, config);
    CHECK(tr.converged);
    CHECK(*tr.convergence_step == 0);
    CHECK(*converged_at(tr, config) == 0.0);
    CHECK(tr.samples.size() == 1);
  }

  SUBCASE("extinct strategies are ignored") {
    const auto y = SocialState::from_blocks({{0.0005, 0.4995, 0.5}});
    const auto t = testing::table(y, {9.0, 1.0, 1.01});
    CHECK(payoffs_converged(y, t, config));
    CHECK(payoff_spread(y, t, 0, 0.0) == doctest::Approx(8.0));
  }

  SUBCASE("frozen populations are ignored") {
    const auto two = testing::symmetric(2, 2);
    const auto y = two.uniform_state();
    const auto t = testing::table(y, {5.0, 1.0, 2.0, 2.0});
    CHECK_FALSE(payoffs_converged(y, t, config));
    CHECK(payoffs_converged(y, t, config, {true, false}));
  }
}

TEST_CASE("default scenario trajectory") {
  const auto file = io::generate_scenario(io::kDefaultScenarioSeed);
  const auto sc = file.scenario();
  const auto proto = file.revision_protocol();
  const auto x0 = file.initial();
  IntegratorConfig config;
  const auto tr = integrate(sc, proto, x0, config);

  REQUIRE(tr.converged);
  CHECK(tr.max_repair < 1e-6);
  CHECK(max_spread(sc, tr.final_state()) <= config.convergence_tau);
  CHECK(tr.samples.front().step == 0);
  CHECK(tr.samples.back().step == tr.steps);
  for (std::size_t i = 1; i < tr.samples.size(); ++i) {
    CHECK(tr.samples[i].time > tr.samples[i - 1].time);
    CHECK(tr.samples[i].state.on_simplex(1e-12));
  }

  SUBCASE("equilibrium persists") {
    IntegratorConfig more = config;
    more.stop_on_convergence = false;
    more.max_time = static_cast<double>(tr.steps) * config.step_size;
    const auto cont = integrate(sc, proto, tr.final_state(), more);
    for (const auto& s : cont.samples) {
      for (std::size_t p = 0; p < sc.num_populations(); ++p) {
        CHECK(payoff_spread(s.state, s.payoffs, p, 1e-3) <= 2 * config.convergence_tau);
      }
    }
  }

  SUBCASE("time reversal moves away") {
    FieldFunction forward = make_field(proto);
    FieldFunction backward = [forward](std::span<const double> x, const PayoffTable& t,
                                       VectorField& out) {
      forward(x, t, out);
      for (double& v : out.values()) v = -v;
    };
    IntegratorConfig back = config;
    back.stop_on_convergence = false;
    back.max_time = 2.0;
    const auto rev = integrate_field(sc, backward, tr.final_state(), back);
    CHECK(max_spread(sc, rev.final_state()) > 2 * max_spread(sc, tr.final_state()));
  }

  SUBCASE("halving the step size") {
    IntegratorConfig fixed = config;
    fixed.stop_on_convergence = false;
    fixed.max_time = 20.0;
    const auto a = integrate(sc, proto, x0, fixed);
    fixed.step_size = 0.005;
    const auto b = integrate(sc, proto, x0, fixed);
    CHECK(a.final_state().max_abs_diff(b.final_state()) < 1e-4);
  }
}

TEST_CASE("replicator keeps extinct strategies extinct") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto sc = testing::random_scenario(rng);
    auto x = testing::random_state(sc, rng);
    x(0, 0) = 0.0;
    repair_onto_simplex(x);
    IntegratorConfig config;
    config.max_time = 5.0;
    config.record_stride = 1;
    config.stop_on_convergence = false;
    const auto tr = integrate(sc, RevisionProtocol::imitation(sc.num_populations()), x, config);
    for (const auto& s : tr.samples) REQUIRE(s.state(0, 0) == 0.0);
  }
}

TEST_CASE("recording stride") {
  const auto file = io::generate_scenario(io::kDefaultScenarioSeed);
  IntegratorConfig config;
  config.stop_on_convergence = false;
  config.max_time = 0.55;
  config.record_stride = 10;
  const auto tr = integrate(file.scenario(), file.revision_protocol(), file.initial(), config);
  CHECK(tr.steps == 55);
  std::vector<std::size_t> steps;
  for (const auto& s : tr.samples) steps.push_back(s.step);
  CHECK(steps == std::vector<std::size_t>{0, 10, 20, 30, 40, 50, 55});
}
