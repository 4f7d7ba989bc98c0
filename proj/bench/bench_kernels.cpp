// Serial reference against the OpenMP version of each batch kernel.
#include <benchmark/benchmark.h>

#include "evosync/analysis.hpp"
#include "evosync/io/scenario_file.hpp"
#include "evosync/stochastic.hpp"

using namespace evosync;

namespace {

const io::ScenarioFile& file() {
  static const auto f = io::generate_scenario(io::kDefaultScenarioSeed);
  return f;
}

template <bool Parallel>
void BM_DirectionField(benchmark::State& state) {
  const auto sc = file().scenario();
  const auto proto = file().revision_protocol();
  auto spec = file().field_spec();
  spec.resolution_u = spec.resolution_v = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto grid = Parallel ? direction_field(sc, proto, spec) : direction_field_serial(sc, proto, spec);
    benchmark::DoNotOptimize(grid);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

template <bool Parallel>
void BM_Ensemble(benchmark::State& state) {
  const auto sc = file().scenario();
  const auto proto = file().revision_protocol();
  const auto init = AgentPopulationState::from_shares(sc, file().initial());
  auto config = file().stochastic_config();
  config.horizon = 1.0;
  const auto runs = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto out = Parallel ? simulate_ensemble(sc, proto, init, config, runs)
                        : simulate_ensemble_serial(sc, proto, init, config, runs);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_AlphaSweep(benchmark::State& state) {
  const auto sc = file().scenario();
  std::vector<double> alphas;
  for (int i = 0; i <= 10; ++i) alphas.push_back(i / 10.0);
  for (auto _ : state) {
    auto out = Parallel ? alpha_sweep(sc, 2, alphas, file().initial(), file().integrator)
                        : alpha_sweep_serial(sc, 2, alphas, file().initial(), file().integrator);
    benchmark::DoNotOptimize(out);
  }
}

template <bool Parallel>
void BM_Equilibria(benchmark::State& state) {
  const auto sc = file().scenario();
  const auto proto = file().revision_protocol();
  const auto seeds = seed_grid(file().initial(), 0, 10);
  const auto config = file().equilibrium_config();
  for (auto _ : state) {
    auto out = Parallel ? find_equilibria(sc, proto, seeds, config)
                        : find_equilibria_serial(sc, proto, seeds, config);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(seeds.size()));
}

}  // namespace

BENCHMARK_TEMPLATE(BM_DirectionField, false)->Name("direction_field/serial")->Arg(20)->Arg(100);
BENCHMARK_TEMPLATE(BM_DirectionField, true)->Name("direction_field/parallel")->Arg(20)->Arg(100);
BENCHMARK_TEMPLATE(BM_Ensemble, false)->Name("ensemble/serial")->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Ensemble, true)->Name("ensemble/parallel")->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_AlphaSweep, false)->Name("alpha_sweep/serial")->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_AlphaSweep, true)->Name("alpha_sweep/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Equilibria, false)->Name("equilibria/serial")->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Equilibria, true)->Name("equilibria/parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
