#include "evosync/app/run.hpp"

#include <fstream>
#include <json.hpp>

#include "evosync/analysis.hpp"
#include "evosync/errors.hpp"
#include "evosync/integrator.hpp"
#include "evosync/io/output.hpp"
#include "evosync/io/scenario_file.hpp"
#include "evosync/stochastic.hpp"

namespace evosync::app {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

void write_json(const fs::path& path, const json& tree) {
  auto f = open_output(path);
  f << tree.dump(2) << '\n';
}

io::ScenarioFile load(const RunOptions& opt) {
  if (opt.scenario.empty()) throw io::SchemaError("/", "--scenario is required");
  auto overrides = opt.overrides;
  if (opt.seed) overrides.push_back("seed=" + std::to_string(*opt.seed));
  return io::load_scenario(opt.scenario, overrides);
}

int generate(const RunOptions& opt, std::ostream& out) {
  const auto seed = opt.seed.value_or(io::kDefaultScenarioSeed);
  auto tree = io::to_json(io::generate_scenario(seed, opt.populations, opt.regions));
  for (const auto& o : opt.overrides) io::apply_override(tree, o);
  const auto text = io::to_json(io::from_json(tree)).dump(2) + "\n";
  if (opt.out.empty()) {
    out << text;
  } else {
    if (opt.out.has_parent_path()) fs::create_directories(opt.out.parent_path());
    open_output(opt.out) << text;
  }
  return kOk;
}

int simulate(const io::ScenarioFile& f, const io::Manifest& m, const RunOptions& opt,
             std::ostream& out) {
  const auto scenario = f.scenario();
  const auto traj = integrate(scenario, f.revision_protocol(), f.initial(), f.integrator);
  {
    auto csv = open_output(opt.out / "trajectory.csv");
    io::write_trajectory_csv(csv, scenario, traj, m.hash);
  }
  std::vector<double> spreads;
  for (std::size_t p = 0; p < scenario.num_populations(); ++p) {
    spreads.push_back(payoff_spread(traj.final_state(), traj.final_payoffs(), p,
                                    f.integrator.extinction_threshold));
  }
  json summary = {{"command", "simulate"},
                  {"converged", traj.converged},
                  {"steps", traj.steps},
                  {"final_spread", spreads},
                  {"manifest_sha256", m.hash}};
  summary["convergence_step"] = traj.convergence_step ? json(*traj.convergence_step) : json(nullptr);
  out << summary.dump() << '\n';
  return opt.require_convergence && !traj.converged ? kNotConverged : kOk;
}

int agents(const io::ScenarioFile& f, const io::Manifest& m, const RunOptions& opt,
           std::ostream& out) {
  const auto scenario = f.scenario();
  const auto initial = AgentPopulationState::from_shares(scenario, f.initial());
  const auto runs = simulate_ensemble(scenario, f.revision_protocol(), initial,
                                      f.stochastic_config(), f.stochastic.runs);
  {
    auto csv = open_output(opt.out / "agents.csv");
    io::write_agents_csv(csv, scenario, runs, m.hash);
  }
  std::uint64_t events = 0, switches = 0;
  for (const auto& r : runs) {
    events += r.events;
    switches += r.switches;
  }
  out << json{{"command", "agents"},
              {"runs", runs.size()},
              {"events", events},
              {"switches", switches},
              {"rate_bound", runs.empty() ? 0.0 : runs.front().rate_bound},
              {"manifest_sha256", m.hash}}
             .dump()
      << '\n';
  return kOk;
}

int field(const io::ScenarioFile& f, const io::Manifest& m, const RunOptions& opt,
          std::ostream& out) {
  const auto scenario = f.scenario();
  const auto points = direction_field(scenario, f.revision_protocol(), f.field_spec());
  {
    auto csv = open_output(opt.out / "field.csv");
    io::write_field_csv(csv, points, m.hash);
  }
  std::size_t skipped = 0;
  for (const auto& p : points) skipped += p.skipped ? 1 : 0;
  out << json{{"command", "field"},
              {"points", points.size()},
              {"skipped", skipped},
              {"manifest_sha256", m.hash}}
             .dump()
      << '\n';
  return kOk;
}

int equilibria(const io::ScenarioFile& f, const io::Manifest& m, const RunOptions& opt,
               std::ostream& out) {
  const auto scenario = f.scenario();
  const auto seeds = seed_grid(f.initial(), f.equilibria.population, f.equilibria.grid);
  const auto search =
      find_equilibria(scenario, f.revision_protocol(), seeds, f.equilibrium_config());
  write_json(opt.out / "equilibria.json", io::equilibria_json(scenario, search, seeds.size(), m.hash));
  out << json{{"command", "equilibria"},
              {"seeds", seeds.size()},
              {"equilibria", search.equilibria.size()},
              {"non_converged", search.non_converged.size()},
              {"manifest_sha256", m.hash}}
             .dump()
      << '\n';
  return opt.require_convergence && !search.non_converged.empty() ? kNotConverged : kOk;
}

int sweep(const io::ScenarioFile& f, const io::Manifest& m, const RunOptions& opt,
          std::ostream& out) {
  const auto entries = alpha_sweep(f.scenario(), f.sweep.population, f.sweep.alpha_values,
                                   f.initial(), f.integrator);
  {
    auto csv = open_output(opt.out / "sweep.csv");
    io::write_sweep_csv(csv, entries, m.hash);
  }
  bool all = true;
  for (const auto& e : entries) all = all && e.steps.has_value();
  out << json{{"command", "sweep"},
              {"entries", entries.size()},
              {"all_converged", all},
              {"spearman", sweep_rank_correlation(entries)},
              {"manifest_sha256", m.hash}}
             .dump()
      << '\n';
  return opt.require_convergence && !all ? kNotConverged : kOk;
}

int dispatch(const RunOptions& opt, std::ostream& out) {
  if (opt.command == "generate") return generate(opt, out);

  using Handler = int (*)(const io::ScenarioFile&, const io::Manifest&, const RunOptions&,
                          std::ostream&);
  Handler handler = nullptr;
  if (opt.command == "simulate") handler = simulate;
  else if (opt.command == "agents") handler = agents;
  else if (opt.command == "field") handler = field;
  else if (opt.command == "equilibria") handler = equilibria;
  else if (opt.command == "sweep") handler = sweep;
  else throw io::SchemaError("/", "unknown command '" + opt.command + "'");

  const auto file = load(opt);
  const auto manifest = io::make_manifest(file, opt.command);
  RunOptions resolved = opt;
  if (resolved.out.empty()) resolved.out = "out";
  fs::create_directories(resolved.out);
  write_json(resolved.out / "manifest.json", manifest.document());
  return handler(file, manifest, resolved, out);
}

}  // namespace

int run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(options, out);
  } catch (const io::SchemaError& e) {
    err << json{{"error", "validation"}, {"path", e.path()}, {"message", e.what()}}.dump() << '\n';
    return kSchema;
  } catch (const ValidationError& e) {
    err << json{{"error", "validation"}, {"message", e.what()}}.dump() << '\n';
    return kSchema;
  } catch (const StructuralError& e) {
    err << json{{"error", "validation"}, {"message", e.what()}}.dump() << '\n';
    return kSchema;
  } catch (const IntegrationError& e) {
    err << json{{"error", "numerical"}, {"message", e.what()}, {"state", e.state()}}.dump() << '\n';
    return kNumerical;
  } catch (const ConfigurationError& e) {
    err << json{{"error", "numerical"}, {"message", e.what()}}.dump() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << json{{"error", "failure"}, {"message", e.what()}}.dump() << '\n';
    return kFailure;
  }
}

}  // namespace evosync::app
