// Command-line front end: scenario generation, ODE runs, agent ensembles,
// direction fields, equilibrium search and α sweeps.

#include <cstdlib>
#include <iostream>
#include <unistd.h>

#include <CLI11.hpp>

#include "evosync/app/run.hpp"

namespace {

bool use_color() { return std::getenv("NO_COLOR") == nullptr && isatty(STDERR_FILENO); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"evosync: multi-population evolutionary game simulator for IoT sensing tasks"};
  cli.require_subcommand(1);

  evosync::app::RunOptions opt;
  std::string seed_text;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", opt.scenario, "Scenario JSON file")->required();
    sub->add_option("--out", opt.out, "Output directory (default: out)");
    sub->add_option("--seed", seed_text, "Override the scenario seed (u64)");
    sub->add_option("--set", opt.overrides, "Override a scalar: dotted.path=value (repeatable)");
    sub->add_flag("--require-convergence", opt.require_convergence,
                  "Exit with code 4 if a run fails to converge");
  };

  add_common(cli.add_subcommand("simulate", "Integrate the mean dynamics; writes trajectory.csv"));
  add_common(cli.add_subcommand("agents", "Agent-based ensemble; writes agents.csv"));
  add_common(cli.add_subcommand("field", "Direction field on a grid; writes field.csv"));
  add_common(cli.add_subcommand("equilibria", "Equilibrium search from a seed grid; writes equilibria.json"));
  add_common(cli.add_subcommand("sweep", "Convergence time vs. Smith probability; writes sweep.csv"));

  auto* gen = cli.add_subcommand("generate", "Sample a scenario file from the default ranges");
  gen->add_option("--out", opt.out, "Scenario file to write (default: stdout)");
  gen->add_option("--seed", seed_text, "Generator seed (u64)");
  gen->add_option("--populations", opt.populations, "Number of populations")->check(CLI::PositiveNumber);
  gen->add_option("--regions", opt.regions, "Number of regions")->check(CLI::PositiveNumber);
  gen->add_option("--set", opt.overrides, "Override a scalar: dotted.path=value (repeatable)");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : evosync::app::kSchema;
  }

  opt.command = cli.get_subcommands().front()->get_name();
  if (!seed_text.empty()) {
    try {
      std::size_t used = 0;
      opt.seed = std::stoull(seed_text, &used);
      if (used != seed_text.size() || seed_text.front() == '-') throw std::invalid_argument(seed_text);
    } catch (const std::exception&) {
      std::cerr << R"({"error":"validation","path":"--seed","message":"expected an unsigned 64-bit integer"})"
                << '\n';
      return evosync::app::kSchema;
    }
  }

  const int code = evosync::app::run(opt, std::cout, std::cerr);
  if (code != 0 && use_color()) {
    std::cerr << "\033[31mevosync: " << opt.command << " failed (exit " << code << ")\033[0m\n";
  }
  return code;
}
