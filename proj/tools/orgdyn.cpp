#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "orgdyn/report.hpp"
#include "orgdyn/scenario.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  bool dump = false;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "scenario file (JSON, // comments allowed)")->required();
  cmd->add_option("--seed", f.seed, "random seed, overrides optimizer.seed");
  cmd->add_option("--out", f.out, "directory for CSV outputs");
  cmd->add_option("--format", f.format, "stdout format")->check(CLI::IsMember({"table", "csv"}));
  cmd->add_flag("--dump-config", f.dump, "print the resolved scenario as JSON and exit");
}

int report_error(const std::exception& e) {
  std::cerr << "orgdyn: " << e.what() << '\n';
  if (const auto* v = dynamic_cast<const orgdyn::ValidationError*>(&e)) {
    for (const auto& issue : v->issues()) {
      std::cerr << "  " << (issue.level >= 0 ? "level " + std::to_string(issue.level + 1) + ": " : "")
                << issue.message << '\n';
    }
  }
  return orgdyn::exit_code_for(e);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seniority-structured organisation model: steady states, simulation, labor cost, plan search"};
  app.require_subcommand(1);
  Flags flags;
  const char* names[][2] = {{"steady", "closed-form stationary analytics and minimal hiring ratios"},
                            {"simulate", "transient run of the seniority densities"},
                            {"optimize", "search hiring ratios and permanent shares for the cheapest plan"},
                            {"cost", "labor cost of the scenario plan"}};
  for (const auto& [name, help] : names) add_flags(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    orgdyn::ScenarioConfig config = orgdyn::load_scenario(flags.config);
    if (flags.seed) config.optimizer.ga.seed = *flags.seed;
    if (flags.out) config.output.directory = *flags.out;
    if (flags.format) config.output.format = *flags.format == "csv" ? orgdyn::OutputFormat::Csv : orgdyn::OutputFormat::Table;
    if (flags.dump) {
      std::cout << orgdyn::dump_scenario(config);
      return 0;
    }

    orgdyn::CommandOptions options = orgdyn::default_options(config);
    options.config_path = flags.config;
    if (command == "steady") return orgdyn::run_steady(config, options, std::cout);
    if (command == "simulate") return orgdyn::run_simulate(config, options, std::cout);
    if (command == "optimize") return orgdyn::run_optimize(config, options, std::cout);
    return orgdyn::run_cost(config, options, std::cout);
  } catch (const std::exception& e) {
    return report_error(e);
  }
}
