#pragma once

// The four batch commands behind the orgdyn tool. Each writes its report to
// `out`, drops files into `options.directory` when one is set, and returns the
// process exit code. Library errors propagate; exit_code_for() maps them.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "orgdyn/scenario.hpp"

namespace orgdyn {

struct CommandOptions {
  OutputFormat format = OutputFormat::Table;
  std::string directory;      // empty: no files
  std::uint64_t seed = 42;    // written into every header
  std::string config_path;    // for the header only
};

/// Options resolved from the scenario, to be overridden by command-line flags.
CommandOptions default_options(const ScenarioConfig& config);

/// Closed-form stationary analytics. Without a plan in the scenario, uses the
/// minimal hiring ratios and p = 1. Returns 3 when the plan is ill posed.
int run_steady(const ScenarioConfig& config, const CommandOptions& options, std::ostream& out);

/// Transient run; writes trajectory.csv and density.csv (final densities).
int run_simulate(const ScenarioConfig& config, const CommandOptions& options, std::ostream& out);

/// GA, coordinate descent or fixed-plan evaluation; writes history.csv and plan.csv.
int run_optimize(const ScenarioConfig& config, const CommandOptions& options, std::ostream& out);

/// Cost breakdown of the scenario plan (minimal ratios and p = 1 by default).
/// With business units, also reports the floater/temporary choice per unit.
int run_cost(const ScenarioConfig& config, const CommandOptions& options, std::ostream& out);

/// Cost in millions per hour at three significant figures, e.g. "1.13".
std::string millions_3sf(double cost);

}  // namespace orgdyn
