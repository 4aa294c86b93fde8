#pragma once

// Scenario files: JSON (with // comments allowed) describing an organisation, a
// simulation grid, a hiring policy, a cost setting and an optimizer setting.
// Unknown keys are rejected so typos fail loudly.

#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "orgdyn/optimizer.hpp"
#include "orgdyn/org_model.hpp"
#include "orgdyn/transport_solver.hpp"

namespace orgdyn {

struct GridConfig {
  double ds = kDefaultStep;           // years of seniority
  double dt = kDefaultStep;           // years
  double s_max = kDefaultSeniorityCap;
  double horizon = 60.0;              // years
  int record_every = 20;              // steps between trajectory rows
  InitialKind initial = InitialKind::Uniform;

  bool operator==(const GridConfig&) const = default;
};

enum class PolicyKind { MaxInternal, ExternalFraction };

struct PolicyConfig {
  PolicyKind kind = PolicyKind::MaxInternal;
  double max_rate = kDefaultMaxPromotionRate;  // per year
  double fraction = 0.0;                       // external hires per internal promotion

  PolicyRule rule() const;
  bool operator==(const PolicyConfig&) const = default;
};

enum class PremiumMode {
  LevelWages,     // temporary wages as given per level
  Uniform,        // w_t = (1 + premium) w0 everywhere
  NoTemporaries,  // premium "infinity": p forced to 1
};

struct CostConfig {
  PremiumMode mode = PremiumMode::LevelWages;
  double premium = 0.0;

  bool operator==(const CostConfig&) const = default;
};

enum class OptimizerMode { Ga, CoordinateDescent, FixedPlan };

struct OptimizerConfig {
  OptimizerMode mode = OptimizerMode::Ga;
  GaConfig ga;
  int sweeps = 30;  // coordinate descent

  bool operator==(const OptimizerConfig&) const = default;
};

enum class OutputFormat { Table, Csv };

struct OutputConfig {
  std::string directory;  // empty: print to stdout only
  OutputFormat format = OutputFormat::Table;

  bool operator==(const OutputConfig&) const = default;
};

struct ScenarioConfig {
  std::string name;
  OrgSpec organization;
  GridConfig grid;
  PolicyConfig policy;
  std::optional<FlexPlan> plan;
  CostConfig cost;
  OptimizerConfig optimizer;
  OutputConfig output;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Throws Error(InvalidConfig) for malformed JSON, wrong types or unknown keys.
/// Organisation invariants are checked separately by scenario_org().
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Canonical JSON; parse_scenario(dump_scenario(c)) == c.
std::string dump_scenario(const ScenarioConfig& config);

/// Validated organisation with the cost block's premium applied.
ValidatedOrg scenario_org(const ScenarioConfig& config);

/// 2 configuration error, 3 ill-posed model, 4 any other failure.
int exit_code_for(const std::exception& error);

}  // namespace orgdyn
