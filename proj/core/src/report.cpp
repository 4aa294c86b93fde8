#include "orgdyn/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include "orgdyn/cost_model.hpp"
#include "orgdyn/optimizer.hpp"
#include "orgdyn/transport_solver.hpp"

namespace orgdyn {

namespace {

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string general(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Rows of cells printed either as an aligned text table or as CSV.
class Table {
 public:
  void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

  void print(std::ostream& os, OutputFormat format) const {
    if (format == OutputFormat::Csv) {
      for (const auto& r : rows_) {
        for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << r[c];
        os << '\n';
      }
      return;
    }
    std::vector<std::size_t> width;
    for (const auto& r : rows_) {
      width.resize(std::max(width.size(), r.size()), 0);
      for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    for (const auto& r : rows_) {
      for (std::size_t c = 0; c < r.size(); ++c) {
        const std::string pad(width[c] - r[c].size(), ' ');
        // first column left-aligned, numbers right-aligned
        os << (c ? "  " : "") << (c ? pad + r[c] : r[c] + pad);
      }
      os << '\n';
    }
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

void header(std::ostream& os, const char* command, const ScenarioConfig& config, const CommandOptions& options) {
  os << "# orgdyn " << command << " scenario=" << (config.name.empty() ? "-" : config.name)
     << " config=" << (options.config_path.empty() ? "-" : options.config_path) << " seed=" << options.seed << '\n';
}

std::ofstream open_output(const CommandOptions& options, const std::string& file) {
  std::filesystem::create_directories(options.directory);
  const auto path = std::filesystem::path(options.directory) / file;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write " + path.string());
  return out;
}

std::string premium_label(const CostConfig& cost) {
  switch (cost.mode) {
    case PremiumMode::NoTemporaries:
      return "inf";
    case PremiumMode::Uniform:
      return fixed(100.0 * cost.premium, 1) + "%";
    case PremiumMode::LevelWages:
      break;
  }
  return "per-level";
}

std::string level_list(const std::vector<int>& levels) {
  std::string s;
  for (int j : levels) s += (s.empty() ? "" : ", ") + std::to_string(j + 1);
  return s;
}

FlexPlan scenario_plan(const ScenarioConfig& config, const ValidatedOrg& org) {
  if (config.plan) {
    check_plan(org, *config.plan);
    return *config.plan;
  }
  return baseline_plan(org);
}

void plan_table(std::ostream& os, const FlexPlan& plan, OutputFormat format) {
  Table t;
  t.row({"level", "alpha", "p"});
  for (std::size_t j = 0; j < plan.permanent_share.size(); ++j) {
    t.row({std::to_string(j + 1), j == 0 ? "-" : fixed(plan.hiring_ratio[j], 3), fixed(plan.permanent_share[j], 3)});
  }
  t.print(os, format);
}

}  // namespace

std::string millions_3sf(double cost) {
  char buf[64];
  const double m = cost / 1e6;
  const int digits = m == 0.0 ? 2 : std::max(0, 2 - static_cast<int>(std::floor(std::log10(std::abs(m)))));
  std::snprintf(buf, sizeof buf, "%.*f", digits, m);
  return buf;
}

CommandOptions default_options(const ScenarioConfig& config) {
  CommandOptions o;
  o.format = config.output.format;
  o.directory = config.output.directory;
  o.seed = config.optimizer.ga.seed;
  return o;
}

int run_steady(const ScenarioConfig& config, const CommandOptions& options, std::ostream& out) {
  const ValidatedOrg org = scenario_org(config);
  const int L = org.levels();
  const std::vector<double> alpha_min = min_external_ratios(org);
  FlexPlan plan = FlexPlan::all_internal(L);
  plan.hiring_ratio = alpha_min;
  if (config.plan) {
    check_plan(org, *config.plan);
    plan = *config.plan;
  }

  header(out, "steady", config, options);
  Table t;
  t.row({"level", "N", "mu", "tau", "A", "P", "RP", "h", "p_min", "alpha_min", "status"});
  std::vector<int> ill;
  for (int j = 0; j < L; ++j) {
    const auto u = static_cast<std::size_t>(j);
    const double a = steady_promotable(org, plan, j);
    const double c_next = promotion_outflow(org, plan, j);
    const bool top = j == L - 1;
    const bool ok = top || a > 0.0;
    if (!ok) ill.push_back(j);
    // External hires per head: everything at the entry level, the (alpha - 1) C_j excess above it.
    const double inflow = steady_inflow(org, plan, j);
    const double hires = j == 0 ? inflow : inflow - inflow / plan.alpha(j);
    t.row({std::to_string(j + 1), general(org.headcount(j)), general(org.attrition(j)),
           general(org.eligibility_age(j)), fixed(a, 2), top ? "-" : (ok ? fixed(c_next / a, 4) : "-"),
           fixed(a / org.headcount(j), 4), fixed(hires / org.headcount(j), 4),
           fixed(min_permanent_share(org, plan, j), 4), j == 0 ? "-" : fixed(alpha_min[u], 4),
           ok ? "ok" : "ill-posed"});
  }
  t.print(out, options.format);

  std::vector<int> external;
  for (int j = 1; j < L; ++j) {
    if (alpha_min[static_cast<std::size_t>(j)] > 1.0) external.push_back(j);
  }
  if (options.format == OutputFormat::Table) {
    if (external.empty()) {
      out << "verdict: internal hiring sufficient\n";
    } else {
      out << "verdict: external hiring required at levels " << level_list(external) << '\n';
    }
    if (!ill.empty()) out << "ill-posed plan: promotable pool not positive at levels " << level_list(ill) << '\n';
  }
  return ill.empty() ? 0 : 3;
}

int run_simulate(const ScenarioConfig& config, const CommandOptions& options, std::ostream& out) {
  const ValidatedOrg org = scenario_org(config);
  const int L = org.levels();
  const FlexPlan plan = config.plan ? *config.plan : FlexPlan::all_internal(L);
  const SeniorityGrid grid(config.grid.ds, config.grid.dt, config.grid.s_max);
  RunOptions ro;
  ro.initial = config.grid.initial;
  ro.record_every = config.grid.record_every;
  ro.snapshot_times = {config.grid.horizon};
  const Trajectory traj = run(org, plan, grid, config.policy.rule(), config.grid.horizon, ro);

  if (!options.directory.empty()) {
    auto csv = open_output(options, "trajectory.csv");
    header(csv, "simulate", config, options);
    write_trajectory_csv(csv, traj);
    auto dens = open_output(options, "density.csv");
    header(dens, "simulate", config, options);
    write_density_csv(dens, grid, traj.snapshots.empty() ? DensitySnapshot{traj.final_state.time, traj.final_state.densities}
                                                         : traj.snapshots.back());
  }

  const auto& last = traj.records.back();
  header(out, "simulate", config, options);
  Table t;
  if (options.format == OutputFormat::Csv) {
    t.row({"level", "N", "mu", "tau", "P", "h", "delta", "T", "RP", "l1_to_steady"});
    for (int j = 0; j < L; ++j) {
      const auto u = static_cast<std::size_t>(j);
      const auto& m = last.metrics[u];
      t.row({std::to_string(j + 1), general(org.headcount(j)), general(org.attrition(j)),
             general(org.eligibility_age(j)), general(last.policy.promotion[u]), general(last.policy.hiring[u]),
             general(last.policy.shortfall[u]), general(m.excess_seniority), general(m.ready_ratio),
             m.l1_to_steady ? general(*m.l1_to_steady) : ""});
    }
    t.print(out, options.format);
    return 0;
  }

  std::vector<std::string> head{"t = " + fixed(last.time, 2)};
  for (int j = 0; j < L; ++j) head.push_back("level " + std::to_string(j + 1));
  t.row(head);
  auto add = [&](const std::string& name, auto value) {
    std::vector<std::string> r{name};
    for (int j = 0; j < L; ++j) r.push_back(value(j, static_cast<std::size_t>(j)));
    t.row(std::move(r));
  };
  add("N", [&](int j, std::size_t) { return general(org.headcount(j)); });
  add("mu", [&](int j, std::size_t) { return general(org.attrition(j)); });
  add("tau", [&](int j, std::size_t) { return general(org.eligibility_age(j)); });
  add("P", [&](int j, std::size_t u) {
    if (j == L - 1) return std::string("-");
    return fixed(last.policy.promotion[u], 3) + (last.policy.clipped[u] ? "*" : "");
  });
  add("h", [&](int, std::size_t u) { return fixed(last.policy.hiring[u], 3); });
  add("T", [&](int, std::size_t u) { return fixed(last.metrics[u].excess_seniority, 2); });
  add("RP", [&](int, std::size_t u) { return fixed(last.metrics[u].ready_ratio, 3); });
  add("L1", [&](int, std::size_t u) {
    const auto& l1 = last.metrics[u].l1_to_steady;
    return l1 ? fixed(100.0 * *l1, 2) + "%" : std::string("-");
  });
  t.print(out, options.format);
  out << "* promotion rate at the cap " << general(max_rate_of(config.policy.rule())) << "/yr\n";
  out << "max relative mass error " << general(traj.max_mass_error) << '\n';
  const double cap = SeniorityGrid::recommended_cap(org);
  if (grid.s_max() < cap) {
    out << "note: s_max " << general(grid.s_max()) << " is below the recommended " << fixed(cap, 0)
        << "; survivors past it collect at the last node\n";
  }
  return 0;
}

int run_optimize(const ScenarioConfig& config, const CommandOptions& options, std::ostream& out) {
  const ValidatedOrg org = scenario_org(config);
  GaConfig ga = config.optimizer.ga;
  ga.seed = options.seed;

  PlanSearch search;
  switch (config.optimizer.mode) {
    case OptimizerMode::Ga:
      search = optimize_plan(org, ga);
      break;
    case OptimizerMode::CoordinateDescent:
      search = descend_plan(org, ga.alpha_max, config.optimizer.sweeps, config.plan);
      break;
    case OptimizerMode::FixedPlan: {
      if (!config.plan) throw Error(ErrorCode::InvalidConfig, "fixed_plan mode needs a plan block");
      check_plan(org, *config.plan);
      search.plan = *config.plan;
      search.cost = org_cost(org, search.plan);
      break;
    }
  }

  if (!options.directory.empty()) {
    if (!search.history.empty()) {
      auto h = open_output(options, "history.csv");
      header(h, "optimize", config, options);
      write_history_csv(h, search.history);
    }
    auto p = open_output(options, "plan.csv");
    header(p, "optimize", config, options);
    plan_table(p, search.plan, OutputFormat::Csv);
  }

  header(out, "optimize", config, options);
  const int L = org.levels();
  Table t;
  std::vector<std::string> head{"B", "cost_M/h"};
  for (int j = 1; j < L; ++j) head.push_back("alpha_" + std::to_string(j + 1));
  for (int j = 0; j < L; ++j) head.push_back("p_" + std::to_string(j + 1));
  t.row(head);
  std::vector<std::string> row{premium_label(config.cost), millions_3sf(search.cost.total)};
  for (int j = 1; j < L; ++j) row.push_back(fixed(search.plan.alpha(j), 2));
  for (int j = 0; j < L; ++j) row.push_back(fixed(search.plan.share(j), 2));
  t.row(row);
  t.print(out, options.format);
  if (options.format == OutputFormat::Table) {
    out << "total cost " << fixed(search.cost.total, 2) << " per hour\n\n";
    plan_table(out, search.plan, options.format);
  }
  return 0;
}

int run_cost(const ScenarioConfig& config, const CommandOptions& options, std::ostream& out) {
  const ValidatedOrg org = scenario_org(config);
  const FlexPlan plan = scenario_plan(config, org);
  const CostBreakdown cost = org_cost(org, plan);

  header(out, "cost", config, options);
  if (options.format == OutputFormat::Csv) {
    write_cost_csv(out, cost);
  } else {
    Table t;
    t.row({"level", "permanent", "temporary", "floater", "total"});
    for (int j = 0; j < org.levels(); ++j) {
      const auto u = static_cast<std::size_t>(j);
      t.row({std::to_string(j + 1), fixed(cost.permanent[u], 2), fixed(cost.temporary[u], 2),
             fixed(cost.floater[u], 2), fixed(cost.level_total(j), 2)});
    }
    t.row({"all", "", "", "", fixed(cost.total, 2)});
    t.print(out, options.format);
    out << "cost " << millions_3sf(cost.total) << " M/h\n";
  }
  if (!options.directory.empty()) {
    auto csv = open_output(options, "cost.csv");
    header(csv, "cost", config, options);
    write_cost_csv(csv, cost);
  }

  const auto& units = org.spec().business_units;
  if (units.empty()) return 0;

  // Every unit runs the scenario plan, or its own minimal-ratio plan when none is given.
  BusinessUnitPlan bu;
  for (std::size_t k = 0; k < units.size(); ++k) {
    bu.units.push_back(config.plan ? *config.plan : baseline_plan(unit_org(org, static_cast<int>(k))));
    bu.floater_share.emplace_back(static_cast<std::size_t>(org.levels()), 0.0);
  }
  const ReducedProblem reduced = reduce_floaters(org, bu);
  double total = 0.0;
  Table t;
  t.row({"unit", "level", "flexible_wage", "flexible_kind"});
  for (std::size_t k = 0; k < reduced.units.size(); ++k) {
    const auto& ru = reduced.units[k];
    total += reduced_cost(ru, reduced.plan.units[k]);
    for (std::size_t j = 0; j < ru.flexible_wage.size(); ++j) {
      t.row({units[k].name.empty() ? std::to_string(k + 1) : units[k].name, std::to_string(j + 1),
             fixed(ru.flexible_wage[j], 2), ru.floaters[j] ? "floater" : "temporary"});
    }
  }
  out << '\n';
  t.print(out, options.format);
  if (options.format == OutputFormat::Table) out << "business-unit cost " << fixed(total, 2) << " per hour\n";
  return 0;
}

}  // namespace orgdyn
