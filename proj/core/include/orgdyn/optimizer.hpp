#pragma once

// Plan search: a real-coded genetic algorithm and a coordinate-descent baseline
// that walks the levels top-down, both over a penalised cost that stays finite
// for infeasible plans.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "orgdyn/cost_model.hpp"
#include "orgdyn/org_model.hpp"

namespace orgdyn {

struct Evaluation {
  double value = 0.0;
  bool feasible = true;
};

using Objective = std::function<Evaluation(std::span<const double>)>;

struct GeneBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const noexcept { return lower.size(); }
};

struct GaConfig {
  int population_size = 200;
  int generations = 250;
  double mutation_chance = 0.10;  // per gene
  double elitism = 0.05;          // fraction of the population copied unchanged
  int tournament_size = 2;
  std::uint64_t seed = 42;
  double alpha_max = 10.0;
  int threads = 1;  // fitness evaluation only; 0 picks the hardware concurrency

  /// Throws Error(InvalidConfig).
  void check() const;

  bool operator==(const GaConfig&) const = default;
};

struct Candidate {
  std::vector<double> genes;
  double fitness = 0.0;
  bool feasible = false;
};

struct GenerationStats {
  int generation = 0;
  double best = 0.0;  // best-so-far fitness
  double mean = 0.0;  // mean fitness of the generation
};

struct GaResult {
  Candidate best;
  std::vector<GenerationStats> history;  // entry 0 is the initial population
};

/// Deterministic for a given config. `initial` individuals, clamped to the
/// bounds, replace the first random members of the starting population.
/// Throws Error(NoFeasibleCandidate) when no evaluated individual was feasible.
GaResult ga_minimize(const Objective& objective, const GeneBounds& bounds, const GaConfig& config,
                     std::span<const std::vector<double>> initial = {});

/// Minimum of f on [lo, hi] by golden-section search, returning the best point
/// evaluated (endpoints included).
struct LineMinimum {
  double x = 0.0;
  Evaluation value;
};
LineMinimum golden_section(const std::function<Evaluation(double)>& f, double lo, double hi, double tol = 1e-10);

/// Cyclic one-dimensional minimisation over the genes in `order`, starting from
/// `start`. A move is kept only when it does not increase the objective.
Candidate coordinate_descent(const Objective& objective, const GeneBounds& bounds, std::vector<double> start,
                             std::span<const int> order, int sweeps);

/// Maps plans to genes: alpha for levels 2..L, then p for every level that has
/// a temporary wage. Levels without one keep p = 1 and contribute no gene.
class PlanEncoding {
 public:
  PlanEncoding(const ValidatedOrg& org, double alpha_max);

  std::size_t size() const noexcept { return bounds_.size(); }
  const GeneBounds& bounds() const noexcept { return bounds_; }

  FlexPlan decode(std::span<const double> genes) const;
  std::vector<double> encode(const FlexPlan& plan) const;

  /// Gene indices ordered from the top level down, p before alpha within a level.
  std::vector<int> descending_order() const;

 private:
  int levels_;
  std::vector<int> share_level_;  // level of each share gene
  GeneBounds bounds_;
};

/// Strict upper bound on the cost of every feasible plan:
/// sum_j N_j w_t + w0 (mu_j N_j + C^no_{j+1}) / (mu_j - r).
double cost_upper_bound(const ValidatedOrg& org);

/// org_cost when every non-top promotable pool is positive. Otherwise
/// U (1 + sum_j max(0, -A_j) / N_j) with U = cost_upper_bound(org), which
/// dominates every feasible cost and grows with the violation.
Evaluation penalize(const ValidatedOrg& org, const FlexPlan& plan);

Objective plan_objective(const ValidatedOrg& org, const PlanEncoding& encoding);

/// All-internal plan with minimal hiring ratios and no temporaries.
FlexPlan baseline_plan(const ValidatedOrg& org);

struct PlanSearch {
  FlexPlan plan;
  CostBreakdown cost;
  Candidate best;
  std::vector<GenerationStats> history;  // empty for coordinate descent
};

/// GA over the plan genes; the baseline plan is part of the initial population.
PlanSearch optimize_plan(const ValidatedOrg& org, const GaConfig& config);

/// Coordinate descent from `start` (the baseline plan when absent).
PlanSearch descend_plan(const ValidatedOrg& org, double alpha_max, int sweeps,
                        std::optional<FlexPlan> start = std::nullopt);

/// generation,best_cost,mean_cost
void write_history_csv(std::ostream& os, const std::vector<GenerationStats>& history);

}  // namespace orgdyn
