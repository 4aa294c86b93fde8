#pragma once

// Transient simulation of the seniority transport equations with an
// explicit-implicit first-order upwind scheme and a per-step policy closure that
// keeps every level at its target headcount.
//
// Grid layout: node i = 1..M sits at s_i = i * ds. Node 0 is a ghost carrying the
// boundary inflow and does not count towards the level mass. The last node is
// absorbing, so ds * sum_i rho_i is conserved exactly on the truncated grid.

#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "orgdyn/org_model.hpp"

namespace orgdyn {

inline constexpr double kDefaultStep = 0.05;
inline constexpr double kDefaultSeniorityCap = 50.0;
inline constexpr double kDefaultMaxPromotionRate = 5.0;

class SeniorityGrid {
 public:
  /// Throws Error(CflViolation) when dt > ds and Error(InvalidGrid) for
  /// non-positive steps or s_max < ds.
  SeniorityGrid(double ds = kDefaultStep, double dt = kDefaultStep, double s_max = kDefaultSeniorityCap);

  double ds() const noexcept { return ds_; }
  double dt() const noexcept { return dt_; }
  double s_max() const noexcept { return s_max_; }
  int nodes() const noexcept { return nodes_; }
  double seniority(int node) const noexcept { return node * ds_; }  // node in 1..M
  /// Number of nodes with 0 < s_i <= tau.
  int nodes_up_to(double tau) const noexcept;

  /// Cap needed to hold the tail of the slowest-decaying level (max tau + 40 / min mu).
  static double recommended_cap(const ValidatedOrg& org);

 private:
  double ds_;
  double dt_;
  double s_max_;
  int nodes_;
};

struct LevelDensity {
  int level = 0;
  std::vector<double> values;  // rho at nodes 1..M, values[i-1] = rho_i

  /// ds * sum_i rho_i
  double mass(const SeniorityGrid& grid) const;
};

struct PolicyState {
  std::vector<double> promotion;   // P_j, P_{L-1} = 0
  std::vector<double> hiring;      // h_j, external hires per unit of headcount N_j
  std::vector<double> shortfall;   // delta_j, external hires forced by a capped P_{j-1}
  std::vector<double> promotable;  // discrete A_j
  std::vector<bool> clipped;       // P_j hit the cap
  std::vector<bool> degenerate;    // A_j <= 0 when closing level j+1
  double max_rate = kDefaultMaxPromotionRate;

  /// |h_j N_j + P_{j-1} A_{j-1} - mu_j N_j p_j - P_j A_j| for each level.
  std::vector<double> balance_residual(const ValidatedOrg& org, const FlexPlan& plan) const;
};

/// Take the largest promotion rates allowed by the cap; hire externally only to
/// cover what a capped promotion rate cannot.
struct MaxInternalPolicy {
  double max_rate = kDefaultMaxPromotionRate;
};

/// External hires into each level are `fraction` times the internal promotions,
/// with a nonnegative top-up when the promotion rate is capped.
struct ExternalFractionPolicy {
  double max_rate = kDefaultMaxPromotionRate;
  double fraction = 0.0;
};

using PolicyRule = std::variant<MaxInternalPolicy, ExternalFractionPolicy>;

double max_rate_of(const PolicyRule& rule);

/// Hiring ratios whose closed-form stationary state the policy converges to when
/// its cap is inactive: all ones for max-internal, 1 + fraction otherwise.
FlexPlan reference_plan(const PolicyRule& rule, const FlexPlan& plan);

enum class InitialKind { Stationary, Uniform, TruncatedExponential };

/// Discrete initial densities with ds * sum rho = N_j p_j exactly.
///  * Stationary: cell averages of the closed-form stationary density over
///    (s_{i-1}, s_i]; the tail beyond s_max goes to the last node. Requires a
///    well-posed plan.
///  * Uniform: flat on (0, 2 tau_j], or the whole grid when tau_j = 0.
///  * TruncatedExponential: e^{-mu_j s} on the grid, rescaled.
/// Throws Error(InfeasibleInitialData) when a level feeding promotions starts
/// with an empty promotable pool.
std::vector<LevelDensity> make_initial_density(const ValidatedOrg& org, const FlexPlan& plan,
                                               const SeniorityGrid& grid, InitialKind kind);

/// N_j p_j - ds * sum_{0 < s_i <= tau_j} rho_i
double discrete_promotable(const ValidatedOrg& org, const FlexPlan& plan, const SeniorityGrid& grid,
                           const LevelDensity& density);

PolicyState close_policy_max_internal(const std::vector<LevelDensity>& densities, const ValidatedOrg& org,
                                      const FlexPlan& plan, const SeniorityGrid& grid, double max_rate);

PolicyState close_policy_external_fraction(const std::vector<LevelDensity>& densities,
                                           const ValidatedOrg& org, const FlexPlan& plan,
                                           const SeniorityGrid& grid, double max_rate, double fraction);

PolicyState close_policy(const std::vector<LevelDensity>& densities, const ValidatedOrg& org,
                         const FlexPlan& plan, const SeniorityGrid& grid, const PolicyRule& rule);

struct SimulationState {
  double time = 0.0;
  std::vector<LevelDensity> densities;
  PolicyState policy;
};

SimulationState initial_state(const ValidatedOrg& org, const FlexPlan& plan, const SeniorityGrid& grid,
                              const PolicyRule& rule, InitialKind kind);

/// Advance every level one dt with the given promotion rates held fixed.
std::vector<LevelDensity> advance_densities(const std::vector<LevelDensity>& densities,
                                            const std::vector<double>& promotion, const ValidatedOrg& org,
                                            const FlexPlan& plan, const SeniorityGrid& grid);

/// One full step: transport with the current rates, then close the policy on the
/// new densities.
SimulationState step(const SimulationState& state, const ValidatedOrg& org, const FlexPlan& plan,
                     const SeniorityGrid& grid, const PolicyRule& rule);

struct LevelMetrics {
  double ready_ratio = 0.0;      // RP_j = A_j / N_j
  double excess_seniority = 0.0; // T_j, mean seniority above tau_j among the promotable
  double mass_error = 0.0;       // |ds sum rho - N_j p_j| / N_j
  std::optional<double> l1_to_steady;  // relative to N_j
};

/// `steady` may be null when the reference stationary state is ill posed.
std::vector<LevelMetrics> metrics(const std::vector<LevelDensity>& densities, const PolicyState& policy,
                                  const ValidatedOrg& org, const FlexPlan& plan, const SeniorityGrid& grid,
                                  const SteadyState* steady);

struct TrajectoryRecord {
  double time = 0.0;
  PolicyState policy;
  std::vector<LevelMetrics> metrics;
};

struct RunOptions {
  InitialKind initial = InitialKind::Uniform;
  int record_every = 1;                // record every n-th step (the last step is always kept)
  std::vector<double> snapshot_times;  // density snapshots
};

struct DensitySnapshot {
  double time = 0.0;
  std::vector<LevelDensity> densities;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  std::vector<DensitySnapshot> snapshots;
  SimulationState final_state;
  std::optional<SteadyState> reference;  // closed form the run is compared to
  double max_mass_error = 0.0;           // max over steps and levels, relative to N_j
};

Trajectory run(const ValidatedOrg& org, const FlexPlan& plan, const SeniorityGrid& grid, const PolicyRule& rule,
               double horizon, const RunOptions& options = {});

/// One row per (t, level): t,j,P_j,h_j,delta_j,A_j,RP_j,T_j,mass_error
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);

/// One row per node: s,rho_1..rho_L
void write_density_csv(std::ostream& os, const SeniorityGrid& grid, const DensitySnapshot& snapshot);

}  // namespace orgdyn
