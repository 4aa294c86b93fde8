#pragma once

// Seniority-structured organisation: domain types, validation and the closed-form
// stationary analytics (cumulative promotion fluxes, steady promotable pools,
// minimal hiring ratios and minimal permanent shares).
//
// Conventions used throughout the library:
//   * levels are indexed from 0 (entry level) to L-1 (top level);
//   * time and seniority are in years, rates are per year, headcounts are persons,
//     wages are currency per hour.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "orgdyn/error.hpp"

namespace orgdyn {

/// Smallest steady promotable pool, as a fraction of the level headcount, that
/// counts as well posed when inverting for minimal ratios or penalising plans.
inline constexpr double kMinPoolFraction = 1e-6;

/// Floater wage as a function of seniority.
struct FloaterWageCurve {
  enum class Kind { Constant, Exponential, PiecewiseLinear };

  Kind kind = Kind::Constant;
  double base = 0.0;    // constant value, or the wage at s = 0 for Exponential
  double growth = 0.0;  // per-year growth rate (Exponential only)
  // (seniority, wage) knots, sorted by seniority; held flat beyond the last knot.
  std::vector<std::pair<double, double>> knots;

  static FloaterWageCurve constant(double value);
  static FloaterWageCurve exponential(double initial, double growth_rate);
  static FloaterWageCurve piecewise_linear(std::vector<std::pair<double, double>> knots);

  double operator()(double seniority) const;
  /// Exponential growth rate of the curve as s -> infinity.
  double asymptotic_growth() const;

  bool operator==(const FloaterWageCurve&) const = default;
};

struct LevelSpec {
  double headcount = 0.0;        // N_j
  double attrition = 0.0;        // mu_j
  double eligibility_age = 0.0;  // tau_j
  std::optional<double> base_wage;  // w_j^0
  std::optional<double> temp_wage;  // w_j^t; absent means temporaries are disabled
  std::optional<FloaterWageCurve> floater_wage;

  bool operator==(const LevelSpec&) const = default;
};

struct BusinessUnit {
  std::string name;
  std::vector<double> headcounts;  // N_j^k per level
  std::vector<double> temp_wages;  // w_j^{t,k}; empty falls back to the level temp wage

  bool operator==(const BusinessUnit&) const = default;
};

struct OrgSpec {
  std::vector<LevelSpec> levels;
  double wage_growth = 0.0;  // r
  std::vector<BusinessUnit> business_units;

  bool operator==(const OrgSpec&) const = default;
};

/// An OrgSpec whose invariants have been checked. Only validate() creates one.
class ValidatedOrg {
 public:
  const OrgSpec& spec() const noexcept { return spec_; }
  int levels() const noexcept { return static_cast<int>(spec_.levels.size()); }
  const LevelSpec& level(int j) const { return spec_.levels.at(static_cast<std::size_t>(j)); }

  double headcount(int j) const { return level(j).headcount; }
  double attrition(int j) const { return level(j).attrition; }
  double eligibility_age(int j) const { return level(j).eligibility_age; }
  double wage_growth() const noexcept { return spec_.wage_growth; }

  bool operator==(const ValidatedOrg&) const = default;

 private:
  explicit ValidatedOrg(OrgSpec spec) : spec_(std::move(spec)) {}
  friend ValidatedOrg validate(OrgSpec spec);

  OrgSpec spec_;
};

/// Every invariant violation in `spec`; empty when the spec is valid.
std::vector<ValidationIssue> collect_issues(const OrgSpec& spec);

/// Throws ValidationError listing all violations.
ValidatedOrg validate(OrgSpec spec);

/// Decision vector of the cost program.
struct FlexPlan {
  // alpha_j >= 1: 1 + external/internal hires into level j. Entry 0 is unused and
  // kept at 1 since the entry level hires externally only.
  std::vector<double> hiring_ratio;
  // p_j in [0, 1]: share of level j on permanent contracts.
  std::vector<double> permanent_share;

  static FlexPlan all_internal(int levels);

  double alpha(int j) const { return hiring_ratio.at(static_cast<std::size_t>(j)); }
  double share(int j) const { return permanent_share.at(static_cast<std::size_t>(j)); }

  bool operator==(const FlexPlan&) const = default;
};

/// Throws Error(InvalidPlan) when sizes or bounds are wrong.
void check_plan(const ValidatedOrg& org, const FlexPlan& plan);

/// C^no_j = sum_{l >= j} mu_l N_l.
double cumulative_flux_no_hiring(const ValidatedOrg& org, int level);

/// C_j = sum_{l >= j} mu_l N_l p_l prod_{k=j..l} 1/alpha_k.
double cumulative_flux_with_hiring(const ValidatedOrg& org, const FlexPlan& plan, int level);

/// Steady promotion outflow of `level`, i.e. C_{j+1}; zero at the top level.
double promotion_outflow(const ValidatedOrg& org, const FlexPlan& plan, int level);

/// Steady boundary inflow mu_j N_j p_j + C_{j+1} (equal to alpha_j C_j).
double steady_inflow(const ValidatedOrg& org, const FlexPlan& plan, int level);

/// Steady promotable mass. Below the top level this is the closed form
/// (mu N p e^{-mu tau} - (1 - e^{-mu tau}) C_{j+1}) / mu and may be <= 0, which
/// signals an ill-posed plan. At the top level it is N p e^{-mu tau}.
double steady_promotable(const ValidatedOrg& org, const FlexPlan& plan, int level);

/// Smallest permanent share keeping the steady promotable pool positive, given the
/// shares and ratios of the levels above. Zero at the top level.
double min_permanent_share(const ValidatedOrg& org, const FlexPlan& plan, int level);

/// Minimal hiring ratios computed top-down with p = 1; entry 0 is 1.
/// Every ratio is >= 1 and the resulting pools satisfy A_j >= kMinPoolFraction N_j.
std::vector<double> min_external_ratios(const ValidatedOrg& org);

struct LevelSteadyState {
  double promotable = 0.0;      // A_j
  double promotion_rate = 0.0;  // P_j = C_{j+1} / A_j
  double inflow = 0.0;          // rho_j(0)
  double tail_decay = 0.0;      // B_j, extra decay above the eligibility age
  double attrition = 0.0;
  double eligibility_age = 0.0;
  double pool_mass = 0.0;       // N_j p_j

  /// Stationary density at seniority s (persons per year of seniority).
  double density(double seniority) const;
  /// Integral of the density over [0, s].
  double mass_below(double seniority) const;
};

struct SteadyState {
  std::vector<LevelSteadyState> levels;
};

/// Closed-form stationary state. Throws IllPosedError for the first level whose
/// promotable pool is not positive.
SteadyState stationary_state(const ValidatedOrg& org, const FlexPlan& plan);

using DensityFunction = std::function<double(double)>;

struct InitialConditionOptions {
  int time_points = 200;               // grid over t in [0, tau_j]
  int quadrature_intervals = 4000;
  double mass_tolerance = 1e-3;        // relative
  double strictness = 1e-9;            // margin must exceed strictness * N_j p_j
  double support = 0.0;                // integration bound for the mass check; 0 = automatic
};

struct InitialConditionCheck {
  bool holds = true;
  double worst_margin = 0.0;  // min over t of N_j p_j - lhs(t)
  double worst_time = 0.0;
};

/// Evaluates, per level, the sufficient condition on initial data that keeps the
/// promotable pool positive during the transient t <= tau_j. Throws
/// Error(MassMismatch) when an initial density does not carry N_j p_j.
std::vector<InitialConditionCheck> check_initial_condition(
    const ValidatedOrg& org, const FlexPlan& plan, std::span<const DensityFunction> initial,
    const InitialConditionOptions& options = {});

}  // namespace orgdyn
