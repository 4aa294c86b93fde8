#pragma once

// Labor cost of a stationary organisation staffed by permanent employees (wage
// w0 e^{rs}), temporary contractors (flat wage w_t) and, optionally, floaters
// shared across business units.

#include <iosfwd>
#include <optional>
#include <vector>

#include "orgdyn/org_model.hpp"

namespace orgdyn {

struct CostBreakdown {
  std::vector<double> permanent;  // per level, currency/hour
  std::vector<double> temporary;
  std::vector<double> floater;
  double total = 0.0;

  double level_total(int j) const;
};

/// Permanent payroll of level j: integral of the stationary density times
/// w0 e^{rs}. Closed form; the bracket is 1 when the level promotes nobody.
/// Throws IllPosedError when the promotable pool of a non-top level is not
/// positive, Error(GrowthExceedsAttrition) when r >= mu_j and
/// Error(MissingWage) without a base wage.
double permanent_cost(const ValidatedOrg& org, const FlexPlan& plan, int level);

/// Permanent payroll plus (1 - p_j) N_j w_t. A level without a temporary wage
/// must be fully permanent, otherwise Error(MissingWage).
double level_cost(const ValidatedOrg& org, const FlexPlan& plan, int level);

struct QuadratureOptions {
  double max_step_decay = 0.01;  // step * decay rate, bounds the Simpson error
  double span_decays = 60.0;     // integrate this many e-folds past tau, then add the tail exactly
};

/// Same quantity as level_cost, integrating the stationary density numerically.
double cost_quadrature_oracle(const ValidatedOrg& org, const FlexPlan& plan, int level,
                              const QuadratureOptions& options = {});

CostBreakdown org_cost(const ValidatedOrg& org, const FlexPlan& plan);

/// Sets w_t = (1 + B) w0 at every level; nullopt removes temporary wages so that
/// every plan is forced to p = 1.
ValidatedOrg with_uniform_premium(const ValidatedOrg& org, std::optional<double> premium);

/// w_fa = integral over [0, inf) of w_float(s) e^{-mu_j s} ds, as a plain
/// integral with no inflow normalisation. Throws Error(MissingFloaterCurve).
double floater_average_cost(const ValidatedOrg& org, int level);

/// Decisions for an organisation split into business units. Each unit runs its
/// own promotion ladder; floaters are pooled per level.
struct BusinessUnitPlan {
  std::vector<FlexPlan> units;                     // alpha^k, p^k
  std::vector<std::vector<double>> floater_share;  // g_j^k, same shape as p^k
};

/// One unit as a standalone organisation: its headcounts and temporary wages,
/// shared attrition, eligibility ages and base wages.
ValidatedOrg unit_org(const ValidatedOrg& org, int unit);

/// Sum over units and levels of temporary, floater and permanent cost for any
/// feasible (p, g). Throws Error(InvalidPlan) when p + g > 1 or shapes mismatch.
CostBreakdown business_unit_cost(const ValidatedOrg& org, const BusinessUnitPlan& plan);

/// Inner minimisation over g: at each (unit, level) the flexible share goes to
/// whichever of temporaries and floaters is cheaper. Levels without a floater
/// curve keep g = 0.
struct ReducedUnit {
  ValidatedOrg org;
  std::vector<double> flexible_wage;  // min(w_t, w_fa)
  std::vector<bool> floaters;         // true where floaters are the cheaper option
};

struct ReducedProblem {
  std::vector<ReducedUnit> units;
  BusinessUnitPlan plan;  // input plan with g set to the inner minimiser
};

ReducedProblem reduce_floaters(const ValidatedOrg& org, const BusinessUnitPlan& plan);

/// Cost of one reduced unit: (1 - p) N min(w_t, w_fa) plus permanent payroll.
double reduced_cost(const ReducedUnit& unit, const FlexPlan& plan);

enum class Case1Regime { AtMinimum, Interior, NoTemporaries };

struct Case1Diagnostics {
  double first_derivative = 0.0;   // dCost_1/dp_1
  double second_derivative = 0.0;  // exact, includes the mu_1 N_1 chain factor
  double second_derivative_unscaled = 0.0;  // the same expression divided by mu_1 N_1
  double min_share = 0.0;          // p_1^min
  double optimal_share = 0.0;      // p_1*
  Case1Regime regime = Case1Regime::NoTemporaries;
};

/// Entry level only carries temporaries (p_j = 1 for j >= 1). Derivatives are
/// taken at the plan's p_1. Throws Error(InvalidPlan) when an upper level has
/// p < 1 and Error(MissingWage) without a temporary wage at the entry level.
Case1Diagnostics case1_diagnostics(const ValidatedOrg& org, const FlexPlan& plan);

struct Case2Residuals {
  double r1 = 0.0;  // (lhs - rhs) / lhs of the dCost/dp_1 = 0 condition
  double r2 = 0.0;  // same for the simplified dCost/dp_2 = 0 condition
};

/// Temporaries in the first two levels only (p_j = 1 for j >= 2). The p_2
/// relation takes dC_2/dp_2 = mu_2 N_2, i.e. alpha_2 = 1.
Case2Residuals case2_residuals(const ValidatedOrg& org, const FlexPlan& plan);

/// level,permanent,temporary,floater,total; a final row "all" carries the sums.
void write_cost_csv(std::ostream& os, const CostBreakdown& cost);

}  // namespace orgdyn
