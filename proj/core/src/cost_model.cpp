#include "orgdyn/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "orgdyn/quadrature.hpp"

namespace orgdyn {

namespace {

std::string level_name(int j) { return "level " + std::to_string(j + 1); }

double base_wage(const ValidatedOrg& org, int j) {
  const auto& w = org.level(j).base_wage;
  if (!w) throw Error(ErrorCode::MissingWage, level_name(j) + " has no base wage");
  return *w;
}

void check_growth(const ValidatedOrg& org, int j) {
  if (!(org.wage_growth() < org.attrition(j))) {
    throw Error(ErrorCode::GrowthExceedsAttrition, level_name(j) + ": wage growth must stay below attrition");
  }
}

void check_posed(const ValidatedOrg& org, const FlexPlan& plan, int j) {
  if (j == org.levels() - 1) return;
  const double a = steady_promotable(org, plan, j);
  if (!(a > 0.0)) throw IllPosedError(j, a);
}

// Temporary part (1 - p) N w, where a missing wage is only acceptable when p = 1.
double flexible_part(const ValidatedOrg& org, const FlexPlan& plan, int j, std::optional<double> wage) {
  const double share = 1.0 - plan.share(j);
  if (share <= 0.0) return 0.0;
  if (!wage) throw Error(ErrorCode::MissingWage, level_name(j) + " has temporaries but no temporary wage");
  return share * org.headcount(j) * *wage;
}

}  // namespace

double CostBreakdown::level_total(int j) const {
  const auto u = static_cast<std::size_t>(j);
  return permanent.at(u) + temporary.at(u) + floater.at(u);
}

double permanent_cost(const ValidatedOrg& org, const FlexPlan& plan, int level) {
  check_plan(org, plan);
  check_growth(org, level);
  const double w0 = base_wage(org, level);
  check_posed(org, plan, level);

  const double mu = org.attrition(level);
  const double r = org.wage_growth();
  const double tau = org.eligibility_age(level);
  const double inflow = steady_inflow(org, plan, level);  // alpha_j C_j
  const double outflow = promotion_outflow(org, plan, level);
  double bracket = 1.0;
  if (outflow > 0.0) {
    bracket -= mu * outflow * std::exp(r * tau) / ((mu - r) * inflow + r * outflow * std::exp(mu * tau));
  }
  return w0 * inflow / (mu - r) * bracket;
}

double level_cost(const ValidatedOrg& org, const FlexPlan& plan, int level) {
  return flexible_part(org, plan, level, org.level(level).temp_wage) + permanent_cost(org, plan, level);
}

double cost_quadrature_oracle(const ValidatedOrg& org, const FlexPlan& plan, int level,
                              const QuadratureOptions& options) {
  check_plan(org, plan);
  check_growth(org, level);
  const double w0 = base_wage(org, level);
  check_posed(org, plan, level);
  const double temporary = flexible_part(org, plan, level, org.level(level).temp_wage);

  const LevelSteadyState lv = stationary_state(org, plan).levels.at(static_cast<std::size_t>(level));
  const double r = org.wage_growth();
  const double tau = lv.eligibility_age;
  // Combined in log space: for slow decays e^{rs} alone overflows far out in the tail.
  auto integrand = [&](double s) { return w0 * std::exp(r * s + std::log(lv.density(s))); };

  // Below tau the integrand decays at mu - r, above it at mu - r + B. Each piece
  // gets a step small enough for its own rate.
  const double head_rate = std::max(lv.attrition - r, 1e-12);
  const double tail_rate = lv.attrition - r + lv.tail_decay;
  const int head_steps = static_cast<int>(std::ceil(tau * head_rate / options.max_step_decay));
  const double head = quad::simpson(integrand, 0.0, tau, std::max(head_steps, 2));

  const double span = options.span_decays / tail_rate;
  const int tail_steps = static_cast<int>(std::ceil(options.span_decays / options.max_step_decay));
  const double body = quad::simpson(integrand, tau, tau + span, tail_steps);
  // Beyond tau + span the integrand is a single exponential.
  const double rest = integrand(tau + span) / tail_rate;
  return temporary + head + body + rest;
}

CostBreakdown org_cost(const ValidatedOrg& org, const FlexPlan& plan) {
  check_plan(org, plan);
  const auto L = static_cast<std::size_t>(org.levels());
  CostBreakdown out;
  out.permanent.assign(L, 0.0);
  out.temporary.assign(L, 0.0);
  out.floater.assign(L, 0.0);
  for (int j = 0; j < org.levels(); ++j) {
    const auto u = static_cast<std::size_t>(j);
    out.temporary[u] = flexible_part(org, plan, j, org.level(j).temp_wage);
    out.permanent[u] = permanent_cost(org, plan, j);
    out.total += out.temporary[u] + out.permanent[u];
  }
  return out;
}

ValidatedOrg with_uniform_premium(const ValidatedOrg& org, std::optional<double> premium) {
  OrgSpec spec = org.spec();
  for (std::size_t j = 0; j < spec.levels.size(); ++j) {
    auto& lv = spec.levels[j];
    if (!premium) {
      lv.temp_wage.reset();
      continue;
    }
    if (!lv.base_wage) throw Error(ErrorCode::MissingWage, level_name(static_cast<int>(j)) + " has no base wage");
    lv.temp_wage = (1.0 + *premium) * *lv.base_wage;
  }
  for (auto& bu : spec.business_units) bu.temp_wages.clear();
  return validate(std::move(spec));
}

// ---------------------------------------------------------------------------
// Floaters

double floater_average_cost(const ValidatedOrg& org, int level) {
  const auto& curve = org.level(level).floater_wage;
  if (!curve) throw Error(ErrorCode::MissingFloaterCurve, level_name(level) + " has no floater wage curve");
  const double mu = org.attrition(level);

  switch (curve->kind) {
    case FloaterWageCurve::Kind::Constant:
      return curve->base / mu;
    case FloaterWageCurve::Kind::Exponential:
      return curve->base / (mu - curve->growth);
    case FloaterWageCurve::Kind::PiecewiseLinear:
      break;
  }

  // Piecewise linear: integrate knot to knot, then the flat tail exactly.
  auto integrand = [&](double s) { return (*curve)(s) * std::exp(-mu * s); };
  std::vector<double> cuts{0.0};
  for (const auto& [s, w] : curve->knots) {
    if (s > cuts.back()) cuts.push_back(s);
  }
  double total = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    total += quad::adaptive_simpson(integrand, cuts[i - 1], cuts[i], 1e-12);
  }
  const double last = cuts.back();
  return total + (*curve)(last) * std::exp(-mu * last) / mu;
}

ValidatedOrg unit_org(const ValidatedOrg& org, int unit) {
  const auto& units = org.spec().business_units;
  if (unit < 0 || unit >= static_cast<int>(units.size())) {
    throw Error(ErrorCode::IndexOutOfRange, "business unit " + std::to_string(unit) + " does not exist");
  }
  const BusinessUnit& bu = units[static_cast<std::size_t>(unit)];
  OrgSpec spec = org.spec();
  spec.business_units.clear();
  for (std::size_t j = 0; j < spec.levels.size(); ++j) {
    spec.levels[j].headcount = bu.headcounts[j];
    if (!bu.temp_wages.empty()) spec.levels[j].temp_wage = bu.temp_wages[j];
  }
  return validate(std::move(spec));
}

namespace {

void check_unit_plan(const ValidatedOrg& org, const BusinessUnitPlan& plan) {
  const std::size_t K = org.spec().business_units.size();
  if (plan.units.size() != K || plan.floater_share.size() != K) {
    throw Error(ErrorCode::InvalidPlan, "business unit plan needs one entry per unit");
  }
  const auto L = static_cast<std::size_t>(org.levels());
  for (std::size_t k = 0; k < K; ++k) {
    if (plan.floater_share[k].size() != L) {
      throw Error(ErrorCode::InvalidPlan, "floater shares need one value per level");
    }
    for (std::size_t j = 0; j < L; ++j) {
      const double g = plan.floater_share[k][j];
      const double p = plan.units[k].permanent_share.at(j);
      if (!(g >= 0.0) || p + g > 1.0 + 1e-12) {
        throw Error(ErrorCode::InvalidPlan, "floater share must be >= 0 with p + g <= 1");
      }
    }
  }
}

}  // namespace

CostBreakdown business_unit_cost(const ValidatedOrg& org, const BusinessUnitPlan& plan) {
  check_unit_plan(org, plan);
  const int L = org.levels();
  const auto n = static_cast<std::size_t>(L);
  CostBreakdown out;
  out.permanent.assign(n, 0.0);
  out.temporary.assign(n, 0.0);
  out.floater.assign(n, 0.0);

  std::vector<std::optional<double>> fa(n);
  for (int j = 0; j < L; ++j) {
    if (org.level(j).floater_wage) fa[static_cast<std::size_t>(j)] = floater_average_cost(org, j);
  }

  for (std::size_t k = 0; k < plan.units.size(); ++k) {
    const ValidatedOrg unit = unit_org(org, static_cast<int>(k));
    const FlexPlan& p = plan.units[k];
    for (int j = 0; j < L; ++j) {
      const auto u = static_cast<std::size_t>(j);
      const double g = plan.floater_share[k][u];
      const double head = unit.headcount(j);
      const double temp_share = std::max(1.0 - p.share(j) - g, 0.0);
      if (temp_share > 0.0) {
        const auto& wt = unit.level(j).temp_wage;
        if (!wt) throw Error(ErrorCode::MissingWage, level_name(j) + " has temporaries but no temporary wage");
        out.temporary[u] += temp_share * head * *wt;
      }
      if (g > 0.0) {
        if (!fa[u]) throw Error(ErrorCode::MissingFloaterCurve, level_name(j) + " has floaters but no wage curve");
        out.floater[u] += g * head * *fa[u];
      }
      out.permanent[u] += permanent_cost(unit, p, j);
    }
  }
  for (std::size_t u = 0; u < n; ++u) out.total += out.permanent[u] + out.temporary[u] + out.floater[u];
  return out;
}

ReducedProblem reduce_floaters(const ValidatedOrg& org, const BusinessUnitPlan& plan) {
  const int L = org.levels();
  const auto n = static_cast<std::size_t>(L);
  std::vector<std::optional<double>> fa(n);
  for (int j = 0; j < L; ++j) {
    if (org.level(j).floater_wage) fa[static_cast<std::size_t>(j)] = floater_average_cost(org, j);
  }

  ReducedProblem out;
  out.plan = plan;
  const std::size_t K = org.spec().business_units.size();
  out.plan.floater_share.assign(K, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < K; ++k) {
    ReducedUnit ru{unit_org(org, static_cast<int>(k)), std::vector<double>(n), std::vector<bool>(n, false)};
    for (std::size_t j = 0; j < n; ++j) {
      const auto& wt = ru.org.level(static_cast<int>(j)).temp_wage;
      const double temp = wt ? *wt : std::numeric_limits<double>::infinity();
      const double flo = fa[j] ? *fa[j] : std::numeric_limits<double>::infinity();
      ru.floaters[j] = flo < temp;
      ru.flexible_wage[j] = std::min(temp, flo);
      if (ru.floaters[j] && k < plan.units.size()) {
        out.plan.floater_share[k][j] = 1.0 - plan.units[k].permanent_share.at(j);
      }
    }
    out.units.push_back(std::move(ru));
  }
  return out;
}

double reduced_cost(const ReducedUnit& unit, const FlexPlan& plan) {
  double total = 0.0;
  for (int j = 0; j < unit.org.levels(); ++j) {
    const double wage = unit.flexible_wage.at(static_cast<std::size_t>(j));
    const std::optional<double> w = std::isfinite(wage) ? std::optional<double>(wage) : std::nullopt;
    total += flexible_part(unit.org, plan, j, w) + permanent_cost(unit.org, plan, j);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Optimality diagnostics

Case1Diagnostics case1_diagnostics(const ValidatedOrg& org, const FlexPlan& plan) {
  check_plan(org, plan);
  for (int j = 1; j < org.levels(); ++j) {
    if (plan.share(j) != 1.0) throw Error(ErrorCode::InvalidPlan, "only the entry level may carry temporaries");
  }
  const auto& wt_opt = org.level(0).temp_wage;
  if (!wt_opt) throw Error(ErrorCode::MissingWage, "level 1 has no temporary wage");
  check_growth(org, 0);

  const double wt = *wt_opt;
  const double w0 = base_wage(org, 0);
  const double mu = org.attrition(0);
  const double n = org.headcount(0);
  const double r = org.wage_growth();
  const double tau = org.eligibility_age(0);
  const double c2 = promotion_outflow(org, plan, 0);
  const double k = r * mu * c2 * c2 * std::exp((r + mu) * tau);

  // Cost_1 as a function of X = alpha_1 C_1 = mu N p + C_2.
  auto denom = [&](double x) { return (mu - r) * x + r * c2 * std::exp(mu * tau); };
  auto slope = [&](double p) {
    const double d = denom(mu * n * p + c2);
    return n * (-wt + w0 * mu / (mu - r) * (1.0 - k / (d * d)));
  };

  Case1Diagnostics out;
  const double d = denom(steady_inflow(org, plan, 0));
  out.first_derivative = slope(plan.share(0));
  out.second_derivative_unscaled = 2.0 * n * w0 * r * mu * mu * c2 * c2 * std::exp((r + mu) * tau) / (d * d * d);
  out.second_derivative = mu * n * out.second_derivative_unscaled;
  out.min_share = std::clamp(min_permanent_share(org, plan, 0), 0.0, 1.0);

  if (slope(out.min_share) >= 0.0) {
    out.optimal_share = out.min_share;
    out.regime = Case1Regime::AtMinimum;
  } else if (slope(1.0) <= 0.0) {
    out.optimal_share = 1.0;
    out.regime = Case1Regime::NoTemporaries;
  } else {
    // Cost_1' = 0  <=>  D^2 = k / (1 - (mu - r) w_t / (mu w0)); the bracket is
    // positive here because the slope changes sign inside the interval.
    const double gap = 1.0 - (mu - r) * wt / (mu * w0);
    const double root_d = std::sqrt(k / gap);
    const double x = (root_d - r * c2 * std::exp(mu * tau)) / (mu - r);
    out.optimal_share = std::clamp((x - c2) / (mu * n), out.min_share, 1.0);
    out.regime = Case1Regime::Interior;
  }
  return out;
}

Case2Residuals case2_residuals(const ValidatedOrg& org, const FlexPlan& plan) {
  check_plan(org, plan);
  if (org.levels() < 2) throw Error(ErrorCode::InvalidPlan, "the two-level conditions need at least two levels");
  for (int j = 2; j < org.levels(); ++j) {
    if (plan.share(j) != 1.0) throw Error(ErrorCode::InvalidPlan, "only the first two levels may carry temporaries");
  }
  auto temp = [&](int j) {
    const auto& w = org.level(j).temp_wage;
    if (!w) throw Error(ErrorCode::MissingWage, level_name(j) + " has no temporary wage");
    return *w;
  };
  const double r = org.wage_growth();
  const double wt1 = temp(0);
  const double wt2 = temp(1);
  const double w01 = base_wage(org, 0);
  const double w02 = base_wage(org, 1);
  const double mu1 = org.attrition(0);
  const double mu2 = org.attrition(1);
  const double n1 = org.headcount(0);
  const double n2 = org.headcount(1);
  const double tau1 = org.eligibility_age(0);
  const double tau2 = org.eligibility_age(1);

  const double x1 = steady_inflow(org, plan, 0);  // alpha_1 C_1
  const double c2 = promotion_outflow(org, plan, 0);
  const double x2 = steady_inflow(org, plan, 1);  // alpha_2 C_2
  const double c3 = promotion_outflow(org, plan, 1);

  const double e1r = std::exp(r * tau1);
  const double e1m = std::exp(mu1 * tau1);
  const double d1 = (mu1 - r) * x1 + r * c2 * e1m;
  const double lhs1 = (mu1 - r) * n1 * wt1;
  const double rhs1 = w01 * mu1 * n1 * (1.0 - r * mu1 * c2 * c2 * std::exp((r + mu1) * tau1) / (d1 * d1));

  const double e2r = std::exp(r * tau2);
  const double e2m = std::exp(mu2 * tau2);
  const double d2 = (mu2 - r) * x2 + r * c3 * e2m;
  const double first = wt1 / mu1 + w01 / (mu1 - r) *
                                        (-mu1 * x1 * e1r / d1 + x1 * mu1 * c2 * e1r * r * e1m / (d1 * d1));
  const double second = w02 / (mu2 - r) *
                        (1.0 - mu2 * c3 * e2r / d2 + x2 * (mu2 - r) * mu2 * c3 * e2r / (d2 * d2));
  const double lhs2 = n2 * wt2;
  const double rhs2 = mu2 * n2 * (first + second);

  return {(lhs1 - rhs1) / lhs1, (lhs2 - rhs2) / lhs2};
}

void write_cost_csv(std::ostream& os, const CostBreakdown& cost) {
  const auto precision = os.precision(12);
  os << "level,permanent,temporary,floater,total\n";
  double perm = 0.0;
  double temp = 0.0;
  double flo = 0.0;
  for (std::size_t j = 0; j < cost.permanent.size(); ++j) {
    os << j + 1 << ',' << cost.permanent[j] << ',' << cost.temporary[j] << ',' << cost.floater[j] << ','
       << cost.permanent[j] + cost.temporary[j] + cost.floater[j] << '\n';
    perm += cost.permanent[j];
    temp += cost.temporary[j];
    flo += cost.floater[j];
  }
  os << "all," << perm << ',' << temp << ',' << flo << ',' << cost.total << '\n';
  os.precision(precision);
}

}  // namespace orgdyn
