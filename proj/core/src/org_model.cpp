#include "orgdyn/org_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "orgdyn/quadrature.hpp"

namespace orgdyn {

// ---------------------------------------------------------------------------
// FloaterWageCurve

FloaterWageCurve FloaterWageCurve::constant(double value) {
  FloaterWageCurve c;
  c.kind = Kind::Constant;
  c.base = value;
  return c;
}

FloaterWageCurve FloaterWageCurve::exponential(double initial, double growth_rate) {
  FloaterWageCurve c;
  c.kind = Kind::Exponential;
  c.base = initial;
  c.growth = growth_rate;
  return c;
}

FloaterWageCurve FloaterWageCurve::piecewise_linear(std::vector<std::pair<double, double>> knots) {
  FloaterWageCurve c;
  c.kind = Kind::PiecewiseLinear;
  std::sort(knots.begin(), knots.end());
  c.knots = std::move(knots);
  return c;
}

double FloaterWageCurve::operator()(double s) const {
  switch (kind) {
    case Kind::Constant:
      return base;
    case Kind::Exponential:
      return base * std::exp(growth * s);
    case Kind::PiecewiseLinear: {
      if (knots.empty()) return 0.0;
      if (s <= knots.front().first) return knots.front().second;
      if (s >= knots.back().first) return knots.back().second;
      auto hi = std::upper_bound(knots.begin(), knots.end(), s,
                                 [](double x, const auto& k) { return x < k.first; });
      auto lo = std::prev(hi);
      const double w = (s - lo->first) / (hi->first - lo->first);
      return lo->second + w * (hi->second - lo->second);
    }
  }
  return 0.0;
}

double FloaterWageCurve::asymptotic_growth() const {
  return kind == Kind::Exponential ? growth : 0.0;
}

// ---------------------------------------------------------------------------
// Validation

std::vector<ValidationIssue> collect_issues(const OrgSpec& spec) {
  std::vector<ValidationIssue> issues;
  auto add = [&](ErrorCode code, int level, const std::string& msg) {
    issues.push_back({code, level, msg});
  };

  if (spec.levels.empty()) add(ErrorCode::EmptyOrganization, -1, "at least one level is required");

  const double r = spec.wage_growth;
  for (std::size_t i = 0; i < spec.levels.size(); ++i) {
    const int j = static_cast<int>(i);
    const LevelSpec& lv = spec.levels[i];
    if (!(lv.headcount > 0.0)) add(ErrorCode::NonPositiveHeadcount, j, "headcount must be > 0");
    if (!(lv.attrition > 0.0)) add(ErrorCode::NonPositiveAttrition, j, "attrition must be > 0");
    if (!(r < lv.attrition)) {
      std::ostringstream os;
      os << "wage growth " << r << " must stay below attrition " << lv.attrition;
      add(ErrorCode::AttritionNotDominatingGrowth, j, os.str());
    }
    if (!(lv.eligibility_age >= 0.0)) {
      add(ErrorCode::NegativeEligibilityAge, j, "eligibility age must be >= 0");
    }
    if (lv.base_wage && lv.temp_wage && !(*lv.temp_wage > *lv.base_wage)) {
      add(ErrorCode::TemporaryWageNotAtPremium, j, "temporary wage must exceed the entry wage");
    }
    if (lv.floater_wage && lv.floater_wage->asymptotic_growth() >= lv.attrition) {
      add(ErrorCode::AttritionNotDominatingGrowth, j,
          "floater wage growth must stay below attrition");
    }
  }

  for (const BusinessUnit& bu : spec.business_units) {
    if (bu.headcounts.size() != spec.levels.size()) {
      add(ErrorCode::InvalidConfig, -1, "business unit '" + bu.name + "' needs one headcount per level");
      continue;
    }
    if (!bu.temp_wages.empty() && bu.temp_wages.size() != spec.levels.size()) {
      add(ErrorCode::InvalidConfig, -1, "business unit '" + bu.name + "' needs one temp wage per level");
    }
    for (std::size_t i = 0; i < bu.headcounts.size(); ++i) {
      if (!(bu.headcounts[i] > 0.0)) {
        add(ErrorCode::NonPositiveHeadcount, static_cast<int>(i),
            "business unit '" + bu.name + "' headcount must be > 0");
      }
    }
  }
  if (!spec.business_units.empty()) {
    for (std::size_t i = 0; i < spec.levels.size(); ++i) {
      double total = 0.0;
      for (const BusinessUnit& bu : spec.business_units) {
        if (i < bu.headcounts.size()) total += bu.headcounts[i];
      }
      const double n = spec.levels[i].headcount;
      if (std::abs(total - n) > 1e-9 * std::max(1.0, n)) {
        add(ErrorCode::InvalidConfig, static_cast<int>(i),
            "business unit headcounts must sum to the level headcount");
      }
    }
  }
  return issues;
}

ValidatedOrg validate(OrgSpec spec) {
  auto issues = collect_issues(spec);
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return ValidatedOrg(std::move(spec));
}

FlexPlan FlexPlan::all_internal(int levels) {
  const auto n = static_cast<std::size_t>(std::max(levels, 0));
  return FlexPlan{std::vector<double>(n, 1.0), std::vector<double>(n, 1.0)};
}

void check_plan(const ValidatedOrg& org, const FlexPlan& plan) {
  const auto L = static_cast<std::size_t>(org.levels());
  if (plan.hiring_ratio.size() != L || plan.permanent_share.size() != L) {
    throw Error(ErrorCode::InvalidPlan, "plan needs one hiring ratio and one share per level");
  }
  for (std::size_t j = 1; j < L; ++j) {
    if (!(plan.hiring_ratio[j] >= 1.0) || !std::isfinite(plan.hiring_ratio[j])) {
      throw Error(ErrorCode::InvalidPlan, "hiring ratio of level " + std::to_string(j + 1) + " must be >= 1");
    }
  }
  for (std::size_t j = 0; j < L; ++j) {
    const double p = plan.permanent_share[j];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::InvalidPlan, "permanent share of level " + std::to_string(j + 1) + " must lie in [0, 1]");
    }
  }
}

// ---------------------------------------------------------------------------
// Closed forms

namespace {

void check_level(const ValidatedOrg& org, int level) {
  if (level < 0 || level >= org.levels()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "level " + std::to_string(level) + " outside [0, " + std::to_string(org.levels()) + ")");
  }
}

// C_j for 0 <= j <= L (C_L = 0), computed by the backward recursion
// C_j = (mu_j N_j p_j + C_{j+1}) / alpha_j, which equals the sum-product form.
double flux_from(const ValidatedOrg& org, const FlexPlan& plan, int j) {
  double c = 0.0;
  for (int l = org.levels() - 1; l >= j; --l) {
    const double alpha = l == 0 ? 1.0 : plan.alpha(l);
    c = (org.attrition(l) * org.headcount(l) * plan.share(l) + c) / alpha;
  }
  return c;
}

}  // namespace

double cumulative_flux_no_hiring(const ValidatedOrg& org, int level) {
  check_level(org, level);
  double c = 0.0;
  for (int l = level; l < org.levels(); ++l) c += org.attrition(l) * org.headcount(l);
  return c;
}

double cumulative_flux_with_hiring(const ValidatedOrg& org, const FlexPlan& plan, int level) {
  check_level(org, level);
  check_plan(org, plan);
  // Sum-product form, kept literal; flux_from() is the recursive equivalent.
  double total = 0.0;
  double product = 1.0;
  for (int l = level; l < org.levels(); ++l) {
    product /= (l == 0 ? 1.0 : plan.alpha(l));
    total += org.attrition(l) * org.headcount(l) * plan.share(l) * product;
  }
  return total;
}

double promotion_outflow(const ValidatedOrg& org, const FlexPlan& plan, int level) {
  check_level(org, level);
  check_plan(org, plan);
  return flux_from(org, plan, level + 1);
}

double steady_inflow(const ValidatedOrg& org, const FlexPlan& plan, int level) {
  return org.attrition(level) * org.headcount(level) * plan.share(level) +
         promotion_outflow(org, plan, level);
}

double steady_promotable(const ValidatedOrg& org, const FlexPlan& plan, int level) {
  check_level(org, level);
  check_plan(org, plan);
  const double mu = org.attrition(level);
  const double pool = org.headcount(level) * plan.share(level);
  const double survive = std::exp(-mu * org.eligibility_age(level));
  if (level == org.levels() - 1) return pool * survive;
  const double outflow = flux_from(org, plan, level + 1);
  return (mu * pool * survive - (1.0 - survive) * outflow) / mu;
}

double min_permanent_share(const ValidatedOrg& org, const FlexPlan& plan, int level) {
  check_level(org, level);
  check_plan(org, plan);
  if (level == org.levels() - 1) return 0.0;
  const double mu = org.attrition(level);
  const double survive = std::exp(-mu * org.eligibility_age(level));
  const double outflow = flux_from(org, plan, level + 1);
  return (1.0 - survive) * outflow / (mu * org.headcount(level) * survive);
}

std::vector<double> min_external_ratios(const ValidatedOrg& org) {
  const int L = org.levels();
  std::vector<double> alpha(static_cast<std::size_t>(L), 1.0);
  // Invert with a slightly larger margin so round-off cannot push a pool below
  // kMinPoolFraction * N.
  const double margin = 1.01 * kMinPoolFraction;
  double flux_above = 0.0;  // C_{j+1}
  for (int j = L - 1; j >= 1; --j) {
    const int below = j - 1;
    const double mu = org.attrition(below);
    const double n = org.headcount(below);
    const double survive = std::exp(-mu * org.eligibility_age(below));
    const double inflow = org.attrition(j) * org.headcount(j) + flux_above;
    double a = 1.0;
    if (survive < 1.0) {
      // A_{j-1} >= margin N_{j-1}  <=>  C_j <= mu N (survive - margin) / (1 - survive)
      const double cap = mu * n * (survive - margin) / (1.0 - survive);
      a = cap > 0.0 ? std::max(1.0, inflow / cap) : std::numeric_limits<double>::infinity();
    }
    alpha[static_cast<std::size_t>(j)] = a;
    flux_above = inflow / a;
  }
  return alpha;
}

double LevelSteadyState::density(double s) const {
  if (s < 0.0) return 0.0;
  const double excess = std::max(s - eligibility_age, 0.0);
  return inflow * std::exp(-attrition * s - tail_decay * excess);
}

double LevelSteadyState::mass_below(double s) const {
  if (s <= 0.0) return 0.0;
  const double first = std::min(s, eligibility_age);
  double mass = inflow * (1.0 - std::exp(-attrition * first)) / attrition;
  if (s > eligibility_age) {
    const double rate = attrition + tail_decay;
    mass += inflow * std::exp(-attrition * eligibility_age) *
            (1.0 - std::exp(-rate * (s - eligibility_age))) / rate;
  }
  return mass;
}

SteadyState stationary_state(const ValidatedOrg& org, const FlexPlan& plan) {
  check_plan(org, plan);
  const int L = org.levels();
  SteadyState out;
  out.levels.resize(static_cast<std::size_t>(L));
  for (int j = 0; j < L; ++j) {
    auto& lv = out.levels[static_cast<std::size_t>(j)];
    lv.attrition = org.attrition(j);
    lv.eligibility_age = org.eligibility_age(j);
    lv.pool_mass = org.headcount(j) * plan.share(j);
    const double outflow = flux_from(org, plan, j + 1);
    lv.inflow = lv.attrition * lv.pool_mass + outflow;
    lv.promotable = steady_promotable(org, plan, j);
    if (j < L - 1) {
      if (!(lv.promotable > 0.0)) throw IllPosedError(j, lv.promotable);
      lv.promotion_rate = outflow / lv.promotable;
      lv.tail_decay = lv.promotion_rate;
    }
  }
  return out;
}

std::vector<InitialConditionCheck> check_initial_condition(
    const ValidatedOrg& org, const FlexPlan& plan, std::span<const DensityFunction> initial,
    const InitialConditionOptions& options) {
  check_plan(org, plan);
  const int L = org.levels();
  if (static_cast<int>(initial.size()) != L) {
    throw Error(ErrorCode::InvalidPlan, "one initial density per level is required");
  }
  std::vector<InitialConditionCheck> out(static_cast<std::size_t>(L));
  for (int j = 0; j < L; ++j) {
    const auto& rho0 = initial[static_cast<std::size_t>(j)];
    const double mu = org.attrition(j);
    const double tau = org.eligibility_age(j);
    const double pool = org.headcount(j) * plan.share(j);
    const double tol = 1e-10 * std::max(pool, 1.0);

    const double support = options.support > 0.0 ? options.support : tau + 60.0 / mu;
    const double mass = quad::adaptive_simpson(rho0, 0.0, std::min(tau, support), tol) +
                        quad::adaptive_simpson(rho0, std::min(tau, support), support, tol);
    if (std::abs(mass - pool) > options.mass_tolerance * std::max(pool, 1.0)) {
      std::ostringstream os;
      os << "initial density of level " << j + 1 << " carries " << mass << " instead of " << pool;
      throw Error(ErrorCode::MassMismatch, os.str());
    }

    const double inflow = mu * pool + flux_from(org, plan, j + 1);
    auto& res = out[static_cast<std::size_t>(j)];
    res.worst_margin = std::numeric_limits<double>::infinity();
    const int n = std::max(options.time_points, 2);
    for (int k = 0; k < n; ++k) {
      const double t = tau * k / (n - 1);
      const double survivors = std::exp(-mu * t) * quad::adaptive_simpson(rho0, 0.0, tau - t, tol);
      const double newcomers = (1.0 - std::exp(-mu * t)) * inflow / mu;
      const double margin = pool - survivors - newcomers;
      if (margin < res.worst_margin) {
        res.worst_margin = margin;
        res.worst_time = t;
      }
    }
    res.holds = res.worst_margin > options.strictness * std::max(pool, 1.0);
  }
  return out;
}

}  // namespace orgdyn
