#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "orgdyn/cost_model.hpp"

using namespace orgdyn;
using fixtures::make_org;

namespace {

FlexPlan random_plan(std::mt19937_64& rng, int levels) {
  FlexPlan plan = FlexPlan::all_internal(levels);
  std::uniform_real_distribution<double> a(1.0, 3.0), p(0.4, 1.0);
  for (int j = 1; j < levels; ++j) plan.hiring_ratio[static_cast<std::size_t>(j)] = a(rng);
  for (int j = 0; j < levels; ++j) plan.permanent_share[static_cast<std::size_t>(j)] = p(rng);
  return plan;
}

// Three levels with floater curves on the lower two, split into two units.
ValidatedOrg floater_org() {
  OrgSpec spec;
  spec.wage_growth = 0.04;
  spec.levels.push_back({3000, 0.1, 3, 35.0, 42.0, FloaterWageCurve::constant(3.9)});
  spec.levels.push_back({1200, 0.1, 3, 49.0, 55.0, FloaterWageCurve::exponential(4.0, 0.04)});
  spec.levels.push_back({300, 0.2, 3, 69.0, 80.0, std::nullopt});
  spec.business_units.push_back({"east", {1800, 700, 180}, {}});
  spec.business_units.push_back({"west", {1200, 500, 120}, {38, 60, 85}});
  return validate(spec);
}

BusinessUnitPlan unit_plan(const ValidatedOrg& org, std::vector<double> p) {
  BusinessUnitPlan plan;
  for (std::size_t k = 0; k < org.spec().business_units.size(); ++k) {
    FlexPlan u = FlexPlan::all_internal(org.levels());
    u.permanent_share = p;
    plan.units.push_back(u);
    plan.floater_share.emplace_back(p.size(), 0.0);
  }
  return plan;
}

}  // namespace

TEST_CASE("closed-form payroll matches an independent quadrature") {
  std::mt19937_64 rng(2024);
  int checked = 0;
  while (checked < 300) {
    const auto org = fixtures::random_org(rng, 1 + checked % 5);
    const auto plan = random_plan(rng, org.levels());
    for (int j = 0; j < org.levels(); ++j) {
      double closed = 0.0;
      try {
        closed = permanent_cost(org, plan, j);
      } catch (const IllPosedError&) {
        continue;
      }
      CHECK(fixtures::rel(closed, fixtures::payroll_from_balance(org, plan, j)) <= 1e-6);
      ++checked;
    }
  }
}

TEST_CASE("library quadrature oracle agrees with the closed form") {
  std::mt19937_64 rng(99);
  int checked = 0;
  while (checked < 200) {
    const auto org = fixtures::random_org(rng, 3);
    const auto plan = random_plan(rng, 3);
    for (int j = 0; j < 3; ++j) {
      double closed = 0.0;
      double oracle = 0.0;
      try {
        closed = level_cost(org, plan, j);
        oracle = cost_quadrature_oracle(org, plan, j);
      } catch (const IllPosedError&) {
        continue;  // the oracle needs every pool of the plan to be positive
      }
      CHECK(fixtures::rel(closed, oracle) <= 1e-6);
      ++checked;
    }
  }
}

TEST_CASE("anchors") {
  // r = 0, p = 1, alpha = 1: the top level pays exactly w0 N.
  const auto flat = make_org({500, 200}, {0.1, 0.3}, {2, 2}, 0.0, {30, 60});
  CHECK(permanent_cost(flat, FlexPlan::all_internal(2), 1) == doctest::Approx(60.0 * 200));
  // Without promotions out of the level the bracket is 1: w0 mu N / (mu - r).
  const auto grow = make_org({500, 200}, {0.1, 0.3}, {2, 2}, 0.05, {30, 60});
  CHECK(permanent_cost(grow, FlexPlan::all_internal(2), 1) == doctest::Approx(60.0 * 0.3 * 200 / 0.25));
  // With r = 0 every level pays w0 N whatever the promotion flow.
  const auto org = make_org({800, 400, 100}, {0.1, 0.15, 0.3}, {3, 3, 3}, 0.0, {20, 30, 40});
  for (int j = 0; j < 3; ++j) {
    CHECK(permanent_cost(org, FlexPlan::all_internal(3), j) == doctest::Approx(org.headcount(j) * (20.0 + 10 * j)));
  }
}

TEST_CASE("temporary cost") {
  const auto org = fixtures::cost_org(0.2);
  auto plan = FlexPlan::all_internal(5);
  const auto base = org_cost(org, plan);
  for (double t : base.temporary) CHECK(t == 0.0);
  plan.permanent_share[4] = 0.5;
  const auto half = org_cost(org, plan);
  CHECK(half.temporary[4] == doctest::Approx(0.5 * 500 * 1.2 * 134));
  CHECK(half.total == doctest::Approx(half.level_total(0) + half.level_total(1) + half.level_total(2) +
                                      half.level_total(3) + half.level_total(4)));

  const auto none = with_uniform_premium(org, std::nullopt);
  CHECK_THROWS_AS(level_cost(none, plan, 4), Error);
  CHECK(org_cost(none, FlexPlan::all_internal(5)).total == doctest::Approx(base.total));
}

TEST_CASE("premium rewrites every temporary wage") {
  const auto org = with_uniform_premium(fixtures::cost_org(std::nullopt), 0.1);
  for (int j = 0; j < 5; ++j) CHECK(*org.level(j).temp_wage == doctest::Approx(1.1 * fixtures::kWages[j]));
}

TEST_CASE("cost rejects ill-posed plans and excessive growth") {
  const auto org = make_org({8000, 4000}, {0.16, 0.5}, {8, 4}, 0.0, {30, 60});
  CHECK_THROWS_AS(permanent_cost(org, FlexPlan::all_internal(2), 0), IllPosedError);
  CHECK_NOTHROW(permanent_cost(org, FlexPlan::all_internal(2), 1));
  const auto no_wage = make_org({10, 5}, {0.1, 0.2}, {1, 1});
  CHECK_THROWS_AS(permanent_cost(no_wage, FlexPlan::all_internal(2), 0), Error);
}

TEST_CASE("floater average cost") {
  const auto org = floater_org();
  CHECK(floater_average_cost(org, 0) == doctest::Approx(3.9 / 0.1));
  CHECK(floater_average_cost(org, 1) == doctest::Approx(4.0 / (0.1 - 0.04)));
  CHECK_THROWS_AS(floater_average_cost(org, 2), Error);

  OrgSpec spec = org.spec();
  spec.business_units.clear();
  const std::vector<std::pair<double, double>> knots{{0.0, 3.0}, {2.0, 5.0}, {7.0, 5.5}};
  spec.levels[0].floater_wage = FloaterWageCurve::piecewise_linear(knots);
  const auto pw = validate(spec);
  auto f = [&](double s) { return (*spec.levels[0].floater_wage)(s) * std::exp(-0.1 * s); };
  const double oracle = fixtures::trapezoid(f, 0.0, 2.0, 40000) + fixtures::trapezoid(f, 2.0, 7.0, 40000) +
                        5.5 * std::exp(-0.7) / 0.1;
  CHECK(floater_average_cost(pw, 0) == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("business units: a single unit equal to the organisation") {
  OrgSpec spec = fixtures::cost_org(0.2).spec();
  spec.business_units.push_back({"all", {5500, 5200, 3800, 1800, 500}, {}});
  const auto org = validate(spec);
  BusinessUnitPlan plan{{FlexPlan::all_internal(5)}, {std::vector<double>(5, 0.0)}};
  plan.units[0].permanent_share = {0.8, 0.9, 0.9, 0.95, 1.0};
  CHECK(business_unit_cost(org, plan).total == doctest::Approx(org_cost(org, plan.units[0]).total));
}

TEST_CASE("business units: shape and share checks") {
  const auto org = floater_org();
  auto plan = unit_plan(org, {0.8, 0.9, 1.0});
  CHECK_NOTHROW(business_unit_cost(org, plan));
  plan.floater_share[0][0] = 0.3;
  CHECK_THROWS_AS(business_unit_cost(org, plan), Error);  // 0.8 + 0.3 > 1
  plan.floater_share[0][0] = 0.0;
  plan.units[0].permanent_share[2] = 0.9;
  plan.floater_share[0][2] = 0.1;
  CHECK_THROWS_AS(business_unit_cost(org, plan), Error);  // no floater curve at level 3
  plan.units.pop_back();
  CHECK_THROWS_AS(business_unit_cost(org, plan), Error);
}

TEST_CASE("floater reduction picks the cheaper flexible option") {
  const auto org = floater_org();
  const auto plan = unit_plan(org, {0.8, 0.9, 1.0});
  const auto red = reduce_floaters(org, plan);
  REQUIRE(red.units.size() == 2);
  // Level 1: floaters cost 39, east temps 42, west temps 38.
  CHECK(red.units[0].floaters[0]);
  CHECK_FALSE(red.units[1].floaters[0]);
  CHECK(red.units[0].flexible_wage[0] == doctest::Approx(39.0));
  CHECK(red.units[1].flexible_wage[0] == doctest::Approx(38.0));
  // Level 2: floaters cost 66.7, temps are cheaper in both units. Level 3 has no floaters.
  CHECK_FALSE(red.units[0].floaters[1]);
  CHECK_FALSE(red.units[0].floaters[2]);
  CHECK(red.plan.floater_share[0][0] == doctest::Approx(0.2));
  CHECK(red.plan.floater_share[1][0] == 0.0);

  const double reduced = reduced_cost(red.units[0], plan.units[0]) + reduced_cost(red.units[1], plan.units[1]);
  CHECK(reduced == doctest::Approx(business_unit_cost(org, red.plan).total).epsilon(1e-12));

  // No other split of the flexible share does better.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    auto other = plan;
    for (std::size_t k = 0; k < 2; ++k) {
      for (std::size_t j = 0; j < 2; ++j) other.floater_share[k][j] = u(rng) * (1.0 - plan.units[k].permanent_share[j]);
    }
    CHECK(business_unit_cost(org, other).total >= reduced - 1e-9 * reduced);
  }
}

TEST_CASE("doubling every unit doubles the reduced cost") {
  const auto org = floater_org();
  OrgSpec spec = org.spec();
  for (auto& lv : spec.levels) lv.headcount *= 2.0;
  for (auto& bu : spec.business_units) {
    for (double& n : bu.headcounts) n *= 2.0;
  }
  const auto twice = validate(spec);
  const auto plan = unit_plan(org, {0.85, 0.9, 0.95});
  CHECK(business_unit_cost(twice, reduce_floaters(twice, plan).plan).total ==
        doctest::Approx(2.0 * business_unit_cost(org, reduce_floaters(org, plan).plan).total));
}

TEST_CASE("entry-level temporaries: derivatives") {
  const auto org = fixtures::cost_org(0.2);
  const double pmin = min_permanent_share(org, FlexPlan::all_internal(5), 0);
  for (double p = std::max(pmin, 0.0) + 0.01; p <= 1.0; p += 0.02) {
    FlexPlan plan = FlexPlan::all_internal(5);
    plan.permanent_share[0] = p;
    const auto d = case1_diagnostics(org, plan);
    const double h = 1e-4;
    auto cost_at = [&](double q) {
      FlexPlan x = plan;
      x.permanent_share[0] = q;
      return level_cost(org, x, 0);
    };
    const double fd = (cost_at(p + h) - cost_at(p - h)) / (2 * h);
    CHECK(fixtures::rel(d.first_derivative, fd) <= 1e-5);
    const double fd2 = (cost_at(p + h) - 2 * cost_at(p) + cost_at(p - h)) / (h * h);
    CHECK(fixtures::rel(d.second_derivative, fd2) <= 1e-3);
    CHECK(d.second_derivative > 0.0);
    CHECK(d.second_derivative_unscaled > 0.0);
    CHECK(d.second_derivative_unscaled * org.attrition(0) * org.headcount(0) ==
          doctest::Approx(d.second_derivative));
  }
}

TEST_CASE("entry-level temporaries: three regimes") {
  auto with_wt = [](double wt) {
    OrgSpec spec = fixtures::cost_org(std::nullopt).spec();
    spec.levels[0].temp_wage = wt;
    return validate(spec);
  };
  const auto plan = FlexPlan::all_internal(5);
  const auto cheap = case1_diagnostics(with_wt(36.75), plan);
  CHECK(cheap.regime == Case1Regime::AtMinimum);
  CHECK(cheap.optimal_share == doctest::Approx(cheap.min_share));
  CHECK(cheap.min_share == doctest::Approx(0.826).epsilon(0.01));

  const auto mid = case1_diagnostics(with_wt(41.0), plan);
  CHECK(mid.regime == Case1Regime::Interior);
  CHECK(mid.optimal_share > mid.min_share);
  CHECK(mid.optimal_share < 1.0);
  FlexPlan at = plan;
  at.permanent_share[0] = mid.optimal_share;
  CHECK(std::abs(case1_diagnostics(with_wt(41.0), at).first_derivative) <= 1e-8 * 5500 * 41.0);

  const auto dear = case1_diagnostics(with_wt(42.0), plan);
  CHECK(dear.regime == Case1Regime::NoTemporaries);
  CHECK(dear.optimal_share == 1.0);

  FlexPlan upper = plan;
  upper.permanent_share[2] = 0.9;
  CHECK_THROWS_AS(case1_diagnostics(with_wt(41.0), upper), Error);
  CHECK_THROWS_AS(case1_diagnostics(fixtures::cost_org(std::nullopt), plan), Error);
}

TEST_CASE("two-level residual r1 is the scaled entry-level slope") {
  const auto org = make_org({4750, 190}, {0.30, 0.18}, {5.3, 5.3}, 0.016, {35, 77}, {37, 81});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> p1(0.6, 0.95), p2(0.2, 0.9);
  for (int trial = 0; trial < 50; ++trial) {
    FlexPlan plan = FlexPlan::all_internal(2);
    plan.permanent_share = {p1(rng), p2(rng)};
    auto cost_at = [&](double q) {
      FlexPlan x = plan;
      x.permanent_share[0] = q;
      return org_cost(org, x).total;
    };
    const double h = 1e-5;
    const double slope = (cost_at(plan.permanent_share[0] + h) - cost_at(plan.permanent_share[0] - h)) / (2 * h);
    const auto res = case2_residuals(org, plan);
    CHECK(res.r1 == doctest::Approx(-slope / (4750 * 37.0)).epsilon(1e-6).scale(1.0));
  }
  FlexPlan bad = FlexPlan::all_internal(2);
  CHECK_NOTHROW(case2_residuals(org, bad));
  CHECK_THROWS_AS(case2_residuals(make_org({10}, {0.1}, {1}, 0.0, {1}, {2}), FlexPlan::all_internal(1)), Error);
}

TEST_CASE("cost csv") {
  const auto cost = org_cost(fixtures::cost_org(0.2), FlexPlan::all_internal(5));
  std::ostringstream os;
  write_cost_csv(os, cost);
  const std::string text = os.str();
  CHECK(text.rfind("level,permanent,temporary,floater,total\n1,", 0) == 0);
  CHECK(text.find("\nall,") != std::string::npos);
}
