#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "orgdyn/optimizer.hpp"

using namespace orgdyn;

namespace {

Objective sphere(double centre) {
  return [centre](std::span<const double> x) {
    double sum = 0.0;
    for (double v : x) sum += (v - centre) * (v - centre);
    return Evaluation{sum, true};
  };
}

GeneBounds box(std::size_t n, double lo, double hi) {
  return {std::vector<double>(n, lo), std::vector<double>(n, hi)};
}

GaConfig small_config() {
  GaConfig c;
  c.population_size = 60;
  c.generations = 120;
  c.seed = 7;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  GaConfig c;
  CHECK_NOTHROW(c.check());
  c.population_size = 1;
  CHECK_THROWS_AS(c.check(), Error);
  c = GaConfig{};
  c.mutation_chance = 1.5;
  CHECK_THROWS_AS(c.check(), Error);
  c = GaConfig{};
  c.alpha_max = 0.5;
  CHECK_THROWS_AS(c.check(), Error);
}

TEST_CASE("ga finds the centre of a sphere") {
  const auto res = ga_minimize(sphere(0.3), box(4, -1.0, 1.0), small_config());
  for (double g : res.best.genes) CHECK(std::abs(g - 0.3) < 1e-2);
  CHECK(res.best.feasible);
  CHECK(res.history.size() == 121);
}

TEST_CASE("ga is deterministic and independent of the thread count") {
  auto c = small_config();
  const auto a = ga_minimize(sphere(-0.2), box(5, -1.0, 1.0), c);
  const auto b = ga_minimize(sphere(-0.2), box(5, -1.0, 1.0), c);
  c.threads = 4;
  const auto t = ga_minimize(sphere(-0.2), box(5, -1.0, 1.0), c);
  CHECK(a.best.genes == b.best.genes);
  CHECK(a.best.genes == t.best.genes);
  REQUIRE(a.history.size() == t.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].best == t.history[i].best);
    CHECK(a.history[i].mean == t.history[i].mean);
  }
  c.threads = 1;
  c.seed = 8;
  CHECK(ga_minimize(sphere(-0.2), box(5, -1.0, 1.0), c).best.genes != a.best.genes);
}

TEST_CASE("best-so-far never gets worse and genes stay in bounds") {
  const auto res = ga_minimize(sphere(2.0), box(3, -1.0, 1.0), small_config());
  for (std::size_t i = 1; i < res.history.size(); ++i) CHECK(res.history[i].best <= res.history[i - 1].best);
  for (double g : res.best.genes) CHECK(g == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("seeded individuals survive") {
  const std::vector<std::vector<double>> seed{{0.3, 0.3, 0.3}};
  auto c = small_config();
  c.generations = 3;
  const auto res = ga_minimize(sphere(0.3), box(3, -1.0, 1.0), c, seed);
  CHECK(res.best.fitness == 0.0);
}

TEST_CASE("ga throws when nothing is feasible") {
  Objective never = [](std::span<const double>) { return Evaluation{1.0, false}; };
  auto c = small_config();
  c.generations = 2;
  CHECK_THROWS_AS(ga_minimize(never, box(2, 0.0, 1.0), c), Error);
}

TEST_CASE("golden section") {
  auto quad = [](double x) { return Evaluation{(x - 0.7) * (x - 0.7), true}; };
  CHECK(golden_section(quad, 0.0, 2.0).x == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(golden_section(quad, 1.0, 2.0).x == 1.0);
  // Infeasible points never win over feasible ones.
  auto fenced = [](double x) { return x < 0.5 ? Evaluation{-1.0, false} : Evaluation{x, true}; };
  const auto m = golden_section(fenced, 0.0, 1.0);
  CHECK(m.value.feasible);
  CHECK(m.x == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("coordinate descent on a separable bowl") {
  Objective bowl = [](std::span<const double> x) {
    return Evaluation{(x[0] - 0.25) * (x[0] - 0.25) + 3 * (x[1] + 0.5) * (x[1] + 0.5), true};
  };
  const std::vector<int> order{1, 0};
  const auto c = coordinate_descent(bowl, box(2, -1.0, 1.0), {0.9, 0.9}, order, 2);
  CHECK(c.genes[0] == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(c.genes[1] == doctest::Approx(-0.5).epsilon(1e-6));
}

TEST_CASE("plan encoding") {
  const auto org = fixtures::cost_org(0.2);
  const PlanEncoding enc(org, 10.0);
  CHECK(enc.size() == 9);
  FlexPlan plan = FlexPlan::all_internal(5);
  plan.hiring_ratio = {1.0, 1.5, 2.0, 1.0, 3.0};
  plan.permanent_share = {0.6, 0.7, 0.8, 0.9, 1.0};
  const auto back = enc.decode(enc.encode(plan));
  CHECK(back.hiring_ratio == plan.hiring_ratio);
  CHECK(back.permanent_share == plan.permanent_share);
  const auto order = enc.descending_order();
  REQUIRE(order.size() == 9);
  CHECK(order[0] == 8);  // p_5
  CHECK(order[1] == 3);  // alpha_5

  const PlanEncoding none(with_uniform_premium(org, std::nullopt), 10.0);
  CHECK(none.size() == 4);
  for (double p : none.decode(std::vector<double>(4, 1.0)).permanent_share) CHECK(p == 1.0);
}

TEST_CASE("penalty") {
  const auto org = fixtures::cost_org(0.2);
  const double bound = cost_upper_bound(org);
  FlexPlan plan = FlexPlan::all_internal(5);
  const auto feasible = penalize(org, plan);
  CHECK(feasible.feasible);
  CHECK(feasible.value == org_cost(org, plan).total);
  CHECK(feasible.value < bound);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> a(1.0, 10.0), p(0.0, 1.0);
  double previous = 0.0;
  for (double share = 0.5; share >= 0.0; share -= 0.05) {
    plan = FlexPlan::all_internal(5);
    plan.permanent_share[0] = share;
    const auto e = penalize(org, plan);
    REQUIRE_FALSE(e.feasible);
    CHECK(e.value > bound);
    CHECK(e.value > previous);  // deeper violation, larger penalty
    previous = e.value;
  }
  for (int trial = 0; trial < 500; ++trial) {
    for (int j = 0; j < 5; ++j) {
      if (j > 0) plan.hiring_ratio[static_cast<std::size_t>(j)] = a(rng);
      plan.permanent_share[static_cast<std::size_t>(j)] = p(rng);
    }
    const auto e = penalize(org, plan);
    CHECK((e.feasible ? e.value < bound : e.value > bound));
  }
}

TEST_CASE("coordinate descent lands on the entry-level optimum") {
  OrgSpec spec = fixtures::cost_org(std::nullopt).spec();
  spec.levels[0].temp_wage = 41.0;
  const auto org = validate(spec);
  const auto found = descend_plan(org, 10.0, 30);
  const auto d = case1_diagnostics(org, found.plan);
  CHECK(d.regime == Case1Regime::Interior);
  CHECK(found.plan.permanent_share[0] == doctest::Approx(d.optimal_share).epsilon(1e-3));
}

TEST_CASE("coordinate descent result is a fixed point") {
  const auto org = fixtures::cost_org(0.2);
  const auto first = descend_plan(org, 10.0, 30);
  const auto again = descend_plan(org, 10.0, 5, first.plan);
  CHECK(again.cost.total <= first.cost.total);
  CHECK(fixtures::rel(again.cost.total, first.cost.total) <= 1e-8);
}

TEST_CASE("cheap temporaries push every share towards zero") {
  // At a 10% premium the infimum is the all-temporary organisation, which is
  // never attained: each pool needs some permanent staff while promotions flow.
  const auto org = fixtures::cost_org(0.1);
  double all_temp = 0.0;
  for (int j = 0; j < 5; ++j) all_temp += org.headcount(j) * *org.level(j).temp_wage;
  const auto cd = descend_plan(org, 10.0, 80);
  CHECK(cd.cost.total > all_temp);
  CHECK(cd.cost.total < all_temp * (1.0 + 1e-4));
  for (double p : cd.plan.permanent_share) CHECK(p < 0.01);
}

TEST_CASE("ga and coordinate descent agree on the five-level organisation") {
  const auto org = fixtures::cost_org(0.1);
  GaConfig c;
  c.seed = 11;
  const auto ga = optimize_plan(org, c);
  const auto cd = descend_plan(org, c.alpha_max, 30);
  CHECK(ga.cost.total <= 1.03 * cd.cost.total);
  CHECK(cd.cost.total <= 1.03 * ga.cost.total);
  CHECK(ga.cost.total <= org_cost(org, baseline_plan(org)).total);
  CHECK(ga.history.size() == static_cast<std::size_t>(c.generations) + 1);

  std::ostringstream os;
  write_history_csv(os, ga.history);
  CHECK(os.str().rfind("generation,best_cost,mean_cost\n0,", 0) == 0);
}

TEST_CASE("baseline plan uses minimal ratios without temporaries") {
  const auto org = fixtures::high_turnover();
  const auto plan = baseline_plan(org);
  const auto ratios = min_external_ratios(org);
  CHECK(plan.hiring_ratio == ratios);
  for (double p : plan.permanent_share) CHECK(p == 1.0);
}

TEST_CASE("optimize_plan reports infeasibility") {
  // A bottom pool that no hiring ratio can rescue: tau so long that the head
  // alone exceeds the headcount.
  const auto org = fixtures::make_org({100, 100}, {0.3, 0.3}, {40, 1}, 0.0, {10, 20});
  GaConfig c = small_config();
  c.generations = 2;
  CHECK_THROWS_AS(optimize_plan(org, c), Error);
}
