#include <benchmark/benchmark.h>

#include "orgdyn/cost_model.hpp"
#include "orgdyn/optimizer.hpp"
#include "orgdyn/transport_solver.hpp"

namespace {

orgdyn::ValidatedOrg five_levels(double top_attrition) {
  const double n[] = {5500, 5200, 3800, 1800, 500};
  const double w[] = {35, 49, 69, 96, 134};
  orgdyn::OrgSpec spec;
  spec.wage_growth = 0.04;
  for (int j = 0; j < 5; ++j) {
    spec.levels.push_back({n[j], j == 4 ? top_attrition : 0.08, 4.0, w[j], 1.1 * w[j], std::nullopt});
  }
  return orgdyn::validate(spec);
}

void BM_TransportStep(benchmark::State& state) {
  const auto org = five_levels(0.5);
  const auto plan = orgdyn::FlexPlan::all_internal(5);
  const orgdyn::SeniorityGrid grid(0.05, 0.05, 50.0);
  const orgdyn::PolicyRule rule = orgdyn::MaxInternalPolicy{10.0};
  auto s = orgdyn::initial_state(org, plan, grid, rule, orgdyn::InitialKind::Uniform);
  for (auto _ : state) {
    s = orgdyn::step(s, org, plan, grid, rule);
    benchmark::DoNotOptimize(s.policy.promotion.data());
  }
}
BENCHMARK(BM_TransportStep);

void BM_OrgCost(benchmark::State& state) {
  const auto org = five_levels(0.2);
  const auto plan = orgdyn::FlexPlan::all_internal(5);
  for (auto _ : state) benchmark::DoNotOptimize(orgdyn::org_cost(org, plan).total);
}
BENCHMARK(BM_OrgCost);

void BM_CostOracle(benchmark::State& state) {
  const auto org = five_levels(0.2);
  const auto plan = orgdyn::FlexPlan::all_internal(5);
  for (auto _ : state) benchmark::DoNotOptimize(orgdyn::cost_quadrature_oracle(org, plan, 2));
}
BENCHMARK(BM_CostOracle);

void BM_GaGenerations(benchmark::State& state) {
  const auto org = five_levels(0.2);
  orgdyn::GaConfig cfg;
  cfg.generations = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(orgdyn::optimize_plan(org, cfg).cost.total);
}
BENCHMARK(BM_GaGenerations)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
