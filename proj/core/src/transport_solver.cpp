#include "orgdyn/transport_solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <type_traits>

namespace orgdyn {

// ---------------------------------------------------------------------------
// Grid

SeniorityGrid::SeniorityGrid(double ds, double dt, double s_max) : ds_(ds), dt_(dt), s_max_(s_max) {
  if (!(ds > 0.0) || !(dt > 0.0)) throw Error(ErrorCode::InvalidGrid, "ds and dt must be > 0");
  if (dt > ds * (1.0 + 1e-12)) {
    throw Error(ErrorCode::CflViolation,
                "dt = " + std::to_string(dt) + " exceeds ds = " + std::to_string(ds));
  }
  if (!(s_max >= ds)) throw Error(ErrorCode::InvalidGrid, "s_max must be at least one step");
  nodes_ = static_cast<int>(std::lround(s_max / ds));
}

int SeniorityGrid::nodes_up_to(double tau) const noexcept {
  const int n = static_cast<int>(std::floor(tau / ds_ + 1e-9));
  return std::clamp(n, 0, nodes_);
}

double SeniorityGrid::recommended_cap(const ValidatedOrg& org) {
  double tau = 0.0;
  double mu = org.attrition(0);
  for (int j = 0; j < org.levels(); ++j) {
    tau = std::max(tau, org.eligibility_age(j));
    mu = std::min(mu, org.attrition(j));
  }
  return tau + 40.0 / mu;
}

double LevelDensity::mass(const SeniorityGrid& grid) const {
  double sum = 0.0;
  for (double v : values) sum += v;
  return grid.ds() * sum;
}

// ---------------------------------------------------------------------------
// Policy closure

double max_rate_of(const PolicyRule& rule) {
  return std::visit([](const auto& r) { return r.max_rate; }, rule);
}

FlexPlan reference_plan(const PolicyRule& rule, const FlexPlan& plan) {
  FlexPlan out = plan;
  const double alpha = std::visit(
      [](const auto& r) {
        if constexpr (std::is_same_v<std::decay_t<decltype(r)>, ExternalFractionPolicy>) {
          return 1.0 + r.fraction;
        } else {
          return 1.0;
        }
      },
      rule);
  for (std::size_t j = 1; j < out.hiring_ratio.size(); ++j) out.hiring_ratio[j] = alpha;
  return out;
}

std::vector<double> PolicyState::balance_residual(const ValidatedOrg& org, const FlexPlan& plan) const {
  const int L = org.levels();
  std::vector<double> out(static_cast<std::size_t>(L));
  for (int j = 0; j < L; ++j) {
    const auto u = static_cast<std::size_t>(j);
    const double incoming = hiring[u] * org.headcount(j) + (j > 0 ? promotion[u - 1] * promotable[u - 1] : 0.0);
    const double outgoing = org.attrition(j) * org.headcount(j) * plan.share(j) + promotion[u] * promotable[u];
    out[u] = std::abs(incoming - outgoing);
  }
  return out;
}

double discrete_promotable(const ValidatedOrg& org, const FlexPlan& plan, const SeniorityGrid& grid,
                           const LevelDensity& density) {
  const int j = density.level;
  const int n = grid.nodes_up_to(org.eligibility_age(j));
  double below = 0.0;
  for (int i = 0; i < n; ++i) below += density.values[static_cast<std::size_t>(i)];
  return org.headcount(j) * plan.share(j) - grid.ds() * below;
}

namespace {

// Backward sweep shared by both policies; `fraction` = 0 gives max-internal.
PolicyState close_backward(const std::vector<LevelDensity>& densities, const ValidatedOrg& org,
                           const FlexPlan& plan, const SeniorityGrid& grid, double max_rate, double fraction) {
  const int L = org.levels();
  const auto n = static_cast<std::size_t>(L);
  PolicyState ps;
  ps.max_rate = max_rate;
  ps.promotion.assign(n, 0.0);
  ps.hiring.assign(n, 0.0);
  ps.shortfall.assign(n, 0.0);
  ps.promotable.assign(n, 0.0);
  ps.clipped.assign(n, false);
  ps.degenerate.assign(n, false);
  for (int j = 0; j < L; ++j) {
    ps.promotable[static_cast<std::size_t>(j)] = discrete_promotable(org, plan, grid, densities[static_cast<std::size_t>(j)]);
  }

  for (int j = L - 1; j >= 1; --j) {
    const auto u = static_cast<std::size_t>(j);
    const double demand = org.attrition(j) * org.headcount(j) * plan.share(j) + ps.promotion[u] * ps.promotable[u];
    const double pool = ps.promotable[u - 1];
    double rate = max_rate;
    if (pool > 0.0) {
      const double wanted = demand / ((1.0 + fraction) * pool);
      if (wanted < max_rate) {
        rate = wanted;
      } else {
        ps.clipped[u - 1] = true;
      }
    } else {
      ps.degenerate[u - 1] = true;
      ps.clipped[u - 1] = true;
    }
    ps.promotion[u - 1] = rate;
    const double internal = rate * std::max(pool, 0.0);
    const double matched = fraction * internal;
    const double topup = ps.clipped[u - 1] ? std::max(demand - internal - matched, 0.0) : 0.0;
    ps.shortfall[u] = topup / org.headcount(j);
    ps.hiring[u] = (matched + topup) / org.headcount(j);
  }
  ps.hiring[0] = (org.attrition(0) * org.headcount(0) * plan.share(0) + ps.promotion[0] * ps.promotable[0]) /
                 org.headcount(0);
  return ps;
}

}  // namespace

PolicyState close_policy_max_internal(const std::vector<LevelDensity>& densities, const ValidatedOrg& org,
                                      const FlexPlan& plan, const SeniorityGrid& grid, double max_rate) {
  return close_backward(densities, org, plan, grid, max_rate, 0.0);
}

PolicyState close_policy_external_fraction(const std::vector<LevelDensity>& densities,
                                           const ValidatedOrg& org, const FlexPlan& plan,
                                           const SeniorityGrid& grid, double max_rate, double fraction) {
  if (!(fraction >= 0.0)) throw Error(ErrorCode::InvalidPlan, "external fraction must be >= 0");
  return close_backward(densities, org, plan, grid, max_rate, fraction);
}

PolicyState close_policy(const std::vector<LevelDensity>& densities, const ValidatedOrg& org,
                         const FlexPlan& plan, const SeniorityGrid& grid, const PolicyRule& rule) {
  if (const auto* ext = std::get_if<ExternalFractionPolicy>(&rule)) {
    return close_policy_external_fraction(densities, org, plan, grid, ext->max_rate, ext->fraction);
  }
  return close_policy_max_internal(densities, org, plan, grid, std::get<MaxInternalPolicy>(rule).max_rate);
}

// ---------------------------------------------------------------------------
// Initial data

std::vector<LevelDensity> make_initial_density(const ValidatedOrg& org, const FlexPlan& plan,
                                               const SeniorityGrid& grid, InitialKind kind) {
  check_plan(org, plan);
  const int L = org.levels();
  const int M = grid.nodes();
  const double ds = grid.ds();
  std::vector<LevelDensity> out(static_cast<std::size_t>(L));

  std::optional<SteadyState> steady;
  if (kind == InitialKind::Stationary) steady = stationary_state(org, plan);

  for (int j = 0; j < L; ++j) {
    auto& d = out[static_cast<std::size_t>(j)];
    d.level = j;
    d.values.assign(static_cast<std::size_t>(M), 0.0);
    const double pool = org.headcount(j) * plan.share(j);
    switch (kind) {
      case InitialKind::Stationary: {
        const auto& lv = steady->levels[static_cast<std::size_t>(j)];
        double below = 0.0;
        for (int i = 1; i <= M; ++i) {
          const double upto = lv.mass_below(grid.seniority(i));
          d.values[static_cast<std::size_t>(i - 1)] = (upto - below) / ds;
          below = upto;
        }
        d.values.back() += (pool - below) / ds;
        break;
      }
      case InitialKind::Uniform: {
        const double tau = org.eligibility_age(j);
        const int n = tau > 0.0 ? std::max(grid.nodes_up_to(2.0 * tau), 1) : M;
        const double value = pool / (n * ds);
        std::fill_n(d.values.begin(), n, value);
        break;
      }
      case InitialKind::TruncatedExponential: {
        const double mu = org.attrition(j);
        double sum = 0.0;
        for (int i = 1; i <= M; ++i) {
          const double v = std::exp(-mu * grid.seniority(i));
          d.values[static_cast<std::size_t>(i - 1)] = v;
          sum += v;
        }
        const double scale = sum > 0.0 ? pool / (ds * sum) : 0.0;
        for (double& v : d.values) v *= scale;
        break;
      }
    }
  }

  for (int j = 0; j + 1 < L; ++j) {
    const double feeds = promotion_outflow(org, plan, j);
    if (feeds > 0.0 && !(discrete_promotable(org, plan, grid, out[static_cast<std::size_t>(j)]) > 0.0)) {
      throw Error(ErrorCode::InfeasibleInitialData,
                  "level " + std::to_string(j + 1) + " starts with no promotable employees");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Time stepping

std::vector<LevelDensity> advance_densities(const std::vector<LevelDensity>& densities,
                                            const std::vector<double>& promotion, const ValidatedOrg& org,
                                            const FlexPlan& plan, const SeniorityGrid& grid) {
  const double ds = grid.ds();
  const double dt = grid.dt();
  const int M = grid.nodes();
  std::vector<LevelDensity> next(densities.size());
  for (std::size_t u = 0; u < densities.size(); ++u) {
    const auto& cur = densities[u].values;
    const int j = densities[u].level;
    const double mu = org.attrition(j);
    const double rate = promotion[static_cast<std::size_t>(j)];
    const int eligible_from = grid.nodes_up_to(org.eligibility_age(j));  // nodes 1..n are not yet eligible

    // Ghost inflow mu N p + P A, which is (mu + P) N p - P ds sum_{s_i <= tau} rho.
    const double promotable = discrete_promotable(org, plan, grid, densities[u]);
    double upstream = mu * org.headcount(j) * plan.share(j) + rate * promotable;

    auto& out = next[u];
    out.level = j;
    out.values.resize(cur.size());
    const double denom = 1.0 / dt + mu + rate;
    for (int i = 1; i <= M; ++i) {
      const double here = cur[static_cast<std::size_t>(i - 1)];
      const double outgoing = i < M ? here : 0.0;  // last node is absorbing
      const double source = i <= eligible_from ? rate * here : 0.0;
      out.values[static_cast<std::size_t>(i - 1)] = (here / dt - (outgoing - upstream) / ds + source) / denom;
      upstream = here;
    }
  }
  return next;
}

SimulationState initial_state(const ValidatedOrg& org, const FlexPlan& plan, const SeniorityGrid& grid,
                              const PolicyRule& rule, InitialKind kind) {
  SimulationState s;
  s.time = 0.0;
  s.densities = make_initial_density(org, plan, grid, kind);
  s.policy = close_policy(s.densities, org, plan, grid, rule);
  return s;
}

SimulationState step(const SimulationState& state, const ValidatedOrg& org, const FlexPlan& plan,
                     const SeniorityGrid& grid, const PolicyRule& rule) {
  SimulationState next;
  next.time = state.time + grid.dt();
  next.densities = advance_densities(state.densities, state.policy.promotion, org, plan, grid);
  next.policy = close_policy(next.densities, org, plan, grid, rule);
  return next;
}

// ---------------------------------------------------------------------------
// Diagnostics

std::vector<LevelMetrics> metrics(const std::vector<LevelDensity>& densities, const PolicyState& policy,
                                  const ValidatedOrg& org, const FlexPlan& plan, const SeniorityGrid& grid,
                                  const SteadyState* steady) {
  const double ds = grid.ds();
  std::vector<LevelMetrics> out(densities.size());
  for (std::size_t u = 0; u < densities.size(); ++u) {
    const auto& d = densities[u];
    const int j = d.level;
    const double n = org.headcount(j);
    const double tau = org.eligibility_age(j);
    const int first_eligible = grid.nodes_up_to(tau) + 1;
    auto& m = out[u];
    m.ready_ratio = policy.promotable[static_cast<std::size_t>(j)] / n;
    double pool = 0.0;
    double weighted = 0.0;
    for (int i = first_eligible; i <= grid.nodes(); ++i) {
      const double v = d.values[static_cast<std::size_t>(i - 1)];
      pool += v;
      weighted += (grid.seniority(i) - tau) * v;
    }
    m.excess_seniority = pool > 0.0 ? weighted / pool : 0.0;
    m.mass_error = std::abs(d.mass(grid) - n * plan.share(j)) / n;
    if (steady != nullptr) {
      const auto& lv = steady->levels[static_cast<std::size_t>(j)];
      double l1 = 0.0;
      for (int i = 1; i <= grid.nodes(); ++i) {
        l1 += std::abs(d.values[static_cast<std::size_t>(i - 1)] - lv.density(grid.seniority(i)));
      }
      m.l1_to_steady = ds * l1 / n;
    }
  }
  return out;
}

Trajectory run(const ValidatedOrg& org, const FlexPlan& plan, const SeniorityGrid& grid, const PolicyRule& rule,
               double horizon, const RunOptions& options) {
  if (!(horizon >= 0.0)) throw Error(ErrorCode::InvalidGrid, "horizon must be >= 0");
  Trajectory traj;
  try {
    traj.reference = stationary_state(org, reference_plan(rule, plan));
  } catch (const IllPosedError&) {
    traj.reference.reset();
  }
  const SteadyState* ref = traj.reference ? &*traj.reference : nullptr;

  SimulationState state = initial_state(org, plan, grid, rule, options.initial);
  const int steps = static_cast<int>(std::lround(horizon / grid.dt()));
  const int every = std::max(options.record_every, 1);
  std::vector<bool> taken(options.snapshot_times.size(), false);

  auto observe = [&](const SimulationState& s, int k) {
    auto m = metrics(s.densities, s.policy, org, plan, grid, ref);
    for (const auto& lm : m) traj.max_mass_error = std::max(traj.max_mass_error, lm.mass_error);
    if (k % every == 0 || k == steps) traj.records.push_back({s.time, s.policy, std::move(m)});
    for (std::size_t q = 0; q < options.snapshot_times.size(); ++q) {
      if (!taken[q] && std::abs(s.time - options.snapshot_times[q]) <= 0.5 * grid.dt()) {
        traj.snapshots.push_back({s.time, s.densities});
        taken[q] = true;
      }
    }
  };

  observe(state, 0);
  for (int k = 1; k <= steps; ++k) {
    state = step(state, org, plan, grid, rule);
    observe(state, k);
  }
  traj.final_state = std::move(state);
  return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
  const auto precision = os.precision(10);
  os << "t,j,P_j,h_j,delta_j,A_j,RP_j,T_j,mass_error\n";
  for (const auto& rec : trajectory.records) {
    for (std::size_t u = 0; u < rec.metrics.size(); ++u) {
      os << rec.time << ',' << u + 1 << ',' << rec.policy.promotion[u] << ',' << rec.policy.hiring[u] << ','
         << rec.policy.shortfall[u] << ',' << rec.policy.promotable[u] << ',' << rec.metrics[u].ready_ratio << ','
         << rec.metrics[u].excess_seniority << ',' << rec.metrics[u].mass_error << '\n';
    }
  }
  os.precision(precision);
}

void write_density_csv(std::ostream& os, const SeniorityGrid& grid, const DensitySnapshot& snapshot) {
  const auto precision = os.precision(10);
  os << "s";
  for (std::size_t u = 0; u < snapshot.densities.size(); ++u) os << ",rho_" << u + 1;
  os << '\n';
  for (int i = 1; i <= grid.nodes(); ++i) {
    os << grid.seniority(i);
    for (const auto& d : snapshot.densities) os << ',' << d.values[static_cast<std::size_t>(i - 1)];
    os << '\n';
  }
  os.precision(precision);
}

}  // namespace orgdyn
