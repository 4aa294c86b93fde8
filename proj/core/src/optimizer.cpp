#include "orgdyn/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

namespace orgdyn {

void GaConfig::check() const {
  if (population_size < 2) throw Error(ErrorCode::InvalidConfig, "population_size must be >= 2");
  if (generations < 0) throw Error(ErrorCode::InvalidConfig, "generations must be >= 0");
  if (!(mutation_chance >= 0.0 && mutation_chance <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "mutation_chance must lie in [0, 1]");
  }
  if (!(elitism >= 0.0 && elitism < 1.0)) throw Error(ErrorCode::InvalidConfig, "elitism must lie in [0, 1)");
  if (tournament_size < 1) throw Error(ErrorCode::InvalidConfig, "tournament_size must be >= 1");
  if (!(alpha_max >= 1.0) || !std::isfinite(alpha_max)) {
    throw Error(ErrorCode::InvalidConfig, "alpha_max must be finite and >= 1");
  }
  if (threads < 0) throw Error(ErrorCode::InvalidConfig, "threads must be >= 0");
}

namespace {

void check_bounds(const GeneBounds& b) {
  if (b.lower.size() != b.upper.size()) throw Error(ErrorCode::InvalidConfig, "bounds size mismatch");
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!std::isfinite(b.lower[i]) || !std::isfinite(b.upper[i]) || b.lower[i] > b.upper[i]) {
      throw Error(ErrorCode::InvalidConfig, "gene bounds must be finite with lower <= upper");
    }
  }
}

// Feasible beats infeasible, then lower fitness wins.
bool better(const Candidate& a, const Candidate& b) {
  if (a.feasible != b.feasible) return a.feasible;
  return a.fitness < b.fitness;
}

void evaluate_all(const Objective& objective, std::vector<Candidate>& pop, std::size_t from, int threads) {
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Evaluation e = objective(pop[i].genes);
      pop[i].fitness = std::isnan(e.value) ? std::numeric_limits<double>::infinity() : e.value;
      pop[i].feasible = e.feasible;
    }
  };
  const std::size_t n = pop.size() - from;
  const auto t = static_cast<std::size_t>(threads);
  if (t <= 1 || n < 2 * t) {
    work(from, pop.size());
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (n + t - 1) / t;
  for (std::size_t begin = from; begin < pop.size(); begin += chunk) {
    pool.emplace_back(work, begin, std::min(begin + chunk, pop.size()));
  }
}

double mean_fitness(const std::vector<Candidate>& pop) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& c : pop) {
    if (std::isfinite(c.fitness)) {
      sum += c.fitness;
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::infinity();
}

// The GA proper; never throws on infeasibility so callers can report the best
// infeasible candidate.
GaResult evolve(const Objective& objective, const GeneBounds& bounds, const GaConfig& config,
                std::span<const std::vector<double>> initial) {
  config.check();
  check_bounds(bounds);
  const std::size_t dim = bounds.size();
  const auto pop_size = static_cast<std::size_t>(config.population_size);
  const int threads = config.threads == 0 ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))
                                          : config.threads;

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, pop_size - 1);

  auto clamp_genes = [&](std::vector<double>& g) {
    for (std::size_t i = 0; i < dim; ++i) g[i] = std::clamp(g[i], bounds.lower[i], bounds.upper[i]);
  };

  std::vector<Candidate> pop(pop_size);
  for (std::size_t i = 0; i < pop_size; ++i) {
    auto& g = pop[i].genes;
    if (i < initial.size()) {
      g = initial[i];
      if (g.size() != dim) throw Error(ErrorCode::InvalidConfig, "initial individual has the wrong length");
      clamp_genes(g);
      continue;
    }
    g.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) g[k] = bounds.lower[k] + unit(rng) * (bounds.upper[k] - bounds.lower[k]);
  }
  evaluate_all(objective, pop, 0, threads);

  GaResult result;
  result.best = *std::min_element(pop.begin(), pop.end(), better);
  result.history.push_back({0, result.best.fitness, mean_fitness(pop)});

  const auto elite = std::min(pop_size - 1, static_cast<std::size_t>(std::lround(config.elitism * pop_size)));
  auto tournament = [&]() -> const Candidate& {
    const Candidate* winner = &pop[pick(rng)];
    for (int t = 1; t < config.tournament_size; ++t) {
      const Candidate& other = pop[pick(rng)];
      if (better(other, *winner)) winner = &other;
    }
    return *winner;
  };

  for (int gen = 1; gen <= config.generations; ++gen) {
    std::sort(pop.begin(), pop.end(), better);
    // Mutation width shrinks linearly from 10% to 0.5% of each gene's range.
    const double progress = static_cast<double>(gen - 1) / std::max(config.generations - 1, 1);
    const double sigma = 0.1 * (1.0 - progress) + 0.005 * progress;

    std::vector<Candidate> next(pop.begin(), pop.begin() + static_cast<std::ptrdiff_t>(elite));
    next.reserve(pop_size);
    while (next.size() < pop_size) {
      const Candidate& a = tournament();
      const Candidate& b = tournament();
      Candidate child;
      child.genes.resize(dim);
      for (std::size_t k = 0; k < dim; ++k) {
        child.genes[k] = unit(rng) < 0.5 ? a.genes[k] : b.genes[k];
        if (unit(rng) < config.mutation_chance) {
          child.genes[k] += sigma * (bounds.upper[k] - bounds.lower[k]) * gauss(rng);
        }
      }
      clamp_genes(child.genes);
      next.push_back(std::move(child));
    }
    pop = std::move(next);
    evaluate_all(objective, pop, elite, threads);

    const auto& gen_best = *std::min_element(pop.begin(), pop.end(), better);
    if (better(gen_best, result.best)) result.best = gen_best;
    result.history.push_back({gen, result.best.fitness, mean_fitness(pop)});
  }
  return result;
}

}  // namespace

GaResult ga_minimize(const Objective& objective, const GeneBounds& bounds, const GaConfig& config,
                     std::span<const std::vector<double>> initial) {
  GaResult result = evolve(objective, bounds, config, initial);
  if (!result.best.feasible) {
    throw Error(ErrorCode::NoFeasibleCandidate, "no feasible candidate after " +
                                                    std::to_string(config.generations) + " generations");
  }
  return result;
}

LineMinimum golden_section(const std::function<Evaluation(double)>& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  LineMinimum best{lo, f(lo)};
  auto consider = [&](double x, const Evaluation& e) {
    const bool wins = e.feasible != best.value.feasible ? e.feasible : e.value < best.value.value;
    if (wins) best = {x, e};
  };
  consider(hi, f(hi));
  if (hi <= lo) return best;

  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  Evaluation fc = f(c);
  Evaluation fd = f(d);
  consider(c, fc);
  consider(d, fd);
  const double width = tol * std::max(1.0, hi - lo);
  while (b - a > width) {
    if (fc.value < fd.value) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
      consider(d, fd);
    }
  }
  return best;
}

Candidate coordinate_descent(const Objective& objective, const GeneBounds& bounds, std::vector<double> start,
                             std::span<const int> order, int sweeps) {
  check_bounds(bounds);
  if (sweeps < 1) throw Error(ErrorCode::InvalidConfig, "sweeps must be >= 1");
  if (start.size() != bounds.size()) throw Error(ErrorCode::InvalidConfig, "start point has the wrong length");
  for (std::size_t i = 0; i < start.size(); ++i) start[i] = std::clamp(start[i], bounds.lower[i], bounds.upper[i]);

  Candidate cur{start, 0.0, false};
  Evaluation e = objective(cur.genes);
  cur.fitness = e.value;
  cur.feasible = e.feasible;

  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int idx : order) {
      const auto k = static_cast<std::size_t>(idx);
      std::vector<double> trial = cur.genes;
      const LineMinimum m = golden_section(
          [&](double x) {
            trial[k] = x;
            return objective(trial);
          },
          bounds.lower[k], bounds.upper[k]);
      const bool improves = m.value.feasible != cur.feasible ? m.value.feasible : m.value.value <= cur.fitness;
      if (improves) {
        cur.genes[k] = m.x;
        cur.fitness = m.value.value;
        cur.feasible = m.value.feasible;
      }
    }
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Plan genes

PlanEncoding::PlanEncoding(const ValidatedOrg& org, double alpha_max) : levels_(org.levels()) {
  if (!(alpha_max >= 1.0) || !std::isfinite(alpha_max)) {
    throw Error(ErrorCode::InvalidConfig, "alpha_max must be finite and >= 1");
  }
  for (int j = 1; j < levels_; ++j) {
    bounds_.lower.push_back(1.0);
    bounds_.upper.push_back(alpha_max);
  }
  for (int j = 0; j < levels_; ++j) {
    if (!org.level(j).temp_wage) continue;
    share_level_.push_back(j);
    bounds_.lower.push_back(0.0);
    bounds_.upper.push_back(1.0);
  }
}

FlexPlan PlanEncoding::decode(std::span<const double> genes) const {
  if (genes.size() != size()) throw Error(ErrorCode::InvalidPlan, "gene vector has the wrong length");
  FlexPlan plan = FlexPlan::all_internal(levels_);
  for (int j = 1; j < levels_; ++j) plan.hiring_ratio[static_cast<std::size_t>(j)] = genes[static_cast<std::size_t>(j - 1)];
  const auto offset = static_cast<std::size_t>(levels_ - 1);
  for (std::size_t i = 0; i < share_level_.size(); ++i) {
    plan.permanent_share[static_cast<std::size_t>(share_level_[i])] = genes[offset + i];
  }
  return plan;
}

std::vector<double> PlanEncoding::encode(const FlexPlan& plan) const {
  std::vector<double> genes;
  genes.reserve(size());
  for (int j = 1; j < levels_; ++j) genes.push_back(plan.alpha(j));
  for (int j : share_level_) genes.push_back(plan.share(j));
  for (std::size_t i = 0; i < genes.size(); ++i) genes[i] = std::clamp(genes[i], bounds_.lower[i], bounds_.upper[i]);
  return genes;
}

std::vector<int> PlanEncoding::descending_order() const {
  std::vector<int> order;
  const int offset = levels_ - 1;
  for (int j = levels_ - 1; j >= 0; --j) {
    const auto it = std::find(share_level_.begin(), share_level_.end(), j);
    if (it != share_level_.end()) order.push_back(offset + static_cast<int>(it - share_level_.begin()));
    if (j >= 1) order.push_back(j - 1);
  }
  return order;
}

double cost_upper_bound(const ValidatedOrg& org) {
  double bound = 0.0;
  const double r = org.wage_growth();
  for (int j = 0; j < org.levels(); ++j) {
    const auto& lv = org.level(j);
    if (!lv.base_wage) throw Error(ErrorCode::MissingWage, "level " + std::to_string(j + 1) + " has no base wage");
    const double above = j + 1 < org.levels() ? cumulative_flux_no_hiring(org, j + 1) : 0.0;
    bound += lv.headcount * lv.temp_wage.value_or(0.0) +
             *lv.base_wage * (lv.attrition * lv.headcount + above) / (lv.attrition - r);
  }
  return bound;
}

Evaluation penalize(const ValidatedOrg& org, const FlexPlan& plan) {
  double violation = 0.0;
  bool feasible = true;
  for (int j = 0; j + 1 < org.levels(); ++j) {
    const double a = steady_promotable(org, plan, j);
    if (a > 0.0) continue;
    feasible = false;
    violation -= a / org.headcount(j);
  }
  if (feasible) return {org_cost(org, plan).total, true};
  return {cost_upper_bound(org) * (1.0 + violation), false};
}

Objective plan_objective(const ValidatedOrg& org, const PlanEncoding& encoding) {
  return [&org, &encoding](std::span<const double> genes) { return penalize(org, encoding.decode(genes)); };
}

FlexPlan baseline_plan(const ValidatedOrg& org) {
  FlexPlan plan = FlexPlan::all_internal(org.levels());
  plan.hiring_ratio = min_external_ratios(org);
  return plan;
}

PlanSearch optimize_plan(const ValidatedOrg& org, const GaConfig& config) {
  config.check();
  const PlanEncoding encoding(org, config.alpha_max);
  const std::vector<std::vector<double>> seeds{encoding.encode(baseline_plan(org))};
  GaResult ga = evolve(plan_objective(org, encoding), encoding.bounds(), config, seeds);
  if (!ga.best.feasible) {
    const FlexPlan plan = encoding.decode(ga.best.genes);
    std::string violated;
    for (int j = 0; j + 1 < org.levels(); ++j) {
      const double a = steady_promotable(org, plan, j);
      if (a <= 0.0) violated += "; level " + std::to_string(j + 1) + " promotable pool " + std::to_string(a);
    }
    throw Error(ErrorCode::NoFeasibleCandidate, "no feasible plan found" + violated);
  }
  PlanSearch out;
  out.plan = encoding.decode(ga.best.genes);
  out.cost = org_cost(org, out.plan);
  out.best = std::move(ga.best);
  out.history = std::move(ga.history);
  return out;
}

PlanSearch descend_plan(const ValidatedOrg& org, double alpha_max, int sweeps, std::optional<FlexPlan> start) {
  const PlanEncoding encoding(org, alpha_max);
  const FlexPlan from = start ? *start : baseline_plan(org);
  check_plan(org, from);
  const auto order = encoding.descending_order();
  Candidate best = coordinate_descent(plan_objective(org, encoding), encoding.bounds(), encoding.encode(from),
                                      order, sweeps);
  if (!best.feasible) throw Error(ErrorCode::NoFeasibleCandidate, "coordinate descent found no feasible plan");
  PlanSearch out;
  out.plan = encoding.decode(best.genes);
  out.cost = org_cost(org, out.plan);
  out.best = std::move(best);
  return out;
}

void write_history_csv(std::ostream& os, const std::vector<GenerationStats>& history) {
  const auto precision = os.precision(12);
  os << "generation,best_cost,mean_cost\n";
  for (const auto& h : history) os << h.generation << ',' << h.best << ',' << h.mean << '\n';
  os.precision(precision);
}

}  // namespace orgdyn
