#include "orgdyn/scenario.hpp"

#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "orgdyn/cost_model.hpp"

namespace orgdyn {

using json = nlohmann::json;

PolicyRule PolicyConfig::rule() const {
  if (kind == PolicyKind::ExternalFraction) return ExternalFractionPolicy{max_rate, fraction};
  return MaxInternalPolicy{max_rate};
}

namespace {

[[noreturn]] void fail(const std::string& message) { throw Error(ErrorCode::InvalidConfig, message); }

// An object whose keys must all be consumed.
class Block {
 public:
  Block(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_ + " must be an object");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) out = as_number(*v, where(key));
  }
  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(where(key) + " must be an integer");
      out = v->get<int>();
    }
  }
  void text(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(where(key) + " must be a string");
      out = v->get<std::string>();
    }
  }
  double required_number(const std::string& key) {
    const json* v = find(key);
    if (!v) fail(where(key) + " is required");
    return as_number(*v, where(key));
  }
  std::vector<double> numbers(const std::string& key) {
    const json* v = find(key);
    if (!v) fail(where(key) + " is required");
    return as_numbers(*v, where(key));
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) fail("unknown key " + where(key));
    }
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path + " must be a number");
    return v.get<double>();
  }
  static std::vector<double> as_numbers(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(as_number(x, path));
    return out;
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class E, std::size_t N>
using Names = std::array<std::pair<const char*, E>, N>;

template <class E, std::size_t N>
E parse_enum(Block& b, const std::string& key, E fallback, const Names<E, N>& names) {
  const json* v = b.find(key);
  if (!v) return fallback;
  if (v->is_string()) {
    for (const auto& [name, value] : names) {
      if (*v == name) return value;
    }
  }
  std::string allowed;
  for (const auto& [name, value] : names) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  fail(b.where(key) + " must be one of: " + allowed);
}

template <class E, std::size_t N>
const char* enum_name(E value, const Names<E, N>& names) {
  for (const auto& [name, v] : names) {
    if (v == value) return name;
  }
  return "";
}

constexpr Names<InitialKind, 3> kInitialNames{{
    {"uniform", InitialKind::Uniform},
    {"stationary", InitialKind::Stationary},
    {"truncated_exponential", InitialKind::TruncatedExponential}}};
constexpr Names<PolicyKind, 2> kPolicyNames{{
    {"max_internal", PolicyKind::MaxInternal}, {"external_fraction", PolicyKind::ExternalFraction}}};
constexpr Names<OptimizerMode, 3> kModeNames{{
    {"ga", OptimizerMode::Ga},
    {"coordinate_descent", OptimizerMode::CoordinateDescent},
    {"fixed_plan", OptimizerMode::FixedPlan}}};
constexpr Names<OutputFormat, 2> kFormatNames{{
    {"table", OutputFormat::Table}, {"csv", OutputFormat::Csv}}};
constexpr Names<FloaterWageCurve::Kind, 3> kCurveNames{{
    {"constant", FloaterWageCurve::Kind::Constant},
    {"exponential", FloaterWageCurve::Kind::Exponential},
    {"piecewise_linear", FloaterWageCurve::Kind::PiecewiseLinear}}};

FloaterWageCurve parse_curve(const json& node, const std::string& path) {
  Block b(node, path);
  const auto kind = parse_enum(b, "kind", FloaterWageCurve::Kind::Constant, kCurveNames);
  FloaterWageCurve curve;
  switch (kind) {
    case FloaterWageCurve::Kind::Constant:
      curve = FloaterWageCurve::constant(b.required_number("value"));
      break;
    case FloaterWageCurve::Kind::Exponential: {
      const double initial = b.required_number("initial");
      curve = FloaterWageCurve::exponential(initial, b.required_number("growth"));
      break;
    }
    case FloaterWageCurve::Kind::PiecewiseLinear: {
      const json* knots = b.find("knots");
      if (!knots || !knots->is_array()) fail(b.where("knots") + " must be an array of [seniority, wage] pairs");
      std::vector<std::pair<double, double>> pts;
      for (const auto& k : *knots) {
        const auto pair = Block::as_numbers(k, b.where("knots"));
        if (pair.size() != 2) fail(b.where("knots") + " entries must be [seniority, wage]");
        pts.emplace_back(pair[0], pair[1]);
      }
      try {
        curve = FloaterWageCurve::piecewise_linear(std::move(pts));
      } catch (const Error& e) {
        fail(b.where("knots") + ": " + e.what());
      }
      break;
    }
  }
  b.finish();
  return curve;
}

json dump_curve(const FloaterWageCurve& c) {
  json out{{"kind", enum_name(c.kind, kCurveNames)}};
  switch (c.kind) {
    case FloaterWageCurve::Kind::Constant:
      out["value"] = c.base;
      break;
    case FloaterWageCurve::Kind::Exponential:
      out["initial"] = c.base;
      out["growth"] = c.growth;
      break;
    case FloaterWageCurve::Kind::PiecewiseLinear: {
      json knots = json::array();
      for (const auto& [s, w] : c.knots) knots.push_back({s, w});
      out["knots"] = knots;
      break;
    }
  }
  return out;
}

OrgSpec parse_org(const json& node) {
  Block b(node, "organization");
  OrgSpec spec;
  b.number("wage_growth", spec.wage_growth);
  const json* levels = b.find("levels");
  if (!levels || !levels->is_array()) fail("organization.levels must be an array");
  for (std::size_t i = 0; i < levels->size(); ++i) {
    Block lv(levels->at(i), "organization.levels[" + std::to_string(i) + "]");
    LevelSpec s;
    s.headcount = lv.required_number("headcount");
    s.attrition = lv.required_number("attrition");
    s.eligibility_age = lv.required_number("eligibility_age");
    if (const json* v = lv.find("base_wage")) s.base_wage = Block::as_number(*v, lv.where("base_wage"));
    if (const json* v = lv.find("temp_wage")) s.temp_wage = Block::as_number(*v, lv.where("temp_wage"));
    if (const json* v = lv.find("floater_wage")) s.floater_wage = parse_curve(*v, lv.where("floater_wage"));
    lv.finish();
    spec.levels.push_back(std::move(s));
  }
  if (const json* units = b.find("business_units")) {
    if (!units->is_array()) fail("organization.business_units must be an array");
    for (std::size_t i = 0; i < units->size(); ++i) {
      Block u(units->at(i), "organization.business_units[" + std::to_string(i) + "]");
      BusinessUnit bu;
      u.text("name", bu.name);
      bu.headcounts = u.numbers("headcounts");
      if (const json* v = u.find("temp_wages")) bu.temp_wages = Block::as_numbers(*v, u.where("temp_wages"));
      u.finish();
      spec.business_units.push_back(std::move(bu));
    }
  }
  b.finish();
  return spec;
}

json dump_org(const OrgSpec& spec) {
  json levels = json::array();
  for (const auto& lv : spec.levels) {
    json l{{"headcount", lv.headcount}, {"attrition", lv.attrition}, {"eligibility_age", lv.eligibility_age}};
    if (lv.base_wage) l["base_wage"] = *lv.base_wage;
    if (lv.temp_wage) l["temp_wage"] = *lv.temp_wage;
    if (lv.floater_wage) l["floater_wage"] = dump_curve(*lv.floater_wage);
    levels.push_back(std::move(l));
  }
  json out{{"wage_growth", spec.wage_growth}, {"levels", levels}};
  if (!spec.business_units.empty()) {
    json units = json::array();
    for (const auto& bu : spec.business_units) {
      json u{{"name", bu.name}, {"headcounts", bu.headcounts}};
      if (!bu.temp_wages.empty()) u["temp_wages"] = bu.temp_wages;
      units.push_back(std::move(u));
    }
    out["business_units"] = units;
  }
  return out;
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    fail(std::string("malformed scenario: ") + e.what());
  }

  ScenarioConfig cfg;
  Block top(root, "scenario");
  top.text("name", cfg.name);
  const json* org = top.find("organization");
  if (!org) fail("scenario.organization is required");
  cfg.organization = parse_org(*org);

  if (const json* v = top.find("grid")) {
    Block b(*v, "grid");
    b.number("ds", cfg.grid.ds);
    b.number("dt", cfg.grid.dt);
    b.number("s_max", cfg.grid.s_max);
    b.number("horizon", cfg.grid.horizon);
    b.integer("record_every", cfg.grid.record_every);
    cfg.grid.initial = parse_enum(b, "initial", cfg.grid.initial, kInitialNames);
    b.finish();
    if (cfg.grid.record_every < 1) fail("grid.record_every must be >= 1");
    if (!(cfg.grid.horizon >= 0.0)) fail("grid.horizon must be >= 0");
  }

  if (const json* v = top.find("policy")) {
    Block b(*v, "policy");
    cfg.policy.kind = parse_enum(b, "kind", cfg.policy.kind, kPolicyNames);
    b.number("max_rate", cfg.policy.max_rate);
    b.number("fraction", cfg.policy.fraction);
    b.finish();
    if (!(cfg.policy.max_rate > 0.0)) fail("policy.max_rate must be > 0");
    if (!(cfg.policy.fraction >= 0.0)) fail("policy.fraction must be >= 0");
  }

  if (const json* v = top.find("plan")) {
    Block b(*v, "plan");
    FlexPlan plan;
    plan.hiring_ratio = b.numbers("hiring_ratio");
    plan.permanent_share = b.numbers("permanent_share");
    b.finish();
    cfg.plan = std::move(plan);
  }

  if (const json* v = top.find("cost")) {
    Block b(*v, "cost");
    if (const json* p = b.find("premium")) {
      if (p->is_string() && *p == "infinity") {
        cfg.cost.mode = PremiumMode::NoTemporaries;
      } else if (p->is_number()) {
        cfg.cost.mode = PremiumMode::Uniform;
        cfg.cost.premium = p->get<double>();
        if (!(cfg.cost.premium > 0.0)) fail("cost.premium must be > 0");
      } else {
        fail("cost.premium must be a number or \"infinity\"");
      }
    }
    b.finish();
  }

  if (const json* v = top.find("optimizer")) {
    Block b(*v, "optimizer");
    auto& ga = cfg.optimizer.ga;
    cfg.optimizer.mode = parse_enum(b, "mode", cfg.optimizer.mode, kModeNames);
    b.integer("population_size", ga.population_size);
    b.integer("generations", ga.generations);
    b.number("mutation_chance", ga.mutation_chance);
    b.number("elitism", ga.elitism);
    b.integer("tournament_size", ga.tournament_size);
    if (const json* s = b.find("seed")) {
      if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0)) {
        fail("optimizer.seed must be a non-negative integer");
      }
      ga.seed = s->get<std::uint64_t>();
    }
    b.number("alpha_max", ga.alpha_max);
    b.integer("threads", ga.threads);
    b.integer("sweeps", cfg.optimizer.sweeps);
    b.finish();
    try {
      ga.check();
    } catch (const Error& e) {
      fail(std::string("optimizer: ") + e.what());
    }
    if (cfg.optimizer.sweeps < 1) fail("optimizer.sweeps must be >= 1");
  }

  if (const json* v = top.find("output")) {
    Block b(*v, "output");
    b.text("directory", cfg.output.directory);
    cfg.output.format = parse_enum(b, "format", cfg.output.format, kFormatNames);
    b.finish();
  }
  top.finish();
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string dump_scenario(const ScenarioConfig& c) {
  json root;
  root["name"] = c.name;
  root["organization"] = dump_org(c.organization);
  root["grid"] = {{"ds", c.grid.ds},
                  {"dt", c.grid.dt},
                  {"s_max", c.grid.s_max},
                  {"horizon", c.grid.horizon},
                  {"record_every", c.grid.record_every},
                  {"initial", enum_name(c.grid.initial, kInitialNames)}};
  root["policy"] = {{"kind", enum_name(c.policy.kind, kPolicyNames)},
                    {"max_rate", c.policy.max_rate},
                    {"fraction", c.policy.fraction}};
  if (c.plan) {
    root["plan"] = {{"hiring_ratio", c.plan->hiring_ratio}, {"permanent_share", c.plan->permanent_share}};
  }
  json cost = json::object();
  if (c.cost.mode == PremiumMode::Uniform) cost["premium"] = c.cost.premium;
  if (c.cost.mode == PremiumMode::NoTemporaries) cost["premium"] = "infinity";
  root["cost"] = cost;
  const auto& ga = c.optimizer.ga;
  root["optimizer"] = {{"mode", enum_name(c.optimizer.mode, kModeNames)},
                       {"population_size", ga.population_size},
                       {"generations", ga.generations},
                       {"mutation_chance", ga.mutation_chance},
                       {"elitism", ga.elitism},
                       {"tournament_size", ga.tournament_size},
                       {"seed", ga.seed},
                       {"alpha_max", ga.alpha_max},
                       {"threads", ga.threads},
                       {"sweeps", c.optimizer.sweeps}};
  root["output"] = {{"directory", c.output.directory}, {"format", enum_name(c.output.format, kFormatNames)}};
  return root.dump(2) + "\n";
}

ValidatedOrg scenario_org(const ScenarioConfig& config) {
  ValidatedOrg org = validate(config.organization);
  switch (config.cost.mode) {
    case PremiumMode::LevelWages:
      return org;
    case PremiumMode::Uniform:
      return with_uniform_premium(org, config.cost.premium);
    case PremiumMode::NoTemporaries:
      return with_uniform_premium(org, std::nullopt);
  }
  return org;
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const IllPosedError*>(&error)) return 3;
  if (const auto* e = dynamic_cast<const Error*>(&error)) {
    switch (e->code()) {
      case ErrorCode::IllPosed:
      case ErrorCode::InfeasibleInitialData:
        return 3;
      case ErrorCode::NoFeasibleCandidate:
      case ErrorCode::MassMismatch:
        return 4;
      default:
        return 2;
    }
  }
  return 4;
}

}  // namespace orgdyn
