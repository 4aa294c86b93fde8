#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "orgdyn/org_model.hpp"

namespace fixtures {

inline orgdyn::ValidatedOrg make_org(const std::vector<double>& n, const std::vector<double>& mu,
                                     const std::vector<double>& tau, double r = 0.0,
                                     const std::vector<double>& w0 = {}, const std::vector<double>& wt = {}) {
  orgdyn::OrgSpec spec;
  spec.wage_growth = r;
  for (std::size_t j = 0; j < n.size(); ++j) {
    orgdyn::LevelSpec lv;
    lv.headcount = n[j];
    lv.attrition = mu[j];
    lv.eligibility_age = tau[j];
    if (!w0.empty()) lv.base_wage = w0[j];
    if (!wt.empty()) lv.temp_wage = wt[j];
    spec.levels.push_back(lv);
  }
  return orgdyn::validate(spec);
}

// Low turnover, internal promotions suffice.
inline orgdyn::ValidatedOrg low_turnover() {
  return make_org({5500, 5200, 3800, 1800, 500}, {0.08, 0.08, 0.08, 0.08, 0.5}, {4, 4, 4, 4, 4});
}

// High turnover, external hiring needed at some levels.
inline orgdyn::ValidatedOrg high_turnover() {
  return make_org({8000, 4000, 2500, 1000, 500}, {0.16, 0.16, 0.16, 0.16, 0.5}, {4, 4, 4, 4, 4});
}

inline const std::vector<double> kWages{35, 49, 69, 96, 134};

// Five-level cost organisation; nullopt premium means no temporaries.
inline orgdyn::ValidatedOrg cost_org(std::optional<double> premium) {
  std::vector<double> wt;
  if (premium) {
    for (double w : kWages) wt.push_back((1.0 + *premium) * w);
  }
  return make_org({5500, 5200, 3800, 1800, 500}, {0.08, 0.08, 0.08, 0.08, 0.2}, {4, 4, 4, 4, 4}, 0.04, kWages, wt);
}

// Random valid organisation with wages; r is drawn below every attrition rate.
inline orgdyn::ValidatedOrg random_org(std::mt19937_64& rng, int levels) {
  std::uniform_real_distribution<double> n(50.0, 8000.0), mu(0.02, 0.6), tau(0.0, 8.0), w(20.0, 150.0);
  std::vector<double> N, M, T, W0, WT;
  double min_mu = 1.0;
  for (int j = 0; j < levels; ++j) {
    N.push_back(n(rng));
    M.push_back(mu(rng));
    T.push_back(tau(rng));
    W0.push_back(w(rng));
    WT.push_back(W0.back() * (1.0 + std::uniform_real_distribution<double>(0.01, 0.5)(rng)));
    min_mu = std::min(min_mu, M.back());
  }
  const double r = std::uniform_real_distribution<double>(0.0, 0.95)(rng) * min_mu;
  return make_org(N, M, T, r, W0, WT);
}

// Composite trapezoid, written independently of the library quadrature.
inline double trapezoid(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double sum = 0.5 * (f(a) + f(b));
  for (int i = 1; i < n; ++i) sum += f(a + i * h);
  return h * sum;
}

// Composite Simpson, independent of the library quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return sum * h / 3.0;
}

// Permanent payroll rebuilt from the mass balance alone: inflow X from the
// flux recursion, pool from N p minus the head mass, promotion rate from the
// outflow it must carry.
inline double payroll_from_balance(const orgdyn::ValidatedOrg& org, const orgdyn::FlexPlan& plan, int j) {
  const int L = org.levels();
  std::vector<double> c(static_cast<std::size_t>(L) + 1, 0.0);
  for (int i = L - 1; i >= 0; --i) {
    c[static_cast<std::size_t>(i)] =
        (org.attrition(i) * org.headcount(i) * plan.share(i) + c[static_cast<std::size_t>(i) + 1]) /
        (i == 0 ? 1.0 : plan.alpha(i));
  }
  const double mu = org.attrition(j);
  const double tau = org.eligibility_age(j);
  const double r = org.wage_growth();
  const double w0 = *org.level(j).base_wage;
  const double out = c[static_cast<std::size_t>(j) + 1];
  const double x = mu * org.headcount(j) * plan.share(j) + out;
  const double pool = org.headcount(j) * plan.share(j) - x * (1.0 - std::exp(-mu * tau)) / mu;
  const double rate = out > 0.0 ? out / pool : 0.0;
  const double decay = mu + rate - r;  // decay of the integrand past tau

  auto head = [&](double s) { return w0 * x * std::exp((r - mu) * s); };
  auto tail = [&](double s) { return w0 * x * std::exp(r * s - mu * tau - (mu + rate) * (s - tau)); };
  const double span = 40.0 / decay;
  return simpson(head, 0.0, tau, 4000) + simpson(tail, tau, tau + span, 8000) + tail(tau + span) / decay;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace fixtures
