#include "qhdalm/alm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qhdalm/util.hpp"

namespace qhdalm {

Multipliers zero_multipliers(const NlpProblem& p) {
  return {std::vector<double>(p.equalities.size(), 0.0),
          std::vector<double>(p.inequalities.size(), 0.0)};
}

PenaltySchedule initial_penalties(const NlpProblem& p, const AlmOptions& opts) {
  PenaltySchedule rho;
  rho.rho_eq.assign(p.equalities.size(), opts.rho0);
  rho.rho_ineq.assign(p.inequalities.size(), opts.rho0);
  rho.gamma = opts.gamma;
  rho.rho_max = opts.rho_max;
  return rho;
}

double slack_cap(const NlpProblem& p) {
  if (p.inequalities.empty()) return 1.0;
  const std::size_t n = p.num_vars();
  constexpr std::size_t kSamples = 64;
  // Latin hypercube over the box, fixed stream so the cap is a pure function
  // of the problem.
  Rng rng(0x51ac5a3fULL);
  std::vector<Point> pts(kSamples, Point(n, 0.0));
  std::vector<std::size_t> perm(kSamples);
  for (std::size_t d = 0; d < n; ++d) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = kSamples; i-- > 1;)
      std::swap(perm[i], perm[rng.index(i + 1)]);
    const double lb = p.variables[d].lb, ub = p.variables[d].ub;
    for (std::size_t i = 0; i < kSamples; ++i) {
      const double u = (static_cast<double>(perm[i]) + rng.uniform()) /
                       static_cast<double>(kSamples);
      pts[i][d] = lb + (ub - lb) * u;
    }
  }
  double max_abs_h = 0;
  for (const auto& x : pts)
    for (const auto& h : p.inequalities)
      max_abs_h = std::max(max_abs_h, std::abs(evaluate(h, x)));
  return std::max(1.0, 2.0 * max_abs_h);
}

AugmentedProblem build_augmented(const NlpProblem& p, const Multipliers& m,
                                 const PenaltySchedule& rho) {
  if (m.eq.size() != p.equalities.size() || m.ineq.size() != p.inequalities.size() ||
      rho.rho_eq.size() != p.equalities.size() ||
      rho.rho_ineq.size() != p.inequalities.size())
    fail(ErrorCode::DimensionMismatch,
         "multiplier/penalty lengths do not match constraint counts");

  AugmentedProblem out;
  out.num_original_vars = p.num_vars();
  out.num_slacks = p.inequalities.size();
  out.slack_cap = slack_cap(p);

  NlpProblem aug;
  aug.name = p.name.empty() ? "augmented" : p.name + ".augmented";
  aug.sense = Sense::Min;
  aug.variables = p.variables;
  for (std::size_t j = 0; j < p.inequalities.size(); ++j)
    aug.variables.push_back({"slack_" + std::to_string(j), 0.0, out.slack_cap});

  std::vector<ExprPtr> terms;
  terms.push_back(p.objective);
  for (std::size_t i = 0; i < p.equalities.size(); ++i) {
    const ExprPtr& g = p.equalities[i];
    if (m.eq[i] != 0) terms.push_back(m.eq[i] * g);
    terms.push_back((rho.rho_eq[i] / 2.0) * pow(g, 2));
  }
  const int slack_base = static_cast<int>(p.num_vars());
  for (std::size_t j = 0; j < p.inequalities.size(); ++j) {
    const ExprPtr r = p.inequalities[j] + var(slack_base + static_cast<int>(j));
    if (m.ineq[j] != 0) terms.push_back(m.ineq[j] * r);
    terms.push_back((rho.rho_ineq[j] / 2.0) * pow(r, 2));
  }
  aug.objective = sum(std::move(terms));
  out.problem = std::move(aug);
  return out;
}

Multipliers update_multipliers(const Multipliers& m, const PenaltySchedule& rho,
                               const NlpProblem& p, const Point& x_slack,
                               bool project_mu) {
  if (x_slack.size() != p.num_vars() + p.inequalities.size())
    fail(ErrorCode::DimensionMismatch, "expected point with slack coordinates");
  const Point x(x_slack.begin(), x_slack.begin() + static_cast<long>(p.num_vars()));
  Multipliers out = m;
  for (std::size_t i = 0; i < p.equalities.size(); ++i)
    out.eq[i] += rho.rho_eq[i] * evaluate(p.equalities[i], x);
  for (std::size_t j = 0; j < p.inequalities.size(); ++j) {
    const double r = evaluate(p.inequalities[j], x) + x_slack[p.num_vars() + j];
    out.ineq[j] += rho.rho_ineq[j] * r;
    if (project_mu) out.ineq[j] = std::max(0.0, out.ineq[j]);
  }
  return out;
}

PenaltySchedule grow_penalty(const PenaltySchedule& rho, double violation_prev,
                             double violation_now, double eta) {
  if (rho.gamma <= 1.0) fail(ErrorCode::InvalidInput, "penalty growth factor must be > 1");
  if (violation_now <= eta * violation_prev) return rho;
  PenaltySchedule out = rho;
  for (double& r : out.rho_eq) r = std::min(rho.gamma * r, rho.rho_max);
  for (double& r : out.rho_ineq) r = std::min(rho.gamma * r, rho.rho_max);
  return out;
}

Residuals residuals(const NlpProblem& p, const Point& x_slack) {
  if (x_slack.size() != p.num_vars() + p.inequalities.size())
    fail(ErrorCode::DimensionMismatch, "expected point with slack coordinates");
  const Point x(x_slack.begin(), x_slack.begin() + static_cast<long>(p.num_vars()));
  Residuals res;
  for (const auto& g : p.equalities) {
    const double v = evaluate(g, x);
    res.per_constraint.push_back(std::abs(v));
    res.per_true.push_back(std::abs(v));
  }
  for (std::size_t j = 0; j < p.inequalities.size(); ++j) {
    const double h = evaluate(p.inequalities[j], x);
    res.per_constraint.push_back(std::abs(h + x_slack[p.num_vars() + j]));
    res.per_true.push_back(std::max(0.0, h));
  }
  res.max_al_violation = res.per_constraint.empty()
                             ? 0.0
                             : *std::max_element(res.per_constraint.begin(),
                                                 res.per_constraint.end());
  res.true_infeasibility =
      res.per_true.empty()
          ? 0.0
          : *std::max_element(res.per_true.begin(), res.per_true.end());
  return res;
}

void reset_slacks(const NlpProblem& p, const Multipliers& m,
                  const PenaltySchedule& rho, double cap, Point& x_slack) {
  if (x_slack.size() != p.num_vars() + p.inequalities.size())
    fail(ErrorCode::DimensionMismatch, "expected point with slack coordinates");
  const Point x(x_slack.begin(), x_slack.begin() + static_cast<long>(p.num_vars()));
  for (std::size_t j = 0; j < p.inequalities.size(); ++j) {
    const double h = evaluate(p.inequalities[j], x);
    const double ideal = -h - m.ineq[j] / rho.rho_ineq[j];
    x_slack[p.num_vars() + j] = std::clamp(ideal, 0.0, cap);
  }
}

}  // namespace qhdalm
