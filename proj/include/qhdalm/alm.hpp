#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qhdalm/problem.hpp"

namespace qhdalm {

struct Multipliers {
  std::vector<double> eq;    // one per equality constraint
  std::vector<double> ineq;  // one per slack-transformed inequality
};

struct PenaltySchedule {
  std::vector<double> rho_eq;
  std::vector<double> rho_ineq;
  double gamma = 10.0;    // growth factor, > 1
  double rho_max = 1e8;   // cap
};

struct AlmOptions {
  double rho0 = 10.0;
  double gamma = 10.0;
  double rho_max = 1e8;
  double eta = 0.25;      // grow penalties only if violation > eta * previous
  double tol_feas = 1e-6;
  double tol_stat = 1e-6;
  double tol_obj = 1e-8;
  int max_outer = 50;
  bool project_mu = false;  // off by default: plain equality-style update
};

struct AlmState {
  int k = 0;
  Multipliers multipliers;
  PenaltySchedule penalties;
  Point incumbent;  // original variables followed by slacks
  std::vector<std::array<double, 3>> history;  // (objective, max violation, stationarity)
};

// Box-constrained problem over (x, s): objective is the augmented Lagrangian,
// constraint lists are empty, slacks live in [0, slack_cap].
struct AugmentedProblem {
  NlpProblem problem;
  std::size_t num_original_vars = 0;
  std::size_t num_slacks = 0;
  double slack_cap = 1.0;
};

Multipliers zero_multipliers(const NlpProblem& p);
PenaltySchedule initial_penalties(const NlpProblem& p, const AlmOptions& opts);

// Finite upper bound for the slack box, sized from Latin-hypercube samples of
// |h_j| over the variable box.
double slack_cap(const NlpProblem& p);

AugmentedProblem build_augmented(const NlpProblem& p, const Multipliers& m,
                                 const PenaltySchedule& rho);

// lambda_i += rho_i * g_i(x);  mu_j += rho_j * (h_j(x) + s_j)
Multipliers update_multipliers(const Multipliers& m, const PenaltySchedule& rho,
                               const NlpProblem& p, const Point& x_slack,
                               bool project_mu = false);

// Each rho <- min(gamma * rho, rho_max), applied only when the violation
// failed to shrink by the factor eta.
PenaltySchedule grow_penalty(const PenaltySchedule& rho, double violation_prev,
                             double violation_now, double eta);

struct Residuals {
  double max_al_violation = 0;          // max over |g_i| and |h_j + s_j|
  std::vector<double> per_constraint;   // g residuals then h+s residuals
  double true_infeasibility = 0;        // max over |g_i| and max(0, h_j)
  std::vector<double> per_true;
};

Residuals residuals(const NlpProblem& p, const Point& x_slack);

// Optimal slack values for fixed x: s_j = clamp(-h_j - mu_j/rho_j, 0, cap).
void reset_slacks(const NlpProblem& p, const Multipliers& m,
                  const PenaltySchedule& rho, double cap, Point& x_slack);

}  // namespace qhdalm
