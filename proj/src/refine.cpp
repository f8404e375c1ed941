#include "qhdalm/refine.hpp"

#include <algorithm>
#include <cmath>

#include "qhdalm/util.hpp"

namespace qhdalm {

namespace {

void check_box_only(const NlpProblem& p) {
  if (!p.box_only())
    fail(ErrorCode::InvalidInput,
         "refiner expects a box-only problem; fold constraints in first");
}

Point project(const NlpProblem& p, Point x) {
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::clamp(x[i], p.variables[i].lb, p.variables[i].ub);
  return x;
}

}  // namespace

double projected_grad_norm(const NlpProblem& p, const Point& x) {
  check_box_only(p);
  Point g;
  evaluate_with_gradient(p.objective, x, g);
  double norm = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double step = std::clamp(x[i] - g[i], p.variables[i].lb, p.variables[i].ub);
    norm = std::max(norm, std::abs(x[i] - step));
  }
  return norm;
}

RefineResult minimize(const NlpProblem& p, const Point& x0, const RefineParams& params) {
  check_box_only(p);
  if (x0.size() != p.num_vars())
    fail(ErrorCode::DimensionMismatch, "start point/variable count mismatch");
  if (params.armijo_c1 <= 0 || params.armijo_c1 >= 1 || params.backtrack <= 0 ||
      params.backtrack >= 1 || params.tol_stat <= 0)
    fail(ErrorCode::InvalidInput, "refine parameters out of range");

  constexpr int kMaxBacktracks = 60;
  constexpr int kMaxConsecutiveFailures = 30;

  const CompiledExpr objective(p.objective, p.num_vars());
  EvalWorkspace ws;

  RefineResult res;
  res.x = project(p, x0);
  Point g;
  double f = objective.value_and_gradient(res.x, g, ws);

  Point x_prev, g_prev, x_trial(res.x.size());
  double bb_step = params.initial_step;
  int consecutive_failures = 0;

  for (int it = 0; it < params.max_iters; ++it) {
    res.iterations = it;
    double stat = 0;
    for (std::size_t i = 0; i < res.x.size(); ++i) {
      const double proj =
          std::clamp(res.x[i] - g[i], p.variables[i].lb, p.variables[i].ub);
      stat = std::max(stat, std::abs(res.x[i] - proj));
    }
    res.stationarity = stat;
    if (stat <= params.tol_stat) break;

    double alpha = bb_step;
    bool accepted = false;
    double f_trial = f;
    for (int ls = 0; ls < kMaxBacktracks && alpha > 1e-18; ++ls) {
      double pred = 0;  // grad . (x_trial - x), <= 0 along the projection arc
      for (std::size_t i = 0; i < res.x.size(); ++i) {
        x_trial[i] = std::clamp(res.x[i] - alpha * g[i], p.variables[i].lb,
                                p.variables[i].ub);
        pred += g[i] * (x_trial[i] - res.x[i]);
      }
      f_trial = objective.value(x_trial, ws);
      if (f_trial <= f + params.armijo_c1 * pred && pred <= 0) {
        accepted = true;
        break;
      }
      alpha *= params.backtrack;
    }

    if (!accepted) {
      ++res.line_search_failures;
      if (++consecutive_failures >= kMaxConsecutiveFailures) {
        res.stalled = true;
        break;
      }
      continue;
    }
    consecutive_failures = 0;

    x_prev = res.x;
    g_prev = g;
    std::swap(res.x, x_trial);
    f = objective.value_and_gradient(res.x, g, ws);

    // Barzilai-Borwein trial length for the next iteration
    double sty = 0, sts = 0;
    for (std::size_t i = 0; i < res.x.size(); ++i) {
      const double s = res.x[i] - x_prev[i];
      sts += s * s;
      sty += s * (g[i] - g_prev[i]);
    }
    bb_step = sty > 1e-30 ? std::clamp(sts / sty, 1e-12, 1e12) : params.initial_step;
  }

  res.objective = f;
  return res;
}

}  // namespace qhdalm
