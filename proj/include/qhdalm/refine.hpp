#pragma once

#include "qhdalm/problem.hpp"

namespace qhdalm {

struct RefineParams {
  int max_iters = 5000;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  double initial_step = 1.0;
  double tol_stat = 1e-6;  // projected-gradient infinity norm
};

struct RefineResult {
  Point x;
  double objective = 0;
  double stationarity = 0;
  int iterations = 0;
  int line_search_failures = 0;
  bool stalled = false;
};

// Projected gradient descent with Armijo backtracking; after the first
// iteration the trial step is the Barzilai-Borwein length. Objective values
// are non-increasing; every iterate stays inside the box exactly.
RefineResult minimize(const NlpProblem& box_only, const Point& x0,
                      const RefineParams& params);

// ||x - P_box(x - grad f(x))||_inf
double projected_grad_norm(const NlpProblem& box_only, const Point& x);

}  // namespace qhdalm
