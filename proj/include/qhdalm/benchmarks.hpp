#pragma once

#include "qhdalm/hydrogen.hpp"
#include "qhdalm/problem.hpp"

namespace qhdalm {

// Styblinski-Tang, f(x) = 1/2 sum(x_i^4 - 16 x_i^2 + 5 x_i), box [-5, 5]^d.
NlpProblem styblinski_tang_box(int dims);

// Same objective with the circle equality x^2 + y^2 - 25 = 0 (2D).
NlpProblem styblinski_tang_circle();

// Illustrative electrolyzer and market data for the shipped scheduling
// benchmark. Engineering-plausible placeholders, not measured values.
HydrogenParams default_hydrogen_params();

}  // namespace qhdalm
