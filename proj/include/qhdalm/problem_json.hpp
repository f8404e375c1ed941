#pragma once

#include <iosfwd>
#include <string>

#include "qhdalm/problem.hpp"

namespace qhdalm {

// JSON document schema (format_version 1):
//   {
//     "format_version": 1,
//     "name": "toy_qp",
//     "sense": "min" | "max",
//     "variables": [ {"name": "x", "lb": -1.0, "ub": 1.0}, ... ],
//     "objective": "(+ (^ x 2) (* -2 x))",
//     "equalities":  [ "<prefix expr>", ... ],   // each read as  expr = 0
//     "inequalities":[ "<prefix expr>", ... ]    // each read as  expr <= 0
//   }
// Expressions use the prefix form of expr.hpp with declared variable names.
NlpProblem problem_from_json(const std::string& text);
NlpProblem load_problem(const std::string& path);
std::string problem_to_json(const NlpProblem& p, int indent = 2);
void save_problem(const std::string& path, const NlpProblem& p);

}  // namespace qhdalm
