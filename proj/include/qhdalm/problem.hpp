#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qhdalm/expr.hpp"

namespace qhdalm {

struct VarSpec {
  std::string name;
  double lb = 0;
  double ub = 0;
};

enum class Sense { Min, Max };

// Box-bounded NLP: min/max objective subject to g(x) = 0 and h(x) <= 0.
struct NlpProblem {
  std::string name;
  std::vector<VarSpec> variables;
  ExprPtr objective;
  std::vector<ExprPtr> equalities;    // each expression read as g(x) = 0
  std::vector<ExprPtr> inequalities;  // each expression read as h(x) <= 0
  Sense sense = Sense::Min;

  std::size_t num_vars() const { return variables.size(); }
  bool box_only() const { return equalities.empty() && inequalities.empty(); }
};

struct Diagnostic {
  std::string field;
  std::string message;
};

// Structural checks; collects every issue instead of aborting on the first.
std::vector<Diagnostic> validate(const NlpProblem& p);
void require_valid(const NlpProblem& p);  // throws InvalidInput on diagnostics

// Max problems are solved as min of the negated objective; reports restore
// the original sign.
NlpProblem normalized_to_min(const NlpProblem& p);

Point box_midpoint(const NlpProblem& p);
Point project_to_box(const NlpProblem& p, Point x);
bool inside_box(const NlpProblem& p, const Point& x, double tol = 0);

// Decomposition into univariate terms plus products of two univariate
// factors. Extraction is structural: it succeeds exactly when the tree is
// a sum of such terms.
struct UnivariateTerm {
  int var = -1;
  ExprPtr fn;  // references only `var`
};

struct BivariateTerm {
  int var_a = -1;
  int var_b = -1;
  ExprPtr fn_a;  // references only `var_a`
  ExprPtr fn_b;  // references only `var_b`
};

struct SeparableForm {
  std::vector<UnivariateTerm> univariate;
  std::vector<BivariateTerm> bivariate;
  double constant = 0;
};

// nullopt is the not-separable marker, not an error; callers fall back to a
// quadratic surrogate before encoding.
std::optional<SeparableForm> to_separable(const ExprPtr& e);

double evaluate(const SeparableForm& form, const Point& at);

}  // namespace qhdalm
