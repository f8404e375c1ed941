#include "qhdalm/problem.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace qhdalm {

namespace {

void check_refs(const ExprPtr& e, std::size_t num_vars, const std::string& where,
                std::vector<Diagnostic>& out) {
  if (!e) {
    out.push_back({where, "missing expression"});
    return;
  }
  const int mx = max_var_index(e);
  if (mx >= static_cast<int>(num_vars)) {
    std::ostringstream os;
    os << "references variable index " << mx << " but only " << num_vars
       << " variables are declared";
    out.push_back({where, os.str()});
  }
}

}  // namespace

std::vector<Diagnostic> validate(const NlpProblem& p) {
  std::vector<Diagnostic> diags;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < p.variables.size(); ++i) {
    const auto& v = p.variables[i];
    const std::string field = "variables[" + std::to_string(i) + "] (" + v.name + ")";
    if (v.name.empty()) diags.push_back({field, "empty variable name"});
    if (!seen.insert(v.name).second)
      diags.push_back({field, "duplicate variable name"});
    if (!std::isfinite(v.lb) || !std::isfinite(v.ub))
      diags.push_back({field, "finite box required"});
    else if (v.lb > v.ub)
      diags.push_back({field, "lower bound exceeds upper bound"});
  }
  check_refs(p.objective, p.num_vars(), "objective", diags);
  for (std::size_t i = 0; i < p.equalities.size(); ++i)
    check_refs(p.equalities[i], p.num_vars(), "equalities[" + std::to_string(i) + "]", diags);
  for (std::size_t i = 0; i < p.inequalities.size(); ++i)
    check_refs(p.inequalities[i], p.num_vars(), "inequalities[" + std::to_string(i) + "]", diags);
  return diags;
}

void require_valid(const NlpProblem& p) {
  const auto diags = validate(p);
  if (diags.empty()) return;
  std::ostringstream os;
  os << "invalid problem '" << p.name << "':";
  for (const auto& d : diags) os << "\n  " << d.field << ": " << d.message;
  fail(ErrorCode::InvalidInput, os.str());
}

NlpProblem normalized_to_min(const NlpProblem& p) {
  if (p.sense == Sense::Min) return p;
  NlpProblem out = p;
  out.objective = -p.objective;
  out.sense = Sense::Min;
  return out;
}

Point box_midpoint(const NlpProblem& p) {
  Point x(p.num_vars());
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = 0.5 * (p.variables[i].lb + p.variables[i].ub);
  return x;
}

Point project_to_box(const NlpProblem& p, Point x) {
  if (x.size() != p.num_vars())
    fail(ErrorCode::DimensionMismatch, "point/variable count mismatch");
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::clamp(x[i], p.variables[i].lb, p.variables[i].ub);
  return x;
}

bool inside_box(const NlpProblem& p, const Point& x, double tol) {
  if (x.size() != p.num_vars()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] < p.variables[i].lb - tol || x[i] > p.variables[i].ub + tol)
      return false;
  return true;
}

namespace {

// Splits one additive term into (constant shift) plus either a univariate or
// bivariate contribution. Returns false when the term does not fit the form.
bool classify_term(const ExprPtr& term, SeparableForm& form) {
  const auto vars = variables_of(term);
  if (vars.empty()) {
    form.constant += evaluate(term, {});
    return true;
  }
  if (vars.size() == 1) {
    form.univariate.push_back({vars[0], term});
    return true;
  }
  if (vars.size() != 2) return false;

  // Peel affine wrappers: a * inner + b contributes b to the constant and a
  // to one factor.
  double scale = 1, shift = 0;
  ExprPtr core = term;
  while (core->kind() == ExprKind::Affine) {
    shift += scale * core->shift();
    scale *= core->scale();
    core = core->children()[0];
  }
  if (core->kind() != ExprKind::Product) return false;

  std::vector<ExprPtr> factors_a, factors_b;
  for (const auto& f : core->children()) {
    const auto fv = variables_of(f);
    if (fv.empty()) {
      factors_a.push_back(f);  // constant-valued factor, attach anywhere
    } else if (fv.size() == 1 && fv[0] == vars[0]) {
      factors_a.push_back(f);
    } else if (fv.size() == 1 && fv[0] == vars[1]) {
      factors_b.push_back(f);
    } else {
      return false;  // a single factor couples both variables
    }
  }
  if (factors_a.empty() || factors_b.empty()) return false;
  form.constant += shift;
  ExprPtr fa = product(std::move(factors_a));
  if (scale != 1) fa = scale * fa;
  form.bivariate.push_back({vars[0], vars[1], fa, product(std::move(factors_b))});
  return true;
}

}  // namespace

std::optional<SeparableForm> to_separable(const ExprPtr& e) {
  if (!e) fail(ErrorCode::InvalidInput, "null expression");
  SeparableForm form;
  std::vector<ExprPtr> terms;
  if (e->kind() == ExprKind::Sum)
    terms = e->children();
  else
    terms = {e};
  for (const auto& t : terms)
    if (!classify_term(t, form)) return std::nullopt;
  return form;
}

double evaluate(const SeparableForm& form, const Point& at) {
  double v = form.constant;
  for (const auto& u : form.univariate) v += evaluate(u.fn, at);
  for (const auto& b : form.bivariate)
    v += evaluate(b.fn_a, at) * evaluate(b.fn_b, at);
  return v;
}

}  // namespace qhdalm
