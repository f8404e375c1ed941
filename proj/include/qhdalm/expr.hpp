#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qhdalm/util.hpp"

namespace qhdalm {

using Point = std::vector<double>;

// Closed node set: sums, products, nonnegative rational powers, exp, and
// affine rescaling. No division or log, so evaluation is total on any
// finite box and forward-mode derivatives exist away from pow(<1) at 0.
enum class ExprKind { Constant, Var, Sum, Product, Power, Exp, Affine };

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

class Expr {
 public:
  ExprKind kind() const { return kind_; }
  double constant_value() const { return value_; }
  int var_index() const { return var_; }
  const std::vector<ExprPtr>& children() const { return children_; }
  long long pow_num() const { return pow_num_; }
  long long pow_den() const { return pow_den_; }
  double pow_exponent() const {
    return static_cast<double>(pow_num_) / static_cast<double>(pow_den_);
  }
  double scale() const { return scale_; }
  double shift() const { return shift_; }

  // Builders are the only way to construct nodes; they fold constants and
  // flatten nested sums/products.
  friend ExprPtr constant(double v);
  friend ExprPtr var(int index);
  friend ExprPtr sum(std::vector<ExprPtr> terms);
  friend ExprPtr product(std::vector<ExprPtr> factors);
  friend ExprPtr pow(ExprPtr base, long long num, long long den);
  friend ExprPtr exp(ExprPtr arg);
  friend ExprPtr affine(double scale, double shift, ExprPtr inner);

 protected:
  Expr() = default;

 private:
  ExprKind kind_ = ExprKind::Constant;
  double value_ = 0;                // Constant
  int var_ = -1;                    // Var
  std::vector<ExprPtr> children_;   // Sum, Product, Power, Exp, Affine
  long long pow_num_ = 1;           // Power exponent numerator (>= 0)
  long long pow_den_ = 1;           // Power exponent denominator (>= 1)
  double scale_ = 1;                // Affine
  double shift_ = 0;                // Affine
};

ExprPtr constant(double v);
ExprPtr var(int index);
ExprPtr sum(std::vector<ExprPtr> terms);
ExprPtr product(std::vector<ExprPtr> factors);
ExprPtr pow(ExprPtr base, long long num, long long den = 1);
ExprPtr exp(ExprPtr arg);
ExprPtr affine(double scale, double shift, ExprPtr inner);

inline ExprPtr operator+(ExprPtr a, ExprPtr b) { return sum({std::move(a), std::move(b)}); }
inline ExprPtr operator*(ExprPtr a, ExprPtr b) { return product({std::move(a), std::move(b)}); }
inline ExprPtr operator-(ExprPtr a) { return affine(-1.0, 0.0, std::move(a)); }
inline ExprPtr operator-(ExprPtr a, ExprPtr b) { return std::move(a) + (-std::move(b)); }
inline ExprPtr operator+(ExprPtr a, double b) { return affine(1.0, b, std::move(a)); }
inline ExprPtr operator+(double a, ExprPtr b) { return affine(1.0, a, std::move(b)); }
inline ExprPtr operator-(ExprPtr a, double b) { return affine(1.0, -b, std::move(a)); }
inline ExprPtr operator-(double a, ExprPtr b) { return affine(-1.0, a, std::move(b)); }
inline ExprPtr operator*(double a, ExprPtr b) { return affine(a, 0.0, std::move(b)); }
inline ExprPtr operator*(ExprPtr a, double b) { return affine(b, 0.0, std::move(a)); }

double evaluate(const ExprPtr& e, const Point& at);

// Value plus all partials in one forward sweep (vector-mode dual numbers).
double evaluate_with_gradient(const ExprPtr& e, const Point& at, Point& grad);
Point gradient(const ExprPtr& e, const Point& at);

// Flattened postorder form of an expression DAG. Shared subtrees are
// evaluated once, and repeated evaluations reuse a caller-held workspace
// instead of allocating per node. Same forward-mode propagation as the
// recursive walkers; this is the path hot loops use.
struct EvalWorkspace {
  std::vector<double> values;
  std::vector<double> grads;  // node-major rows of length num_vars
};

class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const ExprPtr& root, std::size_t num_vars);

  std::size_t num_vars() const { return num_vars_; }
  bool empty() const { return nodes_.empty(); }

  double value(const Point& x, EvalWorkspace& ws) const;
  double value_and_gradient(const Point& x, Point& grad, EvalWorkspace& ws) const;

 private:
  struct Node {
    ExprKind kind = ExprKind::Constant;
    int var = -1;
    double a = 0, b = 0;  // constant value / affine coefficients
    long long num = 1, den = 1;
    int children_begin = 0, children_count = 0;
  };
  std::vector<Node> nodes_;   // postorder, root last
  std::vector<int> children_;
  std::size_t num_vars_ = 0;
};

int max_var_index(const ExprPtr& e);
std::vector<int> variables_of(const ExprPtr& e);  // sorted, unique
bool structurally_equal(const ExprPtr& a, const ExprPtr& b);
std::string describe_node(const Expr& e);

// Prefix (s-expression) text form, e.g. "(+ (^ x 2) (* -3 x y))".
// Serialization is canonical; parsing additionally accepts (- ...) and
// (neg ...) sugar.
std::string to_prefix(const ExprPtr& e, const std::vector<std::string>& names);
ExprPtr parse_prefix(const std::string& text, const std::vector<std::string>& names);

}  // namespace qhdalm
