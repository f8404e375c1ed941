#include "qhdalm/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

namespace qhdalm {

namespace {

std::shared_ptr<Expr> make_node() {
  struct Access : Expr {
    Access() : Expr() {}
  };
  return std::make_shared<Access>();
}

double int_pow(double base, long long n) {
  double r = 1.0, b = base;
  while (n > 0) {
    if (n & 1) r *= b;
    n >>= 1;
    if (n) b *= b;
  }
  return r;
}

void check_finite(double v, const Expr& node) {
  if (!std::isfinite(v))
    fail(ErrorCode::EvaluationOverflow,
         "non-finite value at node " + describe_node(node));
}

}  // namespace

std::string describe_node(const Expr& e) {
  std::ostringstream os;
  switch (e.kind()) {
    case ExprKind::Constant: os << "constant(" << e.constant_value() << ")"; break;
    case ExprKind::Var: os << "var[" << e.var_index() << "]"; break;
    case ExprKind::Sum: os << "sum/" << e.children().size(); break;
    case ExprKind::Product: os << "product/" << e.children().size(); break;
    case ExprKind::Power:
      os << "pow(" << e.pow_num();
      if (e.pow_den() != 1) os << "/" << e.pow_den();
      os << ")";
      break;
    case ExprKind::Exp: os << "exp"; break;
    case ExprKind::Affine: os << "affine(" << e.scale() << "," << e.shift() << ")"; break;
  }
  return os.str();
}

ExprPtr constant(double v) {
  auto n = make_node();
  n->kind_ = ExprKind::Constant;
  n->value_ = v;
  return n;
}

ExprPtr var(int index) {
  if (index < 0) fail(ErrorCode::InvalidInput, "variable index must be >= 0");
  auto n = make_node();
  n->kind_ = ExprKind::Var;
  n->var_ = index;
  return n;
}

ExprPtr sum(std::vector<ExprPtr> terms) {
  std::vector<ExprPtr> kids;
  double c = 0;
  for (auto& t : terms) {
    if (!t) fail(ErrorCode::InvalidInput, "null expression in sum");
    if (t->kind() == ExprKind::Constant) {
      c += t->constant_value();
    } else if (t->kind() == ExprKind::Sum) {
      for (const auto& k : t->children()) {
        if (k->kind() == ExprKind::Constant)
          c += k->constant_value();
        else
          kids.push_back(k);
      }
    } else {
      kids.push_back(std::move(t));
    }
  }
  if (kids.empty()) return constant(c);
  if (kids.size() == 1 && c == 0) return kids[0];
  if (c != 0) kids.push_back(constant(c));
  auto n = make_node();
  n->kind_ = ExprKind::Sum;
  n->children_ = std::move(kids);
  return n;
}

ExprPtr product(std::vector<ExprPtr> factors) {
  std::vector<ExprPtr> kids;
  double c = 1;
  for (auto& f : factors) {
    if (!f) fail(ErrorCode::InvalidInput, "null expression in product");
    if (f->kind() == ExprKind::Constant) {
      c *= f->constant_value();
    } else if (f->kind() == ExprKind::Product) {
      for (const auto& k : f->children()) kids.push_back(k);
    } else {
      kids.push_back(std::move(f));
    }
  }
  if (c == 0) return constant(0);
  if (kids.empty()) return constant(c);
  ExprPtr core;
  if (kids.size() == 1) {
    core = kids[0];
  } else {
    auto n = make_node();
    n->kind_ = ExprKind::Product;
    n->children_ = std::move(kids);
    core = n;
  }
  return c == 1 ? core : affine(c, 0.0, core);
}

ExprPtr pow(ExprPtr base, long long num, long long den) {
  if (!base) fail(ErrorCode::InvalidInput, "null expression in pow");
  if (den <= 0) fail(ErrorCode::InvalidInput, "pow denominator must be positive");
  if (num < 0)
    fail(ErrorCode::InvalidInput,
         "negative exponents are not part of the expression set");
  const long long g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num == 0) return constant(1.0);  // x^0 == 1, including at x == 0
  if (num == 1 && den == 1) return base;
  if (base->kind() == ExprKind::Constant) {
    const double b = base->constant_value();
    const double v = den == 1
                         ? int_pow(b, num)
                         : std::pow(b, static_cast<double>(num) / static_cast<double>(den));
    if (!std::isfinite(v))
      fail(ErrorCode::EvaluationOverflow, "constant pow overflows");
    return constant(v);
  }
  auto n = make_node();
  n->kind_ = ExprKind::Power;
  n->children_ = {std::move(base)};
  n->pow_num_ = num;
  n->pow_den_ = den;
  return n;
}

ExprPtr exp(ExprPtr arg) {
  if (!arg) fail(ErrorCode::InvalidInput, "null expression in exp");
  if (arg->kind() == ExprKind::Constant) {
    const double v = std::exp(arg->constant_value());
    if (!std::isfinite(v))
      fail(ErrorCode::EvaluationOverflow, "constant exp overflows");
    return constant(v);
  }
  auto n = make_node();
  n->kind_ = ExprKind::Exp;
  n->children_ = {std::move(arg)};
  return n;
}

ExprPtr affine(double scale, double shift, ExprPtr inner) {
  if (!inner) fail(ErrorCode::InvalidInput, "null expression in affine");
  if (!std::isfinite(scale) || !std::isfinite(shift))
    fail(ErrorCode::InvalidInput, "affine coefficients must be finite");
  if (scale == 0) return constant(shift);
  if (inner->kind() == ExprKind::Constant)
    return constant(scale * inner->constant_value() + shift);
  if (inner->kind() == ExprKind::Affine) {
    const double a = scale * inner->scale();
    const double b = scale * inner->shift() + shift;
    return affine(a, b, inner->children()[0]);
  }
  if (scale == 1 && shift == 0) return inner;
  auto n = make_node();
  n->kind_ = ExprKind::Affine;
  n->children_ = {std::move(inner)};
  n->scale_ = scale;
  n->shift_ = shift;
  return n;
}

namespace {

double eval_rec(const Expr& e, const Point& x) {
  switch (e.kind()) {
    case ExprKind::Constant:
      return e.constant_value();
    case ExprKind::Var: {
      const int i = e.var_index();
      if (i < 0 || static_cast<std::size_t>(i) >= x.size())
        fail(ErrorCode::DimensionMismatch,
             "point has no coordinate for " + describe_node(e));
      return x[static_cast<std::size_t>(i)];
    }
    case ExprKind::Sum: {
      double s = 0;
      for (const auto& k : e.children()) s += eval_rec(*k, x);
      check_finite(s, e);
      return s;
    }
    case ExprKind::Product: {
      double p = 1;
      for (const auto& k : e.children()) p *= eval_rec(*k, x);
      check_finite(p, e);
      return p;
    }
    case ExprKind::Power: {
      const double b = eval_rec(*e.children()[0], x);
      const double v = e.pow_den() == 1
                           ? int_pow(b, e.pow_num())
                           : std::pow(b, e.pow_exponent());
      check_finite(v, e);
      return v;
    }
    case ExprKind::Exp: {
      const double v = std::exp(eval_rec(*e.children()[0], x));
      check_finite(v, e);
      return v;
    }
    case ExprKind::Affine: {
      const double v =
          e.scale() * eval_rec(*e.children()[0], x) + e.shift();
      check_finite(v, e);
      return v;
    }
  }
  fail(ErrorCode::InvalidInput, "corrupt expression node");
}

// Forward-mode dual with the full partial vector. An empty gradient vector
// stands for an exact zero gradient (constants and constant subtrees), which
// keeps the sweep cheap on penalty-heavy objectives.
struct Dual {
  double v = 0;
  Point g;  // empty == zero
};

void add_scaled(Point& dst, const Point& src, double a, std::size_t n) {
  if (src.empty() || a == 0) return;
  if (dst.empty()) dst.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) dst[i] += a * src[i];
}

void scale_grad(Point& g, double a) {
  if (a == 1 || g.empty()) return;
  for (double& v : g) v *= a;
}

Dual dual_rec(const Expr& e, const Point& x) {
  const std::size_t n = x.size();
  switch (e.kind()) {
    case ExprKind::Constant:
      return {e.constant_value(), {}};
    case ExprKind::Var: {
      const int i = e.var_index();
      if (i < 0 || static_cast<std::size_t>(i) >= n)
        fail(ErrorCode::DimensionMismatch,
             "point has no coordinate for " + describe_node(e));
      Dual d{x[static_cast<std::size_t>(i)], Point(n, 0.0)};
      d.g[static_cast<std::size_t>(i)] = 1.0;
      return d;
    }
    case ExprKind::Sum: {
      Dual acc{0.0, {}};
      for (const auto& k : e.children()) {
        Dual d = dual_rec(*k, x);
        acc.v += d.v;
        if (acc.g.empty())
          acc.g = std::move(d.g);
        else
          add_scaled(acc.g, d.g, 1.0, n);
      }
      check_finite(acc.v, e);
      return acc;
    }
    case ExprKind::Product: {
      const auto& kids = e.children();
      std::vector<Dual> d;
      d.reserve(kids.size());
      for (const auto& k : kids) d.push_back(dual_rec(*k, x));
      const std::size_t m = d.size();
      // prefix[i] = prod of values before i, suffix likewise after i
      std::vector<double> prefix(m, 1.0), suffix(m, 1.0);
      for (std::size_t i = 1; i < m; ++i) prefix[i] = prefix[i - 1] * d[i - 1].v;
      for (std::size_t i = m - 1; i-- > 0;) suffix[i] = suffix[i + 1] * d[i + 1].v;
      Dual out{prefix[m - 1] * d[m - 1].v, {}};
      for (std::size_t i = 0; i < m; ++i)
        add_scaled(out.g, d[i].g, prefix[i] * suffix[i], n);
      check_finite(out.v, e);
      return out;
    }
    case ExprKind::Power: {
      Dual b = dual_rec(*e.children()[0], x);
      const long long num = e.pow_num(), den = e.pow_den();
      Dual out;
      double dcoef;
      if (den == 1) {
        out.v = int_pow(b.v, num);
        dcoef = static_cast<double>(num) * int_pow(b.v, num - 1);
      } else {
        const double p = e.pow_exponent();
        if (b.v == 0 && p < 1)
          fail(ErrorCode::GradientSingularity,
               "derivative of " + describe_node(e) + " undefined at 0");
        out.v = std::pow(b.v, p);
        dcoef = p * std::pow(b.v, p - 1);
      }
      check_finite(out.v, e);
      out.g = std::move(b.g);
      scale_grad(out.g, dcoef);
      return out;
    }
    case ExprKind::Exp: {
      Dual a = dual_rec(*e.children()[0], x);
      Dual out{std::exp(a.v), std::move(a.g)};
      check_finite(out.v, e);
      scale_grad(out.g, out.v);
      return out;
    }
    case ExprKind::Affine: {
      Dual a = dual_rec(*e.children()[0], x);
      Dual out{e.scale() * a.v + e.shift(), std::move(a.g)};
      check_finite(out.v, e);
      scale_grad(out.g, e.scale());
      return out;
    }
  }
  fail(ErrorCode::InvalidInput, "corrupt expression node");
}

}  // namespace

double evaluate(const ExprPtr& e, const Point& at) {
  if (!e) fail(ErrorCode::InvalidInput, "null expression");
  return eval_rec(*e, at);
}

double evaluate_with_gradient(const ExprPtr& e, const Point& at, Point& grad) {
  if (!e) fail(ErrorCode::InvalidInput, "null expression");
  Dual d = dual_rec(*e, at);
  if (d.g.empty()) d.g.assign(at.size(), 0.0);
  for (double v : d.g)
    if (!std::isfinite(v))
      fail(ErrorCode::EvaluationOverflow, "non-finite gradient component");
  grad = std::move(d.g);
  return d.v;
}

Point gradient(const ExprPtr& e, const Point& at) {
  Point g;
  evaluate_with_gradient(e, at, g);
  return g;
}

CompiledExpr::CompiledExpr(const ExprPtr& root, std::size_t num_vars)
    : num_vars_(num_vars) {
  if (!root) fail(ErrorCode::InvalidInput, "null expression");
  std::unordered_map<const Expr*, int> seen;
  // iterative postorder so deep penalty sums cannot blow the call stack
  std::vector<std::pair<const Expr*, std::size_t>> stack{{root.get(), 0}};
  while (!stack.empty()) {
    auto& [e, next_child] = stack.back();
    if (seen.count(e)) {
      stack.pop_back();
      continue;
    }
    if (next_child < e->children().size()) {
      const Expr* child = e->children()[next_child].get();
      ++next_child;
      if (!seen.count(child)) stack.emplace_back(child, 0);
      continue;
    }
    Node n;
    n.kind = e->kind();
    switch (e->kind()) {
      case ExprKind::Constant: n.a = e->constant_value(); break;
      case ExprKind::Var:
        n.var = e->var_index();
        if (n.var < 0 || static_cast<std::size_t>(n.var) >= num_vars)
          fail(ErrorCode::DimensionMismatch,
               "expression references " + describe_node(*e) +
                   " beyond the declared variable count");
        break;
      case ExprKind::Power: n.num = e->pow_num(); n.den = e->pow_den(); break;
      case ExprKind::Affine: n.a = e->scale(); n.b = e->shift(); break;
      default: break;
    }
    n.children_begin = static_cast<int>(children_.size());
    n.children_count = static_cast<int>(e->children().size());
    for (const auto& k : e->children()) children_.push_back(seen.at(k.get()));
    seen.emplace(e, static_cast<int>(nodes_.size()));
    nodes_.push_back(n);
    stack.pop_back();
  }
}

double CompiledExpr::value(const Point& x, EvalWorkspace& ws) const {
  if (x.size() != num_vars_)
    fail(ErrorCode::DimensionMismatch, "point/variable count mismatch");
  auto& v = ws.values;
  v.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    const int* kids = children_.data() + n.children_begin;
    double out = 0;
    switch (n.kind) {
      case ExprKind::Constant: out = n.a; break;
      case ExprKind::Var: out = x[static_cast<std::size_t>(n.var)]; break;
      case ExprKind::Sum:
        for (int k = 0; k < n.children_count; ++k) out += v[static_cast<std::size_t>(kids[k])];
        break;
      case ExprKind::Product:
        out = 1;
        for (int k = 0; k < n.children_count; ++k) out *= v[static_cast<std::size_t>(kids[k])];
        break;
      case ExprKind::Power: {
        const double base = v[static_cast<std::size_t>(kids[0])];
        out = n.den == 1 ? int_pow(base, n.num)
                         : std::pow(base, static_cast<double>(n.num) /
                                              static_cast<double>(n.den));
        break;
      }
      case ExprKind::Exp: out = std::exp(v[static_cast<std::size_t>(kids[0])]); break;
      case ExprKind::Affine: out = n.a * v[static_cast<std::size_t>(kids[0])] + n.b; break;
    }
    if (!std::isfinite(out))
      fail(ErrorCode::EvaluationOverflow, "non-finite value in compiled expression");
    v[i] = out;
  }
  return v.back();
}

double CompiledExpr::value_and_gradient(const Point& x, Point& grad,
                                        EvalWorkspace& ws) const {
  if (x.size() != num_vars_)
    fail(ErrorCode::DimensionMismatch, "point/variable count mismatch");
  const std::size_t nv = num_vars_;
  auto& v = ws.values;
  auto& g = ws.grads;
  v.resize(nodes_.size());
  g.assign(nodes_.size() * nv, 0.0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    const int* kids = children_.data() + n.children_begin;
    double* gi = g.data() + i * nv;
    double out = 0;
    switch (n.kind) {
      case ExprKind::Constant: out = n.a; break;
      case ExprKind::Var:
        out = x[static_cast<std::size_t>(n.var)];
        gi[n.var] = 1.0;
        break;
      case ExprKind::Sum:
        for (int k = 0; k < n.children_count; ++k) {
          const auto c = static_cast<std::size_t>(kids[k]);
          out += v[c];
          const double* gc = g.data() + c * nv;
          for (std::size_t d = 0; d < nv; ++d) gi[d] += gc[d];
        }
        break;
      case ExprKind::Product: {
        const int m = n.children_count;
        double local[8];
        std::vector<double> spill;
        double* suffix = local;
        if (m > 8) {
          spill.resize(static_cast<std::size_t>(m));
          suffix = spill.data();
        }
        suffix[m - 1] = 1.0;
        for (int k = m - 2; k >= 0; --k)
          suffix[k] = suffix[k + 1] * v[static_cast<std::size_t>(kids[k + 1])];
        out = suffix[0] * v[static_cast<std::size_t>(kids[0])];
        double prefix = 1;
        for (int k = 0; k < m; ++k) {
          const auto c = static_cast<std::size_t>(kids[k]);
          const double w = prefix * suffix[k];
          if (w != 0) {
            const double* gc = g.data() + c * nv;
            for (std::size_t d = 0; d < nv; ++d) gi[d] += w * gc[d];
          }
          prefix *= v[c];
        }
        break;
      }
      case ExprKind::Power: {
        const auto c = static_cast<std::size_t>(kids[0]);
        const double base = v[c];
        double dcoef;
        if (n.den == 1) {
          out = int_pow(base, n.num);
          dcoef = static_cast<double>(n.num) * int_pow(base, n.num - 1);
        } else {
          const double p = static_cast<double>(n.num) / static_cast<double>(n.den);
          if (base == 0 && p < 1)
            fail(ErrorCode::GradientSingularity,
                 "derivative of fractional power undefined at 0");
          out = std::pow(base, p);
          dcoef = p * std::pow(base, p - 1);
        }
        const double* gc = g.data() + c * nv;
        for (std::size_t d = 0; d < nv; ++d) gi[d] = dcoef * gc[d];
        break;
      }
      case ExprKind::Exp: {
        const auto c = static_cast<std::size_t>(kids[0]);
        out = std::exp(v[c]);
        const double* gc = g.data() + c * nv;
        for (std::size_t d = 0; d < nv; ++d) gi[d] = out * gc[d];
        break;
      }
      case ExprKind::Affine: {
        const auto c = static_cast<std::size_t>(kids[0]);
        out = n.a * v[c] + n.b;
        const double* gc = g.data() + c * nv;
        for (std::size_t d = 0; d < nv; ++d) gi[d] = n.a * gc[d];
        break;
      }
    }
    if (!std::isfinite(out))
      fail(ErrorCode::EvaluationOverflow, "non-finite value in compiled expression");
    v[i] = out;
  }
  grad.assign(g.end() - static_cast<long>(nv), g.end());
  for (const double d : grad)
    if (!std::isfinite(d))
      fail(ErrorCode::EvaluationOverflow, "non-finite gradient component");
  return v.back();
}

namespace {

void collect_vars(const Expr& e, std::set<int>& out) {
  if (e.kind() == ExprKind::Var) out.insert(e.var_index());
  for (const auto& k : e.children()) collect_vars(*k, out);
}

}  // namespace

int max_var_index(const ExprPtr& e) {
  std::set<int> vars;
  collect_vars(*e, vars);
  return vars.empty() ? -1 : *vars.rbegin();
}

std::vector<int> variables_of(const ExprPtr& e) {
  std::set<int> vars;
  collect_vars(*e, vars);
  return {vars.begin(), vars.end()};
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind() != b->kind()) return false;
  switch (a->kind()) {
    case ExprKind::Constant:
      if (a->constant_value() != b->constant_value()) return false;
      break;
    case ExprKind::Var:
      if (a->var_index() != b->var_index()) return false;
      break;
    case ExprKind::Power:
      if (a->pow_num() != b->pow_num() || a->pow_den() != b->pow_den()) return false;
      break;
    case ExprKind::Affine:
      if (a->scale() != b->scale() || a->shift() != b->shift()) return false;
      break;
    default:
      break;
  }
  const auto& ka = a->children();
  const auto& kb = b->children();
  if (ka.size() != kb.size()) return false;
  for (std::size_t i = 0; i < ka.size(); ++i)
    if (!structurally_equal(ka[i], kb[i])) return false;
  return true;
}

namespace {

std::string number_to_string(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void prefix_rec(const Expr& e, const std::vector<std::string>& names,
                std::string& out) {
  switch (e.kind()) {
    case ExprKind::Constant:
      out += number_to_string(e.constant_value());
      return;
    case ExprKind::Var: {
      const auto i = static_cast<std::size_t>(e.var_index());
      if (i < names.size())
        out += names[i];
      else
        out += "x" + std::to_string(i);
      return;
    }
    case ExprKind::Sum:
    case ExprKind::Product: {
      out += e.kind() == ExprKind::Sum ? "(+" : "(*";
      for (const auto& k : e.children()) {
        out += ' ';
        prefix_rec(*k, names, out);
      }
      out += ')';
      return;
    }
    case ExprKind::Power:
      out += "(^ ";
      prefix_rec(*e.children()[0], names, out);
      out += ' ';
      out += std::to_string(e.pow_num());
      if (e.pow_den() != 1) {
        out += ' ';
        out += std::to_string(e.pow_den());
      }
      out += ')';
      return;
    case ExprKind::Exp:
      out += "(exp ";
      prefix_rec(*e.children()[0], names, out);
      out += ')';
      return;
    case ExprKind::Affine:
      out += "(affine ";
      out += number_to_string(e.scale());
      out += ' ';
      out += number_to_string(e.shift());
      out += ' ';
      prefix_rec(*e.children()[0], names, out);
      out += ')';
      return;
  }
}

struct Tokenizer {
  const std::string& text;
  std::size_t pos = 0;

  std::string next() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size()) return {};
    if (text[pos] == '(' || text[pos] == ')') return std::string(1, text[pos++]);
    std::size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
           text[pos] != '(' && text[pos] != ')')
      ++pos;
    return text.substr(start, pos - start);
  }
};

bool parse_number(const std::string& tok, double& out) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + tok.size() && !tok.empty();
}

long long parse_integer(const std::string& tok) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidInput, "expected integer exponent, got '" + tok + "'");
  }
}

ExprPtr parse_rec(Tokenizer& tz,
                  const std::unordered_map<std::string, int>& name_to_index,
                  const std::string& tok) {
  if (tok.empty()) fail(ErrorCode::InvalidInput, "unexpected end of expression");
  if (tok == ")") fail(ErrorCode::InvalidInput, "unexpected ')'");
  if (tok != "(") {
    double num;
    if (parse_number(tok, num)) return constant(num);
    auto it = name_to_index.find(tok);
    if (it == name_to_index.end())
      fail(ErrorCode::InvalidInput, "unknown variable '" + tok + "'");
    return var(it->second);
  }
  const std::string op = tz.next();
  std::vector<std::string> raw;
  std::vector<ExprPtr> args;
  for (;;) {
    const std::string t = tz.next();
    if (t.empty()) fail(ErrorCode::InvalidInput, "missing ')'");
    if (t == ")") break;
    if (op == "^" || op == "affine") {
      // heads with positional scalar arguments keep raw tokens
      if (t == "(") {
        args.push_back(parse_rec(tz, name_to_index, t));
        raw.emplace_back();
      } else {
        raw.push_back(t);
        args.push_back(nullptr);
      }
    } else {
      args.push_back(parse_rec(tz, name_to_index, t));
    }
  }
  auto arg_expr = [&](std::size_t i) -> ExprPtr {
    if (args[i]) return args[i];
    double v;
    if (parse_number(raw[i], v)) return constant(v);
    auto it = name_to_index.find(raw[i]);
    if (it == name_to_index.end())
      fail(ErrorCode::InvalidInput, "unknown variable '" + raw[i] + "'");
    return var(it->second);
  };
  if (op == "+") {
    if (args.empty()) fail(ErrorCode::InvalidInput, "empty (+)");
    return sum(std::move(args));
  }
  if (op == "*") {
    if (args.empty()) fail(ErrorCode::InvalidInput, "empty (*)");
    return product(std::move(args));
  }
  if (op == "-") {
    if (args.empty()) fail(ErrorCode::InvalidInput, "empty (-)");
    if (args.size() == 1) return -args[0];
    ExprPtr acc = args[0];
    for (std::size_t i = 1; i < args.size(); ++i) acc = acc - args[i];
    return acc;
  }
  if (op == "neg") {
    if (args.size() != 1) fail(ErrorCode::InvalidInput, "(neg) takes one argument");
    return -args[0];
  }
  if (op == "exp") {
    if (args.size() != 1) fail(ErrorCode::InvalidInput, "(exp) takes one argument");
    return exp(args[0]);
  }
  if (op == "^") {
    if (args.size() != 2 && args.size() != 3)
      fail(ErrorCode::InvalidInput, "(^) takes base and integer exponent");
    if (!args[0]) args[0] = arg_expr(0);
    const long long num = parse_integer(raw[1]);
    const long long den = args.size() == 3 ? parse_integer(raw[2]) : 1;
    return pow(args[0], num, den);
  }
  if (op == "affine") {
    if (args.size() != 3)
      fail(ErrorCode::InvalidInput, "(affine) takes scale, shift, inner");
    double a, b;
    if (args[0] || args[1] || !parse_number(raw[0], a) || !parse_number(raw[1], b))
      fail(ErrorCode::InvalidInput, "(affine) scale and shift must be numbers");
    return affine(a, b, arg_expr(2));
  }
  fail(ErrorCode::InvalidInput, "unknown operator '" + op + "'");
}

}  // namespace

std::string to_prefix(const ExprPtr& e, const std::vector<std::string>& names) {
  if (!e) fail(ErrorCode::InvalidInput, "null expression");
  std::string out;
  prefix_rec(*e, names, out);
  return out;
}

ExprPtr parse_prefix(const std::string& text, const std::vector<std::string>& names) {
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < names.size(); ++i)
    index.emplace(names[i], static_cast<int>(i));
  Tokenizer tz{text};
  ExprPtr e = parse_rec(tz, index, tz.next());
  const std::string rest = tz.next();
  if (!rest.empty())
    fail(ErrorCode::InvalidInput, "trailing tokens after expression: '" + rest + "'");
  return e;
}

}  // namespace qhdalm
