#include "qhdalm/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "qhdalm/util.hpp"

namespace qhdalm {

void IsingModel::add_coupling(int a, int b, double v) {
  if (a == b) fail(ErrorCode::InvalidInput, "Ising diagonal must stay zero");
  coupling[static_cast<std::size_t>(a) * n + b] += v;
  coupling[static_cast<std::size_t>(b) * n + a] += v;
}

IsingModel make_ising(int n) {
  if (n < 1) fail(ErrorCode::InvalidInput, "Ising model needs at least one spin");
  IsingModel m;
  m.n = n;
  m.coupling.assign(static_cast<std::size_t>(n) * n, 0.0);
  m.field.assign(static_cast<std::size_t>(n), 0.0);
  return m;
}

namespace {

// Quadratic polynomial over spins accumulated in the objective sign
// convention: value(s) = c0 + sum c1_i s_i + sum_{i<j} c2_ij s_i s_j.
struct SpinPoly {
  explicit SpinPoly(int n)
      : n(n), c0(0), c1(static_cast<std::size_t>(n), 0.0),
        c2(static_cast<std::size_t>(n) * n, 0.0) {}

  int n;
  double c0;
  std::vector<double> c1;
  std::vector<double> c2;  // upper triangle used

  // w * b_i with b = (1+s)/2
  void add_linear_b(int i, double w) {
    c0 += w / 2;
    c1[static_cast<std::size_t>(i)] += w / 2;
  }

  // w * b_i * b_j; same-spin products collapse since b^2 = b
  void add_pair_b(int i, int j, double w) {
    if (i == j) {
      add_linear_b(i, w);
      return;
    }
    if (i > j) std::swap(i, j);
    c0 += w / 4;
    c1[static_cast<std::size_t>(i)] += w / 4;
    c1[static_cast<std::size_t>(j)] += w / 4;
    c2[static_cast<std::size_t>(i) * n + j] += w / 4;
  }

  IsingModel to_ising() const {
    IsingModel m = make_ising(n);
    m.offset = c0;
    for (int i = 0; i < n; ++i) m.field[static_cast<std::size_t>(i)] = -c1[static_cast<std::size_t>(i)];
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double w = c2[static_cast<std::size_t>(i) * n + j];
        if (w != 0) m.add_coupling(i, j, -w);
      }
    return m;
  }
};

// Tabulates every term of the form on its variable's grid levels.
struct Tables {
  std::vector<std::vector<double>> univariate;  // aligned with form.univariate
  std::vector<std::vector<double>> biv_a, biv_b;
};

std::vector<double> tabulate(const ExprPtr& fn, int v,
                             const std::vector<double>& levels,
                             std::size_t point_size) {
  Point x(point_size, 0.0);
  std::vector<double> out(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    x[static_cast<std::size_t>(v)] = levels[l];
    out[l] = evaluate(fn, x);
  }
  return out;
}

Tables tabulate_all(const SeparableForm& form, const std::vector<VariableLevels>& grids) {
  Tables t;
  const std::size_t nv = grids.size();
  auto check_var = [&](int v) {
    if (v < 0 || static_cast<std::size_t>(v) >= nv)
      fail(ErrorCode::DimensionMismatch, "term references an ungridded variable");
    if (grids[static_cast<std::size_t>(v)].values.size() < 2)
      fail(ErrorCode::InvalidInput, "each variable needs at least two levels");
  };
  for (const auto& u : form.univariate) {
    check_var(u.var);
    t.univariate.push_back(tabulate(u.fn, u.var, grids[static_cast<std::size_t>(u.var)].values, nv));
  }
  for (const auto& b : form.bivariate) {
    check_var(b.var_a);
    check_var(b.var_b);
    t.biv_a.push_back(tabulate(b.fn_a, b.var_a, grids[static_cast<std::size_t>(b.var_a)].values, nv));
    t.biv_b.push_back(tabulate(b.fn_b, b.var_b, grids[static_cast<std::size_t>(b.var_b)].values, nv));
  }
  return t;
}

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Per-block cumulative level-to-level variation of the encoded objective.
// Sizing A against the whole block variation (not just the largest single
// step) is what makes every invalid pattern cost more than the best valid
// one: an invalid pattern can displace at most the full variation of its
// block relative to the valid pattern with the same spin count.
double weight_from_tables(const SeparableForm& form,
                          const std::vector<VariableLevels>& grids,
                          const Tables& t) {
  std::vector<double> variation(grids.size(), 0.0);
  for (std::size_t k = 0; k < form.univariate.size(); ++k) {
    const auto& vals = t.univariate[k];
    auto& tv = variation[static_cast<std::size_t>(form.univariate[k].var)];
    for (std::size_t r = 1; r < vals.size(); ++r) tv += std::abs(vals[r] - vals[r - 1]);
  }
  for (std::size_t k = 0; k < form.bivariate.size(); ++k) {
    const auto& pa = t.biv_a[k];
    const auto& pb = t.biv_b[k];
    const double amax = max_abs(pa), bmax = max_abs(pb);
    auto& tva = variation[static_cast<std::size_t>(form.bivariate[k].var_a)];
    auto& tvb = variation[static_cast<std::size_t>(form.bivariate[k].var_b)];
    for (std::size_t r = 1; r < pa.size(); ++r) tva += std::abs(pa[r] - pa[r - 1]) * bmax;
    for (std::size_t r = 1; r < pb.size(); ++r) tvb += std::abs(pb[r] - pb[r - 1]) * amax;
  }
  const double worst = variation.empty()
                           ? 0.0
                           : *std::max_element(variation.begin(), variation.end());
  if (!std::isfinite(worst))
    fail(ErrorCode::EvaluationOverflow, "non-finite level table in encoding");
  return 2.0 * worst + 1.0;
}

}  // namespace

double penalty_weight(const SeparableForm& form,
                      const std::vector<VariableLevels>& grids) {
  return weight_from_tables(form, grids, tabulate_all(form, grids));
}

std::pair<IsingModel, Encoding> encode(const SeparableForm& form,
                                       const std::vector<VariableLevels>& grids) {
  if (grids.empty()) fail(ErrorCode::InvalidInput, "no variable grids supplied");

  Encoding enc;
  int spin = 0;
  for (const auto& g : grids) {
    if (g.values.size() < 2)
      fail(ErrorCode::InvalidInput, "each variable needs at least two levels");
    for (std::size_t l = 1; l < g.values.size(); ++l)
      if (g.values[l] < g.values[l - 1])
        fail(ErrorCode::InvalidInput, "levels must be non-decreasing");
    Encoding::Block blk;
    blk.spin_begin = spin;
    blk.spin_count = static_cast<int>(g.values.size()) - 1;
    blk.levels = g.values;
    spin += blk.spin_count;
    enc.blocks.push_back(std::move(blk));
  }
  enc.n_spins = spin;

  const Tables tables = tabulate_all(form, grids);
  enc.penalty_weight = weight_from_tables(form, grids, tables);

  SpinPoly poly(enc.n_spins);
  poly.c0 += form.constant;

  for (std::size_t k = 0; k < form.univariate.size(); ++k) {
    const auto& blk = enc.blocks[static_cast<std::size_t>(form.univariate[k].var)];
    const auto& vals = tables.univariate[k];
    poly.c0 += vals[0];
    for (int r = 1; r <= blk.spin_count; ++r)
      poly.add_linear_b(blk.spin_begin + r - 1,
                        vals[static_cast<std::size_t>(r)] - vals[static_cast<std::size_t>(r - 1)]);
  }

  for (std::size_t k = 0; k < form.bivariate.size(); ++k) {
    const auto& blk_a = enc.blocks[static_cast<std::size_t>(form.bivariate[k].var_a)];
    const auto& blk_b = enc.blocks[static_cast<std::size_t>(form.bivariate[k].var_b)];
    const auto& pa = tables.biv_a[k];
    const auto& pb = tables.biv_b[k];
    poly.c0 += pa[0] * pb[0];
    for (int r = 1; r <= blk_a.spin_count; ++r)
      poly.add_linear_b(blk_a.spin_begin + r - 1,
                        (pa[static_cast<std::size_t>(r)] - pa[static_cast<std::size_t>(r - 1)]) * pb[0]);
    for (int u = 1; u <= blk_b.spin_count; ++u)
      poly.add_linear_b(blk_b.spin_begin + u - 1,
                        pa[0] * (pb[static_cast<std::size_t>(u)] - pb[static_cast<std::size_t>(u - 1)]));
    for (int r = 1; r <= blk_a.spin_count; ++r) {
      const double da =
          pa[static_cast<std::size_t>(r)] - pa[static_cast<std::size_t>(r - 1)];
      if (da == 0) continue;
      for (int u = 1; u <= blk_b.spin_count; ++u) {
        const double db =
            pb[static_cast<std::size_t>(u)] - pb[static_cast<std::size_t>(u - 1)];
        if (db == 0) continue;
        poly.add_pair_b(blk_a.spin_begin + r - 1, blk_b.spin_begin + u - 1, da * db);
      }
    }
  }

  // Domain-wall penalty: each (+1 after -1) adjacency inside a block costs A.
  const double a = enc.penalty_weight;
  for (const auto& blk : enc.blocks) {
    for (int r = 0; r + 1 < blk.spin_count; ++r) {
      const int i = blk.spin_begin + r;
      const int j = i + 1;
      // A * (1 - s_i)(1 + s_j) / 4
      poly.c0 += a / 4;
      poly.c1[static_cast<std::size_t>(i)] -= a / 4;
      poly.c1[static_cast<std::size_t>(j)] += a / 4;
      poly.c2[static_cast<std::size_t>(i) * poly.n + j] -= a / 4;
    }
  }

  return {poly.to_ising(), std::move(enc)};
}

std::pair<IsingModel, Encoding> encode(const QuadraticSurrogate& q,
                                       const std::vector<VariableLevels>& grids) {
  return encode(separable_form(q), grids);
}

std::pair<IsingModel, Encoding> encode(const std::optional<SeparableForm>& form,
                                       const std::vector<VariableLevels>& grids) {
  if (!form)
    fail(ErrorCode::Routing,
         "objective is not separable+bivariate; build a quadratic_model "
         "surrogate and encode that instead");
  return encode(*form, grids);
}

Point decode(const SpinConfig& spins, const Encoding& enc) {
  if (static_cast<int>(spins.size()) != enc.n_spins)
    fail(ErrorCode::DimensionMismatch, "spin configuration size mismatch");
  Point x(enc.blocks.size());
  for (std::size_t v = 0; v < enc.blocks.size(); ++v) {
    const auto& blk = enc.blocks[v];
    int level = 0;
    for (int r = 0; r < blk.spin_count; ++r)
      if (spins[static_cast<std::size_t>(blk.spin_begin + r)] > 0) ++level;
    x[v] = blk.levels[static_cast<std::size_t>(level)];
  }
  return x;
}

bool valid_pattern(const SpinConfig& spins, const Encoding& enc) {
  if (static_cast<int>(spins.size()) != enc.n_spins) return false;
  for (const auto& blk : enc.blocks)
    for (int r = 0; r + 1 < blk.spin_count; ++r)
      if (spins[static_cast<std::size_t>(blk.spin_begin + r)] < 0 &&
          spins[static_cast<std::size_t>(blk.spin_begin + r + 1)] > 0)
        return false;
  return true;
}

QuadraticSurrogate quadratic_model(const NlpProblem& p, const Point& center) {
  if (!p.box_only())
    fail(ErrorCode::InvalidInput, "surrogate expects a box-only problem");
  if (center.size() != p.num_vars())
    fail(ErrorCode::DimensionMismatch, "center/variable count mismatch");
  if (!inside_box(p, center, 1e-12))
    fail(ErrorCode::InvalidInput, "surrogate center must lie inside the box");

  const std::size_t n = p.num_vars();
  QuadraticSurrogate q;
  q.center = center;
  q.value = evaluate_with_gradient(p.objective, center, q.grad);
  q.hessian.assign(n * n, 0.0);

  Point xp = center, xm = center, gp, gm;
  for (std::size_t i = 0; i < n; ++i) {
    const double width = p.variables[i].ub - p.variables[i].lb;
    const double h = std::max(1e-4 * width, 1e-8);
    xp[i] = center[i] + h;
    xm[i] = center[i] - h;
    evaluate_with_gradient(p.objective, xp, gp);
    evaluate_with_gradient(p.objective, xm, gm);
    for (std::size_t r = 0; r < n; ++r) {
      const double v = (gp[r] - gm[r]) / (2 * h);
      if (!std::isfinite(v))
        fail(ErrorCode::Surrogate, "non-finite Hessian entry in quadratic model");
      q.hessian[r * n + i] = v;
    }
    xp[i] = center[i];
    xm[i] = center[i];
  }
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r + 1; c < n; ++c) {
      const double sym = 0.5 * (q.hessian[r * n + c] + q.hessian[c * n + r]);
      q.hessian[r * n + c] = q.hessian[c * n + r] = sym;
    }
  return q;
}

SeparableForm separable_form(const QuadraticSurrogate& q) {
  const std::size_t n = q.center.size();
  SeparableForm form;
  form.constant = q.value;
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = q.grad[i];
    const double hii = q.hessian[i * n + i];
    if (gi == 0 && hii == 0) continue;
    const ExprPtr d = affine(1.0, -q.center[i], var(static_cast<int>(i)));
    ExprPtr fn = gi * d;
    if (hii != 0) fn = fn + (0.5 * hii) * pow(d, 2);
    form.univariate.push_back({static_cast<int>(i), fn});
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double hij = q.hessian[i * n + j];
      if (hij == 0) continue;
      form.bivariate.push_back(
          {static_cast<int>(i), static_cast<int>(j),
           hij * affine(1.0, -q.center[i], var(static_cast<int>(i))),
           affine(1.0, -q.center[j], var(static_cast<int>(j)))});
    }
  return form;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_edge_list(std::ostream& os, const IsingModel& ising) {
  os << ising.n << "\n";
  for (int i = 0; i < ising.n; ++i)
    for (int j = i + 1; j < ising.n; ++j)
      if (ising.j(i, j) != 0)
        os << i << " " << j << " " << fmt(ising.j(i, j)) << "\n";
  for (int i = 0; i < ising.n; ++i)
    if (ising.field[static_cast<std::size_t>(i)] != 0)
      os << i << " " << fmt(ising.field[static_cast<std::size_t>(i)]) << "\n";
}

IsingModel read_edge_list(std::istream& is) {
  std::string line;
  int n = -1;
  IsingModel m;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) tok.push_back(t);
    if (tok.empty()) continue;
    try {
      if (n < 0) {
        if (tok.size() != 1) throw std::invalid_argument("expected spin count");
        n = std::stoi(tok[0]);
        m = make_ising(n);
      } else if (tok.size() == 3) {
        const int i = std::stoi(tok[0]), j = std::stoi(tok[1]);
        if (i < 0 || j < 0 || i >= n || j >= n || i == j)
          throw std::invalid_argument("coupling index out of range");
        m.add_coupling(i, j, std::stod(tok[2]));
      } else if (tok.size() == 2) {
        const int i = std::stoi(tok[0]);
        if (i < 0 || i >= n) throw std::invalid_argument("field index out of range");
        m.add_field(i, std::stod(tok[1]));
      } else {
        throw std::invalid_argument("expected 'i j J' or 'i h'");
      }
    } catch (const std::exception& e) {
      fail(ErrorCode::Io,
           "edge list line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (n < 0) fail(ErrorCode::Io, "empty edge-list file");
  return m;
}

IsingModel load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open Ising file: " + path);
  return read_edge_list(in);
}

}  // namespace qhdalm
