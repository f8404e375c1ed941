#pragma once

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "qhdalm/problem.hpp"

namespace qhdalm {

// Energy convention, s in {-1,+1}^n:
//   E(s) = -1/2 sum_ij J_ij s_i s_j - sum_i h_i s_i + offset
struct IsingModel {
  int n = 0;
  std::vector<double> coupling;  // row-major n*n, symmetric, zero diagonal
  std::vector<double> field;
  double offset = 0;

  double j(int a, int b) const { return coupling[static_cast<std::size_t>(a) * n + b]; }
  void add_coupling(int a, int b, double v);
  void add_field(int a, double v) { field[static_cast<std::size_t>(a)] += v; }
};

IsingModel make_ising(int n);

using SpinConfig = std::vector<int>;  // entries are -1 or +1

// Domain-wall (unary) block per variable: R levels use R-1 ordered spins;
// the level is the count of +1 spins. Valid patterns are +1^k (-1)^(R-1-k).
struct Encoding {
  struct Block {
    int spin_begin = 0;
    int spin_count = 0;            // R - 1
    std::vector<double> levels;    // R grid coordinates, non-decreasing
  };
  std::vector<Block> blocks;       // one per problem variable
  double penalty_weight = 1;
  int n_spins = 0;
};

struct VariableLevels {
  std::vector<double> values;  // size >= 2
};

// Second-order Taylor model at `center`; gradients by forward mode, Hessian
// by central differences of gradients. Separable+bivariate by construction.
struct QuadraticSurrogate {
  Point center;
  double value = 0;
  Point grad;
  std::vector<double> hessian;  // row-major n*n, symmetrized
};

QuadraticSurrogate quadratic_model(const NlpProblem& box_only, const Point& center);
SeparableForm separable_form(const QuadraticSurrogate& q);

// Penalty weight sized so every invalid spin pattern costs more than any
// objective rearrangement it could buy; see encode() notes.
double penalty_weight(const SeparableForm& form,
                      const std::vector<VariableLevels>& grids);

std::pair<IsingModel, Encoding> encode(const SeparableForm& form,
                                       const std::vector<VariableLevels>& grids);
std::pair<IsingModel, Encoding> encode(const QuadraticSurrogate& q,
                                       const std::vector<VariableLevels>& grids);
// Throws a routing error pointing at quadratic_model when form is nullopt.
std::pair<IsingModel, Encoding> encode(const std::optional<SeparableForm>& form,
                                       const std::vector<VariableLevels>& grids);

// Majority repair: the level is the +1 count regardless of order, so any
// spin configuration decodes to an in-box point.
Point decode(const SpinConfig& spins, const Encoding& enc);

bool valid_pattern(const SpinConfig& spins, const Encoding& enc);

// Plain-text interchange: first line n, then "i j J_ij" coupling lines and
// "i h_i" field lines. The offset is not part of the format.
void write_edge_list(std::ostream& os, const IsingModel& ising);
IsingModel read_edge_list(std::istream& is);
IsingModel load_edge_list(const std::string& path);

}  // namespace qhdalm
