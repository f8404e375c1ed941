#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "qhdalm/expr.hpp"

namespace qhdalm {

// Tensor-product grid over a box, row-major with dimension 0 slowest.
struct Grid {
  int dim = 1;
  int points_per_dim = 2;
  std::vector<std::pair<double, double>> bounds;

  std::size_t size() const;
  double step(int d) const;
  double coord(int d, int i) const;
  Point point_at(std::size_t flat) const;
};

// Validates N >= 2, 1 <= d <= 3, N^d <= 2^22, finite bounds with L < U.
Grid make_grid(int points_per_dim, std::vector<std::pair<double, double>> bounds);

struct WaveState {
  std::vector<std::complex<double>> amp;
  double norm_sq() const;
};

WaveState uniform_state(const Grid& grid);

// H(t) = e^{kinetic_rate * t} (-1/2 L) + e^{potential_rate * t} F
struct QhdSchedule {
  double kinetic_rate = 0;    // < 0: kinetic term decays
  double potential_rate = 0;  // > 0: potential term grows
  double total_time = 10.0;
  double dt = 1e-3;
  long long steps() const;
};

QhdSchedule default_schedule(double total_time = 10.0, double dt = 1e-3,
                             double decades = 3.0);

// F[idx] = f(grid point idx); diagonal potential operator.
std::vector<double> discretize_potential(const ExprPtr& f, const Grid& grid);

// Kronecker-sum second-order central difference with Dirichlet boundaries,
// scaled by 1/h^2 per dimension.
void apply_laplacian(const Grid& grid, const std::complex<double>* in,
                     std::complex<double>* out);

// One Strang split step with frozen coefficients: half potential phase, full
// kinetic step (Lanczos expansion of the propagator), half potential phase.
// dt may be negative (time reversal).
void strang_step(WaveState& state, const std::vector<double>& potential,
                 const Grid& grid, double kinetic_coef, double potential_coef,
                 double dt);

struct EvolveRecord {
  double t = 0;
  double norm_sq = 0;
  double f_expectation = 0;
  Point x_expectation;
};

// Full schedule with coefficients frozen at mid-step times. No
// renormalization is applied; norm conservation is checked each step.
WaveState evolve(WaveState psi0, const std::vector<double>& potential,
                 const Grid& grid, const QhdSchedule& sched,
                 std::vector<EvolveRecord>* trace = nullptr);

// Draws grid points with probability |psi|^2.
std::vector<Point> sample(const WaveState& psi, const Grid& grid, int count,
                          std::uint64_t seed);

std::vector<std::size_t> sample_indices(const WaveState& psi, int count,
                                        std::uint64_t seed);

}  // namespace qhdalm
