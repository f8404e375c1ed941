#include "qhdalm/qhd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qhdalm/util.hpp"

namespace qhdalm {

std::size_t Grid::size() const {
  std::size_t s = 1;
  for (int d = 0; d < dim; ++d) s *= static_cast<std::size_t>(points_per_dim);
  return s;
}

double Grid::step(int d) const {
  return (bounds[static_cast<std::size_t>(d)].second -
          bounds[static_cast<std::size_t>(d)].first) /
         static_cast<double>(points_per_dim - 1);
}

double Grid::coord(int d, int i) const {
  return bounds[static_cast<std::size_t>(d)].first + step(d) * static_cast<double>(i);
}

Point Grid::point_at(std::size_t flat) const {
  Point x(static_cast<std::size_t>(dim));
  for (int d = dim - 1; d >= 0; --d) {
    const auto n = static_cast<std::size_t>(points_per_dim);
    x[static_cast<std::size_t>(d)] = coord(d, static_cast<int>(flat % n));
    flat /= n;
  }
  return x;
}

Grid make_grid(int points_per_dim, std::vector<std::pair<double, double>> bounds) {
  if (points_per_dim < 2) fail(ErrorCode::InvalidInput, "grid needs at least 2 points per dimension");
  if (bounds.empty() || bounds.size() > 3)
    fail(ErrorCode::InvalidInput, "dense grid supports 1 to 3 dimensions");
  for (const auto& [lo, hi] : bounds) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo >= hi)
      fail(ErrorCode::InvalidInput, "grid bounds must be finite with L < U");
  }
  double total = 1;
  for (std::size_t d = 0; d < bounds.size(); ++d) total *= points_per_dim;
  if (total > static_cast<double>(1u << 22))
    fail(ErrorCode::InvalidInput, "grid exceeds the 2^22 point memory guard");
  Grid g;
  g.dim = static_cast<int>(bounds.size());
  g.points_per_dim = points_per_dim;
  g.bounds = std::move(bounds);
  return g;
}

double WaveState::norm_sq() const {
  double s = 0;
  for (const auto& a : amp) s += std::norm(a);
  return s;
}

WaveState uniform_state(const Grid& grid) {
  WaveState psi;
  const std::size_t n = grid.size();
  psi.amp.assign(n, std::complex<double>(1.0 / std::sqrt(static_cast<double>(n)), 0.0));
  return psi;
}

long long QhdSchedule::steps() const {
  return std::llround(total_time / dt);
}

QhdSchedule default_schedule(double total_time, double dt, double decades) {
  QhdSchedule s;
  s.total_time = total_time;
  s.dt = dt;
  const double rate = decades * std::log(10.0) / total_time;
  s.kinetic_rate = -rate;
  s.potential_rate = rate;
  return s;
}

std::vector<double> discretize_potential(const ExprPtr& f, const Grid& grid) {
  if (max_var_index(f) >= grid.dim)
    fail(ErrorCode::DimensionMismatch,
         "potential references variables beyond the grid dimensions");
  const std::size_t n = grid.size();
  std::vector<double> pot(n);
  const CompiledExpr compiled(f, static_cast<std::size_t>(grid.dim));
  EvalWorkspace ws;
  for (std::size_t idx = 0; idx < n; ++idx) {
    const Point x = grid.point_at(idx);
    try {
      pot[idx] = compiled.value(x, ws);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "potential overflow at grid point (";
      for (std::size_t d = 0; d < x.size(); ++d) os << (d ? ", " : "") << x[d];
      os << "): " << e.what();
      fail(ErrorCode::EvaluationOverflow, os.str());
    }
  }
  return pot;
}

void apply_laplacian(const Grid& grid, const std::complex<double>* in,
                     std::complex<double>* out) {
  const std::size_t n = grid.size();
  const auto npts = static_cast<std::size_t>(grid.points_per_dim);
  std::fill(out, out + n, std::complex<double>(0.0, 0.0));
  std::size_t stride = n;
  for (int d = 0; d < grid.dim; ++d) {
    stride /= npts;
    const double inv_h2 = 1.0 / (grid.step(d) * grid.step(d));
    for (std::size_t idx = 0; idx < n; ++idx) {
      const std::size_t pos = (idx / stride) % npts;
      std::complex<double> acc = -2.0 * in[idx];
      if (pos > 0) acc += in[idx - stride];
      if (pos + 1 < npts) acc += in[idx + stride];
      out[idx] += inv_h2 * acc;
    }
  }
}

namespace {

// Symmetric tridiagonal eigensolver (implicit-shift QL). d holds the
// diagonal, sub the subdiagonal; on return d has the eigenvalues and the
// row-major z the eigenvectors by column.
void tridiag_eigen(std::vector<double>& d, std::vector<double>& sub,
                   std::vector<double>& z) {
  const int n = static_cast<int>(d.size());
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i + 1 < n; ++i) e[static_cast<std::size_t>(i)] = sub[static_cast<std::size_t>(i)];
  z.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i) * n + i] = 1.0;

  const double eps = std::numeric_limits<double>::epsilon();
  double f = 0, tst1 = 0;
  for (int l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[static_cast<std::size_t>(l)]) +
                              std::abs(e[static_cast<std::size_t>(l)]));
    int m = l;
    while (m < n && std::abs(e[static_cast<std::size_t>(m)]) > eps * tst1) ++m;
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > 60)
          fail(ErrorCode::StepSize, "tridiagonal eigensolver failed to converge");
        double g = d[static_cast<std::size_t>(l)];
        double p = (d[static_cast<std::size_t>(l) + 1] - g) /
                   (2.0 * e[static_cast<std::size_t>(l)]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[static_cast<std::size_t>(l)] = e[static_cast<std::size_t>(l)] / (p + r);
        d[static_cast<std::size_t>(l) + 1] = e[static_cast<std::size_t>(l)] * (p + r);
        const double dl1 = d[static_cast<std::size_t>(l) + 1];
        double h = g - d[static_cast<std::size_t>(l)];
        for (int i = l + 2; i < n; ++i) d[static_cast<std::size_t>(i)] -= h;
        f += h;
        p = d[static_cast<std::size_t>(m)];
        double c = 1.0, c2 = c, c3 = c;
        const double el1 = e[static_cast<std::size_t>(l) + 1];
        double s = 0.0, s2 = 0.0;
        for (int i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[static_cast<std::size_t>(i)];
          h = c * p;
          r = std::hypot(p, e[static_cast<std::size_t>(i)]);
          e[static_cast<std::size_t>(i) + 1] = s * r;
          s = e[static_cast<std::size_t>(i)] / r;
          c = p / r;
          p = c * d[static_cast<std::size_t>(i)] - s * g;
          d[static_cast<std::size_t>(i) + 1] = h + s * (c * g + s * d[static_cast<std::size_t>(i)]);
          for (int k = 0; k < n; ++k) {
            h = z[static_cast<std::size_t>(k) * n + i + 1];
            z[static_cast<std::size_t>(k) * n + i + 1] =
                s * z[static_cast<std::size_t>(k) * n + i] + c * h;
            z[static_cast<std::size_t>(k) * n + i] =
                c * z[static_cast<std::size_t>(k) * n + i] - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[static_cast<std::size_t>(l)] / dl1;
        e[static_cast<std::size_t>(l)] = s * p;
        d[static_cast<std::size_t>(l)] = c * p;
      } while (std::abs(e[static_cast<std::size_t>(l)]) > eps * tst1);
    }
    d[static_cast<std::size_t>(l)] += f;
    e[static_cast<std::size_t>(l)] = 0.0;
  }
}

// Expansion coefficients of exp(-i theta T_m) e1 in the Lanczos basis and
// the a-posteriori tail estimate beta_m * |last coefficient|.
double expansion_coeffs(const std::vector<double>& alpha,
                        const std::vector<double>& beta, double theta,
                        double beta_next,
                        std::vector<std::complex<double>>& coeffs) {
  const int m = static_cast<int>(alpha.size());
  std::vector<double> evals = alpha;
  std::vector<double> sub = beta;
  std::vector<double> vecs;
  tridiag_eigen(evals, sub, vecs);
  coeffs.assign(static_cast<std::size_t>(m), {0.0, 0.0});
  for (int j = 0; j < m; ++j) {
    const std::complex<double> phase =
        std::polar(1.0, -theta * evals[static_cast<std::size_t>(j)]);
    const double q0 = vecs[static_cast<std::size_t>(j)];
    for (int k = 0; k < m; ++k)
      coeffs[static_cast<std::size_t>(k)] +=
          vecs[static_cast<std::size_t>(k) * static_cast<std::size_t>(m) +
               static_cast<std::size_t>(j)] *
          q0 * phase;
  }
  return beta_next * std::abs(coeffs[static_cast<std::size_t>(m - 1)]);
}

// One Lanczos approximation of psi <- exp(-i theta B) psi with B = -1/2 L.
// Returns false (psi untouched) when the subspace cannot resolve the
// propagator, in which case the caller halves theta.
bool kinetic_step_once(WaveState& psi, const Grid& grid, double theta) {
  const std::size_t n = psi.amp.size();
  const int m_max = static_cast<int>(std::min<std::size_t>(n, 64));

  const double beta0 = std::sqrt(psi.norm_sq());
  if (beta0 == 0) return true;

  // spectral radius bound of B for an a-priori basis size guess
  double radius = 0;
  for (int d = 0; d < grid.dim; ++d) radius += 2.0 / (grid.step(d) * grid.step(d));
  const int m_start = std::clamp(
      static_cast<int>(std::ceil(0.7 * std::abs(theta) * radius)) + 4, 4, m_max);

  std::vector<std::vector<std::complex<double>>> basis;
  basis.emplace_back(n);
  for (std::size_t i = 0; i < n; ++i) basis[0][i] = psi.amp[i] / beta0;

  std::vector<double> alpha, beta;
  std::vector<std::complex<double>> w(n), lap(n);
  std::vector<std::complex<double>> coeffs;

  bool converged = false;
  int m = 0;
  while (m < m_max) {
    apply_laplacian(grid, basis[static_cast<std::size_t>(m)].data(), lap.data());
    for (std::size_t i = 0; i < n; ++i) w[i] = -0.5 * lap[i];
    double a = 0;
    for (std::size_t i = 0; i < n; ++i)
      a += (std::conj(basis[static_cast<std::size_t>(m)][i]) * w[i]).real();
    alpha.push_back(a);
    for (std::size_t i = 0; i < n; ++i) w[i] -= a * basis[static_cast<std::size_t>(m)][i];
    if (m > 0)
      for (std::size_t i = 0; i < n; ++i)
        w[i] -= beta[static_cast<std::size_t>(m - 1)] * basis[static_cast<std::size_t>(m - 1)][i];
    double b = 0;
    for (std::size_t i = 0; i < n; ++i) b += std::norm(w[i]);
    b = std::sqrt(b);
    ++m;

    if (b < 1e-13 * std::max(1.0, std::abs(a))) {  // happy breakdown: exact subspace
      expansion_coeffs(alpha, beta, theta, 0.0, coeffs);
      converged = true;
      break;
    }
    if (m >= m_start) {
      const double tail = expansion_coeffs(alpha, beta, theta, b, coeffs);
      if (tail < 1e-13) {
        converged = true;
        break;
      }
    }
    if (m == m_max) break;
    beta.push_back(b);
    basis.emplace_back(n);
    for (std::size_t i = 0; i < n; ++i) basis.back()[i] = w[i] / b;
  }
  if (!converged) return false;

  for (std::size_t i = 0; i < n; ++i) {
    std::complex<double> acc(0.0, 0.0);
    for (int k = 0; k < m && k < static_cast<int>(coeffs.size()); ++k)
      acc += coeffs[static_cast<std::size_t>(k)] * basis[static_cast<std::size_t>(k)][i];
    psi.amp[i] = beta0 * acc;
  }
  return true;
}

void kinetic_step(WaveState& psi, const Grid& grid, double theta, int depth = 0) {
  if (theta == 0) return;
  if (kinetic_step_once(psi, grid, theta)) return;
  if (depth >= 24)
    fail(ErrorCode::StepSize, "kinetic propagator failed to converge; reduce dt");
  kinetic_step(psi, grid, theta * 0.5, depth + 1);
  kinetic_step(psi, grid, theta * 0.5, depth + 1);
}

}  // namespace

void strang_step(WaveState& state, const std::vector<double>& potential,
                 const Grid& grid, double kinetic_coef, double potential_coef,
                 double dt) {
  if (state.amp.size() != grid.size() || potential.size() != grid.size())
    fail(ErrorCode::DimensionMismatch, "state/potential/grid size mismatch");
  const double half = 0.5 * dt * potential_coef;
  for (std::size_t i = 0; i < state.amp.size(); ++i)
    state.amp[i] *= std::polar(1.0, -half * potential[i]);
  kinetic_step(state, grid, dt * kinetic_coef);
  for (std::size_t i = 0; i < state.amp.size(); ++i)
    state.amp[i] *= std::polar(1.0, -half * potential[i]);
}

WaveState evolve(WaveState psi0, const std::vector<double>& potential,
                 const Grid& grid, const QhdSchedule& sched,
                 std::vector<EvolveRecord>* trace) {
  if (sched.dt <= 0) fail(ErrorCode::InvalidInput, "schedule requires dt > 0");
  const long long steps = sched.steps();
  if (steps < 0 || std::abs(static_cast<double>(steps) * sched.dt - sched.total_time) >
                       1e-9 * std::max(1.0, sched.total_time))
    fail(ErrorCode::InvalidInput, "total_time must be an integer number of steps");
  if (std::abs(psi0.norm_sq() - 1.0) > 1e-6)
    fail(ErrorCode::InvalidInput, "initial state must be normalized");

  WaveState psi = std::move(psi0);
  double prev_norm = psi.norm_sq();
  for (long long k = 0; k < steps; ++k) {
    const double t_mid = (static_cast<double>(k) + 0.5) * sched.dt;
    const double kin = std::exp(sched.kinetic_rate * t_mid);
    const double pot = std::exp(sched.potential_rate * t_mid);
    strang_step(psi, potential, grid, kin, pot, sched.dt);
    const double norm = psi.norm_sq();
    if (std::abs(norm - prev_norm) > 1e-6)
      fail(ErrorCode::StepSize,
           "norm drift exceeded 1e-6 in one step; reduce dt");
    prev_norm = norm;
    if (trace) {
      EvolveRecord rec;
      rec.t = static_cast<double>(k + 1) * sched.dt;
      rec.norm_sq = norm;
      rec.x_expectation.assign(static_cast<std::size_t>(grid.dim), 0.0);
      double fex = 0;
      for (std::size_t i = 0; i < psi.amp.size(); ++i) {
        const double p = std::norm(psi.amp[i]);
        fex += p * potential[i];
        std::size_t rest = i;
        for (int d = grid.dim - 1; d >= 0; --d) {
          const auto npts = static_cast<std::size_t>(grid.points_per_dim);
          rec.x_expectation[static_cast<std::size_t>(d)] +=
              p * grid.coord(d, static_cast<int>(rest % npts));
          rest /= npts;
        }
      }
      rec.f_expectation = fex;
      trace->push_back(std::move(rec));
    }
  }
  return psi;
}

std::vector<std::size_t> sample_indices(const WaveState& psi, int count,
                                        std::uint64_t seed) {
  const std::size_t n = psi.amp.size();
  if (n == 0) fail(ErrorCode::InvalidInput, "empty state");
  std::vector<double> cdf(n);
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += std::norm(psi.amp[i]);
    cdf[i] = acc;
  }
  const double total = acc;
  Rng rng(seed);
  std::vector<std::size_t> out(static_cast<std::size_t>(count));
  for (auto& idx : out) {
    const double u = rng.uniform() * total;
    idx = static_cast<std::size_t>(
        std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (idx >= n) idx = n - 1;
  }
  return out;
}

std::vector<Point> sample(const WaveState& psi, const Grid& grid, int count,
                          std::uint64_t seed) {
  if (psi.amp.size() != grid.size())
    fail(ErrorCode::DimensionMismatch, "state/grid size mismatch");
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (const auto idx : sample_indices(psi, count, seed))
    pts.push_back(grid.point_at(idx));
  return pts;
}

}  // namespace qhdalm
