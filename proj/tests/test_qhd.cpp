#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>

#include "dense_oracle.hpp"

#include "qhdalm/alm.hpp"
#include "qhdalm/benchmarks.hpp"
#include "qhdalm/hydrogen.hpp"
#include "qhdalm/qhd.hpp"
#include "test_util.hpp"

using namespace qhdalm;

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(make_grid(1, {{0.0, 1.0}}), Error);
  CHECK_THROWS_AS(make_grid(4, {}), Error);
  CHECK_THROWS_AS(make_grid(4, {{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}), Error);
  CHECK_THROWS_AS(make_grid(4, {{1.0, 0.0}}), Error);
  CHECK_THROWS_AS(make_grid(2048, {{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}), Error);  // 2^33
  const Grid g = make_grid(3, {{0.0, 1.0}, {-1.0, 1.0}});
  CHECK(g.size() == 9);
  CHECK(g.step(0) == doctest::Approx(0.5));
  CHECK(g.step(1) == doctest::Approx(1.0));
  const Point p = g.point_at(5);  // (1, 2) -> (0.5, 1.0)
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(1.0));
}

TEST_CASE("discretize_potential tabulates f on the grid") {
  const Grid g = make_grid(3, {{0.0, 1.0}});
  const auto zero = discretize_potential(constant(0.0), g);
  for (double v : zero) CHECK(v == 0.0);
  const auto sq = discretize_potential(pow(var(0), 2), g);
  CHECK(sq[0] == doctest::Approx(0.0));
  CHECK(sq[1] == doctest::Approx(0.25));
  CHECK(sq[2] == doctest::Approx(1.0));

  // multi-dimensional tabulation matches pointwise evaluation
  const Grid g2 = make_grid(5, {{0.0, 2.0}, {-1.0, 1.0}});
  const ExprPtr f = sum({pow(var(0), 2), product({var(0), var(1)}), exp(0.3 * var(1))});
  const auto pot = discretize_potential(f, g2);
  for (std::size_t i = 0; i < g2.size(); ++i)
    CHECK(pot[i] == doctest::Approx(evaluate(f, g2.point_at(i))).epsilon(1e-14));
}

namespace {

// Rebuilds a tree with each variable replaced by the given expression.
ExprPtr substitute(const ExprPtr& e, const std::vector<ExprPtr>& repl) {
  switch (e->kind()) {
    case ExprKind::Constant: return e;
    case ExprKind::Var: return repl[static_cast<std::size_t>(e->var_index())];
    case ExprKind::Sum:
    case ExprKind::Product: {
      std::vector<ExprPtr> kids;
      for (const auto& k : e->children()) kids.push_back(substitute(k, repl));
      return e->kind() == ExprKind::Sum ? sum(std::move(kids)) : product(std::move(kids));
    }
    case ExprKind::Power:
      return pow(substitute(e->children()[0], repl), e->pow_num(), e->pow_den());
    case ExprKind::Exp: return exp(substitute(e->children()[0], repl));
    case ExprKind::Affine:
      return affine(e->scale(), e->shift(), substitute(e->children()[0], repl));
  }
  return e;
}

}  // namespace

TEST_CASE("scheduling AL restricted to two active variables tabulates pointwise") {
  // keep (p_el_0, lambda_0) free, pin every other coordinate at the box
  // midpoint, and tabulate the restricted tree on a 2D grid
  const HydrogenParams prm = with_horizon(default_hydrogen_params(), 1);
  const NlpProblem p = build(prm);
  const auto aug = build_augmented(p, zero_multipliers(p), initial_penalties(p, {}));
  const Point mid = box_midpoint(aug.problem);
  const HydrogenLayout lay{1, true};

  std::vector<ExprPtr> repl(aug.problem.num_vars());
  for (std::size_t i = 0; i < repl.size(); ++i) repl[i] = constant(mid[i]);
  repl[static_cast<std::size_t>(lay.p_el(0))] = var(0);
  repl[static_cast<std::size_t>(lay.lambda(0))] = var(1);
  const ExprPtr restricted = substitute(aug.problem.objective, repl);

  const Grid grid = make_grid(9, {{0.0, prm.electrolyzer_max_power}, {0.0, 100.0}});
  const auto pot = discretize_potential(restricted, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point gp = grid.point_at(i);
    Point full = mid;
    full[static_cast<std::size_t>(lay.p_el(0))] = gp[0];
    full[static_cast<std::size_t>(lay.lambda(0))] = gp[1];
    CHECK(pot[i] == doctest::Approx(evaluate(aug.problem.objective, full)).epsilon(1e-12));
  }
}

TEST_CASE("laplacian stencil rows and analytic eigenvalues") {
  const Grid g = make_grid(3, {{0.0, 1.0}});  // h = 0.5
  std::vector<std::complex<double>> in(3, 0.0), out(3);
  in[1] = 1.0;
  apply_laplacian(g, in.data(), out.data());
  CHECK(out[0].real() == doctest::Approx(4.0));   // 1/h^2
  CHECK(out[1].real() == doctest::Approx(-8.0));  // -2/h^2
  CHECK(out[2].real() == doctest::Approx(4.0));

  // constant vector maps to ~0 away from the boundary
  const Grid g64 = make_grid(64, {{0.0, 1.0}});
  std::vector<std::complex<double>> ones(64, 1.0), img(64);
  apply_laplacian(g64, ones.data(), img.data());
  for (int i = 1; i < 63; ++i) CHECK(std::abs(img[static_cast<std::size_t>(i)]) < 1e-9);

  // eigenvalues of the N=8 Dirichlet stencil: -(2/h^2)(1 - cos(k pi / (N+1)))
  const int n = 8;
  const Grid g8 = make_grid(n, {{0.0, 1.0}});
  const double h = g8.step(0);
  for (int k = 1; k <= n; ++k) {
    std::vector<std::complex<double>> v(static_cast<std::size_t>(n)), lv(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      v[static_cast<std::size_t>(i)] = std::sin(k * 3.14159265358979323846 * (i + 1) / (n + 1));
    apply_laplacian(g8, v.data(), lv.data());
    const double expect = -(2.0 / (h * h)) *
                          (1.0 - std::cos(k * 3.14159265358979323846 / (n + 1)));
    for (int i = 0; i < n; ++i)
      CHECK(lv[static_cast<std::size_t>(i)].real() ==
            doctest::Approx(expect * v[static_cast<std::size_t>(i)].real()).epsilon(1e-9));
  }
}

TEST_CASE("kronecker-sum structure on product states") {
  // L_d (u (x) v) = (L u) (x) v + u (x) (L v)
  const Grid g2 = make_grid(6, {{0.0, 1.0}, {0.0, 2.0}});
  const Grid gx = make_grid(6, {{0.0, 1.0}});
  const Grid gy = make_grid(6, {{0.0, 2.0}});
  Rng rng(8);
  std::vector<std::complex<double>> u(6), v(6);
  for (auto& z : u) z = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  for (auto& z : v) z = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  std::vector<std::complex<double>> lu(6), lv(6);
  apply_laplacian(gx, u.data(), lu.data());
  apply_laplacian(gy, v.data(), lv.data());
  std::vector<std::complex<double>> prod(36), lprod(36);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      prod[static_cast<std::size_t>(i * 6 + j)] =
          u[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)];
  apply_laplacian(g2, prod.data(), lprod.data());
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      const auto expect = lu[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)] +
                          u[static_cast<std::size_t>(i)] * lv[static_cast<std::size_t>(j)];
      CHECK(std::abs(lprod[static_cast<std::size_t>(i * 6 + j)] - expect) < 1e-12);
    }
}

TEST_CASE("zero potential, zero steps leaves the state unchanged") {
  const Grid g = make_grid(16, {{0.0, 1.0}});
  const auto pot = discretize_potential(constant(0.0), g);
  QhdSchedule sched = default_schedule(0.0, 1e-3);
  const WaveState psi0 = uniform_state(g);
  const WaveState psi = evolve(psi0, pot, g, sched);
  for (std::size_t i = 0; i < psi.amp.size(); ++i)
    CHECK(std::abs(psi.amp[i] - psi0.amp[i]) < 1e-15);
}

TEST_CASE("splitting matches the dense reference propagator (N=16, T=1)") {
  const Grid g = make_grid(16, {{0.0, 1.0}});
  Rng rng(5150);
  std::vector<double> pot(16);
  for (auto& v : pot) v = rng.uniform(0.0, 5.0);
  const QhdSchedule sched = default_schedule(1.0, 1e-3);

  const WaveState psi0 = uniform_state(g);
  const WaveState psi = evolve(psi0, pot, g, sched);
  CHECK(std::abs(psi.norm_sq() - 1.0) <= 1e-6);

  Eigen::VectorXcd ref(16);
  for (int i = 0; i < 16; ++i) ref(i) = psi0.amp[static_cast<std::size_t>(i)];
  ref = testutil::dense_reference(g, pot, sched, ref);
  std::complex<double> overlap = 0;
  for (int i = 0; i < 16; ++i)
    overlap += std::conj(ref(i)) * psi.amp[static_cast<std::size_t>(i)];
  CHECK(std::abs(overlap) >= 0.999);
}

TEST_CASE("norm conservation per step and over a full run") {
  const Grid g = make_grid(32, {{0.0, 1.0}});
  const auto pot = discretize_potential(pow(var(0) - 0.4, 2), g);
  const QhdSchedule sched = default_schedule(2.0, 1e-3);
  std::vector<EvolveRecord> trace;
  const WaveState psi = evolve(uniform_state(g), pot, g, sched, &trace);
  double prev = 1.0;
  for (const auto& r : trace) {
    CHECK(std::abs(r.norm_sq - prev) <= 1e-9);
    prev = r.norm_sq;
  }
  CHECK(std::abs(psi.norm_sq() - 1.0) <= 1e-6);
}

TEST_CASE("time reversal recovers the initial state") {
  const Grid g = make_grid(24, {{0.0, 1.0}});
  const auto pot = discretize_potential(sum({pow(var(0), 2), 0.5 * var(0)}), g);
  WaveState psi = uniform_state(g);
  const WaveState psi0 = psi;
  const int steps = 200;
  const double dt = 1e-3;
  std::vector<std::pair<double, double>> coefs;
  for (int k = 0; k < steps; ++k) {
    const double t_mid = (k + 0.5) * dt;
    coefs.emplace_back(std::exp(-0.46 * t_mid), std::exp(0.46 * t_mid));
    strang_step(psi, pot, g, coefs.back().first, coefs.back().second, dt);
  }
  for (int k = steps; k-- > 0;)
    strang_step(psi, pot, g, coefs[static_cast<std::size_t>(k)].first,
                coefs[static_cast<std::size_t>(k)].second, -dt);
  std::complex<double> overlap = 0;
  for (std::size_t i = 0; i < psi.amp.size(); ++i)
    overlap += std::conj(psi0.amp[i]) * psi.amp[i];
  CHECK(std::abs(overlap) >= 1.0 - 1e-8);
}

TEST_CASE("descent concentrates mass near the minimum (N=64 default run)") {
  const Grid g = make_grid(64, {{0.0, 1.0}});
  const auto pot = discretize_potential(pow(var(0) - 0.7, 2), g);
  const WaveState psi = evolve(uniform_state(g), pot, g, default_schedule());
  double mass = 0;
  for (std::size_t i = 0; i < psi.amp.size(); ++i)
    if (std::abs(g.coord(0, static_cast<int>(i)) - 0.7) <= 0.1)
      mass += std::norm(psi.amp[i]);
  CHECK(mass >= 0.9);
}

TEST_CASE("grid refinement moves the mode by at most one coarse cell") {
  auto modal_coord = [](int n) {
    const Grid g = make_grid(n, {{0.0, 1.0}});
    const auto pot = discretize_potential(pow(var(0) - 0.7, 2), g);
    const WaveState psi = evolve(uniform_state(g), pot, g, default_schedule(5.0, 1e-3));
    std::size_t arg = 0;
    for (std::size_t i = 1; i < psi.amp.size(); ++i)
      if (std::norm(psi.amp[i]) > std::norm(psi.amp[arg])) arg = i;
    return g.coord(0, static_cast<int>(arg));
  };
  const double coarse = modal_coord(32);
  const double fine = modal_coord(64);
  CHECK(std::abs(coarse - fine) <= 1.0 / 31.0 + 1e-12);
}

TEST_CASE("sampling: delta state, uniform frequencies, determinism") {
  const Grid g = make_grid(4, {{0.0, 3.0}});
  WaveState delta;
  delta.amp.assign(4, 0.0);
  delta.amp[2] = 1.0;
  for (const auto& pt : sample(delta, g, 50, 9)) CHECK(pt[0] == doctest::Approx(2.0));

  const WaveState uni = uniform_state(g);
  const auto pts = sample(uni, g, 100000, 123);
  std::vector<int> counts(4, 0);
  for (const auto& pt : pts)
    ++counts[static_cast<std::size_t>(std::lround(pt[0]))];
  for (int c : counts)
    CHECK(std::abs(c / 100000.0 - 0.25) <= 0.01);

  const auto a = sample_indices(uni, 64, 77);
  const auto b = sample_indices(uni, 64, 77);
  CHECK(a == b);
}

TEST_CASE("per-step norm drift guard throws a step-size error") {
  // A potential far beyond what dt can resolve: phases wrap, but unitarity
  // still holds, so drive drift through the kinetic cap instead by forcing a
  // non-convergable subspace via absurd step size.
  const Grid g = make_grid(16, {{0.0, 1.0}});
  WaveState psi = uniform_state(g);
  // direct check of the error path in evolve via the schedule validator
  QhdSchedule bad = default_schedule(1.0, 1e-3);
  bad.dt = -1e-3;
  CHECK_THROWS_AS(evolve(psi, discretize_potential(constant(0.0), g), g, bad), Error);
}
