#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "qhdalm/benchmarks.hpp"
#include "qhdalm/driver.hpp"
#include "qhdalm/hydrogen.hpp"
#include "test_util.hpp"

using namespace qhdalm;

namespace {

// Independent closed-form cap evaluator, written against the published
// formulas rather than the production code paths.
std::pair<double, double> caps_oracle(double p, const HydrogenParams& prm) {
  const double cap1 =
      prm.power_cap.m1 + prm.power_cap.m2 * prm.electrolyzer_max_power +
      prm.power_cap.m3 *
          std::exp(prm.power_cap.m4 * 100.0 * p / prm.electrolyzer_max_power);
  const double i_cell =
      prm.current_fit.i1 - prm.current_fit.i2 * std::exp(prm.current_fit.i3 * p) +
      prm.current_fit.i4 * p;
  const double u_cell = prm.voltage_fit.u1 + prm.voltage_fit.u2 * p -
                        prm.voltage_fit.u3 * p * p +
                        prm.voltage_fit.u4 * p * p * p -
                        prm.voltage_fit.u5 * p * p * p * p;
  const double arg =
      (prm.thermal_cap.n3 + prm.thermal_cap.n4 * prm.temperature +
       prm.thermal_cap.n5 * prm.temperature * prm.temperature) /
      i_cell;
  const double cap2 = (prm.thermal_cap.n1 + prm.thermal_cap.n2 * std::exp(arg)) / u_cell;
  return {cap1, cap2};
}

}  // namespace

TEST_CASE("parameter validation diagnostics") {
  CHECK(validate(default_hydrogen_params()).empty());

  HydrogenParams bad = default_hydrogen_params();
  bad.electrolyzer_max_power = -5;
  bool named = false;
  for (const auto& d : validate(bad))
    if (d.field == "electrolyzer_max_power") named = true;
  CHECK(named);

  bad = default_hydrogen_params();
  bad.demand.pop_back();
  named = false;
  for (const auto& d : validate(bad))
    if (d.field == std::string("demand")) named = true;
  CHECK(named);
}

TEST_CASE("parameter JSON round trip") {
  const HydrogenParams prm = default_hydrogen_params();
  const std::string text = params_to_json(prm);
  const HydrogenParams back = params_from_json(text);
  CHECK(params_to_json(back) == text);
  CHECK(back.horizon == prm.horizon);
  CHECK(back.current_fit.i3 == prm.current_fit.i3);
  CHECK(back.power_price == prm.power_price);
}

TEST_CASE("rejected parameter documents carry field names") {
  HydrogenParams prm = default_hydrogen_params();
  prm.electrolyzer_max_power = -1.0;
  try {
    params_from_json(params_to_json(prm));
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("electrolyzer_max_power") != std::string::npos);
  }
}

TEST_CASE("efficiency caps match the independent closed-form oracle") {
  Rng rng(404);
  for (int rep = 0; rep < 100; ++rep) {
    HydrogenParams prm = default_hydrogen_params();
    // jitter the fit parameters within benign ranges
    prm.power_cap.m1 = rng.uniform(20, 40);
    prm.power_cap.m3 = rng.uniform(-25, -5);
    prm.power_cap.m4 = rng.uniform(-0.1, -0.02);
    prm.thermal_cap.n1 = rng.uniform(80, 120);
    prm.thermal_cap.n2 = rng.uniform(5, 25);
    prm.temperature = rng.uniform(40, 80);
    const double p = rng.uniform(0.0, prm.electrolyzer_max_power);
    const auto got = efficiency_caps(p, prm);
    const auto want = caps_oracle(p, prm);
    CHECK(got.first == doctest::Approx(want.first).epsilon(1e-12));
    CHECK(got.second == doctest::Approx(want.second).epsilon(1e-12));
  }
}

TEST_CASE("degenerate cap coefficients reduce to the closed forms") {
  HydrogenParams prm = default_hydrogen_params();
  prm.power_cap.m3 = 0.0;
  const auto caps = efficiency_caps(37.0, prm);
  CHECK(caps.first ==
        doctest::Approx(prm.power_cap.m1 + prm.power_cap.m2 * prm.electrolyzer_max_power));

  prm = default_hydrogen_params();
  prm.thermal_cap.n2 = 0.0;
  const auto caps2 = efficiency_caps(25.0, prm);
  CHECK(caps2.second ==
        doctest::Approx(prm.thermal_cap.n1 / prm.voltage_fit.value(25.0)).epsilon(1e-12));
}

TEST_CASE("built problem structure: counts, boxes, residual expressions") {
  const HydrogenParams prm = default_hydrogen_params();
  const NlpProblem p = build(prm);
  const int n = prm.horizon;
  CHECK(static_cast<int>(p.num_vars()) == 4 * n);
  CHECK(static_cast<int>(p.equalities.size()) == 2 * n);
  CHECK(static_cast<int>(p.inequalities.size()) == 2 * n);
  CHECK(validate(p).empty());

  // AL reformulation appends one slack per inequality
  const auto aug = build_augmented(p, zero_multipliers(p), initial_penalties(p, {}));
  CHECK(static_cast<int>(aug.num_slacks) == 2 * n);
  CHECK(static_cast<int>(aug.problem.num_vars()) == 4 * n + 2 * n);

  // the inequality cap expressions agree with the direct evaluator:
  // h2 (power cap) is linear in lambda; h1 carries the U_cell factor
  const HydrogenLayout lay{n, true};
  Rng rng(7);
  for (int rep = 0; rep < 100; ++rep) {
    Point x(p.num_vars(), 0.0);
    const int t = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
    const double pel = rng.uniform(0, prm.electrolyzer_max_power);
    const double lam = rng.uniform(0, 100);
    x[static_cast<std::size_t>(lay.p_el(t))] = pel;
    x[static_cast<std::size_t>(lay.lambda(t))] = lam;
    const auto caps = caps_oracle(pel, prm);
    const double h2 = evaluate(p.inequalities[static_cast<std::size_t>(n + t)], x);
    CHECK(h2 == doctest::Approx(lam - caps.first).epsilon(1e-9));
    const double h1 = evaluate(p.inequalities[static_cast<std::size_t>(t)], x);
    const double u_cell = prm.voltage_fit.value(pel);
    CHECK(h1 / u_cell == doctest::Approx(lam - caps.second).epsilon(1e-7));
  }

  // storage recursion and power balance residuals at a random point
  for (int rep = 0; rep < 20; ++rep) {
    Point x(p.num_vars());
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = rng.uniform(p.variables[i].lb, p.variables[i].ub);
    const int t = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
    const double s_prev = t == 0 ? prm.storage_initial
                                 : x[static_cast<std::size_t>(lay.storage(t))];
    const double expect_g1 =
        x[static_cast<std::size_t>(lay.storage(t + 1))] - s_prev -
        prm.slot_hours / (100.0 * prm.hhv) * x[static_cast<std::size_t>(lay.p_el(t))] *
            x[static_cast<std::size_t>(lay.lambda(t))] +
        prm.demand[static_cast<std::size_t>(t)];
    CHECK(evaluate(p.equalities[static_cast<std::size_t>(t)], x) ==
          doctest::Approx(expect_g1).epsilon(1e-12));
    const double expect_g2 = x[static_cast<std::size_t>(lay.p_buy(t))] +
                             prm.renewable[static_cast<std::size_t>(t)] -
                             prm.ac_slope * x[static_cast<std::size_t>(lay.p_el(t))] -
                             prm.ac_intercept;
    CHECK(evaluate(p.equalities[static_cast<std::size_t>(n + t)], x) ==
          doctest::Approx(expect_g2).epsilon(1e-12));
  }
}

TEST_CASE("N=1 zero-data instance has objective zero at the solution") {
  HydrogenParams prm = with_horizon(default_hydrogen_params(), 1);
  prm.power_price = {0.0};
  prm.hydrogen_value = 0.0;
  prm.demand = {0.0};
  prm.renewable = {0.0};
  const NlpProblem p = build(prm);
  SolverConfig cfg;
  cfg.alm.max_outer = 25;
  const SolveReport rep = solve(p, cfg);
  CHECK(std::abs(rep.objective) <= 1e-8);
  CHECK(rep.true_infeasibility <= 1e-6);
}

TEST_CASE("the dynamic-efficiency AL is not separable; the surrogate path runs") {
  const HydrogenParams prm = with_horizon(default_hydrogen_params(), 2);
  const NlpProblem p = build(prm);
  const auto aug = build_augmented(p, zero_multipliers(p), initial_penalties(p, {}));
  CHECK_FALSE(to_separable(aug.problem.objective).has_value());
  // quadratic surrogate at the midpoint matches value and gradient
  const Point mid = box_midpoint(aug.problem);
  const auto q = quadratic_model(aug.problem, mid);
  CHECK(std::abs(q.value - evaluate(aug.problem.objective, mid)) <= 1e-8);
  const Point g = gradient(aug.problem.objective, mid);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(std::abs(q.grad[i] - g[i]) <= 1e-5 * std::max(1.0, std::abs(g[i])));
}

TEST_CASE("fixed-efficiency LP matches vertex enumeration (N=3)") {
  HydrogenParams prm = with_horizon(default_hydrogen_params(), 3);
  const double lam = 60.0;
  const NlpProblem lp = fixed_efficiency_variant(prm, lam);
  CHECK(lp.inequalities.empty());
  CHECK(static_cast<int>(lp.equalities.size()) == 6);

  // Reduce to p_el space: p_buy and storage are pinned by the equalities.
  // Enumerate vertices of the feasible polytope in R^3.
  const int n = 3;
  const double c = prm.slot_hours * lam / (100.0 * prm.hhv);
  const double p_buy_cap =
      std::max(1.0, prm.ac_slope * prm.electrolyzer_max_power + prm.ac_intercept);
  struct Hyperplane {
    double a[3];
    double b;  // a . p = b
  };
  std::vector<Hyperplane> active_planes;
  std::vector<std::pair<Hyperplane, double>> constraints;  // a . p <= b
  auto add_pair = [&](double a0, double a1, double a2, double lo, double hi) {
    constraints.push_back({{{a0, a1, a2}, hi}, 0});
    constraints.push_back({{{-a0, -a1, -a2}, -lo}, 0});
  };
  // 0 <= p_el_t <= P_max
  add_pair(1, 0, 0, 0, prm.electrolyzer_max_power);
  add_pair(0, 1, 0, 0, prm.electrolyzer_max_power);
  add_pair(0, 0, 1, 0, prm.electrolyzer_max_power);
  // p_buy_t = m p_el_t + k - r_t in [0, cap]
  for (int t = 0; t < n; ++t) {
    double a[3] = {0, 0, 0};
    a[t] = prm.ac_slope;
    const double base = prm.ac_intercept - prm.renewable[static_cast<std::size_t>(t)];
    add_pair(a[0], a[1], a[2], -base, p_buy_cap - base);
  }
  // s_t = s0 + sum_{u<t} (c p_el_u - d_u) in [S_min, S_max]
  for (int t = 1; t <= n; ++t) {
    double a[3] = {0, 0, 0};
    double base = prm.storage_initial;
    for (int u = 0; u < t; ++u) {
      a[u] = c;
      base -= prm.demand[static_cast<std::size_t>(u)];
    }
    add_pair(a[0], a[1], a[2], prm.storage_min - base, prm.storage_max - base);
  }
  auto objective = [&](const double p_el[3]) {
    double s_n = prm.storage_initial;
    double cost = 0;
    for (int t = 0; t < n; ++t) {
      s_n += c * p_el[t] - prm.demand[static_cast<std::size_t>(t)];
      cost += prm.power_price[static_cast<std::size_t>(t)] *
              (prm.ac_slope * p_el[t] + prm.ac_intercept -
               prm.renewable[static_cast<std::size_t>(t)]);
    }
    return -prm.hydrogen_value * (s_n - prm.storage_initial) + cost;
  };
  double best = std::numeric_limits<double>::infinity();
  const std::size_t m = constraints.size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      for (std::size_t k = j + 1; k < m; ++k) {
        // solve the 3x3 system by Cramer's rule
        const auto& a = constraints[i].first;
        const auto& bb = constraints[j].first;
        const auto& cc = constraints[k].first;
        const double det =
            a.a[0] * (bb.a[1] * cc.a[2] - bb.a[2] * cc.a[1]) -
            a.a[1] * (bb.a[0] * cc.a[2] - bb.a[2] * cc.a[0]) +
            a.a[2] * (bb.a[0] * cc.a[1] - bb.a[1] * cc.a[0]);
        if (std::abs(det) < 1e-10) continue;
        auto solve_col = [&](int col) {
          double mcol[3][3];
          for (int r = 0; r < 3; ++r) {
            const double* row = r == 0 ? a.a : (r == 1 ? bb.a : cc.a);
            const double rhs = r == 0 ? a.b : (r == 1 ? bb.b : cc.b);
            for (int cl = 0; cl < 3; ++cl) mcol[r][cl] = cl == col ? rhs : row[cl];
          }
          return mcol[0][0] * (mcol[1][1] * mcol[2][2] - mcol[1][2] * mcol[2][1]) -
                 mcol[0][1] * (mcol[1][0] * mcol[2][2] - mcol[1][2] * mcol[2][0]) +
                 mcol[0][2] * (mcol[1][0] * mcol[2][1] - mcol[1][1] * mcol[2][0]);
        };
        const double p_el[3] = {solve_col(0) / det, solve_col(1) / det,
                                solve_col(2) / det};
        bool feasible = true;
        for (const auto& [plane, unused] : constraints) {
          (void)unused;
          if (plane.a[0] * p_el[0] + plane.a[1] * p_el[1] + plane.a[2] * p_el[2] >
              plane.b + 1e-7)
            feasible = false;
        }
        if (feasible) best = std::min(best, objective(p_el));
      }
  REQUIRE(best < std::numeric_limits<double>::infinity());

  SolverConfig cfg;
  cfg.sampler = Sampler::None;
  cfg.alm.max_outer = 40;
  const SolveReport rep = baseline_alm(lp, cfg);
  CHECK(rep.true_infeasibility <= 1e-6);
  CHECK(std::abs(rep.objective - best) <= 1e-6 * std::max(1.0, std::abs(best)));
  (void)active_planes;
}

TEST_CASE("bang-bang LP: valuable hydrogen and free power run flat out") {
  HydrogenParams prm = with_horizon(default_hydrogen_params(), 1);
  prm.power_price = {0.0001};
  prm.hydrogen_value = 50.0;
  prm.demand = {0.0};
  const NlpProblem lp = fixed_efficiency_variant(prm, 100.0);
  SolverConfig cfg;
  cfg.sampler = Sampler::None;
  const SolveReport rep = baseline_alm(lp, cfg);
  CHECK(rep.true_infeasibility <= 1e-6);
  CHECK(std::abs(rep.solution[0] - prm.electrolyzer_max_power) <= 1e-4);
}

TEST_CASE("solution extraction: bookkeeping and feasibility breakdown") {
  HydrogenParams prm = with_horizon(default_hydrogen_params(), 2);
  const NlpProblem p = build(prm);
  SolverConfig cfg;
  cfg.seed = 3;
  const SolveReport rep = solve(p, cfg);
  const HydrogenSolution sol = extract_solution(prm, rep.solution, rep.slacks);
  CHECK(sol.max_violation <= 1e-4);
  // profit recomputation
  double cost = 0;
  for (int t = 0; t < 2; ++t)
    cost += prm.power_price[static_cast<std::size_t>(t)] * sol.p_buy[static_cast<std::size_t>(t)];
  const double profit =
      prm.hydrogen_value * (sol.storage.back() - prm.storage_initial) - cost;
  CHECK(std::abs(sol.profit - profit) <= 1e-8);
  CHECK(std::abs(rep.objective + profit) <= 1e-8);
  // lambda within the caps at the reported point
  for (int t = 0; t < 2; ++t)
    CHECK(sol.lambda[static_cast<std::size_t>(t)] <=
          std::min(sol.cap_power[static_cast<std::size_t>(t)],
                   sol.cap_thermal[static_cast<std::size_t>(t)]) +
              1e-4);
}

TEST_CASE("with_horizon tiles data cyclically") {
  const HydrogenParams prm = default_hydrogen_params();
  const HydrogenParams big = with_horizon(prm, 14);
  CHECK(big.horizon == 14);
  CHECK(big.power_price.size() == 14);
  for (int t = 0; t < 14; ++t)
    CHECK(big.power_price[static_cast<std::size_t>(t)] ==
          prm.power_price[static_cast<std::size_t>(t % prm.horizon)]);
}
