#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qhdalm/refine.hpp"
#include "test_util.hpp"

using namespace qhdalm;

namespace {

NlpProblem box_problem(std::vector<VarSpec> vars, ExprPtr objective) {
  NlpProblem p;
  p.variables = std::move(vars);
  p.objective = std::move(objective);
  return p;
}

}  // namespace

TEST_CASE("quadratic with interior minimum") {
  const auto p = box_problem({{"x", 0.0, 1.0}}, pow(var(0) - 0.3, 2));
  const auto res = minimize(p, {0.9}, {});
  CHECK(std::abs(res.x[0] - 0.3) <= 1e-6);
  CHECK(res.stationarity <= 1e-6);
  CHECK_FALSE(res.stalled);
}

TEST_CASE("linear objective pins to the active bound with zero stationarity") {
  const auto p = box_problem({{"x", 0.0, 1.0}}, var(0));
  const auto res = minimize(p, {0.7}, {});
  CHECK(res.x[0] == 0.0);
  CHECK(res.stationarity == 0.0);
}

TEST_CASE("Rosenbrock reaches the global minimum") {
  // f = (1 - x)^2 + 100 (y - x^2)^2 on [-2, 2]^2 from (-1.2, 1)
  const ExprPtr f = sum({pow(1.0 - var(0), 2), 100.0 * pow(var(1) - pow(var(0), 2), 2)});
  const auto p = box_problem({{"x", -2.0, 2.0}, {"y", -2.0, 2.0}}, f);
  RefineParams prm;
  prm.max_iters = 20000;
  const auto res = minimize(p, {-1.2, 1.0}, prm);
  CHECK(std::abs(res.x[0] - 1.0) <= 1e-4);
  CHECK(std::abs(res.x[1] - 1.0) <= 1e-4);
}

TEST_CASE("iterates stay in the box and the objective never increases") {
  Rng rng(11);
  for (int inst = 0; inst < 10; ++inst) {
    const ExprPtr f =
        sum({pow(var(0) - rng.uniform(-2, 2), 2),
             rng.uniform(0.5, 3.0) * pow(var(1) - rng.uniform(-2, 2), 4),
             rng.uniform(-0.5, 0.5) * product({var(0), var(1)})});
    const auto p = box_problem({{"x", -1.0, 1.0}, {"y", -1.0, 1.0}}, f);
    const Point x0{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const auto res = minimize(p, x0, {});
    CHECK(inside_box(p, res.x));
    CHECK(res.objective <= evaluate(f, project_to_box(p, x0)) + 1e-12);
  }
}

TEST_CASE("convergence on conditioned quadratics within the iteration budget") {
  // f = sum kappa_i (x_i - c_i)^2 with conditioning up to 1e4
  Rng rng(23);
  for (int inst = 0; inst < 5; ++inst) {
    std::vector<ExprPtr> terms;
    std::vector<VarSpec> vars;
    Point c;
    for (int i = 0; i < 4; ++i) {
      const double kappa = std::pow(10.0, static_cast<double>(i) * 4.0 / 3.0);
      c.push_back(rng.uniform(-0.8, 0.8));
      vars.push_back({"x" + std::to_string(i), -1.0, 1.0});
      terms.push_back(kappa * pow(var(i) - c.back(), 2));
    }
    const auto p = box_problem(std::move(vars), sum(std::move(terms)));
    const auto res = minimize(p, Point(4, 0.0), {});
    CHECK(res.stationarity <= 1e-6);
    for (int i = 0; i < 4; ++i)
      CHECK(std::abs(res.x[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(i)]) <= 1e-5);
  }
}

TEST_CASE("projected_grad_norm") {
  const auto p = box_problem({{"x", 0.0, 1.0}}, var(0));
  CHECK(projected_grad_norm(p, {0.0}) == 0.0);  // bound-constrained stationary

  const auto q = box_problem({{"x", -2.0, 2.0}}, pow(var(0), 2));
  CHECK(projected_grad_norm(q, {0.0}) == 0.0);  // interior stationary

  // random quadratic versus the direct formula
  Rng rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const double a = rng.uniform(0.1, 3.0), b = rng.uniform(-2, 2);
    const auto r = box_problem({{"x", -1.0, 1.0}}, sum({a * pow(var(0), 2), b * var(0)}));
    const double x = rng.uniform(-1, 1);
    const double grad = 2 * a * x + b;
    const double expect = std::abs(x - std::clamp(x - grad, -1.0, 1.0));
    CHECK(projected_grad_norm(r, {x}) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("refiner rejects constrained problems") {
  NlpProblem p;
  p.variables = {{"x", 0.0, 1.0}};
  p.objective = var(0);
  p.equalities.push_back(var(0));
  CHECK_THROWS_AS(minimize(p, {0.5}, {}), Error);
}
