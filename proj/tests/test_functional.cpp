#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "hsdm/functional.hpp"

using namespace hsdm;

namespace {

BudgetPtr budget(std::uint64_t limit = 1'000'000) {
  auto b = std::make_shared<EvalBudget>();
  b->limit = limit;
  return b;
}

CounterfunctionPair constant_pair(Point v) {
  CounterfunctionPair cf;
  cf.Delta = [](const Point&, const PhiFn&) { return 1.0; };
  cf.V = [v](const Point&, const PhiFn&) { return v; };
  return cf;
}

}  // namespace

TEST_CASE("a_predicate degenerate cases") {
  Point u = {0.3, 0.4}, p = {1, 0};
  CHECK(a_predicate(0.1, u, u, p, 1));  // u = v: reduces to 0 <= et^4/8d^2
  CHECK(a_predicate(0.1, u, {5, -5}, u, 1));  // u = p: LHS is 0
}

TEST_CASE("a_predicate matches a direct re-evaluation") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> un(-1.0, 1.0);
  const double et = 0.1;
  const int d = 1;
  for (int i = 0; i < 1000; ++i) {
    Point u = {un(rng), un(rng)}, v = {un(rng), un(rng)}, p = {un(rng), un(rng)};
    const double w = et * et / (6.0 * d * d);
    Point blendpt = blend(w, u, v);
    double lhs = norm2(sub(u, p));
    double rhs = std::pow(et, 4) / (8.0 * d * d) + norm2(sub(blendpt, p));
    bool expect = lhs <= rhs + 1e-12;
    CHECK(a_predicate(et, u, v, p, d) == expect);
  }
}

TEST_CASE("eps_projection with identity T accepts the witness") {
  auto T = make_affine_map({{1, 0}, {0, 1}}, {0, 0});
  Point witness = {0.5, 0.5};
  // V plays u back: the guarded implication is trivially satisfiable
  CounterfunctionPair cf;
  cf.Delta = [](const Point&, const PhiFn&) { return 1.0; };
  cf.V = [](const Point& u, const PhiFn&) { return u; };
  auto b = budget();
  auto r = eps_projection({2, 0}, T, 0.5, 1.0, cf, witness, 1, b);
  CHECK(fixed_point_residual(T, r.u) < cf.Delta(r.u, r.phi));
  CHECK(r.index_used >= 1);
}

TEST_CASE("eps_projection both conjuncts hold post hoc") {
  // T projects onto the x-axis; witness is a far fixed point; Delta == 1 and
  // V constant at another fixed point
  auto T = make_project_affine({{1, 0}}, {0, 0});
  Point witness = {5, 0};
  auto cf = constant_pair({-3, 0});
  Point v0 = {0.3, 0.8};
  const double t = 0.25, eps = 0.5;
  auto b = budget();
  auto r = eps_projection(v0, T, t, eps, cf, witness, 4, b);
  // first conjunct
  CHECK(fixed_point_residual(T, r.u) < cf.Delta(r.u, r.phi) + 1e-12);
  // guarded implication: residual of the challenged point below phi implies
  // the blended point is no closer to v0 (up to eps)
  Point chal = cf.V(r.u, r.phi);
  if (fixed_point_residual(T, chal) < r.phi(chal)) {
    Point blended = blend(t, r.u, chal);
    CHECK(norm2(sub(v0, r.u)) <= norm2(sub(v0, blended)) + eps + 1e-9);
  }
}

TEST_CASE("eps projection: n = ceil(d^2/eps) candidates at most") {
  auto T = make_affine_map({{1, 0}, {0, 1}}, {0, 0});
  auto cf = constant_pair({0, 0});
  auto b = budget();
  auto r = eps_projection({1, 1}, T, 0.5, 1.0, cf, {0.2, 0.2}, 1, b);
  CHECK(r.index_used <= 1);  // n = ceil(1/1) = 1
}

TEST_CASE("eps_projection_pair degenerate and min cases") {
  auto T = make_project_affine({{1, 0}}, {0, 0});
  Point witness = {1, 0};
  auto cf1 = constant_pair({-2, 0});
  auto b = budget();
  auto same = eps_projection_pair({0.5, 0.5}, T, 0.3, 0.3, 0.5, cf1, cf1, witness, 2, b);
  auto single = eps_projection({0.5, 0.5}, T, 0.3, 0.5, cf1, witness, 2, budget());
  CHECK(dist(same.u, single.u) < 1e-12);

  // combined Delta is the pointwise min
  CounterfunctionPair half = cf1;
  half.Delta = [](const Point&, const PhiFn&) { return 0.5; };
  auto r = eps_projection_pair({0.5, 0.5}, T, 0.3, 0.3, 0.5, cf1, half, witness, 2, budget());
  CHECK(fixed_point_residual(T, r.u) < 0.5 + 1e-12);
}

TEST_CASE("budget enforcement") {
  auto T = make_project_affine({{1, 0}}, {0, 0});
  auto cf = constant_pair({-2, 0});
  auto b = budget(3);
  CHECK_THROWS_AS(
      (void)eps_projection({0.5, 0.5}, T, 0.3, 0.01, cf, {1, 0}, 10, b),
      BudgetExceededError);
}

TEST_CASE("picard_tower with constant G reduces to projection behavior") {
  // tau = 0: G constant at a; the returned point nearly minimizes the
  // distance to a among challenged fixed points of T
  auto T = make_project_affine({{1, 0}}, {0, 0});
  Point a = {0.4, 0.7};
  auto G = make_constant(a);
  auto cf = constant_pair({2, 0});
  auto b = budget();
  TowerOverrides ov;
  ov.n_eps_tilde = 6;
  auto r = picard_tower(a, T, G, 0.0, 1.0, 0.25, cf, 2, {0, 0}, b, ov);
  CHECK(r.i0 == 1);  // tau = 0 rule
  CHECK(r.eps_tilde == doctest::Approx(1.0 / 22.0));  // (1-0)^2 * 1 / (6 + 8*2)
  CHECK(all_finite(r.u_star));
  CHECK(fixed_point_residual(T, r.u_star) < 1.0 + 1e-9);
  CHECK(audit_tower_result(r, T, G, 0.25, 1.0, cf));
}

TEST_CASE("picard_tower audit against several adversaries") {
  auto T = make_project_ball({0, 0}, 1.0);
  auto F = make_quadratic_gradient(1.0, {0.25, 0.25});
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> un(-0.5, 0.5);
  for (double tau : {0.0, 0.25}) {
    // solve 1 - mu(2 - mu) = tau^2 for mu in (0,1]
    double mu = 1.0 - tau;  // 1 - mu(2-mu) = (1-mu)^2 = tau^2
    auto G = contraction_from_monotone(F, mu);
    TowerOverrides ov;
    ov.n_eps_tilde = 5;
    ov.i0 = 1;  // full i0 for tau = 0.25 makes the tower height unaffordable
    for (int trial = 0; trial < 5; ++trial) {
      Point noise = {un(rng), un(rng)};
      CounterfunctionPair cf;
      double dval = 0.2 + 0.8 * (un(rng) + 0.5);
      cf.Delta = [dval](const Point&, const PhiFn&) { return dval; };
      cf.V = [noise](const Point& u, const PhiFn&) { return blend(0.5, u, noise); };
      auto b = budget();
      auto r = picard_tower({0.25, 0.25}, T, G, tau, 0.5, 0.1, cf, 2, {0, 0}, b, ov);
      CHECK(audit_tower_result(r, T, G, 0.1, 0.5, cf));
    }
  }
}

TEST_CASE("run_with_big_stack rethrows") {
  CHECK_THROWS_AS(run_with_big_stack([] { throw std::runtime_error("boom"); }),
                  std::runtime_error);
  int x = 0;
  run_with_big_stack([&x] { x = 7; });
  CHECK(x == 7);
}
