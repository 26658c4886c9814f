#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <sstream>

#include "hsdm/iterates.hpp"

using namespace hsdm;

namespace {

IterateProblem quadratic_over_ball(OperatorPtr* T_out = nullptr) {
  // minimize 1/2 ||u - a||^2 over the unit ball of radius 2; a interior,
  // so the solution is a itself.
  IterateProblem p;
  auto T = make_project_ball({0, 0}, 2.0);
  p.ops = {T};
  auto F = make_quadratic_gradient(1.0, {0.5, 0.25});
  static MonotoneOpSpec F_static = F;
  p.G = contraction_from_monotone(F, 1.0);  // tau = 0
  p.F = &F_static;
  p.projector = T;
  p.mu = 1.0;
  if (T_out) *T_out = T;
  return p;
}

}  // namespace

TEST_CASE("stationary start stays put") {
  IterateProblem p;
  p.ops = {make_project_ball({0, 0}, 1.0)};
  p.G = make_constant({0.3, 0.4});
  auto traj = iterate(Scheme::HsdmSingle, p, make_power_schedule(1.0), {0.3, 0.4}, 20);
  REQUIRE(traj.points.size() == 21);
  for (const auto& x : traj.points) CHECK(dist(x, {0.3, 0.4}) < 1e-14);
}

TEST_CASE("convergence to the interior target") {
  auto p = quadratic_over_ball();
  Point a = {0.5, 0.25};
  auto traj = iterate(Scheme::HsdmSingle, p, make_power_schedule(0.5), {2, 0}, 10000);
  CHECK(dist(traj.points.back(), a) <= 1e-3);
}

TEST_CASE("projected gradient reaches the target fast") {
  auto p = quadratic_over_ball();
  auto traj = iterate(Scheme::ProjGrad, p, make_power_schedule(1.0), {2, 0}, 200);
  CHECK(dist(traj.points.back(), {0.5, 0.25}) <= 1e-6);
}

TEST_CASE("cyclic with identities reduces to damped Banach iteration") {
  IterateProblem p;
  auto id = make_affine_map({{1, 0}, {0, 1}}, {0, 0});
  p.ops = {id, id};
  p.G = make_constant({1, -1});
  Schedule s = make_power_schedule(1.0);
  auto traj = iterate(Scheme::HsdmCyclic, p, s, {0, 0}, 3);
  // u_{n+1} = (1 - l_{n+1}) u_n + l_{n+1} * (1,-1)
  Point u = {0, 0};
  for (int n = 0; n < 3; ++n) {
    double l = lambda_at(s, n + 1);
    u = blend(l, u, {1, -1});
    CHECK(dist(traj.points[n + 1], u) < 1e-15);
  }
}

TEST_CASE("viscosity scheme formula") {
  IterateProblem p;
  p.ops = {make_project_ball({0, 0}, 1.0)};
  p.G = make_constant({0.2, 0.0});
  Schedule s = make_power_schedule(1.0);
  Point u0 = {2, 0};
  auto traj = iterate(Scheme::Viscosity, p, s, u0, 1);
  double l = lambda_at(s, 1);
  // u_1 = l f(u_0) + (1-l) T u_0
  Point expect = blend(1.0 - l, {0.2, 0.0}, {1, 0});
  CHECK(dist(traj.points[1], expect) < 1e-15);
}

TEST_CASE("resolvent point solves the fixed point equation") {
  auto id = make_affine_map({{1, 0}, {0, 1}}, {0, 0});
  auto Gc = make_constant({0.7, -0.3});
  // T = identity, G constant: v = (1-l)v + l a has solution v = a for any l
  for (double lam : {0.1, 0.5, 1.0}) {
    Point v = resolvent_point(*id, *Gc, 0.0, lam, 1e-12, {5, 5});
    CHECK(dist(v, {0.7, -0.3}) < 1e-9);
  }
  // residual contract on a nontrivial instance
  auto T = make_project_ball({0, 0}, 1.0);
  auto F = make_quadratic_gradient(1.0, {0.5, 0.25});
  auto G = contraction_from_monotone(F, 0.5);
  double tau = contraction_factor(1.0, 1.0, 0.5);
  Point v = resolvent_point(*T, *G, tau, 0.1, 1e-10, {2, 2});
  CHECK(dist(v, apply_resolvent_map(*T, *G, 0.1, v)) <= 1e-10);
  // uniqueness probe: three seeds agree up to the conditioning bound
  Point v2 = resolvent_point(*T, *G, tau, 0.1, 1e-10, {-3, 1});
  Point v3 = resolvent_point(*T, *G, tau, 0.1, 1e-10, {0, 0});
  double cond = 2e-10 / (0.1 * (1.0 - tau));
  CHECK(dist(v, v2) <= cond);
  CHECK(dist(v, v3) <= cond);
}

TEST_CASE("resolvent map contraction factor") {
  auto T = make_project_ball({0, 0}, 1.0);
  auto F = make_quadratic_gradient(1.0, {0.0, 0.0});
  auto G = contraction_from_monotone(F, 0.5);  // tau = 0.5
  double tau = contraction_factor(1.0, 1.0, 0.5);
  REQUIRE(tau == doctest::Approx(0.5));
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (double lam : {0.01, 0.1, 0.5, 1.0}) {
    double factor = 1.0 - lam * (1.0 - tau);
    for (int i = 0; i < 500; ++i) {
      Point x = {u(rng), u(rng)}, y = {u(rng), u(rng)};
      double dxy = dist(x, y);
      if (dxy < 1e-12) continue;
      Point tx = apply_resolvent_map(*T, *G, lam, x);
      Point ty = apply_resolvent_map(*T, *G, lam, y);
      CHECK(dist(tx, ty) <= factor * dxy + 1e-9);
    }
  }
}

TEST_CASE("resolvent path small-parameter residual bound") {
  // z_t with t below eps/d has fixed point residual below eps
  auto T = make_project_ball({0, 0}, 1.0);
  auto G = make_constant({0.5, 0.5});
  const double d = 2.0, eps = 0.1;
  for (double t : {0.04, 0.02, 0.005}) {
    REQUIRE(t < eps / d);
    Point z = resolvent_point(*T, *G, 0.0, t, 1e-12, {0.9, 0});
    CHECK(fixed_point_residual(T, z) < eps);
  }
}

TEST_CASE("resolvent path on a list of indices") {
  auto id = make_affine_map({{1, 0}, {0, 1}}, {0, 0});
  auto Gc = make_constant({1, 2});
  auto pts = resolvent_path(*id, *Gc, 0.0, make_power_schedule(1.0), {1, 5, 9}, 1e-11, {0, 0});
  REQUIRE(pts.size() == 3);
  for (const auto& v : pts) CHECK(dist(v, {1, 2}) < 1e-8);
  CHECK(resolvent_path(*id, *Gc, 0.0, make_power_schedule(1.0), {}, 1e-11, {0, 0}).empty());
}

TEST_CASE("asymptotic residuals") {
  IterateProblem p;
  auto id = make_affine_map({{1, 0}, {0, 1}}, {0, 0});
  p.ops = {id, id};
  p.G = make_constant({0, 0});
  auto traj = iterate(Scheme::HsdmCyclic, p, make_power_schedule(1.0), {1, 1}, 10);
  auto res = asymptotic_residuals(traj, p.ops, {0, 3, 7});
  for (double r : res) CHECK(r == 0.0);
  CHECK_THROWS_AS((void)asymptotic_residuals(traj, p.ops, {100}), std::out_of_range);
}

TEST_CASE("csv export shape") {
  IterateProblem p;
  p.ops = {make_project_ball({0, 0}, 1.0)};
  p.G = make_constant({0, 0});
  auto traj = iterate(Scheme::HsdmSingle, p, make_power_schedule(1.0), {2, 0}, 5);
  std::istringstream is(trajectory_csv(traj));
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "n,lambda,x0,x1,residual");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 6);
}

TEST_CASE("input validation") {
  IterateProblem p;
  p.ops = {make_project_ball({0, 0}, 1.0)};
  p.G = make_constant({0, 0});
  auto nan_traj = [&] {
    return iterate(Scheme::HsdmSingle, p, make_power_schedule(1.0),
                   {std::nan(""), 0.0}, 1);
  };
  CHECK_THROWS(nan_traj());
  auto traj0 = iterate(Scheme::HsdmSingle, p, make_power_schedule(1.0), {2, 0}, 0);
  CHECK(traj0.points.size() == 1);
}
