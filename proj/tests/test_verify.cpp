#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "hsdm/verify.hpp"

using namespace hsdm;

namespace {

Trajectory from_values(const std::vector<double>& xs) {
  Trajectory t;
  for (double v : xs) t.points.push_back({v});
  return t;
}

IndexFn const_g(std::uint64_t c) {
  return [c](std::uint64_t) { return c; };
}

}  // namespace

TEST_CASE("empirical metastability examples") {
  // constant trajectory: n = 0 for any (eps, g)
  Trajectory c = from_values(std::vector<double>(20, 1.0));
  MetaQuery q{0.01, const_g(3), 10};
  auto w = empirical_metastability(c, q);
  REQUIRE(w.least_n.has_value());
  CHECK(*w.least_n == 0);

  // x_n = 2^-n, eps = 0.5, g == 1: |x_0 - x_1| = 0.5 <= 0.5, so n = 0
  std::vector<double> pow2;
  for (int n = 0; n < 12; ++n) pow2.push_back(std::pow(2.0, -n));
  auto w2 = empirical_metastability(from_values(pow2), {0.5, const_g(1), 8});
  REQUIRE(w2.least_n.has_value());
  CHECK(*w2.least_n == 0);

  // x_n = (-1)^n, eps = 1, g == 1: gap 2 > 1 everywhere -> exhausted
  std::vector<double> alt;
  for (int n = 0; n < 12; ++n) alt.push_back(n % 2 ? -1.0 : 1.0);
  auto w3 = empirical_metastability(from_values(alt), {1.0, const_g(1), 8});
  CHECK_FALSE(w3.least_n.has_value());
  CHECK(w3.exhausted);

  // trajectory too short: reports the required length instead
  auto w4 = empirical_metastability(from_values({1.0, 2.0}), {1.0, const_g(5), 3});
  CHECK_FALSE(w4.least_n.has_value());
  CHECK(w4.required_length > 2);
}

TEST_CASE("least witness is exact, not a bisection artifact") {
  // metastability holds at n = 0 and n = 3 but fails at 1, 2
  Trajectory t = from_values({0.0, 0.1, 3.0, 0.0, 0.05, 0.05, 0.05});
  auto w = empirical_metastability(t, {0.2, const_g(1), 4});
  REQUIRE(w.least_n.has_value());
  CHECK(*w.least_n == 0);
  // eps = 0.1 would already hold at n = 0 (|0.0 - 0.1| <= 0.1 inclusively)
  auto w2 = empirical_metastability(t, {0.05, const_g(1), 4});
  REQUIRE(w2.least_n.has_value());
  CHECK(*w2.least_n == 3);
}

TEST_CASE("vip certificate check, positive and negative") {
  auto T = make_project_ball({0, 0}, 1.0);
  Point a = {0.3, 0.1};
  auto G = make_constant(a);
  // at the solution u* = a (interior): <Ga - a, v - a> = 0 <= eps
  auto rep = check_vip_certificate(G, a, {T}, 0.25, 0.1, 200);
  CHECK(rep.samples == 200);
  CHECK(rep.admissible > 0);
  CHECK(rep.pass());

  // far from the solution, v along the violating direction breaks it
  Point far = {-0.9, 0};
  auto bad = check_vip_certificate(G, far, {T}, 1e-4, 0.05, 200);
  CHECK(bad.violations > 0);
  CHECK_FALSE(bad.pass());
}

TEST_CASE("switch lemma fuzz") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> un(-1.0, 1.0);
  int applicable = 0;
  for (int i = 0; i < 1000; ++i) {
    LemmaInputs in;
    in.u_star = {un(rng), un(rng)};
    in.u = {un(rng), un(rng)};
    in.v = {un(rng), un(rng)};
    in.w = {un(rng), un(rng)};
    in.eps = 0.25 + 0.5 * (un(rng) + 1.0) / 2.0;
    in.d = 2;
    auto r = check_lemma(LemmaKind::Switch, in);
    CHECK(r.pass());
    if (r.applicable && r.premises_hold) ++applicable;
  }
  CHECK(applicable > 0);  // the fuzz actually exercises the conclusion
}

TEST_CASE("switch lemma engineered negative") {
  // breaking the premise can break the conclusion: u far from u*, v chosen
  // along u - u*
  LemmaInputs in;
  in.u_star = {0, 0};
  in.u = {1, 0};
  in.v = {1, 0};
  in.eps = 0.01;
  in.d = 2;
  auto r = check_lemma(LemmaKind::Switch, in);
  // premises must fail here; if they somehow held the conclusion would break
  CHECK_FALSE(r.premises_hold);
  CHECK(inner(sub(in.u, in.u_star), sub(in.v, in.u_star)) > in.eps);
}

TEST_CASE("vip modulus lemma fuzz") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> un(-1.0, 1.0);
  auto F = make_quadratic_gradient(1.0, {0.2, -0.1});
  auto G = contraction_from_monotone(F, 1.0);
  int exercised = 0;
  for (int i = 0; i < 1000; ++i) {
    LemmaInputs in;
    in.G = G;
    in.tau = 0.0;
    in.d = 2;
    in.eps = 0.5;
    in.u = {un(rng), un(rng)};
    // v near u so the distance premise can hold
    double r0 = in.eps / (2.0 * in.d * (2.0 + in.tau));
    in.v = add(in.u, scale(0.5 * r0, Point{un(rng), un(rng)}));
    in.w = {un(rng), un(rng)};
    auto r = check_lemma(LemmaKind::VipModulus, in);
    CHECK(r.pass());
    if (r.premises_hold) ++exercised;
  }
  CHECK(exercised > 0);

  // degenerate u = v case: premise <Gu-u, w-u> <= eps/2 gives conclusion
  LemmaInputs in;
  in.G = G;
  in.tau = 0.0;
  in.d = 1;
  in.eps = 1.0;
  in.u = in.v = {0.2, -0.1};  // the fixed point of G, so Gu - u = 0
  in.w = {0.5, 0.5};
  auto r = check_lemma(LemmaKind::VipModulus, in);
  CHECK(r.premises_hold);
  CHECK(r.conclusion_holds);
}

TEST_CASE("core lemma on the quadratic instance") {
  auto T = make_project_ball({0, 0}, 1.0);
  Point a = {0.25, 0.25};
  auto G = make_constant(a);  // tau = 0; u* = a (interior, fixed by T)
  for (auto kind : {LemmaKind::CoreSingle, LemmaKind::CoreSingleDiag}) {
    LemmaInputs in;
    in.T = T;
    in.G = G;
    in.u_star = a;
    in.v = a;
    in.tau = 0.0;
    in.d = 2;
    in.eps = 0.5;
    in.n = 50;
    in.schedule = make_power_schedule(1.0);
    auto r = check_lemma(kind, in);
    CHECK(r.pass());
  }
}

TEST_CASE("fact sum lemma fuzz and negative") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 200; ++i) {
    LemmaInputs in;
    in.schedule = make_power_schedule(1.0);
    in.m = std::uniform_int_distribution<std::uint64_t>(1, 20)(rng);
    in.n = in.m + std::uniform_int_distribution<std::uint64_t>(0, 30)(rng);
    auto r = check_lemma(LemmaKind::FactSum, in);
    CHECK(r.pass());
    CHECK(r.premises_hold);
    CHECK(r.conclusion_holds);
  }
}

TEST_CASE("perm lemma on two halfspaces") {
  auto H1 = make_project_halfspace({1, 0}, 0.0);
  auto H2 = make_project_halfspace({0, 1}, 0.0);
  auto rho_hat = [](int d, double e) { return e * e / (8.0 * d); };
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> un(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    LemmaInputs in;
    in.family = {H1, H2};
    in.rho_hat = rho_hat;
    in.d = 2;
    in.eps = 0.5;
    in.u = {un(rng), un(rng)};
    in.w = {-0.5, -0.5};  // common fixed point within distance d of samples
    auto r = check_lemma(LemmaKind::Perm, in);
    CHECK(r.pass());
  }
  // negative discipline: relaxing the premise threshold 10x admits a point
  // violating the per-operator conclusion
  auto loose = [](int, double e) { return 10.0 * e; };
  LemmaInputs bad;
  bad.family = {H1, H2};
  bad.rho_hat = loose;
  bad.d = 2;
  bad.eps = 0.05;
  bad.u = {0.06, 0.06};  // permuted-composition residual 0.085 < 0.1 = threshold
  bad.w = {-0.5, -0.5};
  auto rneg = check_lemma(LemmaKind::Perm, bad);
  CHECK(rneg.premises_hold);
  CHECK_FALSE(rneg.conclusion_holds);
}

TEST_CASE("subsequence property fuzz") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> un(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<Point> seq;
    for (int k = 0; k < 30; ++k) seq.push_back({un(rng), un(rng)});
    Point u = {un(rng), un(rng)};
    std::uint64_t m = std::uniform_int_distribution<std::uint64_t>(0, 14)(rng);
    IndexFn g = [m](std::uint64_t j) { return j + 7; };
    CHECK(check_subsequence_property(seq, u, 0.5, g, m));
  }
}

TEST_CASE("confinement on the quadratic instance") {
  auto T = make_project_ball({0, 0}, 1.0);
  Point a = {0.25, 0.25};
  auto G = make_constant(a);
  IterateProblem p;
  p.ops = {T};
  p.G = G;
  auto traj = iterate(Scheme::HsdmSingle, p, make_power_schedule(1.0), a, 2000);
  auto rep = check_confinement(traj, {T}, G, a, a, 2, 0.0, ConfinementMode::DiamSingle);
  CHECK(rep.hypotheses_ok);
  CHECK(rep.confined);
  CHECK(rep.max_distance <= 1.0 + 1e-9);

  // deliberately small d: hypothesis rejection, not a confinement failure
  auto far = iterate(Scheme::HsdmSingle, p, make_power_schedule(1.0), {0.9, 0.9}, 10);
  auto rej = check_confinement(far, {T}, G, a, a, 1, 0.0, ConfinementMode::DiamSingle);
  CHECK_FALSE(rej.hypotheses_ok);
}

TEST_CASE("adversary strategies drive the tower") {
  auto T = make_project_ball({0, 0}, 1.0);
  auto F = make_quadratic_gradient(1.0, {0.2, 0.2});
  auto G = contraction_from_monotone(F, 1.0);
  AdversaryInstance inst;
  inst.T = T;
  inst.G = G;
  inst.tau = 0.0;
  inst.schedule = make_power_schedule(1.0);
  inst.eps = 0.5;
  inst.d = 2;
  inst.witness = {0.2, 0.2};
  inst.challenge = {0.5, 0.0};
  for (auto strat : {AdversaryStrategy::Constant, AdversaryStrategy::Random,
                     AdversaryStrategy::Anticipating, AdversaryStrategy::Branch}) {
    auto cf = adversary_suite(inst, strat);
    double t = adversary_blend_weight(inst.eps, inst.tau, inst.d);
    auto b = std::make_shared<EvalBudget>();
    TowerOverrides ov;
    ov.n_eps_tilde = 5;
    auto r = picard_tower(inst.witness, T, G, inst.tau, inst.eps, t, cf, inst.d,
                          inst.witness, b, ov);
    CHECK(audit_tower_result(r, T, G, t, inst.eps, cf));
  }
}

TEST_CASE("adversary outputs stay in contract") {
  auto T = make_project_ball({0, 0}, 1.0);
  auto G = make_constant({0.1, 0.1});
  AdversaryInstance inst;
  inst.T = T;
  inst.G = G;
  inst.tau = 0.0;
  inst.schedule = make_power_schedule(1.0);
  inst.eps = 0.5;
  inst.d = 2;
  inst.witness = {0.1, 0.1};
  inst.challenge = {0.4, 0.0};
  PhiFn phi = [](const Point&) { return 0.25; };
  for (auto strat : {AdversaryStrategy::Constant, AdversaryStrategy::Random,
                     AdversaryStrategy::Anticipating, AdversaryStrategy::Branch}) {
    auto cf = adversary_suite(inst, strat);
    for (const Point& u : {Point{0.3, 0.3}, Point{-0.2, 0.5}}) {
      double dv = cf.Delta(u, phi);
      CHECK(dv > 0.0);
      CHECK(dv <= 1.0 + 1e-12);
      CHECK(all_finite(cf.V(u, phi)));
    }
  }
}
