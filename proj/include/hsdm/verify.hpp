#pragma once

// Empirical validation harness: exact metastability-witness search, VIP
// certificate spot checks, re-enactment of each quantitative lemma on
// concrete data, trajectory confinement checks, and the adversarial
// counterfunction strategies used to drive the tower end-to-end.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hsdm/functional.hpp"
#include "hsdm/iterates.hpp"

namespace hsdm {

constexpr double kVerifySlack = 1e-9;

using IndexFn = std::function<std::uint64_t(std::uint64_t)>;

struct MetaQuery {
  double epsilon = 0.0;
  IndexFn g;
  std::uint64_t cap = 0;
};

struct MetaWitness {
  std::optional<std::uint64_t> least_n;
  bool exhausted = false;
  std::uint64_t required_length = 0;  // set when the trajectory is too short
};

// Least n <= cap with max{||u_i - u_j|| : i,j in [n, n+g(n)]} <= epsilon.
// Exact enumeration: metastability is not monotone in n.
MetaWitness empirical_metastability(const Trajectory& traj, const MetaQuery& q);

struct VipReport {
  std::size_t samples = 0;
  std::size_t admissible = 0;  // residual <= eps_prime
  std::size_t violations = 0;
  double worst_margin = 0.0;  // max of <Gu-u, v-u> - eps over admissible v
  std::uint64_t seed = 0;
  bool pass() const { return admissible > 0 && violations == 0; }
};

// Samples near-fixed points v of the composition of T_ops (project onto the
// fixed set, then perturb by <= eps_prime/2), keeps those with residual
// <= eps_prime, and checks <G u_n - u_n, v - u_n> <= eps + slack.
VipReport check_vip_certificate(const OperatorPtr& G, const Point& u_n,
                                const std::vector<OperatorPtr>& T_ops, double eps,
                                double eps_prime, std::size_t samples,
                                std::uint64_t seed = 12345);

enum class LemmaKind { Switch, VipModulus, CoreSingle, CoreSingleDiag, Perm, FactSum };

struct LemmaInputs {
  Point u_star, u, v, w;
  Point v_n;  // resolvent point (core lemma)
  OperatorPtr T, G;
  std::vector<OperatorPtr> family;              // Perm
  std::function<double(int, double)> rho_hat;   // Perm
  Schedule schedule;                            // CoreSingle* (h), FactSum
  std::uint64_t n = 0, m = 0;
  double eps = 0.5;
  double tau = 0.0;
  int d = 1;
};

struct LemmaReport {
  bool applicable = false;      // side conditions met
  bool premises_hold = false;   // lemma hypotheses met
  bool conclusion_holds = false;
  double margin = 0.0;  // conclusion slack: bound minus measured value
  std::string detail;
  // a lemma check only fails when premises hold but the conclusion breaks
  bool pass() const { return !applicable || !premises_hold || conclusion_holds; }
};

LemmaReport check_lemma(LemmaKind kind, const LemmaInputs& in);

// Lemma over sequences: g_{u,eps}(m) = g(m) if ||v_{g(m)} - u|| > eps/2 else m;
// then ||v_{g_{u,eps}(m)} - u|| <= eps/2 implies ||v_{g(m)} - v_m|| <= eps.
// Returns pass/fail of the implication on the given data.
bool check_subsequence_property(const std::vector<Point>& seq, const Point& u, double eps,
                                const IndexFn& g, std::uint64_t m);

enum class ConfinementMode { DiamSingle, DiamFamily };

struct ConfinementReport {
  bool hypotheses_ok = false;
  bool confined = false;
  double max_distance = 0.0;
  std::string detail;
};

// Verifies the hypothesis set (||u_0 - v|| <= d/2 or d/4, ||v - Gv|| <=
// d(1-tau)/4, ||v - w|| <= d/(4(1+tau))), then measures that every iterate,
// every G-image, and (single mode) the sampled resolvent points stay within
// d/2 of v. When w is absent it is located by iterating G.
ConfinementReport check_confinement(const Trajectory& traj,
                                    const std::vector<OperatorPtr>& T_ops,
                                    const OperatorPtr& G, const Point& v,
                                    const std::optional<Point>& w, int d, double tau,
                                    ConfinementMode mode);

enum class AdversaryStrategy { Anticipating, Branch, Random, Constant };

struct AdversaryInstance {
  OperatorPtr T;
  OperatorPtr G;
  double tau = 0.0;
  Schedule schedule;
  double eps = 0.5;
  IndexFn g;  // defaults to identity when empty
  int d = 1;
  Point witness;         // a fixed point of T
  Point challenge;       // Branch strategy's x
  double resolvent_tol = 1e-10;
  std::uint64_t seed = 20240817;
  std::uint64_t max_index = 200000;  // search cap for the least j
};

// Counterfunctions realizing the named strategy:
//   Anticipating  J(u,phi) = least j with ||T v_a(j) - v_a(j)|| < phi(v_a(j))
//                 (a = g~ stopped near u), V = v_a(J),
//                 Delta = (eps/2)^2 / (6 d (1-tau) h(a(J)))
//   Branch        V' plays the Anticipating V or the challenge x, whichever
//                 blend lies closer to Gu
//   Random        seeded noise in (0,1] / points near the witness
//   Constant      Delta = 1, V = witness
CounterfunctionPair adversary_suite(const AdversaryInstance& inst,
                                    AdversaryStrategy strategy);

// Blend weight t = (eps/2)^2 / (6 (1-tau)^2 d^2) used with these strategies.
double adversary_blend_weight(double eps, double tau, int d);

}  // namespace hsdm
