#pragma once

// Higher-order machinery behind the epsilon-projection onto fix(T) and its
// iterated tower. The solution functionals play against adversarial
// counterfunction pairs (Delta, V):
//
//   psi_1 = 1,  u_1 = witness in fix(T)
//   psi_{j+1}(v) = min{ Delta(v, psi_j^v), psi_j^v(V(v, psi_j^v)) }
//   u_{i+1}      = (1-t) u_i + t V(u_i, psi_{n-i-1}^{u_i})
//   psi^u(v)     = psi((1-t)u + tv)^2 / 16d
//
// with n = ceil(d^2/eps); the least index i <= n whose (u_i, psi_{n-i}^{u_i})
// passes both conjuncts is returned. The tower iterates this construction
// i0 = ceil(log_tau(et/6d^2) - 1) times (et = (1-tau)^2 eps / (6+8d)) with
// anticipating counterfunctions at each level, producing a point that wins
// against the caller's (Delta, V) at accuracy eps.
//
// Function values are closures; evaluation is lazy, memoized per chain, and
// budgeted. Deep psi chains run on a dedicated big-stack thread.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "hsdm/operators.hpp"

namespace hsdm {

using PhiFn = std::function<double(const Point&)>;

struct CounterfunctionPair {
  std::function<double(const Point&, const PhiFn&)> Delta;
  std::function<Point(const Point&, const PhiFn&)> V;
};

struct EvalBudget {
  std::uint64_t limit = 1'000'000;
  std::uint64_t used = 0;
};
using BudgetPtr = std::shared_ptr<EvalBudget>;

struct BudgetExceededError : std::runtime_error {
  explicit BudgetExceededError(const std::string& what) : std::runtime_error(what) {}
};

struct EpsProjectionResult {
  Point u;
  PhiFn phi;
  std::uint64_t index_used = 0;
};

// A(et, u, v, p): ||u-p||^2 <= et^4/8d^2 + ||(1 - et^2/6d^2) u + (et^2/6d^2) v - p||^2
bool a_predicate(double eps_tilde, const Point& u, const Point& v, const Point& p, int d);

EpsProjectionResult eps_projection(const Point& v0, const OperatorPtr& T, double t,
                                   double eps, const CounterfunctionPair& cf,
                                   const Point& witness, int d, const BudgetPtr& budget,
                                   std::optional<std::uint64_t> n_override = {});

// Wins against two pairs simultaneously: Delta = min{Delta_1, Delta_2}, V
// picks the branch whose blended point lies closer to v0; t_i used for the
// respective branch's blends.
EpsProjectionResult eps_projection_pair(const Point& v0, const OperatorPtr& T, double t1,
                                        double t2, double eps,
                                        const CounterfunctionPair& cf1,
                                        const CounterfunctionPair& cf2, const Point& witness,
                                        int d, const BudgetPtr& budget,
                                        std::optional<std::uint64_t> n_override = {});

struct TowerOverrides {
  // replaces n = ceil(8 d^4 / et^4) in every projection level (the inner
  // accuracy becomes d^2/n); the postcondition audit is unaffected
  std::optional<std::uint64_t> n_eps_tilde;
  std::optional<int> i0;
};

struct TowerResult {
  Point u_star;
  PhiFn phi;
  double eps_tilde = 0.0;
  int i0 = 0;
  std::uint64_t n_inner = 0;   // recursion length per projection level
  std::uint64_t evals = 0;     // counterfunction evaluations consumed
  std::string trace;
};

TowerResult picard_tower(const Point& p, const OperatorPtr& T, const OperatorPtr& G,
                         double tau, double eps, double t, const CounterfunctionPair& cf,
                         int d, const Point& witness, const BudgetPtr& budget,
                         const TowerOverrides& overrides = {});

// Re-evaluates both conjuncts of the solved problem against the original
// (Delta, V): ||Tu-u|| <= Delta(u,phi) + slack, and the guarded implication
// at accuracy eps. Returns true when both hold.
bool audit_tower_result(const TowerResult& r, const OperatorPtr& T, const OperatorPtr& G,
                        double t, double eps, const CounterfunctionPair& cf,
                        double slack = 1e-9);

// Runs fn on a thread with `stack_bytes` of stack; rethrows its exception.
void run_with_big_stack(const std::function<void()>& fn,
                        std::size_t stack_bytes = std::size_t(512) << 20);

}  // namespace hsdm
