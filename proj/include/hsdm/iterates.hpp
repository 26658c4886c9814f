#pragma once

// Iteration schemes:
//   HsdmSingle   u_{n+1} = (1-l_{n+1}) T u_n + l_{n+1} G(T u_n)
//   HsdmCyclic   same with T_{[n+1]}, [n] = n mod N, operators indexed 1..N
//   Viscosity    u_{n+1} = l_{n+1} f(u_n) + (1-l_{n+1}) T u_n
//   ProjGrad     u_{n+1} = P_S(u_n - mu F(u_n))
// plus the resolvent path v_n = (1-l_n) T v_n + l_n G(T v_n) solved by
// Banach iteration of T^(lambda), contraction factor 1 - lambda(1-tau).

#include <cstdint>
#include <string>
#include <vector>

#include "hsdm/operators.hpp"
#include "hsdm/schedules.hpp"

namespace hsdm {

enum class Scheme { HsdmSingle, HsdmCyclic, Viscosity, ViscosityPost, ProjGrad };

struct Trajectory {
  std::vector<Point> points;
  Scheme scheme = Scheme::HsdmSingle;
  Schedule schedule;
  // per-step ||T_{[n+1]} u_n - u_{n+1}||
  std::vector<double> residual_log;
};

struct IterateProblem {
  std::vector<OperatorPtr> ops;  // single scheme: one entry; cyclic: T_1..T_N
  OperatorPtr G;                 // contraction (HSDM / viscosity f)
  const MonotoneOpSpec* F = nullptr;  // ProjGrad only
  OperatorPtr projector;              // ProjGrad only: P_S
  double mu = 1.0;                    // ProjGrad only
};

// ViscosityPost applies f after T: u_{n+1} = l f(T u_n) + (1-l) T u_n,
// which coincides with HsdmSingle for f = G.
Trajectory iterate(Scheme scheme, const IterateProblem& p, const Schedule& s,
                   const Point& u0, std::uint64_t steps);

// T^(lambda)(x) = (1-lambda) T x + lambda G(T x)
Point apply_resolvent_map(const Operator& T, const Operator& G, double lam, const Point& x);

// Solves v = T^(lambda)(v) to ||v - T^(lambda) v|| <= tol by Banach
// iteration; throws if the a-priori iteration bound (x10) is exceeded,
// which signals a violated contraction claim.
Point resolvent_point(const Operator& T, const Operator& G, double tau, double lam,
                      double tol, const Point& seed);

std::vector<Point> resolvent_path(const Operator& T, const Operator& G, double tau,
                                  const Schedule& s, const std::vector<std::uint64_t>& indices,
                                  double tol, const Point& seed);

// ||u_n - T_{[n+N]} ... T_{[n+1]} u_n|| for each n in window
std::vector<double> asymptotic_residuals(const Trajectory& traj,
                                         const std::vector<OperatorPtr>& ops,
                                         const std::vector<std::uint64_t>& window);

// CSV export, header "n,lambda,x0..x{m-1},residual"
std::string trajectory_csv(const Trajectory& traj);

}  // namespace hsdm
