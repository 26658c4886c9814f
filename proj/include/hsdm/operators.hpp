#pragma once

// Operator algebra over the finite-dimensional Hilbert-space model:
// metric projections (ball, box, halfspace, affine subspace), compositions,
// convex combinations, affine maps and constants, together with the
// contraction G = I - mu*F built from a Lipschitz strongly monotone F and
// the condition moduli (SQNE chain, Bauschke transport).

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hsdm/point.hpp"

namespace hsdm {

struct Operator;
using OperatorPtr = std::shared_ptr<const Operator>;

enum class OpKind {
  ProjectBall,
  ProjectBox,
  ProjectHalfspace,
  ProjectAffine,
  Compose,
  ConvexCombine,
  AffineMap,
  ConstantMap,
};

// Lipschitz class claimed for an operator tree: nonexpansive (L = 1) or a
// strict contraction with factor tau in [0,1).
struct LipschitzClass {
  bool is_contraction = false;
  double tau = 1.0;  // meaningful only when is_contraction
};

struct Operator {
  OpKind kind;

  // ProjectBall
  Point center;
  double radius = 0.0;

  // ProjectBox
  Point lo, hi;

  // ProjectHalfspace  { x : <normal,x> <= offset }
  Point normal;
  double offset = 0.0;

  // ProjectAffine  { shift + span(basis) }; basis orthonormalized at build
  std::vector<Point> basis;
  Point shift;

  // Compose (applied right to left: children.back() first)
  std::vector<OperatorPtr> children;

  // ConvexCombine: (1-weight)*left + weight*right
  double weight = 0.0;
  OperatorPtr left, right;

  // AffineMap: x -> M x + shift  (row-major rows)
  std::vector<Point> matrix;

  // ConstantMap
  Point value;

  LipschitzClass claimed;
  std::optional<Point> fixed_point_witness;

  std::size_t dim = 0;
};

OperatorPtr make_project_ball(Point center, double radius);
OperatorPtr make_project_box(Point lo, Point hi);
OperatorPtr make_project_halfspace(Point normal, double offset);
// basis vectors need not be orthonormal; Gram-Schmidt runs here with a
// 1e-12 pivot threshold
OperatorPtr make_project_affine(std::vector<Point> basis, Point shift);
OperatorPtr make_compose(std::vector<OperatorPtr> ops);
OperatorPtr make_convex_combine(double weight, OperatorPtr left, OperatorPtr right);
OperatorPtr make_affine_map(std::vector<Point> matrix, Point shift,
                            LipschitzClass claimed = {false, 1.0});
OperatorPtr make_constant(Point value);

Point apply_operator(const Operator& op, const Point& x);
inline Point apply_operator(const OperatorPtr& op, const Point& x) {
  return apply_operator(*op, x);
}

// ||op(x) - x||
double fixed_point_residual(const Operator& op, const Point& x);
inline double fixed_point_residual(const OperatorPtr& op, const Point& x) {
  return fixed_point_residual(*op, x);
}

// kappa-Lipschitz, eta-strongly monotone map F(x) = M x + b
struct MonotoneOpSpec {
  std::vector<Point> matrix;
  Point shift;
  double kappa = 1.0;
  double eta = 1.0;
  std::size_t dim = 0;
};

MonotoneOpSpec make_monotone_affine(std::vector<Point> matrix, Point shift,
                                    double kappa, double eta);
// Gradient of x -> q/2 ||x - a||^2, i.e. F(x) = q (x - a); kappa = eta = q.
MonotoneOpSpec make_quadratic_gradient(double q, Point a);

Point apply_monotone(const MonotoneOpSpec& f, const Point& x);

// G = I - mu*F as an affine operator, claiming contraction factor
// tau = sqrt(1 - mu(2 eta - mu kappa^2)); requires 0 < mu < 2 eta / kappa^2.
OperatorPtr contraction_from_monotone(const MonotoneOpSpec& f, double mu);

// tau = sqrt(1 - mu(2 eta - mu kappa^2)) alone
double contraction_factor(double kappa, double eta, double mu);

// Modulus rho(d, eps) tied to a family of N operators.
struct ConditionModulus {
  std::function<double(int d, double eps)> rho;
  int N = 1;
};

using EpsModulus = std::function<double(double)>;

// chi_d(N-1, eps) built from SQNE moduli omega_i(d, .) and a continuity
// modulus alpha:
//   chi_d(0, eps)   = min{alpha(eps/2), eps}
//   chi_d(n+1, eps) = min{omega(d, chi_d(n,eps)/2), chi_d(n,eps)/2}
// with omega = pointwise min of the omega_i.
EpsModulus sqne_chain_modulus(const std::vector<std::function<double(int, double)>>& omegas,
                              const EpsModulus& alpha, int N, int d);

// rho(d, eps) = rho_hat(d, eps/(2N+1)): transports the composition modulus
// to every cyclic permutation of the family.
ConditionModulus bauschke_modulus(const ConditionModulus& rho_hat, int N);

// Default SQNE modulus for metric projections: omega(d, eps) = eps^2 / (2d).
std::function<double(int, double)> projection_sqne_modulus();

// Closed-form fixed point of a projection kind, used to seed near-fixed
// samples: returns the projection of x onto the operator's set. Throws for
// kinds without a set interpretation.
Point project_to_fixed_set(const Operator& op, const Point& x);

}  // namespace hsdm
