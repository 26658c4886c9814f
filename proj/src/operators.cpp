#include "hsdm/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hsdm {

namespace {

std::size_t tree_dim(const Operator& op) { return op.dim; }

void check_dim(const Operator& op, const Point& x) {
  if (x.size() != op.dim)
    throw std::invalid_argument("operator/point dimension mismatch");
}

}  // namespace

OperatorPtr make_project_ball(Point center, double radius) {
  if (radius < 0.0) throw std::invalid_argument("ball radius must be nonnegative");
  auto op = std::make_shared<Operator>();
  op->kind = OpKind::ProjectBall;
  op->dim = center.size();
  op->center = std::move(center);
  op->radius = radius;
  op->claimed = {false, 1.0};
  return op;
}

OperatorPtr make_project_box(Point lo, Point hi) {
  require_same_dim(lo, hi);
  for (std::size_t k = 0; k < lo.size(); ++k)
    if (lo[k] > hi[k]) throw std::invalid_argument("box lo > hi");
  auto op = std::make_shared<Operator>();
  op->kind = OpKind::ProjectBox;
  op->dim = lo.size();
  op->lo = std::move(lo);
  op->hi = std::move(hi);
  op->claimed = {false, 1.0};
  return op;
}

OperatorPtr make_project_halfspace(Point normal, double offset) {
  if (norm(normal) <= 0.0) throw std::invalid_argument("halfspace normal must be nonzero");
  auto op = std::make_shared<Operator>();
  op->kind = OpKind::ProjectHalfspace;
  op->dim = normal.size();
  op->normal = std::move(normal);
  op->offset = offset;
  op->claimed = {false, 1.0};
  return op;
}

OperatorPtr make_project_affine(std::vector<Point> basis, Point shift) {
  // Gram-Schmidt with 1e-12 pivot threshold; dependent vectors dropped
  std::vector<Point> ortho;
  for (auto& b : basis) {
    require_same_dim(b, shift);
    Point v = b;
    for (const auto& e : ortho) v = sub(v, scale(inner(v, e), e));
    const double n = norm(v);
    if (n > 1e-12) ortho.push_back(scale(1.0 / n, v));
  }
  auto op = std::make_shared<Operator>();
  op->kind = OpKind::ProjectAffine;
  op->dim = shift.size();
  op->basis = std::move(ortho);
  op->shift = std::move(shift);
  op->claimed = {false, 1.0};
  return op;
}

OperatorPtr make_compose(std::vector<OperatorPtr> ops) {
  if (ops.empty()) throw std::invalid_argument("empty composition");
  const std::size_t dim = ops.front()->dim;
  for (const auto& o : ops)
    if (o->dim != dim) throw std::invalid_argument("composition dimension mismatch");
  auto op = std::make_shared<Operator>();
  op->kind = OpKind::Compose;
  op->dim = dim;
  double tau = 1.0;
  bool contraction = false;
  for (const auto& o : ops) {
    if (o->claimed.is_contraction) contraction = true;
    tau *= o->claimed.is_contraction ? o->claimed.tau : 1.0;
  }
  op->claimed = {contraction, contraction ? tau : 1.0};
  op->children = std::move(ops);
  return op;
}

OperatorPtr make_convex_combine(double weight, OperatorPtr left, OperatorPtr right) {
  if (weight < 0.0 || weight > 1.0) throw std::invalid_argument("weight outside [0,1]");
  if (left->dim != right->dim) throw std::invalid_argument("combine dimension mismatch");
  auto op = std::make_shared<Operator>();
  op->kind = OpKind::ConvexCombine;
  op->dim = left->dim;
  op->weight = weight;
  const double ltau = left->claimed.is_contraction ? left->claimed.tau : 1.0;
  const double rtau = right->claimed.is_contraction ? right->claimed.tau : 1.0;
  const double tau = (1.0 - weight) * ltau + weight * rtau;
  op->claimed = {tau < 1.0, tau};
  op->left = std::move(left);
  op->right = std::move(right);
  return op;
}

OperatorPtr make_affine_map(std::vector<Point> matrix, Point shift, LipschitzClass claimed) {
  if (matrix.size() != shift.size()) throw std::invalid_argument("affine map row count mismatch");
  for (const auto& row : matrix) require_same_dim(row, shift);
  auto op = std::make_shared<Operator>();
  op->kind = OpKind::AffineMap;
  op->dim = shift.size();
  op->matrix = std::move(matrix);
  op->shift = std::move(shift);
  op->claimed = claimed;
  return op;
}

OperatorPtr make_constant(Point value) {
  auto op = std::make_shared<Operator>();
  op->kind = OpKind::ConstantMap;
  op->dim = value.size();
  op->value = std::move(value);
  op->claimed = {true, 0.0};
  op->fixed_point_witness = op->value;
  return op;
}

Point apply_operator(const Operator& op, const Point& x) {
  check_dim(op, x);
  switch (op.kind) {
    case OpKind::ProjectBall: {
      Point diff = sub(x, op.center);
      const double n = norm(diff);
      if (n <= op.radius) return x;
      return add(op.center, scale(op.radius / n, diff));
    }
    case OpKind::ProjectBox: {
      Point r(x.size());
      for (std::size_t k = 0; k < x.size(); ++k)
        r[k] = std::clamp(x[k], op.lo[k], op.hi[k]);
      return r;
    }
    case OpKind::ProjectHalfspace: {
      const double viol = inner(op.normal, x) - op.offset;
      if (viol <= 0.0) return x;
      return sub(x, scale(viol / norm2(op.normal), op.normal));
    }
    case OpKind::ProjectAffine: {
      Point diff = sub(x, op.shift);
      Point r = op.shift;
      for (const auto& e : op.basis) r = add(r, scale(inner(diff, e), e));
      return r;
    }
    case OpKind::Compose: {
      Point r = x;
      for (auto it = op.children.rbegin(); it != op.children.rend(); ++it)
        r = apply_operator(**it, r);
      return r;
    }
    case OpKind::ConvexCombine:
      return blend(op.weight, apply_operator(*op.left, x), apply_operator(*op.right, x));
    case OpKind::AffineMap: {
      Point r = op.shift;
      for (std::size_t i = 0; i < op.matrix.size(); ++i) r[i] += inner(op.matrix[i], x);
      return r;
    }
    case OpKind::ConstantMap:
      return op.value;
  }
  throw std::logic_error("unreachable operator kind");
}

double fixed_point_residual(const Operator& op, const Point& x) {
  return dist(apply_operator(op, x), x);
}

MonotoneOpSpec make_monotone_affine(std::vector<Point> matrix, Point shift,
                                    double kappa, double eta) {
  if (kappa <= 0.0 || eta <= 0.0) throw std::invalid_argument("kappa, eta must be positive");
  if (eta > kappa) throw std::invalid_argument("eta > kappa contradicts Cauchy-Schwarz");
  if (matrix.size() != shift.size()) throw std::invalid_argument("monotone map row count mismatch");
  MonotoneOpSpec f;
  f.dim = shift.size();
  f.matrix = std::move(matrix);
  f.shift = std::move(shift);
  f.kappa = kappa;
  f.eta = eta;
  return f;
}

MonotoneOpSpec make_quadratic_gradient(double q, Point a) {
  if (q <= 0.0) throw std::invalid_argument("quadratic weight must be positive");
  std::vector<Point> m(a.size(), Point(a.size(), 0.0));
  for (std::size_t k = 0; k < a.size(); ++k) m[k][k] = q;
  return make_monotone_affine(std::move(m), scale(-q, a), q, q);
}

Point apply_monotone(const MonotoneOpSpec& f, const Point& x) {
  if (x.size() != f.dim) throw std::invalid_argument("monotone map dimension mismatch");
  Point r = f.shift;
  for (std::size_t i = 0; i < f.matrix.size(); ++i) r[i] += inner(f.matrix[i], x);
  return r;
}

double contraction_factor(double kappa, double eta, double mu) {
  if (mu <= 0.0 || mu >= 2.0 * eta / (kappa * kappa))
    throw std::invalid_argument("mu outside (0, 2 eta / kappa^2): no contraction guarantee");
  const double arg = 1.0 - mu * (2.0 * eta - mu * kappa * kappa);
  return std::sqrt(std::max(arg, 0.0));
}

OperatorPtr contraction_from_monotone(const MonotoneOpSpec& f, double mu) {
  const double tau = contraction_factor(f.kappa, f.eta, mu);
  std::vector<Point> m(f.dim, Point(f.dim, 0.0));
  for (std::size_t i = 0; i < f.dim; ++i) {
    m[i][i] = 1.0;
    for (std::size_t j = 0; j < f.dim; ++j) m[i][j] -= mu * f.matrix[i][j];
  }
  return make_affine_map(std::move(m), scale(-mu, f.shift), {true, tau});
}

EpsModulus sqne_chain_modulus(const std::vector<std::function<double(int, double)>>& omegas,
                              const EpsModulus& alpha, int N, int d) {
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  auto omega = [omegas](int dd, double eps) {
    double m = eps;
    bool first = true;
    for (const auto& w : omegas) {
      const double v = w(dd, eps);
      m = first ? v : std::min(m, v);
      first = false;
    }
    return m;
  };
  return [omega, alpha, N, d](double eps) {
    if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
    double chi = std::min(alpha(eps / 2.0), eps);
    for (int n = 0; n < N - 1; ++n) chi = std::min(omega(d, chi / 2.0), chi / 2.0);
    if (chi <= 0.0) throw std::invalid_argument("non-positive modulus output");
    return chi;
  };
}

ConditionModulus bauschke_modulus(const ConditionModulus& rho_hat, int N) {
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  ConditionModulus rho;
  rho.N = N;
  auto base = rho_hat.rho;
  rho.rho = [base, N](int d, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
    return base(d, eps / (2.0 * N + 1.0));
  };
  return rho;
}

std::function<double(int, double)> projection_sqne_modulus() {
  return [](int d, double eps) { return eps * eps / (2.0 * std::max(d, 1)); };
}

Point project_to_fixed_set(const Operator& op, const Point& x) {
  switch (op.kind) {
    case OpKind::ProjectBall:
    case OpKind::ProjectBox:
    case OpKind::ProjectHalfspace:
    case OpKind::ProjectAffine:
      return apply_operator(op, x);
    case OpKind::ConstantMap:
      return op.value;
    default:
      throw std::invalid_argument("operator kind has no closed-form fixed-point set");
  }
}

}  // namespace hsdm
