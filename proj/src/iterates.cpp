#include "hsdm/iterates.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hsdm {

namespace {

// operators indexed 1..N, [n] = n mod N realized as T_{((n-1) mod N)+1}
const Operator& cyclic_op(const std::vector<OperatorPtr>& ops, std::uint64_t one_based) {
  const std::uint64_t N = ops.size();
  return *ops[(one_based - 1) % N];
}

}  // namespace

Point apply_resolvent_map(const Operator& T, const Operator& G, double lam, const Point& x) {
  Point tx = apply_operator(T, x);
  return blend(lam, tx, apply_operator(G, tx));
}

Trajectory iterate(Scheme scheme, const IterateProblem& p, const Schedule& s,
                   const Point& u0, std::uint64_t steps) {
  if (!all_finite(u0)) throw std::invalid_argument("non-finite start point");
  Trajectory traj;
  traj.scheme = scheme;
  traj.schedule = s;
  traj.points.reserve(steps + 1);
  traj.points.push_back(u0);

  Point u = u0;
  for (std::uint64_t n = 0; n < steps; ++n) {
    const double lam = lambda_at(s, n + 1);
    Point next;
    switch (scheme) {
      case Scheme::HsdmSingle:
      case Scheme::HsdmCyclic: {
        const Operator& T = scheme == Scheme::HsdmSingle ? *p.ops.at(0)
                                                         : cyclic_op(p.ops, n + 1);
        Point tu = apply_operator(T, u);
        next = blend(lam, tu, apply_operator(*p.G, tu));
        traj.residual_log.push_back(dist(next, tu));
        break;
      }
      case Scheme::Viscosity: {
        Point fu = apply_operator(*p.G, u);
        Point tu = apply_operator(*p.ops.at(0), u);
        next = blend(1.0 - lam, fu, tu);
        traj.residual_log.push_back(dist(next, tu));
        break;
      }
      case Scheme::ViscosityPost: {
        Point tu = apply_operator(*p.ops.at(0), u);
        next = blend(1.0 - lam, apply_operator(*p.G, tu), tu);
        traj.residual_log.push_back(dist(next, tu));
        break;
      }
      case Scheme::ProjGrad: {
        if (!p.F || !p.projector) throw std::invalid_argument("ProjGrad needs F and P_S");
        Point step = sub(u, scale(p.mu, apply_monotone(*p.F, u)));
        next = apply_operator(*p.projector, step);
        traj.residual_log.push_back(dist(next, u));
        break;
      }
    }
    if (!all_finite(next)) throw std::runtime_error("iteration diverged (non-finite point)");
    traj.points.push_back(next);
    u = std::move(next);
  }
  return traj;
}

Point resolvent_point(const Operator& T, const Operator& G, double tau, double lam,
                      double tol, const Point& seed) {
  if (tau >= 1.0 || lam <= 0.0 || lam > 1.0 || tol <= 0.0)
    throw std::invalid_argument("resolvent_point: need tau < 1, lam in (0,1], tol > 0");
  const double q = 1.0 - lam * (1.0 - tau);  // contraction factor of T^(lambda)
  Point v = seed;
  Point next = apply_resolvent_map(T, G, lam, v);
  const double d0 = dist(next, v);
  if (d0 <= tol) return next;
  // ||v_k - fix|| <= q^k d0 / (1-q); residual <= (1+q) ||v_k - fix||
  const double denom = lam * (1.0 - tau);
  std::uint64_t bound =
      q > 0.0 ? std::uint64_t(std::ceil(std::log(tol * denom / (2.0 * d0)) / std::log(q))) + 1
              : 2;
  bound = std::max<std::uint64_t>(bound, 2);
  v = std::move(next);
  for (std::uint64_t k = 0; k < 10 * bound; ++k) {
    next = apply_resolvent_map(T, G, lam, v);
    if (dist(next, v) <= tol) return next;
    v = std::move(next);
  }
  throw std::runtime_error("resolvent iteration failed to converge: contraction claim violated?");
}

std::vector<Point> resolvent_path(const Operator& T, const Operator& G, double tau,
                                  const Schedule& s, const std::vector<std::uint64_t>& indices,
                                  double tol, const Point& seed) {
  std::vector<Point> out;
  out.reserve(indices.size());
  for (auto n : indices)
    out.push_back(resolvent_point(T, G, tau, lambda_at(s, n), tol, seed));
  return out;
}

std::vector<double> asymptotic_residuals(const Trajectory& traj,
                                         const std::vector<OperatorPtr>& ops,
                                         const std::vector<std::uint64_t>& window) {
  const std::uint64_t N = ops.size();
  std::vector<double> out;
  out.reserve(window.size());
  for (auto n : window) {
    if (n >= traj.points.size())
      throw std::out_of_range("window index beyond trajectory length");
    Point x = traj.points[n];
    for (std::uint64_t j = 1; j <= N; ++j) x = apply_operator(cyclic_op(ops, n + j), x);
    out.push_back(dist(traj.points[n], x));
  }
  return out;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  os.precision(17);
  const std::size_t m = traj.points.empty() ? 0 : traj.points.front().size();
  os << "n,lambda";
  for (std::size_t k = 0; k < m; ++k) os << ",x" << k;
  os << ",residual\n";
  for (std::size_t n = 0; n < traj.points.size(); ++n) {
    os << n << ',' << (n == 0 ? 0.0 : lambda_at(traj.schedule, n));
    for (double v : traj.points[n]) os << ',' << v;
    os << ',' << (n == 0 ? 0.0 : traj.residual_log[n - 1]) << '\n';
  }
  return os.str();
}

}  // namespace hsdm
