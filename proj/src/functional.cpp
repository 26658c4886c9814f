#include "hsdm/functional.hpp"

#include <pthread.h>

#include <cmath>
#include <cstring>
#include <exception>
#include <sstream>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hsdm {

namespace {

struct MemoKey {
  std::uint64_t level;
  Point v;
  bool operator==(const MemoKey& o) const { return level == o.level && v == o.v; }
};

struct MemoKeyHash {
  std::size_t operator()(const MemoKey& k) const {
    std::uint64_t h = 1469598103934665603ull ^ k.level;
    for (double x : k.v) {
      std::uint64_t bits;
      std::memcpy(&bits, &x, sizeof bits);
      h = (h ^ bits) * 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

void tick(const BudgetPtr& b, const char* where) {
  if (++b->used > b->limit)
    throw BudgetExceededError(std::string("evaluation budget exceeded in ") + where);
}

// One challenged pair: Delta, V and the blend weight used with this V.
struct Challenge {
  std::function<double(const Point&, const PhiFn&)> Delta;
  std::function<Point(const Point&, const PhiFn&)> V;
  double t;
};

// State of one run of the psi/u recursion. The psi chain is evaluated
// lazily; values are memoized per (level, point).
struct ProjectionCore {
  Point v0;
  OperatorPtr T;
  double t_psi;  // blend weight inside psi^u and the u-recursion driver
  double eps;
  int d;
  std::vector<Challenge> challenges;  // 1 (single) or 2 (pair variant)
  BudgetPtr budget;
  std::uint64_t n = 1;
  std::unordered_map<MemoKey, double, MemoKeyHash> memo;

  double delta_combined(const Point& u, const PhiFn& phi) {
    double m = 0.0;
    bool first = true;
    for (const auto& c : challenges) {
      tick(budget, "Delta");
      const double v = c.Delta(u, phi);
      m = first ? v : std::min(m, v);
      first = false;
    }
    return m;
  }

  // branch-selected V: the candidate whose blended point lies closest to v0
  std::pair<Point, double> v_combined(const Point& u, const PhiFn& phi) {
    if (challenges.size() == 1) {
      tick(budget, "V");
      return {challenges[0].V(u, phi), challenges[0].t};
    }
    tick(budget, "V");
    Point c1 = challenges[0].V(u, phi);
    tick(budget, "V");
    Point c2 = challenges[1].V(u, phi);
    const double d1 = dist(v0, blend(challenges[0].t, u, c1));
    const double d2 = dist(v0, blend(challenges[1].t, u, c2));
    if (d1 <= d2) return {std::move(c1), challenges[0].t};
    return {std::move(c2), challenges[1].t};
  }

  PhiFn psi_pow(std::uint64_t level, Point u) {
    // psi_level^u(v) = psi_level((1-t)u + tv)^2 / 16d
    return [this, level, u = std::move(u)](const Point& v) {
      const double p = psi_eval(level, blend(t_psi, u, v));
      return p * p / (16.0 * d);
    };
  }

  double psi_eval(std::uint64_t level, const Point& v) {
    if (level <= 1) return 1.0;
    MemoKey key{level, v};
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    PhiFn phiv = psi_pow(level - 1, v);
    const double dv = delta_combined(v, phiv);
    auto [vv, tv] = v_combined(v, phiv);
    (void)tv;
    const double val = std::min(dv, phiv(vv));
    memo.emplace(std::move(key), val);
    return val;
  }

  bool accepted(const Point& u, const PhiFn& phi) {
    // deep psi towers square their values each level and underflow to 0.0
    // in double precision; without slack "res_u < Delta" then rejects even
    // exact fixed points.  Same allowance as the post-hoc audit.
    constexpr double kSlack = 1e-9;
    const double res_u = fixed_point_residual(*T, u);
    for (const auto& c : challenges) {
      tick(budget, "Delta");
      if (!(res_u < c.Delta(u, phi) + kSlack)) return false;
      tick(budget, "V");
      Point v = c.V(u, phi);
      if (fixed_point_residual(*T, v) < phi(v)) {
        Point vt = blend(c.t, u, v);
        if (!(norm2(sub(v0, u)) <= norm2(sub(v0, vt)) + eps + 1e-12)) return false;
      }
    }
    return true;
  }

  EpsProjectionResult run(const Point& witness) {
    const auto clamp1 = [](std::int64_t x) {
      return std::uint64_t(x < 1 ? 1 : x);
    };
    Point u = witness;
    for (std::uint64_t i = 1; i <= n; ++i) {
      PhiFn phi = psi_pow(clamp1(std::int64_t(n) - std::int64_t(i)), u);
      if (accepted(u, phi)) return {u, std::move(phi), i};
      if (i == n) break;
      PhiFn phi_next = psi_pow(clamp1(std::int64_t(n) - std::int64_t(i) - 1), u);
      auto [vv, tb] = v_combined(u, phi_next);
      u = blend(tb, u, vv);
    }
    throw std::runtime_error(
        "eps_projection: no index accepted; a precondition is violated "
        "(witness not a fixed point, or counterfunctions out of range)");
  }
};

std::uint64_t recursion_length(double eps, int d, std::optional<std::uint64_t> n_override) {
  if (n_override) {
    if (*n_override < 1) throw std::invalid_argument("n override must be >= 1");
    return *n_override;
  }
  const double n = std::ceil(double(d) * double(d) / eps);
  if (!(n < 9e18)) throw std::overflow_error("recursion length overflows 64 bits");
  return std::uint64_t(n);
}

void validate_projection_inputs(double t, double eps, int d, const OperatorPtr& T,
                                const Point& witness) {
  if (t < 0.0 || t > 1.0) throw std::invalid_argument("t outside [0,1]");
  if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (fixed_point_residual(*T, witness) > 1e-10)
    throw std::invalid_argument("witness is not a fixed point of T");
}

EpsProjectionResult projection_inline(const Point& v0, const OperatorPtr& T,
                                      std::vector<Challenge> ch, double t_psi, double eps,
                                      const Point& witness, int d, const BudgetPtr& budget,
                                      std::optional<std::uint64_t> n_override) {
  auto core = std::make_shared<ProjectionCore>();
  core->v0 = v0;
  core->T = T;
  core->t_psi = t_psi;
  core->eps = eps;
  core->d = d;
  core->challenges = std::move(ch);
  core->budget = budget;
  core->n = recursion_length(eps, d, n_override);
  // keep the memo table (and the chain it closes over) alive inside the
  // returned phi closure
  EpsProjectionResult r = core->run(witness);
  PhiFn inner = std::move(r.phi);
  r.phi = [core, inner](const Point& v) { return inner(v); };
  return r;
}

}  // namespace

void run_with_big_stack(const std::function<void()>& fn, std::size_t stack_bytes) {
  struct Ctx {
    const std::function<void()>* fn;
    std::exception_ptr err;
  } ctx{&fn, nullptr};
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, stack_bytes);
  pthread_t tid;
  auto entry = [](void* p) -> void* {
    auto* c = static_cast<Ctx*>(p);
    try {
      (*c->fn)();
    } catch (...) {
      c->err = std::current_exception();
    }
    return nullptr;
  };
  if (pthread_create(&tid, &attr, entry, &ctx) != 0) {
    pthread_attr_destroy(&attr);
    throw std::runtime_error("failed to spawn evaluation thread");
  }
  pthread_join(tid, nullptr);
  pthread_attr_destroy(&attr);
  if (ctx.err) std::rethrow_exception(ctx.err);
}

bool a_predicate(double eps_tilde, const Point& u, const Point& v, const Point& p, int d) {
  if (eps_tilde <= 0.0) throw std::invalid_argument("eps_tilde must be positive");
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  const double d2 = double(d) * double(d);
  const double e2 = eps_tilde * eps_tilde;
  const double w = e2 / (6.0 * d2);
  Point mix = blend(w, u, v);
  return norm2(sub(u, p)) <= e2 * e2 / (8.0 * d2) + norm2(sub(mix, p)) + 1e-12;
}

EpsProjectionResult eps_projection(const Point& v0, const OperatorPtr& T, double t,
                                   double eps, const CounterfunctionPair& cf,
                                   const Point& witness, int d, const BudgetPtr& budget,
                                   std::optional<std::uint64_t> n_override) {
  validate_projection_inputs(t, eps, d, T, witness);
  std::vector<Challenge> ch{{cf.Delta, cf.V, t}};
  EpsProjectionResult out;
  run_with_big_stack([&] {
    out = projection_inline(v0, T, std::move(ch), t, eps, witness, d, budget, n_override);
  });
  return out;
}

EpsProjectionResult eps_projection_pair(const Point& v0, const OperatorPtr& T, double t1,
                                        double t2, double eps,
                                        const CounterfunctionPair& cf1,
                                        const CounterfunctionPair& cf2, const Point& witness,
                                        int d, const BudgetPtr& budget,
                                        std::optional<std::uint64_t> n_override) {
  validate_projection_inputs(t1, eps, d, T, witness);
  if (t2 < 0.0 || t2 > 1.0) throw std::invalid_argument("t2 outside [0,1]");
  std::vector<Challenge> ch{{cf1.Delta, cf1.V, t1}, {cf2.Delta, cf2.V, t2}};
  EpsProjectionResult out;
  run_with_big_stack([&] {
    out = projection_inline(v0, T, std::move(ch), t1, eps, witness, d, budget, n_override);
  });
  return out;
}

namespace {

CounterfunctionPair memory_pair(PhiFn phi_prev, Point u_prev) {
  CounterfunctionPair m;
  m.Delta = [phi_prev](const Point& v, const PhiFn&) { return phi_prev(v); };
  m.V = [u_prev](const Point&, const PhiFn&) { return u_prev; };
  return m;
}

}  // namespace

TowerResult picard_tower(const Point& p, const OperatorPtr& T, const OperatorPtr& G,
                         double tau, double eps, double t, const CounterfunctionPair& cf,
                         int d, const Point& witness, const BudgetPtr& budget,
                         const TowerOverrides& overrides) {
  if (tau < 0.0 || tau >= 1.0) throw std::invalid_argument("tau outside [0,1)");
  if (eps <= 0.0 || eps > 1.0) throw std::invalid_argument("eps outside (0,1]");
  if (d < 1) throw std::invalid_argument("d must be >= 1");

  TowerResult res;
  const double d2 = double(d) * double(d);
  res.eps_tilde = (1.0 - tau) * (1.0 - tau) / (6.0 + 8.0 * d) * eps;
  const double et = res.eps_tilde;

  if (overrides.i0) {
    res.i0 = *overrides.i0;
  } else if (tau == 0.0) {
    res.i0 = 1;  // log_tau undefined; the error term 3 d^2 tau^{i+1} vanishes
  } else {
    res.i0 = int(std::max(0.0, std::ceil(std::log(et / (6.0 * d2)) / std::log(tau) - 1.0)));
  }
  const double w = et * et / (6.0 * d2);
  double acc = et * et * et * et / (8.0 * d2);
  if (overrides.n_eps_tilde) acc = d2 / double(*overrides.n_eps_tilde);
  res.n_inner = recursion_length(acc, d, overrides.n_eps_tilde);

  const std::uint64_t used0 = budget->used;
  std::ostringstream trace;
  trace << "eps_tilde=" << et << " i0=" << res.i0 << " n_inner=" << res.n_inner << "\n";

  run_with_big_stack([&] {
    const int i0 = res.i0;
    // counterfunction ladder, built top-down: cfs[i0] is the caller's pair,
    // cfs[i] anticipates the next level's solution functionals
    std::vector<std::shared_ptr<CounterfunctionPair>> cfs(i0 + 1);
    cfs[i0] = std::make_shared<CounterfunctionPair>(cf);
    for (int i = i0 - 1; i >= 0; --i) {
      auto next = cfs[i + 1];
      const double t1 = (i == i0 - 1) ? t : w;
      auto solve = [=, &overrides](const Point& u, const PhiFn& phi) {
        return eps_projection_pair(apply_operator(G, u), T, t1, w, acc, *next,
                                   memory_pair(phi, u), witness, d, budget,
                                   overrides.n_eps_tilde);
      };
      auto lvl = std::make_shared<CounterfunctionPair>();
      lvl->V = [solve](const Point& u, const PhiFn& phi) { return solve(u, phi).u; };
      lvl->Delta = [solve](const Point& u, const PhiFn& phi) { return solve(u, phi).phi(u); };
      cfs[i] = lvl;
    }

    // solution ladder, bottom-up
    EpsProjectionResult cur;
    if (i0 == 0) {
      cur = eps_projection(p, T, t, acc, *cfs[0], witness, d, budget, overrides.n_eps_tilde);
      trace << "level 0 (top) index " << cur.index_used << "\n";
    } else {
      cur = eps_projection(p, T, w, acc, *cfs[0], witness, d, budget, overrides.n_eps_tilde);
      trace << "level 0 index " << cur.index_used << "\n";
      for (int i = 1; i <= i0; ++i) {
        const double t1 = (i == i0) ? t : w;
        EpsProjectionResult nxt = eps_projection_pair(
            apply_operator(G, cur.u), T, t1, w, acc, *cfs[i], memory_pair(cur.phi, cur.u),
            witness, d, budget, overrides.n_eps_tilde);
        trace << "level " << i << " index " << nxt.index_used << "\n";
        cur = std::move(nxt);
      }
    }
    res.u_star = std::move(cur.u);
    res.phi = std::move(cur.phi);
  });

  res.evals = budget->used - used0;
  res.trace = trace.str();
  return res;
}

bool audit_tower_result(const TowerResult& r, const OperatorPtr& T, const OperatorPtr& G,
                        double t, double eps, const CounterfunctionPair& cf, double slack) {
  bool ok = false;
  run_with_big_stack([&] {
    const double res_u = fixed_point_residual(*T, r.u_star);
    const double del = cf.Delta(r.u_star, r.phi);
    if (!(res_u <= del + slack)) {
      ok = false;
      return;
    }
    Point v = cf.V(r.u_star, r.phi);
    if (fixed_point_residual(*T, v) < r.phi(v)) {
      Point gu = apply_operator(*G, r.u_star);
      Point vt = blend(t, r.u_star, v);
      ok = norm2(sub(gu, r.u_star)) < norm2(sub(gu, vt)) + eps + slack;
    } else {
      ok = true;  // implication holds vacuously
    }
  });
  return ok;
}

}  // namespace hsdm
