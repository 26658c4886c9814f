#include "hsdm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace hsdm {

namespace {

double window_diameter(const std::vector<Point>& pts, std::uint64_t lo, std::uint64_t hi) {
  double worst = 0.0;
  for (std::uint64_t i = lo; i <= hi; ++i)
    for (std::uint64_t j = i + 1; j <= hi; ++j)
      worst = std::max(worst, dist(pts[i], pts[j]));
  return worst;
}

std::uint64_t schedule_h(const Schedule& s, std::uint64_t n) {
  ModulusArgs a;
  a.n = n;
  return std::get<std::uint64_t>(modulus(s, ModulusKind::H, a));
}

Point apply_chain(const std::vector<OperatorPtr>& ops, Point x) {
  for (const auto& op : ops) x = apply_operator(op, std::move(x));
  return x;
}

}  // namespace

MetaWitness empirical_metastability(const Trajectory& traj, const MetaQuery& q) {
  if (!(q.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!q.g) throw std::invalid_argument("g is required");
  MetaWitness out;
  std::uint64_t required = 0;
  for (std::uint64_t n = 0; n <= q.cap; ++n)
    required = std::max(required, n + q.g(n) + 1);
  if (traj.points.size() < required) {
    out.required_length = required;
    return out;
  }
  for (std::uint64_t n = 0; n <= q.cap; ++n) {
    if (window_diameter(traj.points, n, n + q.g(n)) <= q.epsilon + kVerifySlack) {
      out.least_n = n;
      return out;
    }
  }
  out.exhausted = true;
  return out;
}

VipReport check_vip_certificate(const OperatorPtr& G, const Point& u_n,
                                const std::vector<OperatorPtr>& T_ops, double eps,
                                double eps_prime, std::size_t samples, std::uint64_t seed) {
  if (T_ops.empty()) throw std::invalid_argument("no operators given");
  if (samples == 0) throw std::invalid_argument("no samples requested");
  VipReport rep;
  rep.seed = seed;
  const Point gu = apply_operator(G, u_n);
  const Point dir = sub(gu, u_n);
  const std::size_t m = u_n.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double box = 1.0 + norm(u_n);
  for (std::size_t s = 0; s < samples; ++s) {
    Point x(m);
    for (std::size_t i = 0; i < m; ++i) x[i] = u_n[i] + box * unit(rng);
    // land on (approximately) the common fixed set by cyclic projection
    for (int round = 0; round < 64; ++round) {
      for (const auto& op : T_ops) x = project_to_fixed_set(*op, x);
      double r = 0.0;
      for (const auto& op : T_ops) r = std::max(r, fixed_point_residual(*op, x));
      if (r <= 1e-12) break;
    }
    if (eps_prime > 0.0) {
      Point noise(m);
      double nn = 0.0;
      for (auto& c : noise) {
        c = unit(rng);
        nn += c * c;
      }
      nn = std::sqrt(nn);
      if (nn > 0.0) x = add(x, scale(eps_prime / (2.0 * nn), noise));
    }
    const Point end = apply_chain(T_ops, x);
    if (dist(end, x) > eps_prime + 1e-12) continue;
    ++rep.admissible;
    const double val = inner(dir, sub(x, u_n));
    rep.worst_margin = std::max(rep.worst_margin, val - eps);
    if (val > eps + kVerifySlack) ++rep.violations;
  }
  rep.samples = samples;
  return rep;
}

namespace {

LemmaReport lemma_switch(const LemmaInputs& in) {
  LemmaReport r;
  const double d = in.d;
  if (in.d < 1 || !(in.eps > 0.0 && in.eps <= 1.0) || dist(in.u_star, in.v) > d) {
    r.detail = "side condition ||u*-v|| <= d or eps range violated";
    return r;
  }
  r.applicable = true;
  const double t = in.eps / (3.0 * d * d);
  const Point wt = blend(t, in.u_star, in.v);
  r.premises_hold = norm2(sub(in.u_star, in.u)) <=
                    in.eps * in.eps / (2.0 * d * d) + norm2(sub(in.u, wt)) + 1e-15;
  const double lhs = inner(sub(in.u, in.u_star), sub(in.v, in.u_star));
  r.margin = in.eps - lhs;
  r.conclusion_holds = lhs < in.eps + kVerifySlack;
  return r;
}

LemmaReport lemma_vip_modulus(const LemmaInputs& in) {
  LemmaReport r;
  const double d = in.d;
  const double diam = std::max({dist(in.u, in.v), dist(in.u, in.w), dist(in.v, in.w)});
  if (in.d < 1 || !(in.eps > 0.0) || !(in.tau >= 0.0 && in.tau < 1.0) || diam > d || !in.G) {
    r.detail = "needs G, d >= pairwise distances, tau in [0,1)";
    return r;
  }
  r.applicable = true;
  const Point gu = apply_operator(in.G, in.u);
  const Point gv = apply_operator(in.G, in.v);
  const bool p1 = dist(in.u, in.v) <= in.eps / (2.0 * d * (2.0 + in.tau)) + 1e-15;
  const bool p2 = inner(sub(gu, in.u), sub(in.w, in.u)) <= in.eps / 2.0 + 1e-15;
  r.premises_hold = p1 && p2;
  const double lhs = inner(sub(gv, in.v), sub(in.w, in.v));
  r.margin = in.eps - lhs;
  r.conclusion_holds = lhs <= in.eps + kVerifySlack;
  return r;
}

LemmaReport lemma_core(const LemmaInputs& in, bool diagonal) {
  LemmaReport r;
  if (!in.T || !in.G || in.d < 1 || !(in.eps > 0.0) || !(in.tau >= 0.0 && in.tau < 1.0)) {
    r.detail = "needs T, G, d >= 1, eps > 0, tau in [0,1)";
    return r;
  }
  const double d = in.d;
  Point vn = in.v_n;
  if (vn.empty())
    vn = resolvent_point(*in.T, *in.G, in.tau, lambda_at(in.schedule, in.n), 1e-12,
                         in.u_star);
  if (dist(vn, in.u_star) > d) {
    r.detail = "||v_n - u*|| > d";
    return r;
  }
  r.applicable = true;
  const double h = double(schedule_h(in.schedule, in.n));
  const double om = 1.0 - in.tau;
  const double res = fixed_point_residual(*in.T, in.u_star);
  const Point gdir = sub(apply_operator(in.G, in.u_star), in.u_star);
  bool prem;
  if (diagonal) {
    prem = res <= in.eps * in.eps / (6.0 * d * om * h) + 1e-15 &&
           inner(gdir, sub(vn, in.u_star)) <= in.eps * in.eps / (2.0 * om) + 1e-15;
  } else {
    const Point& v = in.v;
    prem = res <= in.eps * in.eps / (9.0 * d * om * h) + 1e-15 &&
           inner(gdir, sub(vn, v)) <= in.eps * in.eps / (3.0 * om) + 1e-15 &&
           inner(gdir, sub(v, in.u_star)) <= in.eps * in.eps / (3.0 * om) + 1e-15;
  }
  r.premises_hold = prem;
  const double val = dist(vn, in.u_star);
  r.margin = in.eps - val;
  r.conclusion_holds = val <= in.eps + kVerifySlack;
  return r;
}

LemmaReport lemma_perm(const LemmaInputs& in) {
  LemmaReport r;
  const int N = int(in.family.size());
  if (N < 2 || !in.rho_hat || in.d < 1 || !(in.eps > 0.0)) {
    r.detail = "needs >= 2 operators, rho_hat, d, eps";
    return r;
  }
  // w must be a common fixed point within d of the probe
  for (const auto& op : in.family)
    if (fixed_point_residual(*op, in.w) > kVerifySlack) {
      r.detail = "w is not a common fixed point";
      return r;
    }
  if (dist(in.u, in.w) > in.d) {
    r.detail = "||x - p|| > d";
    return r;
  }
  r.applicable = true;
  const double thr = in.rho_hat(in.d, in.eps / (2.0 * N + 1.0));
  bool prem = false;
  for (int k = 1; k <= N - 1; ++k) {
    // T_{N-k} ... T_1 T_N ... T_{N-k+1} x, rightmost factor applied first
    Point y = in.u;
    for (int i = N - k + 1; i <= N; ++i) y = apply_operator(in.family[i - 1], y);
    for (int i = 1; i <= N - k; ++i) y = apply_operator(in.family[i - 1], y);
    if (dist(y, in.u) < thr) {
      prem = true;
      break;
    }
  }
  r.premises_hold = prem;
  double worst = 0.0;
  for (const auto& op : in.family)
    worst = std::max(worst, dist(apply_operator(op, in.u), in.u));
  r.margin = in.eps - worst;
  r.conclusion_holds = worst < in.eps + kVerifySlack;
  return r;
}

LemmaReport lemma_fact_sum(const LemmaInputs& in) {
  LemmaReport r;
  if (in.n < in.m) {
    r.detail = "needs n >= m";
    return r;
  }
  r.applicable = true;
  r.premises_hold = true;
  double sum = 0.0;
  for (std::uint64_t i = in.m; i <= in.n; ++i) {
    double prod = lambda_at(in.schedule, i);
    for (std::uint64_t j = i + 1; j <= in.n; ++j)
      prod *= 1.0 - lambda_at(in.schedule, j);
    sum += prod;
  }
  r.margin = 1.0 - sum;
  r.conclusion_holds = sum <= 1.0 + kVerifySlack;
  std::ostringstream os;
  os << "sum = " << sum;
  r.detail = os.str();
  return r;
}

}  // namespace

LemmaReport check_lemma(LemmaKind kind, const LemmaInputs& in) {
  switch (kind) {
    case LemmaKind::Switch:
      return lemma_switch(in);
    case LemmaKind::VipModulus:
      return lemma_vip_modulus(in);
    case LemmaKind::CoreSingle:
      return lemma_core(in, false);
    case LemmaKind::CoreSingleDiag:
      return lemma_core(in, true);
    case LemmaKind::Perm:
      return lemma_perm(in);
    case LemmaKind::FactSum:
      return lemma_fact_sum(in);
  }
  throw std::logic_error("unknown lemma kind");
}

bool check_subsequence_property(const std::vector<Point>& seq, const Point& u, double eps,
                                const IndexFn& g, std::uint64_t m) {
  const std::uint64_t gm = g(m);
  if (gm >= seq.size() || m >= seq.size()) throw std::out_of_range("sequence too short");
  const std::uint64_t stopped = dist(seq[gm], u) > eps / 2.0 ? gm : m;
  if (dist(seq[stopped], u) > eps / 2.0) return true;  // premise fails: vacuous
  return dist(seq[gm], seq[m]) <= eps + kVerifySlack;
}

ConfinementReport check_confinement(const Trajectory& traj,
                                    const std::vector<OperatorPtr>& T_ops,
                                    const OperatorPtr& G, const Point& v,
                                    const std::optional<Point>& w, int d, double tau,
                                    ConfinementMode mode) {
  ConfinementReport rep;
  if (traj.points.empty() || !G || d < 1) {
    rep.detail = "empty trajectory or missing G";
    return rep;
  }
  const double r0 = mode == ConfinementMode::DiamSingle ? d / 2.0 : d / 4.0;
  Point gw;  // fixed point of G
  if (w) {
    gw = *w;
  } else {
    gw = v;
    for (int i = 0; i < 1'000'000 && fixed_point_residual(*G, gw) > 1e-13; ++i)
      gw = apply_operator(G, gw);
  }
  if (fixed_point_residual(*G, gw) > 1e-6) {
    rep.detail = "could not locate the fixed point of G";
    return rep;
  }
  const bool h1 = dist(traj.points.front(), v) <= r0 + kVerifySlack;
  const bool h2 = fixed_point_residual(*G, v) <= d * (1.0 - tau) / 4.0 + kVerifySlack;
  const bool h3 = dist(v, gw) <= d / (4.0 * (1.0 + tau)) + kVerifySlack;
  rep.hypotheses_ok = h1 && h2 && h3;
  if (!rep.hypotheses_ok) {
    std::ostringstream os;
    os << "hypotheses: u0 " << h1 << ", residual " << h2 << ", fixpoint distance " << h3;
    rep.detail = os.str();
    return rep;
  }
  double worst = 0.0;
  for (const auto& p : traj.points) {
    worst = std::max(worst, dist(p, v));
    worst = std::max(worst, dist(apply_operator(G, p), v));
  }
  if (mode == ConfinementMode::DiamSingle && !T_ops.empty()) {
    const std::uint64_t top = std::min<std::uint64_t>(traj.points.size(), 50);
    for (std::uint64_t n = 1; n <= top; ++n) {
      Point vn = resolvent_point(*T_ops.front(), *G, tau, lambda_at(traj.schedule, n),
                                 1e-10, v);
      worst = std::max(worst, dist(vn, v));
      worst = std::max(worst, dist(apply_operator(G, vn), v));
    }
  }
  rep.max_distance = worst;
  rep.confined = worst <= d / 2.0 + kVerifySlack;
  return rep;
}

double adversary_blend_weight(double eps, double tau, int d) {
  return (eps / 2.0) * (eps / 2.0) / (6.0 * (1.0 - tau) * (1.0 - tau) * d * d);
}

namespace {

struct ResolventCache {
  AdversaryInstance inst;
  std::map<std::uint64_t, Point> cache;

  const Point& at(std::uint64_t j) {
    auto it = cache.find(j);
    if (it != cache.end()) return it->second;
    Point v = resolvent_point(*inst.T, *inst.G, inst.tau, lambda_at(inst.schedule, j),
                              inst.resolvent_tol, inst.witness);
    return cache.emplace(j, std::move(v)).first->second;
  }

  std::uint64_t g_tilde(std::uint64_t j) const {
    const std::uint64_t gj = inst.g ? inst.g(j) : j;
    return std::max(j, gj);
  }

  // g~ stopped once the path re-enters the eps/2 ball around u
  std::uint64_t stopped(const Point& u, std::uint64_t j) {
    const std::uint64_t gt = g_tilde(j);
    return dist(at(gt), u) > inst.eps / 2.0 ? gt : j;
  }

  std::uint64_t least_j(const Point& u, const PhiFn& phi) {
    for (std::uint64_t j = 0; j <= inst.max_index; ++j) {
      const std::uint64_t a = stopped(u, j);
      const Point& va = at(a);
      if (fixed_point_residual(*inst.T, va) < phi(va)) return j;
    }
    return 0;
  }

  double delta(const Point& u, const PhiFn& phi) {
    const std::uint64_t a = stopped(u, least_j(u, phi));
    const double h = double(schedule_h(inst.schedule, a));
    const double e2 = (inst.eps / 2.0) * (inst.eps / 2.0);
    return e2 / (6.0 * inst.d * (1.0 - inst.tau) * h);
  }

  Point value(const Point& u, const PhiFn& phi) { return at(stopped(u, least_j(u, phi))); }
};

}  // namespace

CounterfunctionPair adversary_suite(const AdversaryInstance& inst,
                                    AdversaryStrategy strategy) {
  if (!inst.T || !inst.G) throw std::invalid_argument("instance needs T and G");
  CounterfunctionPair cf;
  switch (strategy) {
    case AdversaryStrategy::Constant:
      cf.Delta = [](const Point&, const PhiFn&) { return 1.0; };
      cf.V = [w = inst.witness](const Point&, const PhiFn&) { return w; };
      return cf;
    case AdversaryStrategy::Random: {
      auto rng = std::make_shared<std::mt19937_64>(inst.seed);
      const Point w = inst.witness;
      const double radius = inst.d / 2.0;
      cf.Delta = [rng](const Point&, const PhiFn&) {
        std::uniform_real_distribution<double> u(1e-6, 1.0);
        return u(*rng);
      };
      cf.V = [rng, w, radius](const Point&, const PhiFn&) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Point p = w;
        for (auto& c : p) c += radius * u(*rng) / std::sqrt(double(p.size()));
        return p;
      };
      return cf;
    }
    case AdversaryStrategy::Anticipating: {
      auto st = std::make_shared<ResolventCache>();
      st->inst = inst;
      cf.Delta = [st](const Point& u, const PhiFn& phi) { return st->delta(u, phi); };
      cf.V = [st](const Point& u, const PhiFn& phi) { return st->value(u, phi); };
      return cf;
    }
    case AdversaryStrategy::Branch: {
      auto st = std::make_shared<ResolventCache>();
      st->inst = inst;
      const Point x = inst.challenge.empty() ? inst.witness : inst.challenge;
      const double t = adversary_blend_weight(inst.eps, inst.tau, inst.d);
      const OperatorPtr G = inst.G;
      cf.Delta = [st](const Point& u, const PhiFn& phi) { return st->delta(u, phi); };
      cf.V = [st, x, t, G](const Point& u, const PhiFn& phi) {
        Point cand = st->value(u, phi);
        const Point gu = apply_operator(G, u);
        if (dist(gu, blend(t, u, cand)) <= dist(gu, blend(t, u, x))) return cand;
        return x;
      };
      return cf;
    }
  }
  throw std::logic_error("unknown strategy");
}

}  // namespace hsdm
