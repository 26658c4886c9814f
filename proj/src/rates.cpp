#include "hsdm/rates.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

namespace hsdm {

namespace mp = boost::multiprecision;

namespace {

constexpr std::uint64_t kDefaultMaxBits = std::uint64_t(1) << 20;
constexpr std::uint64_t kEnumCap = 1'000'000;  // monotonization loop guard

BigRat rat_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite real");
  if (x == 0.0) return BigRat(0);
  int exp = 0;
  const double m = std::frexp(x, &exp);
  const auto mant = std::int64_t(std::ldexp(m, 53));
  exp -= 53;
  BigRat r(mant);
  if (exp > 0)
    r *= BigRat(BigInt(1) << exp);
  else if (exp < 0)
    r /= BigRat(BigInt(1) << (-exp));
  return r;
}

std::uint64_t bit_size(const BigInt& v) {
  if (v == 0) return 1;
  return std::uint64_t(mp::msb(v < 0 ? BigInt(-v) : v)) + 1;
}

void check_bits(const BigInt& v, std::uint64_t max_bits, const std::string& what) {
  if (bit_size(v) > max_bits) throw RateBudgetExceeded(what);
}

void tick(RateBudget* b, const std::string& what) {
  if (++b->apps > b->max_apps) throw RateBudgetExceeded(what);
}

// base^exp with an a-priori bit bound; exp must be representable once checked
BigInt checked_pow(const BigInt& base, const BigInt& exp, std::uint64_t max_bits,
                   const std::string& what) {
  if (exp < 0) throw std::invalid_argument("negative exponent");
  if (exp == 0) return 1;
  if (base == 0) return 0;
  if (base == 1) return 1;
  if (BigInt(bit_size(base)) * exp > BigInt(max_bits)) throw RateBudgetExceeded(what);
  return mp::pow(base, exp.convert_to<unsigned>());
}

std::string big_str(const BigInt& v) { return v.str(); }

}  // namespace

MajorantFn majorant_identity() {
  MajorantFn f;
  f.eval = [](const BigInt& n) { return n < 1 ? BigInt(1) : n; };
  f.monotone = true;
  f.is_poly = true;
  f.coeff = 1;
  f.deg = 1;
  f.desc = "id";
  return f;
}

MajorantFn majorant_constant(BigInt c) {
  if (c < 1) throw std::invalid_argument("majorant outputs must be >= 1");
  MajorantFn f;
  f.eval = [c](const BigInt&) { return c; };
  f.monotone = true;
  f.is_poly = true;
  f.coeff = c;
  f.deg = 0;
  f.desc = "const " + big_str(c);
  return f;
}

MajorantFn majorant_poly(BigInt coeff, std::uint64_t deg) {
  if (coeff < 1) throw std::invalid_argument("majorant outputs must be >= 1");
  if (deg == 0) return majorant_constant(std::move(coeff));
  MajorantFn f;
  std::string desc = big_str(coeff) + "*n^" + std::to_string(deg);
  f.eval = [coeff, deg, desc](const BigInt& n) {
    BigInt m = n < 1 ? BigInt(1) : n;
    return coeff * checked_pow(m, BigInt(deg), kDefaultMaxBits, desc);
  };
  f.monotone = true;
  f.is_poly = true;
  f.coeff = std::move(coeff);
  f.deg = deg;
  f.desc = desc;
  return f;
}

MajorantFn majorant_table(std::vector<BigInt> values) {
  if (values.empty()) throw std::invalid_argument("empty table");
  for (const auto& v : values)
    if (v < 1) throw std::invalid_argument("majorant outputs must be >= 1");
  bool mono = true;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[i - 1]) mono = false;
  MajorantFn f;
  f.eval = [values](const BigInt& n) {
    if (n <= 1) return values.front();
    if (n >= BigInt(values.size())) return values.back();
    return values[n.convert_to<std::size_t>() - 1];
  };
  f.monotone = mono;
  f.desc = "table";
  return f;
}

MajorantFn majorant_function(std::function<BigInt(const BigInt&)> fn, bool monotone,
                             std::string desc) {
  MajorantFn f;
  f.eval = [fn = std::move(fn)](const BigInt& n) {
    BigInt v = fn(n < 1 ? BigInt(1) : n);
    return v < 1 ? BigInt(1) : v;
  };
  f.monotone = monotone;
  f.desc = std::move(desc);
  return f;
}

MajorantFn monotonize(const MajorantFn& f) {
  if (f.monotone) return f;
  MajorantFn m;
  std::string desc = f.desc + "^M";
  m.eval = [f, desc](const BigInt& n) {
    BigInt nn = n < 1 ? BigInt(1) : n;
    if (nn > BigInt(kEnumCap)) throw RateBudgetExceeded(desc + "(" + big_str(nn) + ")");
    BigInt best = f.eval(1);
    for (BigInt i = 2; i <= nn; ++i) {
      BigInt v = f.eval(i);
      if (v > best) best = v;
    }
    return best;
  };
  m.monotone = true;
  m.desc = desc;
  return m;
}

std::pair<MajorantFn, MajorantFn> build_majorant_chain(const MajorantFn& f, unsigned d) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  MajorantFn fM = monotonize(f);
  const BigInt a = 16 * BigInt(d);
  MajorantFn ft;
  if (fM.is_poly && fM.deg >= 1) {
    // c (16d n^2)^e >= 16d n^2 for n >= 1 since c >= 1, so the max collapses
    BigInt cc = fM.coeff * checked_pow(a, BigInt(fM.deg), kDefaultMaxBits, fM.desc + "~");
    ft = majorant_poly(std::move(cc), 2 * fM.deg);
  } else if (fM.is_poly && fM.coeff <= a) {
    ft = majorant_poly(a, 2);  // constant c <= 16d: second argument wins
  } else {
    ft.eval = [fM, a](const BigInt& n) {
      BigInt nn = n < 1 ? BigInt(1) : n;
      BigInt arg = a * nn * nn;
      BigInt v = fM.eval(arg);
      return v > arg ? v : arg;
    };
    ft.monotone = true;
  }
  ft.desc = f.desc + "~";
  return {std::move(fM), std::move(ft)};
}

MajorantFn iterate_majorant(const MajorantFn& g, const BigInt& count, RateBudget* budget,
                            bool allow_closed_form) {
  if (count < 0) throw std::invalid_argument("negative iteration count");
  if (count == 0) return majorant_identity();
  if (count == 1) return g;
  std::string desc = g.desc + "^(" + big_str(count) + ")";
  if (allow_closed_form && g.is_poly) {
    const BigInt& c = g.coeff;
    const std::uint64_t e = g.deg;
    if (e == 0) return majorant_constant(c);
    tick(budget, desc);
    if (e == 1) {
      // (c n)^(m) = c^m n
      if (c == 1) return majorant_identity();
      BigInt cc = checked_pow(c, count, budget->max_bits, desc);
      auto r = majorant_poly(std::move(cc), 1);
      r.desc = desc;
      return r;
    }
    // (c n^e)^(m) = c^((e^m - 1)/(e - 1)) n^(e^m)
    BigInt E = checked_pow(BigInt(e), count, 64, desc);
    BigInt S = (E - 1) / (e - 1);
    BigInt cc = checked_pow(c, S, budget->max_bits, desc);
    auto r = majorant_poly(std::move(cc), E.convert_to<std::uint64_t>());
    r.desc = desc;
    return r;
  }
  if (count > BigInt(budget->max_apps)) throw RateBudgetExceeded(desc);
  const auto m = count.convert_to<std::uint64_t>();
  const std::uint64_t max_bits = budget->max_bits;
  MajorantFn r;
  r.eval = [g, m, budget, max_bits, desc](const BigInt& x) {
    BigInt v = x;
    for (std::uint64_t i = 0; i < m; ++i) {
      tick(budget, desc);
      v = g.eval(v);
      check_bits(v, max_bits, desc);
    }
    return v;
  };
  r.monotone = g.monotone;
  r.desc = desc;
  return r;
}

TowerParams tower_params(unsigned d, double eps, double tau) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("eps outside (0,1]");
  if (!(tau >= 0.0 && tau < 1.0)) throw std::invalid_argument("tau outside [0,1)");
  const BigRat e = rat_from_double(eps);
  const BigRat t = rat_from_double(tau);
  const BigRat om = BigRat(1) - t;
  TowerParams p;
  p.eps_tilde = om * om * e / BigRat(6 + 8 * BigInt(d));
  BigRat et4 = p.eps_tilde * p.eps_tilde;
  et4 *= et4;
  p.n_eps_tilde = ceil_rat(BigRat(8 * mp::pow(BigInt(d), 4)) / et4);
  if (tau == 0.0) {
    p.i0 = 1;  // the geometric error term vanishes; one tower level suffices
  } else {
    const BigRat x = p.eps_tilde / BigRat(6 * BigInt(d) * BigInt(d));
    BigRat tp = t;
    int i = 0;
    while (tp > x) {
      tp *= t;
      if (++i > 1'000'000) throw std::overflow_error("tower depth i0 overflows");
    }
    p.i0 = i;
  }
  return p;
}

RateValue k_tower(const MajorantFn& f, unsigned d, double eps, double tau,
                  const KTowerOptions& opts, RateBudget* budget) {
  RateBudget local;
  if (!budget) budget = &local;
  try {
    TowerParams p = tower_params(d, eps, tau);
    const BigInt n = opts.n_eps_tilde.value_or(p.n_eps_tilde);
    const int i0 = opts.i0.value_or(p.i0);
    if (n < 1 || i0 < 0) throw std::invalid_argument("bad tower overrides");
    MajorantFn level = build_majorant_chain(f, d).second;  // f_0 = f~
    BigInt k = 1;
    for (int i = 0; i <= i0; ++i) {
      MajorantFn tilde_i = build_majorant_chain(level, d).second;
      MajorantFn step = iterate_majorant(tilde_i, n, budget, opts.allow_closed_form);
      tick(budget, "k_" + std::to_string(i));
      k = step.eval(k);
      check_bits(k, budget->max_bits, "k_" + std::to_string(i));
      if (i < i0) level = iterate_majorant(level, n, budget, opts.allow_closed_form);
    }
    return RateValue::of(std::move(k));
  } catch (const RateBudgetExceeded& e) {
    return RateValue::exceeded(e.expr);
  }
}

namespace {

GFn monotonized_g_tilde(const GFn& g, bool g_monotone) {
  GFn gt = [g](const BigInt& n) {
    BigInt v = g(n);
    return v > n ? v : n;
  };
  if (g_monotone) return gt;
  return [gt](const BigInt& n) {
    if (n > BigInt(kEnumCap)) throw RateBudgetExceeded("g~^M(" + n.str() + ")");
    BigInt best = gt(1);
    for (BigInt i = 2; i <= n; ++i) {
      BigInt v = gt(i);
      if (v > best) best = v;
    }
    return best;
  };
}

GFn chi_of(const Schedule& sched, const XiOptions& opts) {
  if (opts.chi_override) return *opts.chi_override;
  return [sched](const BigInt& k) { return chi_big(sched, k); };
}

struct XiParts {
  RateValue k;   // tower value k_{i0}(f~)
  RateValue xi;  // chi(d * k)
};

// shared core of Theorem-style Xi: builds f from (eps, g, chi, h), runs the
// tower at eps_d = (eps/2)^4 / (8 (1-tau)^2 d^2), applies chi(d * .)
XiParts xi_parts(double eps, const GFn& g, const Schedule& sched, unsigned d, double tau,
                 const XiOptions& opts, RateBudget* budget) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (eps > 1.0) eps = 1.0;
  const BigRat e = rat_from_double(eps);
  const BigRat taur = rat_from_double(tau);
  const BigRat half = e / 2;
  const BigRat factor = BigRat(6 * BigInt(d)) * (BigRat(1) - taur) / (half * half);
  GFn gtM = monotonized_g_tilde(g, opts.g_monotone);
  GFn chi = chi_of(sched, opts);
  MajorantFn f = majorant_function(
      [=, &sched](const BigInt& n) {
        BigInt x = chi(BigInt(d) * n);
        BigInt hx = h_big(sched, gtM(x));
        BigInt v = ceil_rat(factor * BigRat(hx));
        return v < 1 ? BigInt(1) : v;
      },
      true, "f");  // chi, h and the monotonized g~ are all nondecreasing
  const double eh = eps / 2.0;
  const double eps_d = eh * eh * eh * eh / (8.0 * (1.0 - tau) * (1.0 - tau) * d * d);
  if (!(eps_d > 0.0)) throw std::invalid_argument("tower accuracy underflows");

  XiParts out;
  if (opts.k_override)
    out.k = RateValue::of(*opts.k_override);
  else
    out.k = k_tower(opts.f_override ? *opts.f_override : f, d, std::min(eps_d, 1.0), tau,
                    opts.tower, budget);
  if (!out.k.finite()) {
    out.xi = out.k;
    return out;
  }
  try {
    RateBudget local;
    RateBudget* b = budget ? budget : &local;
    BigInt xi = chi(BigInt(d) * out.k.value);
    check_bits(xi, b->max_bits, "chi(d*k)");
    out.xi = RateValue::of(std::move(xi));
  } catch (const RateBudgetExceeded& ex) {
    out.xi = RateValue::exceeded(ex.expr);
  }
  return out;
}

std::uint64_t to_u64_or_throw(const BigInt& v, const std::string& what) {
  if (v > BigInt(std::numeric_limits<std::uint64_t>::max())) throw RateBudgetExceeded(what);
  return v.convert_to<std::uint64_t>();
}

std::uint64_t require_modulus(const Schedule& s, ModulusKind kind, const ModulusArgs& args,
                              const char* name) {
  Modulus m = modulus(s, kind, args);
  if (std::holds_alternative<NoModulus>(m))
    throw std::domain_error(std::string("schedule admits no modulus ") + name);
  return std::get<std::uint64_t>(m);
}

}  // namespace

RateValue xi_single(double eps, const GFn& g, const Schedule& sched, unsigned d, double tau,
                    const XiOptions& opts, RateBudget* budget) {
  return xi_parts(eps, g, sched, d, tau, opts, budget).xi;
}

XiFullResult xi_full(double eps, const GFn& g, const Schedule& sched, unsigned d, double tau,
                     XiFullMode mode, const XiOptions& opts, RateBudget* budget) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (eps > 1.0) eps = 1.0;
  XiFullResult out;
  const double base =
      mode == XiFullMode::VipModulus ? eps / (2.0 * d * (2.0 + tau)) : eps;
  if (mode == XiFullMode::VipModulus) out.delta = base;

  // c = phi1(ceil((phi2(arg) + ceil(log(6d/base))) / (1-tau)))
  const double phi2_arg =
      mode == XiFullMode::VipModulus ? base / 6.0 : (1.0 - tau) * eps / (6.0 * d);
  ModulusArgs a2;
  a2.eps = phi2_arg;
  Modulus m2 = modulus(sched, ModulusKind::Phi2, a2);
  if (std::holds_alternative<NoModulus>(m2)) {
    out.bound = RateValue::none("phi2 does not exist for this schedule");
    out.c = out.bound;
    out.eps_prime = out.bound;
    return out;
  }
  const std::uint64_t phi2v = std::get<std::uint64_t>(m2);
  const double lg = std::log(6.0 * d / base);
  const auto lgc = std::uint64_t(std::ceil(std::max(lg, 0.0)));
  const BigInt karg =
      ceil_rat(BigRat(BigInt(phi2v) + lgc) / (BigRat(1) - rat_from_double(tau)));
  ModulusArgs a1;
  a1.k = to_u64_or_throw(karg, "phi1 argument");
  const std::uint64_t c = require_modulus(sched, ModulusKind::Phi1, a1, "phi1");
  out.c = RateValue::of(BigInt(c));

  GFn g_c = [g, c](const BigInt& n) { return n + c + g(n + c); };
  XiParts parts = xi_parts(base / 6.0, g_c, sched, d, tau, opts, budget);
  if (mode == XiFullMode::VipModulus) out.eps_prime = parts.k;
  out.bound = parts.xi;
  if (out.bound.finite()) out.bound.value += c;
  return out;
}

namespace {

std::uint64_t chi_hat_inner(double epsv, const Schedule& sched, unsigned d, int N,
                            double tau) {
  if (!(epsv > 0.0)) throw RateBudgetExceeded("chi_hat at nonpositive accuracy");
  ModulusArgs a4;
  a4.eps = epsv / (4.0 * d);
  a4.N = N;
  const std::uint64_t p4 = require_modulus(sched, ModulusKind::Phi4, a4, "phi4");
  ModulusArgs a3;
  a3.eps = epsv / (2.0 * d);
  a3.n = p4;
  a3.tau = tau;
  const std::uint64_t p3 = require_modulus(sched, ModulusKind::Phi3, a3, "phi3");
  const BigInt chi_arg = ceil_rat(BigRat(BigInt(N) * d) / (2 * rat_from_double(epsv)));
  const BigInt chi_v = chi_big(sched, chi_arg < 1 ? BigInt(1) : chi_arg);
  const std::uint64_t cv = to_u64_or_throw(chi_v, "chi term of chi_hat");
  return std::max(p3, cv);
}

}  // namespace

RateValue asy_rate(double eps, const Schedule& sched, unsigned d, int N, double tau,
                   const AsyOptions& opts) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const double e = opts.rho ? opts.rho->rho(int(d), eps / N) : eps;
  try {
    return RateValue::of(BigInt(chi_hat_inner(e, sched, d, N, tau)));
  } catch (const std::domain_error& ex) {
    return RateValue::none(ex.what());
  } catch (const RateBudgetExceeded& ex) {
    return RateValue::exceeded(ex.expr);
  }
}

BigRat omega_d(double eps, const GFn& g, std::uint64_t n0, const Schedule& sched, unsigned d,
               double tau, OmegaReading reading) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const BigRat e = rat_from_double(eps);
  const BigRat e2 = e * e;
  ModulusArgs a3;
  a3.eps = (eps * eps) / (3.0 * d);
  a3.n = n0;
  a3.tau = tau;
  const std::uint64_t p3 = require_modulus(sched, ModulusKind::Phi3, a3, "phi3");
  const auto gt = [&g](const BigInt& n) {
    BigInt v = g(n);
    return v > n ? v : n;
  };
  BigInt D;
  if (reading == OmegaReading::ProofConsistent) {
    D = gt(BigInt(p3)) - n0;
  } else {
    D = gt(p3 >= n0 ? BigInt(p3 - n0) : BigInt(0));
  }
  if (D <= 0) D = 1;  // division guard
  return e2 / BigRat(18 * BigInt(d) * D);
}

BigRat omega_d_monotone(double eps, const GFn& g, std::uint64_t n, const Schedule& sched,
                        unsigned d, double tau, OmegaReading reading) {
  if (n > kEnumCap) throw RateBudgetExceeded("Omega_d^M(" + std::to_string(n) + ")");
  BigRat best = omega_d(eps, g, 0, sched, d, tau, reading);
  for (std::uint64_t i = 1; i <= n; ++i) {
    BigRat v = omega_d(eps, g, i, sched, d, tau, reading);
    if (v > best) best = v;
  }
  return best;
}

RateValue xi_family(double eps, const GFn& g, const Schedule& sched,
                    const ConditionModulus& rho, unsigned d, double tau, int N,
                    const XiOptions& opts, RateBudget* budget) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (eps > 1.0) eps = 1.0;
  RateBudget local;
  if (!budget) budget = &local;
  try {
    const BigRat e = rat_from_double(eps);
    const BigRat om = BigRat(1) - rat_from_double(tau);
    const BigRat e2 = e * e;
    const BigInt n0a = chi_big(sched, ceil_rat(BigRat(96 * BigInt(d)) / (om * e2)));
    const BigInt n0b =
        chi_big(sched, ceil_rat(BigRat(48 * BigInt(d) * BigInt(d)) / (om * e2)));
    const std::uint64_t n0 = to_u64_or_throw(n0a > n0b ? n0a : n0b, "n0");

    GFn gtM = monotonized_g_tilde(g, opts.g_monotone);
    const double eps_half = eps / 2.0;
    MajorantFn f = majorant_function(
        [=, &sched, &rho](const BigInt& k) {
          const double kd = k.convert_to<double>();
          const double y = 1.0 / (double(N) * kd);
          if (!(y > 0.0)) throw RateBudgetExceeded("rho(d, 1/Nk) underflows");
          const std::uint64_t m =
              std::max(n0, chi_hat_inner(rho.rho(int(d), y), sched, d, N, tau));
          const BigRat thr = omega_d_monotone(eps_half, gtM, m, sched, d, tau);
          const double rv = rho.rho(int(d), thr.convert_to<double>());
          if (!(rv > 0.0)) throw RateBudgetExceeded("rho threshold underflows");
          BigInt v = ceil_rat(BigRat(1) / rat_from_double(rv));
          return v < 1 ? BigInt(1) : v;
        },
        true, "f_family");

    const double ed_num = (1.0 - tau) * eps * eps / 96.0;
    const double eps_d = ed_num * ed_num / (2.0 * d * d);
    RateValue kv = opts.k_override
                       ? RateValue::of(*opts.k_override)
                       : k_tower(opts.f_override ? *opts.f_override : f, d,
                                 std::min(eps_d, 1.0), tau, opts.tower, budget);
    if (!kv.finite()) return kv;

    const double kd = kv.value.convert_to<double>();
    const double y = 1.0 / (kd * N);
    if (!(y > 0.0)) return RateValue::exceeded("chi_hat(rho(d, 1/(kN))) underflows");
    const std::uint64_t m = std::max(n0, chi_hat_inner(rho.rho(int(d), y), sched, d, N, tau));
    const std::uint64_t res =
        phi3_monotone(sched, eps * eps / (12.0 * d * d), m, tau);
    return RateValue::of(BigInt(res));
  } catch (const std::domain_error& ex) {
    return RateValue::none(ex.what());
  } catch (const RateBudgetExceeded& ex) {
    return RateValue::exceeded(ex.expr);
  }
}

std::string Certificate::to_json() const {
  nlohmann::ordered_json j;
  j["instance"] = instance_id;
  j["epsilon"] = epsilon;
  j["g"] = g_desc;
  switch (bound.status) {
    case RateValue::Status::Finite:
      j["bound"] = bound.value.str();
      break;
    case RateValue::Status::BudgetExceeded:
      j["bound"] = nullptr;
      j["bound_symbolic"] = bound.expr;
      break;
    case RateValue::Status::NoModulus:
      j["bound"] = nullptr;
      j["no_modulus"] = bound.expr;
      break;
  }
  if (empirical_witness) j["empirical_witness"] = *empirical_witness;
  if (vip_epsilon_prime) {
    if (vip_epsilon_prime->finite())
      j["vip_epsilon_prime"] = vip_epsilon_prime->value.str();
    else
      j["vip_epsilon_prime"] = vip_epsilon_prime->expr;
  }
  j["status"] = status;
  if (!detail.empty()) j["detail"] = detail;
  return j.dump(2);
}

}  // namespace hsdm
