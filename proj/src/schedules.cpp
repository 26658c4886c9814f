#include "hsdm/schedules.hpp"

#include <cmath>
#include <limits>

namespace hsdm {

namespace {

// smallest rational p/q with q <= 10^6 matching v to 1e-12
std::pair<long, long> to_rational(double v) {
  for (long q = 1; q <= 1000000; ++q) {
    const double p = v * q;
    const long pr = std::lround(p);
    if (pr >= 1 && std::abs(p - pr) < 1e-12) return {pr, q};
  }
  throw std::invalid_argument("parameter is not a small rational");
}

std::uint64_t to_u64_checked(double v) {
  if (!(v < 9e18)) throw std::overflow_error("modulus value exceeds 64-bit range");
  return static_cast<std::uint64_t>(v);
}

}  // namespace

Schedule make_power_schedule(long rho_num, long rho_den, long c_num, long c_den,
                             int N_period) {
  if (rho_num <= 0 || rho_den <= 0 || rho_num > rho_den)
    throw std::invalid_argument("rho must lie in (0,1]");
  if (c_num <= 0 || c_den <= 0 || c_num > c_den)
    throw std::invalid_argument("c must lie in (0,1]");
  if (N_period < 1) throw std::invalid_argument("N_period must be >= 1");
  return Schedule{rho_num, rho_den, c_num, c_den, N_period};
}

Schedule make_power_schedule(double rho, double c, int N_period) {
  auto [rn, rd] = to_rational(rho);
  auto [cn, cd] = to_rational(c);
  return make_power_schedule(rn, rd, cn, cd, N_period);
}

double lambda_at(const Schedule& s, std::uint64_t n) {
  return s.c() * std::pow(double(n) + 1.0, -s.rho());
}

BigInt floor_root(const BigInt& x, unsigned q) {
  if (x < 0) throw std::invalid_argument("negative radicand");
  if (q == 0) throw std::invalid_argument("zeroth root");
  if (x <= 1 || q == 1) return x;
  // Newton iteration from a power-of-two overestimate
  const unsigned bits = static_cast<unsigned>(boost::multiprecision::msb(x)) + 1;
  BigInt r = BigInt(1) << (bits / q + 1);
  while (true) {
    BigInt rq1 = boost::multiprecision::pow(r, q - 1);
    BigInt next = ((q - 1) * r + x / rq1) / q;
    if (next >= r) break;
    r = next;
  }
  while (boost::multiprecision::pow(r, q) > x) --r;
  while (boost::multiprecision::pow(r + 1, q) <= x) ++r;
  return r;
}

BigInt ceil_root(const BigInt& x, unsigned q) {
  BigInt f = floor_root(x, q);
  return boost::multiprecision::pow(f, q) == x ? f : f + 1;
}

BigInt ceil_div(const BigInt& a, const BigInt& b) {
  if (b <= 0) throw std::invalid_argument("nonpositive divisor");
  if (a >= 0) return BigInt((a + b - 1) / b);
  return BigInt(a / b);
}

BigInt ceil_rat(const BigRat& r) {
  return ceil_div(boost::multiprecision::numerator(r),
                  boost::multiprecision::denominator(r));
}

BigInt chi_big(const Schedule& s, const BigInt& k) {
  // need (i+1)^(p/q) >= c (k+1), i.e. i+1 >= ceil((c(k+1))^(q/p))
  BigInt ck = ceil_div(s.c_num * (k + 1), BigInt(s.c_den));
  BigInt target = ceil_root(boost::multiprecision::pow(ck, unsigned(s.rho_den)),
                            unsigned(s.rho_num));
  return target > 0 ? target - 1 : BigInt(0);
}

BigInt h_big(const Schedule& s, const BigInt& n) {
  // h(n) >= (n+1)^(p/q) / c
  BigInt root = ceil_root(boost::multiprecision::pow(n + 1, unsigned(s.rho_num)),
                          unsigned(s.rho_den));
  BigInt h = ceil_div(root * s.c_den, BigInt(s.c_num));
  return h > 0 ? h : BigInt(1);
}

Modulus modulus(const Schedule& s, ModulusKind kind, const ModulusArgs& a) {
  const double rho = s.rho();
  const double c = s.c();
  switch (kind) {
    case ModulusKind::H: {
      BigInt h = h_big(s, BigInt(a.n));
      if (h > std::numeric_limits<std::uint64_t>::max())
        throw std::overflow_error("h exceeds 64-bit range");
      return h.convert_to<std::uint64_t>();
    }
    case ModulusKind::Chi: {
      BigInt v = chi_big(s, BigInt(a.k));
      if (v > std::numeric_limits<std::uint64_t>::max())
        throw std::overflow_error("chi exceeds 64-bit range");
      return v.convert_to<std::uint64_t>();
    }
    case ModulusKind::Phi1: {
      // integral lower bound on sum_{i=1}^n c (i+1)^(-rho)
      const double k = double(a.k);
      double n;
      if (s.rho_num == s.rho_den) {
        n = std::ceil(2.0 * std::exp(k / c)) - 2.0;
      } else {
        const double e = 1.0 - rho;
        n = std::ceil(std::pow(k * e / c + std::pow(2.0, e), 1.0 / e)) - 2.0;
      }
      return std::max<std::uint64_t>(to_u64_checked(std::max(n, 0.0)), a.k);
    }
    case ModulusKind::Phi2: {
      if (a.eps <= 0.0) throw std::invalid_argument("eps must be positive");
      // the difference ratio tends to 1/c for rho = 1: no modulus exists
      if (s.rho_num == s.rho_den) return NoModulus{};
      const double e = 1.0 - rho;
      const double n = std::ceil(std::pow(4.0 * rho / (c * a.eps), 1.0 / e));
      return to_u64_checked(std::max(n, 0.0));
    }
    case ModulusKind::Phi3: {
      if (a.eps <= 0.0) throw std::invalid_argument("eps must be positive");
      if (a.tau < 0.0 || a.tau >= 1.0) throw std::invalid_argument("tau outside [0,1)");
      if (a.eps >= 1.0) return a.n;  // empty/whole product is <= 1
      // prod (1-x) <= exp(-sum x): need sum_{i=n}^m lambda_i >= log(1/eps)/(1-tau)
      const double L = std::log(1.0 / a.eps) / ((1.0 - a.tau) * c);
      double m;
      if (s.rho_num == s.rho_den) {
        m = std::ceil((double(a.n) + 1.0) * std::exp(L)) - 2.0;
      } else {
        const double e = 1.0 - rho;
        m = std::ceil(std::pow(std::pow(double(a.n) + 1.0, e) + L * e, 1.0 / e)) - 2.0;
      }
      return std::max(to_u64_checked(std::max(m, 0.0)), a.n);
    }
    case ModulusKind::Phi4: {
      if (a.eps <= 0.0) throw std::invalid_argument("eps must be positive");
      if (a.N < 1) throw std::invalid_argument("N must be >= 1");
      // tail telescopes: sum_{i=m}^inf (lambda_i - lambda_{i+N}) <= N lambda_m
      const double m = std::ceil(std::pow(double(a.N) * c / a.eps, 1.0 / rho)) - 1.0;
      return to_u64_checked(std::max(m, 0.0));
    }
  }
  throw std::logic_error("unreachable modulus kind");
}

std::uint64_t phi3_monotone(const Schedule& s, double eps, std::uint64_t n, double tau) {
  std::uint64_t best = n;
  for (std::uint64_t i = 0; i <= n; ++i) {
    ModulusArgs a;
    a.eps = eps;
    a.n = i;
    a.tau = tau;
    best = std::max(best, std::get<std::uint64_t>(modulus(s, ModulusKind::Phi3, a)));
  }
  return best;
}

VerifyResult verify_modulus(const Schedule& s, ModulusKind kind, const ModulusArgs& a,
                            std::uint64_t claimed, std::uint64_t cap) {
  if (cap < 1) throw std::invalid_argument("cap must be >= 1");
  // the defining inequalities hold exactly in rational arithmetic; the
  // double-precision re-evaluation needs an ulp-scale relative allowance
  constexpr double kUlps = 1e-12;
  switch (kind) {
    case ModulusKind::H: {
      // claimed interpreted as a whole function is kind-specific; here we
      // check the single index a.n
      if (lambda_at(s, a.n) >= (1.0 / double(claimed)) * (1.0 - kUlps))
        return {true, std::nullopt};
      return {false, a.n};
    }
    case ModulusKind::Chi: {
      const double bound = 1.0 / (double(a.k) + 1.0);
      for (std::uint64_t i = claimed; i <= cap; ++i)
        if (lambda_at(s, i) > bound * (1.0 + kUlps)) return {false, i};
      return {true, std::nullopt};
    }
    case ModulusKind::Phi1: {
      double sum = 0.0;
      for (std::uint64_t i = 1; i <= claimed; ++i) sum += lambda_at(s, i);
      if (sum >= double(a.k)) return {true, std::nullopt};
      return {false, claimed};
    }
    case ModulusKind::Phi2: {
      for (std::uint64_t n = claimed; n <= cap; ++n) {
        const double l0 = lambda_at(s, n), l1 = lambda_at(s, n + 1);
        if (std::abs(l0 - l1) / (l1 * l1) > a.eps) return {false, n};
      }
      return {true, std::nullopt};
    }
    case ModulusKind::Phi3: {
      double prod = 1.0;
      for (std::uint64_t i = a.n; i <= claimed; ++i)
        prod *= 1.0 - lambda_at(s, i) * (1.0 - a.tau);
      // product only shrinks beyond m = claimed
      if (prod <= a.eps) return {true, std::nullopt};
      return {false, claimed};
    }
    case ModulusKind::Phi4: {
      // exact tail value for a nonincreasing schedule
      double tail = 0.0;
      for (int j = 0; j < a.N; ++j) tail += lambda_at(s, claimed + j);
      if (tail <= a.eps) return {true, std::nullopt};
      return {false, claimed};
    }
  }
  throw std::logic_error("unreachable modulus kind");
}

}  // namespace hsdm
