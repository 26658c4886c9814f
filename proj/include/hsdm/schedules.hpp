#pragma once

// Step-size sequences lambda_n = c/(n+1)^rho with the quantitative moduli
// consumed by the convergence theorems:
//   h(n)        lambda_n >= 1/h(n)
//   chi(k)      lambda_i <= 1/(k+1) for all i >= chi(k)
//   phi1(k)     sum_{i=1}^{phi1(k)} lambda_i >= k
//   phi2(eps)   |lambda_n - lambda_{n+1}| / lambda_{n+1}^2 <= eps, n >= phi2
//   phi3(eps,n) prod_{i=n}^{m} (1 - lambda_i (1-tau)) <= eps for m >= phi3
//   phi4(eps)   sum_{i=phi4}^inf |lambda_{i+N} - lambda_i| <= eps
// All closed forms are sound (never under-report); verify_modulus provides
// the brute-force oracle.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <variant>

#include <boost/multiprecision/cpp_int.hpp>

namespace hsdm {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

struct Schedule {
  // rho as exact rational p/q, rho in (0,1]; scale c = c_num/c_den in (0,1]
  long rho_num = 1, rho_den = 1;
  long c_num = 1, c_den = 1;
  int N_period = 1;

  double rho() const { return double(rho_num) / double(rho_den); }
  double c() const { return double(c_num) / double(c_den); }
};

Schedule make_power_schedule(long rho_num, long rho_den, long c_num = 1, long c_den = 1,
                             int N_period = 1);
// Accepts rho/c as doubles that are exactly small rationals (0.5, 1.0, ...).
Schedule make_power_schedule(double rho, double c = 1.0, int N_period = 1);

double lambda_at(const Schedule& s, std::uint64_t n);

enum class ModulusKind { H, Chi, Phi1, Phi2, Phi3, Phi4 };

struct ModulusArgs {
  std::uint64_t n = 0;  // H (index), Phi3 (start index)
  std::uint64_t k = 0;  // Chi, Phi1
  double eps = 0.0;     // Phi2, Phi3, Phi4
  double tau = 0.0;     // Phi3
  int N = 1;            // Phi4
};

// "no modulus exists" marker, e.g. phi2 for rho = 1
struct NoModulus {};
using Modulus = std::variant<std::uint64_t, NoModulus>;

Modulus modulus(const Schedule& s, ModulusKind kind, const ModulusArgs& args);

// Monotonized phi3'(eps, n) = max{n, max{phi3(eps, i) : i <= n}}
std::uint64_t phi3_monotone(const Schedule& s, double eps, std::uint64_t n, double tau);

struct VerifyResult {
  bool verified = false;
  std::optional<std::uint64_t> counterexample;
};

// Exhaustively checks the defining inequality of `kind` for the claimed
// modulus value over all indices <= cap.
VerifyResult verify_modulus(const Schedule& s, ModulusKind kind, const ModulusArgs& args,
                            std::uint64_t claimed, std::uint64_t cap);

// Big-integer chi and h for the rate towers, where arguments overflow any
// fixed-width type. Both are the same closed forms as `modulus`.
BigInt chi_big(const Schedule& s, const BigInt& k);
BigInt h_big(const Schedule& s, const BigInt& n);

// ceil(x^(1/q)) and floor(x^(1/q)) for x >= 0
BigInt floor_root(const BigInt& x, unsigned q);
BigInt ceil_root(const BigInt& x, unsigned q);
// ceil(a/b), b > 0
BigInt ceil_div(const BigInt& a, const BigInt& b);
// ceil of a rational
BigInt ceil_rat(const BigRat& r);

}  // namespace hsdm
