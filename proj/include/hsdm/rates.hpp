#pragma once

// Exact evaluation of the quantitative bounds: the majorant calculus
// (f^M, f~, the k-tower), the metastability rates Xi for the single map
// and the cyclic family, the asymptotic-regularity rate chi-hat, and the
// threshold Omega_d. All tower arithmetic is arbitrary-precision; values
// that outgrow the bit cap or the application budget degrade to a symbolic
// certificate instead of overflowing.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "hsdm/operators.hpp"
#include "hsdm/schedules.hpp"

namespace hsdm {

// Integer function on positive naturals. When `is_poly`, eval(n) equals
// coeff * n^deg for all n >= 1, which unlocks closed-form iteration.
struct MajorantFn {
  std::function<BigInt(const BigInt&)> eval;
  bool monotone = false;
  bool is_poly = false;
  BigInt coeff = 0;
  std::uint64_t deg = 0;
  std::string desc;

  BigInt operator()(const BigInt& n) const { return eval(n); }
};

MajorantFn majorant_identity();
MajorantFn majorant_constant(BigInt c);
MajorantFn majorant_poly(BigInt coeff, std::uint64_t deg);
MajorantFn majorant_table(std::vector<BigInt> values);  // 1-based; clamps at ends
MajorantFn majorant_function(std::function<BigInt(const BigInt&)> fn, bool monotone,
                             std::string desc = "f");

// f^M(n) = max{f(i) : 1 <= i <= n}
MajorantFn monotonize(const MajorantFn& f);

// (f^M, f~) with f~(n) = max{f^M(16 d n^2), 16 d n^2}
std::pair<MajorantFn, MajorantFn> build_majorant_chain(const MajorantFn& f, unsigned d);

struct RateBudget {
  std::uint64_t max_apps = 1'000'000;
  std::uint64_t max_bits = std::uint64_t(1) << 20;
  std::uint64_t apps = 0;
};

struct RateBudgetExceeded : std::runtime_error {
  std::string expr;  // the expression left unevaluated
  explicit RateBudgetExceeded(std::string e)
      : std::runtime_error("rate evaluation budget exceeded at " + e), expr(std::move(e)) {}
};

struct RateValue {
  enum class Status { Finite, BudgetExceeded, NoModulus };
  Status status = Status::Finite;
  BigInt value = 0;
  std::string expr;  // symbolic form when not finite

  bool finite() const { return status == Status::Finite; }
  static RateValue of(BigInt v) { return {Status::Finite, std::move(v), {}}; }
  static RateValue exceeded(std::string e) {
    return {Status::BudgetExceeded, 0, std::move(e)};
  }
  static RateValue none(std::string e) { return {Status::NoModulus, 0, std::move(e)}; }
};

// g~^(m) as a majorant: literal budgeted iteration, or exponentiation of the
// polynomial closed form when available and allow_closed_form is set.
MajorantFn iterate_majorant(const MajorantFn& g, const BigInt& count, RateBudget* budget,
                            bool allow_closed_form = true);

struct TowerParams {
  BigRat eps_tilde;    // (1-tau)^2 eps / (6+8d)
  BigInt n_eps_tilde;  // ceil(8 d^4 / eps_tilde^4)
  int i0 = 0;          // least i with tau^{i+1} <= eps_tilde/6d^2 (1 when tau = 0)
};

TowerParams tower_params(unsigned d, double eps, double tau);

struct KTowerOptions {
  std::optional<BigInt> n_eps_tilde;
  std::optional<int> i0;
  // closed-form (repeated-squaring) iteration when the representation is
  // polynomial; disable to force the literal path
  bool allow_closed_form = true;
};

// k_{i0}: k_0 = f~_0^(n)(1), k_{i+1} = f~_i^(n)(k_i), where f_i = f~^(n^i)
// and f~_i(n) = max{f_i^M(16 d n^2), 16 d n^2}
RateValue k_tower(const MajorantFn& f, unsigned d, double eps, double tau,
                  const KTowerOptions& opts = {}, RateBudget* budget = nullptr);

using GFn = std::function<BigInt(const BigInt&)>;

struct XiOptions {
  KTowerOptions tower;
  std::optional<MajorantFn> f_override;  // toy-scale hook
  std::optional<BigInt> k_override;      // forces the tower value outright
  std::optional<GFn> chi_override;       // replaces the schedule's chi
  // set false when g is not nondecreasing (e.g. an arbitrary table); the
  // monotonization of g~ then enumerates, capped by the budget
  bool g_monotone = true;
};

// Single-map metastability rate: Xi = chi(d * k_{i0}(f~)), tower at accuracy
// eps_d = (eps/2)^4 / (8 (1-tau)^2 d^2), with
// f(n) = ceil(6 d (1-tau) h^M(g~^M(chi(d n))) / (eps/2)^2).
RateValue xi_single(double eps, const GFn& g, const Schedule& sched, unsigned d, double tau,
                    const XiOptions& opts = {}, RateBudget* budget = nullptr);

enum class XiFullMode { Shifted, VipModulus };

struct XiFullResult {
  RateValue bound;
  RateValue c;          // iterate shift from phi1/phi2
  double delta = 0.0;   // eps/(2d(2+tau)); only set in VipModulus mode
  RateValue eps_prime;  // k'_{i0}(f); only set in VipModulus mode
};

// Shifted: bound = Xi(eps/6, g_c, ...) + c with g_c(n) = n + c + g(n+c) and
// c = phi1(ceil((phi2((1-tau) eps / 6d) + ceil(log(6d/eps))) / (1-tau))).
// VipModulus: same with delta = eps/(2d(2+tau)) in place of eps, and
// eps_prime the parallel tower value making the bound a VIP certificate.
XiFullResult xi_full(double eps, const GFn& g, const Schedule& sched, unsigned d, double tau,
                     XiFullMode mode, const XiOptions& opts = {},
                     RateBudget* budget = nullptr);

// chi_hat(eps) = max{phi3(eps/2d, phi4(eps/4d)), chi(ceil(N d / 2 eps))};
// with rho given, returns chi_hat(rho(d, eps/N)).
struct AsyOptions {
  std::optional<ConditionModulus> rho;
};
RateValue asy_rate(double eps, const Schedule& sched, unsigned d, int N, double tau,
                   const AsyOptions& opts = {});

enum class OmegaReading { ProofConsistent, AsPrinted };

// Omega_d(eps, g, n0): eps^2 / (18 d * D) where D = g~(phi3(eps^2/3d, n0)) - n0
// (proof-consistent, default) or D = g~(phi3(eps^2/3d, n0) - n0) (as printed);
// D is replaced by 1 when it evaluates to <= 0.
BigRat omega_d(double eps, const GFn& g, std::uint64_t n0, const Schedule& sched, unsigned d,
               double tau, OmegaReading reading = OmegaReading::ProofConsistent);

// Omega_d^M(eps, g, n) = max{Omega_d(eps, g, i) : i <= n}
BigRat omega_d_monotone(double eps, const GFn& g, std::uint64_t n, const Schedule& sched,
                        unsigned d, double tau,
                        OmegaReading reading = OmegaReading::ProofConsistent);

// Family rate: Xi = phi3'(eps^2/12d^2, max{n0, chi_hat(rho(d, 1/(k_{i0}(f~) N)))})
// with n0 = max{chi(ceil(96d/(1-tau)eps^2)), chi(ceil(48d^2/(1-tau)eps^2))},
// f(k) = ceil(1/rho(d, Omega_d^M(eps/2, g~^M, max{n0, chi_hat(rho(d, 1/Nk))}))),
// tower at eps_d = ((1-tau) eps^2 / 96)^2 / (2 d^2).
RateValue xi_family(double eps, const GFn& g, const Schedule& sched,
                    const ConditionModulus& rho, unsigned d, double tau, int N,
                    const XiOptions& opts = {}, RateBudget* budget = nullptr);

// Serialized outcome of a certify run.
struct Certificate {
  std::string instance_id;
  double epsilon = 0.0;
  std::string g_desc;
  RateValue bound;
  std::optional<std::uint64_t> empirical_witness;
  std::optional<RateValue> vip_epsilon_prime;
  std::string status;  // bound_evaluated | bound_symbolic | verified_empirically
  std::string detail;  // evaluated sub-quantities (eps~, i0, n_eps~, n0, c, delta, chi_hat)

  std::string to_json() const;
};

}  // namespace hsdm
