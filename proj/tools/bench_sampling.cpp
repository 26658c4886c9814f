// Compares the OpenMP sampling kernels against their serial reference:
// asserts bit-identical results and reports wall-clock times.

#include <chrono>
#include <cstdio>

#include "hsdm/sampling.hpp"

using namespace hsdm;

namespace {

template <class F>
double timed(const char* label, const F& fn, double& out) {
  const auto t0 = std::chrono::steady_clock::now();
  out = fn();
  const auto t1 = std::chrono::steady_clock::now();
  const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  std::printf("%-28s %10.2f ms  -> %.17g\n", label, ms, out);
  return ms;
}

}  // namespace

int main() {
  const std::size_t pairs = 2'000'000;
  const std::uint64_t seed = 7;
  const Point lo{-3.0, -3.0, -3.0}, hi{3.0, 3.0, 3.0};
  auto ball = make_project_ball({0.0, 0.0, 0.0}, 1.5);
  auto F = [&](const Point& x) { return apply_operator(ball, x); };

  double serial = 0.0, parallel = 0.0;
  const double ts = timed("lipschitz ratio (serial)", [&] {
    return max_lipschitz_ratio(F, lo, hi, pairs, seed, ExecPolicy::Serial);
  }, serial);
  const double tp = timed("lipschitz ratio (parallel)", [&] {
    return max_lipschitz_ratio(F, lo, hi, pairs, seed, ExecPolicy::Parallel);
  }, parallel);
  if (serial != parallel) {
    std::printf("MISMATCH: serial and parallel kernels disagree\n");
    return 1;
  }
  std::printf("results identical; speedup x%.2f\n", ts / tp);

  double s2 = 0.0, p2 = 0.0;
  const double ts2 = timed("violation count (serial)", [&] {
    return double(count_violations(pairs, seed, [](std::mt19937_64& rng) {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      return u(rng) >= 0.0;
    }, ExecPolicy::Serial));
  }, s2);
  const double tp2 = timed("violation count (parallel)", [&] {
    return double(count_violations(pairs, seed, [](std::mt19937_64& rng) {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      return u(rng) >= 0.0;
    }, ExecPolicy::Parallel));
  }, p2);
  if (s2 != p2) {
    std::printf("MISMATCH: serial and parallel kernels disagree\n");
    return 1;
  }
  std::printf("results identical; speedup x%.2f\n", ts2 / tp2);
  return 0;
}
