#include "hsdm/sampling.hpp"

#include <algorithm>
#include <stdexcept>

namespace hsdm {

namespace {

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t idx) {
  // splitmix-style scramble so that consecutive trial streams decorrelate
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (idx + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return std::mt19937_64(z ^ (z >> 31));
}

Point draw_point(std::mt19937_64& rng, const Point& lo, const Point& hi) {
  Point p(lo.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::uniform_real_distribution<double> u(lo[i], hi[i]);
    p[i] = u(rng);
  }
  return p;
}

}  // namespace

std::vector<Point> sample_box(const Point& lo, const Point& hi, std::size_t count,
                              std::uint64_t seed) {
  if (lo.size() != hi.size()) throw std::invalid_argument("box corner dimensions differ");
  std::vector<Point> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto rng = trial_rng(seed, i);
    out[i] = draw_point(rng, lo, hi);
  }
  return out;
}

double max_lipschitz_ratio(const std::function<Point(const Point&)>& F, const Point& lo,
                           const Point& hi, std::size_t pairs, std::uint64_t seed,
                           ExecPolicy policy) {
  auto one = [&](std::uint64_t i) -> double {
    auto rng = trial_rng(seed, i);
    const Point x = draw_point(rng, lo, hi);
    const Point y = draw_point(rng, lo, hi);
    const double den = dist(x, y);
    if (den < 1e-14) return 0.0;
    return dist(F(x), F(y)) / den;
  };
  double worst = 0.0;
  if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for reduction(max : worst) schedule(static)
    for (std::int64_t i = 0; i < std::int64_t(pairs); ++i)
      worst = std::max(worst, one(std::uint64_t(i)));
  } else {
    for (std::size_t i = 0; i < pairs; ++i) worst = std::max(worst, one(i));
  }
  return worst;
}

std::size_t count_violations(std::size_t trials, std::uint64_t seed,
                             const std::function<bool(std::mt19937_64&)>& trial_ok,
                             ExecPolicy policy) {
  std::size_t bad = 0;
  if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for reduction(+ : bad) schedule(static)
    for (std::int64_t i = 0; i < std::int64_t(trials); ++i) {
      auto rng = trial_rng(seed, std::uint64_t(i));
      if (!trial_ok(rng)) ++bad;
    }
  } else {
    for (std::size_t i = 0; i < trials; ++i) {
      auto rng = trial_rng(seed, i);
      if (!trial_ok(rng)) ++bad;
    }
  }
  return bad;
}

double max_statistic(std::size_t trials, std::uint64_t seed,
                     const std::function<double(std::mt19937_64&)>& stat,
                     ExecPolicy policy) {
  double worst = -std::numeric_limits<double>::infinity();
  if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for reduction(max : worst) schedule(static)
    for (std::int64_t i = 0; i < std::int64_t(trials); ++i) {
      auto rng = trial_rng(seed, std::uint64_t(i));
      worst = std::max(worst, stat(rng));
    }
  } else {
    for (std::size_t i = 0; i < trials; ++i) {
      auto rng = trial_rng(seed, i);
      worst = std::max(worst, stat(rng));
    }
  }
  return worst;
}

}  // namespace hsdm
