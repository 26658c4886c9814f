#pragma once

// Monte-Carlo kernels behind the fuzz suites: Lipschitz-ratio estimation,
// predicate violation counting, and box sampling. Each kernel has an
// OpenMP-parallel implementation and a serial reference; both draw every
// trial from an RNG seeded by (seed, trial index), so results are identical
// bit-for-bit regardless of thread count.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "hsdm/operators.hpp"

namespace hsdm {

enum class ExecPolicy { Serial, Parallel };

// Draws `count` points uniformly from the box [lo, hi].
std::vector<Point> sample_box(const Point& lo, const Point& hi, std::size_t count,
                              std::uint64_t seed);

// max ||F(x) - F(y)|| / ||x - y|| over `pairs` random pairs from [lo, hi]
double max_lipschitz_ratio(const std::function<Point(const Point&)>& F, const Point& lo,
                           const Point& hi, std::size_t pairs, std::uint64_t seed,
                           ExecPolicy policy = ExecPolicy::Parallel);

// Runs `trials` seeded predicate evaluations, returns how many came back
// false. The predicate receives a per-trial RNG.
std::size_t count_violations(std::size_t trials, std::uint64_t seed,
                             const std::function<bool(std::mt19937_64&)>& trial_ok,
                             ExecPolicy policy = ExecPolicy::Parallel);

// max of a seeded scalar statistic over `trials` draws
double max_statistic(std::size_t trials, std::uint64_t seed,
                     const std::function<double(std::mt19937_64&)>& stat,
                     ExecPolicy policy = ExecPolicy::Parallel);

}  // namespace hsdm
