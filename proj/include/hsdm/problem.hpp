#pragma once

// Problem-spec interchange: JSON descriptions of the Hilbert-space instance
// (operators, contraction data, schedule, witness points, budgets) plus the
// small closed-form grammar for the metastability counterfunction g.

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "hsdm/iterates.hpp"
#include "hsdm/operators.hpp"

namespace hsdm {

struct ProblemSpec {
  std::string name;
  std::size_t dimension = 0;

  std::map<std::string, OperatorPtr> operators;
  std::vector<std::string> cycle;  // iteration operators, order = T_1..T_N

  std::optional<MonotoneOpSpec> F;  // with mu, yields G = I - mu F
  double mu = 1.0;
  std::optional<double> tau_direct;  // alternative: G given as an operator name
  std::optional<std::string> g_operator;

  Schedule schedule;
  int N = 1;

  Point witness;  // common fixed point of the iteration operators
  Point start;
  std::optional<Point> known_solution;

  int d = 1;
  std::uint64_t seed = 1;
  std::uint64_t budget = 1'000'000;

  double tau() const;
  OperatorPtr contraction() const;               // G
  std::vector<OperatorPtr> iteration_ops() const;  // resolved cycle
};

// Throws std::invalid_argument / std::runtime_error with the violated
// constraint named.
ProblemSpec load_problem(const std::string& path);
ProblemSpec parse_problem(const std::string& json_text);
std::string serialize_problem(const ProblemSpec& spec);

// g grammar: "c" | "n" | "n+c" | "c*n" | "max(<g>,<g>)" | "table:a,b,c"
// (tables clamp at their last entry)
std::function<std::uint64_t(std::uint64_t)> parse_g(const std::string& text);

}  // namespace hsdm
