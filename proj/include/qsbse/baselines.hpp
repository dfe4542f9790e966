#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qsbse/instance.hpp"
#include "qsbse/pareto.hpp"

namespace qsbse {

// ---- NSGA-II ----

/// Deb's fast non-dominated sort. Returns index fronts, best first.
std::vector<std::vector<std::size_t>> fast_non_dominated_sort(
    std::span<const std::vector<double>> points, std::span<const Sense> senses);

/// Boundary members get +inf; interior members the sum over objectives of
/// neighbour gap / objective range (0 when the range is 0).
std::vector<double> crowding_distance(std::span<const std::vector<double>> front);

enum class Crossover { uniform, single_point };

struct Nsga2Config {
  std::size_t population = 100;
  std::size_t max_evaluations = 20000;
  double crossover_probability = 0.8;
  /// Defaults to 1 / n.
  std::optional<double> mutation_probability;
  Crossover crossover = Crossover::uniform;
  std::uint64_t seed = 0;
  std::optional<double> time_budget_s;
  /// Called with the population after initialization and after every generation.
  std::function<void(std::size_t generation, std::span<const Bits> population)> on_generation;

  void validate() const;
};

struct Nsga2Result {
  ParetoArchive archive;
  std::size_t evaluations = 0;
  std::size_t generations = 0;
};

Nsga2Result nsga2(const ProblemInstance& instance, const Nsga2Config& cfg);

// ---- exact branch and bound ----

enum class BoundSense { at_most, at_least };

/// coefficients . x  (<= | >=)  value
struct LinearBound {
  std::vector<double> coefficients;
  BoundSense sense = BoundSense::at_most;
  double value = 0.0;
};

struct ExactOptions {
  std::size_t node_budget = 200'000'000;
  std::optional<double> time_budget_s;
};

/// Minimizes objective . x over assignments satisfying every constraint and
/// bound. Returns nullopt when infeasible; throws ResourceError when the
/// budget runs out before optimality is proven.
std::optional<Bits> exact_minimize(std::span<const double> objective,
                                   std::span<const Constraint> constraints,
                                   std::span<const LinearBound> bounds = {},
                                   const ExactOptions& options = {});

struct EpsilonConfig {
  std::size_t optimized = 0;
  std::size_t constrained = 1;
  /// Required improvement of the constrained objective between points.
  double step = 1.0;
  ExactOptions exact;
};

/// Full Pareto front of a bi-objective instance with integer data.
ParetoArchive epsilon_constraint(const ProblemInstance& instance, const EpsilonConfig& cfg);

}  // namespace qsbse
