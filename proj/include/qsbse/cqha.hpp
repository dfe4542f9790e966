#pragma once

#include <span>
#include <vector>

#include "qsbse/moqa.hpp"

namespace qsbse {

enum class ImpactStrategy {
  total,   // |linear| + sum of incident |quadratic|
  linear,  // |linear| only
};

/// Magnitude of every coefficient touching variable i.
double energy_impact(const Qubo& q, std::size_t i, ImpactStrategy strategy = ImpactStrategy::total);

struct SubQubo {
  std::vector<std::size_t> variables;  // growth order
  double impact = 0.0;                 // sum of member impacts
};

/// Greedy maximum-energy-impact decomposition into groups of at most `s`
/// variables (every group but the last is full), keeping the ceil(count * rate) groups of highest impact (in
/// descending impact order).
std::vector<SubQubo> decompose(const Qubo& q, double rate, std::size_t s,
                               ImpactStrategy strategy = ImpactStrategy::total);

/// `global` with positions `vars` overwritten by `values`.
Bits compose(Bits global, std::span<const std::size_t> vars, std::span<const std::uint8_t> values);

struct CqhaConfig {
  std::size_t n_weights = 10;
  std::size_t reads = 500;
  std::size_t sub_size = 150;
  double rate = 1.0;
  std::size_t max_loops = 10;
  ImpactStrategy strategy = ImpactStrategy::total;
  SamplerSpec sampler;
  QuboBuildConfig build;
  std::uint64_t seed = 0;
  Exec exec = Exec::serial;

  void validate() const;
};

struct CqhaWeightTrace {
  std::vector<double> weights;
  std::size_t sub_size = 0;  // after any capability-driven shrinking
  std::size_t subqubo_count = 0;
  std::vector<std::size_t> solved_sizes;  // retained sub-QUBOs, in solve order
  std::vector<std::size_t> accepted_per_pass;
  std::vector<std::size_t> solved_per_pass;
  /// Incumbent full-QUBO energy: initial, then after every acceptance and local search.
  std::vector<double> energy_series;
  double best_energy = 0.0;
  Bits best_assignment;  // full QUBO assignment
};

struct CqhaResult {
  ParetoArchive archive;
  std::vector<CqhaWeightTrace> traces;
  PhaseTimings timings;
};

CqhaResult cqha(const ProblemInstance& instance, const CqhaConfig& cfg);

}  // namespace qsbse
