#pragma once

#include <vector>

#include "qsbse/instance.hpp"
#include "qsbse/pareto.hpp"
#include "qsbse/qubo.hpp"
#include "qsbse/sampler.hpp"

namespace qsbse {

/// Wall-clock seconds spent per phase, summed over weights.
struct PhaseTimings {
  double compile_s = 0.0;
  double decompose_s = 0.0;
  double sample_s = 0.0;
  double local_search_s = 0.0;
  double sort_s = 0.0;
};

struct MoqaConfig {
  std::size_t n_weights = 10;
  std::size_t reads = 500;
  /// `reads` and `seed` are overridden per weight.
  SamplerSpec sampler;
  QuboBuildConfig build;
  std::uint64_t seed = 0;
  /// Parallelizes the weight loop; results do not depend on it.
  Exec exec = Exec::serial;

  void validate() const;
};

struct MoqaWeightTrace {
  std::vector<double> weights;
  std::size_t samples_drawn = 0;  // sum of occurrences
  std::size_t distinct = 0;
  std::size_t feasible = 0;
};

struct MoqaResult {
  ParetoArchive archive;
  std::vector<MoqaWeightTrace> traces;
  PhaseTimings timings;
  std::size_t total_samples = 0;
};

MoqaResult moqa(const ProblemInstance& instance, const MoqaConfig& cfg);

/// Weight vector used for weight index k under `seed` (shared by MOQA and CQHA).
Weights weight_for(std::size_t m, std::uint64_t seed, std::size_t k);

/// Truncates, evaluates and keeps feasible candidates, deduplicated by assignment,
/// then non-dominated filters them.
ParetoArchive archive_feasible(const ProblemInstance& instance, const std::vector<Bits>& candidates);

}  // namespace qsbse
