#include "qsbse/moqa.hpp"

#include <chrono>
#include <set>

namespace qsbse {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void MoqaConfig::validate() const {
  if (n_weights < 1) throw UsageError("MOQA needs at least one weight");
  if (reads < 1) throw UsageError("MOQA needs at least one read per weight");
  build.validate();
}

Weights weight_for(std::size_t m, std::uint64_t seed, std::size_t k) {
  Rng rng(derive_seed(seed, {0x77, static_cast<std::uint64_t>(k)}));
  return random_weight(m, rng);
}

ParetoArchive archive_feasible(const ProblemInstance& instance, const std::vector<Bits>& candidates) {
  std::set<Bits> seen;
  std::vector<ArchiveEntry> pool;
  for (const auto& x : candidates) {
    if (!seen.insert(x).second) continue;
    auto ev = evaluate(instance, x);
    if (ev.feasible) pool.push_back({x, std::move(ev.objective_values)});
  }
  return pareto_filter(std::move(pool), instance.senses());
}

MoqaResult moqa(const ProblemInstance& instance, const MoqaConfig& cfg) {
  cfg.validate();
  instance.validate();
  const auto scaled = scale_objectives(instance);
  const std::size_t n = instance.size();
  const std::size_t m = instance.objectives.size();

  struct PerWeight {
    MoqaWeightTrace trace;
    std::vector<Bits> feasible;
    double compile_s = 0, sample_s = 0;
  };
  std::vector<PerWeight> slots(cfg.n_weights);
  const auto weights = static_cast<std::ptrdiff_t>(cfg.n_weights);

  // Exceptions must not escape an OpenMP region; capture the first one.
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) if (cfg.exec == Exec::parallel)
  for (std::ptrdiff_t kk = 0; kk < weights; ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    try {
      auto& slot = slots[k];
      const Weights w = weight_for(m, cfg.seed, k);
      auto t0 = std::chrono::steady_clock::now();
      const Qubo q = model_to_qubo(scaled, w, instance.constraints, cfg.build);
      slot.compile_s = seconds_since(t0);

      SamplerSpec spec = cfg.sampler;
      spec.reads = cfg.reads;
      spec.seed = derive_seed(cfg.seed, {0x5a, k});
      if (cfg.exec == Exec::parallel) spec.exec = Exec::serial;
      t0 = std::chrono::steady_clock::now();
      const auto samples = sample(q, spec);
      slot.sample_s = seconds_since(t0);

      slot.trace.weights = w.w;
      slot.trace.distinct = samples.size();
      for (const auto& s : samples) {
        slot.trace.samples_drawn += s.occurrences;
        Bits x(s.assignment.begin(), s.assignment.begin() + static_cast<std::ptrdiff_t>(n));
        if (evaluate(instance, x).feasible) {
          ++slot.trace.feasible;
          slot.feasible.push_back(std::move(x));
        }
      }
    } catch (...) {
#pragma omp critical(qsbse_moqa_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  MoqaResult result;
  std::vector<Bits> pool;
  for (auto& s : slots) {
    result.timings.compile_s += s.compile_s;
    result.timings.sample_s += s.sample_s;
    result.total_samples += s.trace.samples_drawn;
    for (auto& x : s.feasible) pool.push_back(std::move(x));
    result.traces.push_back(std::move(s.trace));
  }
  const auto t0 = std::chrono::steady_clock::now();
  result.archive = archive_feasible(instance, pool);
  result.timings.sort_s = seconds_since(t0);
  return result;
}

}  // namespace qsbse
