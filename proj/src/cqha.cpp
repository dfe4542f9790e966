#include "qsbse/cqha.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <queue>

namespace qsbse {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

double energy_impact(const Qubo& q, std::size_t i, ImpactStrategy strategy) {
  if (i >= q.n_total()) throw UsageError("variable out of range");
  double impact = std::abs(q.linear(i));
  if (strategy == ImpactStrategy::total)
    for (const auto& nb : q.neighbors(i)) impact += std::abs(nb.c);
  return impact;
}

std::vector<SubQubo> decompose(const Qubo& q, double rate, std::size_t s, ImpactStrategy strategy) {
  if (s < 1) throw UsageError("sub-QUBO size must be >= 1");
  if (!(rate > 0.0 && rate <= 1.0)) throw UsageError("rate must lie in (0, 1]");
  const std::size_t n = q.n_total();
  std::vector<double> impact(n);
  for (std::size_t i = 0; i < n; ++i) impact[i] = energy_impact(q, i, strategy);

  // Highest impact first, lowest index on ties.
  auto before = [&](std::size_t a, std::size_t b) {
    return impact[a] != impact[b] ? impact[a] > impact[b] : a < b;
  };
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), before);

  auto heap_cmp = [&](std::size_t a, std::size_t b) { return before(b, a); };
  std::vector<char> selected(n, 0);
  std::vector<std::size_t> stamp(n, static_cast<std::size_t>(-1));
  std::vector<SubQubo> subs;
  std::size_t cursor = 0;
  for (;;) {
    while (cursor < n && selected[order[cursor]]) ++cursor;
    if (cursor == n) break;
    const std::size_t group = subs.size();
    SubQubo sub;
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(heap_cmp)> frontier(heap_cmp);
    auto take = [&](std::size_t v) {
      selected[v] = 1;
      sub.variables.push_back(v);
      sub.impact += impact[v];
      for (const auto& nb : q.neighbors(v))
        if (!selected[nb.var] && stamp[nb.var] != group) {
          stamp[nb.var] = group;
          frontier.push(nb.var);
        }
    };
    take(order[cursor]);
    while (sub.variables.size() < s) {
      if (frontier.empty()) {
        // Disconnected remainder: continue from the strongest unselected variable.
        while (cursor < n && selected[order[cursor]]) ++cursor;
        if (cursor == n) break;
        take(order[cursor]);
        continue;
      }
      const std::size_t v = frontier.top();
      frontier.pop();
      if (!selected[v]) take(v);
    }
    subs.push_back(std::move(sub));
  }

  std::stable_sort(subs.begin(), subs.end(),
                   [](const SubQubo& a, const SubQubo& b) { return a.impact > b.impact; });
  // The tolerance keeps e.g. 10 * 0.3 from rounding up to 4.
  auto keep = static_cast<std::size_t>(std::ceil(static_cast<double>(subs.size()) * rate - 1e-9));
  keep = std::clamp<std::size_t>(keep, subs.empty() ? 0 : 1, subs.size());
  subs.resize(keep);
  return subs;
}

Bits compose(Bits global, std::span<const std::size_t> vars, std::span<const std::uint8_t> values) {
  if (vars.size() != values.size()) throw UsageError("sub-assignment length mismatch");
  for (std::size_t k = 0; k < vars.size(); ++k) {
    if (vars[k] >= global.size()) throw UsageError("sub-assignment index out of range");
    global[vars[k]] = values[k];
  }
  return global;
}

void CqhaConfig::validate() const {
  if (n_weights < 1) throw UsageError("CQHA needs at least one weight");
  if (reads < 1) throw UsageError("CQHA needs at least one read");
  if (sub_size < 2) throw UsageError("sub-QUBO size must be >= 2");
  if (!(rate > 0.0 && rate <= 1.0)) throw UsageError("rate must lie in (0, 1]");
  if (max_loops < 1) throw UsageError("CQHA needs at least one outer loop");
  build.validate();
}

namespace {

struct WeightRun {
  CqhaWeightTrace trace;
  std::vector<Bits> candidates;
  PhaseTimings timings;
};

WeightRun run_weight(const ProblemInstance& instance, const std::vector<ScaledObjective>& scaled,
                     const CqhaConfig& cfg, std::size_t k, std::size_t s) {
  WeightRun run;
  auto& tr = run.trace;
  const Weights w = weight_for(instance.objectives.size(), cfg.seed, k);
  tr.weights = w.w;
  tr.sub_size = s;

  auto t0 = std::chrono::steady_clock::now();
  const Qubo q = model_to_qubo(scaled, w, instance.constraints, cfg.build);
  run.timings.compile_s = seconds_since(t0);

  Rng rng(derive_seed(cfg.seed, {0xc1, k}));
  Bits start(q.origin_n());
  for (auto& b : start) b = static_cast<std::uint8_t>(rng.next() >> 63);
  Bits cur = complete_auxiliaries(q, start);
  double cur_e = q.energy(cur);
  tr.energy_series.push_back(cur_e);

  t0 = std::chrono::steady_clock::now();
  // Decomposition is computed once per weight; only clamping tracks the incumbent.
  const auto subs = decompose(q, cfg.rate, s, cfg.strategy);
  run.timings.decompose_s = seconds_since(t0);
  tr.subqubo_count = decompose(q, 1.0, s, cfg.strategy).size();
  for (const auto& sub : subs) tr.solved_sizes.push_back(sub.variables.size());

  for (std::size_t pass = 0; pass < cfg.max_loops; ++pass) {
    std::size_t accepted = 0;
    t0 = std::chrono::steady_clock::now();
    for (std::size_t idx = 0; idx < subs.size(); ++idx) {
      const auto& vars = subs[idx].variables;
      const Qubo local = clamp_to_context(q, cur, vars);
      SamplerSpec spec = cfg.sampler;
      spec.reads = cfg.reads;
      spec.seed = derive_seed(cfg.seed, {0x5b, k, pass, idx});
      if (cfg.exec == Exec::parallel) spec.exec = Exec::serial;
      const auto samples = sample(local, spec);
      if (samples.empty()) continue;
      Bits next = compose(cur, vars, samples.front().assignment);
      const double next_e = q.energy(next);
      if (next_e < cur_e) {
        cur = std::move(next);
        cur_e = next_e;
        ++accepted;
        tr.energy_series.push_back(cur_e);
        run.candidates.push_back(truncate_auxiliaries(q, cur));
      }
    }
    run.timings.sample_s += seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    Sample refined = steepest_descent(q, cur);
    const bool changed = refined.assignment != cur && refined.energy <= cur_e;
    if (changed) {
      cur = std::move(refined.assignment);
      cur_e = refined.energy;
      tr.energy_series.push_back(cur_e);
      run.candidates.push_back(truncate_auxiliaries(q, cur));
    }
    run.timings.local_search_s += seconds_since(t0);

    tr.accepted_per_pass.push_back(accepted);
    tr.solved_per_pass.push_back(subs.size());
    if (accepted == 0 && !changed) break;
  }
  run.candidates.push_back(truncate_auxiliaries(q, cur));
  tr.best_energy = cur_e;
  tr.best_assignment = cur;
  return run;
}

}  // namespace

CqhaResult cqha(const ProblemInstance& instance, const CqhaConfig& cfg) {
  cfg.validate();
  instance.validate();
  const auto scaled = scale_objectives(instance);

  std::vector<WeightRun> runs(cfg.n_weights);
  const auto weights = static_cast<std::ptrdiff_t>(cfg.n_weights);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) if (cfg.exec == Exec::parallel)
  for (std::ptrdiff_t kk = 0; kk < weights; ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    try {
      std::size_t s = cfg.sub_size;
      for (;;) {
        try {
          runs[k] = run_weight(instance, scaled, cfg, k, s);
          break;
        } catch (const CapabilityError&) {
          // Shrink the sub-QUBO until the sampler accepts it.
          if (s <= 2) throw;
          s /= 2;
        }
      }
    } catch (...) {
#pragma omp critical(qsbse_cqha_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  CqhaResult result;
  std::vector<Bits> pool;
  for (auto& r : runs) {
    result.timings.compile_s += r.timings.compile_s;
    result.timings.decompose_s += r.timings.decompose_s;
    result.timings.sample_s += r.timings.sample_s;
    result.timings.local_search_s += r.timings.local_search_s;
    for (auto& c : r.candidates) pool.push_back(std::move(c));
    result.traces.push_back(std::move(r.trace));
  }
  const auto t0 = std::chrono::steady_clock::now();
  result.archive = archive_feasible(instance, pool);
  result.timings.sort_s = seconds_since(t0);
  return result;
}

}  // namespace qsbse
