#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>

#include "qsbse/baselines.hpp"
#include "qsbse/rng.hpp"

namespace qsbse {

std::vector<std::vector<std::size_t>> fast_non_dominated_sort(
    std::span<const std::vector<double>> points, std::span<const Sense> senses) {
  const std::size_t n = points.size();
  for (const auto& p : points)
    if (p.size() != senses.size()) throw UsageError("objective vector dimensionality mismatch");
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> counter(n, 0);
  std::vector<std::vector<std::size_t>> fronts(1);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      if (dominates(points[p], points[q], senses))
        dominated[p].push_back(q);
      else if (dominates(points[q], points[p], senses))
        ++counter[p];
    }
    if (counter[p] == 0) fronts[0].push_back(p);
  }
  for (std::size_t i = 0; !fronts[i].empty(); ++i) {
    std::vector<std::size_t> next;
    for (auto p : fronts[i])
      for (auto q : dominated[p])
        if (--counter[q] == 0) next.push_back(q);
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(next));
  }
  fronts.pop_back();
  return fronts;
}

std::vector<double> crowding_distance(std::span<const std::vector<double>> front) {
  const std::size_t n = front.size();
  std::vector<double> dist(n, 0.0);
  if (n == 0) return dist;
  const std::size_t dims = front.front().size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order(n);
  for (std::size_t m = 0; m < dims; ++m) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return front[a][m] < front[b][m]; });
    dist[order.front()] = inf;
    dist[order.back()] = inf;
    const double range = front[order.back()][m] - front[order.front()][m];
    if (range <= 0.0) continue;
    for (std::size_t k = 1; k + 1 < n; ++k)
      if (dist[order[k]] != inf)
        dist[order[k]] += (front[order[k + 1]][m] - front[order[k - 1]][m]) / range;
  }
  return dist;
}

void Nsga2Config::validate() const {
  if (population < 4 || population % 2 != 0)
    throw UsageError("NSGA-II population must be even and >= 4");
  if (!(crossover_probability >= 0.0 && crossover_probability <= 1.0))
    throw UsageError("crossover probability must lie in [0, 1]");
  if (mutation_probability && !(*mutation_probability >= 0.0 && *mutation_probability <= 1.0))
    throw UsageError("mutation probability must lie in [0, 1]");
  if (max_evaluations < population) throw UsageError("evaluation budget below population size");
}

namespace {

struct Individual {
  Bits x;
  std::vector<double> objectives;  // natural units
  std::size_t violations = 0;
  std::size_t rank = 0;
  double crowding = 0.0;

  bool feasible() const { return violations == 0; }
};

Individual make_individual(const ProblemInstance& instance, Bits x) {
  auto ev = evaluate(instance, x);
  return Individual{std::move(x), std::move(ev.objective_values), ev.total_violations(), 0, 0.0};
}

// Constrained-domination ranking; returns the population reordered best first.
std::vector<Individual> rank_and_select(std::vector<Individual> pool, std::size_t keep,
                                        const std::vector<Sense>& senses) {
  std::vector<std::size_t> feasible, infeasible;
  for (std::size_t i = 0; i < pool.size(); ++i)
    (pool[i].feasible() ? feasible : infeasible).push_back(i);

  std::vector<Individual> out;
  out.reserve(keep);
  std::vector<std::vector<double>> pts;
  for (auto i : feasible) pts.push_back(pool[i].objectives);
  const auto fronts = fast_non_dominated_sort(pts, senses);
  for (std::size_t r = 0; r < fronts.size() && out.size() < keep; ++r) {
    std::vector<std::vector<double>> fp;
    for (auto k : fronts[r]) fp.push_back(pts[k]);
    const auto cd = crowding_distance(fp);
    std::vector<std::size_t> idx(fronts[r].size());
    std::iota(idx.begin(), idx.end(), 0);
    if (out.size() + idx.size() > keep)
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return cd[a] > cd[b]; });
    for (auto k : idx) {
      if (out.size() == keep) break;
      Individual ind = std::move(pool[feasible[fronts[r][k]]]);
      ind.rank = r;
      ind.crowding = cd[k];
      out.push_back(std::move(ind));
    }
  }
  std::stable_sort(infeasible.begin(), infeasible.end(), [&](std::size_t a, std::size_t b) {
    return pool[a].violations < pool[b].violations;
  });
  for (auto i : infeasible) {
    if (out.size() == keep) break;
    Individual ind = std::move(pool[i]);
    ind.rank = std::numeric_limits<std::size_t>::max();
    ind.crowding = 0.0;
    out.push_back(std::move(ind));
  }
  return out;
}

// True when a wins the binary tournament against b; nullopt on a tie.
std::optional<bool> better(const Individual& a, const Individual& b) {
  if (a.feasible() != b.feasible()) return a.feasible();
  if (!a.feasible()) {
    if (a.violations != b.violations) return a.violations < b.violations;
    return std::nullopt;
  }
  if (a.rank != b.rank) return a.rank < b.rank;
  if (a.crowding != b.crowding) return a.crowding > b.crowding;
  return std::nullopt;
}

}  // namespace

Nsga2Result nsga2(const ProblemInstance& instance, const Nsga2Config& cfg) {
  cfg.validate();
  instance.validate();
  const auto start = std::chrono::steady_clock::now();
  auto out_of_time = [&] {
    return cfg.time_budget_s &&
           std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >=
               *cfg.time_budget_s;
  };

  Rng rng(derive_seed(cfg.seed, {0x4e5347}));
  const std::size_t n = instance.size();
  const std::size_t pop_size = cfg.population;
  const double pm = cfg.mutation_probability.value_or(n ? 1.0 / static_cast<double>(n) : 0.0);
  const auto senses = instance.senses();

  auto notify = [&](std::size_t gen, const std::vector<Individual>& pop) {
    if (!cfg.on_generation) return;
    std::vector<Bits> xs;
    for (const auto& ind : pop) xs.push_back(ind.x);
    cfg.on_generation(gen, xs);
  };

  std::vector<Individual> pop;
  for (std::size_t i = 0; i < pop_size; ++i) {
    Bits x(n);
    for (auto& b : x) b = static_cast<std::uint8_t>(rng.next() >> 63);
    pop.push_back(make_individual(instance, std::move(x)));
  }
  std::size_t evaluations = pop_size;
  pop = rank_and_select(std::move(pop), pop_size, senses);
  notify(0, pop);

  auto tournament = [&]() -> const Individual& {
    const auto& a = pop[rng.below(pop_size)];
    const auto& b = pop[rng.below(pop_size)];
    const auto r = better(a, b);
    if (r) return *r ? a : b;
    return rng.bernoulli(0.5) ? a : b;
  };

  std::size_t generation = 0;
  while (evaluations + pop_size <= cfg.max_evaluations && !out_of_time()) {
    std::vector<Individual> offspring;
    offspring.reserve(pop_size);
    while (offspring.size() < pop_size) {
      Bits c1 = tournament().x;
      Bits c2 = tournament().x;
      if (rng.bernoulli(cfg.crossover_probability)) {
        if (cfg.crossover == Crossover::uniform) {
          for (std::size_t i = 0; i < n; ++i)
            if (rng.bernoulli(0.5)) std::swap(c1[i], c2[i]);
        } else if (n > 1) {
          const std::size_t cut = 1 + rng.below(n - 1);
          for (std::size_t i = cut; i < n; ++i) std::swap(c1[i], c2[i]);
        }
      }
      for (Bits* c : {&c1, &c2})
        for (auto& b : *c)
          if (pm > 0.0 && rng.bernoulli(pm)) b ^= 1;
      offspring.push_back(make_individual(instance, std::move(c1)));
      offspring.push_back(make_individual(instance, std::move(c2)));
    }
    evaluations += pop_size;
    for (auto& o : offspring) pop.push_back(std::move(o));
    pop = rank_and_select(std::move(pop), pop_size, senses);
    ++generation;
    notify(generation, pop);
  }

  std::vector<ArchiveEntry> front;
  for (const auto& ind : pop)
    if (ind.feasible() && ind.rank == 0) front.push_back({ind.x, ind.objectives});
  return Nsga2Result{pareto_filter(std::move(front), senses), evaluations, generation};
}

}  // namespace qsbse
