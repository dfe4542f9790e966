#include <algorithm>
#include <cmath>
#include <set>

#include "qsbse/instance.hpp"
#include "qsbse/rng.hpp"

namespace qsbse {

namespace {

// k distinct values from [0, n) in draw order (partial Fisher-Yates).
std::vector<std::size_t> sample_distinct(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.below(n - i)]);
  pool.resize(k);
  return pool;
}

}  // namespace

ProblemInstance generate_nrp(std::size_t n_requirements, std::size_t n_customers, double density,
                             std::uint64_t seed) {
  if (n_requirements < 1 || n_customers < 1) throw UsageError("generate_nrp needs counts >= 1");
  if (!(density >= 0.0 && density <= 1.0)) throw UsageError("density must lie in [0, 1]");
  Rng rng(derive_seed(seed, {0x6e7270}));
  const std::size_t nr = n_requirements, nc = n_customers, n = nr + nc;

  ProblemInstance inst;
  inst.name = "nrp-" + std::to_string(nr) + "x" + std::to_string(nc) + "-s" + std::to_string(seed);
  for (std::size_t i = 0; i < nr; ++i)
    inst.variables.push_back({i, "r" + std::to_string(i + 1), VariableKind::requirement});
  for (std::size_t c = 0; c < nc; ++c)
    inst.variables.push_back({nr + c, "c" + std::to_string(c + 1), VariableKind::customer});

  Objective cost{"cost", Sense::minimize, std::vector<double>(n, 0.0), 0.0};
  Objective profit{"profit", Sense::maximize, std::vector<double>(n, 0.0), 0.0};
  for (std::size_t i = 0; i < nr; ++i) cost.coefficients[i] = static_cast<double>(rng.range(1, 10));
  for (std::size_t c = 0; c < nc; ++c)
    profit.coefficients[nr + c] = static_cast<double>(rng.range(1, 50));
  inst.objectives = {std::move(cost), std::move(profit)};

  // Dependencies only point from a higher to a lower index, so the graph is acyclic.
  const std::size_t max_pairs = nr * (nr - 1) / 2;
  const std::size_t n_dep =
      std::min(max_pairs, static_cast<std::size_t>(std::floor(density * static_cast<double>(nr))));
  std::set<std::pair<std::size_t, std::size_t>> seen;
  while (seen.size() < n_dep) {
    std::size_t a = rng.below(nr), b = rng.below(nr);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (seen.insert({a, b}).second) inst.constraints.emplace_back(Implies{b, a});
  }

  const std::size_t per_customer =
      std::min(nr, 1 + static_cast<std::size_t>(std::floor(density * static_cast<double>(nr))));
  for (std::size_t c = 0; c < nc; ++c)
    for (auto r : sample_distinct(rng, nr, per_customer))
      inst.constraints.emplace_back(Implies{nr + c, r});
  return inst;
}

ProblemInstance generate_fm(std::size_t n_features, double cross_tree_ratio, std::uint64_t seed) {
  if (n_features < 2) throw UsageError("generate_fm needs at least two features");
  if (!(cross_tree_ratio >= 0.0)) throw UsageError("cross_tree_ratio must be non-negative");
  Rng rng(derive_seed(seed, {0x666d}));
  const std::size_t n = n_features;

  ProblemInstance inst;
  inst.name = "fm-" + std::to_string(n) + "-s" + std::to_string(seed);
  for (std::size_t i = 0; i < n; ++i)
    inst.variables.push_back({i, "f" + std::to_string(i), VariableKind::feature});

  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t i = 1; i < n; ++i) children[rng.below(i)].push_back(i);

  std::vector<Constraint> tree;
  tree.emplace_back(Clause{{{0, true}}});
  for (std::size_t p = 0; p < n; ++p) {
    const auto& ch = children[p];
    std::size_t k = 0;
    while (k < ch.size()) {
      const std::size_t remaining = ch.size() - k;
      if (remaining >= 2 && rng.bernoulli(0.3)) {
        const std::size_t g = 2 + rng.below(std::min<std::size_t>(remaining, 4) - 1);
        std::vector<std::size_t> members(ch.begin() + static_cast<std::ptrdiff_t>(k),
                                         ch.begin() + static_cast<std::ptrdiff_t>(k + g));
        if (rng.bernoulli(0.5)) {
          tree.emplace_back(AltGroup{p, members});
        } else {
          tree.emplace_back(OrGroup{p, members});
          for (auto m : members) tree.emplace_back(Implies{m, p});
        }
        k += g;
      } else {
        if (rng.bernoulli(0.25))
          tree.emplace_back(Iff{ch[k], p});
        else
          tree.emplace_back(Implies{ch[k], p});
        ++k;
      }
    }
  }

  static constexpr const char* names[] = {"richness", "reliability", "defects", "cost"};
  static constexpr Sense senses[] = {Sense::maximize, Sense::maximize, Sense::minimize,
                                     Sense::minimize};
  static constexpr int lo[] = {1, 1, 0, 5};
  static constexpr int hi[] = {10, 10, 10, 15};
  for (int m = 0; m < 4; ++m) {
    Objective o{names[m], senses[m], std::vector<double>(n, 0.0), 0.0};
    // Redraw an all-zero column so min-max scaling stays defined.
    do {
      for (auto& c : o.coefficients) c = static_cast<double>(rng.range(lo[m], hi[m]));
    } while (std::all_of(o.coefficients.begin(), o.coefficients.end(),
                         [](double c) { return c == 0.0; }));
    inst.objectives.push_back(std::move(o));
  }

  const std::size_t n_cross =
      static_cast<std::size_t>(std::floor(cross_tree_ratio * static_cast<double>(n)));
  constexpr int kMaxAttempts = 100;
  for (int attempt = 0;; ++attempt) {
    inst.constraints = tree;
    if (attempt == kMaxAttempts) break;  // the bare tree is always satisfiable
    if (n >= 3) {
      for (std::size_t c = 0; c < n_cross; ++c) {
        const std::size_t a = 1 + rng.below(n - 1);
        std::size_t b = 1 + rng.below(n - 2);
        if (b >= a) ++b;
        if (rng.bernoulli(0.5))
          inst.constraints.emplace_back(Implies{a, b});
        else
          inst.constraints.emplace_back(Excludes{a, b});
      }
    }
    if (find_feasible(inst)) break;
  }
  return inst;
}

}  // namespace qsbse
