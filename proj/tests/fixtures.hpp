#pragma once

#include <random>

#include "qsbse/instance.hpp"

namespace fixtures {

// One requirement costing 4, one customer paying 8 who requests it.
inline qsbse::ProblemInstance toy2() {
  return qsbse::parse_classic_nrp("1\n1\n4\n0\n1\n8 1 1\n", "toy2");
}

// Costs {1,2}; customer 1 pays 3 for r1, customer 2 pays 4 for r2.
inline qsbse::ProblemInstance toy4() {
  return qsbse::parse_classic_nrp("1\n2\n1 2\n0\n2\n3 1 1\n4 1 2\n", "toy4");
}

// Unconstrained bi-objective instance over n variables with random integer data.
inline qsbse::ProblemInstance random_biobjective(std::size_t n, std::uint64_t seed,
                                                 std::size_t n_constraints = 0) {
  std::mt19937_64 g(seed);
  std::uniform_int_distribution<int> c(1, 20), v(0, static_cast<int>(n) - 1), k(0, 2);
  qsbse::ProblemInstance inst;
  inst.name = "rand-" + std::to_string(seed);
  qsbse::Objective a{"a", qsbse::Sense::minimize, {}, 0.0}, b{"b", qsbse::Sense::maximize, {}, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    inst.variables.push_back({i, "x" + std::to_string(i), qsbse::VariableKind::feature});
    a.coefficients.push_back(c(g));
    b.coefficients.push_back(c(g));
  }
  inst.objectives = {a, b};
  while (inst.constraints.size() < n_constraints) {
    const auto x = static_cast<std::size_t>(v(g)), y = static_cast<std::size_t>(v(g));
    if (x == y) continue;
    switch (k(g)) {
      case 0: inst.constraints.push_back(qsbse::Implies{x, y}); break;
      case 1: inst.constraints.push_back(qsbse::Excludes{x, y}); break;
      default: inst.constraints.push_back(qsbse::Clause{{{x, true}, {y, false}}}); break;
    }
  }
  return inst;
}

}  // namespace fixtures
