#include "qsbse/pareto.hpp"

#include <algorithm>
#include <numeric>

namespace qsbse {

bool dominates(std::span<const double> a, std::span<const double> b, std::span<const Sense> senses) {
  bool strict = false;
  for (std::size_t m = 0; m < senses.size(); ++m) {
    const double da = senses[m] == Sense::minimize ? a[m] : -a[m];
    const double db = senses[m] == Sense::minimize ? b[m] : -b[m];
    if (da > db) return false;
    if (da < db) strict = true;
  }
  return strict;
}

ParetoArchive pareto_filter(std::vector<ArchiveEntry> solutions, std::vector<Sense> senses) {
  const std::size_t dims = senses.size();
  for (const auto& s : solutions)
    if (s.objectives.size() != dims) throw UsageError("objective vector dimensionality mismatch");

  std::vector<std::vector<double>> key(solutions.size());
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    key[i] = solutions[i].objectives;
    for (std::size_t m = 0; m < dims; ++m)
      if (senses[m] == Sense::maximize) key[i][m] = -key[i][m];
  }
  std::vector<std::size_t> order(solutions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });

  // After the lexicographic sort no point can be dominated by a later one.
  std::vector<std::size_t> kept;
  for (auto idx : order) {
    bool drop = false;
    if (dims == 2) {
      drop = !kept.empty() && key[kept.back()][1] <= key[idx][1];
    } else {
      for (auto k : kept) {
        if (key[k] == key[idx]) {
          drop = true;
          break;
        }
        bool le = true;
        for (std::size_t m = 0; m < dims && le; ++m) le = key[k][m] <= key[idx][m];
        if (le) {
          drop = true;
          break;
        }
      }
    }
    if (!drop) kept.push_back(idx);
  }

  ParetoArchive out;
  out.senses = std::move(senses);
  out.solutions.reserve(kept.size());
  for (auto k : kept) out.solutions.push_back(std::move(solutions[k]));
  return out;
}

ParetoArchive union_front(std::span<const ParetoArchive> archives) {
  if (archives.empty()) return {};
  const auto& senses = archives.front().senses;
  std::vector<ArchiveEntry> all;
  for (const auto& a : archives) {
    if (a.senses != senses) throw UsageError("archives disagree on objective senses");
    all.insert(all.end(), a.solutions.begin(), a.solutions.end());
  }
  return pareto_filter(std::move(all), senses);
}

}  // namespace qsbse
