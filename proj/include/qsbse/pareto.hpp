#pragma once

#include <span>
#include <vector>

#include "qsbse/common.hpp"

namespace qsbse {

struct ArchiveEntry {
  Bits assignment;
  std::vector<double> objectives;  // natural units

  bool operator==(const ArchiveEntry&) const = default;
};

struct ParetoArchive {
  std::vector<Sense> senses;
  std::vector<ArchiveEntry> solutions;

  std::size_t size() const { return solutions.size(); }
  bool empty() const { return solutions.empty(); }
  bool operator==(const ParetoArchive&) const = default;
};

/// a is no worse everywhere and strictly better somewhere.
bool dominates(std::span<const double> a, std::span<const double> b, std::span<const Sense> senses);

/// Maximal mutually non-dominated subset; equal objective vectors collapse to
/// the first occurrence in input order. Output is sorted lexicographically by
/// the minimization-oriented objective vector.
ParetoArchive pareto_filter(std::vector<ArchiveEntry> solutions, std::vector<Sense> senses);

/// pareto_filter over the concatenation. Throws UsageError on sense mismatch.
ParetoArchive union_front(std::span<const ParetoArchive> archives);

}  // namespace qsbse
