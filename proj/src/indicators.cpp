#include "qsbse/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace qsbse {

namespace {

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m) {
    const double d = a[m] - b[m];
    s += d * d;
  }
  return std::sqrt(s);
}

// Points are minimization-oriented and strictly inside [0, 1)^d.
double hv_recursive(std::vector<std::vector<double>>& pts, std::size_t d) {
  if (pts.empty()) return 0.0;
  if (d == 1) {
    double best = 1.0;
    for (const auto& p : pts) best = std::min(best, p[0]);
    return 1.0 - best;
  }
  if (d == 2) {
    std::sort(pts.begin(), pts.end(),
              [](const auto& a, const auto& b) { return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1]; });
    double vol = 0.0, prev_y = 1.0;
    for (const auto& p : pts) {
      if (p[1] < prev_y) {
        vol += (1.0 - p[0]) * (prev_y - p[1]);
        prev_y = p[1];
      }
    }
    return vol;
  }
  // Slice along the last dimension.
  std::sort(pts.begin(), pts.end(),
            [d](const auto& a, const auto& b) { return a[d - 1] < b[d - 1]; });
  double vol = 0.0;
  std::vector<std::vector<double>> active;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    active.push_back(pts[k]);
    const double top = k + 1 < pts.size() ? pts[k + 1][d - 1] : 1.0;
    const double depth = top - pts[k][d - 1];
    if (depth <= 0.0) continue;
    auto slice = active;
    vol += hv_recursive(slice, d - 1) * depth;
  }
  return vol;
}

}  // namespace

double hypervolume_unit(std::vector<std::vector<double>> points) {
  if (points.empty()) return 0.0;
  const std::size_t d = points.front().size();
  std::vector<std::vector<double>> inside;
  for (auto& p : points) {
    bool ok = true;
    for (auto& v : p) {
      v = std::max(0.0, v);
      ok = ok && v < 1.0;
    }
    if (ok) inside.push_back(std::move(p));
  }
  return hv_recursive(inside, d);
}

double hv(const ParetoArchive& archive, const ParetoArchive& reference_front) {
  if (archive.empty()) return 0.0;
  if (reference_front.empty()) throw UsageError("hv needs a nonempty reference front");
  const auto& senses = reference_front.senses;
  const std::size_t d = senses.size();
  std::vector<double> ideal(d, std::numeric_limits<double>::infinity());
  std::vector<double> nadir(d, -std::numeric_limits<double>::infinity());
  auto oriented = [&](const std::vector<double>& v, std::size_t m) {
    return senses[m] == Sense::minimize ? v[m] : -v[m];
  };
  for (const auto& s : reference_front.solutions)
    for (std::size_t m = 0; m < d; ++m) {
      ideal[m] = std::min(ideal[m], oriented(s.objectives, m));
      nadir[m] = std::max(nadir[m], oriented(s.objectives, m));
    }
  std::vector<std::vector<double>> pts;
  for (const auto& s : archive.solutions) {
    std::vector<double> z(d);
    for (std::size_t m = 0; m < d; ++m) {
      const double range = nadir[m] - ideal[m];
      const double v = oriented(s.objectives, m);
      // A zero-width dimension counts as fully attained at the ideal.
      z[m] = range > 0.0 ? (v - ideal[m]) / range : (v <= ideal[m] ? 0.0 : 1.0);
    }
    pts.push_back(std::move(z));
  }
  return hypervolume_unit(std::move(pts));
}

std::optional<double> igd(const ParetoArchive& archive, const ParetoArchive& reference_front,
                          Exec exec) {
  if (reference_front.empty()) throw UsageError("igd needs a nonempty reference front");
  if (archive.empty()) return std::nullopt;
  const auto n = static_cast<std::ptrdiff_t>(reference_front.size());
  std::vector<double> nearest(reference_front.size());
#pragma omp parallel for if (exec == Exec::parallel)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : archive.solutions)
      best = std::min(best, distance(reference_front.solutions[r].objectives, a.objectives));
    nearest[static_cast<std::size_t>(r)] = best;
  }
  double sum = 0.0;
  for (double v : nearest) sum += v;
  return sum / static_cast<double>(nearest.size());
}

std::optional<double> spacing(const ParetoArchive& archive, Exec exec) {
  if (archive.size() < 2) return std::nullopt;
  const auto n = static_cast<std::ptrdiff_t>(archive.size());
  std::vector<double> d(archive.size());
#pragma omp parallel for if (exec == Exec::parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::ptrdiff_t j = 0; j < n; ++j)
      if (i != j)
        best = std::min(best, distance(archive.solutions[i].objectives, archive.solutions[j].objectives));
    d[static_cast<std::size_t>(i)] = best;
  }
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(d.size());
  double var = 0.0;
  for (double v : d) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(d.size()));
}

std::size_t nop(const ParetoArchive& archive, const ParetoArchive& reference_front) {
  std::set<std::vector<double>> ref;
  for (const auto& s : reference_front.solutions) ref.insert(s.objectives);
  std::size_t count = 0;
  for (const auto& s : archive.solutions) count += ref.count(s.objectives);
  return count;
}

IndicatorReport indicator_report(std::string method, double time_s, const ParetoArchive& archive,
                                 const ParetoArchive& reference_front) {
  IndicatorReport r;
  r.method = std::move(method);
  r.time_s = time_s;
  r.count = static_cast<double>(archive.size());
  r.nondominated_count = static_cast<double>(nop(archive, reference_front));
  r.igd = igd(archive, reference_front);
  if (!archive.empty()) r.hv = hv(archive, reference_front);
  r.sp = spacing(archive);
  return r;
}

}  // namespace qsbse
