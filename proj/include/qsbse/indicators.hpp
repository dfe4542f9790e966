#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qsbse/pareto.hpp"

namespace qsbse {

/// Hypervolume after normalizing every objective to the ideal/nadir box of
/// `reference_front` (minimization orientation, reference point all ones).
/// Coordinates better than the ideal are clipped, so the result lies in [0, 1].
/// An empty archive yields 0.
double hv(const ParetoArchive& archive, const ParetoArchive& reference_front);

/// Hypervolume of already-normalized minimization points against (1, ..., 1).
double hypervolume_unit(std::vector<std::vector<double>> points);

/// Mean distance from each reference point to its nearest archive point
/// (Euclidean, natural units). Empty archive yields nullopt.
std::optional<double> igd(const ParetoArchive& archive, const ParetoArchive& reference_front,
                          Exec exec = Exec::serial);

/// Population standard deviation of nearest-neighbour distances. Needs two points.
std::optional<double> spacing(const ParetoArchive& archive, Exec exec = Exec::serial);

/// Archive members whose objective vector appears in the reference front.
std::size_t nop(const ParetoArchive& archive, const ParetoArchive& reference_front);

struct IndicatorReport {
  std::string method;
  double time_s = 0.0;
  double count = 0.0;               // |S|
  double nondominated_count = 0.0;  // |N_S|
  std::optional<double> igd;
  std::optional<double> hv;
  std::optional<double> sp;
};

/// All indicators of one archive against a reference front.
IndicatorReport indicator_report(std::string method, double time_s, const ParetoArchive& archive,
                                 const ParetoArchive& reference_front);

}  // namespace qsbse
