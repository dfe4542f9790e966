#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qsbse/common.hpp"
#include "qsbse/qubo.hpp"

namespace qsbse {

struct Sample {
  Bits assignment;
  double energy = 0.0;
  std::size_t occurrences = 1;

  bool operator==(const Sample&) const = default;
};

enum class SamplerKind { simulated_annealing, exact, steepest_descent, remote };

std::string_view sampler_kind_name(SamplerKind k);
SamplerKind sampler_kind_from(std::string_view name);

struct SamplerSpec {
  SamplerKind kind = SamplerKind::simulated_annealing;
  std::size_t reads = 1;
  std::size_t sweeps = 1000;
  /// Derived from coefficient magnitudes when unset.
  std::optional<std::pair<double, double>> beta_range;
  std::uint64_t seed = 0;
  std::string endpoint;
  long timeout_ms = 10000;
  Exec exec = Exec::serial;

  void validate() const;
};

/// Largest QUBO the exact sampler enumerates.
inline constexpr std::size_t kExactLimit = 22;

/// Dispatches on spec.kind. Results are deduplicated (occurrences counted),
/// sorted by ascending energy then assignment, at most spec.reads entries.
std::vector<Sample> sample(const Qubo& q, const SamplerSpec& spec);

// Individual kernels. Serial and parallel flavours return identical results.
std::vector<Sample> simulated_annealing(const Qubo& q, const SamplerSpec& spec);
std::vector<Sample> exact_lowest(const Qubo& q, std::size_t count, Exec exec = Exec::serial);
/// Random starts (one per read) each descended to a 1-flip local minimum.
std::vector<Sample> steepest_descent_reads(const Qubo& q, const SamplerSpec& spec);

/// Flips the single bit with the largest strict energy decrease (lowest index
/// on ties) until no flip improves.
Sample steepest_descent(const Qubo& q, Bits start);

/// POSTs the QUBO JSON plus {"num_reads"} to spec.endpoint and validates the reply.
std::vector<Sample> remote_sample(const Qubo& q, const SamplerSpec& spec);

/// Validates and normalizes a remote reply body against q (exposed for tests).
std::vector<Sample> parse_remote_reply(const Qubo& q, const std::string& body, std::size_t reads);

/// Geometric schedule endpoints used when spec.beta_range is unset.
std::pair<double, double> default_beta_range(const Qubo& q);

}  // namespace qsbse
