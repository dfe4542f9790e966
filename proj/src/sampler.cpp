#include "qsbse/sampler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <queue>

#include <omp.h>

#include "qsbse/rng.hpp"

namespace qsbse {

std::string_view sampler_kind_name(SamplerKind k) {
  switch (k) {
    case SamplerKind::simulated_annealing: return "sa";
    case SamplerKind::exact: return "exact";
    case SamplerKind::steepest_descent: return "sd";
    case SamplerKind::remote: return "remote";
  }
  return "?";
}

SamplerKind sampler_kind_from(std::string_view name) {
  if (name == "sa" || name == "simulated_annealing") return SamplerKind::simulated_annealing;
  if (name == "exact") return SamplerKind::exact;
  if (name == "sd" || name == "steepest_descent") return SamplerKind::steepest_descent;
  if (name == "remote") return SamplerKind::remote;
  throw UsageError("unknown sampler '" + std::string(name) + "'");
}

void SamplerSpec::validate() const {
  if (reads < 1) throw UsageError("sampler reads must be >= 1");
  if (sweeps < 1) throw UsageError("sampler sweeps must be >= 1");
  if (beta_range && !(beta_range->first > 0.0 && beta_range->first < beta_range->second))
    throw UsageError("beta range must satisfy 0 < beta_min < beta_max");
  if (kind == SamplerKind::remote && endpoint.empty())
    throw UsageError("remote sampler needs an endpoint");
}

namespace {

bool sample_less(const Sample& a, const Sample& b) {
  if (a.energy != b.energy) return a.energy < b.energy;
  return a.assignment < b.assignment;
}

// Sort, merge identical assignments, keep the lowest `limit`.
std::vector<Sample> aggregate(std::vector<Sample> raw, std::size_t limit) {
  std::sort(raw.begin(), raw.end(), sample_less);
  std::vector<Sample> out;
  for (auto& s : raw) {
    if (!out.empty() && out.back().assignment == s.assignment)
      out.back().occurrences += s.occurrences;
    else
      out.push_back(std::move(s));
  }
  if (out.size() > limit) out.resize(limit);
  return out;
}

void require_nonempty(const Qubo& q) {
  if (q.n_total() == 0) throw UsageError("cannot sample an empty QUBO");
}

Bits random_bits(Rng& rng, std::size_t n) {
  Bits x(n);
  for (auto& b : x) b = static_cast<std::uint8_t>(rng.next() >> 63);
  return x;
}

Bits anneal_one(const Qubo& q, double beta_min, double beta_max, std::size_t sweeps,
                std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = q.n_total();
  Bits x = random_bits(rng, n);
  std::vector<double> field(n);
  for (std::size_t i = 0; i < n; ++i) field[i] = q.local_field(i, x);

  const double ratio = sweeps > 1 ? std::pow(beta_max / beta_min, 1.0 / double(sweeps - 1)) : 1.0;
  double beta = beta_min;
  for (std::size_t s = 0; s < sweeps; ++s, beta *= ratio) {
    for (std::size_t i = 0; i < n; ++i) {
      const double delta = x[i] ? -field[i] : field[i];
      bool flip = delta <= 0.0;
      if (!flip) {
        const double a = beta * delta;
        flip = a < 40.0 && rng.uniform() < std::exp(-a);
      }
      if (flip) {
        x[i] ^= 1;
        const double sign = x[i] ? 1.0 : -1.0;
        for (const auto& nb : q.neighbors(i)) field[nb.var] += sign * nb.c;
      }
    }
  }
  return x;
}

}  // namespace

std::pair<double, double> default_beta_range(const Qubo& q) {
  const double hi = q.max_abs_coefficient();
  const double lo = q.min_abs_nonzero_coefficient();
  if (!(hi > 0.0) || !std::isfinite(lo)) return {0.1, 10.0};
  double bmin = 0.1 / hi, bmax = 10.0 / lo;
  if (!(bmax > bmin)) bmax = bmin * 100.0;
  return {bmin, bmax};
}

std::vector<Sample> simulated_annealing(const Qubo& q, const SamplerSpec& spec) {
  spec.validate();
  require_nonempty(q);
  const auto [bmin, bmax] = spec.beta_range ? *spec.beta_range : default_beta_range(q);
  std::vector<Sample> raw(spec.reads);
  const auto reads = static_cast<std::ptrdiff_t>(spec.reads);
#pragma omp parallel for schedule(dynamic) if (spec.exec == Exec::parallel)
  for (std::ptrdiff_t r = 0; r < reads; ++r) {
    Bits x = anneal_one(q, bmin, bmax, spec.sweeps,
                        derive_seed(spec.seed, {static_cast<std::uint64_t>(r)}));
    const double e = q.energy(x);
    raw[static_cast<std::size_t>(r)] = Sample{std::move(x), e, 1};
  }
  return aggregate(std::move(raw), spec.reads);
}

Sample steepest_descent(const Qubo& q, Bits x) {
  const std::size_t n = q.n_total();
  if (x.size() != n) throw UsageError("start assignment has wrong length");
  std::vector<double> field(n);
  for (std::size_t i = 0; i < n; ++i) field[i] = q.local_field(i, x);
  constexpr double kMinGain = 1e-12;
  for (;;) {
    std::size_t best = n;
    double best_delta = -kMinGain;
    for (std::size_t i = 0; i < n; ++i) {
      const double delta = x[i] ? -field[i] : field[i];
      if (delta < best_delta) {
        best_delta = delta;
        best = i;
      }
    }
    if (best == n) break;
    x[best] ^= 1;
    const double sign = x[best] ? 1.0 : -1.0;
    for (const auto& nb : q.neighbors(best)) field[nb.var] += sign * nb.c;
  }
  const double e = q.energy(x);
  return Sample{std::move(x), e, 1};
}

std::vector<Sample> steepest_descent_reads(const Qubo& q, const SamplerSpec& spec) {
  spec.validate();
  require_nonempty(q);
  std::vector<Sample> raw(spec.reads);
  const auto reads = static_cast<std::ptrdiff_t>(spec.reads);
#pragma omp parallel for schedule(dynamic) if (spec.exec == Exec::parallel)
  for (std::ptrdiff_t r = 0; r < reads; ++r) {
    Rng rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(r)}));
    raw[static_cast<std::size_t>(r)] = steepest_descent(q, random_bits(rng, q.n_total()));
  }
  return aggregate(std::move(raw), spec.reads);
}

namespace {

struct Candidate {
  double energy;
  std::uint64_t index;
  bool operator<(const Candidate& o) const {
    return energy != o.energy ? energy < o.energy : index < o.index;
  }
};

// Gray-code sweep over the low bits of one block; keeps the `count` best.
// Block energies start from an exact evaluation, so every thread count
// visits the same floating-point values.
void enumerate_block(const Qubo& q, std::size_t low_bits, std::uint64_t block, std::size_t count,
                     std::priority_queue<Candidate>& heap) {
  const std::size_t n = q.n_total();
  Bits x(n, 0);
  for (std::size_t k = low_bits; k < n; ++k) x[k] = (block >> (k - low_bits)) & 1u;
  std::vector<double> field(n);
  for (std::size_t i = 0; i < n; ++i) field[i] = q.local_field(i, x);
  double e = q.energy(x);
  std::uint64_t index = block << low_bits;
  auto offer = [&] {
    Candidate c{e, index};
    if (heap.size() < count) {
      heap.push(c);
    } else if (c < heap.top()) {
      heap.pop();
      heap.push(c);
    }
  };
  offer();
  const std::uint64_t steps = std::uint64_t{1} << low_bits;
  for (std::uint64_t t = 1; t < steps; ++t) {
    const auto k = static_cast<std::size_t>(std::countr_zero(t));
    e += x[k] ? -field[k] : field[k];
    x[k] ^= 1;
    index ^= std::uint64_t{1} << k;
    const double sign = x[k] ? 1.0 : -1.0;
    for (const auto& nb : q.neighbors(k)) field[nb.var] += sign * nb.c;
    offer();
  }
}

}  // namespace

std::vector<Sample> exact_lowest(const Qubo& q, std::size_t count, Exec exec) {
  require_nonempty(q);
  const std::size_t n = q.n_total();
  if (n > kExactLimit)
    throw CapabilityError("exact sampler enumerates at most " + std::to_string(kExactLimit) +
                          " variables, QUBO has " + std::to_string(n));
  if (count < 1) throw UsageError("exact sampler needs count >= 1");
  const std::size_t low_bits = std::min<std::size_t>(n, 12);
  const std::uint64_t blocks = std::uint64_t{1} << (n - low_bits);

  std::vector<std::priority_queue<Candidate>> heaps(blocks);
  const auto nblocks = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (std::ptrdiff_t b = 0; b < nblocks; ++b)
    enumerate_block(q, low_bits, static_cast<std::uint64_t>(b), count,
                    heaps[static_cast<std::size_t>(b)]);

  std::vector<Candidate> all;
  for (auto& h : heaps)
    while (!h.empty()) {
      all.push_back(h.top());
      h.pop();
    }
  std::sort(all.begin(), all.end());
  if (all.size() > count) all.resize(count);

  std::vector<Sample> out;
  for (const auto& c : all) {
    Bits x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = (c.index >> k) & 1u;
    const double e = q.energy(x);
    out.push_back(Sample{std::move(x), e, 1});
  }
  std::sort(out.begin(), out.end(), sample_less);
  return out;
}

std::vector<Sample> sample(const Qubo& q, const SamplerSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case SamplerKind::simulated_annealing: return simulated_annealing(q, spec);
    case SamplerKind::exact: return exact_lowest(q, spec.reads, spec.exec);
    case SamplerKind::steepest_descent: return steepest_descent_reads(q, spec);
    case SamplerKind::remote: return remote_sample(q, spec);
  }
  throw UsageError("unknown sampler kind");
}

}  // namespace qsbse
