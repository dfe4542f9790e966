#pragma once

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"

#include "qsbse/common.hpp"
#include "qsbse/instance.hpp"
#include "qsbse/rng.hpp"

namespace qsbse {

/// x or (1 - x).
struct Factor {
  std::size_t var = 0;
  bool complemented = false;

  std::uint8_t value(std::span<const std::uint8_t> x) const {
    return complemented ? static_cast<std::uint8_t>(1 - x[var]) : x[var];
  }
  bool operator==(const Factor&) const = default;
};

/// Auxiliary `id` reifies the product u * v.
struct AuxDef {
  std::size_t id = 0;
  Factor u, v;
  bool operator==(const AuxDef&) const = default;
};

struct QuadTerm {
  std::size_t i = 0, j = 0;  // i < j
  double c = 0.0;
  bool operator==(const QuadTerm&) const = default;
};

struct Neighbor {
  std::size_t var;
  double c;
};

/// Immutable quadratic pseudo-Boolean function
///   E(x) = offset + sum_i linear[i] x_i + sum_{i<j} q_ij x_i x_j.
/// Variables origin_n..n_total-1 are auxiliaries listed in aux() in creation order.
class Qubo {
 public:
  Qubo() = default;

  std::size_t n_total() const { return linear_.size(); }
  std::size_t origin_n() const { return origin_n_; }
  double offset() const { return offset_; }
  double linear(std::size_t i) const { return linear_[i]; }
  std::span<const double> linear() const { return linear_; }
  /// Sorted by (i, j); coefficients are nonzero.
  std::span<const QuadTerm> quadratic() const { return quadratic_; }
  std::span<const AuxDef> aux() const { return aux_; }
  std::span<const Neighbor> neighbors(std::size_t i) const {
    return {adjacency_.data() + adjacency_start_[i], adjacency_start_[i + 1] - adjacency_start_[i]};
  }
  std::optional<double> quadratic(std::size_t i, std::size_t j) const;

  double energy(std::span<const std::uint8_t> x) const;
  /// linear[i] + sum_j q_ij x_j. Flipping x_i changes energy by (1 - 2 x_i) * field.
  double local_field(std::size_t i, std::span<const std::uint8_t> x) const;

  double max_abs_coefficient() const;
  double min_abs_nonzero_coefficient() const;

  bool operator==(const Qubo& o) const {
    return origin_n_ == o.origin_n_ && offset_ == o.offset_ && linear_ == o.linear_ &&
           quadratic_ == o.quadratic_ && aux_ == o.aux_;
  }

 private:
  friend class QuboBuilder;

  std::size_t origin_n_ = 0;
  double offset_ = 0.0;
  std::vector<double> linear_;
  std::vector<QuadTerm> quadratic_;
  std::vector<AuxDef> aux_;
  std::vector<std::size_t> adjacency_start_{0};
  std::vector<Neighbor> adjacency_;
};

class QuboBuilder {
 public:
  explicit QuboBuilder(std::size_t origin_n) : origin_n_(origin_n), linear_(origin_n, 0.0) {}

  void add_offset(double c) { offset_ += c; }
  void add_linear(std::size_t i, double c) { linear_.at(i) += c; }
  /// i == j folds into the linear term since x^2 = x.
  void add_quadratic(std::size_t i, std::size_t j, double c);
  /// c * value(f)
  void add_factor(const Factor& f, double c);
  /// c * value(u) * value(v)
  void add_product(const Factor& u, const Factor& v, double c);
  /// New auxiliary z constrained to u*v by rosenberg * (uv - 2uz - 2vz + 3z).
  std::size_t reify(const Factor& u, const Factor& v, double rosenberg);

  std::size_t size() const { return linear_.size(); }
  Qubo build() const;

 private:
  std::size_t origin_n_;
  double offset_ = 0.0;
  std::vector<double> linear_;
  std::map<std::pair<std::size_t, std::size_t>, double> quadratic_;
  std::vector<AuxDef> aux_;
};

/// Objective rescaled to a minimization with range [0, 1].
struct ScaledObjective {
  std::string name;
  std::vector<double> coefficients;
  double offset = 0.0;
  double lower = 0.0;  // natural-unit bounds used for the scaling
  double upper = 0.0;

  double value(std::span<const std::uint8_t> x) const;
};

std::vector<ScaledObjective> scale_objectives(const ProblemInstance& instance);

struct Weights {
  std::vector<double> w;

  /// Throws UsageError unless w >= 0 and sums to 1 within 1e-12.
  void validate() const;
};

/// Uniform draw from the (M-1)-simplex via normalized exponentials.
Weights random_weight(std::size_t m, Rng& rng);

struct QuboBuildConfig {
  double penalty = 2.0;
  double rosenberg_penalty = 4.0;

  void validate() const;
};

Qubo model_to_qubo(std::span<const ScaledObjective> scaled, const Weights& w,
                   std::span<const Constraint> constraints, const QuboBuildConfig& cfg);

/// scale_objectives + model_to_qubo.
Qubo compile(const ProblemInstance& instance, const Weights& w, const QuboBuildConfig& cfg);

double energy(const Qubo& q, std::span<const std::uint8_t> x);

/// Extends an assignment over the original variables with each auxiliary set to
/// the product it reifies.
Bits complete_auxiliaries(const Qubo& q, std::span<const std::uint8_t> x);

/// Drops auxiliaries.
Bits truncate_auxiliaries(const Qubo& q, std::span<const std::uint8_t> x);

using PartialAssignment = std::vector<std::optional<std::uint8_t>>;

/// Restriction of q to `free` (in that order) with every other variable fixed.
/// Throws UsageError when fixed and free overlap or do not cover all variables.
Qubo clamp(const Qubo& q, const PartialAssignment& fixed, std::span<const std::size_t> free);

/// Same as clamp with all non-free variables taken from `context` (length n_total).
Qubo clamp_to_context(const Qubo& q, std::span<const std::uint8_t> context,
                      std::span<const std::size_t> free);

nlohmann::json to_json(const Qubo& q);
Qubo qubo_from_json(const nlohmann::json& doc);

}  // namespace qsbse
