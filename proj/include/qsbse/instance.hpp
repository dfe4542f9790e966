#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "qsbse/common.hpp"

namespace qsbse {

enum class VariableKind { requirement, customer, feature };

struct Variable {
  std::size_t id = 0;
  std::string label;
  VariableKind kind = VariableKind::requirement;

  bool operator==(const Variable&) const = default;
};

/// Linear objective: value(x) = offset + sum_i coefficients[i] * x_i.
struct Objective {
  std::string name;
  Sense sense = Sense::minimize;
  std::vector<double> coefficients;
  double offset = 0.0;

  double value(std::span<const std::uint8_t> x) const;
  bool operator==(const Objective&) const = default;
};

struct Literal {
  std::size_t var = 0;
  bool positive = true;

  bool holds(std::span<const std::uint8_t> x) const { return (x[var] != 0) == positive; }
  bool operator==(const Literal&) const = default;
};

/// x_a <= x_b
struct Implies {
  std::size_t a = 0, b = 0;
  bool operator==(const Implies&) const = default;
};
/// x_a * x_b == 0
struct Excludes {
  std::size_t a = 0, b = 0;
  bool operator==(const Excludes&) const = default;
};
/// x_a == x_b
struct Iff {
  std::size_t a = 0, b = 0;
  bool operator==(const Iff&) const = default;
};
/// x_parent <= max(children)
struct OrGroup {
  std::size_t parent = 0;
  std::vector<std::size_t> children;
  bool operator==(const OrGroup&) const = default;
};
/// sum(children) == x_parent
struct AltGroup {
  std::size_t parent = 0;
  std::vector<std::size_t> children;
  bool operator==(const AltGroup&) const = default;
};
/// At least one literal holds.
struct Clause {
  std::vector<Literal> literals;
  bool operator==(const Clause&) const = default;
};

using Constraint = std::variant<Implies, Excludes, Iff, OrGroup, AltGroup, Clause>;

inline constexpr std::size_t kConstraintKinds = std::variant_size_v<Constraint>;
std::string_view constraint_kind_name(const Constraint& c);
bool satisfied(const Constraint& c, std::span<const std::uint8_t> x);
/// Variable ids referenced by a constraint, in declaration order.
std::vector<std::size_t> constraint_vars(const Constraint& c);

struct Evaluation {
  std::vector<double> objective_values;
  /// Indexed by Constraint::index().
  std::array<std::size_t, kConstraintKinds> violations{};
  bool feasible = true;

  std::size_t total_violations() const;
};

struct ProblemInstance {
  std::string name;
  std::vector<Variable> variables;
  std::vector<Objective> objectives;
  std::vector<Constraint> constraints;

  std::size_t size() const { return variables.size(); }
  std::vector<Sense> senses() const;
  /// Throws UsageError when an invariant is broken.
  void validate() const;
  bool operator==(const ProblemInstance&) const = default;
};

Evaluation evaluate(const ProblemInstance& instance, std::span<const std::uint8_t> x);

/// Clausal form of every constraint (each clause a disjunction of literals).
std::vector<Clause> to_cnf(const ProblemInstance& instance);

/// DPLL search for an assignment satisfying every constraint.
std::optional<Bits> find_feasible(const ProblemInstance& instance);

// Native JSON form {name, variables, objectives, constraints}.
nlohmann::json to_json(const ProblemInstance& instance);
ProblemInstance instance_from_json(const nlohmann::json& doc);

/// FNV-1a 64 over the canonical JSON dump without the name, as 16 hex digits.
std::string content_hash(const ProblemInstance& instance);

// Classic NRP text format.
ProblemInstance parse_classic_nrp(std::string_view text, std::string name = "nrp");
/// Serializes an instance built from the classic format (single level).
std::string serialize_classic_nrp(const ProblemInstance& instance);

// DIMACS CNF plus attribute CSV "feature,richness,reliability,defects,cost".
ProblemInstance parse_dimacs_fm(std::string_view cnf_text, std::string_view attributes_text,
                                std::string name = "fm");
std::string serialize_dimacs(const ProblemInstance& instance);
std::string serialize_attributes(const ProblemInstance& instance);

// Seeded synthetic generators.
ProblemInstance generate_nrp(std::size_t n_requirements, std::size_t n_customers, double density,
                             std::uint64_t seed);
ProblemInstance generate_fm(std::size_t n_features, double cross_tree_ratio, std::uint64_t seed);

/// Loads by extension: .json native, .cnf DIMACS (attributes from `attributes_path`
/// or the sibling .csv), anything else classic NRP.
ProblemInstance load_instance(const std::string& path, const std::string& attributes_path = {});

}  // namespace qsbse
