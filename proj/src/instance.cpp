#include "qsbse/instance.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace qsbse {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string_view kind_name(VariableKind k) {
  switch (k) {
    case VariableKind::requirement: return "requirement";
    case VariableKind::customer: return "customer";
    case VariableKind::feature: return "feature";
  }
  return "?";
}

VariableKind kind_from(const std::string& s) {
  if (s == "requirement") return VariableKind::requirement;
  if (s == "customer") return VariableKind::customer;
  if (s == "feature") return VariableKind::feature;
  throw ParseError("unknown variable kind '" + s + "'");
}

}  // namespace

double Objective::value(std::span<const std::uint8_t> x) const {
  double v = offset;
  for (std::size_t i = 0; i < coefficients.size(); ++i)
    if (x[i]) v += coefficients[i];
  return v;
}

std::string_view constraint_kind_name(const Constraint& c) {
  static constexpr std::string_view names[] = {"implies", "excludes", "iff",
                                               "or_group", "alt_group", "clause"};
  return names[c.index()];
}

bool satisfied(const Constraint& c, std::span<const std::uint8_t> x) {
  return std::visit(
      overloaded{
          [&](const Implies& k) { return x[k.a] <= x[k.b]; },
          [&](const Excludes& k) { return !(x[k.a] && x[k.b]); },
          [&](const Iff& k) { return x[k.a] == x[k.b]; },
          [&](const OrGroup& k) {
            if (!x[k.parent]) return true;
            return std::any_of(k.children.begin(), k.children.end(),
                               [&](std::size_t c) { return x[c] != 0; });
          },
          [&](const AltGroup& k) {
            std::size_t sum = 0;
            for (auto c : k.children) sum += x[c];
            return sum == x[k.parent];
          },
          [&](const Clause& k) {
            return std::any_of(k.literals.begin(), k.literals.end(),
                               [&](const Literal& l) { return l.holds(x); });
          },
      },
      c);
}

std::vector<std::size_t> constraint_vars(const Constraint& c) {
  return std::visit(
      overloaded{
          [](const Implies& k) { return std::vector<std::size_t>{k.a, k.b}; },
          [](const Excludes& k) { return std::vector<std::size_t>{k.a, k.b}; },
          [](const Iff& k) { return std::vector<std::size_t>{k.a, k.b}; },
          [](const OrGroup& k) {
            std::vector<std::size_t> v{k.parent};
            v.insert(v.end(), k.children.begin(), k.children.end());
            return v;
          },
          [](const AltGroup& k) {
            std::vector<std::size_t> v{k.parent};
            v.insert(v.end(), k.children.begin(), k.children.end());
            return v;
          },
          [](const Clause& k) {
            std::vector<std::size_t> v;
            for (const auto& l : k.literals) v.push_back(l.var);
            return v;
          },
      },
      c);
}

std::size_t Evaluation::total_violations() const {
  return std::accumulate(violations.begin(), violations.end(), std::size_t{0});
}

std::vector<Sense> ProblemInstance::senses() const {
  std::vector<Sense> s;
  for (const auto& o : objectives) s.push_back(o.sense);
  return s;
}

void ProblemInstance::validate() const {
  const std::size_t n = variables.size();
  for (std::size_t i = 0; i < n; ++i)
    if (variables[i].id != i) throw UsageError("variable ids must be dense 0..n-1");
  if (objectives.size() < 2) throw UsageError("an instance needs at least two objectives");
  for (const auto& o : objectives)
    if (o.coefficients.size() != n)
      throw UsageError("objective '" + o.name + "' has " + std::to_string(o.coefficients.size()) +
                       " coefficients, expected " + std::to_string(n));
  for (const auto& c : constraints) {
    for (auto v : constraint_vars(c))
      if (v >= n) throw UsageError("constraint references undeclared variable " + std::to_string(v));
    if (const auto* g = std::get_if<OrGroup>(&c); g && g->children.empty())
      throw UsageError("or_group without children");
    if (const auto* g = std::get_if<AltGroup>(&c); g && g->children.empty())
      throw UsageError("alt_group without children");
    if (const auto* k = std::get_if<Clause>(&c); k && k->literals.empty())
      throw UsageError("empty clause");
  }
}

Evaluation evaluate(const ProblemInstance& instance, std::span<const std::uint8_t> x) {
  if (x.size() != instance.size())
    throw UsageError("assignment has length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(instance.size()));
  Evaluation e;
  e.objective_values.reserve(instance.objectives.size());
  for (const auto& o : instance.objectives) e.objective_values.push_back(o.value(x));
  for (const auto& c : instance.constraints)
    if (!satisfied(c, x)) ++e.violations[c.index()];
  e.feasible = e.total_violations() == 0;
  return e;
}

std::vector<Clause> to_cnf(const ProblemInstance& instance) {
  std::vector<Clause> out;
  auto add = [&](std::initializer_list<Literal> lits) { out.push_back(Clause{lits}); };
  for (const auto& c : instance.constraints) {
    std::visit(overloaded{
                   [&](const Implies& k) { add({{k.a, false}, {k.b, true}}); },
                   [&](const Excludes& k) { add({{k.a, false}, {k.b, false}}); },
                   [&](const Iff& k) {
                     add({{k.a, false}, {k.b, true}});
                     add({{k.a, true}, {k.b, false}});
                   },
                   [&](const OrGroup& k) {
                     Clause cl{{{k.parent, false}}};
                     for (auto ch : k.children) cl.literals.push_back({ch, true});
                     out.push_back(std::move(cl));
                   },
                   [&](const AltGroup& k) {
                     Clause cl{{{k.parent, false}}};
                     for (auto ch : k.children) cl.literals.push_back({ch, true});
                     out.push_back(std::move(cl));
                     for (std::size_t i = 0; i < k.children.size(); ++i) {
                       add({{k.children[i], false}, {k.parent, true}});
                       for (std::size_t j = i + 1; j < k.children.size(); ++j)
                         add({{k.children[i], false}, {k.children[j], false}});
                     }
                   },
                   [&](const Clause& k) { out.push_back(k); },
               },
               c);
  }
  return out;
}

namespace {

class Dpll {
 public:
  Dpll(std::size_t n, std::vector<Clause> clauses)
      : clauses_(std::move(clauses)), value_(n, -1), occurs_(n) {
    for (std::size_t i = 0; i < clauses_.size(); ++i)
      for (const auto& l : clauses_[i].literals) occurs_[l.var].push_back(i);
  }

  std::optional<Bits> solve() {
    std::vector<std::size_t> trail;
    for (std::size_t i = 0; i < clauses_.size(); ++i)
      if (!propagate_clause(i, trail)) return std::nullopt;
    if (!propagate(trail)) return std::nullopt;
    if (!search()) return std::nullopt;
    Bits x(value_.size());
    for (std::size_t i = 0; i < value_.size(); ++i) x[i] = value_[i] == 1;
    return x;
  }

 private:
  bool lit_true(const Literal& l) const { return value_[l.var] == (l.positive ? 1 : 0); }
  bool lit_unassigned(const Literal& l) const { return value_[l.var] < 0; }

  void assign(std::size_t v, int val, std::vector<std::size_t>& trail) {
    value_[v] = static_cast<std::int8_t>(val);
    trail.push_back(v);
    queue_.push_back(v);
  }

  // Returns false on conflict; enqueues a unit implication when one is forced.
  bool propagate_clause(std::size_t ci, std::vector<std::size_t>& trail) {
    const Literal* unit = nullptr;
    std::size_t open = 0;
    for (const auto& l : clauses_[ci].literals) {
      if (lit_true(l)) return true;
      if (lit_unassigned(l)) {
        ++open;
        unit = &l;
      }
    }
    if (open == 0) return false;
    if (open == 1) assign(unit->var, unit->positive ? 1 : 0, trail);
    return true;
  }

  bool propagate(std::vector<std::size_t>& trail) {
    while (!queue_.empty()) {
      const std::size_t v = queue_.back();
      queue_.pop_back();
      for (auto ci : occurs_[v])
        if (!propagate_clause(ci, trail)) {
          queue_.clear();
          return false;
        }
    }
    return true;
  }

  bool search() {
    while (next_ < value_.size() && value_[next_] >= 0) ++next_;
    if (next_ == value_.size()) return true;
    const std::size_t v = next_;
    const std::size_t saved_next = next_;
    for (int val : {0, 1}) {
      std::vector<std::size_t> trail;
      assign(v, val, trail);
      if (propagate(trail) && search()) return true;
      for (auto t : trail) value_[t] = -1;
      next_ = saved_next;
    }
    return false;
  }

  std::vector<Clause> clauses_;
  std::vector<std::int8_t> value_;
  std::vector<std::vector<std::size_t>> occurs_;
  std::vector<std::size_t> queue_;
  std::size_t next_ = 0;
};

}  // namespace

std::optional<Bits> find_feasible(const ProblemInstance& instance) {
  return Dpll(instance.size(), to_cnf(instance)).solve();
}

nlohmann::json to_json(const ProblemInstance& instance) {
  using nlohmann::json;
  json doc;
  doc["name"] = instance.name;
  json vars = json::array();
  for (const auto& v : instance.variables)
    vars.push_back({{"id", v.id}, {"label", v.label}, {"kind", kind_name(v.kind)}});
  doc["variables"] = std::move(vars);
  json objs = json::array();
  for (const auto& o : instance.objectives)
    objs.push_back({{"name", o.name},
                    {"sense", o.sense == Sense::minimize ? "minimize" : "maximize"},
                    {"coefficients", o.coefficients},
                    {"offset", o.offset}});
  doc["objectives"] = std::move(objs);
  json cons = json::array();
  for (const auto& c : instance.constraints) {
    json j{{"kind", constraint_kind_name(c)}};
    std::visit(overloaded{
                   [&](const Implies& k) { j["a"] = k.a, j["b"] = k.b; },
                   [&](const Excludes& k) { j["a"] = k.a, j["b"] = k.b; },
                   [&](const Iff& k) { j["a"] = k.a, j["b"] = k.b; },
                   [&](const OrGroup& k) { j["parent"] = k.parent, j["children"] = k.children; },
                   [&](const AltGroup& k) { j["parent"] = k.parent, j["children"] = k.children; },
                   [&](const Clause& k) {
                     json lits = json::array();
                     for (const auto& l : k.literals) lits.push_back({l.var, l.positive});
                     j["literals"] = std::move(lits);
                   },
               },
               c);
    cons.push_back(std::move(j));
  }
  doc["constraints"] = std::move(cons);
  return doc;
}

ProblemInstance instance_from_json(const nlohmann::json& doc) {
  try {
    ProblemInstance inst;
    inst.name = doc.at("name").get<std::string>();
    for (const auto& v : doc.at("variables"))
      inst.variables.push_back({v.at("id").get<std::size_t>(), v.at("label").get<std::string>(),
                                kind_from(v.at("kind").get<std::string>())});
    for (const auto& o : doc.at("objectives")) {
      const auto sense = o.at("sense").get<std::string>();
      if (sense != "minimize" && sense != "maximize") throw ParseError("bad sense '" + sense + "'");
      inst.objectives.push_back({o.at("name").get<std::string>(),
                                 sense == "minimize" ? Sense::minimize : Sense::maximize,
                                 o.at("coefficients").get<std::vector<double>>(),
                                 o.value("offset", 0.0)});
    }
    for (const auto& c : doc.at("constraints")) {
      const auto kind = c.at("kind").get<std::string>();
      if (kind == "implies")
        inst.constraints.emplace_back(Implies{c.at("a"), c.at("b")});
      else if (kind == "excludes")
        inst.constraints.emplace_back(Excludes{c.at("a"), c.at("b")});
      else if (kind == "iff")
        inst.constraints.emplace_back(Iff{c.at("a"), c.at("b")});
      else if (kind == "or_group")
        inst.constraints.emplace_back(
            OrGroup{c.at("parent"), c.at("children").get<std::vector<std::size_t>>()});
      else if (kind == "alt_group")
        inst.constraints.emplace_back(
            AltGroup{c.at("parent"), c.at("children").get<std::vector<std::size_t>>()});
      else if (kind == "clause") {
        Clause cl;
        for (const auto& l : c.at("literals"))
          cl.literals.push_back({l.at(0).get<std::size_t>(), l.at(1).get<bool>()});
        inst.constraints.emplace_back(std::move(cl));
      } else {
        throw ParseError("unknown constraint kind '" + kind + "'");
      }
    }
    inst.validate();
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed instance document: ") + e.what());
  } catch (const UsageError& e) {
    throw ParseError(std::string("invalid instance: ") + e.what());
  }
}

std::string content_hash(const ProblemInstance& instance) {
  auto doc = to_json(instance);
  doc.erase("name");
  const std::string canonical = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string stem_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = base.find_last_of('.');
  return dot == std::string::npos ? base : base.substr(0, dot);
}

}  // namespace

ProblemInstance load_instance(const std::string& path, const std::string& attributes_path) {
  if (ends_with(path, ".json")) {
    try {
      return instance_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("'" + path + "' is not valid JSON: " + e.what());
    }
  }
  if (ends_with(path, ".cnf") || ends_with(path, ".dimacs")) {
    std::string attrs = attributes_path;
    if (attrs.empty()) attrs = path.substr(0, path.find_last_of('.')) + ".csv";
    return parse_dimacs_fm(read_file(path), read_file(attrs), stem_of(path));
  }
  return parse_classic_nrp(read_file(path), stem_of(path));
}

}  // namespace qsbse
