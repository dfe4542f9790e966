#include <algorithm>
#include <charconv>
#include <sstream>

#include "qsbse/instance.hpp"

namespace qsbse {

namespace {

struct Token {
  std::string_view text;
  std::size_t line;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t line = 1, i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else {
      const std::size_t start = i;
      while (i < text.size() && text[i] != ' ' && text[i] != '\t' && text[i] != '\r' &&
             text[i] != '\n')
        ++i;
      tokens.push_back({text.substr(start, i - start), line});
    }
  }
  return tokens;
}

class TokenReader {
 public:
  explicit TokenReader(std::string_view text) : tokens_(tokenize(text)) {}

  long long integer(const char* what) {
    if (pos_ >= tokens_.size())
      throw ParseError(std::string("unexpected end of file, expected ") + what, last_line());
    const Token& t = tokens_[pos_++];
    long long v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size())
      throw ParseError(std::string("expected integer ") + what + ", got '" + std::string(t.text) + "'",
                       t.line);
    return v;
  }

  std::size_t count(const char* what) {
    const std::size_t line = peek_line();
    const long long v = integer(what);
    if (v < 0) throw ParseError(std::string("negative ") + what, line);
    return static_cast<std::size_t>(v);
  }

  double number(const char* what) {
    if (pos_ >= tokens_.size())
      throw ParseError(std::string("unexpected end of file, expected ") + what, last_line());
    const Token& t = tokens_[pos_++];
    double v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size())
      throw ParseError(std::string("expected number ") + what + ", got '" + std::string(t.text) + "'",
                       t.line);
    return v;
  }

  std::size_t peek_line() const { return pos_ < tokens_.size() ? tokens_[pos_].line : last_line(); }
  bool done() const { return pos_ >= tokens_.size(); }

 private:
  std::size_t last_line() const { return tokens_.empty() ? 1 : tokens_.back().line; }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

ProblemInstance parse_classic_nrp(std::string_view text, std::string name) {
  TokenReader in(text);
  std::vector<double> costs;
  const std::size_t levels = in.count("level count");
  for (std::size_t l = 0; l < levels; ++l) {
    const std::size_t k = in.count("requirement count");
    for (std::size_t i = 0; i < k; ++i) costs.push_back(in.number("requirement cost"));
  }
  const std::size_t n_req = costs.size();

  struct Dep {
    std::size_t pre, dep;
  };
  std::vector<Dep> deps;
  const std::size_t n_dep = in.count("dependency count");
  for (std::size_t d = 0; d < n_dep; ++d) {
    const std::size_t line = in.peek_line();
    const std::size_t a = in.count("prerequisite id");
    const std::size_t b = in.count("dependent id");
    if (a < 1 || a > n_req || b < 1 || b > n_req)
      throw ParseError("dependency references unknown requirement", line);
    deps.push_back({a - 1, b - 1});
  }

  struct Customer {
    double profit;
    std::vector<std::size_t> requests;
  };
  std::vector<Customer> customers;
  const std::size_t n_cust = in.count("customer count");
  for (std::size_t c = 0; c < n_cust; ++c) {
    Customer cu;
    cu.profit = in.number("customer profit");
    const std::size_t k = in.count("request count");
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t line = in.peek_line();
      const std::size_t id = in.count("requested id");
      if (id < 1 || id > n_req) throw ParseError("customer requests unknown requirement", line);
      cu.requests.push_back(id - 1);
    }
    customers.push_back(std::move(cu));
  }
  if (!in.done()) throw ParseError("trailing content after customer section", in.peek_line());

  ProblemInstance inst;
  inst.name = std::move(name);
  const std::size_t n = n_req + n_cust;
  for (std::size_t i = 0; i < n_req; ++i)
    inst.variables.push_back({i, "r" + std::to_string(i + 1), VariableKind::requirement});
  for (std::size_t c = 0; c < n_cust; ++c)
    inst.variables.push_back({n_req + c, "c" + std::to_string(c + 1), VariableKind::customer});
  Objective cost{"cost", Sense::minimize, std::vector<double>(n, 0.0), 0.0};
  Objective profit{"profit", Sense::maximize, std::vector<double>(n, 0.0), 0.0};
  std::copy(costs.begin(), costs.end(), cost.coefficients.begin());
  for (std::size_t c = 0; c < n_cust; ++c) profit.coefficients[n_req + c] = customers[c].profit;
  inst.objectives = {std::move(cost), std::move(profit)};
  for (const auto& d : deps) inst.constraints.emplace_back(Implies{d.dep, d.pre});
  for (std::size_t c = 0; c < n_cust; ++c)
    for (auto r : customers[c].requests) inst.constraints.emplace_back(Implies{n_req + c, r});
  return inst;
}

std::string serialize_classic_nrp(const ProblemInstance& inst) {
  std::vector<std::size_t> reqs, custs;
  for (const auto& v : inst.variables)
    (v.kind == VariableKind::customer ? custs : reqs).push_back(v.id);
  // Classic layout requires requirements first, then customers.
  for (std::size_t i = 0; i < reqs.size(); ++i)
    if (reqs[i] != i) throw UsageError("requirements must precede customers");
  if (inst.objectives.size() != 2) throw UsageError("classic NRP has exactly two objectives");
  const auto& cost = inst.objectives[0].coefficients;
  const auto& profit = inst.objectives[1].coefficients;
  const std::size_t n_req = reqs.size();

  std::ostringstream os;
  os << "1\n" << n_req << "\n";
  for (std::size_t i = 0; i < n_req; ++i) os << (i ? " " : "") << format_number(cost[i]);
  os << "\n";
  std::vector<std::pair<std::size_t, std::size_t>> deps;
  std::vector<std::vector<std::size_t>> requests(custs.size());
  for (const auto& c : inst.constraints) {
    const auto* imp = std::get_if<Implies>(&c);
    if (!imp) throw UsageError("classic NRP supports only implication constraints");
    if (imp->a < n_req)
      deps.emplace_back(imp->b, imp->a);
    else
      requests[imp->a - n_req].push_back(imp->b);
  }
  os << deps.size() << "\n";
  for (auto [pre, dep] : deps) os << pre + 1 << " " << dep + 1 << "\n";
  os << custs.size() << "\n";
  for (std::size_t c = 0; c < custs.size(); ++c) {
    os << format_number(profit[custs[c]]) << " " << requests[c].size();
    for (auto r : requests[c]) os << " " << r + 1;
    os << "\n";
  }
  return os.str();
}

ProblemInstance parse_dimacs_fm(std::string_view cnf_text, std::string_view attributes_text,
                                std::string name) {
  std::size_t n_vars = 0, n_clauses = 0;
  bool have_header = false;
  std::vector<Clause> clauses;
  Clause current;
  std::size_t current_start = 0;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= cnf_text.size()) {
    auto eol = cnf_text.find('\n', pos);
    if (eol == std::string_view::npos) eol = cnf_text.size();
    std::string_view line = cnf_text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos) continue;
    line.remove_prefix(first);
    if (line[0] == 'c' || line[0] == '%') continue;
    if (line[0] == 'p') {
      if (have_header) throw ParseError("duplicate problem line", line_no);
      std::istringstream hs{std::string(line)};
      std::string p, fmt;
      long long v = -1, c = -1;
      if (!(hs >> p >> fmt >> v >> c) || fmt != "cnf" || v < 0 || c < 0)
        throw ParseError("malformed problem line, expected 'p cnf V C'", line_no);
      n_vars = static_cast<std::size_t>(v);
      n_clauses = static_cast<std::size_t>(c);
      have_header = true;
      continue;
    }
    if (!have_header) throw ParseError("clause before 'p cnf' header", line_no);
    TokenReader tr(line);
    while (!tr.done()) {
      long long lit = 0;
      try {
        lit = tr.integer("literal");
      } catch (const ParseError&) {
        throw ParseError("non-numeric literal", line_no);
      }
      if (lit == 0) {
        if (current.literals.empty()) throw ParseError("empty clause", line_no);
        clauses.push_back(std::move(current));
        current = {};
        continue;
      }
      const std::size_t var = static_cast<std::size_t>(lit < 0 ? -lit : lit);
      if (var > n_vars)
        throw ParseError("literal " + std::to_string(lit) + " exceeds declared variable count",
                         line_no);
      if (current.literals.empty()) current_start = line_no;
      current.literals.push_back({var - 1, lit > 0});
    }
  }
  if (!have_header) throw ParseError("missing 'p cnf' header");
  if (!current.literals.empty()) throw ParseError("unterminated clause", current_start);
  if (clauses.size() != n_clauses)
    throw ParseError("header declares " + std::to_string(n_clauses) + " clauses, found " +
                     std::to_string(clauses.size()));

  // Attribute CSV.
  std::vector<std::string> labels;
  std::vector<std::array<double, 4>> attrs;
  {
    std::size_t ln = 0;
    std::size_t p = 0;
    bool header_seen = false;
    while (p <= attributes_text.size()) {
      auto eol = attributes_text.find('\n', p);
      if (eol == std::string_view::npos) eol = attributes_text.size();
      std::string line(attributes_text.substr(p, eol - p));
      p = eol + 1;
      ++ln;
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (!header_seen) {
        if (line != "feature,richness,reliability,defects,cost")
          throw ParseError("attribute header must be 'feature,richness,reliability,defects,cost'", ln);
        header_seen = true;
        continue;
      }
      if (cells.size() != 5) throw ParseError("attribute row needs 5 fields", ln);
      std::array<double, 4> row{};
      for (int k = 0; k < 4; ++k) {
        const std::string& s = cells[k + 1];
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), row[k]);
        if (ec != std::errc() || ptr != s.data() + s.size())
          throw ParseError("non-numeric attribute '" + s + "'", ln);
      }
      labels.push_back(cells[0]);
      attrs.push_back(row);
    }
    if (!header_seen) throw ParseError("attribute file is empty");
  }
  if (attrs.size() != n_vars)
    throw ParseError("attribute file has " + std::to_string(attrs.size()) + " rows for " +
                     std::to_string(n_vars) + " variables");

  ProblemInstance inst;
  inst.name = std::move(name);
  static constexpr const char* names[] = {"richness", "reliability", "defects", "cost"};
  static constexpr Sense senses[] = {Sense::maximize, Sense::maximize, Sense::minimize,
                                     Sense::minimize};
  for (int k = 0; k < 4; ++k)
    inst.objectives.push_back({names[k], senses[k], std::vector<double>(n_vars), 0.0});
  for (std::size_t i = 0; i < n_vars; ++i) {
    inst.variables.push_back({i, labels[i], VariableKind::feature});
    for (int k = 0; k < 4; ++k) inst.objectives[k].coefficients[i] = attrs[i][k];
  }
  for (auto& c : clauses) inst.constraints.emplace_back(std::move(c));
  return inst;
}

std::string serialize_dimacs(const ProblemInstance& inst) {
  const auto clauses = to_cnf(inst);
  std::ostringstream os;
  os << "c " << inst.name << "\n";
  os << "p cnf " << inst.size() << " " << clauses.size() << "\n";
  for (const auto& c : clauses) {
    for (const auto& l : c.literals)
      os << (l.positive ? "" : "-") << l.var + 1 << " ";
    os << "0\n";
  }
  return os.str();
}

std::string serialize_attributes(const ProblemInstance& inst) {
  if (inst.objectives.size() != 4) throw UsageError("attribute file needs four objectives");
  std::ostringstream os;
  os << "feature,richness,reliability,defects,cost\n";
  for (std::size_t i = 0; i < inst.size(); ++i) {
    os << inst.variables[i].label;
    for (int k = 0; k < 4; ++k) os << "," << format_number(inst.objectives[k].coefficients[i]);
    os << "\n";
  }
  return os.str();
}

}  // namespace qsbse
