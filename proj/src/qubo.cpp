#include "qsbse/qubo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qsbse {

std::optional<double> Qubo::quadratic(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  auto it = std::lower_bound(quadratic_.begin(), quadratic_.end(), std::pair{i, j},
                             [](const QuadTerm& t, const std::pair<std::size_t, std::size_t>& k) {
                               return std::pair{t.i, t.j} < k;
                             });
  if (it == quadratic_.end() || it->i != i || it->j != j) return std::nullopt;
  return it->c;
}

double Qubo::energy(std::span<const std::uint8_t> x) const {
  if (x.size() != n_total())
    throw UsageError("assignment has length " + std::to_string(x.size()) + ", QUBO has " +
                     std::to_string(n_total()) + " variables");
  double e = offset_;
  for (std::size_t i = 0; i < linear_.size(); ++i)
    if (x[i]) e += linear_[i];
  for (const auto& t : quadratic_)
    if (x[t.i] && x[t.j]) e += t.c;
  return e;
}

double Qubo::local_field(std::size_t i, std::span<const std::uint8_t> x) const {
  double f = linear_[i];
  for (const auto& nb : neighbors(i))
    if (x[nb.var]) f += nb.c;
  return f;
}

double Qubo::max_abs_coefficient() const {
  double m = 0.0;
  for (double c : linear_) m = std::max(m, std::abs(c));
  for (const auto& t : quadratic_) m = std::max(m, std::abs(t.c));
  return m;
}

double Qubo::min_abs_nonzero_coefficient() const {
  double m = std::numeric_limits<double>::infinity();
  for (double c : linear_)
    if (c != 0.0) m = std::min(m, std::abs(c));
  for (const auto& t : quadratic_) m = std::min(m, std::abs(t.c));
  return m;
}

void QuboBuilder::add_quadratic(std::size_t i, std::size_t j, double c) {
  if (i >= linear_.size() || j >= linear_.size()) throw UsageError("quadratic term out of range");
  if (i == j) {
    linear_[i] += c;
    return;
  }
  if (i > j) std::swap(i, j);
  quadratic_[{i, j}] += c;
}

void QuboBuilder::add_factor(const Factor& f, double c) {
  if (f.complemented) {
    offset_ += c;
    add_linear(f.var, -c);
  } else {
    add_linear(f.var, c);
  }
}

void QuboBuilder::add_product(const Factor& u, const Factor& v, double c) {
  // u = a_u + b_u x_u with (a, b) = (1, -1) for a complement, (0, 1) otherwise.
  const double au = u.complemented ? 1.0 : 0.0, bu = u.complemented ? -1.0 : 1.0;
  const double av = v.complemented ? 1.0 : 0.0, bv = v.complemented ? -1.0 : 1.0;
  if (au * av != 0.0) offset_ += c * au * av;
  if (au * bv != 0.0) add_linear(v.var, c * au * bv);
  if (av * bu != 0.0) add_linear(u.var, c * av * bu);
  add_quadratic(u.var, v.var, c * bu * bv);
}

std::size_t QuboBuilder::reify(const Factor& u, const Factor& v, double rosenberg) {
  const std::size_t z = linear_.size();
  linear_.push_back(0.0);
  aux_.push_back({z, u, v});
  const Factor fz{z, false};
  add_product(u, v, rosenberg);
  add_product(u, fz, -2.0 * rosenberg);
  add_product(v, fz, -2.0 * rosenberg);
  add_factor(fz, 3.0 * rosenberg);
  return z;
}

Qubo QuboBuilder::build() const {
  Qubo q;
  q.origin_n_ = origin_n_;
  q.offset_ = offset_;
  q.linear_ = linear_;
  q.aux_ = aux_;
  for (const auto& [key, c] : quadratic_)
    if (c != 0.0) q.quadratic_.push_back({key.first, key.second, c});

  const std::size_t n = linear_.size();
  std::vector<std::size_t> degree(n, 0);
  for (const auto& t : q.quadratic_) ++degree[t.i], ++degree[t.j];
  q.adjacency_start_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) q.adjacency_start_[i + 1] = q.adjacency_start_[i] + degree[i];
  q.adjacency_.resize(q.adjacency_start_[n]);
  std::vector<std::size_t> fill(q.adjacency_start_.begin(), q.adjacency_start_.end() - 1);
  for (const auto& t : q.quadratic_) {
    q.adjacency_[fill[t.i]++] = {t.j, t.c};
    q.adjacency_[fill[t.j]++] = {t.i, t.c};
  }
  return q;
}

double ScaledObjective::value(std::span<const std::uint8_t> x) const {
  double v = offset;
  for (std::size_t i = 0; i < coefficients.size(); ++i)
    if (x[i]) v += coefficients[i];
  return v;
}

std::vector<ScaledObjective> scale_objectives(const ProblemInstance& instance) {
  std::vector<ScaledObjective> out;
  for (const auto& o : instance.objectives) {
    double lo = o.offset, hi = o.offset;
    for (double c : o.coefficients) {
      lo += std::min(0.0, c);
      hi += std::max(0.0, c);
    }
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw UsageError("objective '" + o.name + "' has non-finite bounds");
    if (!(hi > lo))
      throw UsageError("objective '" + o.name + "' is constant and cannot be scaled");
    const double range = hi - lo;
    ScaledObjective s{o.name, {}, 0.0, lo, hi};
    s.coefficients.reserve(o.coefficients.size());
    if (o.sense == Sense::minimize) {
      for (double c : o.coefficients) s.coefficients.push_back(c / range);
      s.offset = (o.offset - lo) / range;
    } else {
      for (double c : o.coefficients) s.coefficients.push_back(-c / range);
      s.offset = (hi - o.offset) / range;
    }
    out.push_back(std::move(s));
  }
  return out;
}

void Weights::validate() const {
  if (w.size() < 2) throw UsageError("weights need at least two components");
  double sum = 0.0;
  for (double v : w) {
    if (!(v >= 0.0)) throw UsageError("weights must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw UsageError("weights must sum to 1");
}

Weights random_weight(std::size_t m, Rng& rng) {
  if (m < 2) throw UsageError("random_weight needs M >= 2");
  Weights out;
  out.w.resize(m);
  double sum = 0.0;
  for (auto& v : out.w) sum += (v = rng.exponential());
  for (auto& v : out.w) v /= sum;
  return out;
}

void QuboBuildConfig::validate() const {
  if (!(penalty > 1.0)) throw UsageError("penalty must exceed 1");
  if (!(rosenberg_penalty >= 2.0 * penalty))
    throw UsageError("rosenberg penalty must be at least twice the penalty");
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// P * prod(factors), quadratized left to right.
void add_product_penalty(QuboBuilder& b, std::span<const Factor> factors, double p, double pr) {
  if (factors.empty()) {
    b.add_offset(p);
    return;
  }
  if (factors.size() == 1) {
    b.add_factor(factors[0], p);
    return;
  }
  Factor acc = factors[0];
  for (std::size_t k = 1; k + 1 < factors.size(); ++k)
    acc = Factor{b.reify(acc, factors[k], pr), false};
  b.add_product(acc, factors.back(), p);
}

}  // namespace

Qubo model_to_qubo(std::span<const ScaledObjective> scaled, const Weights& w,
                   std::span<const Constraint> constraints, const QuboBuildConfig& cfg) {
  w.validate();
  cfg.validate();
  if (scaled.size() != w.w.size()) throw UsageError("weight count differs from objective count");
  const std::size_t n = scaled.front().coefficients.size();
  for (const auto& s : scaled)
    if (s.coefficients.size() != n) throw UsageError("scaled objectives differ in length");

  QuboBuilder b(n);
  for (std::size_t m = 0; m < scaled.size(); ++m) {
    b.add_offset(w.w[m] * scaled[m].offset);
    for (std::size_t i = 0; i < n; ++i)
      if (scaled[m].coefficients[i] != 0.0) b.add_linear(i, w.w[m] * scaled[m].coefficients[i]);
  }

  const double p = cfg.penalty, pr = cfg.rosenberg_penalty;
  for (const auto& c : constraints) {
    for (auto v : constraint_vars(c))
      if (v >= n) throw UsageError("constraint references variable outside the model");
    std::visit(overloaded{
                   [&](const Implies& k) { b.add_product({k.a, false}, {k.b, true}, p); },
                   [&](const Excludes& k) { b.add_quadratic(k.a, k.b, p); },
                   [&](const Iff& k) {
                     b.add_linear(k.a, p);
                     b.add_linear(k.b, p);
                     b.add_quadratic(k.a, k.b, -2.0 * p);
                   },
                   [&](const OrGroup& k) {
                     // x_p * prod(1 - x_c)
                     std::vector<Factor> f{{k.parent, false}};
                     for (auto ch : k.children) f.push_back({ch, true});
                     add_product_penalty(b, f, p, pr);
                   },
                   [&](const AltGroup& k) {
                     // (sum x_c - x_p)^2
                     for (std::size_t i = 0; i < k.children.size(); ++i) {
                       b.add_linear(k.children[i], p);
                       for (std::size_t j = i + 1; j < k.children.size(); ++j)
                         b.add_quadratic(k.children[i], k.children[j], 2.0 * p);
                       b.add_quadratic(k.children[i], k.parent, -2.0 * p);
                     }
                     b.add_linear(k.parent, p);
                   },
                   [&](const Clause& k) {
                     // Product of unsatisfied-literal indicators.
                     std::vector<Factor> f;
                     for (const auto& l : k.literals) f.push_back({l.var, l.positive});
                     add_product_penalty(b, f, p, pr);
                   },
               },
               c);
  }
  return b.build();
}

Qubo compile(const ProblemInstance& instance, const Weights& w, const QuboBuildConfig& cfg) {
  const auto scaled = scale_objectives(instance);
  return model_to_qubo(scaled, w, instance.constraints, cfg);
}

double energy(const Qubo& q, std::span<const std::uint8_t> x) { return q.energy(x); }

Bits complete_auxiliaries(const Qubo& q, std::span<const std::uint8_t> x) {
  if (x.size() != q.origin_n())
    throw UsageError("assignment has length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(q.origin_n()));
  Bits full(q.n_total(), 0);
  std::copy(x.begin(), x.end(), full.begin());
  for (const auto& a : q.aux()) full[a.id] = a.u.value(full) & a.v.value(full);
  return full;
}

Bits truncate_auxiliaries(const Qubo& q, std::span<const std::uint8_t> x) {
  return Bits(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(q.origin_n()));
}

Qubo clamp_to_context(const Qubo& q, std::span<const std::uint8_t> context,
                      std::span<const std::size_t> free) {
  const std::size_t n = q.n_total();
  if (context.size() != n) throw UsageError("context length differs from QUBO size");
  constexpr std::size_t kFixed = static_cast<std::size_t>(-1);
  std::vector<std::size_t> slot(n, kFixed);
  for (std::size_t k = 0; k < free.size(); ++k) {
    if (free[k] >= n) throw UsageError("free variable out of range");
    if (slot[free[k]] != kFixed) throw UsageError("free variable listed twice");
    slot[free[k]] = k;
  }
  QuboBuilder b(free.size());
  b.add_offset(q.offset());
  for (std::size_t i = 0; i < n; ++i) {
    if (slot[i] != kFixed)
      b.add_linear(slot[i], q.linear(i));
    else if (context[i])
      b.add_offset(q.linear(i));
  }
  for (const auto& t : q.quadratic()) {
    const bool fi = slot[t.i] == kFixed, fj = slot[t.j] == kFixed;
    if (!fi && !fj)
      b.add_quadratic(slot[t.i], slot[t.j], t.c);
    else if (!fi)
      b.add_linear(slot[t.i], context[t.j] ? t.c : 0.0);
    else if (!fj)
      b.add_linear(slot[t.j], context[t.i] ? t.c : 0.0);
    else if (context[t.i] && context[t.j])
      b.add_offset(t.c);
  }
  return b.build();
}

Qubo clamp(const Qubo& q, const PartialAssignment& fixed, std::span<const std::size_t> free) {
  const std::size_t n = q.n_total();
  if (fixed.size() != n) throw UsageError("partial assignment length differs from QUBO size");
  std::vector<char> is_free(n, 0);
  for (auto v : free) {
    if (v >= n) throw UsageError("free variable out of range");
    if (fixed[v]) throw UsageError("variable " + std::to_string(v) + " is both fixed and free");
    is_free[v] = 1;
  }
  Bits context(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (fixed[i])
      context[i] = *fixed[i] ? 1 : 0;
    else if (!is_free[i])
      throw UsageError("variable " + std::to_string(i) + " is neither fixed nor free");
  }
  return clamp_to_context(q, context, free);
}

nlohmann::json to_json(const Qubo& q) {
  using nlohmann::json;
  auto lit = [](const Factor& f) {
    const auto v = static_cast<long long>(f.var) + 1;
    return f.complemented ? -v : v;
  };
  json lin = json::array(), quad = json::array(), aux = json::array();
  for (std::size_t i = 0; i < q.n_total(); ++i)
    if (q.linear(i) != 0.0) lin.push_back({i, q.linear(i)});
  for (const auto& t : q.quadratic()) quad.push_back({t.i, t.j, t.c});
  for (const auto& a : q.aux()) aux.push_back({a.id, lit(a.u), lit(a.v)});
  return json{{"n_total", q.n_total()}, {"origin_n", q.origin_n()}, {"offset", q.offset()},
              {"linear", lin},          {"quadratic", quad},       {"aux", aux}};
}

Qubo qubo_from_json(const nlohmann::json& doc) {
  try {
    const auto n_total = doc.at("n_total").get<std::size_t>();
    const auto origin_n = doc.at("origin_n").get<std::size_t>();
    if (origin_n > n_total) throw ProtocolError("origin_n exceeds n_total");
    const auto aux = doc.at("aux");
    if (aux.size() != n_total - origin_n) throw ProtocolError("aux registry does not match n_total");
    auto factor = [&](long long lit) {
      if (lit == 0) throw ProtocolError("aux factor 0 is invalid");
      const auto v = static_cast<std::size_t>(lit < 0 ? -lit : lit) - 1;
      if (v >= n_total) throw ProtocolError("aux factor out of range");
      return Factor{v, lit < 0};
    };
    QuboBuilder b(origin_n);
    std::size_t next = origin_n;
    for (const auto& a : aux) {
      if (a.at(0).get<std::size_t>() != next) throw ProtocolError("aux ids must be consecutive");
      // Rebuild the registry without re-adding reification terms; they are in the term lists.
      b.reify(factor(a.at(1).get<long long>()), factor(a.at(2).get<long long>()), 0.0);
      ++next;
    }
    b.add_offset(doc.at("offset").get<double>());
    for (const auto& t : doc.at("linear")) b.add_linear(t.at(0).get<std::size_t>(), t.at(1).get<double>());
    for (const auto& t : doc.at("quadratic")) {
      const auto i = t.at(0).get<std::size_t>(), j = t.at(1).get<std::size_t>();
      if (i == j) throw ProtocolError("quadratic term on a single variable");
      b.add_quadratic(i, j, t.at(2).get<double>());
    }
    return b.build();
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed QUBO document: ") + e.what());
  } catch (const UsageError& e) {
    throw ProtocolError(std::string("malformed QUBO document: ") + e.what());
  }
}

}  // namespace qsbse
