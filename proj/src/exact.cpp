#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "qsbse/baselines.hpp"

namespace qsbse {

namespace {

constexpr double kTol = 1e-9;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// True when no completion of the partial assignment can satisfy c.
bool definitely_violated(const Constraint& c, const std::vector<std::int8_t>& v) {
  return std::visit(
      overloaded{
          [&](const Implies& k) { return v[k.a] == 1 && v[k.b] == 0; },
          [&](const Excludes& k) { return v[k.a] == 1 && v[k.b] == 1; },
          [&](const Iff& k) { return v[k.a] >= 0 && v[k.b] >= 0 && v[k.a] != v[k.b]; },
          [&](const OrGroup& k) {
            if (v[k.parent] != 1) return false;
            return std::all_of(k.children.begin(), k.children.end(),
                               [&](std::size_t ch) { return v[ch] == 0; });
          },
          [&](const AltGroup& k) {
            std::size_t ones = 0, open = 0;
            for (auto ch : k.children) {
              if (v[ch] == 1) ++ones;
              if (v[ch] < 0) ++open;
            }
            if (ones > 1) return true;
            if (v[k.parent] == 0) return ones > 0;
            if (v[k.parent] == 1) return ones == 0 && open == 0;
            return false;
          },
          [&](const Clause& k) {
            return std::all_of(k.literals.begin(), k.literals.end(), [&](const Literal& l) {
              return v[l.var] >= 0 && (v[l.var] == 1) != l.positive;
            });
          },
      },
      c);
}

class BranchAndBound {
 public:
  BranchAndBound(std::span<const double> objective, std::span<const Constraint> constraints,
                 std::span<const LinearBound> bounds, const ExactOptions& options)
      : obj_(objective), constraints_(constraints), bounds_(bounds), options_(options),
        n_(objective.size()), value_(n_, -1), watch_(n_) {
    for (std::size_t c = 0; c < constraints.size(); ++c)
      for (auto v : constraint_vars(constraints[c])) {
        if (v >= n_) throw UsageError("constraint references variable outside the objective");
        if (watch_[v].empty() || watch_[v].back() != c) watch_[v].push_back(c);
      }
    for (const auto& b : bounds)
      if (b.coefficients.size() != n_) throw UsageError("bound length differs from objective");

    suffix_neg_.assign(n_ + 1, 0.0);
    for (std::size_t i = n_; i-- > 0;) suffix_neg_[i] = suffix_neg_[i + 1] + std::min(0.0, obj_[i]);
    bound_lo_.assign(bounds.size(), std::vector<double>(n_ + 1, 0.0));
    bound_hi_.assign(bounds.size(), std::vector<double>(n_ + 1, 0.0));
    for (std::size_t k = 0; k < bounds.size(); ++k)
      for (std::size_t i = n_; i-- > 0;) {
        bound_lo_[k][i] = bound_lo_[k][i + 1] + std::min(0.0, bounds[k].coefficients[i]);
        bound_hi_[k][i] = bound_hi_[k][i + 1] + std::max(0.0, bounds[k].coefficients[i]);
      }
    bound_cur_.assign(bounds.size(), 0.0);
  }

  std::optional<Bits> solve() {
    start_ = std::chrono::steady_clock::now();
    for (const auto& c : constraints_)
      if (constraint_vars(c).empty() && definitely_violated(c, value_)) return std::nullopt;
    if (!bounds_ok(0)) return std::nullopt;
    dfs(0, 0.0);
    return best_;
  }

 private:
  bool bounds_ok(std::size_t depth) const {
    for (std::size_t k = 0; k < bounds_.size(); ++k) {
      if (bounds_[k].sense == BoundSense::at_least) {
        if (bound_cur_[k] + bound_hi_[k][depth] < bounds_[k].value - kTol) return false;
      } else {
        if (bound_cur_[k] + bound_lo_[k][depth] > bounds_[k].value + kTol) return false;
      }
    }
    return true;
  }

  void charge() {
    if (++nodes_ > options_.node_budget)
      throw ResourceError("branch and bound exceeded its node budget of " +
                          std::to_string(options_.node_budget));
    if (options_.time_budget_s && (nodes_ & 0xfff) == 0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count() >
            *options_.time_budget_s)
      throw ResourceError("branch and bound exceeded its time budget");
  }

  void dfs(std::size_t depth, double cur) {
    charge();
    if (cur + suffix_neg_[depth] >= best_value_) return;
    if (depth == n_) {
      best_value_ = cur;
      Bits x(n_);
      for (std::size_t i = 0; i < n_; ++i) x[i] = static_cast<std::uint8_t>(value_[i]);
      best_ = std::move(x);
      return;
    }
    const std::int8_t first = obj_[depth] < 0.0 ? 1 : 0;
    for (std::int8_t val : {first, static_cast<std::int8_t>(1 - first)}) {
      value_[depth] = val;
      bool ok = true;
      for (auto c : watch_[depth])
        if (definitely_violated(constraints_[c], value_)) {
          ok = false;
          break;
        }
      if (ok && val)
        for (std::size_t k = 0; k < bounds_.size(); ++k) bound_cur_[k] += bounds_[k].coefficients[depth];
      if (ok && bounds_ok(depth + 1)) dfs(depth + 1, cur + (val ? obj_[depth] : 0.0));
      if (ok && val)
        for (std::size_t k = 0; k < bounds_.size(); ++k) bound_cur_[k] -= bounds_[k].coefficients[depth];
    }
    value_[depth] = -1;
  }

  std::span<const double> obj_;
  std::span<const Constraint> constraints_;
  std::span<const LinearBound> bounds_;
  ExactOptions options_;
  std::size_t n_;
  std::vector<std::int8_t> value_;
  std::vector<std::vector<std::size_t>> watch_;
  std::vector<double> suffix_neg_;
  std::vector<std::vector<double>> bound_lo_, bound_hi_;
  std::vector<double> bound_cur_;
  std::size_t nodes_ = 0;
  double best_value_ = std::numeric_limits<double>::infinity();
  std::optional<Bits> best_;
  std::chrono::steady_clock::time_point start_;
};

double dot(std::span<const double> c, std::span<const std::uint8_t> x) {
  double v = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (x[i]) v += c[i];
  return v;
}

}  // namespace

std::optional<Bits> exact_minimize(std::span<const double> objective,
                                   std::span<const Constraint> constraints,
                                   std::span<const LinearBound> bounds, const ExactOptions& options) {
  return BranchAndBound(objective, constraints, bounds, options).solve();
}

ParetoArchive epsilon_constraint(const ProblemInstance& instance, const EpsilonConfig& cfg) {
  instance.validate();
  if (instance.objectives.size() != 2)
    throw UsageError("the epsilon-constraint method needs exactly two objectives");
  if (cfg.optimized > 1 || cfg.constrained > 1 || cfg.optimized == cfg.constrained)
    throw UsageError("epsilon roles must be objectives 0 and 1");
  if (!(cfg.step > 0.0)) throw UsageError("epsilon step must be positive");

  // Both objectives in minimization orientation.
  auto oriented = [&](std::size_t m) {
    std::vector<double> c = instance.objectives[m].coefficients;
    if (instance.objectives[m].sense == Sense::maximize)
      for (auto& v : c) v = -v;
    return c;
  };
  const auto g1 = oriented(cfg.optimized);
  const auto g2 = oriented(cfg.constrained);

  std::vector<ArchiveEntry> found;
  std::vector<LinearBound> eps;
  for (;;) {
    const auto x1 = exact_minimize(g1, instance.constraints, eps, cfg.exact);
    if (!x1) break;
    // Lexicographic second stage keeps weakly dominated points out.
    auto lex = eps;
    lex.push_back({g1, BoundSense::at_most, dot(g1, *x1)});
    const auto x2 = exact_minimize(g2, instance.constraints, lex, cfg.exact);
    const Bits& x = x2 ? *x2 : *x1;
    found.push_back({x, evaluate(instance, x).objective_values});
    eps = {{g2, BoundSense::at_most, dot(g2, x) - cfg.step}};
  }
  return pareto_filter(std::move(found), instance.senses());
}

}  // namespace qsbse
