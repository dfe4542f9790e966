#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qsbse/cli.hpp"

namespace qsbse {

// ---- Config ----

const std::map<std::string, std::string>& Config::defaults() {
  static const std::map<std::string, std::string> d{
      {"weights", "10"},
      {"reads", "500"},
      {"sampler.kind", "sa"},
      {"sampler.sweeps", "1000"},
      {"sampler.beta_min", ""},
      {"sampler.beta_max", ""},
      {"build.penalty", "2"},
      {"build.rosenberg_penalty", "4"},
      {"cqha.sub_size", "150"},
      {"cqha.rate", "1"},
      {"cqha.loops", "10"},
      {"cqha.strategy", "total"},
      {"nsga2.population", "100"},
      {"nsga2.evaluations", "20000"},
      {"nsga2.crossover_probability", "0.8"},
      {"nsga2.mutation_probability", ""},
      {"nsga2.crossover", "uniform"},
      {"eps.optimized", "0"},
      {"eps.constrained", "1"},
      {"eps.step", "1"},
      {"eps.node_budget", "200000000"},
      {"remote.endpoint", ""},
      {"remote.timeout_ms", "10000"},
      {"run.time_budget_s", ""},
      {"run.exec", "serial"},
  };
  return d;
}

void Config::set(const std::string& key, const std::string& value) {
  if (!defaults().count(key)) throw UsageError("unknown configuration key '" + key + "'");
  values_[key] = value;
}

void Config::load_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(origin + ":" + std::to_string(no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (!defaults().count(key))
      throw UsageError(origin + ":" + std::to_string(no) + ": unknown key '" + key + "'");
    values_[key] = trim(line.substr(eq + 1));
  }
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  load_text(ss.str(), path);
}

void Config::apply_environment() {
  for (const auto& [key, _] : defaults()) {
    std::string env = "QSBSE_";
    for (char c : key) env += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (const char* v = std::getenv(env.c_str())) values_[key] = v;
  }
}

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown configuration key '" + key + "'");
  return it->second;
}

double Config::get_double(const std::string& key) const {
  const auto& s = get(key);
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw UsageError("configuration key '" + key + "' expects a number, got '" + s + "'");
  return v;
}

std::uint64_t Config::get_u64(const std::string& key) const {
  const auto& s = get(key);
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw UsageError("configuration key '" + key + "' expects a non-negative integer, got '" + s + "'");
  return v;
}

std::size_t Config::get_count(const std::string& key) const {
  return static_cast<std::size_t>(get_u64(key));
}

namespace {

Exec exec_from(const std::string& s) {
  if (s == "serial") return Exec::serial;
  if (s == "parallel") return Exec::parallel;
  throw UsageError("run.exec must be 'serial' or 'parallel'");
}

}  // namespace

SamplerSpec sampler_from(const Config& cfg) {
  SamplerSpec s;
  s.kind = sampler_kind_from(cfg.get("sampler.kind"));
  s.reads = cfg.get_count("reads");
  s.sweeps = cfg.get_count("sampler.sweeps");
  const bool has_min = !cfg.get("sampler.beta_min").empty();
  const bool has_max = !cfg.get("sampler.beta_max").empty();
  if (has_min != has_max) throw UsageError("set both sampler.beta_min and sampler.beta_max");
  if (has_min) s.beta_range = {{cfg.get_double("sampler.beta_min"), cfg.get_double("sampler.beta_max")}};
  s.endpoint = cfg.get("remote.endpoint");
  s.timeout_ms = static_cast<long>(cfg.get_count("remote.timeout_ms"));
  s.exec = exec_from(cfg.get("run.exec"));
  s.validate();
  return s;
}

QuboBuildConfig build_from(const Config& cfg) {
  QuboBuildConfig b{cfg.get_double("build.penalty"), cfg.get_double("build.rosenberg_penalty")};
  b.validate();
  return b;
}

MoqaConfig moqa_from(const Config& cfg, std::uint64_t seed) {
  MoqaConfig m;
  m.n_weights = cfg.get_count("weights");
  m.reads = cfg.get_count("reads");
  m.sampler = sampler_from(cfg);
  m.build = build_from(cfg);
  m.seed = seed;
  m.exec = exec_from(cfg.get("run.exec"));
  m.validate();
  return m;
}

CqhaConfig cqha_from(const Config& cfg, std::uint64_t seed) {
  CqhaConfig c;
  c.n_weights = cfg.get_count("weights");
  c.reads = cfg.get_count("reads");
  c.sub_size = cfg.get_count("cqha.sub_size");
  c.rate = cfg.get_double("cqha.rate");
  c.max_loops = cfg.get_count("cqha.loops");
  const auto& st = cfg.get("cqha.strategy");
  if (st == "total")
    c.strategy = ImpactStrategy::total;
  else if (st == "linear")
    c.strategy = ImpactStrategy::linear;
  else
    throw UsageError("cqha.strategy must be 'total' or 'linear'");
  c.sampler = sampler_from(cfg);
  c.build = build_from(cfg);
  c.seed = seed;
  c.exec = exec_from(cfg.get("run.exec"));
  c.validate();
  return c;
}

Nsga2Config nsga2_from(const Config& cfg, std::uint64_t seed) {
  Nsga2Config n;
  n.population = cfg.get_count("nsga2.population");
  n.max_evaluations = cfg.get_count("nsga2.evaluations");
  n.crossover_probability = cfg.get_double("nsga2.crossover_probability");
  if (!cfg.get("nsga2.mutation_probability").empty())
    n.mutation_probability = cfg.get_double("nsga2.mutation_probability");
  const auto& x = cfg.get("nsga2.crossover");
  if (x == "uniform")
    n.crossover = Crossover::uniform;
  else if (x == "single_point")
    n.crossover = Crossover::single_point;
  else
    throw UsageError("nsga2.crossover must be 'uniform' or 'single_point'");
  if (!cfg.get("run.time_budget_s").empty()) n.time_budget_s = cfg.get_double("run.time_budget_s");
  n.seed = seed;
  n.validate();
  return n;
}

EpsilonConfig epsilon_from(const Config& cfg) {
  EpsilonConfig e;
  e.optimized = cfg.get_count("eps.optimized");
  e.constrained = cfg.get_count("eps.constrained");
  e.step = cfg.get_double("eps.step");
  e.exact.node_budget = cfg.get_count("eps.node_budget");
  if (!cfg.get("run.time_budget_s").empty()) e.exact.time_budget_s = cfg.get_double("run.time_budget_s");
  return e;
}

// ---- RunRecord ----

namespace {

std::string bits_to_string(const Bits& x) {
  std::string s(x.size(), '0');
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] ? '1' : '0';
  return s;
}

Bits bits_from_string(const std::string& s) {
  Bits x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1') throw ParseError("assignment strings hold only 0 and 1");
    x[i] = s[i] == '1';
  }
  return x;
}

nlohmann::json timings_json(const PhaseTimings& t) {
  return {{"compile_s", t.compile_s},
          {"decompose_s", t.decompose_s},
          {"sample_s", t.sample_s},
          {"local_search_s", t.local_search_s},
          {"sort_s", t.sort_s}};
}

}  // namespace

nlohmann::json to_json(const RunRecord& r) {
  using nlohmann::json;
  json senses = json::array();
  for (auto s : r.archive.senses) senses.push_back(s == Sense::minimize ? "minimize" : "maximize");
  json archive = json::array();
  for (const auto& e : r.archive.solutions)
    archive.push_back({{"assignment", bits_to_string(e.assignment)}, {"objectives", e.objectives}});
  return json{{"schema", "qsbse.run/1"},
              {"method", r.method},
              {"label", r.label},
              {"instance", {{"name", r.instance_name},
                            {"hash", r.instance_hash},
                            {"objectives", r.objective_names},
                            {"senses", senses}}},
              {"config", r.config},
              {"seed", r.seed},
              {"repeat", r.repeat},
              {"wall_time_s", r.wall_time_s},
              {"timings", timings_json(r.timings)},
              {"archive", archive},
              {"trace", r.trace}};
}

RunRecord run_record_from_json(const nlohmann::json& doc) {
  try {
    if (doc.value("schema", "") != "qsbse.run/1") throw ParseError("not a run record");
    RunRecord r;
    r.method = doc.at("method").get<std::string>();
    r.label = doc.at("label").get<std::string>();
    const auto& inst = doc.at("instance");
    r.instance_name = inst.at("name").get<std::string>();
    r.instance_hash = inst.at("hash").get<std::string>();
    r.objective_names = inst.at("objectives").get<std::vector<std::string>>();
    for (const auto& s : inst.at("senses")) {
      const auto v = s.get<std::string>();
      if (v != "minimize" && v != "maximize") throw ParseError("bad sense '" + v + "'");
      r.archive.senses.push_back(v == "minimize" ? Sense::minimize : Sense::maximize);
    }
    r.config = doc.at("config").get<std::map<std::string, std::string>>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.repeat = doc.at("repeat").get<std::size_t>();
    r.wall_time_s = doc.at("wall_time_s").get<double>();
    const auto& t = doc.at("timings");
    r.timings = {t.at("compile_s"), t.at("decompose_s"), t.at("sample_s"), t.at("local_search_s"),
                 t.at("sort_s")};
    for (const auto& e : doc.at("archive"))
      r.archive.solutions.push_back({bits_from_string(e.at("assignment").get<std::string>()),
                                     e.at("objectives").get<std::vector<double>>()});
    r.trace = doc.value("trace", nlohmann::json::object());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed run record: ") + e.what());
  }
}

void validate_record(const RunRecord& record, const ProblemInstance& instance) {
  if (record.instance_hash != content_hash(instance))
    throw UsageError("run record was produced for a different instance");
  for (const auto& e : record.archive.solutions) {
    const auto ev = evaluate(instance, e.assignment);
    if (!ev.feasible) throw UsageError("run record holds an infeasible assignment");
    if (ev.objective_values != e.objectives)
      throw UsageError("run record objective vector does not match re-evaluation");
  }
}

// ---- runner ----

namespace {

nlohmann::json moqa_trace(const MoqaResult& r) {
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& t : r.traces)
    weights.push_back({{"weights", t.weights},
                       {"samples_drawn", t.samples_drawn},
                       {"distinct", t.distinct},
                       {"feasible", t.feasible}});
  return {{"total_samples", r.total_samples}, {"per_weight", weights}};
}

nlohmann::json cqha_trace(const CqhaResult& r) {
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& t : r.traces)
    weights.push_back({{"weights", t.weights},
                       {"sub_size", t.sub_size},
                       {"subqubo_count", t.subqubo_count},
                       {"subqubos_solved", t.solved_sizes.size()},
                       {"solved_sizes", t.solved_sizes},
                       {"accepted_per_pass", t.accepted_per_pass},
                       {"solved_per_pass", t.solved_per_pass},
                       {"energy_series", t.energy_series}});
  return {{"per_weight", weights}};
}

}  // namespace

RunRecord run_method(const std::string& method, const ProblemInstance& instance, const Config& cfg,
                     std::uint64_t seed) {
  RunRecord rec;
  rec.method = method;
  rec.label = method;
  rec.instance_name = instance.name;
  rec.instance_hash = content_hash(instance);
  for (const auto& o : instance.objectives) rec.objective_names.push_back(o.name);
  rec.config = cfg.values();
  rec.seed = seed;

  const auto t0 = std::chrono::steady_clock::now();
  if (method == "moqa") {
    const auto c = moqa_from(cfg, seed);
    auto r = moqa(instance, c);
    rec.archive = std::move(r.archive);
    rec.timings = r.timings;
    rec.trace = moqa_trace(r);
  } else if (method == "cqha") {
    const auto c = cqha_from(cfg, seed);
    auto r = cqha(instance, c);
    rec.archive = std::move(r.archive);
    rec.timings = r.timings;
    rec.trace = cqha_trace(r);
  } else if (method == "nsga2") {
    const auto c = nsga2_from(cfg, seed);
    auto r = nsga2(instance, c);
    rec.archive = std::move(r.archive);
    rec.trace = {{"evaluations", r.evaluations}, {"generations", r.generations}};
  } else if (method == "eps") {
    if (instance.objectives.size() != 2)
      throw UsageError("method 'eps' needs a bi-objective instance, this one has " +
                       std::to_string(instance.objectives.size()) + " objectives");
    rec.archive = epsilon_constraint(instance, epsilon_from(cfg));
  } else {
    throw UsageError("unknown method '" + method + "' (expected moqa, cqha, nsga2 or eps)");
  }
  rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (rec.archive.senses.empty()) rec.archive.senses = instance.senses();
  return rec;
}

// ---- report ----

ReportTable build_report(const std::vector<RunRecord>& records) {
  if (records.empty()) throw UsageError("report needs at least one run record");
  const auto& hash = records.front().instance_hash;
  for (const auto& r : records)
    if (r.instance_hash != hash)
      throw UsageError("run records reference different instances (" + hash + " vs " +
                       r.instance_hash + ")");
  std::vector<ParetoArchive> archives;
  for (const auto& r : records) archives.push_back(r.archive);
  ReportTable table;
  table.union_front = union_front(archives);

  std::vector<std::string> labels;
  for (const auto& r : records) {
    if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) labels.push_back(r.label);
  }
  std::sort(labels.begin(), labels.end());
  for (const auto& r : records)
    table.runs[r.label].push_back(indicator_report(r.label, r.wall_time_s, r.archive, table.union_front));

  for (const auto& label : labels) {
    auto& runs = table.runs[label];
    // Permutation invariance: order per-run rows by content.
    std::sort(runs.begin(), runs.end(), [](const IndicatorReport& a, const IndicatorReport& b) {
      return std::tie(a.count, a.nondominated_count, a.igd, a.hv, a.sp, a.time_s) <
             std::tie(b.count, b.nondominated_count, b.igd, b.hv, b.sp, b.time_s);
    });
    IndicatorReport mean;
    mean.method = label;
    auto avg = [&](auto field) -> std::optional<double> {
      double sum = 0.0;
      std::size_t k = 0;
      for (const auto& r : runs)
        if (auto v = field(r)) sum += *v, ++k;
      if (k == 0) return std::nullopt;
      return sum / static_cast<double>(k);
    };
    mean.time_s = *avg([](const IndicatorReport& r) { return std::optional<double>(r.time_s); });
    mean.count = *avg([](const IndicatorReport& r) { return std::optional<double>(r.count); });
    mean.nondominated_count =
        *avg([](const IndicatorReport& r) { return std::optional<double>(r.nondominated_count); });
    mean.igd = avg([](const IndicatorReport& r) { return r.igd; });
    mean.hv = avg([](const IndicatorReport& r) { return r.hv; });
    mean.sp = avg([](const IndicatorReport& r) { return r.sp; });
    table.rows.push_back(std::move(mean));
  }
  return table;
}

namespace {

std::string fmt(const std::optional<double>& v) {
  if (!v) return "NA";
  std::ostringstream os;
  os.precision(6);
  os << *v;
  return os.str();
}

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json row_json(const IndicatorReport& r) {
  return {{"method", r.method}, {"time_s", r.time_s}, {"S", r.count}, {"N_S", r.nondominated_count},
          {"IGD", opt_json(r.igd)}, {"HV", opt_json(r.hv)}, {"SP", opt_json(r.sp)}};
}

}  // namespace

std::string report_csv(const ReportTable& table) {
  std::ostringstream os;
  os << "method,time_s,S,N_S,IGD,HV,SP\n";
  for (const auto& r : table.rows)
    os << r.method << "," << fmt(r.time_s) << "," << fmt(r.count) << "," << fmt(r.nondominated_count)
       << "," << fmt(r.igd) << "," << fmt(r.hv) << "," << fmt(r.sp) << "\n";
  return os.str();
}

nlohmann::json report_json(const ReportTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    auto j = row_json(r);
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& x : table.runs.at(r.method)) runs.push_back(row_json(x));
    j["runs"] = std::move(runs);
    rows.push_back(std::move(j));
  }
  nlohmann::json front = nlohmann::json::array();
  for (const auto& e : table.union_front.solutions) front.push_back(e.objectives);
  return {{"rows", rows}, {"union_front", front}};
}

}  // namespace qsbse
