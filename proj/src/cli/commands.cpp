#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "qsbse/cli.hpp"

namespace qsbse {

namespace fs = std::filesystem;

namespace {

// Writes through a sibling temporary so a failed run never leaves a partial file.
void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path() && !fs::exists(path.parent_path()))
    throw std::runtime_error("directory '" + path.parent_path().string() + "' does not exist");
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("cannot write '" + path.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot write '" + path.string() + "': " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

struct SolveFlags {
  std::string method, instance_path, attributes, config_file, label, out_dir = ".";
  std::vector<std::string> sets;
  std::map<std::string, std::string> overrides;
  std::uint64_t seed = 0;
  std::size_t repeats = 1, jobs = 1;
};

// Registers an option that overrides configuration key `key`.
void override_option(CLI::App* app, SolveFlags& f, const std::string& flag, const std::string& key,
                     const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&f, key](const std::string& v) { f.overrides[key] = v; }, help);
}

void add_config_options(CLI::App* app, SolveFlags& f) {
  override_option(app, f, "--weights", "weights", "number of weight vectors");
  override_option(app, f, "--reads", "reads", "samples per (sub-)QUBO");
  override_option(app, f, "--sampler", "sampler.kind", "sa, exact, sd or remote");
  override_option(app, f, "--sweeps", "sampler.sweeps", "annealing sweeps per read");
  override_option(app, f, "--sub-size", "cqha.sub_size", "sub-QUBO size s");
  override_option(app, f, "--rate", "cqha.rate", "fraction of sub-QUBOs solved per pass");
  override_option(app, f, "--loops", "cqha.loops", "maximum CQHA passes");
  override_option(app, f, "--strategy", "cqha.strategy", "energy impact: total or linear");
  override_option(app, f, "--pop", "nsga2.population", "NSGA-II population size");
  override_option(app, f, "--evals", "nsga2.evaluations", "NSGA-II evaluation budget");
  override_option(app, f, "--pc", "nsga2.crossover_probability", "crossover probability");
  override_option(app, f, "--pm", "nsga2.mutation_probability", "mutation probability");
  override_option(app, f, "--step", "eps.step", "epsilon step");
  override_option(app, f, "--endpoint", "remote.endpoint", "remote sampler URL");
  override_option(app, f, "--time-budget", "run.time_budget_s", "time budget in seconds");
  override_option(app, f, "--exec", "run.exec", "serial or parallel kernels");
  app->add_option("--config", f.config_file, "key = value configuration file");
  app->add_option("--set", f.sets, "override as key=value (repeatable)");
  app->add_option("--seed", f.seed, "base seed");
  app->add_option("--attributes", f.attributes, "attribute CSV for a DIMACS instance");
}

Config resolve_config(const SolveFlags& f) {
  Config cfg;
  if (!f.config_file.empty()) cfg.load_file(f.config_file);
  cfg.apply_environment();
  for (const auto& [k, v] : f.overrides) cfg.set(k, v);
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

std::vector<RunRecord> run_repeats(const std::string& method, const ProblemInstance& instance,
                                   const Config& cfg, std::uint64_t seed, std::size_t repeats,
                                   std::size_t jobs) {
  std::vector<RunRecord> records(repeats);
  std::vector<std::exception_ptr> errors(repeats);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < repeats;) {
      try {
        records[i] = run_method(method, instance, cfg, seed + i);
        records[i].repeat = i;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(jobs, repeats); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return records;
}

nlohmann::json aggregate(const std::vector<RunRecord>& records) {
  const auto table = build_report(records);
  auto doc = report_json(table);
  doc["schema"] = "qsbse.aggregate/1";
  doc["method"] = records.front().method;
  doc["instance"] = {{"name", records.front().instance_name}, {"hash", records.front().instance_hash}};
  doc["repeats"] = records.size();
  double wall = 0.0;
  for (const auto& r : records) wall += r.wall_time_s;
  doc["mean_wall_time_s"] = wall / static_cast<double>(records.size());
  return doc;
}

int cmd_solve(SolveFlags& f) {
  if (f.repeats == 0) throw UsageError("--repeats must be at least 1");
  if (f.jobs == 0) throw UsageError("--jobs must be at least 1");
  const Config cfg = resolve_config(f);
  const auto instance = load_instance(f.instance_path, f.attributes);
  if (f.method == "eps" && instance.objectives.size() != 2)
    throw UsageError("method 'eps' needs a bi-objective instance, '" + instance.name + "' has " +
                     std::to_string(instance.objectives.size()) + " objectives");
  auto records = run_repeats(f.method, instance, cfg, f.seed, f.repeats, f.jobs);
  const std::string label = f.label.empty() ? f.method : f.label;
  const fs::path dir(f.out_dir);
  if (!fs::is_directory(dir)) throw std::runtime_error("output directory '" + f.out_dir + "' does not exist");
  for (auto& r : records) {
    r.label = label;
    const auto path = dir / (label + "-" + std::to_string(r.repeat) + ".json");
    write_atomic(path, to_json(r).dump(2) + "\n");
    std::cout << path.string() << "\n";
  }
  const auto agg = dir / (label + "-aggregate.json");
  write_atomic(agg, aggregate(records).dump(2) + "\n");
  std::cout << agg.string() << "\n";
  return 0;
}

int cmd_gen_nrp(std::size_t r, std::size_t c, double density, std::uint64_t seed, const std::string& out) {
  const auto inst = generate_nrp(r, c, density, seed);
  const bool json = fs::path(out).extension() == ".json";
  write_atomic(out, json ? to_json(inst).dump(2) + "\n" : serialize_classic_nrp(inst));
  std::cout << content_hash(load_instance(out)) << "\n";
  return 0;
}

int cmd_gen_fsp(std::size_t n, double ratio, std::uint64_t seed, const std::string& out) {
  const auto inst = generate_fm(n, ratio, seed);
  const fs::path p(out);
  const auto ext = p.extension();
  if (ext == ".cnf" || ext == ".dimacs") {
    auto csv = p;
    csv.replace_extension(".csv");
    write_atomic(p, serialize_dimacs(inst));
    write_atomic(csv, serialize_attributes(inst));
  } else {
    write_atomic(p, to_json(inst).dump(2) + "\n");
  }
  // Hash of the file as it loads back; DIMACS re-expresses constraints as clauses.
  std::cout << content_hash(load_instance(out)) << "\n";
  return 0;
}

// Paired with whether the file came from a directory listing.
std::vector<std::pair<std::string, bool>> expand_records(const std::vector<std::string>& inputs) {
  std::vector<std::pair<std::string, bool>> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(in)) {
        const auto name = e.path().filename().string();
        if (e.path().extension() == ".json" && name.find("-aggregate") == std::string::npos)
          found.push_back(e.path().string());
      }
      std::sort(found.begin(), found.end());
      for (auto& f : found) files.emplace_back(std::move(f), true);
    } else {
      files.emplace_back(in, false);
    }
  }
  return files;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out_prefix,
               const std::string& instance_path, const std::string& attributes) {
  std::vector<RunRecord> records;
  for (const auto& [path, listed] : expand_records(inputs)) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
      if (listed) continue;
      throw ParseError(path + ": " + e.what());
    }
    // Directories may also hold instances and reports.
    if (listed && !(doc.is_object() && doc.value("schema", "") == "qsbse.run/1")) continue;
    records.push_back(run_record_from_json(doc));
  }
  if (records.empty()) throw UsageError("no run records given");
  const auto& hash = records.front().instance_hash;
  for (const auto& r : records)
    if (r.instance_hash != hash)
      throw std::runtime_error("run records reference different instances (" + hash + " vs " +
                               r.instance_hash + ")");
  if (!instance_path.empty()) {
    const auto inst = load_instance(instance_path, attributes);
    for (const auto& r : records) validate_record(r, inst);
  }
  const auto table = build_report(records);
  const auto csv = report_csv(table);
  write_atomic(out_prefix + ".csv", csv);
  write_atomic(out_prefix + ".json", report_json(table).dump(2) + "\n");
  std::cout << csv;
  return 0;
}

struct BenchFlags {
  SolveFlags solve;
  std::string sub_sizes, rates, nrp_sizes, records_dir;
  double density = 0.3;
  std::string out;
};

int cmd_bench(BenchFlags& b) {
  auto& f = b.solve;
  const int swept = !b.sub_sizes.empty() + !b.rates.empty() + !b.nrp_sizes.empty();
  if (swept != 1) throw UsageError("give exactly one of --sub-sizes, --rates, --nrp-sizes");
  Config base = resolve_config(f);

  struct Case {
    std::string parameter, value;
    Config cfg;
    std::optional<ProblemInstance> instance;
  };
  std::vector<Case> cases;
  if (!b.nrp_sizes.empty()) {
    for (const auto& v : split(b.nrp_sizes, ',')) {
      const auto x = v.find('x');
      if (x == std::string::npos) throw UsageError("--nrp-sizes entries look like 40x30, got '" + v + "'");
      std::size_t r = 0, c = 0;
      try {
        r = std::stoul(v.substr(0, x));
        c = std::stoul(v.substr(x + 1));
      } catch (const std::exception&) {
        throw UsageError("bad --nrp-sizes entry '" + v + "'");
      }
      cases.push_back({"nrp_size", v, base, generate_nrp(r, c, b.density, f.seed)});
    }
  } else {
    if (f.method != "cqha") throw UsageError("--sub-sizes and --rates sweep CQHA parameters only");
    const bool sizes = !b.sub_sizes.empty();
    for (const auto& v : split(sizes ? b.sub_sizes : b.rates, ',')) {
      Config c = base;
      c.set(sizes ? "cqha.sub_size" : "cqha.rate", v);
      cases.push_back({sizes ? "sub_size" : "rate", v, c, std::nullopt});
    }
  }
  if (cases.empty()) throw UsageError("empty sweep");
  std::optional<ProblemInstance> shared;
  if (!b.nrp_sizes.empty()) {
    if (!f.instance_path.empty()) throw UsageError("--nrp-sizes generates its own instances");
  } else {
    if (f.instance_path.empty()) throw UsageError("bench needs an instance");
    shared = load_instance(f.instance_path, f.attributes);
  }

  std::ostringstream csv;
  csv << "parameter,value,variables,repeat,time_s,compile_s,decompose_s,sample_s,local_search_s,sort_s,archive_size\n";
  for (auto& c : cases) {
    const auto& inst = c.instance ? *c.instance : *shared;
    auto records = run_repeats(f.method, inst, c.cfg, f.seed, f.repeats, f.jobs);
    for (auto& r : records) {
      const auto& t = r.timings;
      csv << c.parameter << "," << c.value << "," << inst.size() << "," << r.repeat << "," << r.wall_time_s
          << "," << t.compile_s << "," << t.decompose_s << "," << t.sample_s << "," << t.local_search_s
          << "," << t.sort_s << "," << r.archive.size() << "\n";
      if (!b.records_dir.empty()) {
        r.label = f.method + "-" + c.parameter + "-" + c.value;
        write_atomic(fs::path(b.records_dir) / (r.label + "-" + std::to_string(r.repeat) + ".json"),
                     to_json(r).dump(2) + "\n");
      }
    }
  }
  if (b.out.empty())
    std::cout << csv.str();
  else
    write_atomic(b.out, csv.str());
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Multi-objective QUBO solvers for software engineering selection problems", "qsbse"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "generate a synthetic instance");
  gen->require_subcommand(1);
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  std::size_t nrp_r = 0, nrp_c = 0, fsp_n = 0;
  double nrp_density = 0.0, fsp_ratio = 0.0;
  auto* gen_nrp = gen->add_subcommand("nrp", "next release problem (classic text format, or .json)");
  gen_nrp->add_option("requirements", nrp_r)->required();
  gen_nrp->add_option("customers", nrp_c)->required();
  gen_nrp->add_option("density", nrp_density)->required();
  gen_nrp->add_option("--seed", gen_seed);
  gen_nrp->add_option("--out", gen_out)->required();
  auto* gen_fsp = gen->add_subcommand("fsp", "feature model (.json, or .cnf plus sibling .csv)");
  gen_fsp->add_option("features", fsp_n)->required();
  gen_fsp->add_option("ratio", fsp_ratio, "cross-tree constraints per feature")->required();
  gen_fsp->add_option("--seed", gen_seed);
  gen_fsp->add_option("--out", gen_out)->required();

  SolveFlags sf;
  auto* solve = app.add_subcommand("solve", "run a method on an instance");
  solve->add_option("method", sf.method, "moqa, cqha, nsga2 or eps")->required();
  solve->add_option("instance", sf.instance_path)->required();
  add_config_options(solve, sf);
  solve->add_option("--repeats", sf.repeats, "independent runs; repeat i uses seed + i");
  solve->add_option("--jobs", sf.jobs, "repeats run concurrently");
  solve->add_option("--label", sf.label, "method label used in reports and file names");
  solve->add_option("--out", sf.out_dir, "output directory");

  std::vector<std::string> report_inputs;
  std::string report_out, report_instance, report_attributes;
  auto* report = app.add_subcommand("report", "indicator table over run records");
  report->add_option("records", report_inputs, "record files or directories")->required();
  report->add_option("--out", report_out, "output prefix; writes PREFIX.csv and PREFIX.json")->required();
  report->add_option("--instance", report_instance, "re-validate records against this instance");
  report->add_option("--attributes", report_attributes);

  BenchFlags bf;
  auto* bench = app.add_subcommand("bench", "timing sweep");
  bench->add_option("method", bf.solve.method)->required();
  bench->add_option("instance", bf.solve.instance_path);
  add_config_options(bench, bf.solve);
  bench->add_option("--sub-sizes", bf.sub_sizes, "comma-separated CQHA sub-QUBO sizes");
  bench->add_option("--rates", bf.rates, "comma-separated CQHA rates");
  bench->add_option("--nrp-sizes", bf.nrp_sizes, "comma-separated RxC generated NRP sizes");
  bench->add_option("--density", bf.density, "density for generated NRP instances");
  bench->add_option("--repeats", bf.solve.repeats);
  bench->add_option("--jobs", bf.solve.jobs);
  bench->add_option("--records", bf.records_dir, "also write run records here");
  bench->add_option("--out", bf.out, "CSV path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (gen_nrp->parsed()) return cmd_gen_nrp(nrp_r, nrp_c, nrp_density, gen_seed, gen_out);
    if (gen_fsp->parsed()) return cmd_gen_fsp(fsp_n, fsp_ratio, gen_seed, gen_out);
    if (solve->parsed()) return cmd_solve(sf);
    if (report->parsed()) return cmd_report(report_inputs, report_out, report_instance, report_attributes);
    if (bench->parsed()) return cmd_bench(bf);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace qsbse
