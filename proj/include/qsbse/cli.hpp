#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qsbse/cqha.hpp"
#include "qsbse/baselines.hpp"
#include "qsbse/indicators.hpp"
#include "qsbse/moqa.hpp"

namespace qsbse {

/// Flat key-value configuration. Precedence: defaults < file < environment < flags.
class Config {
 public:
  /// Every recognised key with its default value.
  static const std::map<std::string, std::string>& defaults();

  Config() : values_(defaults()) {}

  /// Lines of `key = value`; '#' starts a comment.
  void load_file(const std::string& path);
  void load_text(const std::string& text, const std::string& origin = "config");
  /// QSBSE_ followed by the key upper-cased with '.' turned into '_'
  /// (e.g. QSBSE_SAMPLER_SWEEPS).
  void apply_environment();
  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::size_t get_count(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

SamplerSpec sampler_from(const Config& cfg);
QuboBuildConfig build_from(const Config& cfg);
MoqaConfig moqa_from(const Config& cfg, std::uint64_t seed);
CqhaConfig cqha_from(const Config& cfg, std::uint64_t seed);
Nsga2Config nsga2_from(const Config& cfg, std::uint64_t seed);
EpsilonConfig epsilon_from(const Config& cfg);

struct RunRecord {
  std::string method;
  std::string label;
  std::string instance_name;
  std::string instance_hash;
  std::vector<std::string> objective_names;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  std::size_t repeat = 0;
  double wall_time_s = 0.0;
  PhaseTimings timings;
  ParetoArchive archive;
  nlohmann::json trace = nlohmann::json::object();
};

nlohmann::json to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& doc);

/// Throws UsageError unless every archived assignment re-evaluates against
/// `instance` to its stored objective vector and the hashes agree.
void validate_record(const RunRecord& record, const ProblemInstance& instance);

/// One seeded run of `method` (moqa, cqha, nsga2, eps). Wall time covers
/// compile + solve + sort.
RunRecord run_method(const std::string& method, const ProblemInstance& instance,
                     const Config& cfg, std::uint64_t seed);

/// Union front across records, then per-label means.
struct ReportTable {
  ParetoArchive union_front;
  std::vector<IndicatorReport> rows;                          // averaged per label
  std::map<std::string, std::vector<IndicatorReport>> runs;  // per-run values
};

ReportTable build_report(const std::vector<RunRecord>& records);
std::string report_csv(const ReportTable& table);
nlohmann::json report_json(const ReportTable& table);

/// Entry point of the command-line tool. Returns 0, 1 (usage) or 2 (runtime).
int run_cli(int argc, const char* const* argv);

}  // namespace qsbse
