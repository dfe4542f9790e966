#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "qsbse/cli.hpp"

using namespace qsbse;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("qsbse_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "qsbse");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    testing::internal::CaptureStdout();
    testing::internal::CaptureStderr();
    const int rc = run_cli(static_cast<int>(argv.size()), argv.data());
    out_ = testing::internal::GetCapturedStdout();
    err_ = testing::internal::GetCapturedStderr();
    return rc;
  }

  std::string slurp(const std::string& p) const {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void write(const std::string& p, const std::string& content) const { std::ofstream(p) << content; }

  RunRecord record(const std::string& p) const { return run_record_from_json(nlohmann::json::parse(slurp(p))); }

  fs::path dir_;
  std::string out_, err_;
};

std::set<oracle::Point> points_of(const ParetoArchive& a) {
  std::set<oracle::Point> s;
  for (const auto& e : a.solutions) s.insert(e.objectives);
  return s;
}

}  // namespace

TEST_F(CliTest, GenNrpParsesAndIsDeterministic) {
  ASSERT_EQ(run({"gen", "nrp", "20", "20", "0.2", "--seed", "1", "--out", path("a.nrp")}), 0);
  const auto hash = out_;
  ASSERT_EQ(run({"gen", "nrp", "20", "20", "0.2", "--seed", "1", "--out", path("b.nrp")}), 0);
  EXPECT_EQ(out_, hash);
  EXPECT_EQ(slurp(path("a.nrp")), slurp(path("b.nrp")));
  const auto inst = parse_classic_nrp(slurp(path("a.nrp")), "nrp-20x20-s1");
  EXPECT_EQ(inst.size(), 40u);
  EXPECT_EQ(content_hash(inst) + "\n", hash);
}

TEST_F(CliTest, GenFspHasFeasibleAssignment) {
  ASSERT_EQ(run({"gen", "fsp", "12", "0.25", "--seed", "9", "--out", path("m.cnf")}), 0);
  EXPECT_TRUE(fs::exists(path("m.csv")));
  const auto fm = load_instance(path("m.cnf"));
  EXPECT_EQ(out_, content_hash(fm) + "\n");
  bool any = false;
  for (std::uint64_t m = 0; m < 4096 && !any; ++m) any = oracle::feasible(fm, oracle::bits_of(m, 12));
  EXPECT_TRUE(any);
  ASSERT_EQ(run({"gen", "fsp", "12", "0.25", "--seed", "9", "--out", path("m.json")}), 0);
  EXPECT_EQ(load_instance(path("m.json")).objectives, fm.objectives);
}

TEST_F(CliTest, GenUnwritablePathIsRuntimeError) {
  EXPECT_EQ(run({"gen", "nrp", "5", "5", "0.2", "--out", path("missing/dir/a.nrp")}), 2);
  EXPECT_FALSE(fs::exists(path("missing")));
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}), 1);
  EXPECT_EQ(run({"gen", "nrp", "5"}), 1);
  EXPECT_EQ(run({"frobnicate"}), 1);
  write(path("toy.json"), to_json(fixtures::toy4()).dump());
  EXPECT_EQ(run({"solve", "annealing", path("toy.json"), "--out", path("")}), 1);
  EXPECT_EQ(run({"solve", "moqa", path("toy.json"), "--set", "sampler.colour=red", "--out", path("")}), 1);
  EXPECT_EQ(run({"solve", "moqa", path("toy.json"), "--reads", "many", "--out", path("")}), 1);
  EXPECT_EQ(run({"solve", "moqa", path("nothing.json"), "--out", path("")}), 2);
  EXPECT_EQ(run({"--help"}), 0);
}

TEST_F(CliTest, SolveMoqaRepeatsWithExactSampler) {
  write(path("toy.json"), to_json(fixtures::toy4()).dump());
  ASSERT_EQ(run({"solve", "moqa", path("toy.json"), "--weights", "10", "--reads", "4", "--sampler", "exact",
                 "--repeats", "2", "--seed", "3", "--out", dir_.string()}),
            0)
      << err_;
  const auto a = record(path("moqa-0.json")), b = record(path("moqa-1.json"));
  EXPECT_EQ(a.seed, 3u);
  EXPECT_EQ(b.seed, 4u);
  EXPECT_EQ(a.archive, b.archive);
  EXPECT_EQ(points_of(a.archive), oracle::brute_force_front(fixtures::toy4()).points);
  EXPECT_NO_THROW(validate_record(a, fixtures::toy4()));
  EXPECT_EQ(a.config.at("sampler.kind"), "exact");
  const auto agg = nlohmann::json::parse(slurp(path("moqa-aggregate.json")));
  EXPECT_EQ(agg.at("repeats"), 2);
  EXPECT_EQ(agg.at("rows").size(), 1u);
  EXPECT_EQ(agg.at("rows")[0].at("runs").size(), 2u);
}

TEST_F(CliTest, SolveJobsMatchesSerial) {
  write(path("inst.json"), to_json(generate_nrp(12, 8, 0.2, 2)).dump());
  fs::create_directories(path("s"));
  fs::create_directories(path("p"));
  ASSERT_EQ(run({"solve", "nsga2", path("inst.json"), "--pop", "20", "--evals", "400", "--repeats", "3",
                 "--out", path("s")}),
            0);
  ASSERT_EQ(run({"solve", "nsga2", path("inst.json"), "--pop", "20", "--evals", "400", "--repeats", "3",
                 "--jobs", "3", "--out", path("p")}),
            0);
  for (int i = 0; i < 3; ++i) {
    const auto name = "nsga2-" + std::to_string(i) + ".json";
    EXPECT_EQ(record(path("s/" + name)).archive, record(path("p/" + name)).archive);
  }
}

TEST_F(CliTest, SolveEpsOnFourObjectivesIsUsageError) {
  ASSERT_EQ(run({"gen", "fsp", "10", "0.2", "--seed", "1", "--out", path("m.json")}), 0);
  EXPECT_EQ(run({"solve", "eps", path("m.json"), "--out", dir_.string()}), 1);
  EXPECT_NE(err_.find("bi-objective"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("eps-0.json")));
}

TEST_F(CliTest, SolveCqhaRateTrace) {
  write(path("inst.json"), to_json(generate_nrp(20, 10, 0.2, 1)).dump());
  ASSERT_EQ(run({"solve", "cqha", path("inst.json"), "--rate", "0.3", "--sub-size", "3", "--weights", "2",
                 "--reads", "5", "--loops", "1", "--sweeps", "50", "--out", dir_.string()}),
            0);
  const auto rec = record(path("cqha-0.json"));
  for (const auto& w : rec.trace.at("per_weight")) {
    const auto count = w.at("subqubo_count").get<std::size_t>();
    EXPECT_EQ(w.at("subqubos_solved").get<std::size_t>(),
              static_cast<std::size_t>(std::ceil(count * 0.3 - 1e-9)));
  }
}

TEST_F(CliTest, ConfigPrecedence) {
  write(path("run.cfg"), "# comment\nsampler.sweeps = 77\nreads = 9\nweights=3\n");
  write(path("toy.json"), to_json(fixtures::toy4()).dump());
  ::setenv("QSBSE_READS", "11", 1);
  const int rc = run({"solve", "moqa", path("toy.json"), "--config", path("run.cfg"), "--weights", "2",
                      "--out", dir_.string()});
  ::unsetenv("QSBSE_READS");
  ASSERT_EQ(rc, 0) << err_;
  const auto rec = record(path("moqa-0.json"));
  EXPECT_EQ(rec.config.at("sampler.sweeps"), "77");
  EXPECT_EQ(rec.config.at("reads"), "11");
  EXPECT_EQ(rec.config.at("weights"), "2");
  EXPECT_EQ(rec.trace.at("per_weight").size(), 2u);

  Config cfg;
  EXPECT_THROW(cfg.load_text("nonsense line\n"), UsageError);
  EXPECT_THROW(cfg.load_text("unknown.key = 3\n"), UsageError);
}

TEST_F(CliTest, ReportSelfAndDominated) {
  const auto inst = fixtures::toy4();
  RunRecord good, bad;
  good.method = good.label = "good";
  bad.method = bad.label = "bad";
  for (auto* r : {&good, &bad}) {
    r->instance_hash = content_hash(inst);
    r->instance_name = inst.name;
    r->archive.senses = inst.senses();
  }
  good.archive.solutions = {{{1, 0, 1, 0}, {1, 3}}, {{1, 1, 1, 1}, {3, 7}}};
  bad.archive.solutions = {{{1, 1, 0, 1}, {3, 4}}};
  write(path("good.json"), to_json(good).dump());
  write(path("bad.json"), to_json(bad).dump());

  ASSERT_EQ(run({"report", path("good.json"), "--out", path("self")}), 0) << err_;
  const auto self = nlohmann::json::parse(slurp(path("self.json")));
  EXPECT_EQ(self["rows"][0]["S"], self["rows"][0]["N_S"]);
  EXPECT_EQ(self["rows"][0]["IGD"], 0.0);

  ASSERT_EQ(run({"report", path("good.json"), path("bad.json"), "--out", path("both"), "--instance",
                 path("toy.json")}),
            2);  // instance file missing
  write(path("toy.json"), to_json(inst).dump());
  ASSERT_EQ(run({"report", path("good.json"), path("bad.json"), "--out", path("both"), "--instance",
                 path("toy.json")}),
            0)
      << err_;
  const auto csv = slurp(path("both.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,time_s,S,N_S,IGD,HV,SP");
  EXPECT_NE(csv.find("\nbad,0,1,0,"), std::string::npos) << csv;
  EXPECT_NE(csv.find(",NA\n"), std::string::npos);  // spacing of a single point
}

TEST_F(CliTest, ReportRejectsMixedInstances) {
  RunRecord a, b;
  a.method = a.label = "a";
  b.method = b.label = "b";
  a.instance_hash = "0000000000000001";
  b.instance_hash = "0000000000000002";
  a.archive.senses = b.archive.senses = {Sense::minimize, Sense::minimize};
  write(path("a.json"), to_json(a).dump());
  write(path("b.json"), to_json(b).dump());
  EXPECT_EQ(run({"report", path("a.json"), path("b.json"), "--out", path("r")}), 2);
  EXPECT_FALSE(fs::exists(path("r.csv")));
}

TEST_F(CliTest, ReportEpsIsExactAndPermutationInvariant) {
  const auto inst = fixtures::random_biobjective(14, 5, 6);
  write(path("inst.json"), to_json(inst).dump());
  ASSERT_EQ(run({"solve", "eps", path("inst.json"), "--out", dir_.string()}), 0) << err_;
  ASSERT_EQ(run({"solve", "moqa", path("inst.json"), "--reads", "20", "--sweeps", "100", "--out",
                 dir_.string()}),
            0);
  ASSERT_EQ(run({"report", path("eps-0.json"), path("moqa-0.json"), "--out", path("r1")}), 0);
  ASSERT_EQ(run({"report", path("moqa-0.json"), path("eps-0.json"), "--out", path("r2")}), 0);
  EXPECT_EQ(slurp(path("r1.json")), slurp(path("r2.json")));
  const auto rep = nlohmann::json::parse(slurp(path("r1.json")));
  const auto truth = oracle::brute_force_front(inst).points;
  for (const auto& row : rep["rows"])
    if (row["method"] == "eps") {
      EXPECT_EQ(row["IGD"], 0.0);
      EXPECT_EQ(row["N_S"].get<double>(), static_cast<double>(truth.size()));
    }
  // Directory input skips aggregates.
  ASSERT_EQ(run({"report", dir_.string(), "--out", path("r3")}), 0) << err_;
  EXPECT_EQ(nlohmann::json::parse(slurp(path("r3.json")))["union_front"], rep["union_front"]);
}

TEST_F(CliTest, BenchSubSizes) {
  const auto inst = fixtures::random_biobjective(12, 8, 5);
  write(path("inst.json"), to_json(inst).dump());
  fs::create_directories(path("rec"));
  ASSERT_EQ(run({"bench", "cqha", path("inst.json"), "--sub-sizes", "6,12", "--sampler", "exact", "--reads",
                 "64", "--weights", "20", "--out", path("b.csv"), "--records", path("rec")}),
            0)
      << err_;
  const auto csv = slurp(path("b.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  ASSERT_EQ(run({"bench", "cqha", path("inst.json"), "--sub-sizes", "6", "--sampler", "exact", "--out",
                 path("one.csv")}),
            0);
  const auto one = slurp(path("one.csv"));
  EXPECT_EQ(std::count(one.begin(), one.end(), '\n'), 2);
  for (const auto* name : {"cqha-sub_size-6-0.json", "cqha-sub_size-12-0.json"}) {
    const auto rec = record(path(std::string("rec/") + name));
    EXPECT_NO_THROW(validate_record(rec, inst));
    for (const auto& e : rec.archive.solutions) {
      EXPECT_TRUE(oracle::feasible(inst, e.assignment));
      for (const auto& f : rec.archive.solutions)
        EXPECT_FALSE(oracle::dominates(f.objectives, e.objectives, inst.senses()));
    }
  }
  EXPECT_EQ(run({"bench", "moqa", path("inst.json"), "--sub-sizes", "6"}), 1);
}

TEST_F(CliTest, BenchNrpSizes) {
  ASSERT_EQ(run({"bench", "nsga2", "--nrp-sizes", "10x5,20x10", "--pop", "10", "--evals", "100"}), 0) << err_;
  EXPECT_EQ(std::count(out_.begin(), out_.end(), '\n'), 3);
  EXPECT_NE(out_.find("nrp_size,20x10,30,"), std::string::npos);
}

TEST(RunRecordJson, RoundTrip) {
  Config cfg;
  cfg.set("reads", "8");
  cfg.set("sampler.sweeps", "100");
  cfg.set("weights", "3");
  const auto inst = generate_nrp(8, 6, 0.2, 1);
  const auto rec = run_method("moqa", inst, cfg, 4);
  const auto back = run_record_from_json(nlohmann::json::parse(to_json(rec).dump()));
  EXPECT_EQ(back.archive, rec.archive);
  EXPECT_EQ(back.config, rec.config);
  EXPECT_EQ(back.instance_hash, content_hash(inst));
  EXPECT_NO_THROW(validate_record(back, inst));
  auto tampered = back;
  tampered.archive.solutions.front().objectives[0] += 1;
  EXPECT_THROW(validate_record(tampered, inst), UsageError);
  EXPECT_THROW(validate_record(back, generate_nrp(8, 6, 0.2, 2)), UsageError);
  EXPECT_THROW(run_record_from_json(nlohmann::json{{"schema", "other"}}), ParseError);
}
