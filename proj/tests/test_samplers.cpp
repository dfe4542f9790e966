#include <gtest/gtest.h>

#include <thread>

#include "httplib.h"
#include "oracles.hpp"
#include "qsbse/sampler.hpp"

using namespace qsbse;

namespace {

SamplerSpec spec_of(SamplerKind kind, std::size_t reads, std::uint64_t seed = 0) {
  SamplerSpec s;
  s.kind = kind;
  s.reads = reads;
  s.seed = seed;
  return s;
}

void expect_consistent(const Qubo& q, const std::vector<Sample>& samples) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_EQ(samples[i].energy, q.energy(samples[i].assignment));
    if (i > 0) {
      EXPECT_LE(samples[i - 1].energy, samples[i].energy);
    }
  }
}

}  // namespace

TEST(SamplerSpec, Validate) {
  auto s = spec_of(SamplerKind::simulated_annealing, 0);
  EXPECT_THROW(s.validate(), UsageError);
  s.reads = 1;
  s.sweeps = 0;
  EXPECT_THROW(s.validate(), UsageError);
  s.sweeps = 10;
  s.beta_range = {{2.0, 1.0}};
  EXPECT_THROW(s.validate(), UsageError);
  EXPECT_EQ(sampler_kind_from("exact"), SamplerKind::exact);
  EXPECT_THROW(sampler_kind_from("qpu"), UsageError);
}

TEST(Exact, SingleVariable) {
  QuboBuilder b(1);
  b.add_linear(0, -1);
  const auto s = sample(b.build(), spec_of(SamplerKind::exact, 1));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].assignment, Bits{1});
  EXPECT_EQ(s[0].energy, -1.0);
}

TEST(Exact, FrustratedTriangle) {
  QuboBuilder b(3);
  b.add_quadratic(0, 1, 1);
  b.add_quadratic(0, 2, 1);
  b.add_quadratic(1, 2, 1);
  const auto s = sample(b.build(), spec_of(SamplerKind::exact, 8));
  EXPECT_EQ(s.front().energy, 0.0);
  EXPECT_EQ(s.size(), 8u);
}

TEST(Exact, MatchesEnumerationOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto q = oracle::random_qubo(4 + seed % 13, 0.4, seed);
    const auto s = exact_lowest(q, 5);
    EXPECT_NEAR(s.front().energy, oracle::min_energy(q), 1e-12);
    expect_consistent(q, s);
    // Exactly the five lowest, ties by assignment.
    std::vector<std::pair<double, Bits>> all;
    for (std::uint64_t m = 0; m < (1ULL << q.n_total()); ++m) {
      auto x = oracle::bits_of(m, q.n_total());
      all.push_back({q.energy(x), x});
    }
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s[i].assignment, all[i].second);
  }
}

TEST(Exact, SerialEqualsParallel) {
  const auto q = oracle::random_qubo(18, 0.3, 5);
  EXPECT_EQ(exact_lowest(q, 50, Exec::serial), exact_lowest(q, 50, Exec::parallel));
}

TEST(Exact, CapabilityLimit) {
  const auto q = oracle::random_qubo(kExactLimit + 1, 0.1, 5);
  EXPECT_THROW(sample(q, spec_of(SamplerKind::exact, 1)), CapabilityError);
}

TEST(Anneal, FindsGroundStateOnMostTrials) {
  int hits = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto q = oracle::random_qubo(16, 0.4, 1000 + t);
    auto spec = spec_of(SamplerKind::simulated_annealing, 200, t);
    const auto s = sample(q, spec);
    expect_consistent(q, s);
    if (std::abs(s.front().energy - exact_lowest(q, 1).front().energy) < 1e-9) ++hits;
  }
  EXPECT_GE(hits, 95);
}

TEST(Anneal, DeterministicAndExecIndependent) {
  const auto q = oracle::random_qubo(30, 0.2, 8);
  auto spec = spec_of(SamplerKind::simulated_annealing, 40, 11);
  spec.sweeps = 200;
  const auto a = sample(q, spec);
  EXPECT_EQ(a, sample(q, spec));
  spec.exec = Exec::parallel;
  EXPECT_EQ(a, sample(q, spec));
}

TEST(Anneal, OccurrencesSumToReads) {
  const auto q = oracle::random_qubo(6, 0.5, 2);
  const auto s = sample(q, spec_of(SamplerKind::simulated_annealing, 100, 1));
  std::size_t total = 0;
  std::set<Bits> distinct;
  for (const auto& x : s) total += x.occurrences, distinct.insert(x.assignment);
  EXPECT_EQ(total, 100u);
  EXPECT_EQ(distinct.size(), s.size());
}

TEST(Anneal, DefaultBetaRange) {
  QuboBuilder b(2);
  b.add_linear(0, -4);
  b.add_quadratic(0, 1, 0.5);
  const auto [lo, hi] = default_beta_range(b.build());
  EXPECT_DOUBLE_EQ(lo, 0.1 / 4);
  EXPECT_DOUBLE_EQ(hi, 10 / 0.5);
}

TEST(Descent, Examples) {
  QuboBuilder b(2);
  b.add_linear(0, 1);
  b.add_linear(1, 1);
  b.add_quadratic(0, 1, -3);
  const auto q = b.build();
  EXPECT_EQ(steepest_descent(q, {0, 0}).assignment, (Bits{0, 0}));
  const auto s = steepest_descent(q, {1, 0});
  EXPECT_EQ(s.assignment, (Bits{1, 1}));
  EXPECT_EQ(s.energy, -1.0);
}

TEST(Descent, FixedPointAtGroundState) {
  const auto q = oracle::random_qubo(10, 0.5, 3);
  const auto g = exact_lowest(q, 1).front();
  EXPECT_EQ(steepest_descent(q, g.assignment).assignment, g.assignment);
}

TEST(Descent, NoImprovingFlipRemains) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto q = oracle::random_qubo(20, 0.3, seed);
    auto s = sample(q, spec_of(SamplerKind::steepest_descent, 5, seed));
    for (const auto& x : s) {
      for (std::size_t i = 0; i < 20; ++i) {
        auto y = x.assignment;
        y[i] ^= 1;
        ASSERT_GE(q.energy(y), x.energy - 1e-12);
      }
    }
  }
}

TEST(Descent, LowestIndexWinsTies) {
  QuboBuilder b(3);
  b.add_linear(1, -1);
  b.add_linear(2, -1);
  b.add_quadratic(1, 2, 5);
  const auto s = steepest_descent(b.build(), {0, 0, 0});
  EXPECT_EQ(s.assignment, (Bits{0, 1, 0}));
}

// ---- remote ----

namespace {

class StubServer {
 public:
  explicit StubServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/sample", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/sample"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

Qubo small_qubo() {
  QuboBuilder b(3);
  b.add_offset(1.25);
  b.add_linear(0, -1);
  b.add_quadratic(1, 2, 2);
  return b.build();
}

}  // namespace

TEST(Remote, EchoAllZero) {
  std::size_t seen_reads = 0;
  StubServer srv([&](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    seen_reads = body.at("num_reads").get<std::size_t>();
    const auto n = body.at("n_total").get<std::size_t>();
    nlohmann::json reply{{"samples", {{{"assignment", std::vector<int>(n, 0)}, {"energy", 0.0}, {"occurrences", 1}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  auto spec = spec_of(SamplerKind::remote, 7);
  spec.endpoint = srv.url();
  const auto q = small_qubo();
  const auto s = sample(q, spec);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].energy, q.offset());
  EXPECT_EQ(seen_reads, 7u);
}

TEST(Remote, RecomputesMislabeledEnergy) {
  StubServer srv([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"samples":[{"assignment":[1,1,1],"energy":-99,"occurrences":2}]})", "application/json");
  });
  auto spec = spec_of(SamplerKind::remote, 3);
  spec.endpoint = srv.url();
  const auto q = small_qubo();
  const auto s = sample(q, spec);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].energy, q.energy(Bits{1, 1, 1}));
  EXPECT_EQ(s[0].occurrences, 2u);
}

TEST(Remote, ProtocolErrors) {
  const auto q = small_qubo();
  EXPECT_THROW(parse_remote_reply(q, R"({"samples":[{"assignment":[1,1],"energy":0}]})", 1), ProtocolError);
  EXPECT_THROW(parse_remote_reply(q, R"({"samples":[{"assignment":[1,2,0],"energy":0}]})", 1), ProtocolError);
  EXPECT_THROW(parse_remote_reply(q, R"({"result":[]})", 1), ProtocolError);
  EXPECT_THROW(parse_remote_reply(q, "not json", 1), ProtocolError);
  StubServer srv([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"samples":[{"assignment":[0,1],"energy":0,"occurrences":1}]})", "application/json");
  });
  auto spec = spec_of(SamplerKind::remote, 1);
  spec.endpoint = srv.url();
  EXPECT_THROW(sample(q, spec), ProtocolError);
}

TEST(Remote, TransportErrors) {
  StubServer srv([&](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  auto spec = spec_of(SamplerKind::remote, 1);
  spec.endpoint = srv.url();
  EXPECT_THROW(sample(small_qubo(), spec), TransportError);
  spec.endpoint = "http://127.0.0.1:1/sample";
  spec.timeout_ms = 500;
  EXPECT_THROW(sample(small_qubo(), spec), TransportError);
}
