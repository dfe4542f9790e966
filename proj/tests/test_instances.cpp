#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "qsbse/instance.hpp"

using namespace qsbse;

TEST(ClassicNrp, ParsesSmallFile) {
  const auto inst = parse_classic_nrp("1\n2\n3 5\n1\n1 2\n1\n10 1 1\n");
  ASSERT_EQ(inst.size(), 3u);
  EXPECT_EQ(inst.objectives[0].coefficients, (std::vector<double>{3, 5, 0}));
  EXPECT_EQ(inst.objectives[0].sense, Sense::minimize);
  EXPECT_EQ(inst.objectives[1].coefficients, (std::vector<double>{0, 0, 10}));
  EXPECT_EQ(inst.objectives[1].sense, Sense::maximize);
  ASSERT_EQ(inst.constraints.size(), 2u);
  EXPECT_EQ(inst.constraints[0], Constraint(Implies{1, 0}));  // r2 requires r1
  EXPECT_EQ(inst.constraints[1], Constraint(Implies{2, 0}));  // customer wants r1
}

TEST(ClassicNrp, EmptySections) {
  const auto inst = parse_classic_nrp("1\n2\n3 5\n0\n0\n");
  EXPECT_EQ(inst.size(), 2u);
  EXPECT_EQ(inst.objectives[1].coefficients, (std::vector<double>{0, 0}));
  EXPECT_TRUE(inst.constraints.empty());
}

TEST(ClassicNrp, AcceptsCrlf) {
  const auto a = parse_classic_nrp("1\r\n2\r\n3 5\r\n0\r\n0\r\n");
  const auto b = parse_classic_nrp("1\n2\n3 5\n0\n0\n");
  EXPECT_EQ(a, b);
}

TEST(ClassicNrp, ErrorsNameLine) {
  try {
    parse_classic_nrp("1\n2\n3 x\n0\n0\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  try {
    parse_classic_nrp("1\n2\n3 5\n1\n1 9\n0\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
  EXPECT_THROW(parse_classic_nrp("1\n2\n3\n"), ParseError);
}

TEST(ClassicNrp, RoundTrip) {
  const auto inst = generate_nrp(20, 20, 0.2, 4);
  const auto text = serialize_classic_nrp(inst);
  auto back = parse_classic_nrp(text, inst.name);
  EXPECT_EQ(back, inst);
}

TEST(Dimacs, ParsesClause) {
  const auto inst = parse_dimacs_fm("c comment\np cnf 2 1\n1 -2 0\n",
                                    "feature,richness,reliability,defects,cost\nA,1,2,3,4\nB,5,6,7,8\n");
  ASSERT_EQ(inst.size(), 2u);
  ASSERT_EQ(inst.objectives.size(), 4u);
  ASSERT_EQ(inst.constraints.size(), 1u);
  EXPECT_EQ(inst.constraints[0], Constraint(Clause{{{0, true}, {1, false}}}));
  EXPECT_EQ(inst.objectives[3].coefficients, (std::vector<double>{4, 8}));
  EXPECT_EQ(inst.objectives[0].sense, Sense::maximize);
  EXPECT_EQ(inst.objectives[2].sense, Sense::minimize);
}

TEST(Dimacs, Errors) {
  const std::string attrs = "feature,richness,reliability,defects,cost\nA,1,2,3,4\nB,5,6,7,8\n";
  EXPECT_THROW(parse_dimacs_fm("p cnf 2 1\n0\n", attrs), ParseError);
  EXPECT_THROW(parse_dimacs_fm("p cnf 2 1\n1 3 0\n", attrs), ParseError);
  EXPECT_THROW(parse_dimacs_fm("p cnf 2 1\n1 2 0\n",
                               "feature,richness,reliability,defects,cost\nA,1,2,3,4\n"),
               ParseError);
  try {
    parse_dimacs_fm("p cnf 2 2\n1 0\n2 q 0\n", attrs);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Dimacs, FeasibilityMatchesSatOracle) {
  std::string cnf = "p cnf 10 5\n1 2 -3 0\n-4 5 0\n6 -7 8 0\n-1 -9 0\n10 3 0\n";
  std::string attrs = "feature,richness,reliability,defects,cost\n";
  for (int i = 0; i < 10; ++i) attrs += "f" + std::to_string(i) + ",1,1,1,5\n";
  const auto inst = parse_dimacs_fm(cnf, attrs);
  std::vector<std::vector<int>> clauses = {{1, 2, -3}, {-4, 5}, {6, -7, 8}, {-1, -9}, {10, 3}};
  for (std::uint64_t m = 0; m < 1024; ++m) {
    const auto x = oracle::bits_of(m, 10);
    bool sat = true;
    for (const auto& c : clauses) {
      bool any = false;
      for (int l : c) any |= (x[std::abs(l) - 1] == 1) == (l > 0);
      sat &= any;
    }
    ASSERT_EQ(evaluate(inst, x).feasible, sat) << m;
  }
}

TEST(Dimacs, SerializeRoundTrip) {
  const auto fm = generate_fm(15, 0.3, 2);
  const auto back = parse_dimacs_fm(serialize_dimacs(fm), serialize_attributes(fm), fm.name);
  ASSERT_EQ(back.size(), fm.size());
  EXPECT_EQ(back.objectives, fm.objectives);
  for (std::uint64_t m = 0; m < (1u << 15); m += 7) {
    const auto x = oracle::bits_of(m, 15);
    ASSERT_EQ(evaluate(back, x).feasible, evaluate(fm, x).feasible);
  }
}

TEST(GenerateNrp, Deterministic) {
  EXPECT_EQ(generate_nrp(5, 5, 0.2, 7), generate_nrp(5, 5, 0.2, 7));
  EXPECT_NE(generate_nrp(5, 5, 0.2, 7), generate_nrp(5, 5, 0.2, 8));
}

TEST(GenerateNrp, Minimal) {
  const auto inst = generate_nrp(1, 1, 0.0, 11);
  ASSERT_EQ(inst.constraints.size(), 1u);
  EXPECT_EQ(inst.constraints[0], Constraint(Implies{1, 0}));
}

TEST(GenerateNrp, RangesAndRequests) {
  const auto inst = generate_nrp(30, 30, 0.3, 1);
  for (std::size_t i = 0; i < 30; ++i) {
    const double c = inst.objectives[0].coefficients[i];
    EXPECT_TRUE(c >= 1 && c <= 10 && c == std::floor(c));
  }
  for (std::size_t k = 30; k < 60; ++k) {
    const double p = inst.objectives[1].coefficients[k];
    EXPECT_TRUE(p >= 1 && p <= 50 && p == std::floor(p));
    std::set<std::size_t> reqs;
    for (const auto& c : inst.constraints)
      if (auto* im = std::get_if<Implies>(&c); im && im->a == k) reqs.insert(im->b);
    EXPECT_EQ(reqs.size(), 1u + 9u);
  }
}

TEST(GenerateNrp, DependencyGraphAcyclic) {
  const auto inst = generate_nrp(30, 30, 0.3, 1);
  std::vector<std::vector<std::size_t>> out(30);
  std::vector<int> indeg(30, 0);
  for (const auto& c : inst.constraints)
    if (auto* im = std::get_if<Implies>(&c); im && im->a < 30) {
      out[im->b].push_back(im->a);
      ++indeg[im->a];
    }
  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < 30; ++i)
    if (!indeg[i]) queue.push_back(i);
  std::size_t seen = 0;
  while (!queue.empty()) {
    auto v = queue.back();
    queue.pop_back();
    ++seen;
    for (auto w : out[v])
      if (--indeg[w] == 0) queue.push_back(w);
  }
  EXPECT_EQ(seen, 30u);
}

TEST(GenerateFm, MinimalTree) {
  const auto fm = generate_fm(2, 0.0, 3);
  EXPECT_EQ(fm.size(), 2u);
  ASSERT_EQ(fm.objectives.size(), 4u);
  for (const auto& o : fm.objectives) EXPECT_EQ(o.coefficients.size(), 2u);
  EXPECT_FALSE(evaluate(fm, Bits{0, 0}).feasible);  // root is mandatory
}

TEST(GenerateFm, DeterministicAndFeasible) {
  EXPECT_EQ(generate_fm(12, 0.25, 9), generate_fm(12, 0.25, 9));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto fm = generate_fm(12, 0.25, seed);
    bool any = false;
    for (std::uint64_t m = 0; m < 4096 && !any; ++m) any = oracle::feasible(fm, oracle::bits_of(m, 12));
    EXPECT_TRUE(any) << seed;
  }
}

TEST(GenerateFm, AttributeRanges) {
  const auto fm = generate_fm(40, 0.1, 5);
  auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  for (std::size_t i = 0; i < 40; ++i) {
    EXPECT_TRUE(in(fm.objectives[0].coefficients[i], 1, 10));
    EXPECT_TRUE(in(fm.objectives[1].coefficients[i], 1, 10));
    EXPECT_TRUE(in(fm.objectives[2].coefficients[i], 0, 10));
    EXPECT_TRUE(in(fm.objectives[3].coefficients[i], 5, 15));
  }
}

TEST(Evaluate, ZeroAssignmentOnNrp) {
  const auto inst = generate_nrp(10, 8, 0.3, 2);
  const auto ev = evaluate(inst, Bits(inst.size(), 0));
  EXPECT_TRUE(ev.feasible);
  EXPECT_EQ(ev.objective_values, (std::vector<double>{0, 0}));
}

TEST(Evaluate, ToyAssignment) {
  const auto ev = evaluate(fixtures::toy4(), Bits{1, 0, 1, 0});
  EXPECT_TRUE(ev.feasible);
  EXPECT_EQ(ev.objective_values, (std::vector<double>{1, 3}));
}

TEST(Evaluate, ViolationCountsAndLength) {
  ProblemInstance inst = fixtures::random_biobjective(2, 1);
  inst.constraints = {Implies{0, 1}};
  const auto ev = evaluate(inst, Bits{1, 0});
  EXPECT_FALSE(ev.feasible);
  EXPECT_EQ(ev.total_violations(), 1u);
  EXPECT_EQ(ev.violations[0], 1u);
  EXPECT_THROW(evaluate(inst, Bits{1}), UsageError);
}

TEST(Evaluate, AgreesWithDirectCheck) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto fm = generate_fm(12, 0.3, seed);
    for (std::uint64_t m = 0; m < 4096; ++m) {
      const auto x = oracle::bits_of(m, 12);
      const auto ev = evaluate(fm, x);
      ASSERT_EQ(ev.feasible, oracle::feasible(fm, x));
      ASSERT_EQ(ev.objective_values, oracle::objectives(fm, x));
    }
  }
}

TEST(Evaluate, SingleFlipBoundedByCoefficient) {
  const auto inst = generate_nrp(12, 10, 0.2, 3);
  std::mt19937_64 g(1);
  for (int t = 0; t < 200; ++t) {
    Bits x(inst.size());
    for (auto& b : x) b = g() & 1;
    const auto i = g() % inst.size();
    auto y = x;
    y[i] ^= 1;
    const auto a = evaluate(inst, x).objective_values, b = evaluate(inst, y).objective_values;
    for (std::size_t m = 0; m < a.size(); ++m)
      EXPECT_EQ(std::abs(a[m] - b[m]), std::abs(inst.objectives[m].coefficients[i]));
  }
}

TEST(Validate, RejectsBrokenInstances) {
  auto inst = fixtures::toy4();
  inst.constraints.push_back(Implies{0, 9});
  EXPECT_THROW(inst.validate(), UsageError);
  inst = fixtures::toy4();
  inst.objectives.pop_back();
  EXPECT_THROW(inst.validate(), UsageError);
  inst = fixtures::toy4();
  inst.constraints.push_back(OrGroup{0, {}});
  EXPECT_THROW(inst.validate(), UsageError);
}

TEST(Json, RoundTripAndHash) {
  const auto fm = generate_fm(20, 0.2, 1);
  const auto back = instance_from_json(nlohmann::json::parse(to_json(fm).dump()));
  EXPECT_EQ(back, fm);
  EXPECT_EQ(content_hash(back), content_hash(fm));
  EXPECT_NE(content_hash(fm), content_hash(generate_fm(20, 0.2, 2)));
}

TEST(FindFeasible, AgreesWithBruteForce) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = fixtures::random_biobjective(8, seed, 14);
    bool any = false;
    for (std::uint64_t m = 0; m < 256 && !any; ++m) any = oracle::feasible(inst, oracle::bits_of(m, 8));
    const auto x = find_feasible(inst);
    EXPECT_EQ(x.has_value(), any);
    if (x) {
      EXPECT_TRUE(oracle::feasible(inst, *x));
    }
  }
}

TEST(LoadInstance, ByExtension) {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "qsbse_load_test";
  fs::create_directories(dir);
  const auto fm = generate_fm(6, 0.2, 1);
  std::ofstream(dir / "m.cnf") << serialize_dimacs(fm);
  std::ofstream(dir / "m.csv") << serialize_attributes(fm);
  std::ofstream(dir / "m.json") << to_json(fm).dump();
  std::ofstream(dir / "n.txt") << serialize_classic_nrp(fixtures::toy4());
  EXPECT_EQ(load_instance((dir / "m.cnf").string()).objectives, fm.objectives);
  EXPECT_EQ(load_instance((dir / "m.json").string()), fm);
  EXPECT_EQ(load_instance((dir / "n.txt").string()).size(), 4u);
  fs::remove_all(dir);
}
