#include <gtest/gtest.h>

#include "ccut/dp.hpp"
#include "ccut/gen.hpp"
#include "ccut/oracle.hpp"
#include "support.hpp"

using namespace ccut;
using namespace ccut::testing;

namespace {

Instance single_block(std::initializer_list<std::pair<const char*, const char*>> blocks) {
  std::vector<Valuation> agents;
  for (const auto& [a, b] : blocks) agents.push_back(U(a, b));
  return inst_of(std::move(agents));
}

bool oracle_feasible(const Instance& inst, const Rational& eps, int m) {
  GridSearchConfig cfg;
  cfg.m = m;
  cfg.max_cuts = inst.cut_budget;
  return brute_force(inst, eps, cfg).has_value();
}

}  // namespace

TEST(InstanceStats, IntersectionAndMaxValue) {
  auto s = instance_stats(single_block({{"0", "1"}, {"0", "1/2"}, {"3/4", "1"}}));
  EXPECT_EQ(s.d, 2);
  EXPECT_EQ(s.M, 4);
  auto touching = instance_stats(single_block({{"0", "1/2"}, {"1/2", "1"}}));
  EXPECT_EQ(touching.d, 1);
  EXPECT_EQ(dp_grid_size(single_block({{"0", "1/2"}}), R("1/4")), 16);
}

TEST(RoundInstance, Examples) {
  auto inst = single_block({{"0.26", "0.74"}});
  auto r = round_instance_to_grid(inst, 10);
  EXPECT_EQ(r.agents[0].blocks()[0], (Block{R("3/10"), R("7/10"), R("5/2")}));
  // eps_prime form: M = 25/12, M / eps_prime = 10 at eps_prime = 5/24
  EXPECT_EQ(round_instance(inst, R("5/24")), r);

  auto on_grid = single_block({{"1/5", "3/5"}, {"0", "1"}});
  EXPECT_EQ(round_instance_to_grid(on_grid, 10), on_grid);

  // tie toward the smaller point: 1/4 lies halfway between 1/5 and 3/10
  auto tie = single_block({{"1/4", "1"}});
  EXPECT_EQ(round_instance_to_grid(tie, 10).agents[0].blocks()[0].left, R("1/5"));

  auto tiny = single_block({{"0.41", "0.44"}});
  EXPECT_THROW(round_instance_to_grid(tiny, 10), DomainError);
}

TEST(RoundInstance, GuaranteeOnOriginal) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto inst = random_single_block(2, 3, seed, 97);
    Rational eps_prime = R("1/4");
    auto rounded = round_instance(inst, eps_prime);
    GridSearchConfig cfg;
    cfg.m = 24;
    cfg.max_cuts = 2;
    for (const auto& s : brute_force_all(rounded, 0, cfg)) EXPECT_TRUE(verify(inst, s, eps_prime).satisfied);
  }
}

TEST(PartialBalance, Examples) {
  EXPECT_EQ(partial_balance(U("0", "1"), {R("1/2")}, 0, 0), 0);
  EXPECT_EQ(partial_balance(U("0", "1"), {}, R("1/2"), 0), R("1/2"));
  EXPECT_EQ(partial_balance(U("1/2", "1"), {R("3/4")}, R("1/2"), 1), 0);
  EXPECT_EQ(partial_balance(U("0", "1"), {R("1/4")}, 0, 1), R("1/2"));
}

TEST(DpSolve, DisjointHalves) {
  auto inst = single_block({{"0", "1/2"}, {"1/2", "1"}});
  auto res = dp_solve(inst, R("1/4"));
  ASSERT_TRUE(res.solution.has_value());
  EXPECT_EQ(res.solution->cuts, (std::vector<Rational>{R("1/4"), R("3/4")}));
  EXPECT_EQ(res.solution->labels, (std::vector<Label>{0, 1, 0}));
  auto rep = verify(inst, *res.solution, 0);
  EXPECT_TRUE(rep.satisfied);
  EXPECT_EQ(res.stats.m, 16);
  EXPECT_EQ(res.stats.d, 1);
  EXPECT_EQ(res.stats.M, 2);
  EXPECT_GT(res.stats.states_visited, 0);
}

TEST(DpSolve, OverlappingAgents) {
  auto inst = single_block({{"0", "1"}, {"0", "1/2"}});
  auto res = dp_solve(inst, R("1/4"));
  ASSERT_TRUE(res.solution.has_value());
  EXPECT_LE(res.solution->cuts.size(), 2u);
  EXPECT_TRUE(verify(inst, *res.solution, R("1/4")).satisfied);
  EXPECT_TRUE(oracle_feasible(inst, R("1/4"), res.stats.m));
}

TEST(DpSolve, MidpointAtEvenGrid) {
  auto inst = single_block({{"0", "1"}});
  auto res = dp_solve_grid(inst, 0, 4);
  ASSERT_TRUE(res.solution.has_value());
  EXPECT_EQ(res.solution->cuts, (std::vector<Rational>{R("1/2")}));
  EXPECT_FALSE(dp_solve_grid(inst, 0, 5).solution.has_value());
  EXPECT_THROW(dp_solve(inst, 0), DomainError);
}

TEST(DpSolve, OracleEquivalence) {
  int feasible = 0, infeasible = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    int n = 1 + static_cast<int>(seed % 3);
    int m = std::vector<int>{6, 8, 12, 24}[seed % 4];
    auto inst = random_single_block(n, 4, seed, 12);
    for (const char* e : {"0", "1/8", "1/4"}) {
      Rational eps = R(e);
      auto res = dp_solve_grid(inst, eps, m);
      bool oracle = oracle_feasible(inst, eps, m);
      EXPECT_EQ(res.solution.has_value(), oracle) << "seed " << seed << " eps " << e << " m " << m;
      if (res.solution) {
        ++feasible;
        EXPECT_TRUE(verify(inst, *res.solution, eps).satisfied);
        EXPECT_LE(static_cast<int>(res.solution->cuts.size()), inst.cut_budget);
      } else {
        ++infeasible;
      }
    }
  }
  EXPECT_GT(feasible, 0);
  EXPECT_GT(infeasible, 0);
}

TEST(DpSolve, LabelsAlternateAndCutsOnGrid) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto inst = random_single_block(3, 3, seed);
    auto res = dp_solve(inst, R("1/2"));
    ASSERT_TRUE(res.solution.has_value());
    const auto& s = *res.solution;
    for (std::size_t t = 1; t < s.labels.size(); ++t) EXPECT_NE(s.labels[t], s.labels[t - 1]);
    EXPECT_EQ(s.labels[0], 0);
    for (const auto& c : s.cuts) EXPECT_EQ(Rational(c * res.stats.m).get_den(), 1);
    EXPECT_TRUE(verify(inst, s, R("1/2")).satisfied);
  }
}

TEST(DpSolve, MemoSoundness) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto inst = random_single_block(3, 4, seed, 12);
    DpSolver solver(inst, R("1/4"), 12);
    solver.solve();
    ASSERT_GT(solver.states_visited(), 0);
    for (const auto& [key, entry] : solver.table()) {
      EXPECT_EQ(solver.recompute_from_children(key), entry);
      EXPECT_EQ(entry.feasible, entry.value <= R("1/4"));
      for (const auto& c : entry.witness) EXPECT_GT(c, R("1") * key.z / 12);
    }
  }
}

TEST(DpSolve, GuaranteeAtComputedGrid) {
  // a solution with cuts on the grid of size 2M/eps always exists
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto inst = random_single_block(2 + static_cast<int>(seed % 2), 3, seed);
    for (const char* e : {"1/2", "1/4"}) EXPECT_TRUE(dp_solve(inst, R(e)).solution.has_value()) << seed;
  }
}
