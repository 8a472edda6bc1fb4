#include <gtest/gtest.h>

#include "ccut/gen.hpp"
#include "ccut/io.hpp"
#include "support.hpp"

using namespace ccut;
using namespace ccut::testing;

TEST(Rational, ParseAndFormat) {
  EXPECT_EQ(R("2/4"), Rational(1, 2));
  EXPECT_EQ(R("-3/10"), Rational(-3, 10));
  EXPECT_EQ(R("0.26"), Rational(13, 50));
  EXPECT_EQ(R("-.5"), Rational(-1, 2));
  EXPECT_EQ(R("7"), Rational(7));
  EXPECT_EQ(to_string(R("6/4")), "3/2");
  EXPECT_EQ(to_string(R("5")), "5/1");
  EXPECT_EQ(to_string(R("0")), "0/1");
  EXPECT_THROW(R("1/0"), ParseError);
  EXPECT_THROW(R("abc"), ParseError);
  EXPECT_THROW(R("1e-3"), ParseError);
  EXPECT_THROW(R(""), ParseError);
}

TEST(Rational, FloorCeilPow) {
  EXPECT_EQ(ccut::floor(R("-1/2")), -1);
  EXPECT_EQ(ccut::ceil(R("-1/2")), 0);
  EXPECT_EQ(ccut::ceil(R("22/3")), 8);
  EXPECT_EQ(pow2(-16), Rational(1, 65536));
  EXPECT_EQ(pow2(3), 8);
}

TEST(Valuation, Invariants) {
  EXPECT_THROW(Valuation({Block{R("0"), R("1"), R("2")}}), DomainError);         // mass 2
  EXPECT_THROW(Valuation({Block{R("1/2"), R("1/2"), R("1")}}), DomainError);     // empty
  EXPECT_THROW(Valuation({Block{R("0"), R("1/2"), R("1")}, Block{R("1/4"), R("3/4"), R("1")}}),
               DomainError);  // overlap
  Valuation touching({Block{R("0"), R("1/2"), R("1")}, Block{R("1/2"), R("1"), R("1")}});
  EXPECT_EQ(touching.mass(R("1/4"), R("3/4")), R("1/2"));
  auto v = Valuation::normalized({Block{R("3/4"), R("1"), R("5")}, Block{R("0"), R("1/4"), R("5")}});
  EXPECT_EQ(v.blocks()[0].height, 2);
  EXPECT_EQ(v.blocks()[0].left, 0);
}

TEST(Valuation, Classify) {
  EXPECT_EQ(classify(U("0", "1")).kind, ValuationKind::SingleBlock);
  auto two = Valuation::normalized({Block{R("0"), R("1/4"), R("1")}, Block{R("3/4"), R("1"), R("1")}});
  EXPECT_EQ(classify(two).kind, ValuationKind::DBlockUniform);
  EXPECT_EQ(classify(two).d, 2);
  auto pc = Valuation::normalized({Block{R("0"), R("1/4"), R("1")}, Block{R("3/4"), R("1"), R("3")}});
  EXPECT_EQ(classify(pc).kind, ValuationKind::PiecewiseConstant);
}

TEST(Balance, Examples) {
  EXPECT_EQ(balance(U("0", "1"), Solution::alternating({R("1/2")})), 0);
  EXPECT_EQ(balance(U("0", "1"), Solution::alternating({R("3/10")})), R("-2/5"));
  EXPECT_EQ(balance(U("1/4", "3/4"), Solution::alternating({R("1/2")})), 0);
  auto inst3 = inst_of({U("0", "1")}, 3);
  EXPECT_THROW(balance(inst3, 0, Solution::alternating({R("1/2")})), ArityError);
}

TEST(Verify, Examples) {
  auto one = inst_of({U("0", "1")});
  auto r = verify(one, Solution::alternating({R("1/2")}), 0);
  EXPECT_TRUE(r.satisfied);
  EXPECT_EQ(r.max_discrepancy, 0);

  auto three = inst_of({U("0", "1")}, 3);
  Solution abc{{R("1/3"), R("2/3")}, {0, 1, 2}};
  r = verify(three, abc, 0);
  EXPECT_TRUE(r.satisfied);
  for (const auto& m : r.mass[0]) EXPECT_EQ(m, R("1/3"));

  auto halves = inst_of({U("0", "1/2"), U("1/2", "1")});
  r = verify(halves, Solution::alternating({R("1/4"), R("3/4")}), 0);
  EXPECT_TRUE(r.satisfied);
  EXPECT_EQ(r.discrepancy[0], 0);
  EXPECT_EQ(r.discrepancy[1], 0);
}

TEST(Verify, Errors) {
  auto one = inst_of({U("0", "1")});
  EXPECT_THROW(verify(one, Solution{{R("1/2")}, {0}}, 0), ArityError);
  EXPECT_THROW(verify(one, Solution{{R("1/2")}, {0, 2}}, 0), ArityError);
  EXPECT_THROW(verify(one, Solution::alternating({R("3/2")}), 0), DomainError);
  EXPECT_THROW(verify(one, Solution::alternating({R("1/2"), R("1/4")}), 0), DomainError);
}

TEST(Verify, CoincidentCutsCarryNoMass) {
  auto one = inst_of({U("0", "1")});
  Solution s{{R("1/2"), R("1/2")}, {0, 0, 1}};
  EXPECT_TRUE(verify(one, s, 0).satisfied);
}

TEST(EncodedValue, Examples) {
  EXPECT_EQ(encoded_value(Solution{{}, {0}}, 0, 1), 1);
  EXPECT_EQ(encoded_value(Solution::alternating({R("1/2")}), 0, 1), 0);
  EXPECT_EQ(encoded_value(Solution::alternating({R("1/4")}, 1), 0, 1), R("1/2"));
  EXPECT_THROW(encoded_value(Solution{{}, {0}}, 0, 2), DomainError);
}

TEST(Truncate, Examples) {
  EXPECT_EQ(truncate(R("3/2")), 1);
  EXPECT_EQ(truncate(R("-3/10")), R("-3/10"));
  EXPECT_EQ(truncate(R("-2")), -1);
}

TEST(Rescale, Examples) {
  Instance a = Instance::make({Valuation({Block{R("0"), R("2"), R("1/2")}})}, 2, 2);
  auto u = rescale_to_unit(a);
  EXPECT_EQ(u.agents[0].blocks()[0], (Block{R("0"), R("1"), R("1")}));
  Instance b = Instance::make({Valuation({Block{R("1"), R("2"), R("1")}})}, 2, 4);
  EXPECT_EQ(rescale_to_unit(b).agents[0].blocks()[0], (Block{R("1/4"), R("1/2"), R("4")}));
  auto one = inst_of({U("1/4", "3/4")});
  EXPECT_EQ(rescale_to_unit(one), one);
}

TEST(Rescale, PreservesReports) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto base = random_piecewise(3, 2, seed);
    Instance wide = base;
    Rational M = R("7/3");
    wide.domain_right = M;
    for (auto& a : wide.agents) {
      auto bs = a.blocks();
      for (auto& b : bs) b.left *= M, b.right *= M, b.height /= M;
      a = Valuation(bs);
    }
    Solution s = Solution::alternating({R("1/5") * M, R("1/2") * M, R("4/5") * M});
    auto before = verify(wide, s, R("1/10"));
    auto after = verify(rescale_to_unit(wide), scale_solution(s, 1 / M), R("1/10"));
    EXPECT_EQ(before.mass, after.mass);
    EXPECT_EQ(before.satisfied, after.satisfied);
  }
}

TEST(DisjointCopies, Construction) {
  auto one = inst_of({U("0", "1")});
  EXPECT_EQ(disjoint_copies(one, 0), one);
  auto two = disjoint_copies(one, 1);
  EXPECT_EQ(two.n(), 2u);
  EXPECT_EQ(two.cut_budget, 3);
  EXPECT_EQ(two.domain_right, 2);
  EXPECT_LE(two.agents[0].support_right(), two.agents[1].support_left());
  // each copy solved independently with its own cut
  auto r = verify(two, Solution::alternating({R("1/2"), R("3/2")}), 0);
  EXPECT_TRUE(r.satisfied);
}

TEST(Properties, MassConservationSwapMergeMonotone) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    auto inst = random_piecewise(4, 3, seed);
    Rng rng(seed * 7919);
    std::vector<Rational> cuts;
    for (int t = 0; t < 5; ++t) cuts.push_back(frac(rng.between(0, 64), 64));
    std::sort(cuts.begin(), cuts.end());
    Solution s = Solution::alternating(cuts, static_cast<Label>(seed % 2));
    s.labels[2] = s.labels[1];  // force one redundant cut
    auto rep = verify(inst, s, 0);
    for (const auto& m : rep.mass) EXPECT_EQ(m[0] + m[1], 1);

    auto sw = swap_labels(s);
    for (std::size_t i = 0; i < inst.n(); ++i) {
      EXPECT_EQ(balance(inst, i, sw), -balance(inst, i, s));
      EXPECT_EQ(encoded_value(sw, R("0"), R("1")), -encoded_value(s, R("0"), R("1")));
    }

    auto merged = merge_equal_labels(s);
    EXPECT_LT(merged.cuts.size(), s.cuts.size());
    EXPECT_EQ(verify(inst, merged, 0).mass, rep.mass);

    Rational eps = rep.max_discrepancy;
    EXPECT_TRUE(verify(inst, s, eps).satisfied);
    EXPECT_TRUE(verify(inst, s, eps + R("1/1000")).satisfied);
    if (eps > 0) EXPECT_FALSE(verify(inst, s, eps - R("1/1000000")).satisfied);
  }
}

TEST(Io, RoundTrip) {
  auto inst = random_piecewise(3, 2, 42);
  inst.cut_budget = 5;
  auto back = instance_from_json(json::parse(to_json(inst).dump()));
  EXPECT_EQ(back, inst);
  Solution s = Solution::alternating({R("1/3"), R("1/2")}, 1);
  EXPECT_EQ(solution_from_json(json::parse(to_json(s, 2).dump()), 2), s);
  Solution k3{{R("1/3"), R("2/3")}, {2, 0, 1}};
  EXPECT_EQ(solution_from_json(to_json(k3, 3), 3), k3);
  auto j = to_json(s, 2);
  EXPECT_EQ(j["labels"][1].get<std::string>(), "+");
  EXPECT_EQ(j["cuts"][0].get<std::string>(), "1/3");
  EXPECT_THROW(instance_from_json(json::parse(R"({"agents":[{"blocks":[{"left":"0"}]}]})")), ParseError);
}

TEST(Gen, ClassAudit) {
  auto a = random_single_block(1, 2, 5);
  EXPECT_GE(a.agents[0].blocks()[0].length(), R("1/2"));
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto inst = random_single_block(10, 6, seed);
    for (const auto& v : inst.agents) {
      EXPECT_EQ(classify(v).kind, ValuationKind::SingleBlock);
      EXPECT_LE(v.max_height(), 6);
    }
    auto d = random_dblock(2, 2, seed);
    for (const auto& v : d.agents) {
      EXPECT_LE(v.size(), 2u);
      for (const auto& b : v.blocks()) EXPECT_EQ(b.height, v.blocks()[0].height);
    }
  }
  EXPECT_EQ(random_single_block(10, 4, 7), random_single_block(10, 4, 7));
}
