#include <gtest/gtest.h>

#include <set>

#include "ccut/gen.hpp"
#include "ccut/ppad.hpp"
#include "support.hpp"

using namespace ccut;
using namespace ccut::testing;

namespace {

const char* kIdentity = "IN x1\nIN x2\nOUT x1\nOUT x2\n";
const char* kConst = "IN x1\nIN x2\nCONST 1/3 -> a\nCONST -1/2 -> b\nOUT a\nOUT b\n";
const char* kHalf = "IN x1\nIN x2\nMUL 1/2 x1 -> y1\nMUL 1/2 x2 -> y2\nOUT y1\nOUT y2\n";

Rational clamp01(const Rational& v) { return v < 0 ? Rational(0) : (v > 1 ? Rational(1) : v); }

// Label masses of `v` restricted to [lo, hi] under `s`.
std::array<Rational, 3> masses_in(const Valuation& v, const Solution& s, const Rational& lo, const Rational& hi) {
  std::array<Rational, 3> m{0, 0, 0};
  Rational pos = lo;
  std::size_t seg = std::upper_bound(s.cuts.begin(), s.cuts.end(), lo) - s.cuts.begin();
  while (pos < hi) {
    Rational end = seg < s.cuts.size() ? Rational(min(s.cuts[seg], hi)) : hi;
    if (pos < end) m[s.labels[seg]] += v.mass(pos, end), pos = end;
    ++seg;
  }
  return m;
}

// Every exact placement of two cuts in the output interval [o, o + 9] whose
// three pieces carry the labels `perm`, given the fixed part of the solution
// left of o (which must end with label perm[0]). Solved cell by cell: the
// density is constant on every unit cell of the output interval.
std::vector<Solution> exact_placements(const Valuation& v, const Solution& fixed, const Rational& o,
                                       std::array<Label, 3> perm) {
  const auto in = masses_in(v, fixed, 0, o);
  const Rational third = frac(1, 3);
  const Rational total = v.mass(o, o + 9);
  auto cumulative = [&](const Rational& t) -> Rational { return v.mass(o, o + t); };
  auto invert = [&](const Rational& m) -> std::optional<Rational> {
    for (int cell = 0; cell < 9; ++cell) {
      Rational lo = cumulative(cell), hi = cumulative(cell + 1);
      if (m < lo || m > hi) continue;
      Rational d = v.density_at(o + cell);
      if (d == 0) continue;
      return Rational(cell + (m - lo) / d);
    }
    return std::nullopt;
  };
  std::vector<Solution> out;
  auto a = invert(third - in[perm[0]]);
  auto b = invert(total - (third - in[perm[2]]));
  if (!a || !b || *a > *b) return out;
  Solution s = fixed;
  s.cuts.push_back(o + *a);
  s.labels.push_back(perm[1]);
  s.cuts.push_back(o + *b);
  s.labels.push_back(perm[2]);
  auto m = label_masses(v, s, 3);
  if (m[0] == third && m[1] == third && m[2] == third) out.push_back(s);
  return out;
}

// Two-cut encodings of [0, 9] on a grid of quarter positions inside the
// well-cut ranges, for every ordering of the three labels.
std::vector<Solution> grid_encodings(bool valid_only) {
  std::vector<Solution> out;
  std::array<Label, 3> perm{0, 1, 2};
  do {
    for (int a4 = 7; a4 <= 17; ++a4)
      for (int b4 = 19; b4 <= 29; ++b4) {
        Solution s{{frac(a4, 4), frac(b4, 4)}, {perm[0], perm[1], perm[2]}};
        if (!valid_only || encoding_status(s, 0).valid) out.push_back(s);
      }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

// Appends a label switch in the gap [9, 10] so the next interval may start
// with any label.
Solution switch_to(Solution s, Label next) {
  if (s.labels.back() != next) {
    s.cuts.push_back(frac(19, 2));
    s.labels.push_back(next);
  }
  return s;
}

std::vector<std::array<Label, 3>> all_perms() {
  std::vector<std::array<Label, 3>> out;
  std::array<Label, 3> p{0, 1, 2};
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// Checks that every exact placement of the output interval [10, 19] is a valid
// encoding of `want`, and that at least one exists.
void expect_sound(const Valuation& v, const Solution& inputs, const Rational& want, const std::string& what) {
  int found = 0;
  for (const auto& perm : all_perms()) {
    for (const auto& s : exact_placements(v, switch_to(inputs, perm[0]), 10, perm)) {
      ++found;
      auto st = encoding_status(s, 10);
      EXPECT_TRUE(st.valid) << what;
      EXPECT_EQ(st.value, want) << what;
    }
  }
  EXPECT_GT(found, 0) << what;
}

LinFixpCircuit random_lin_circuit(std::uint64_t seed, int gates) {
  Rng rng(seed);
  std::string text = "IN x1\nIN x2\n";
  std::vector<std::string> wires{"x1", "x2"};
  const std::vector<Rational> factors{R("-2"), R("-1"), R("-1/2"), R("1/2"), R("1"), R("2"), R("3/2")};
  for (int g = 0; g < gates; ++g) {
    std::string out = "g" + std::to_string(g);
    auto pick = [&] { return wires[rng.between(0, static_cast<long>(wires.size()) - 1)]; };
    switch (rng.between(0, 3)) {
      case 0: text += "ADD " + pick() + " " + pick() + " -> " + out + "\n"; break;
      case 1: text += "MUL " + to_string(factors[rng.between(0, 6)]) + " " + pick() + " -> " + out + "\n"; break;
      case 2: text += "MAX " + pick() + " " + pick() + " -> " + out + "\n"; break;
      default: text += "CONST " + to_string(frac(rng.between(-6, 6), 4)) + " -> " + out + "\n"; break;
    }
    wires.push_back(out);
  }
  text += "OUT " + wires[wires.size() - 1] + "\nOUT " + wires[wires.size() > 2 ? wires.size() - 2 : 1] + "\n";
  return LinFixpCircuit::parse(text);
}

}  // namespace

TEST(TruncCircuit, ParseAndRoundTrip) {
  auto c = TruncCircuit::parse("# demo\nIN x1\nIN x2\nADD x1 x2 -> s\nMUL -1/2 s -> t\nCONST 1/3 -> k\nOUT t\nOUT k\n");
  EXPECT_EQ(c.inputs, (std::array<std::string, 2>{"x1", "x2"}));
  EXPECT_EQ(c.gates.size(), 3u);
  EXPECT_EQ(TruncCircuit::parse(c.to_text()).to_text(), c.to_text());
  EXPECT_THROW(TruncCircuit::parse("IN x1\nIN x2\nADD x1 y -> s\nOUT s\nOUT s\n"), ParseError);  // undefined wire
  EXPECT_THROW(TruncCircuit::parse("IN x1\nIN x2\nCONST 3/2 -> k\nOUT k\nOUT k\n"), ParseError);  // constant out of range
  EXPECT_THROW(TruncCircuit::parse("IN x1\nIN x2\nOUT x1\n"), ParseError);                       // one output
  EXPECT_THROW(TruncCircuit::parse("IN x1\nIN x2\nMAX x1 x2 -> m\nOUT m\nOUT m\n"), ParseError);  // not a truncated gate
  EXPECT_THROW(TruncCircuit::parse("IN x1\nIN x1\nOUT x1\nOUT x1\n"), ParseError);               // redefinition
}

TEST(TruncCircuit, Evaluation) {
  auto id = TruncCircuit::parse(kIdentity);
  EXPECT_EQ(eval_trunc(id, {R("1/3"), R("-1/4")}), (Point2{R("1/3"), R("-1/4")}));
  auto k = TruncCircuit::parse(kConst);
  EXPECT_EQ(eval_trunc(k, {R("9/10"), R("-1")}), (Point2{R("1/3"), R("-1/2")}));
  auto add = TruncCircuit::parse("IN x1\nIN x2\nADD x1 x2 -> s\nOUT s\nOUT x2\n");
  EXPECT_EQ(eval_trunc(add, {1, R("1/2")})[0], 1);
  auto mul = TruncCircuit::parse("IN x1\nIN x2\nMUL -3 x1 -> m\nOUT m\nOUT x1\n");
  EXPECT_EQ(eval_trunc(mul, {R("1/4"), 0})[0], R("-3/4"));
  EXPECT_EQ(eval_trunc(mul, {R("1/2"), 0})[0], -1);
}

TEST(LinFixp, EvaluationAndScaling) {
  auto c = LinFixpCircuit::parse("IN x1\nIN x2\nCONST 2 -> c\nADD x1 c -> s\nMUL 1/2 s -> t\nMAX t x2 -> m\nOUT m\nOUT x2\n");
  EXPECT_EQ(eval_linfixp(c, {R("1/2"), R("1/4")})[0], R("5/4"));
  EXPECT_EQ(eval_linfixp(c, {R("-1"), R("3/4")})[0], R("3/4"));
  auto sf = scaling_factor(c);
  EXPECT_EQ(sf.c, 2);
  EXPECT_EQ(sf.gates, 3);
  EXPECT_EQ(sf.M, 16);  // 2^(n+1)
  auto shifted = shift_domain(c);
  EXPECT_EQ(eval_linfixp(shifted, {R("1/2"), R("1/4")}), (Point2{1, R("1/4")}));
  EXPECT_EQ(eval_linfixp(shifted, {R("-1"), R("-1/2")}), (Point2{R("1/2"), 0}));
  EXPECT_THROW(LinFixpCircuit::parse("IN x1\nIN x2\nMAX x1 -> m\nOUT m\nOUT m\n"), ParseError);
}

TEST(ToTruncated, MaxIdentities) {
  auto maxc = to_truncated(LinFixpCircuit::parse("IN x1\nIN x2\nMAX x1 x2 -> m\nOUT m\nOUT x2\n"));
  EXPECT_EQ(eval_trunc(maxc, {R("1/2"), R("-1/2")})[0], R("1/2"));
  EXPECT_EQ(eval_trunc(maxc, {R("1/4"), R("3/4")})[0], R("3/4"));
  auto zero = to_truncated(LinFixpCircuit::parse("IN x1\nIN x2\nCONST 0 -> z\nMAX x1 z -> m\nOUT m\nOUT z\n"));
  EXPECT_EQ(eval_trunc(zero, {R("-1/2"), 0})[0], 0);
  EXPECT_EQ(eval_trunc(zero, {R("2/3"), 0})[0], R("2/3"));
  for (const auto& g : maxc.gates) {
    if (g.op == TruncOp::Const) {
      EXPECT_LE(abs(g.zeta), 1);
    }
  }
}

// On [-1, 1]^2 the truncated circuit computes the domain-shifted function
// max{min{1, F}, 0} exactly; the check runs on a grid for small random circuits.
TEST(ToTruncated, MatchesShiftedFunctionOnGrid) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto lin = random_lin_circuit(seed, 1 + static_cast<int>(seed % 4));
    auto tr = to_truncated(lin);
    EXPECT_NO_THROW(tr.validate());
    for (int i = -4; i <= 4; ++i)
      for (int j = -4; j <= 4; ++j) {
        Point2 x{frac(i, 4), frac(j, 4)};
        auto f = eval_linfixp(lin, x);
        EXPECT_EQ(eval_trunc(tr, x), (Point2{clamp01(f[0]), clamp01(f[1])})) << seed << "\n" << lin.to_text();
      }
  }
}

// For circuits mapping [0,1]^2 into itself the fixed points agree.
TEST(ToTruncated, PreservesFixedPoints) {
  const char* circuits[] = {
      "IN x1\nIN x2\nMUL 1/2 x2 -> a\nCONST 1/4 -> k\nADD a k -> y1\nMAX x1 a -> y2\nOUT y1\nOUT y2\n",
      "IN x1\nIN x2\nMAX x1 x2 -> m\nMUL 1/2 m -> h\nCONST 1/2 -> k\nADD h k -> y\nOUT y\nOUT x2\n",
      "IN x1\nIN x2\nMUL -1 x1 -> n\nCONST 1 -> one\nADD n one -> y1\nOUT y1\nOUT x1\n",
  };
  for (const char* text : circuits) {
    auto lin = LinFixpCircuit::parse(text);
    auto tr = to_truncated(lin);
    std::set<Point2> fixed_lin, fixed_tr;
    for (int i = -8; i <= 8; ++i)
      for (int j = -8; j <= 8; ++j) {
        Point2 x{frac(i, 8), frac(j, 8)};
        if (eval_trunc(tr, x) == x) fixed_tr.insert(x);
        if (x[0] >= 0 && x[1] >= 0) {
          auto f = eval_linfixp(lin, x);
          ASSERT_TRUE(f[0] >= 0 && f[0] <= 1 && f[1] >= 0 && f[1] <= 1) << text;
          if (f == x) fixed_lin.insert(x);
        }
      }
    EXPECT_EQ(fixed_tr, fixed_lin) << text;
  }
}

TEST(EncodingStatus, Examples) {
  auto valid = encoding_status(Solution{{3, 6}, {0, 1, 2}}, 0);
  EXPECT_TRUE(valid.well_cut);
  EXPECT_TRUE(valid.valid);
  EXPECT_EQ(valid.value, 0);
  EXPECT_EQ(valid.measure, (std::array<Rational, 3>{2, 2, 2}));

  auto invalid = encoding_status(Solution{{2, R("29/4")}, {0, 1, 2}}, 0);
  EXPECT_TRUE(invalid.well_cut);
  EXPECT_FALSE(invalid.valid);
  EXPECT_EQ(invalid.measure[2], 1);

  EXPECT_FALSE(encoding_status(Solution{{3}, {0, 1}}, 0).well_cut);
  EXPECT_FALSE(encoding_status(Solution{{1, 6}, {0, 1, 2}}, 0).well_cut);  // first cut too far left
  auto shifted = encoding_status(Solution{{39, 43, 46}, {2, 0, 1, 2}}, 40);  // C left of the interval
  EXPECT_TRUE(shifted.valid);
  EXPECT_EQ(shifted.value, 0);

  // value -1: A only in I[0,1]
  auto neg = encoding_status(Solution{{2, 6}, {0, 1, 2}}, 0);
  EXPECT_TRUE(neg.valid);
  EXPECT_EQ(neg.value, -1);
}

TEST(KDivGates, Heights) {
  auto mul = make_kdiv_gate(KDivGateKind::MulT, -1, {0}, 10);
  EXPECT_EQ(mul.density_at(R("1/2")), R("1/120"));
  EXPECT_EQ(mul.density_at(3), R("1/120"));
  EXPECT_EQ(mul.density_at(R("21/2")), R("1/120"));
  EXPECT_EQ(mul.density_at(R("23/2")), R("3/10"));
  EXPECT_EQ(mul.density_at(R("3/2")), 0);  // the anchor gaps of the input carry nothing
  EXPECT_EQ(output_height(KDivGateKind::MulT, R("-1/2")), R("1/90"));

  auto k = make_kdiv_gate(KDivGateKind::ConstT, 0, {0}, 10);
  EXPECT_EQ(k.density_at(R("1/4")), R("1/30"));
  EXPECT_EQ(k.density_at(R("9/2")), R("1/30"));
  EXPECT_EQ(k.density_at(R("35/4")), R("1/30"));
  EXPECT_EQ(k.density_at(R("3/4")), 0);
  auto k2 = make_kdiv_gate(KDivGateKind::ConstT, R("1/2"), {0}, 10);
  EXPECT_EQ(k2.density_at(R("1/4")), R("3/4") / 30);
  EXPECT_EQ(k2.density_at(R("9/2")), R("5/4") / 30);

  auto add = make_kdiv_gate(KDivGateKind::AddNegT, 0, {0, 10}, 20);
  EXPECT_EQ(add.density_at(3), R("1/180"));
  EXPECT_EQ(add.density_at(13), R("1/180"));
  EXPECT_EQ(add.mass(20, 29), R("9/10") + R("6/180"));

  auto p1 = make_kdiv_gate(KDivGateKind::Projection1, 0, {0}, 20);
  EXPECT_EQ(p1.density_at(R("35/4")), R("1/30"));
  EXPECT_EQ(p1.density_at(3), R("1/120"));
  EXPECT_EQ(p1.density_at(R("1/4")), R("1/60"));
  EXPECT_EQ(p1.density_at(R("9/2")), R("1/60"));
  EXPECT_EQ(p1.density_at(6), 0);
  auto p2 = make_kdiv_gate(KDivGateKind::Projection2, 0, {10}, 30);
  EXPECT_EQ(p2.density_at(R("41/4")), R("1/30"));
  EXPECT_EQ(p2.density_at(16), R("1/120"));
  EXPECT_EQ(p2.density_at(R("29/2")), R("1/60"));
  EXPECT_EQ(p2.density_at(R("75/4")), R("1/60"));
  EXPECT_EQ(p2.density_at(13), 0);
  for (const auto* v : {&mul, &k, &k2, &add, &p1, &p2}) EXPECT_EQ(v->mass(0, 100), 1);
}

TEST(KDivGates, Errors) {
  EXPECT_THROW(make_kdiv_gate(KDivGateKind::MulT, R("1/2"), {0}, 10), DomainError);  // positive factor: two gates
  EXPECT_THROW(make_kdiv_gate(KDivGateKind::ConstT, R("3/2"), {0}, 10), DomainError);
  EXPECT_THROW(make_kdiv_gate(KDivGateKind::MulT, -1, {0}, 5), DomainError);          // overlap
  EXPECT_THROW(make_kdiv_gate(KDivGateKind::AddNegT, 0, {0, 10}, 10), DomainError);   // overlap
  EXPECT_THROW(make_kdiv_gate(KDivGateKind::AddNegT, 0, {0}, 10), ArityError);
}

// Outside its output interval no label reaches a third of an agent's mass, so
// an exact solution shows all three labels in O; with two cuts they appear
// once each, and the placements solved without any position constraint are
// well cut (checked by the soundness tests below).
TEST(KDivGates, EveryLabelNeedsTheOutputInterval) {
  const std::vector<std::pair<KDivGateKind, Rational>> kinds{
      {KDivGateKind::MulT, R("-1/2")}, {KDivGateKind::MulT, 0}, {KDivGateKind::ConstT, 1},
      {KDivGateKind::Projection1, 0}, {KDivGateKind::Projection2, 0}};
  for (const auto& [kind, zeta] : kinds) {
    auto v = make_kdiv_gate(kind, zeta, {0}, 10);
    for (const auto& in : grid_encodings(false))
      for (Label l = 0; l < 3; ++l) {
        Solution all_l = switch_to(in, l);
        EXPECT_LT(masses_in(v, all_l, 0, 10)[l], frac(1, 3)) << to_string(kind);
      }
  }
  auto add = make_kdiv_gate(KDivGateKind::AddNegT, 0, {0, 10}, 20);
  EXPECT_LE(add.mass(0, 20), R("2/30"));
}

TEST(KDivGates, MultiplicationIsSound) {
  auto inputs = grid_encodings(true);
  ASSERT_GT(inputs.size(), 50u);
  for (const Rational& zeta : {R("0"), R("-1/3"), R("-1"), R("-2"), R("-7/2")}) {
    auto v = make_kdiv_gate(KDivGateKind::MulT, zeta, {0}, 10);
    for (std::size_t t = 0; t < inputs.size(); t += 3) {
      Rational x = encoding_status(inputs[t], 0).value;
      expect_sound(v, inputs[t], truncate(zeta * x), "mul " + to_string(zeta) + " at " + to_string(x));
    }
  }
}

TEST(KDivGates, AdditionIsSound) {
  auto inputs = grid_encodings(true);
  for (std::size_t t = 0; t < inputs.size(); t += 17)
    for (std::size_t u = 5; u < inputs.size(); u += 23) {
      // second input at [10, 19], output at [20, 29]
      Solution s = switch_to(inputs[t], inputs[u].labels[0]);
      for (std::size_t c = 0; c < 2; ++c) {
        s.cuts.push_back(inputs[u].cuts[c] + 10);
        s.labels.push_back(inputs[u].labels[c + 1]);
      }
      Rational x = encoding_status(inputs[t], 0).value, y = encoding_status(inputs[u], 0).value;
      auto v = make_kdiv_gate(KDivGateKind::AddNegT, 0, {0, 10}, 20);
      int found = 0;
      for (const auto& perm : all_perms()) {
        Solution fixed = s;
        if (fixed.labels.back() != perm[0]) {
          fixed.cuts.push_back(frac(39, 2));
          fixed.labels.push_back(perm[0]);
        }
        for (const auto& sol : exact_placements(v, fixed, 20, perm)) {
          ++found;
          auto st = encoding_status(sol, 20);
          EXPECT_TRUE(st.valid);
          EXPECT_EQ(st.value, -truncate(x + y));
        }
      }
      EXPECT_GT(found, 0);
    }
}

TEST(KDivGates, ConstantIsSound) {
  // Out_1 = [0, 9] reads A, B, C; any well-cut placement works, valid or not.
  std::vector<Solution> refs;
  for (const auto& s : grid_encodings(false))
    if (s.labels == std::vector<Label>{0, 1, 2}) refs.push_back(s);
  for (const Rational& zeta : {R("-1"), R("-1/2"), R("0"), R("1/3"), R("1")}) {
    auto v = make_kdiv_gate(KDivGateKind::ConstT, zeta, {0}, 10);
    for (std::size_t t = 0; t < refs.size(); t += 7)
      expect_sound(v, refs[t], zeta, "const " + to_string(zeta));
  }
}

TEST(KDivGates, ProjectionsAreSound) {
  std::set<int> c_position;  // where C sits in the output interval
  for (KDivGateKind kind : {KDivGateKind::Projection1, KDivGateKind::Projection2}) {
    auto v = make_kdiv_gate(kind, 0, {0}, 10);
    for (const auto& in : grid_encodings(false)) {
      bool allowed = kind == KDivGateKind::Projection1 ? in.labels == std::vector<Label>{0, 1, 2}
                                                      : in.labels[0] == kLabelC;
      if (!allowed) continue;
      auto st_in = encoding_status(in, 0);
      int found = 0;
      for (const auto& perm : all_perms())
        for (const auto& s : exact_placements(v, switch_to(in, perm[0]), 10, perm)) {
          ++found;
          auto st = encoding_status(s, 10);
          EXPECT_TRUE(st.valid);  // always, whatever Out_i encodes
          if (st_in.valid) EXPECT_EQ(st.value, -st_in.value);
          c_position.insert(static_cast<int>(std::find(perm.begin(), perm.end(), kLabelC) - perm.begin()));
        }
      EXPECT_GT(found, 0);
    }
  }
  EXPECT_EQ(c_position, (std::set<int>{0, 1, 2}));
}

TEST(CompileFixp, AgentAudit) {
  auto id = compile_fixp(TruncCircuit::parse(kIdentity));
  // two projections, two negations into In_1/In_2, and two-negation copies In_i -> Out_i
  EXPECT_EQ(id.agents.size(), 8u);
  EXPECT_EQ(id.instance.k, 3);
  EXPECT_EQ(id.instance.cut_budget, 16);
  auto k = compile_fixp(TruncCircuit::parse(kConst));
  EXPECT_EQ(k.agents.size(), 8u);  // 1/3 goes through a copy since the constant gate reads Out_1

  for (const auto* c : {&id, &k}) {
    std::set<Rational> outs;
    for (std::size_t a = 0; a < c->agents.size(); ++a) {
      EXPECT_EQ(c->instance.agents[a].mass(0, c->instance.domain_right), 1);
      EXPECT_TRUE(outs.insert(c->agents[a].output).second);
      EXPECT_EQ(c->agents[a].output / 10, floor(c->agents[a].output / 10));
    }
    for (int left : {0, 10, 20, 30, 40, 50}) EXPECT_TRUE(outs.count(left)) << left;
    EXPECT_EQ(c->layout_json()["agents"].size(), c->agents.size());
  }
  EXPECT_EQ(id.agents[0].kind, KDivGateKind::Projection1);
  EXPECT_EQ(id.agents[1].kind, KDivGateKind::Projection2);
}

TEST(CompileFixp, IdentityPlacement) {
  auto c = compile_fixp(TruncCircuit::parse(kIdentity));
  auto p = forward_place_kdiv(c, {0, 0});
  EXPECT_TRUE(verify(c.instance, p.solution, 0).satisfied);
  auto in1 = encoding_status(p.solution, 40);
  EXPECT_TRUE(in1.valid);
  EXPECT_EQ(in1.value, 0);
  // value 0 leaves every label 2 units of X(In_1): the cuts sit at 3 and 6
  std::vector<Rational> in_cuts;
  for (const auto& x : p.solution.cuts)
    if (x > 40 && x < 49) in_cuts.push_back(x);
  EXPECT_EQ(in_cuts, (std::vector<Rational>{43, 46}));
  EXPECT_EQ(encoding_status(p.solution, 0).measure, (std::array<Rational, 3>{2, 2, 2}));
  for (const auto& x : {Point2{R("1/3"), R("-1/4")}, Point2{1, -1}, Point2{R("-5/7"), R("2/9")}}) {
    auto q = forward_place_kdiv(c, x);
    EXPECT_TRUE(verify(c.instance, q.solution, 0).satisfied);
    EXPECT_EQ(decode_fixed_point(c, q.solution).x, x);
  }
}

TEST(CompileFixp, ConstantCircuit) {
  auto c = compile_fixp(TruncCircuit::parse(kConst));
  Point2 fixed{R("1/3"), R("-1/2")};
  auto p = forward_place_kdiv(c, fixed);
  EXPECT_EQ(p.max_gate_discrepancy, 0);
  EXPECT_EQ(p.projection_residual, (Point2{0, 0}));
  EXPECT_TRUE(verify(c.instance, p.solution, 0).satisfied);
  auto d = decode_fixed_point(c, p.solution);
  EXPECT_EQ(d.x, fixed);
  EXPECT_EQ(eval_trunc(c.circuit, d.x), d.x);

  auto off = forward_place_kdiv(c, {0, R("-1/2")});
  EXPECT_EQ(off.max_gate_discrepancy, 0);
  EXPECT_GT(off.projection_residual[0], 0);
  EXPECT_EQ(off.projection_residual[1], 0);
  EXPECT_FALSE(verify(c.instance, off.solution, 0).satisfied);
  EXPECT_THROW(decode_fixed_point(c, off.solution), DomainError);
}

TEST(CompileFixp, HalvingCircuit) {
  auto c = compile_fixp(TruncCircuit::parse(kHalf));
  auto p = forward_place_kdiv(c, {0, 0});
  EXPECT_TRUE(verify(c.instance, p.solution, 0).satisfied);
  auto d = decode_fixed_point(c, p.solution);
  EXPECT_EQ(d.x, (Point2{0, 0}));
  EXPECT_EQ(eval_trunc(c.circuit, d.x), d.x);
  auto off = forward_place_kdiv(c, {R("1/2"), 0});
  EXPECT_EQ(off.max_gate_discrepancy, 0);
  EXPECT_GT(off.projection_residual[0], 0);
}

TEST(CompileFixp, DecodingRenamesLabels) {
  auto c = compile_fixp(TruncCircuit::parse(kConst));
  auto p = forward_place_kdiv(c, {R("1/3"), R("-1/2")});
  const std::array<Label, 3> rename{2, 0, 1};  // A -> C, B -> A, C -> B
  Solution renamed = p.solution;
  for (auto& l : renamed.labels) l = rename[l];
  EXPECT_TRUE(verify(c.instance, renamed, 0).satisfied);
  auto d = decode_fixed_point(c, renamed);
  EXPECT_EQ(d.x, (Point2{R("1/3"), R("-1/2")}));
  EXPECT_EQ(d.relabel, (std::array<Label, 3>{1, 2, 0}));
  EXPECT_EQ(d.canonical, p.solution);
}

TEST(CompileFixp, DecodingRejectsNonExactSolutions) {
  auto c = compile_fixp(TruncCircuit::parse(kHalf));
  auto p = forward_place_kdiv(c, {0, 0});
  Solution moved = p.solution;
  for (auto& x : moved.cuts)
    if (x > 40 && x < 49) {
      x += R("1/100");  // In_1 now encodes a different value
      break;
    }
  EXPECT_THROW(decode_fixed_point(c, moved), DomainError);
  Solution broken = p.solution;
  broken.cuts[0] = R("1/2");  // Out_1 no longer well cut
  EXPECT_THROW(decode_fixed_point(c, broken), DomainError);
}
