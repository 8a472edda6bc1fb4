#include "ccut/ppad.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ccut {

namespace {

// ---------------------------------------------------------------------------
// Circuit text

struct RawGate {
  std::string op;  // ADD, MUL, MAX, CONST
  std::string a, b;
  Rational zeta;
  std::string out;
  int line = 0;
};

struct RawCircuit {
  std::vector<std::string> inputs, outputs;
  std::vector<RawGate> gates;
};

[[noreturn]] void fail(int line, const std::string& what) {
  throw ParseError("circuit line " + std::to_string(line) + ": " + what);
}

Rational parse_factor(const std::string& tok, int line) {
  try {
    return parse_rational(tok);
  } catch (const ParseError&) {
    fail(line, "bad rational '" + tok + "'");
  }
}

RawCircuit parse_raw(std::string_view text, bool allow_max) {
  RawCircuit c;
  std::istringstream in{std::string(text)};
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string& op = tok[0];
    auto arrow = [&](std::size_t at) {
      if (tok[at] != "->") fail(no, "expected '->'");
    };
    if (op == "IN" || op == "OUT") {
      if (tok.size() != 2) fail(no, op + " takes one wire");
      (op == "IN" ? c.inputs : c.outputs).push_back(tok[1]);
    } else if (op == "ADD" || (op == "MAX" && allow_max)) {
      if (tok.size() != 5) fail(no, op + " a b -> c expected");
      arrow(3);
      c.gates.push_back(RawGate{op, tok[1], tok[2], 0, tok[4], no});
    } else if (op == "MUL") {
      if (tok.size() != 5) fail(no, "MUL p/q a -> b expected");
      arrow(3);
      c.gates.push_back(RawGate{op, tok[2], "", parse_factor(tok[1], no), tok[4], no});
    } else if (op == "CONST") {
      if (tok.size() != 4) fail(no, "CONST p/q -> b expected");
      arrow(2);
      c.gates.push_back(RawGate{op, "", "", parse_factor(tok[1], no), tok[3], no});
    } else {
      fail(no, "unknown gate '" + op + "'");
    }
  }
  return c;
}

// Shared structural checks: two distinct inputs, two outputs, every wire
// defined once before it is read.
template <class Gate, class ReadsFn>
void check_wiring(const std::array<std::string, 2>& inputs, const std::vector<Gate>& gates,
                  const std::array<std::string, 2>& outputs, ReadsFn reads) {
  std::set<std::string> defined;
  auto define = [&](const std::string& w) {
    if (w.empty()) throw ParseError("circuit: empty wire name");
    if (!defined.insert(w).second) throw ParseError("circuit: wire '" + w + "' defined twice");
  };
  auto need = [&](const std::string& w) {
    if (!defined.count(w)) throw ParseError("circuit: wire '" + w + "' read before it is defined");
  };
  define(inputs[0]);
  define(inputs[1]);
  for (const auto& g : gates) {
    for (const auto& w : reads(g)) need(w);
    define(g.out);
  }
  need(outputs[0]);
  need(outputs[1]);
}

std::vector<std::string> trunc_reads(const TruncGate& g) {
  switch (g.op) {
    case TruncOp::Add: return {g.a, g.b};
    case TruncOp::Mul: return {g.a};
    case TruncOp::Const: return {};
  }
  return {};
}

std::vector<std::string> lin_reads(const LinGate& g) {
  switch (g.op) {
    case LinOp::Add:
    case LinOp::Max: return {g.a, g.b};
    case LinOp::Mul: return {g.a};
    case LinOp::Const: return {};
  }
  return {};
}

std::array<std::string, 2> exactly_two(const std::vector<std::string>& v, const char* what) {
  if (v.size() != 2) throw ParseError(std::string("circuit: expected exactly two ") + what);
  return {v[0], v[1]};
}

// Fresh wire names that avoid every name already in use.
class FreshNames {
 public:
  explicit FreshNames(std::set<std::string> used) : used_(std::move(used)) {}
  std::string operator()() {
    for (;;) {
      std::string name = "_w" + std::to_string(next_++);
      if (used_.insert(name).second) return name;
    }
  }

 private:
  std::set<std::string> used_;
  long next_ = 0;
};

std::set<std::string> names_of(const LinFixpCircuit& c) {
  std::set<std::string> s(c.inputs.begin(), c.inputs.end());
  for (const auto& g : c.gates) s.insert(g.out);
  return s;
}

// ---------------------------------------------------------------------------
// Interval geometry

using Span = std::pair<Rational, Rational>;

// Lebesgue measure of each label on [lo, hi].
std::array<Rational, 3> label_measure(const Solution& s, const Rational& lo, const Rational& hi) {
  std::array<Rational, 3> m{0, 0, 0};
  std::size_t seg = std::upper_bound(s.cuts.begin(), s.cuts.end(), lo) - s.cuts.begin();
  Rational pos = lo;
  while (pos < hi) {
    Rational end = seg < s.cuts.size() ? Rational(min(s.cuts[seg], hi)) : hi;
    if (pos < end) {
      Label l = s.labels.at(seg);
      if (l < 0 || l > 2) throw ArityError("three-label solution expected");
      m[l] += end - pos;
      pos = end;
    }
    ++seg;
  }
  return m;
}

bool overlaps(const Rational& a, const Rational& b) {
  return a < b + kIntervalLength && b < a + kIntervalLength;
}

struct WellCut {
  bool ok = false;
  Rational first, second;                 // cut positions
  std::array<Label, 3> labels{};          // left, middle, right pieces
};

WellCut well_cut(const Solution& s, const Rational& left) {
  WellCut w;
  std::vector<Rational> inside;
  for (const auto& c : s.cuts)
    if (c > left && c < left + kIntervalLength) inside.push_back(c);
  if (inside.size() != 2) return w;
  w.first = inside[0] - left;
  w.second = inside[1] - left;
  if (w.first < frac(7, 4) || w.first > frac(17, 4) || w.second < frac(19, 4) || w.second > frac(29, 4)) return w;
  w.labels = {s.label_right_of(left), s.label_right_of(inside[0]), s.label_right_of(inside[1])};
  w.ok = true;
  return w;
}

Rational input_height(KDivGateKind kind, const Rational& zeta) {
  switch (kind) {
    case KDivGateKind::MulT: return abs(zeta) / (60 * (abs(zeta) + 1));
    case KDivGateKind::AddNegT: return frac(1, 180);
    default: return 0;  // the constant and projection gadgets have shaped inputs
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// TruncCircuit

TruncCircuit TruncCircuit::parse(std::string_view text) {
  RawCircuit raw = parse_raw(text, /*allow_max=*/false);
  TruncCircuit c;
  c.inputs = exactly_two(raw.inputs, "IN lines");
  c.outputs = exactly_two(raw.outputs, "OUT lines");
  for (const auto& g : raw.gates) {
    TruncGate t;
    t.op = g.op == "ADD" ? TruncOp::Add : (g.op == "MUL" ? TruncOp::Mul : TruncOp::Const);
    t.a = g.a;
    t.b = g.b;
    t.zeta = g.zeta;
    t.out = g.out;
    if (t.op == TruncOp::Const && abs(t.zeta) > 1) fail(g.line, "constant outside [-1, 1]");
    c.gates.push_back(std::move(t));
  }
  c.validate();
  return c;
}

void TruncCircuit::validate() const {
  check_wiring(inputs, gates, outputs, trunc_reads);
  for (const auto& g : gates)
    if (g.op == TruncOp::Const && abs(g.zeta) > 1)
      throw ParseError("circuit: constant " + ccut::to_string(g.zeta) + " outside [-1, 1]");
}

std::string TruncCircuit::to_text() const {
  std::ostringstream o;
  o << "IN " << inputs[0] << "\nIN " << inputs[1] << "\n";
  for (const auto& g : gates) {
    switch (g.op) {
      case TruncOp::Add: o << "ADD " << g.a << " " << g.b << " -> " << g.out << "\n"; break;
      case TruncOp::Mul: o << "MUL " << ccut::to_string(g.zeta) << " " << g.a << " -> " << g.out << "\n"; break;
      case TruncOp::Const: o << "CONST " << ccut::to_string(g.zeta) << " -> " << g.out << "\n"; break;
    }
  }
  o << "OUT " << outputs[0] << "\nOUT " << outputs[1] << "\n";
  return o.str();
}

Point2 eval_trunc(const TruncCircuit& c, const Point2& x) {
  std::map<std::string, Rational> v{{c.inputs[0], x[0]}, {c.inputs[1], x[1]}};
  for (const auto& g : c.gates) {
    switch (g.op) {
      case TruncOp::Add: v[g.out] = truncate(v.at(g.a) + v.at(g.b)); break;
      case TruncOp::Mul: v[g.out] = truncate(g.zeta * v.at(g.a)); break;
      case TruncOp::Const: v[g.out] = g.zeta; break;
    }
  }
  return {v.at(c.outputs[0]), v.at(c.outputs[1])};
}

// ---------------------------------------------------------------------------
// LinFixpCircuit

LinFixpCircuit LinFixpCircuit::parse(std::string_view text) {
  RawCircuit raw = parse_raw(text, /*allow_max=*/true);
  LinFixpCircuit c;
  c.inputs = exactly_two(raw.inputs, "IN lines");
  c.outputs = exactly_two(raw.outputs, "OUT lines");
  for (const auto& g : raw.gates) {
    LinGate l;
    l.op = g.op == "ADD" ? LinOp::Add : g.op == "MUL" ? LinOp::Mul : g.op == "MAX" ? LinOp::Max : LinOp::Const;
    l.a = g.a;
    l.b = g.b;
    l.zeta = g.zeta;
    l.out = g.out;
    c.gates.push_back(std::move(l));
  }
  c.validate();
  return c;
}

void LinFixpCircuit::validate() const { check_wiring(inputs, gates, outputs, lin_reads); }

std::string LinFixpCircuit::to_text() const {
  std::ostringstream o;
  o << "IN " << inputs[0] << "\nIN " << inputs[1] << "\n";
  for (const auto& g : gates) {
    switch (g.op) {
      case LinOp::Add: o << "ADD " << g.a << " " << g.b << " -> " << g.out << "\n"; break;
      case LinOp::Max: o << "MAX " << g.a << " " << g.b << " -> " << g.out << "\n"; break;
      case LinOp::Mul: o << "MUL " << ccut::to_string(g.zeta) << " " << g.a << " -> " << g.out << "\n"; break;
      case LinOp::Const: o << "CONST " << ccut::to_string(g.zeta) << " -> " << g.out << "\n"; break;
    }
  }
  o << "OUT " << outputs[0] << "\nOUT " << outputs[1] << "\n";
  return o.str();
}

Point2 eval_linfixp(const LinFixpCircuit& c, const Point2& x) {
  std::map<std::string, Rational> v{{c.inputs[0], x[0]}, {c.inputs[1], x[1]}};
  for (const auto& g : c.gates) {
    switch (g.op) {
      case LinOp::Add: v[g.out] = v.at(g.a) + v.at(g.b); break;
      case LinOp::Max: v[g.out] = max(v.at(g.a), v.at(g.b)); break;
      case LinOp::Mul: v[g.out] = g.zeta * v.at(g.a); break;
      case LinOp::Const: v[g.out] = g.zeta; break;
    }
  }
  return {v.at(c.outputs[0]), v.at(c.outputs[1])};
}

LinFixpCircuit shift_domain(const LinFixpCircuit& c) {
  LinFixpCircuit s = c;
  FreshNames fresh(names_of(c));
  for (int i = 0; i < 2; ++i) {
    std::string neg = fresh(), lower = fresh(), capped = fresh(), upper = fresh(), zero = fresh(), out = fresh();
    s.gates.push_back(LinGate{LinOp::Mul, c.outputs[i], "", -1, neg});
    s.gates.push_back(LinGate{LinOp::Const, "", "", -1, lower});
    s.gates.push_back(LinGate{LinOp::Max, lower, neg, 0, capped});
    s.gates.push_back(LinGate{LinOp::Mul, capped, "", -1, upper});
    s.gates.push_back(LinGate{LinOp::Const, "", "", 0, zero});
    s.gates.push_back(LinGate{LinOp::Max, upper, zero, 0, out});
    s.outputs[i] = out;
  }
  return s;
}

ScalingFactor scaling_factor(const LinFixpCircuit& c) {
  ScalingFactor f;
  f.c = 2;
  for (const auto& g : c.gates) {
    if (g.op == LinOp::Mul || g.op == LinOp::Const) f.c = max(f.c, abs(g.zeta));
    if (g.op != LinOp::Const) ++f.gates;
  }
  f.M = 1;
  for (int t = 0; t <= f.gates; ++t) f.M *= f.c;
  return f;
}

TruncCircuit to_truncated(const LinFixpCircuit& lin) {
  const LinFixpCircuit c = shift_domain(lin);
  const ScalingFactor sf = scaling_factor(c);
  FreshNames fresh(names_of(c));
  TruncCircuit t;
  t.inputs = c.inputs;
  std::map<std::string, std::string> wire;  // original wire -> wire holding value / M
  auto gate = [&](TruncOp op, const std::string& a, const std::string& b, const Rational& zeta) {
    std::string out = fresh();
    t.gates.push_back(TruncGate{op, a, b, zeta, out});
    return out;
  };
  for (const auto& in : c.inputs) wire[in] = gate(TruncOp::Mul, in, "", 1 / sf.M);
  for (const auto& g : c.gates) {
    switch (g.op) {
      case LinOp::Add: wire[g.out] = gate(TruncOp::Add, wire.at(g.a), wire.at(g.b), 0); break;
      case LinOp::Mul: wire[g.out] = gate(TruncOp::Mul, wire.at(g.a), "", g.zeta); break;
      case LinOp::Const: wire[g.out] = gate(TruncOp::Const, "", "", g.zeta / sf.M); break;
      case LinOp::Max: {
        // max{x, y} = 2 (x/2 + max{y/2 - x/2, 0}), max{d, 0} = T[T[d - 1] + 1]
        const std::string& x = wire.at(g.a);
        const std::string& y = wire.at(g.b);
        std::string hx = gate(TruncOp::Mul, x, "", frac(1, 2));
        std::string hy = gate(TruncOp::Mul, y, "", frac(1, 2));
        std::string nhx = gate(TruncOp::Mul, x, "", frac(-1, 2));
        std::string d = gate(TruncOp::Add, hy, nhx, 0);
        std::string minus_one = gate(TruncOp::Const, "", "", -1);
        std::string e = gate(TruncOp::Add, d, minus_one, 0);
        std::string one = gate(TruncOp::Const, "", "", 1);
        std::string f = gate(TruncOp::Add, e, one, 0);
        std::string half = gate(TruncOp::Add, hx, f, 0);
        wire[g.out] = gate(TruncOp::Mul, half, "", 2);
        break;
      }
    }
  }
  for (int i = 0; i < 2; ++i) t.outputs[i] = gate(TruncOp::Mul, wire.at(c.outputs[i]), "", sf.M);
  t.validate();
  return t;
}

// ---------------------------------------------------------------------------
// Encodings and gadgets

std::vector<std::pair<Rational, Rational>> value_set(const Rational& left) {
  return {{left, left + 1}, {left + 2, left + 4}, {left + 5, left + 7}, {left + 8, left + 9}};
}

std::vector<std::pair<Rational, Rational>> anchor_set(const Rational& left) {
  return {{left + 1, left + 2}, {left + 4, left + 5}, {left + 7, left + 8}};
}

EncodingStatus encoding_status(const Solution& s, const Rational& left) {
  EncodingStatus st;
  for (const auto& [a, b] : value_set(left)) {
    auto m = label_measure(s, a, b);
    for (int l = 0; l < 3; ++l) st.measure[l] += m[l];
  }
  st.well_cut = well_cut(s, left).ok;
  st.valid = st.well_cut && st.measure[kLabelC] == 2;
  st.value = (st.measure[kLabelA] - st.measure[kLabelB]) / 2;
  return st;
}

std::string to_string(KDivGateKind k) {
  switch (k) {
    case KDivGateKind::MulT: return "mul";
    case KDivGateKind::AddNegT: return "add-neg";
    case KDivGateKind::ConstT: return "const";
    case KDivGateKind::Projection1: return "projection-1";
    case KDivGateKind::Projection2: return "projection-2";
  }
  return "?";
}

Rational output_height(KDivGateKind kind, const Rational& zeta) {
  switch (kind) {
    case KDivGateKind::MulT: return 1 / (60 * (abs(zeta) + 1));
    case KDivGateKind::AddNegT: return frac(1, 180);
    default: return frac(1, 120);
  }
}

Valuation make_kdiv_gate(KDivGateKind kind, const Rational& zeta, const std::vector<Rational>& inputs,
                         const Rational& output) {
  const std::size_t arity = kind == KDivGateKind::AddNegT ? 2 : 1;
  if (inputs.size() != arity)
    throw ArityError(to_string(kind) + " gadget reads " + std::to_string(arity) + " interval(s)");
  if (kind == KDivGateKind::MulT && zeta > 0)
    throw DomainError("a single multiplication agent needs a factor <= 0");
  if (kind == KDivGateKind::ConstT && abs(zeta) > 1) throw DomainError("constant outside [-1, 1]");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (overlaps(inputs[i], output)) throw DomainError("gadget input overlaps its output interval");
    for (std::size_t j = i + 1; j < inputs.size(); ++j)
      if (overlaps(inputs[i], inputs[j])) throw DomainError("gadget inputs overlap");
  }

  std::vector<Block> blocks;
  auto add = [&](const Rational& a, const Rational& b, const Rational& h) {
    if (h > 0) blocks.push_back(Block{a, b, h});
  };
  for (const auto& [a, b] : anchor_set(output)) add(a, b, frac(3, 10));
  const Rational h_out = output_height(kind, zeta);
  for (const auto& [a, b] : value_set(output)) add(a, b, h_out);

  const Rational& in = inputs[0];
  switch (kind) {
    case KDivGateKind::MulT:
    case KDivGateKind::AddNegT:
      for (const auto& left : inputs)
        for (const auto& [a, b] : value_set(left)) add(a, b, input_height(kind, zeta));
      break;
    case KDivGateKind::ConstT:
      add(in + frac(17, 2), in + 9, frac(1, 30));
      add(in, in + frac(1, 2), (1 - zeta / 2) / 30);
      add(in + frac(17, 4), in + frac(19, 4), (1 + zeta / 2) / 30);
      break;
    case KDivGateKind::Projection1:
      add(in + frac(17, 2), in + 9, frac(1, 30));
      add(in + 2, in + 4, frac(1, 120));
      add(in, in + frac(1, 2), frac(1, 60));
      add(in + frac(17, 4), in + frac(19, 4), frac(1, 60));
      break;
    case KDivGateKind::Projection2:
      add(in, in + frac(1, 2), frac(1, 30));
      add(in + 5, in + 7, frac(1, 120));
      add(in + frac(17, 4), in + frac(19, 4), frac(1, 60));
      add(in + frac(17, 2), in + 9, frac(1, 60));
      break;
  }
  std::sort(blocks.begin(), blocks.end(), [](const Block& x, const Block& y) { return x.left < y.left; });
  return Valuation(std::move(blocks));
}

// ---------------------------------------------------------------------------
// Compilation

json CompiledFixp::layout_json() const {
  json wires = json::object();
  for (const auto& [name, left] : layout.wire) wires[name] = to_json(left);
  json agent_list = json::array();
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    json ins = json::array();
    for (const auto& l : a.inputs) ins.push_back(to_json(l));
    agent_list.push_back({{"index", i},
                          {"kind", to_string(a.kind)},
                          {"zeta", to_json(a.zeta)},
                          {"inputs", std::move(ins)},
                          {"output", to_json(a.output)},
                          {"role", a.role}});
  }
  return {{"k", 3},
          {"interval_length", kIntervalLength},
          {"domain_right", to_json(instance.domain_right)},
          {"cut_budget", instance.cut_budget},
          {"circuit", circuit.to_text()},
          {"intervals",
           {{"Out_1", KDivLayout::kOut1},
            {"Out_2", KDivLayout::kOut2},
            {"Temp_1", KDivLayout::kTemp1},
            {"Temp_2", KDivLayout::kTemp2},
            {"In_1", KDivLayout::kIn1},
            {"In_2", KDivLayout::kIn2}}},
          {"wires", std::move(wires)},
          {"agents", std::move(agent_list)}};
}

CompiledFixp compile_fixp(const TruncCircuit& circuit) {
  circuit.validate();
  CompiledFixp c;
  c.circuit = circuit;
  Rational next = KDivLayout::kFirstGate;
  auto fresh = [&] {
    Rational left = next;
    next += KDivLayout::kStride;
    return left;
  };
  auto agent = [&](KDivGateKind kind, const Rational& zeta, std::vector<Rational> in, const Rational& out,
                   std::string role) {
    c.agents.push_back(KDivAgent{kind, zeta, std::move(in), out, std::move(role)});
  };
  // Two negations: the value of `src` lands in `dst`.
  auto copy = [&](const Rational& src, const Rational& dst, const std::string& role) {
    Rational mid = fresh();
    agent(KDivGateKind::MulT, -1, {src}, mid, role + " (negate)");
    agent(KDivGateKind::MulT, -1, {mid}, dst, role);
  };

  agent(KDivGateKind::Projection1, 0, {KDivLayout::kOut1}, KDivLayout::kTemp1, "projection Out_1 -> Temp_1");
  agent(KDivGateKind::Projection2, 0, {KDivLayout::kOut2}, KDivLayout::kTemp2, "projection Out_2 -> Temp_2");
  agent(KDivGateKind::MulT, -1, {KDivLayout::kTemp1}, KDivLayout::kIn1, "Temp_1 -> In_1");
  agent(KDivGateKind::MulT, -1, {KDivLayout::kTemp2}, KDivLayout::kIn2, "Temp_2 -> In_2");
  c.layout.wire[circuit.inputs[0]] = KDivLayout::kIn1;
  c.layout.wire[circuit.inputs[1]] = KDivLayout::kIn2;

  // Gates whose final agent writes Out_i directly.
  std::array<int, 2> direct{-1, -1};
  for (int i = 0; i < 2; ++i) {
    if (i == 1 && circuit.outputs[1] == circuit.outputs[0]) continue;
    for (std::size_t g = 0; g < circuit.gates.size(); ++g)
      if (circuit.gates[g].out == circuit.outputs[i]) {
        // the constant gadget reads Out_1 and cannot also write it
        if (!(i == 0 && circuit.gates[g].op == TruncOp::Const)) direct[i] = static_cast<int>(g);
      }
  }

  for (std::size_t g = 0; g < circuit.gates.size(); ++g) {
    const auto& gate = circuit.gates[g];
    Rational out;
    if (direct[0] == static_cast<int>(g)) out = KDivLayout::kOut1;
    else if (direct[1] == static_cast<int>(g)) out = KDivLayout::kOut2;
    else out = fresh();
    const std::string role = "gate " + gate.out;
    switch (gate.op) {
      case TruncOp::Add: {
        Rational a = c.layout.wire.at(gate.a), b = c.layout.wire.at(gate.b);
        if (gate.a == gate.b) {  // the adder reads two distinct intervals
          Rational dup = fresh();
          copy(a, dup, role + " (duplicate input)");
          b = dup;
        }
        Rational mid = fresh();
        agent(KDivGateKind::AddNegT, 0, {a, b}, mid, role + " (negated sum)");
        agent(KDivGateKind::MulT, -1, {mid}, out, role);
        break;
      }
      case TruncOp::Mul: {
        Rational a = c.layout.wire.at(gate.a);
        if (gate.zeta <= 0) {
          agent(KDivGateKind::MulT, gate.zeta, {a}, out, role);
        } else {
          Rational mid = fresh();
          agent(KDivGateKind::MulT, -gate.zeta, {a}, mid, role + " (negated product)");
          agent(KDivGateKind::MulT, -1, {mid}, out, role);
        }
        break;
      }
      case TruncOp::Const:
        agent(KDivGateKind::ConstT, gate.zeta, {Rational(KDivLayout::kOut1)}, out, role);
        break;
    }
    c.layout.wire[gate.out] = out;
  }
  for (int i = 0; i < 2; ++i)
    if (direct[i] < 0)
      copy(c.layout.wire.at(circuit.outputs[i]), i == 0 ? KDivLayout::kOut1 : KDivLayout::kOut2,
           "copy to Out_" + std::to_string(i + 1));

  std::vector<Valuation> vals;
  Rational right = 0;
  for (const auto& a : c.agents) {
    vals.push_back(make_kdiv_gate(a.kind, a.zeta, a.inputs, a.output));
    right = max(right, Rational(a.output + kIntervalLength));
  }
  c.instance = Instance::make(std::move(vals), 3, right);
  return c;
}

// ---------------------------------------------------------------------------
// Forward placement

KDivPlacement forward_place_kdiv(const CompiledFixp& c, const Point2& x) {
  for (const auto& xi : x)
    if (abs(xi) > 1) throw DomainError("fixed-point candidate outside [-1, 1]^2");
  const std::size_t n = c.agents.size();

  // Values encoded by every interval.
  std::map<Rational, Rational> value{{KDivLayout::kTemp1, -x[0]}, {KDivLayout::kTemp2, -x[1]}};
  for (const auto& a : c.agents) {
    switch (a.kind) {
      case KDivGateKind::MulT: value[a.output] = truncate(a.zeta * value.at(a.inputs[0])); break;
      case KDivGateKind::AddNegT:
        value[a.output] = -truncate(value.at(a.inputs[0]) + value.at(a.inputs[1]));
        break;
      case KDivGateKind::ConstT: value[a.output] = a.zeta; break;
      default: break;  // projections: Temp_i holds -x_i
    }
  }

  // Label masses each agent receives from its inputs, assuming every input
  // interval validly encodes its value (and Out_1 reads A, B, C).
  auto input_mass = [&](const KDivAgent& a) -> std::array<Rational, 3> {
    switch (a.kind) {
      case KDivGateKind::MulT: {
        Rational h = input_height(a.kind, a.zeta), v = value.at(a.inputs[0]);
        return {h * (2 + v), h * (2 - v), 2 * h};
      }
      case KDivGateKind::AddNegT: {
        Rational h = frac(1, 180), v = value.at(a.inputs[0]) + value.at(a.inputs[1]);
        return {h * (4 + v), h * (4 - v), 4 * h};
      }
      case KDivGateKind::ConstT:
        return {(1 - a.zeta / 2) / 60, (1 + a.zeta / 2) / 60, frac(1, 60)};
      default: {
        // the projection of Out_i as if it encoded x_i
        Rational v = a.kind == KDivGateKind::Projection1 ? x[0] : x[1];
        return {(2 + v) / 120, (2 - v) / 120, frac(1, 60)};
      }
    }
  };

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t p, std::size_t q) { return c.agents[p].output < c.agents[q].output; });

  KDivPlacement out;
  Solution& s = out.solution;
  s.labels.push_back(kLabelA);
  for (std::size_t idx : order) {
    const KDivAgent& a = c.agents[idx];
    const Valuation& v = c.instance.agents[idx];
    const Rational& O = a.output;
    const auto in = input_mass(a);
    const Rational total = v.mass(O, O + kIntervalLength);
    auto invert = [&](const Rational& m) -> std::optional<Rational> {
      for (int cell = 0; cell < kIntervalLength; ++cell) {
        Rational lo = v.mass(O, O + cell), hi = v.mass(O, O + cell + 1);
        if (m < lo || m > hi) continue;
        Rational d = v.density_at(O + cell);
        if (d > 0) return Rational(O + cell + (m - lo) / d);
      }
      return std::nullopt;
    };
    const Label p0 = s.labels.back();
    const Rational target = value.at(O);
    bool placed = false;
    for (Label p1 = 0; p1 < 3 && !placed; ++p1) {
      if (p1 == p0) continue;
      const Label p2 = static_cast<Label>(3 - p0 - p1);
      if (O == KDivLayout::kOut1 && (p1 != kLabelB || p2 != kLabelC)) continue;
      auto first = invert(frac(1, 3) - in[p0]);
      auto second = invert(total - (frac(1, 3) - in[p2]));
      if (!first || !second || *first > *second) continue;
      Solution trial = s;
      trial.cuts.push_back(*first);
      trial.labels.push_back(p1);
      trial.cuts.push_back(*second);
      trial.labels.push_back(p2);
      auto st = encoding_status(trial, O);
      if (!st.valid || st.value != target) continue;
      s = std::move(trial);
      placed = true;
    }
    if (!placed)
      throw std::logic_error("forward placement: cannot balance agent " + std::to_string(idx) + " (" + a.role + ")");
  }

  auto rep = verify(c.instance, s, 0);
  out.discrepancy = rep.discrepancy;
  out.max_gate_discrepancy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out.value.push_back(encoding_status(s, c.agents[i].output).value);
    switch (c.agents[i].kind) {
      case KDivGateKind::Projection1: out.projection_residual[0] = rep.discrepancy[i]; break;
      case KDivGateKind::Projection2: out.projection_residual[1] = rep.discrepancy[i]; break;
      default: out.max_gate_discrepancy = max(out.max_gate_discrepancy, rep.discrepancy[i]);
    }
  }
  if (out.max_gate_discrepancy != 0) throw std::logic_error("forward placement left a gate agent unbalanced");
  return out;
}

// ---------------------------------------------------------------------------
// Decoding

Solution canonicalize_labels(const Solution& s, std::array<Label, 3>* relabel) {
  for (Label l : s.labels)
    if (l < 0 || l > 2) throw ArityError("three-label solution expected");
  WellCut w = well_cut(s, KDivLayout::kOut1);
  if (!w.ok) throw DomainError("Out_1 is not cut exactly twice in its well-cut ranges");
  if (w.labels[0] == w.labels[1] || w.labels[1] == w.labels[2] || w.labels[0] == w.labels[2])
    throw DomainError("Out_1 does not show three distinct labels");
  std::array<Label, 3> map{};
  for (Label t = 0; t < 3; ++t) map[w.labels[t]] = t;
  Solution out = s;
  for (auto& l : out.labels) l = map[l];
  if (relabel) *relabel = map;
  return out;
}

FixedPointDecode decode_fixed_point(const Solution& s, const TruncCircuit* circuit) {
  FixedPointDecode d;
  d.canonical = canonicalize_labels(s, &d.relabel);
  for (int i = 0; i < 2; ++i) {
    const int left = i == 0 ? KDivLayout::kIn1 : KDivLayout::kIn2;
    auto st = encoding_status(d.canonical, left);
    if (!st.valid) throw DomainError("In_" + std::to_string(i + 1) + " is not a valid encoding");
    d.x[i] = st.value;
  }
  if (circuit && eval_trunc(*circuit, d.x) != d.x)
    throw DomainError("decoded point " + ccut::to_string(d.x[0]) + ", " + ccut::to_string(d.x[1]) +
                      " is not a fixed point");
  return d;
}

FixedPointDecode decode_fixed_point(const CompiledFixp& c, const Solution& s) {
  check_solution(c.instance, s);
  FixedPointDecode d = decode_fixed_point(s, nullptr);
  for (const auto& a : c.agents)
    if (!encoding_status(d.canonical, a.output).valid)
      throw DomainError("interval at " + ccut::to_string(a.output) + " (" + a.role + ") is not a valid encoding");
  if (eval_trunc(c.circuit, d.x) != d.x)
    throw DomainError("decoded point " + ccut::to_string(d.x[0]) + ", " + ccut::to_string(d.x[1]) +
                      " is not a fixed point");
  return d;
}

json to_json(const FixedPointDecode& d) {
  json relabel = json::object();
  for (Label l = 0; l < 3; ++l) relabel[label_name(l, 3)] = label_name(d.relabel[l], 3);
  return {{"x", {to_json(d.x[0]), to_json(d.x[1])}}, {"relabel", std::move(relabel)},
          {"canonical", to_json(d.canonical, 3)}};
}

}  // namespace ccut
