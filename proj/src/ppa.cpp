#include "ccut/ppa.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "ccut/oracle.hpp"

namespace ccut {

namespace {

int sign_of(Label l) { return l == 0 ? 1 : -1; }

Rational clip(const Rational& v, const Rational& bound) {
  if (v > bound) return bound;
  if (v < -bound) return -bound;
  return v;
}

Rational clamp(const Rational& v, const Rational& lo, const Rational& hi) { return v < lo ? lo : (v > hi ? hi : v); }

int parse_wire(const std::string& tok, int line) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 0)
    throw ParseError("circuit line " + std::to_string(line) + ": bad wire id '" + tok + "'");
  return v;
}

const char* op_name(BoolOp op) {
  switch (op) {
    case BoolOp::Not: return "NOT";
    case BoolOp::And: return "AND";
    case BoolOp::Or: return "OR";
  }
  return "?";
}

// Cells of [side]^N in lexicographic order of the last coordinate fastest.
void for_each_cell(int N, int side, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> x(N, 1);
  for (;;) {
    fn(x);
    int i = N - 1;
    while (i >= 0 && x[i] == side) x[i--] = 1;
    if (i < 0) return;
    ++x[i];
  }
}

// Builder for circuits with fresh wire ids.
struct CircuitBuilder {
  BoolCircuit c;
  int next = 1;

  int input() {
    c.inputs.push_back(next);
    return next++;
  }
  int gate(BoolOp op, int a, int b = 0) {
    c.gates.push_back(BoolGate{op, a, b, next});
    return next++;
  }
  int not_(int a) { return gate(BoolOp::Not, a); }
  int and_(int a, int b) { return gate(BoolOp::And, a, b); }
  int or_(int a, int b) { return gate(BoolOp::Or, a, b); }
  int xor_(int a, int b) {
    int either = or_(a, b);
    int both = and_(a, b);
    return and_(either, not_(both));
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Boolean circuits

BoolCircuit BoolCircuit::parse(std::string_view text) {
  BoolCircuit c;
  std::set<int> defined;
  auto define = [&](int w, int line) {
    if (!defined.insert(w).second)
      throw ParseError("circuit line " + std::to_string(line) + ": wire " + std::to_string(w) + " defined twice");
  };
  auto read = [&](int w, int line) {
    if (!defined.count(w))
      throw ParseError("circuit line " + std::to_string(line) + ": wire " + std::to_string(w) + " read before definition");
  };
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string& kw = tok[0];
    auto fail = [&](const std::string& why) {
      throw ParseError("circuit line " + std::to_string(line) + ": " + why);
    };
    if (kw == "INPUT" || kw == "OUTPUT") {
      if (tok.size() != 2) fail(kw + " takes one wire");
      int w = parse_wire(tok[1], line);
      if (kw == "INPUT") {
        define(w, line);
        c.inputs.push_back(w);
      } else {
        read(w, line);
        c.outputs.push_back(w);
      }
    } else if (kw == "NOT" || kw == "AND" || kw == "OR") {
      std::size_t arity = kw == "NOT" ? 1 : 2;
      if (tok.size() != arity + 3 || tok[arity + 1] != "->") fail(kw + " expects " + std::to_string(arity) + " input(s) and '-> out'");
      BoolGate g{kw == "NOT" ? BoolOp::Not : (kw == "AND" ? BoolOp::And : BoolOp::Or), 0, 0, 0};
      g.a = parse_wire(tok[1], line);
      read(g.a, line);
      if (arity == 2) {
        g.b = parse_wire(tok[2], line);
        read(g.b, line);
      }
      g.out = parse_wire(tok[arity + 2], line);
      define(g.out, line);
      c.gates.push_back(g);
    } else {
      fail("unknown keyword '" + kw + "'");
    }
  }
  return c;
}

std::string BoolCircuit::to_text() const {
  std::ostringstream out;
  for (int w : inputs) out << "INPUT " << w << "\n";
  for (const auto& g : gates) {
    out << op_name(g.op) << " " << g.a;
    if (g.op != BoolOp::Not) out << " " << g.b;
    out << " -> " << g.out << "\n";
  }
  for (int w : outputs) out << "OUTPUT " << w << "\n";
  return out.str();
}

std::vector<bool> BoolCircuit::evaluate(const std::vector<bool>& in) const {
  if (in.size() != inputs.size())
    throw ArityError("circuit expects " + std::to_string(inputs.size()) + " inputs, got " + std::to_string(in.size()));
  std::vector<char> val(static_cast<std::size_t>(next_wire()), 0);
  for (std::size_t t = 0; t < in.size(); ++t) val[inputs[t]] = in[t];
  for (const auto& g : gates) {
    switch (g.op) {
      case BoolOp::Not: val[g.out] = !val[g.a]; break;
      case BoolOp::And: val[g.out] = val[g.a] && val[g.b]; break;
      case BoolOp::Or: val[g.out] = val[g.a] || val[g.b]; break;
    }
  }
  std::vector<bool> out;
  for (int w : outputs) out.push_back(val[w] != 0);
  return out;
}

int BoolCircuit::next_wire() const {
  int m = -1;
  for (int w : inputs) m = std::max(m, w);
  for (const auto& g : gates) m = std::max({m, g.a, g.b, g.out});
  for (int w : outputs) m = std::max(m, w);
  return m + 1;
}

// ---------------------------------------------------------------------------
// Tucker labelings

int TuckerLabeling::evaluate(const std::vector<int>& cell) const {
  if (static_cast<int>(cell.size()) != N) throw ArityError("cell has the wrong dimension");
  std::vector<bool> bits;
  for (int r : cell) {
    if (r < 1 || r > side) throw DomainError("cell coordinate " + std::to_string(r) + " outside [1, " + std::to_string(side) + "]");
    int v = r - 1;
    bits.push_back(v & 4);
    bits.push_back(v & 2);
    bits.push_back(v & 1);
  }
  return decode_label_bits(circuit.evaluate(bits));
}

bool TuckerLabeling::on_boundary(const std::vector<int>& cell) const {
  return std::any_of(cell.begin(), cell.end(), [&](int r) { return r == 1 || r == side; });
}

std::vector<int> TuckerLabeling::antipode(const std::vector<int>& cell) const {
  std::vector<int> out;
  for (int r : cell) out.push_back(side + 1 - r);
  return out;
}

void TuckerLabeling::validate() const {
  if (N < 1) throw DomainError("labeling dimension must be >= 1");
  if (side < 2 || side > 8) throw DomainError("grid side must be in [2, 8]");
  if (static_cast<int>(circuit.inputs.size()) != 3 * N) throw ArityError("labeling circuit needs 3N inputs");
  if (static_cast<int>(circuit.outputs.size()) != 2 * N) throw ArityError("labeling circuit needs 2N outputs");
}

int decode_label_bits(const std::vector<bool>& y) {
  if (y.empty() || y.size() % 2) throw ArityError("label encoding needs 2N bits");
  const int N = static_cast<int>(y.size() / 2);
  for (int sign : {1, -1}) {
    bool base = sign == 1;
    int claimant = 0, others = 0;
    for (int i = 0; i < N; ++i) {
      bool a = y[2 * i], b = y[2 * i + 1];
      if (a == base && b == base) claimant = claimant ? -1 : i + 1;
      else if (a == base && b != base) ++others;
    }
    if (claimant > 0 && others == N - 1) return sign * claimant;
  }
  throw DomainError("malformed label encoding");
}

std::vector<bool> encode_label_bits(int label, int N) {
  if (label == 0 || std::abs(label) > N) throw DomainError("label outside +-[1, N]");
  const int i = std::abs(label) - 1;
  std::vector<bool> y;
  for (int l = 0; l < N; ++l) {
    y.push_back(true);
    y.push_back(l == i);
  }
  if (label < 0) y.flip();
  return y;
}

std::vector<std::vector<int>> antisymmetry_violations(const TuckerLabeling& lab) {
  std::vector<std::vector<int>> out;
  for_each_cell(lab.N, lab.side, [&](const std::vector<int>& x) {
    if (lab.on_boundary(x) && lab.evaluate(lab.antipode(x)) != -lab.evaluate(x)) out.push_back(x);
  });
  return out;
}

bool is_tucker_solution(const TuckerLabeling& lab, const std::vector<int>& u, const std::vector<int>& w) {
  if (static_cast<int>(u.size()) != lab.N || static_cast<int>(w.size()) != lab.N) return false;
  for (int i = 0; i < lab.N; ++i) {
    if (u[i] < 1 || u[i] > lab.side || w[i] < 1 || w[i] > lab.side) return false;
    if (std::abs(u[i] - w[i]) > 1) return false;
  }
  return lab.evaluate(u) == -lab.evaluate(w);
}

int snake_coordinate(int r) {
  if (r < 1 || r > 8) throw DomainError("cell coordinate outside [1, 8]");
  return r >= 5 ? r - 1 : r;
}

TuckerLabeling snake_embed(const TuckerLabeling& lab7) {
  lab7.validate();
  if (lab7.side != 7) throw DomainError("snake embedding maps [7]^N labelings");
  CircuitBuilder cb;
  std::unordered_map<int, int> wire;  // old id -> new id
  for (int i = 0; i < lab7.N; ++i) {
    int a = cb.input(), b = cb.input(), c = cb.input();
    // r - 1 -> r - 2 when the top bit is set (cells 5..8 -> 4..7)
    int c2 = cb.xor_(c, a);
    int borrow = cb.and_(a, cb.not_(c));
    int b2 = cb.xor_(b, borrow);
    int a2 = cb.and_(a, cb.or_(b, c));
    wire[lab7.circuit.inputs[3 * i]] = a2;
    wire[lab7.circuit.inputs[3 * i + 1]] = b2;
    wire[lab7.circuit.inputs[3 * i + 2]] = c2;
  }
  for (const auto& g : lab7.circuit.gates) {
    int a = wire.at(g.a), b = g.op == BoolOp::Not ? 0 : wire.at(g.b);
    wire[g.out] = cb.gate(g.op, a, b);
  }
  for (int w : lab7.circuit.outputs) cb.c.outputs.push_back(wire.at(w));
  return TuckerLabeling{lab7.N, 8, std::move(cb.c)};
}

TuckerLabeling labeling_from_function(int N, int side, const std::function<int(const std::vector<int>&)>& label) {
  if (N < 1 || side < 2 || side > 8) throw DomainError("labeling needs N >= 1 and side in [2, 8]");
  CircuitBuilder cb;
  std::vector<int> pos, neg;
  for (int t = 0; t < 3 * N; ++t) pos.push_back(cb.input());
  for (int t = 0; t < 3 * N; ++t) neg.push_back(cb.not_(pos[t]));
  std::vector<std::vector<int>> terms(2 * N);  // minterms per output bit
  for_each_cell(N, side, [&](const std::vector<int>& x) {
    int l = label(x);
    if (l == 0 || std::abs(l) > N) throw DomainError("labeling function returned " + std::to_string(l));
    auto y = encode_label_bits(l, N);
    int term = -1;
    for (int t = 0; t < 2 * N; ++t) {
      if (!y[t]) continue;
      if (term < 0) {
        for (int i = 0; i < N; ++i)
          for (int bit = 0; bit < 3; ++bit) {
            bool set = ((x[i] - 1) >> (2 - bit)) & 1;
            int lit = set ? pos[3 * i + bit] : neg[3 * i + bit];
            term = term < 0 ? lit : cb.and_(term, lit);
          }
      }
      terms[t].push_back(term);
    }
  });
  int zero = -1;
  for (int t = 0; t < 2 * N; ++t) {
    int out;
    if (terms[t].empty()) {
      if (zero < 0) zero = cb.and_(pos[0], neg[0]);
      out = zero;
    } else {
      out = terms[t][0];
      for (std::size_t s = 1; s < terms[t].size(); ++s) out = cb.or_(out, terms[t][s]);
    }
    cb.c.outputs.push_back(out);
  }
  return TuckerLabeling{N, side, std::move(cb.c)};
}

TuckerLabeling demo_labeling(int N) {
  if (N < 1) throw DomainError("labeling dimension must be >= 1");
  CircuitBuilder cb;
  std::vector<int> in;
  for (int t = 0; t < 3 * N; ++t) in.push_back(cb.input());
  int n = cb.not_(in[0]);
  int m = cb.or_(n, n);
  cb.c.outputs = {m, m};
  if (N > 1) {
    int not_m = cb.not_(m);
    for (int l = 1; l < N; ++l) {
      cb.c.outputs.push_back(m);
      cb.c.outputs.push_back(not_m);
    }
  }
  return TuckerLabeling{N, 8, std::move(cb.c)};
}

// ---------------------------------------------------------------------------
// Reference simulation

const std::vector<Rational>& bit_boundaries() {
  static const std::vector<Rational> b = [] {
    std::vector<Rational> v;
    for (int t = -3; t <= 3; ++t) v.push_back(frac(t, 4));
    return v;
  }();
  return b;
}

Rational distance_to_boundaries(const Rational& z) {
  Rational best = abs(z - bit_boundaries()[0]);
  for (const auto& b : bit_boundaries()) best = min(best, abs(z - b));
  return best;
}

BitExtraction extract_bits(const Rational& z, const Rational& g) {
  if (z < -1 || z > 1) throw DomainError("bit extraction needs z in [-1, 1]");
  BitExtraction e;
  Integer r = floor(4 * z) + 5;
  if (r > 8) r = 8;
  e.cell = static_cast<int>(r.get_si());
  e.cell_left = frac(e.cell - 5, 4);
  e.cell_right = frac(e.cell - 4, 4);
  for (int bit = 0; bit < 3; ++bit) e.bits[bit] = (((e.cell - 1) >> (2 - bit)) & 1) ? 1 : -1;
  e.failed = distance_to_boundaries(z) < 8 * g;
  return e;
}

ReductionParams ReductionParams::make(int N, const Rational& eps) {
  if (N < 1) throw DomainError("dimension must be >= 1");
  if (eps <= 0 || eps > frac(1, Integer(16384) * N * N))
    throw DomainError("eps must lie in (0, 1/(2^14 N^2)], got " + to_string(eps));
  ReductionParams p;
  p.N = N;
  p.p = 4 * N * N;
  p.alpha = frac(1, 16 * p.p);
  p.eps = eps;
  p.g = 16 * eps;
  p.mul_factor = ceil(Rational(1 / p.g)).get_si();
  p.q = 0;
  return p;
}

SimulationResult simulate_phases(const TuckerLabeling& lab, const ReductionParams& params, const std::vector<Rational>& x,
                                 int j, int const_sign) {
  if (static_cast<int>(x.size()) != lab.N) throw ArityError("point has the wrong dimension");
  if (const_sign != 1 && const_sign != -1) throw DomainError("const sign must be +-1");
  SimulationResult r;
  r.outputs.assign(lab.N, 0);
  for (int i = 0; i < lab.N; ++i) {
    Rational z = truncate(const_sign * x[i] + j * params.alpha);
    auto e = extract_bits(z, params.g);
    r.failed = r.failed || e.failed;
    r.cell.push_back(e.cell);
    r.x_hat.push_back(const_sign * z);
    r.z.push_back(std::move(z));
    r.bits.push_back(e);
  }
  if (r.failed) return r;
  r.label = lab.evaluate(r.cell);
  int i = std::abs(r.label) - 1;
  r.outputs[i] = const_sign * (r.label > 0 ? 1 : -1);
  return r;
}

// ---------------------------------------------------------------------------
// Gate network

Valuation GateAgent::valuation(const std::vector<UnitSlot>& slots) const {
  std::vector<Block> blocks;
  if (kind == AgentKind::Volume) {
    Rational h = 1 / (2 - delta);
    const Rational& in = slots[inputs[0]].left;
    if (delta < 1) blocks.push_back(Block{in + delta / 2, in + 1 - delta / 2, h});
    blocks.push_back(Block{forced_left, forced_right, h});
  } else {
    Rational h = frac(1, 5);
    const Rational& in = slots[inputs[0]].left;
    blocks.push_back(Block{in, in + 2, h});
    blocks.push_back(Block{forced_left, forced_right, h});
  }
  std::sort(blocks.begin(), blocks.end(), [](const Block& a, const Block& b) { return a.left < b.left; });
  return Valuation(std::move(blocks));
}

GateNetwork::GateNetwork(Rational eps) : eps_(std::move(eps)) {}

void GateNetwork::claim(const Rational& left, const Rational& right) {
  auto next = claimed_.lower_bound(left);
  if (next != claimed_.end() && next->first < right)
    throw DomainError("interval [" + to_string(left) + ", " + to_string(right) + "] overlaps an existing slot");
  if (next != claimed_.begin()) {
    auto prev = std::prev(next);
    if (left < prev->second)
      throw DomainError("interval [" + to_string(left) + ", " + to_string(right) + "] overlaps an existing slot");
  }
  claimed_.emplace(left, right);
}

int GateNetwork::new_slot(std::optional<Rational> at, std::string name) {
  Rational left = at ? *at : cursor_;
  claim(left, left + 1);
  if (!at) cursor_ += 2;
  slots_.push_back(UnitSlot{left, std::move(name), false});
  return static_cast<int>(slots_.size()) - 1;
}

int GateNetwork::external_slot(const Rational& left, std::string name) {
  claim(left, left + 1);
  slots_.push_back(UnitSlot{left, std::move(name), true});
  return static_cast<int>(slots_.size()) - 1;
}

int GateNetwork::volume(int in, const Rational& delta, std::optional<Rational> at, std::string role) {
  if (in < 0 || in >= static_cast<int>(slots_.size())) throw DomainError("volume gate reads an unknown slot");
  if (delta < 2 * eps_ || delta > 1) throw DomainError("volume gate needs delta in [2 eps, 1], got " + to_string(delta));
  int out = new_slot(at, role);
  GateAgent a;
  a.kind = AgentKind::Volume;
  a.delta = delta;
  a.inputs = {in};
  a.output = out;
  a.forced_left = slots_[out].left;
  a.forced_right = slots_[out].left + 1;
  a.simulator = simulator_;
  a.role = std::move(role);
  agents_.push_back(std::move(a));
  return out;
}

int GateNetwork::neg(int in, std::optional<Rational> at) { return volume(in, 2 * eps_, std::move(at), "neg"); }

int GateNetwork::constant(const Rational& zeta, int ref) {
  if (zeta < -1 || zeta > 1) throw DomainError("constant must lie in [-1, 1], got " + to_string(zeta));
  if (zeta > 0) return neg(constant(-zeta, ref));
  return volume(ref, max(1 + zeta, 2 * eps_), std::nullopt, "const");
}

int GateNetwork::add(int a, int b) {
  Rational base = cursor_;
  int na = neg(a, base);
  int nb = neg(b, base + 1);
  Rational j = base + 3;
  claim(j, j + 3);
  cursor_ = j + 4;
  slots_.push_back(UnitSlot{j + 1, "add", false});
  int out = static_cast<int>(slots_.size()) - 1;
  GateAgent g;
  g.kind = AgentKind::Add;
  g.inputs = {na, nb};
  g.output = out;
  g.forced_left = j;
  g.forced_right = j + 3;
  g.simulator = simulator_;
  g.role = "add";
  agents_.push_back(std::move(g));
  return out;
}

int GateNetwork::copy(int in, std::optional<Rational> at) { return neg(neg(in), std::move(at)); }

int GateNetwork::mul(int in, long k) {
  if (k < 1) throw DomainError("multiplication factor must be >= 1");
  int top = 0;
  while ((k >> (top + 1)) > 0) ++top;
  int acc = in;
  for (int bit = top - 1; bit >= 0; --bit) {
    acc = add(acc, acc);
    if ((k >> bit) & 1) acc = add(acc, in);
  }
  return acc;
}

int GateNetwork::not_gate(int a, int unit) {
  if (unit < 0 || unit >= static_cast<int>(slots_.size())) throw DomainError("unknown unit slot");
  return mul(neg(a), 2);
}

int GateNetwork::and_gate(int a, int b, int unit) {
  int sum = add(a, b);
  return mul(add(sum, constant(frac(-1, 2), unit)), 4);
}

int GateNetwork::or_gate(int a, int b, int unit) {
  int na = not_gate(a, unit);
  int nb = not_gate(b, unit);
  return not_gate(and_gate(na, nb, unit), unit);
}

int GateNetwork::make_gate(GateKind kind, const std::vector<int>& inputs, const Rational& param, int unit) {
  auto need = [&](std::size_t n) {
    if (inputs.size() != n) throw ArityError("gate expects " + std::to_string(n) + " input(s)");
  };
  switch (kind) {
    case GateKind::Volume: need(1); return volume(inputs[0], param);
    case GateKind::Neg: need(1); return neg(inputs[0]);
    case GateKind::Const: need(0); return constant(param, unit);
    case GateKind::Add: need(2); return add(inputs[0], inputs[1]);
    case GateKind::Copy: need(1); return copy(inputs[0]);
    case GateKind::Mul:
      need(1);
      if (param.get_den() != 1 || param < 1) throw DomainError("multiplication factor must be a positive integer");
      return mul(inputs[0], param.get_num().get_si());
    case GateKind::Not: need(1); return not_gate(inputs[0], unit);
    case GateKind::And: need(2); return and_gate(inputs[0], inputs[1], unit);
    case GateKind::Or: need(2); return or_gate(inputs[0], inputs[1], unit);
  }
  throw DomainError("unknown gate kind");
}

std::vector<Valuation> GateNetwork::valuations() const {
  std::vector<Valuation> out;
  out.reserve(agents_.size());
  for (const auto& a : agents_) out.push_back(a.valuation(slots_));
  return out;
}

NetworkValues evaluate_network(const GateNetwork& net, const std::vector<std::optional<Rational>>& external) {
  const auto& slots = net.slots();
  std::vector<std::optional<Rational>> val(slots.size());
  for (std::size_t t = 0; t < slots.size(); ++t)
    if (slots[t].external) {
      if (t >= external.size() || !external[t]) throw DomainError("no value for external slot '" + slots[t].name + "'");
      if (*external[t] < -1 || *external[t] > 1) throw DomainError("external value outside [-1, 1]");
      val[t] = external[t];
    }
  NetworkValues out;
  for (const auto& a : net.agents()) {
    for (int in : a.inputs)
      if (!val[in]) throw std::logic_error("gate reads a slot before it is written");
    if (a.kind == AgentKind::Volume) {
      Rational v = -clip(*val[a.inputs[0]], 1 - a.delta);
      out.forced.push_back(v);
      val[a.output] = std::move(v);
    } else {
      Rational s = -(*val[a.inputs[0]] + *val[a.inputs[1]]);
      val[a.output] = truncate(s);
      out.forced.push_back(std::move(s));
    }
  }
  for (auto& v : val) out.slot.push_back(v ? *v : Rational(0));
  return out;
}

std::vector<ValueRange> network_ranges(const GateNetwork& net, const std::vector<std::optional<ValueRange>>& external) {
  const auto& slots = net.slots();
  const Rational& eps = net.eps();
  std::vector<std::optional<ValueRange>> r(slots.size());
  for (std::size_t t = 0; t < slots.size(); ++t)
    if (slots[t].external) {
      if (t >= external.size() || !external[t]) throw DomainError("no range for external slot '" + slots[t].name + "'");
      r[t] = external[t];
    }
  for (const auto& a : net.agents()) {
    for (int in : a.inputs)
      if (!r[in]) throw std::logic_error("gate reads a slot before it is written");
    if (a.kind == AgentKind::Volume) {
      const auto& in = *r[a.inputs[0]];
      Rational slack = eps * (2 - a.delta), bound = 1 - a.delta;
      r[a.output] = ValueRange{max(Rational(-1), Rational(-clip(in.hi, bound) - slack)),
                               min(Rational(1), Rational(-clip(in.lo, bound) + slack))};
    } else {
      const auto& x = *r[a.inputs[0]];
      const auto& y = *r[a.inputs[1]];
      Rational lo = clamp(-(x.hi + y.hi) - 5 * eps, -3, 3), hi = clamp(-(x.lo + y.lo) + 5 * eps, -3, 3);
      r[a.output] = ValueRange{truncate(lo), truncate(hi)};
    }
  }
  std::vector<ValueRange> out;
  for (auto& v : r) out.push_back(v ? *v : ValueRange{0, 0});
  return out;
}

std::vector<ValueRange> certify_network(const GateNetwork& net, const std::vector<std::optional<ValueRange>>& external,
                                        int m) {
  if (m < 2) throw DomainError("certification grid needs m >= 2");
  const auto& slots = net.slots();
  const Rational& eps = net.eps();
  std::vector<std::optional<ValueRange>> r(slots.size());
  for (std::size_t t = 0; t < slots.size(); ++t)
    if (slots[t].external) {
      if (t >= external.size() || !external[t]) throw DomainError("no range for external slot '" + slots[t].name + "'");
      r[t] = external[t];
    }
  Rational domain = net.cursor();
  for (const auto& s : slots) domain = max(domain, Rational(s.left + 1));
  for (const auto& a : net.agents()) domain = max(domain, a.forced_right);

  for (const auto& a : net.agents()) {
    for (int in : a.inputs) {
      if (!r[in]) throw std::logic_error("gate reads a slot before it is written");
      if (!(slots[in].left + 1 <= a.forced_left)) throw std::logic_error("certification needs inputs left of the gate");
    }
    Instance inst;
    inst.domain_right = domain;
    inst.agents.push_back(a.valuation(slots));
    inst.cut_budget = 3;

    std::vector<std::vector<Rational>> corners;  // one value per input slot
    auto ends = [](const ValueRange& v) {
      std::vector<Rational> e{v.lo};
      if (v.hi != v.lo) e.push_back(v.hi);
      return e;
    };
    if (a.kind == AgentKind::Volume) {
      for (const auto& v : ends(*r[a.inputs[0]])) corners.push_back({v});
    } else {
      for (const auto& v0 : ends(*r[a.inputs[0]]))
        for (const auto& v1 : ends(*r[a.inputs[1]])) corners.push_back({v0, v1});
    }
    const Rational len = a.forced_right - a.forced_left;
    const Rational& out_left = slots[a.output].left;
    std::optional<ValueRange> got;
    for (const auto& corner : corners)
      for (Label first : {0, 1}) {
        std::vector<Rational> cuts;
        Label cur = first;
        for (std::size_t t = 0; t < corner.size(); ++t) {
          cuts.push_back(slots[a.inputs[t]].left + (1 + sign_of(cur) * corner[t]) / 2);
          cur ^= 1;
        }
        Solution fixed = Solution::alternating(cuts, first);
        Rational target;
        if (a.kind == AgentKind::Volume) {
          target = -clip(corner[0], 1 - a.delta);
        } else {
          target = -(corner[0] + corner[1]);
        }
        Rational centre = a.forced_left + (len + sign_of(cur) * target) / 2;
        Rational lo = max(a.forced_left, Rational(centre - 8 * eps));
        Rational hi = min(a.forced_right, Rational(centre + 8 * eps));
        auto ok = enumerate_gate_cuts(inst, 0, fixed, lo, hi, eps, m);
        if (ok.empty()) throw std::logic_error("no eps-satisfying position found on the certification grid");
        if ((lo > a.forced_left && ok.front() == lo) || (hi < a.forced_right && ok.back() == hi))
          throw std::logic_error("certification window does not enclose every satisfying position");
        for (const auto& pos : ok) {
          Rational v = encoded_value(insert_flip_cut(fixed, pos), out_left, out_left + 1);
          if (!got) got = ValueRange{v, v};
          else got = ValueRange{min(got->lo, v), max(got->hi, v)};
        }
      }
    r[a.output] = got;
  }
  std::vector<ValueRange> out;
  for (auto& v : r) out.push_back(v ? *v : ValueRange{0, 0});
  return out;
}

Solution place_network(const GateNetwork& net, const NetworkValues& values, const std::vector<int>& external_cut,
                       Label first) {
  struct Item {
    Rational left, len, target;
  };
  std::vector<Item> items;
  for (int t : external_cut) {
    if (t < 0 || t >= static_cast<int>(net.slots().size()) || !net.slots()[t].external)
      throw DomainError("external_cut lists a slot that is not external");
    items.push_back(Item{net.slots()[t].left, 1, values.slot[t]});
  }
  const auto& agents = net.agents();
  if (values.forced.size() != agents.size()) throw ArityError("values do not match the network");
  for (std::size_t a = 0; a < agents.size(); ++a)
    items.push_back(Item{agents[a].forced_left, agents[a].forced_right - agents[a].forced_left, values.forced[a]});
  std::stable_sort(items.begin(), items.end(), [](const Item& x, const Item& y) { return x.left < y.left; });
  std::vector<Rational> cuts;
  Label cur = first;
  for (const auto& it : items) {
    if (abs(it.target) > it.len) throw DomainError("target value does not fit its interval");
    cuts.push_back(it.left + (it.len + sign_of(cur) * it.target) / 2);
    cur ^= 1;
  }
  return Solution::alternating(std::move(cuts), first);
}

// ---------------------------------------------------------------------------
// Compilation

namespace {

struct SimulatorWiring {
  const TuckerLabeling& lab;
  const ReductionParams& params;
  const std::vector<int>& coordinate_slots;
};

// Builds simulator j at the network cursor; the final copies land at
// feedback_left[i] and their slot ids are returned per coordinate.
std::vector<int> build_simulator(GateNetwork& net, const SimulatorWiring& w, int j, int unit,
                                 const std::vector<Rational>& feedback_left) {
  const int N = w.lab.N;
  net.set_simulator(j);
  // phase 1: displacement
  int shift = net.constant(j * w.params.alpha, unit);
  std::vector<int> x_hat;
  for (int i = 0; i < N; ++i) x_hat.push_back(net.add(w.coordinate_slots[i], shift));
  // phase 2: three bits per coordinate, most significant first
  std::unordered_map<int, int> wire;
  const long K = w.params.mul_factor;
  for (int i = 0; i < N; ++i) {
    int b1 = net.mul(x_hat[i], K);
    int x1 = net.add(x_hat[i], net.constant(frac(-1, 2), b1));
    int b2 = net.mul(x1, K);
    int x2 = net.add(x1, net.constant(frac(-1, 4), b2));
    int b3 = net.mul(x2, K);
    wire[w.lab.circuit.inputs[3 * i]] = b1;
    wire[w.lab.circuit.inputs[3 * i + 1]] = b2;
    wire[w.lab.circuit.inputs[3 * i + 2]] = b3;
  }
  // phase 3: the labeling circuit
  for (const auto& g : w.lab.circuit.gates) {
    switch (g.op) {
      case BoolOp::Not: wire[g.out] = net.not_gate(wire.at(g.a), unit); break;
      case BoolOp::And: wire[g.out] = net.and_gate(wire.at(g.a), wire.at(g.b), unit); break;
      case BoolOp::Or: wire[g.out] = net.or_gate(wire.at(g.a), wire.at(g.b), unit); break;
    }
  }
  // phase 4: y_i^a + y_i^b, copied into the feedback region
  std::vector<int> out;
  for (int i = 0; i < N; ++i) {
    int s = net.add(wire.at(w.lab.circuit.outputs[2 * i]), wire.at(w.lab.circuit.outputs[2 * i + 1]));
    out.push_back(net.copy(s, feedback_left[i]));
  }
  net.set_simulator(-1);
  return out;
}

json range_json(const Rational& l, const Rational& r) { return json::array({to_json(l), to_json(r)}); }

std::string agent_kind_name(AgentKind k) { return k == AgentKind::Volume ? "volume" : "add"; }

}  // namespace

json CompiledCH::layout_json() const {
  json j;
  j["N"] = params.N;
  j["simulators"] = params.p;
  j["alpha"] = to_json(params.alpha);
  j["eps"] = to_json(params.eps);
  j["gate_error"] = to_json(params.g);
  j["mul_factor"] = params.mul_factor;
  j["simulator_length"] = to_json(params.q);
  j["domain_right"] = to_json(instance.domain_right);
  j["cut_budget"] = instance.cut_budget;
  j["circuit"] = labeling.circuit.to_text();
  json regions_j = json::array();
  for (const auto& r : regions) regions_j.push_back({{"name", r.name}, {"interval", range_json(r.left, r.right)}});
  j["regions"] = std::move(regions_j);
  json coord = json::array(), consts = json::array();
  for (int s : coordinate_slots) coord.push_back(range_json(network.slots()[s].left, network.slots()[s].left + 1));
  for (int s : const_slots) consts.push_back(range_json(network.slots()[s].left, network.slots()[s].left + 1));
  j["coordinate_cells"] = std::move(coord);
  j["const_cells"] = std::move(consts);
  json agents_j = json::array();
  const auto& ga = network.agents();
  for (std::size_t a = 0; a < ga.size(); ++a) {
    json e{{"index", a}, {"kind", agent_kind_name(ga[a].kind)}, {"role", ga[a].role}, {"simulator", ga[a].simulator}};
    e["forced"] = range_json(ga[a].forced_left, ga[a].forced_right);
    if (ga[a].kind == AgentKind::Volume) e["delta"] = to_json(ga[a].delta);
    json in = json::array();
    for (int s : ga[a].inputs) in.push_back(to_json(network.slots()[s].left));
    e["inputs"] = std::move(in);
    e["output"] = to_json(network.slots()[ga[a].output].left);
    agents_j.push_back(std::move(e));
  }
  for (std::size_t i = 0; i < feedback_agents.size(); ++i) {
    const auto& blk = instance.agents[feedback_agents[i]].blocks().front();
    agents_j.push_back(json{{"index", feedback_agents[i]},
                            {"kind", "feedback"},
                            {"role", "feedback " + std::to_string(i + 1)},
                            {"simulator", -1},
                            {"support", range_json(blk.left, blk.right)}});
  }
  j["agents"] = std::move(agents_j);
  return j;
}

CompiledCH compile_tucker(const TuckerLabeling& lab, const Rational& eps) {
  lab.validate();
  if (lab.side != 8) throw DomainError("compile_tucker needs a labeling of [8]^N (apply snake_embed to [7]^N)");
  CompiledCH c;
  c.params = ReductionParams::make(lab.N, eps);
  c.labeling = lab;
  const int N = lab.N, p = c.params.p;

  auto add_externals = [&](GateNetwork& net, std::vector<int>& coord, std::vector<int>& consts) {
    for (int i = 1; i <= N; ++i) coord.push_back(net.external_slot(i - 1, "x" + std::to_string(i)));
    for (int j = 1; j <= p; ++j) consts.push_back(net.external_slot(N + j - 1, "const " + std::to_string(j)));
  };

  // Dry run to measure the length of one simulator.
  Rational start = N + p;
  {
    GateNetwork probe(eps);
    std::vector<int> coord, consts;
    add_externals(probe, coord, consts);
    probe.set_cursor(start);
    std::vector<Rational> far;
    for (int i = 0; i < N; ++i) far.push_back(Rational(-10 - 2 * i));
    build_simulator(probe, SimulatorWiring{lab, c.params, coord}, 1, consts[0], far);
    c.params.q = probe.cursor() - start;
  }

  const Rational& q = c.params.q;
  const Rational feedback_base = start + p * q;
  c.network = GateNetwork(eps);
  add_externals(c.network, c.coordinate_slots, c.const_slots);
  c.feedback_slots.assign(N, std::vector<int>(p, -1));
  for (int j = 1; j <= p; ++j) {
    Rational left = start + (j - 1) * q;
    c.network.set_cursor(left);
    std::vector<Rational> targets;
    for (int i = 0; i < N; ++i) targets.push_back(feedback_base + i * p + (j - 1));
    auto outs = build_simulator(c.network, SimulatorWiring{lab, c.params, c.coordinate_slots}, j, c.const_slots[j - 1], targets);
    if (c.network.cursor() != left + q) throw std::logic_error("simulators differ in length");
    for (int i = 0; i < N; ++i) c.feedback_slots[i][j - 1] = outs[i];
  }

  c.instance.k = 2;
  c.instance.agents = c.network.valuations();
  for (int i = 0; i < N; ++i) {
    c.feedback_agents.push_back(c.instance.agents.size());
    Rational left = feedback_base + i * p;
    c.instance.agents.push_back(Valuation::uniform(left, left + p));
  }
  c.instance.domain_right = feedback_base + N * p;
  c.instance.cut_budget = static_cast<int>(c.instance.n());

  c.regions.push_back(Region{"coordinate-encoding", 0, N});
  c.regions.push_back(Region{"constant-creation", N, N + p});
  for (int j = 1; j <= p; ++j)
    c.regions.push_back(Region{"simulator " + std::to_string(j), start + (j - 1) * q, start + j * q});
  for (int i = 1; i <= N; ++i)
    c.regions.push_back(Region{"feedback " + std::to_string(i), feedback_base + (i - 1) * p, feedback_base + i * p});
  return c;
}

LayoutAudit audit_layout(const CompiledCH& c) {
  LayoutAudit out;
  out.agents = c.instance.n();
  out.gate_agents = c.network.agents().size();
  out.forced_intervals = out.gate_agents;
  for (std::size_t a = 0; a < c.instance.n(); ++a) {
    const auto& blocks = c.instance.agents[a].blocks();
    bool ok = blocks.size() <= 2;
    for (const auto& b : blocks) ok = ok && b.height == blocks.front().height;
    if (!ok) {
      out.two_block_uniform = false;
      out.problems.push_back("agent " + std::to_string(a) + " is not two-block uniform");
    }
  }
  std::vector<std::pair<Rational, Rational>> forced;
  for (const auto& a : c.network.agents()) forced.emplace_back(a.forced_left, a.forced_right);
  std::sort(forced.begin(), forced.end());
  const Rational reserved = c.params.N + c.params.p;
  for (std::size_t t = 0; t < forced.size(); ++t) {
    if (forced[t].first < reserved) {
      out.forced_disjoint = false;
      out.problems.push_back("forced interval at " + to_string(forced[t].first) + " enters the encoding regions");
    }
    if (forced[t].second > c.instance.domain_right) {
      out.forced_disjoint = false;
      out.problems.push_back("forced interval at " + to_string(forced[t].first) + " leaves the domain");
    }
    if (t > 0 && forced[t].first < forced[t - 1].second) {
      out.forced_disjoint = false;
      out.problems.push_back("forced intervals at " + to_string(forced[t - 1].first) + " and " +
                             to_string(forced[t].first) + " overlap");
    }
  }
  out.cut_accounting = out.agents - static_cast<std::size_t>(c.params.N) == out.forced_intervals &&
                       c.instance.cut_budget == static_cast<int>(out.agents);
  if (!out.cut_accounting) out.problems.push_back("cut budget does not match one cut per forced interval plus N");
  return out;
}

ForwardPlacement forward_place(const CompiledCH& c, const std::vector<Rational>& x, int const_sign) {
  const int N = c.params.N;
  if (static_cast<int>(x.size()) != N) throw ArityError("point has the wrong dimension");
  if (const_sign != 1 && const_sign != -1) throw DomainError("const sign must be +-1");
  std::vector<std::optional<Rational>> ext(c.network.slots().size());
  for (int i = 0; i < N; ++i) {
    if (x[i] < -1 || x[i] > 1) throw DomainError("point coordinates must lie in [-1, 1]");
    ext[c.coordinate_slots[i]] = x[i];
  }
  for (int s : c.const_slots) ext[s] = Rational(const_sign);
  ForwardPlacement out;
  out.values = evaluate_network(c.network, ext);
  // The constant cells carry no cut, so the label there must be the const sign
  // after the N coordinate cuts.
  Label first = static_cast<Label>(const_sign == 1 ? N % 2 : 1 - N % 2);
  out.solution = place_network(c.network, out.values, c.coordinate_slots, first);
  const auto& slots = c.network.slots();
  for (std::size_t t = 0; t < slots.size(); ++t)
    if (encoded_value(out.solution, slots[t].left, slots[t].left + 1) != out.values.slot[t])
      throw std::logic_error("placement does not reproduce the value of slot '" + slots[t].name + "'");
  out.max_gate_imbalance = 0;
  for (std::size_t a = 0; a < c.network.agents().size(); ++a)
    out.max_gate_imbalance = max(out.max_gate_imbalance, abs(balance(c.instance, a, out.solution)));
  for (auto a : c.feedback_agents) out.feedback_balance.push_back(balance(c.instance, a, out.solution));
  return out;
}

DecodeResult decode_solution(const CompiledCH& c, const Solution& s) {
  check_solution(c.instance, s);
  if (c.instance.k != 2) throw ArityError("decoding needs two labels");
  const int N = c.params.N, p = c.params.p;
  DecodeResult d;
  for (int i = 0; i < N; ++i) d.x.push_back(encoded_value(s, i, i + 1));

  auto count_inside = [&](const Rational& l, const Rational& r) {
    auto lo = std::upper_bound(s.cuts.begin(), s.cuts.end(), l);
    auto hi = std::lower_bound(s.cuts.begin(), s.cuts.end(), r);
    return static_cast<int>(std::max<long>(0, hi - lo));
  };
  std::vector<char> corrupted(p + 1, 0);
  int covered = 0;
  for (const auto& a : c.network.agents()) {
    int n = count_inside(a.forced_left, a.forced_right);
    covered += std::min(n, 1);
    d.stray_cuts += std::max(0, n - 1);
    if (n >= 2 && a.simulator >= 1) corrupted[a.simulator] = 1;
  }
  int in_encoding = static_cast<int>(std::upper_bound(s.cuts.begin(), s.cuts.end(), Rational(N)) - s.cuts.begin());
  int inside_forced = covered + d.stray_cuts;
  d.stray_cuts += static_cast<int>(s.cuts.size()) - in_encoding - inside_forced;
  for (int j = 1; j <= p; ++j) {
    Rational l = N + j - 1;
    if (count_inside(l, l + 1) > 0) {
      corrupted[j] = 1;
      d.const_sign.push_back(0);
    } else {
      d.const_sign.push_back(sign_of(s.label_right_of(l)));
    }
    if (corrupted[j]) d.corrupted.push_back(j);
  }
  std::vector<std::vector<int>> cells(p);
  d.effective_label.assign(p, 0);
  for (int j = 1; j <= p; ++j) {
    if (corrupted[j]) continue;
    auto sim = simulate_phases(c.labeling, c.params, d.x, j, d.const_sign[j - 1]);
    if (sim.failed) continue;
    cells[j - 1] = sim.cell;
    d.effective_label[j - 1] = d.const_sign[j - 1] * sim.label;
  }
  for (int j = 0; j < p && d.status != DecodeStatus::Pair; ++j) {
    if (!d.effective_label[j]) continue;
    for (int l = j + 1; l < p; ++l) {
      if (!d.effective_label[l] || d.effective_label[j] != -d.effective_label[l]) continue;
      std::vector<int> u = cells[j];
      std::vector<int> w = d.const_sign[j] == d.const_sign[l] ? cells[l] : c.labeling.antipode(cells[l]);
      if (is_tucker_solution(c.labeling, u, w)) {
        d.status = DecodeStatus::Pair;
        d.u = std::move(u);
        d.w = std::move(w);
        d.message = "simulators " + std::to_string(j + 1) + " and " + std::to_string(l + 1) + " disagree";
        break;
      }
    }
  }
  if (d.status == DecodeStatus::Pair) return d;
  for (std::size_t i = 0; i < c.feedback_agents.size(); ++i) {
    Rational b = balance(c.instance, c.feedback_agents[i], s);
    if (abs(b) > c.params.eps) {
      d.status = DecodeStatus::FeedbackViolation;
      d.message = "feedback agent " + std::to_string(i + 1) + " has imbalance " + to_string(b);
      return d;
    }
  }
  d.status = DecodeStatus::NoPair;
  d.message = "no pair of simulators with opposite labels";
  return d;
}

std::string to_string(DecodeStatus s) {
  switch (s) {
    case DecodeStatus::Pair: return "pair";
    case DecodeStatus::FeedbackViolation: return "feedback-violation";
    case DecodeStatus::NoPair: return "no-pair";
  }
  return "?";
}

json to_json(const DecodeResult& d) {
  json j;
  j["status"] = to_string(d.status);
  j["u"] = d.u;
  j["w"] = d.w;
  json x = json::array();
  for (const auto& v : d.x) x.push_back(to_json(v));
  j["x"] = std::move(x);
  j["stray_cuts"] = d.stray_cuts;
  j["corrupted"] = d.corrupted;
  j["const_sign"] = d.const_sign;
  j["effective_label"] = d.effective_label;
  j["message"] = d.message;
  return j;
}

}  // namespace ccut
