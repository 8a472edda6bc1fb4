#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccut/core.hpp"
#include "ccut/io.hpp"

namespace ccut {

using Point2 = std::array<Rational, 2>;

// ---------------------------------------------------------------------------
// Circuits

// Line format (wires are identifiers):
//   IN x1 / IN x2            the two inputs, in order
//   ADD a b -> c             c = T[a + b]
//   MUL p/q a -> b           b = T[(p/q) a]
//   CONST p/q -> b           b = p/q, which must lie in [-1, 1]
//   OUT a / OUT b            the two outputs, in order
// Blank lines and '#' comments are ignored; every wire is defined once before
// it is read.
enum class TruncOp { Add, Mul, Const };

struct TruncGate {
  TruncOp op = TruncOp::Add;
  std::string a, b;  // inputs (b only for ADD; none for CONST)
  Rational zeta;     // MUL factor or CONST value
  std::string out;
};

struct TruncCircuit {
  std::array<std::string, 2> inputs;
  std::vector<TruncGate> gates;
  std::array<std::string, 2> outputs;

  static TruncCircuit parse(std::string_view text);
  std::string to_text() const;
  void validate() const;  // throws ParseError on a malformed circuit
};

// Exact evaluation of F_C with truncated gates.
Point2 eval_trunc(const TruncCircuit& c, const Point2& x);

// Same format plus "MAX a b -> c"; gates are exact (no truncation) and
// constants are arbitrary rationals.
enum class LinOp { Add, Mul, Max, Const };

struct LinGate {
  LinOp op = LinOp::Add;
  std::string a, b;
  Rational zeta;
  std::string out;
};

struct LinFixpCircuit {
  std::array<std::string, 2> inputs;
  std::vector<LinGate> gates;
  std::array<std::string, 2> outputs;

  static LinFixpCircuit parse(std::string_view text);
  std::string to_text() const;
  void validate() const;
};

Point2 eval_linfixp(const LinFixpCircuit& c, const Point2& x);

// Every output o replaced by max{-1 * max{-1, -1 * o}, 0} = max{min{1, o}, 0}.
LinFixpCircuit shift_domain(const LinFixpCircuit& c);

// c = max(2, |every constant and factor|), n = number of ADD/MUL/MAX gates,
// M = c^(n+1) bounds every intermediate value on [-1, 1]^2.
struct ScalingFactor {
  Rational c;
  int gates = 0;
  Rational M;
};
ScalingFactor scaling_factor(const LinFixpCircuit& c);

// Domain shift, scaling by M (inputs and constants divided by M, outputs
// multiplied back) and max elimination:
//   max{x, y} = (1/2 x +_T max{1/2 y +_T (-1/2) x, 0}) x_T 2
//   max{z, 0} = (z +_T (-1)) +_T 1
// On [-1, 1]^2 the result computes max{min{1, F_C(x)}, 0} exactly.
TruncCircuit to_truncated(const LinFixpCircuit& c);

// ---------------------------------------------------------------------------
// Consensus-1/3-Division gadgets. Labels: A = 0, B = 1, C = 2. Every interval
// has length 9; I[a, b] denotes [left + a, left + b].

inline constexpr Label kLabelA = 0, kLabelB = 1, kLabelC = 2;
inline constexpr int kIntervalLength = 9;

// X(I) = I[0,1] u I[2,4] u I[5,7] u I[8,9].
std::vector<std::pair<Rational, Rational>> value_set(const Rational& left);
// The anchor blocks O[1,2] u O[4,5] u O[7,8] (density 3/10).
std::vector<std::pair<Rational, Rational>> anchor_set(const Rational& left);

struct EncodingStatus {
  bool well_cut = false;  // exactly two cuts, one in I[7/4,17/4], one in I[19/4,29/4]
  bool valid = false;     // well cut and mu(X(I)_C) = 2
  Rational value;         // (mu(X(I)_A) - mu(X(I)_B)) / 2, meaningful when valid
  std::array<Rational, 3> measure{};  // mu(X(I)_A), mu(X(I)_B), mu(X(I)_C)
};
EncodingStatus encoding_status(const Solution& s, const Rational& left);

enum class KDivGateKind {
  MulT,         // zeta <= 0: v(O) = T[zeta v(I)]
  AddNegT,      // v(O) = -T[v(I1) + v(I2)]
  ConstT,       // v(O) = zeta, reading the label pattern of I = Out_1
  Projection1,  // I = Out_1 (labels A, B, C): v(O) = -v(I)
  Projection2,  // I = Out_2 (labels C, then A and B in either order): v(O) = -v(I)
};
std::string to_string(KDivGateKind k);

// Height of the agent's density on X(O).
Rational output_height(KDivGateKind kind, const Rational& zeta);

// One agent: the anchor blocks on O, the X(O) blocks and the input blocks.
// Throws DomainError when intervals overlap or zeta is out of range.
Valuation make_kdiv_gate(KDivGateKind kind, const Rational& zeta, const std::vector<Rational>& inputs,
                         const Rational& output);

struct KDivAgent {
  KDivGateKind kind = KDivGateKind::MulT;
  Rational zeta;
  std::vector<Rational> inputs;  // interval left ends
  Rational output;               // left end of the output interval O_i
  std::string role;
};

struct KDivLayout {
  static constexpr int kOut1 = 0, kOut2 = 10, kTemp1 = 20, kTemp2 = 30, kIn1 = 40, kIn2 = 50;
  static constexpr int kFirstGate = 60, kStride = 10;
  std::map<std::string, Rational> wire;  // circuit wire -> interval encoding it
};

struct CompiledFixp {
  TruncCircuit circuit;
  std::vector<KDivAgent> agents;  // instance agent i is agents[i]
  KDivLayout layout;
  Instance instance;              // k = 3, cut budget 2n

  json layout_json() const;
};

// Projection agents Out_i -> Temp_i, negations Temp_i -> In_i, then the
// circuit's gates in order (ADD and positive MUL take two agents). The agent
// producing output i writes Out_i; outputs that are circuit inputs, repeated
// wires, or a constant routed to Out_1 are copied there by two negations.
CompiledFixp compile_fixp(const TruncCircuit& c);

struct KDivPlacement {
  Solution solution;
  std::vector<Rational> value;        // per agent: value encoded in its output interval
  std::vector<Rational> discrepancy;  // per agent: max pairwise label difference
  Rational max_gate_discrepancy;      // over every agent except the two projections
  Point2 projection_residual;         // discrepancy of the two projection agents
};

// Encodes x in In_1/In_2 and -x in Temp_1/Temp_2, evaluates the circuit, and
// places the two cuts of every output interval left to right so that its
// agent is exactly balanced. Out_1 reads A, B, C. Throws std::logic_error if
// a gate cannot be balanced or an interval is not a valid encoding of its
// value.
KDivPlacement forward_place_kdiv(const CompiledFixp& c, const Point2& x);

struct FixedPointDecode {
  Point2 x;
  std::array<Label, 3> relabel{};  // original label -> canonical label
  Solution canonical;              // labels renamed so Out_1 reads A, B, C
};

// Renames labels so Out_1 reads A, B, C left to right; throws DomainError if
// Out_1 is not well cut with three distinct labels.
Solution canonicalize_labels(const Solution& s, std::array<Label, 3>* relabel = nullptr);

// Reads (v(In_1), v(In_2)). With a circuit, every agent's output interval must
// be a valid encoding and the point must satisfy F(x) = x; otherwise (or if
// In_1/In_2 are invalid) DomainError signals a non-exact solution.
FixedPointDecode decode_fixed_point(const Solution& s, const TruncCircuit* circuit = nullptr);
FixedPointDecode decode_fixed_point(const CompiledFixp& c, const Solution& s);

json to_json(const FixedPointDecode& d);

}  // namespace ccut
