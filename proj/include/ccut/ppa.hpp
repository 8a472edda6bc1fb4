#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccut/core.hpp"
#include "ccut/io.hpp"

namespace ccut {

// ---------------------------------------------------------------------------
// Boolean circuits and Tucker labelings

enum class BoolOp { Not, And, Or };

struct BoolGate {
  BoolOp op;
  int a = 0, b = 0;  // b unused for NOT
  int out = 0;
};

// Line format: "INPUT w", "NOT a -> b", "AND a b -> c", "OR a b -> c",
// "OUTPUT w" with integer wire ids; blank lines and '#' comments ignored.
// Every wire is defined once (input or gate output) before it is read.
struct BoolCircuit {
  std::vector<int> inputs;
  std::vector<BoolGate> gates;
  std::vector<int> outputs;

  static BoolCircuit parse(std::string_view text);
  std::string to_text() const;
  std::vector<bool> evaluate(const std::vector<bool>& in) const;
  int next_wire() const;  // one past the largest wire id in use
};

// A labeling of the grid [side]^N by {+-1, ..., +-N}. The circuit reads three
// bits per coordinate (most significant first, cell r encoded as r - 1) and
// writes 2N bits y_1^a, y_1^b, ..., y_N^a, y_N^b: label +i has y_i^a = y_i^b = 1
// and y_l^a = 1, y_l^b = 0 for l != i; label -i is the complement.
struct TuckerLabeling {
  int N = 1;
  int side = 8;
  BoolCircuit circuit;

  int evaluate(const std::vector<int>& cell) const;  // cells are 1-based
  bool on_boundary(const std::vector<int>& cell) const;
  std::vector<int> antipode(const std::vector<int>& cell) const;  // side + 1 - x
  void validate() const;                                          // wire counts
};

int decode_label_bits(const std::vector<bool>& y);  // 2N bits -> +-i, throws on a malformed encoding
std::vector<bool> encode_label_bits(int label, int N);

// Boundary cells x with label(antipode(x)) != -label(x).
std::vector<std::vector<int>> antisymmetry_violations(const TuckerLabeling& lab);

// A Tucker solution: opposite labels and cells at l-infinity distance <= 1.
bool is_tucker_solution(const TuckerLabeling& lab, const std::vector<int>& u, const std::vector<int>& w);

// Cell map from [8] to [7]: r -> r - 1 for r >= 5, r otherwise.
int snake_coordinate(int r);
// Labeling on [8]^N with label'(x) = label(snake(x)); the circuit is extended
// by a per-coordinate 3-bit decrement.
TuckerLabeling snake_embed(const TuckerLabeling& lab7);

// Sum-of-products circuit for an arbitrary labeling function.
TuckerLabeling labeling_from_function(int N, int side, const std::function<int(const std::vector<int>&)>& label);

// label(x) = +1 if x_1 <= 4 else -1 (antipodally anti-symmetric), realized
// with NOT/OR gates reading the first bit of coordinate 1.
TuckerLabeling demo_labeling(int N);

// ---------------------------------------------------------------------------
// Reference semantics of one circuit-simulator

struct BitExtraction {
  std::array<int, 3> bits{};  // each +-1
  int cell = 0;               // 1..8
  Rational cell_left, cell_right;
  bool failed = false;  // within 8g of a standard-interval boundary
};

// Standard-interval boundaries {-3/4, -1/2, ..., 3/4}.
const std::vector<Rational>& bit_boundaries();
Rational distance_to_boundaries(const Rational& z);
BitExtraction extract_bits(const Rational& z, const Rational& g);

struct ReductionParams {
  int N = 1;
  int p = 4;             // number of circuit-simulators, 4N^2
  Rational alpha;        // displacement step 1/(16p)
  Rational eps;          // <= 1/(2^14 N^2)
  Rational g;            // per-gate error 16 eps
  long mul_factor = 1;   // ceil(1/g), the bit-extraction amplifier
  Rational q;            // length of one simulator region (set by the compiler)

  static ReductionParams make(int N, const Rational& eps);
};

struct SimulationResult {
  std::vector<Rational> z;          // T[c x + j alpha], c = const sign
  std::vector<Rational> x_hat;      // c z, the value the simulator holds
  std::vector<BitExtraction> bits;  // per coordinate, extracted from z
  std::vector<int> cell;            // grid cell of z
  bool failed = false;
  int label = 0;                    // label(cell); 0 when failed
  std::vector<int> outputs;         // c * lambda_bar_i(z) in {-1, 0, 1}; zeros when failed
};

SimulationResult simulate_phases(const TuckerLabeling& lab, const ReductionParams& params, const std::vector<Rational>& x,
                                 int j, int const_sign);

// ---------------------------------------------------------------------------
// Gate agents on a line

enum class AgentKind { Volume, Add };

struct UnitSlot {
  Rational left;  // the unit interval [left, left + 1]
  std::string name;
  bool external = false;  // read-only input supplied by the caller
};

struct GateAgent {
  AgentKind kind = AgentKind::Volume;
  Rational delta;           // Volume only
  std::vector<int> inputs;  // Volume: {I}; Add: {I'[0,1], I'[1,2]}
  int output = -1;          // O (Volume) or J[1,2] (Add)
  Rational forced_left, forced_right;  // the interval that must contain a cut
  int simulator = -1;       // -1 outside simulators
  std::string role;

  // Two uniform blocks of equal height.
  Valuation valuation(const std::vector<UnitSlot>& slots) const;
};

enum class GateKind { Volume, Neg, Const, Add, Copy, Mul, Not, And, Or };

// Builds gate agents left to right. Output slots are unit intervals separated
// by unit gaps; an addition uses two adjacent negation outputs (I', length 2)
// followed by a gap and its forced interval J of length 3.
class GateNetwork {
 public:
  explicit GateNetwork(Rational eps);

  const Rational& eps() const { return eps_; }
  const std::vector<UnitSlot>& slots() const { return slots_; }
  const std::vector<GateAgent>& agents() const { return agents_; }
  const Rational& cursor() const { return cursor_; }
  void set_cursor(const Rational& x) { cursor_ = x; }
  void set_simulator(int j) { simulator_ = j; }

  int external_slot(const Rational& left, std::string name);

  // Basic gates. `at` places the output slot explicitly (must be free).
  int volume(int in, const Rational& delta, std::optional<Rational> at = std::nullopt, std::string role = "volume");
  int neg(int in, std::optional<Rational> at = std::nullopt);
  // zeta * v(ref) for |v(ref)| = 1; zeta in [-1, 1].
  int constant(const Rational& zeta, int ref);
  int add(int a, int b);
  // Derived gates.
  int copy(int in, std::optional<Rational> at = std::nullopt);
  int mul(int in, long k);  // double-and-add chain
  int not_gate(int a, int unit);
  int and_gate(int a, int b, int unit);
  int or_gate(int a, int b, int unit);

  // Single entry point by kind; `param` is delta (Volume), zeta (Const) or k
  // (Mul); `unit` is the +1 reference for Const/Not/And/Or.
  int make_gate(GateKind kind, const std::vector<int>& inputs, const Rational& param = 0, int unit = -1);

  // One agent per gate agent, in creation order.
  std::vector<Valuation> valuations() const;

 private:
  int new_slot(std::optional<Rational> at, std::string name);
  void claim(const Rational& left, const Rational& right);

  Rational eps_;
  Rational cursor_ = 0;
  int simulator_ = -1;
  std::vector<UnitSlot> slots_;
  std::vector<GateAgent> agents_;
  std::map<Rational, Rational> claimed_;  // left -> right, pairwise disjoint
};

// Exact-balance evaluation: every gate agent balanced to 0, each slot holding
// at most one cut. `external` gives the value of every external slot.
struct NetworkValues {
  std::vector<Rational> slot;    // per slot
  std::vector<Rational> forced;  // per agent: signed length of its forced interval
};
NetworkValues evaluate_network(const GateNetwork& net, const std::vector<std::optional<Rational>>& external);

// Worst-case value ranges when every gate agent is only eps-satisfied.
struct ValueRange {
  Rational lo, hi;
  bool operator==(const ValueRange&) const = default;
};
std::vector<ValueRange> network_ranges(const GateNetwork& net, const std::vector<std::optional<ValueRange>>& external);

// The same ranges certified geometrically: for every agent, the corner
// encodings of its input ranges are laid out as cuts (both orientations) and
// the eps-satisfying positions of its forced cut are enumerated on a grid of
// `m` steps around the balancing position. Throws if a satisfying position
// could lie outside the enumerated window.
std::vector<ValueRange> certify_network(const GateNetwork& net, const std::vector<std::optional<ValueRange>>& external,
                                        int m = 64);

// Cuts realizing `values`: one cut per gate agent at the unique balancing
// position of its forced interval, one cut in every external slot listed in
// `external_cut`, labels alternating from `first`.
Solution place_network(const GateNetwork& net, const NetworkValues& values, const std::vector<int>& external_cut,
                       Label first);

// ---------------------------------------------------------------------------
// The compiled Consensus-Halving instance

struct Region {
  std::string name;
  Rational left, right;
};

struct CompiledCH {
  ReductionParams params;
  TuckerLabeling labeling;
  GateNetwork network{Rational(0)};
  Instance instance;
  std::vector<int> coordinate_slots;                // N
  std::vector<int> const_slots;                     // p
  std::vector<std::vector<int>> feedback_slots;     // [i][j], F_i(j)
  std::vector<std::size_t> feedback_agents;         // N agent indices
  std::vector<Region> regions;

  json layout_json() const;
};

CompiledCH compile_tucker(const TuckerLabeling& lab, const Rational& eps);

struct LayoutAudit {
  std::size_t agents = 0, gate_agents = 0, forced_intervals = 0;
  bool two_block_uniform = true;
  bool forced_disjoint = true;
  bool cut_accounting = true;  // agents - N == forced intervals
  std::vector<std::string> problems;
  bool ok() const { return two_block_uniform && forced_disjoint && cut_accounting; }
};
LayoutAudit audit_layout(const CompiledCH& c);

struct ForwardPlacement {
  Solution solution;
  NetworkValues values;
  Rational max_gate_imbalance;             // over gate agents
  std::vector<Rational> feedback_balance;  // per feedback agent
};

// Encodes x in the Coordinate-Encoding region, labels the Constant-Creation
// region with const_sign and balances every gate agent exactly.
ForwardPlacement forward_place(const CompiledCH& c, const std::vector<Rational>& x, int const_sign = 1);

enum class DecodeStatus { Pair, FeedbackViolation, NoPair };

struct DecodeResult {
  DecodeStatus status = DecodeStatus::NoPair;
  std::vector<int> u, w;                 // cells of the Tucker pair
  std::vector<Rational> x;               // point read from the Coordinate-Encoding region
  int stray_cuts = 0;
  std::vector<int> corrupted;            // simulator indices (1-based)
  std::vector<int> const_sign;           // per simulator, 0 when its const cell is cut
  std::vector<int> effective_label;      // per simulator: const sign * label, 0 when skipped
  std::string message;
};

DecodeResult decode_solution(const CompiledCH& c, const Solution& s);

std::string to_string(DecodeStatus s);
json to_json(const DecodeResult& d);

}  // namespace ccut
