#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ccut/core.hpp"
#include "ccut/io.hpp"

namespace ccut {

struct Interval {
  Rational left, right;
  Rational length() const { return right - left; }
  bool operator==(const Interval&) const = default;
};

// One region as created or expanded by an agent's step; the family of all
// of them is laminar.
struct ReservedRegion {
  Rational left, right;
  std::size_t creator = 0;
  bool operator==(const ReservedRegion&) const = default;
};

// State of the greedy 1/2-halving procedure for single-block agents. Cuts
// alternate labels starting with "+" at the left end. Every cut lies strictly
// inside a reserved region, so labels on unreserved ground are fixed by the
// number of cuts to their left.
struct GreedyState {
  const Instance* inst = nullptr;
  std::vector<Rational> cuts;           // sorted
  std::vector<ReservedRegion> history;  // every created / expanded region, in order
  std::vector<Interval> reserved;       // maximal reserved intervals (touching ones merged), sorted

  explicit GreedyState(const Instance& instance);

  Solution solution() const { return Solution::alternating(cuts, 0); }
  Interval block(std::size_t agent) const;
  Rational height(std::size_t agent) const;

  // Odd parity: the labels just outside the region differ.
  bool odd(const Interval& rr) const;
  // (+ length) - (- length) of [a, b].
  Rational signed_length(const Rational& a, const Rational& b) const;
  // Unreserved pieces of the agent's block, left to right.
  std::vector<Interval> unreserved(std::size_t agent) const;
  Rational balance(std::size_t agent) const;
  // Sum over maximal regions meeting the block of |agent's imbalance inside
  // the block| plus the agent's unreserved mass. Bounds |balance| now and
  // after any later step, since later cuts only land on unreserved ground.
  Rational robust_imbalance(std::size_t agent) const;
  bool satisfied(std::size_t agent) const { return robust_imbalance(agent) <= Rational(1, 2); }

  void reserve(const Rational& left, const Rational& right, std::size_t creator);
  void add_cut(const Rational& x);
};

// Agents by non-increasing block height, ties by index.
std::vector<std::size_t> greedy_order(const Instance& inst);

// Step (1): grow internal odd-parity regions of the agent's block
// symmetrically (left to right) until the agent is satisfied or no internal
// odd region can grow. Returns the number of expansions performed.
int expand_odd_rrs(GreedyState& state, std::size_t agent);

// Steps (2)-(3): cut at the midpoint of the glued unreserved part of the
// block and reserve equal unreserved lengths on both sides of it until the
// agent is satisfied. Returns the cut, or nothing if already satisfied.
std::optional<Rational> place_and_reserve(GreedyState& state, std::size_t agent);

struct GreedyStep {
  std::size_t agent = 0;
  int expansions = 0;
  std::optional<Rational> cut;
  Rational imbalance_before, imbalance_after;  // robust imbalance of the agent
  std::vector<Interval> reserved;              // maximal regions after the step
};

struct GreedyResult {
  Solution solution;
  std::vector<GreedyStep> steps;
  std::vector<ReservedRegion> history;
  std::vector<std::string> violations;  // audit failures (empty when audited and clean)
  std::vector<std::string> notes;       // merged unions of touching regions worth above 1/2 to an agent
  long checks = 0;                      // audit assertions evaluated
};

// Runs the whole procedure; with audit = true checks after every step that
// internal regions (as created or expanded, a laminar family) are worth
// <= 1/2 to the agent, boundary regions and boundary merged unions carry
// imbalance <= 1/4 at the start of the step, every processed agent stays
// 1/2-satisfied, regions are length-balanced and laminar, and no cut enters
// an older region.
GreedyResult solve_half_traced(const Instance& inst, bool audit = false);
Solution solve_half(const Instance& inst);

json to_json(const GreedyResult& r);

struct SplitInstance {
  Instance inst;                       // one single-block agent per positive-mass block
  std::vector<std::size_t> agent_map;  // derived agent -> original agent
};
SplitInstance split_dblock(const Instance& inst);
// 1/2-solution of a piecewise-constant instance with at most (total blocks) cuts.
Solution solve_half_dblock(const Instance& inst);

}  // namespace ccut
