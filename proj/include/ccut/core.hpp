#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ccut/rational.hpp"

namespace ccut {

struct Block {
  Rational left, right, height;

  Rational length() const { return right - left; }
  Rational mass() const { return height * (right - left); }
  bool operator==(const Block&) const = default;
};

// Piecewise-constant probability density: blocks sorted, non-overlapping,
// total mass exactly 1.
class Valuation {
 public:
  Valuation() = default;
  explicit Valuation(std::vector<Block> blocks);

  // Rescales heights so the total mass becomes 1.
  static Valuation normalized(std::vector<Block> blocks);
  static Valuation uniform(const Rational& left, const Rational& right);

  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t size() const { return blocks_.size(); }

  // Mass of [a, b] (a <= b assumed; empty otherwise).
  Rational mass(const Rational& a, const Rational& b) const;
  Rational density_at(const Rational& x) const;  // right-continuous
  Rational max_height() const;
  const Rational& support_left() const { return blocks_.front().left; }
  const Rational& support_right() const { return blocks_.back().right; }

  bool operator==(const Valuation&) const = default;

 private:
  std::vector<Block> blocks_;
};

enum class ValuationKind { PiecewiseConstant, PiecewiseUniform, DBlockUniform, SingleBlock };

struct ValuationClass {
  ValuationKind kind;
  int d;  // number of blocks
};

ValuationClass classify(const Valuation& v);
std::string to_string(ValuationKind k);

// Label identifiers are indices 0..k-1. For k = 2: 0 = "+", 1 = "−".
using Label = int;
std::string label_name(Label l, int k);
Label parse_label(const std::string& s, int k);

struct Instance {
  int k = 2;
  Rational domain_right = 1;
  int cut_budget = 0;
  std::vector<Valuation> agents;

  // cut_budget defaults to (k - 1) * n.
  static Instance make(std::vector<Valuation> agents, int k = 2, Rational domain_right = 1);

  std::size_t n() const { return agents.size(); }
  void validate() const;
  bool operator==(const Instance&) const = default;
};

struct Solution {
  std::vector<Rational> cuts;
  std::vector<Label> labels;  // |cuts| + 1 entries, left to right

  // Labels alternate 0,1,0,... starting from `first` (k = 2 convention).
  static Solution alternating(std::vector<Rational> cuts, Label first = 0);

  // Label of the segment containing points just right of x.
  Label label_right_of(const Rational& x) const;
  bool operator==(const Solution&) const = default;
};

struct BalanceReport {
  std::vector<std::vector<Rational>> mass;  // [agent][label]
  std::vector<Rational> discrepancy;        // per agent, max pairwise |difference|
  Rational max_discrepancy;
  bool satisfied = false;
};

// Structural checks: sorted cuts inside the domain, label count and range.
void check_solution(const Instance& inst, const Solution& s);

std::vector<Rational> label_masses(const Valuation& v, const Solution& s, int k);

// mu(I+) - mu(I-) for a two-label solution.
Rational balance(const Valuation& v, const Solution& s);
Rational balance(const Instance& inst, std::size_t agent, const Solution& s);

BalanceReport verify(const Instance& inst, const Solution& s, const Rational& eps);

// (+ length) - (- length) of [a, b] under Lebesgue measure.
Rational signed_length(const Solution& s, const Rational& a, const Rational& b);
// Value encoded by a unit interval [a, b]; b - a must be 1.
Rational encoded_value(const Solution& s, const Rational& a, const Rational& b);

Rational truncate(const Rational& z);

Instance rescale_to_unit(const Instance& inst);
Solution scale_solution(const Solution& s, const Rational& factor);
Instance disjoint_copies(const Instance& inst, int c);

// Swap "+" and "−" (k = 2).
Solution swap_labels(const Solution& s);
// Drop cuts separating equal labels.
Solution merge_equal_labels(const Solution& s);

}  // namespace ccut
