#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ccut/rational.hpp"

namespace ccut {

enum class Sense { LE, GE, EQ };

struct LinearConstraint {
  std::vector<Rational> coeffs;  // dense, one per variable
  Sense sense = Sense::EQ;
  Rational rhs;
};

// minimize c^T x  subject to rows, lower <= x <= upper (upper optional).
struct LinearProgram {
  std::vector<std::string> names;
  std::vector<Rational> lower;
  std::vector<std::optional<Rational>> upper;
  std::vector<Rational> objective;  // empty: pure feasibility
  std::vector<LinearConstraint> rows;

  int add_var(std::string name, Rational lo, std::optional<Rational> hi = std::nullopt);
  std::size_t num_vars() const { return lower.size(); }
  LinearConstraint& add_row(Sense s, Rational rhs);  // coeffs sized to num_vars()
};

struct LPResult {
  enum class Status { Optimal, Infeasible, Unbounded } status = Status::Infeasible;
  std::vector<Rational> x;
  Rational objective;
  long pivots = 0;
};

// Exact two-phase tableau simplex with Bland's rule (no cycling).
LPResult solve_lp(const LinearProgram& lp);

// Human-readable listing of the program (for --dump-lp).
std::string dump_lp(const LinearProgram& lp);

}  // namespace ccut
