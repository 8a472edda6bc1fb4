#pragma once

#include <optional>
#include <vector>

#include "ccut/core.hpp"
#include "ccut/simplex.hpp"

namespace ccut {

// Sorted, deduplicated block endpoints with zero-density margins trimmed:
// every agent's density is constant on each cell (points[j], points[j+1]).
struct BreakpointGrid {
  std::vector<Rational> points;
  int m() const { return static_cast<int>(points.size()) - 1; }  // number of cells
};

BreakpointGrid breakpoints(const Instance& inst);

// One cut at the middle of every cell, labels alternating from "+": each
// agent's value in each cell is split in half, so the result is exact. For
// k > 2 every cell is split into k equal parts labelled 0..k-1, reversed in
// every other cell so that no cut is needed between cells ((k-1)m cuts).
Solution midpoint_solution(const Instance& inst);

// A subset S of the cells, each receiving exactly one cut. Labels start with
// "+" at the left and flip at every cut, so the orientation of every cut cell
// and the label of every cut-free cell follow from S.
struct SlotAssignment {
  std::vector<int> cut_cells;  // S, strictly increasing 0-based cell indices

  // Label left of the cut in cut cell cut_cells[s] (0 = "+").
  Label orientation(std::size_t s) const { return static_cast<Label>(s % 2); }
  // Label of an entire cut-free cell.
  Label free_cell_label(int cell) const;
  bool well_formed(const BreakpointGrid& grid) const;
};

// The feasibility system: x_s in cell cut_cells[s], one equality per agent.
LinearProgram slot_program(const Instance& inst, const BreakpointGrid& grid, const SlotAssignment& slots);

struct SlotResult {
  bool feasible = false;
  std::vector<Rational> cuts;  // x_s, one per cut cell (feasible only)
  Solution solution;           // cuts with alternating labels from "+" (feasible only)
  long pivots = 0;
};

SlotResult lp_feasible(const Instance& inst, const SlotAssignment& slots);
SlotResult lp_feasible(const Instance& inst, const BreakpointGrid& grid, const SlotAssignment& slots);

struct BudgetResult {
  std::optional<Solution> solution;
  int budget = 0;              // 2n - ell
  int cells = 0;               // m
  long subsets_tried = 0;      // 0 when the midpoint solution already fits
  std::optional<SlotAssignment> slots;  // the winning subset
  std::optional<LinearProgram> program; // its feasibility system
};

// Exact consensus-halving with at most 2n - ell cuts. When m <= 2n - ell the
// midpoint solution is returned; otherwise every subset of 2n - ell cells is
// tried in lexicographic order and the first feasible one wins. With jobs > 1
// subsets are checked concurrently; the lexicographically first feasible
// subset is still the one returned.
BudgetResult solve_with_budget(const Instance& inst, int ell, int jobs = 1);

struct RefineConfig {
  // Below this eps a successful refinement is guaranteed; above it the
  // refinement is attempted on a best-effort basis. Empty: derived from the
  // instance's bit size (refine_threshold).
  std::optional<Rational> threshold;
};

// 2^-(8 * (total bit length of the instance's rationals + n + k)).
Rational refine_threshold(const Instance& inst);

struct RefineResult {
  bool exact = false;         // z* == 0
  Solution solution;          // the LP optimum (exact when `exact`)
  Rational z;                 // least achievable max pairwise discrepancy
  Rational threshold;
  bool best_effort = false;   // eps was above the threshold
  LinearProgram program;
  long pivots = 0;
};

// Keeps every cut of `approx` inside its breakpoint cell (a cut lying on a
// breakpoint uses the cell to its right), preserves cut order and labels,
// and minimizes z >= |mu_i(A_a) - mu_i(A_b)| over agents i and label pairs.
// Throws (ArityError / DomainError) when approx is structurally invalid.
RefineResult refine_exact(const Instance& inst, const Solution& approx, const Rational& eps,
                          const RefineConfig& cfg = {});

}  // namespace ccut
