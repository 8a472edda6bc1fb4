#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ccut/core.hpp"

namespace ccut {

enum class LabelMode { AlternatingEither, ExplicitK };

struct GridSearchConfig {
  int m = 1;          // grid resolution: cuts at domain_right * l / m, 0 < l < m
  int max_cuts = 0;
  LabelMode mode = LabelMode::AlternatingEither;
  double work_limit = 1e8;
  int jobs = 1;
};

struct WorkLimitExceeded : Error {
  using Error::Error;
};

double brute_force_work(const Instance& inst, const GridSearchConfig& cfg);

// Exhaustive search over sorted grid cut tuples (strictly increasing) and
// labelings; returns the first verifying solution in enumeration order.
std::optional<Solution> brute_force(const Instance& inst, const Rational& eps, const GridSearchConfig& cfg);

// Every verifying solution the search space contains.
std::vector<Solution> brute_force_all(const Instance& inst, const Rational& eps, const GridSearchConfig& cfg);

// Grid positions r in [lo, hi] (step (hi - lo)/m, endpoints included) such
// that inserting a cut at r into `fixed` (labels alternate across it, the
// label left of r is kept) leaves `agent` eps-satisfied.
std::vector<Rational> enumerate_gate_cuts(const Instance& inst, std::size_t agent, const Solution& fixed,
                                          const Rational& lo, const Rational& hi, const Rational& eps, int m);

// Inserts a cut at r: labels left of r are kept, labels right of r flip (k=2).
Solution insert_flip_cut(const Solution& s, const Rational& r);

// Exact search for k = 2 solutions with at most max_cuts cuts and eps = 0:
// every distribution of cuts over the cells between consecutive breakpoints
// (several cuts per cell allowed), alternating labels from either side, each
// checked by an exact LP over the cut positions.
std::optional<Solution> cell_search(const Instance& inst, int max_cuts);

}  // namespace ccut
