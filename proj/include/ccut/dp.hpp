#pragma once

#include <map>
#include <optional>
#include <vector>

#include "ccut/core.hpp"

namespace ccut {

struct InstanceStats {
  int d = 0;       // largest number of agents with positive density at one point
  Rational M = 0;  // largest density
};

InstanceStats instance_stats(const Instance& inst);

// Grid size ceil(2 M D / eps) for an instance on [0, D]; eps > 0.
int dp_grid_size(const Instance& inst, const Rational& eps);

// Moves every single-block endpoint to the nearest point of {D l / m : 0 <= l <= m}
// (ties toward the smaller point) and renormalizes the height, with
// m = ceil(M D / eps_prime). Throws DomainError if a block collapses.
Instance round_instance(const Instance& inst, const Rational& eps_prime);
Instance round_instance_to_grid(const Instance& inst, int m);

// Signed mass of [z, D] under labels alternating at `cuts` (all >= z),
// starting with `parity` at z.
Rational partial_balance(const Valuation& v, const std::vector<Rational>& cuts, const Rational& z, Label parity);

struct DpStats {
  long states_visited = 0;
  int m = 0;
  int d = 0;
  Rational M = 0;
};

struct DpResult {
  std::optional<Solution> solution;  // empty: no solution with cuts on the grid
  DpStats stats;
};

// Memoized search over grid cut placements. A state is the position of the
// last cut (grid index), the number of cuts still available, and the exact
// running balances of the agents whose support straddles that position
// (index order). Labels alternate starting with "+" at 0; fewer cuts than the
// budget may be used. Each state stores the smallest achievable worst final
// |balance| over the agents it still has to settle, so the returned solution
// is the grid solution of least discrepancy (ties: first in the order
// "stop here", then next cut left to right).
class DpSolver {
 public:
  struct Key {
    int z = 0;  // grid index of the last cut (0 at the start)
    int t = 0;  // cuts still available
    std::vector<Rational> q;
    bool operator<(const Key& o) const {
      if (z != o.z) return z < o.z;
      if (t != o.t) return t < o.t;
      return q < o.q;
    }
    bool operator==(const Key& o) const { return z == o.z && t == o.t && q == o.q; }
  };
  struct Entry {
    bool feasible = false;          // value <= eps
    Rational value;                 // best achievable worst final |balance|
    std::vector<Rational> witness;  // cuts of the best completion, strictly right of z
    bool operator==(const Entry&) const = default;
  };

  DpSolver(const Instance& inst, const Rational& eps, int m);

  std::optional<Solution> solve();
  const std::map<Key, Entry>& table() const { return memo_; }
  // Re-evaluates one stored state using only memoized children.
  Entry recompute_from_children(const Key& key) const;
  long states_visited() const { return static_cast<long>(memo_.size()); }
  Key root() const;

 private:
  template <class Child>
  Entry evaluate(const Key& key, Child&& child) const;
  const Entry& lookup_or_solve(const Key& key);

  const Instance& inst_;
  Rational eps_;
  int m_;
  std::vector<Rational> grid_;
  std::vector<Rational> lo_, hi_;            // support hull per agent
  std::vector<std::vector<Rational>> cum_;   // cumulative mass at grid points
  std::map<Key, Entry> memo_;
};

// Grid-restricted eps-solution with at most cut_budget cuts, m = dp_grid_size.
DpResult dp_solve(const Instance& inst, const Rational& eps);
// Same with an explicit grid size (required when eps = 0).
DpResult dp_solve_grid(const Instance& inst, const Rational& eps, int m);

}  // namespace ccut
