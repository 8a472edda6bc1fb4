#pragma once

#include <cstdint>
#include <random>

#include "ccut/core.hpp"

namespace ccut {

// Portable draws: only the raw engine output is used, never std distributions,
// so a seed yields the same instance on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  std::uint64_t below(std::uint64_t n) { return eng_() % n; }  // n > 0
  std::int64_t between(std::int64_t lo, std::int64_t hi) {      // inclusive
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

 private:
  std::mt19937_64 eng_;
};

// Single-block agents on [0,1] with endpoints on the grid 1/resolution and
// block length >= 1/M (so every height is <= M).
Instance random_single_block(int n, const Rational& M, std::uint64_t seed, int resolution = 0);

// Agents with at most d uniform blocks each (equal heights within an agent).
Instance random_dblock(int n, int d, std::uint64_t seed, int resolution = 64);

// Agents with at most d blocks of independent heights.
Instance random_piecewise(int n, int d, std::uint64_t seed, int resolution = 64);

}  // namespace ccut
