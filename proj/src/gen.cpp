#include "ccut/gen.hpp"

#include <algorithm>
#include <set>

namespace ccut {

Instance random_single_block(int n, const Rational& M, std::uint64_t seed, int resolution) {
  if (n < 1) throw DomainError("n must be positive");
  if (M < 1) throw DomainError("maximum height M must be >= 1");
  Rng rng(seed);
  // Grid fine enough that the minimum length 1/M is representable.
  long R = resolution > 0 ? resolution : std::max<long>(64, 8 * ceil(M).get_si());
  long min_len = ceil(Rational(R) / M).get_si();
  std::vector<Valuation> agents;
  for (int i = 0; i < n; ++i) {
    long len = rng.between(min_len, R);
    long left = rng.between(0, R - len);
    agents.push_back(Valuation::uniform(frac(left, R), frac(left + len, R)));
  }
  return Instance::make(std::move(agents));
}

namespace {

std::vector<Block> random_blocks(Rng& rng, int d, int R) {
  int count = static_cast<int>(rng.between(1, d));
  std::set<long> pts;
  while (static_cast<int>(pts.size()) < 2 * count) pts.insert(rng.between(0, R));
  std::vector<long> p(pts.begin(), pts.end());
  std::vector<Block> bs;
  for (int b = 0; b < count; ++b) bs.push_back({frac(p[2 * b], R), frac(p[2 * b + 1], R), Rational(1)});
  return bs;
}

}  // namespace

Instance random_dblock(int n, int d, std::uint64_t seed, int resolution) {
  if (n < 1 || d < 1) throw DomainError("n and d must be positive");
  if (resolution < 2 * d) throw DomainError("resolution too small for d blocks");
  Rng rng(seed);
  std::vector<Valuation> agents;
  for (int i = 0; i < n; ++i) agents.push_back(Valuation::normalized(random_blocks(rng, d, resolution)));
  return Instance::make(std::move(agents));
}

Instance random_piecewise(int n, int d, std::uint64_t seed, int resolution) {
  if (n < 1 || d < 1) throw DomainError("n and d must be positive");
  if (resolution < 2 * d) throw DomainError("resolution too small for d blocks");
  Rng rng(seed);
  std::vector<Valuation> agents;
  for (int i = 0; i < n; ++i) {
    auto bs = random_blocks(rng, d, resolution);
    for (auto& b : bs) b.height = Rational(rng.between(1, 9));
    agents.push_back(Valuation::normalized(std::move(bs)));
  }
  return Instance::make(std::move(agents));
}

}  // namespace ccut
