#include "ccut/core.hpp"

#include <algorithm>

namespace ccut {

Valuation::Valuation(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw DomainError("valuation needs at least one block");
  Rational total = 0;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& blk = blocks_[b];
    if (!(blk.left < blk.right)) throw DomainError("block with left >= right");
    if (blk.height < 0) throw DomainError("negative block height");
    if (b > 0 && blk.left < blocks_[b - 1].right) throw DomainError("overlapping or unsorted blocks");
    total += blk.mass();
  }
  if (total != 1) throw DomainError("valuation mass is " + to_string(total) + ", expected 1");
}

Valuation Valuation::normalized(std::vector<Block> blocks) {
  std::sort(blocks.begin(), blocks.end(), [](const Block& a, const Block& b) { return a.left < b.left; });
  Rational total = 0;
  for (auto& b : blocks) total += b.mass();
  if (total <= 0) throw DomainError("cannot normalize a zero-mass valuation");
  for (auto& b : blocks) b.height /= total;
  return Valuation(std::move(blocks));
}

Valuation Valuation::uniform(const Rational& left, const Rational& right) {
  if (!(left < right)) throw DomainError("uniform block needs left < right");
  return Valuation({Block{left, right, Rational(1) / (right - left)}});
}

Rational Valuation::mass(const Rational& a, const Rational& b) const {
  Rational m = 0;
  if (!(a < b)) return m;
  auto it = std::upper_bound(blocks_.begin(), blocks_.end(), a,
                             [](const Rational& x, const Block& blk) { return x < blk.right; });
  for (; it != blocks_.end() && it->left < b; ++it) {
    const Rational& lo = max(a, it->left);
    const Rational& hi = min(b, it->right);
    if (lo < hi) m += it->height * (hi - lo);
  }
  return m;
}

Rational Valuation::density_at(const Rational& x) const {
  for (const auto& b : blocks_)
    if (b.left <= x && x < b.right) return b.height;
  return 0;
}

Rational Valuation::max_height() const {
  Rational m = 0;
  for (const auto& b : blocks_) m = max(m, b.height);
  return m;
}

ValuationClass classify(const Valuation& v) {
  int d = static_cast<int>(v.size());
  if (d == 1) return {ValuationKind::SingleBlock, 1};
  bool uniform = std::all_of(v.blocks().begin(), v.blocks().end(),
                             [&](const Block& b) { return b.height == v.blocks().front().height; });
  if (!uniform) return {ValuationKind::PiecewiseConstant, d};
  return {d == 2 ? ValuationKind::DBlockUniform : ValuationKind::PiecewiseUniform, d};
}

std::string to_string(ValuationKind k) {
  switch (k) {
    case ValuationKind::PiecewiseConstant: return "piecewise-constant";
    case ValuationKind::PiecewiseUniform: return "piecewise-uniform";
    case ValuationKind::DBlockUniform: return "d-block-uniform";
    case ValuationKind::SingleBlock: return "single-block";
  }
  return "?";
}

std::string label_name(Label l, int k) {
  if (l < 0 || l >= k) throw ArityError("label out of range");
  if (k == 2) return l == 0 ? "+" : "\xE2\x88\x92";  // U+2212
  if (k <= 26) return std::string(1, static_cast<char>('A' + l));
  return "L" + std::to_string(l);
}

Label parse_label(const std::string& s, int k) {
  if (k == 2) {
    if (s == "+") return 0;
    if (s == "-" || s == "\xE2\x88\x92") return 1;
  } else if (s.size() == 1 && s[0] >= 'A' && s[0] - 'A' < k) {
    return s[0] - 'A';
  } else if (s.size() > 1 && s[0] == 'L') {
    int l = std::stoi(s.substr(1));
    if (l >= 0 && l < k) return l;
  }
  throw ParseError("unknown label '" + s + "' for k=" + std::to_string(k));
}

Instance Instance::make(std::vector<Valuation> agents, int k, Rational domain_right) {
  Instance inst;
  inst.k = k;
  inst.domain_right = std::move(domain_right);
  inst.cut_budget = (k - 1) * static_cast<int>(agents.size());
  inst.agents = std::move(agents);
  return inst;
}

void Instance::validate() const {
  if (k < 2) throw DomainError("k must be at least 2");
  if (cut_budget < 0) throw DomainError("negative cut budget");
  if (domain_right <= 0) throw DomainError("domain_right must be positive");
  for (const auto& a : agents)
    if (a.support_left() < 0 || a.support_right() > domain_right)
      throw DomainError("block outside [0, domain_right]");
}

Solution Solution::alternating(std::vector<Rational> cuts, Label first) {
  Solution s;
  s.labels.resize(cuts.size() + 1);
  for (std::size_t t = 0; t < s.labels.size(); ++t) s.labels[t] = (first + static_cast<int>(t)) % 2;
  s.cuts = std::move(cuts);
  return s;
}

Label Solution::label_right_of(const Rational& x) const {
  auto idx = std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin();
  return labels[idx];
}

void check_solution(const Instance& inst, const Solution& s) {
  if (s.labels.size() != s.cuts.size() + 1) throw ArityError("need |labels| = |cuts| + 1");
  for (Label l : s.labels)
    if (l < 0 || l >= inst.k) throw ArityError("label outside the instance's k labels");
  for (std::size_t t = 0; t < s.cuts.size(); ++t) {
    if (s.cuts[t] < 0 || s.cuts[t] > inst.domain_right) throw DomainError("cut outside domain");
    if (t > 0 && s.cuts[t] < s.cuts[t - 1]) throw DomainError("cuts not sorted");
  }
}

std::vector<Rational> label_masses(const Valuation& v, const Solution& s, int k) {
  std::vector<Rational> m(k, Rational(0));
  const auto& cuts = s.cuts;
  for (const auto& blk : v.blocks()) {
    if (blk.height == 0) continue;
    std::size_t seg = std::upper_bound(cuts.begin(), cuts.end(), blk.left) - cuts.begin();
    Rational pos = blk.left;
    while (pos < blk.right) {
      Rational end = seg < cuts.size() ? Rational(min(cuts[seg], blk.right)) : blk.right;
      if (pos < end) {
        m[s.labels[seg]] += blk.height * (end - pos);
        pos = end;
      }
      ++seg;
    }
  }
  return m;
}

Rational balance(const Valuation& v, const Solution& s) {
  for (Label l : s.labels)
    if (l != 0 && l != 1) throw ArityError("balance needs a two-label solution");
  auto m = label_masses(v, s, 2);
  return m[0] - m[1];
}

Rational balance(const Instance& inst, std::size_t agent, const Solution& s) {
  if (inst.k != 2) throw ArityError("balance is defined for k = 2 instances");
  return balance(inst.agents.at(agent), s);
}

BalanceReport verify(const Instance& inst, const Solution& s, const Rational& eps) {
  check_solution(inst, s);
  BalanceReport rep;
  rep.max_discrepancy = 0;
  rep.satisfied = true;
  for (const auto& a : inst.agents) {
    auto m = label_masses(a, s, inst.k);
    auto [lo, hi] = std::minmax_element(m.begin(), m.end());
    Rational disc = *hi - *lo;
    rep.max_discrepancy = max(rep.max_discrepancy, disc);
    if (disc > eps) rep.satisfied = false;
    rep.discrepancy.push_back(disc);
    rep.mass.push_back(std::move(m));
  }
  return rep;
}

Rational signed_length(const Solution& s, const Rational& a, const Rational& b) {
  Rational v = 0;
  std::size_t seg = std::upper_bound(s.cuts.begin(), s.cuts.end(), a) - s.cuts.begin();
  Rational pos = a;
  while (pos < b) {
    Rational end = seg < s.cuts.size() ? Rational(min(s.cuts[seg], b)) : b;
    if (pos < end) {
      if (s.labels[seg] == 0) v += end - pos;
      else if (s.labels[seg] == 1) v -= end - pos;
      else throw ArityError("signed_length needs a two-label solution");
      pos = end;
    }
    ++seg;
  }
  return v;
}

Rational encoded_value(const Solution& s, const Rational& a, const Rational& b) {
  if (b - a != 1) throw DomainError("encoded_value needs a unit interval");
  return signed_length(s, a, b);
}

Rational truncate(const Rational& z) {
  if (z > 1) return 1;
  if (z < -1) return -1;
  return z;
}

Instance rescale_to_unit(const Instance& inst) {
  const Rational& M = inst.domain_right;
  if (M <= 0) throw DomainError("domain_right must be positive");
  Instance out = inst;
  out.domain_right = 1;
  for (auto& a : out.agents) {
    std::vector<Block> bs = a.blocks();
    for (auto& b : bs) {
      b.left /= M;
      b.right /= M;
      b.height *= M;
    }
    a = Valuation(std::move(bs));
  }
  return out;
}

Solution scale_solution(const Solution& s, const Rational& factor) {
  Solution out = s;
  for (auto& c : out.cuts) c *= factor;
  return out;
}

Instance disjoint_copies(const Instance& inst, int c) {
  if (c < 0) throw DomainError("copy count must be non-negative");
  if (c == 0) return inst;
  Instance out;
  out.k = inst.k;
  const Rational& D = inst.domain_right;
  out.domain_right = D * (c + 1);
  for (int t = 0; t <= c; ++t) {
    Rational shift = D * t;
    for (const auto& a : inst.agents) {
      std::vector<Block> bs = a.blocks();
      for (auto& b : bs) {
        b.left += shift;
        b.right += shift;
      }
      out.agents.emplace_back(std::move(bs));
    }
  }
  out.cut_budget = (c + 1) * static_cast<int>(inst.n()) + c;
  return out;
}

Solution swap_labels(const Solution& s) {
  Solution out = s;
  for (auto& l : out.labels) {
    if (l != 0 && l != 1) throw ArityError("swap_labels needs a two-label solution");
    l = 1 - l;
  }
  return out;
}

Solution merge_equal_labels(const Solution& s) {
  Solution out;
  out.labels.push_back(s.labels.front());
  for (std::size_t t = 0; t < s.cuts.size(); ++t) {
    if (s.labels[t + 1] == out.labels.back()) continue;
    out.cuts.push_back(s.cuts[t]);
    out.labels.push_back(s.labels[t + 1]);
  }
  return out;
}

}  // namespace ccut
