#include "ccut/dp.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace ccut {

InstanceStats instance_stats(const Instance& inst) {
  InstanceStats s;
  std::set<Rational> pts;
  for (const auto& a : inst.agents) {
    s.M = max(s.M, a.max_height());
    for (const auto& b : a.blocks()) pts.insert(b.left), pts.insert(b.right);
  }
  std::vector<Rational> p(pts.begin(), pts.end());
  for (std::size_t c = 0; c + 1 < p.size(); ++c) {
    Rational mid = (p[c] + p[c + 1]) / 2;
    int count = 0;
    for (const auto& a : inst.agents)
      if (a.density_at(mid) > 0) ++count;
    s.d = std::max(s.d, count);
  }
  return s;
}

int dp_grid_size(const Instance& inst, const Rational& eps) {
  if (eps <= 0) throw DomainError("grid size needs eps > 0");
  return static_cast<int>(ceil(2 * instance_stats(inst).M * inst.domain_right / eps).get_si());
}

Instance round_instance(const Instance& inst, const Rational& eps_prime) {
  if (eps_prime <= 0) throw DomainError("rounding needs eps_prime > 0");
  Rational m = ceil(instance_stats(inst).M * inst.domain_right / eps_prime);
  return round_instance_to_grid(inst, static_cast<int>(m.get_num().get_si()));
}

Instance round_instance_to_grid(const Instance& inst, int m) {
  if (m < 1) throw DomainError("grid resolution must be >= 1");
  const Rational& D = inst.domain_right;
  auto nearest = [&](const Rational& x) -> Rational {
    Rational scaled = x * m / D;
    Rational l = floor(scaled);
    if (scaled - l > Rational(1, 2)) l += 1;  // ties go to the smaller point
    return D * l / m;
  };
  Instance out = inst;
  for (std::size_t i = 0; i < inst.n(); ++i) {
    const auto& v = inst.agents[i];
    if (v.size() != 1) throw DomainError("rounding needs single-block agents (agent " + std::to_string(i) + ")");
    Rational a = nearest(v.support_left()), b = nearest(v.support_right());
    if (a >= b)
      throw DomainError("agent " + std::to_string(i) + " collapses to an empty block at grid size " +
                        std::to_string(m));
    out.agents[i] = Valuation::uniform(a, b);
  }
  return out;
}

Rational partial_balance(const Valuation& v, const std::vector<Rational>& cuts, const Rational& z, Label parity) {
  Rational total = 0, left = z;
  int sign = parity == 0 ? 1 : -1;
  for (const auto& c : cuts) {
    if (c < z) throw DomainError("partial_balance: cut left of z");
    total += sign * v.mass(left, c);
    left = c;
    sign = -sign;
  }
  total += sign * v.mass(left, v.support_right() > left ? v.support_right() : left);
  return total;
}

DpSolver::DpSolver(const Instance& inst, const Rational& eps, int m) : inst_(inst), eps_(eps), m_(m) {
  if (m < 1) throw DomainError("grid resolution must be >= 1");
  if (eps < 0) throw DomainError("eps must be >= 0");
  grid_.resize(m + 1);
  for (int l = 0; l <= m; ++l) grid_[l] = inst.domain_right * frac(l, m);
  for (const auto& a : inst.agents) {
    lo_.push_back(a.support_left());
    hi_.push_back(a.support_right());
    std::vector<Rational> cum(m + 1);
    for (int l = 1; l <= m; ++l) cum[l] = cum[l - 1] + a.mass(grid_[l - 1], grid_[l]);
    cum_.push_back(std::move(cum));
  }
}

DpSolver::Key DpSolver::root() const { return Key{0, inst_.cut_budget, {}}; }

// Candidates are tried as "no further cut" first, then the next cut left to
// right. A candidate whose settled agents already exceed eps, or cannot beat
// the best found so far, is not expanded; hence `value` is exact whenever it
// is <= eps.
template <class Child>
DpSolver::Entry DpSolver::evaluate(const Key& key, Child&& child) const {
  const int used = inst_.cut_budget - key.t;
  const int sign = used % 2 == 0 ? 1 : -1;
  const Rational& z = grid_[key.z];

  std::vector<std::size_t> straddling;  // agents carried in key.q, index order
  for (std::size_t i = 0; i < inst_.n(); ++i)
    if (lo_[i] < z && z < hi_[i]) straddling.push_back(i);
  if (straddling.size() != key.q.size()) throw std::logic_error("dp state does not match its position");

  std::optional<Entry> best;
  auto consider = [&](int r, bool cut) {
    const Rational& x = cut ? grid_[r] : inst_.domain_right;
    const int rr = cut ? r : m_;
    Rational worst = 0;
    std::vector<Rational> next_q;
    std::size_t s = 0;
    for (std::size_t i = 0; i < inst_.n(); ++i) {
      if (hi_[i] <= z || lo_[i] >= x) continue;
      Rational bal = sign * (cum_[i][rr] - cum_[i][key.z]);
      if (s < straddling.size() && straddling[s] == i) bal += key.q[s++];
      if (!cut || hi_[i] <= x) {
        worst = max(worst, abs(bal));
      } else {
        next_q.push_back(std::move(bal));
      }
    }
    if (best && worst >= best->value) return;
    Entry cand;
    cand.value = worst;
    if (cut && worst <= eps_) {
      const Entry& sub = child(Key{r, key.t - 1, std::move(next_q)});
      cand.value = max(worst, sub.value);
      cand.witness.reserve(sub.witness.size() + 1);
      cand.witness.push_back(grid_[r]);
      cand.witness.insert(cand.witness.end(), sub.witness.begin(), sub.witness.end());
    }
    if (!best || cand.value < best->value) best = std::move(cand);
  };

  consider(m_, false);
  if (key.t > 0)
    for (int r = key.z + 1; r < m_ && best->value > 0; ++r) consider(r, true);
  best->feasible = best->value <= eps_;
  return *best;
}

const DpSolver::Entry& DpSolver::lookup_or_solve(const Key& key) {
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  Entry e = evaluate(key, [this](const Key& k) -> const Entry& { return lookup_or_solve(k); });
  return memo_.emplace(key, std::move(e)).first->second;
}

std::optional<Solution> DpSolver::solve() {
  const Entry& e = lookup_or_solve(root());
  if (!e.feasible) return std::nullopt;
  return Solution::alternating(e.witness, 0);
}

DpSolver::Entry DpSolver::recompute_from_children(const Key& key) const {
  return evaluate(key, [this](const Key& k) -> const Entry& {
    auto it = memo_.find(k);
    if (it == memo_.end()) throw std::logic_error("child state missing from the memo table");
    return it->second;
  });
}

DpResult dp_solve_grid(const Instance& inst, const Rational& eps, int m) {
  DpSolver solver(inst, eps, m);
  DpResult res;
  res.solution = solver.solve();
  auto st = instance_stats(inst);
  res.stats = DpStats{solver.states_visited(), m, st.d, st.M};
  return res;
}

DpResult dp_solve(const Instance& inst, const Rational& eps) { return dp_solve_grid(inst, eps, dp_grid_size(inst, eps)); }

}  // namespace ccut
