#include "ccut/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <set>
#include <thread>

#include "ccut/simplex.hpp"

namespace ccut {

namespace {

double choose(int n, int k) {
  if (k < 0 || k > n) return 0;
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Calls visit(labels) for every labeling admitted by the mode; stops when
// visit returns true.
bool for_each_labeling(int segments, int k, LabelMode mode, const std::function<bool(const std::vector<Label>&)>& visit) {
  std::vector<Label> labels(segments);
  if (mode == LabelMode::AlternatingEither) {
    for (Label first : {0, 1}) {
      for (int t = 0; t < segments; ++t) labels[t] = (first + t) % 2;
      if (visit(labels)) return true;
    }
    return false;
  }
  std::fill(labels.begin(), labels.end(), 0);
  for (;;) {
    if (visit(labels)) return true;
    int pos = segments - 1;
    while (pos >= 0 && labels[pos] == k - 1) labels[pos--] = 0;
    if (pos < 0) return false;
    ++labels[pos];
  }
}

bool satisfied(const Instance& inst, const Solution& s, const Rational& eps) {
  for (const auto& a : inst.agents) {
    auto m = label_masses(a, s, inst.k);
    auto [lo, hi] = std::minmax_element(m.begin(), m.end());
    if (*hi - *lo > eps) return false;
  }
  return true;
}

// Enumerates strictly increasing index tuples from {1..m-1} whose first
// element (0 for the empty tuple) passes first_filter; on_found returns true
// to stop.
void search(const Instance& inst, const Rational& eps, const GridSearchConfig& cfg,
            const std::function<bool(int)>& first_filter, const std::function<bool(const Solution&)>& on_found,
            const std::atomic<bool>& stop) {
  std::vector<Rational> grid(cfg.m + 1);
  for (int l = 0; l <= cfg.m; ++l) grid[l] = inst.domain_right * frac(l, cfg.m);
  for (int t = 0; t <= cfg.max_cuts && t <= cfg.m - 1; ++t) {
    std::vector<int> idx(t);
    for (int s = 0; s < t; ++s) idx[s] = s + 1;
    for (;;) {
      if (stop.load()) return;
      if (first_filter(t == 0 ? 0 : idx[0])) {
        Solution s;
        for (int v : idx) s.cuts.push_back(grid[v]);
        bool done = for_each_labeling(t + 1, inst.k, cfg.mode, [&](const std::vector<Label>& labels) {
          s.labels = labels;
          return satisfied(inst, s, eps) && on_found(s);
        });
        if (done) return;
      }
      int pos = t - 1;
      while (pos >= 0 && idx[pos] == cfg.m - 1 - (t - 1 - pos)) --pos;
      if (pos < 0) break;
      ++idx[pos];
      for (int s = pos + 1; s < t; ++s) idx[s] = idx[s - 1] + 1;
    }
  }
}

std::vector<Solution> run_search(const Instance& inst, const Rational& eps, const GridSearchConfig& cfg, bool first_only) {
  if (cfg.m < 1) throw DomainError("grid resolution must be >= 1");
  if (cfg.mode == LabelMode::AlternatingEither && inst.k != 2)
    throw ArityError("alternating label mode needs k = 2");
  double work = brute_force_work(inst, cfg);
  if (work > cfg.work_limit) throw WorkLimitExceeded("oracle work estimate " + std::to_string(work) + " exceeds limit");

  std::mutex mu;
  std::vector<std::pair<int, Solution>> found;  // (partition, solution)
  std::atomic<bool> stop{false};
  int jobs = std::max(1, cfg.jobs);
  auto worker = [&](int part) {
    // partition by first-cut index; the cut-free tuple belongs to partition 0
    std::atomic<bool> never{false};
    search(
        inst, eps, cfg, [&](int first) { return first % jobs == part; },
        [&](const Solution& s) {
          std::lock_guard<std::mutex> lk(mu);
          found.emplace_back(part, s);
          if (first_only) stop.store(true);
          return first_only;
        },
        first_only ? stop : never);
  };
  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int p = 0; p < jobs; ++p) pool.emplace_back(worker, p);
    for (auto& th : pool) th.join();
  }
  // Deterministic result order: fewest cuts, then lexicographic cuts/labels.
  std::vector<Solution> out;
  for (auto& f : found) out.push_back(std::move(f.second));
  std::sort(out.begin(), out.end(), [](const Solution& a, const Solution& b) {
    if (a.cuts.size() != b.cuts.size()) return a.cuts.size() < b.cuts.size();
    if (a.cuts != b.cuts) return a.cuts < b.cuts;
    return a.labels < b.labels;
  });
  return out;
}

}  // namespace

double brute_force_work(const Instance& inst, const GridSearchConfig& cfg) {
  double total = 0;
  for (int t = 0; t <= cfg.max_cuts; ++t) {
    double labelings = cfg.mode == LabelMode::AlternatingEither ? 2 : std::pow(inst.k, t + 1);
    total += choose(cfg.m - 1, t) * labelings * std::max<std::size_t>(1, inst.n());
  }
  return total;
}

std::optional<Solution> brute_force(const Instance& inst, const Rational& eps, const GridSearchConfig& cfg) {
  auto all = run_search(inst, eps, cfg, true);
  if (all.empty()) return std::nullopt;
  return all.front();
}

std::vector<Solution> brute_force_all(const Instance& inst, const Rational& eps, const GridSearchConfig& cfg) {
  return run_search(inst, eps, cfg, false);
}

Solution insert_flip_cut(const Solution& s, const Rational& r) {
  std::size_t idx = std::upper_bound(s.cuts.begin(), s.cuts.end(), r) - s.cuts.begin();
  Solution out;
  out.cuts = s.cuts;
  out.cuts.insert(out.cuts.begin() + static_cast<long>(idx), r);
  out.labels.assign(s.labels.begin(), s.labels.begin() + static_cast<long>(idx) + 1);
  for (std::size_t t = idx; t < s.labels.size(); ++t) {
    if (s.labels[t] > 1) throw ArityError("insert_flip_cut needs a two-label solution");
    out.labels.push_back(1 - s.labels[t]);
  }
  return out;
}

std::vector<Rational> enumerate_gate_cuts(const Instance& inst, std::size_t agent, const Solution& fixed,
                                          const Rational& lo, const Rational& hi, const Rational& eps, int m) {
  if (m < 1) throw DomainError("grid resolution must be >= 1");
  std::vector<Rational> ok;
  Rational step = (hi - lo) / m;
  const Valuation& v = inst.agents.at(agent);
  for (int l = 0; l <= m; ++l) {
    Rational r = lo + step * l;
    if (abs(balance(v, insert_flip_cut(fixed, r))) <= eps) ok.push_back(r);
  }
  return ok;
}

std::optional<Solution> cell_search(const Instance& inst, int max_cuts) {
  if (inst.k != 2) throw ArityError("cell_search needs k = 2");
  std::set<Rational> pts{Rational(0), inst.domain_right};
  for (const auto& a : inst.agents)
    for (const auto& b : a.blocks()) pts.insert(b.left), pts.insert(b.right);
  std::vector<Rational> p(pts.begin(), pts.end());
  const int cells = static_cast<int>(p.size()) - 1;
  const std::size_t n = inst.n();

  // cumulative mass at each breakpoint and density in each cell
  std::vector<std::vector<Rational>> F(n, std::vector<Rational>(p.size())), h(n, std::vector<Rational>(cells));
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < cells; ++c) {
      h[i][c] = inst.agents[i].mass(p[c], p[c + 1]) / (p[c + 1] - p[c]);
      F[i][c + 1] = F[i][c] + h[i][c] * (p[c + 1] - p[c]);
    }
  }

  for (int t = 0; t <= max_cuts; ++t) {
    std::vector<int> cell(t, 0);  // non-decreasing
    for (;;) {
      for (int first : {0, 1}) {
        // balance_i = -s_0 F(0) + sum_s (s_{s-1} - s_s) F(x_s) + s_t F(D), s = +-1
        auto sign = [&](int seg) { return ((first + seg) % 2 == 0) ? 1 : -1; };
        LinearProgram lp;
        for (int s = 0; s < t; ++s) lp.add_var("x" + std::to_string(s), p[cell[s]], p[cell[s] + 1]);
        for (int s = 0; s + 1 < t; ++s) {
          auto& row = lp.add_row(Sense::LE, 0);
          row.coeffs[s] = 1;
          row.coeffs[s + 1] = -1;
        }
        for (std::size_t i = 0; i < n; ++i) {
          auto& row = lp.add_row(Sense::EQ, 0);
          Rational constant = -sign(0) * F[i][0] + sign(t) * F[i][cells];
          for (int s = 0; s < t; ++s) {
            int w = sign(s) - sign(s + 1);
            // F(x) = F(p_c) + h (x - p_c) inside cell c
            int c = cell[s];
            row.coeffs[s] += w * h[i][c];
            constant += w * (F[i][c] - h[i][c] * p[c]);
          }
          row.rhs = -constant;
        }
        auto res = solve_lp(lp);
        if (res.status == LPResult::Status::Optimal) {
          Solution s = Solution::alternating(res.x, first);
          return s;
        }
      }
      int pos = t - 1;
      while (pos >= 0 && cell[pos] == cells - 1) --pos;
      if (pos < 0) break;
      ++cell[pos];
      for (int s = pos + 1; s < t; ++s) cell[s] = cell[pos];
    }
  }
  return std::nullopt;
}

}  // namespace ccut
