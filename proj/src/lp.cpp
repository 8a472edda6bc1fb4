#include "ccut/lp.hpp"

#include <algorithm>
#include <limits>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

namespace ccut {

namespace {

// Density of each agent in each cell of `p`.
std::vector<std::vector<Rational>> cell_densities(const Instance& inst, const std::vector<Rational>& p) {
  std::vector<std::vector<Rational>> h(inst.n());
  for (std::size_t i = 0; i < inst.n(); ++i)
    for (std::size_t c = 0; c + 1 < p.size(); ++c) h[i].push_back(inst.agents[i].density_at(p[c]));
  return h;
}

int sign_of(Label l) { return l == 0 ? 1 : -1; }

std::size_t bit_length(const Rational& r) {
  return mpz_sizeinbase(r.get_num_mpz_t(), 2) + mpz_sizeinbase(r.get_den_mpz_t(), 2);
}

// Advances a strictly increasing combination of `size` elements of [0, m).
bool next_combination(std::vector<int>& c, int m) {
  const int size = static_cast<int>(c.size());
  int pos = size - 1;
  while (pos >= 0 && c[pos] == m - size + pos) --pos;
  if (pos < 0) return false;
  ++c[pos];
  for (int s = pos + 1; s < size; ++s) c[s] = c[s - 1] + 1;
  return true;
}

}  // namespace

BreakpointGrid breakpoints(const Instance& inst) {
  std::set<Rational> pts;
  for (const auto& a : inst.agents)
    for (const auto& b : a.blocks())
      if (b.height > 0) pts.insert(b.left), pts.insert(b.right);
  BreakpointGrid g{std::vector<Rational>(pts.begin(), pts.end())};
  for (std::size_t j = 0; j + 1 < g.points.size(); ++j)
    if (!(g.points[j] < g.points[j + 1])) throw std::logic_error("zero-length cell after deduplication");
  return g;
}

Solution midpoint_solution(const Instance& inst) {
  const auto grid = breakpoints(inst);
  const int k = inst.k;
  Solution s;
  s.labels.push_back(0);
  for (int c = 0; c < grid.m(); ++c) {
    const Rational& a = grid.points[c];
    Rational len = grid.points[c + 1] - a;
    bool reversed = c % 2 == 1;
    for (int part = 1; part < k; ++part) {
      s.cuts.push_back(a + len * frac(part, k));
      s.labels.push_back(reversed ? k - 1 - part : part);
    }
  }
  return s;
}

Label SlotAssignment::free_cell_label(int cell) const {
  auto before = std::lower_bound(cut_cells.begin(), cut_cells.end(), cell) - cut_cells.begin();
  return static_cast<Label>(before % 2);
}

bool SlotAssignment::well_formed(const BreakpointGrid& grid) const {
  for (std::size_t s = 0; s < cut_cells.size(); ++s) {
    if (cut_cells[s] < 0 || cut_cells[s] >= grid.m()) return false;
    if (s > 0 && cut_cells[s] <= cut_cells[s - 1]) return false;
  }
  return true;
}

LinearProgram slot_program(const Instance& inst, const BreakpointGrid& grid, const SlotAssignment& slots) {
  if (inst.k != 2) throw ArityError("the slot system is for two labels");
  if (!slots.well_formed(grid)) throw DomainError("slot assignment does not fit the breakpoint grid");
  const auto& p = grid.points;
  const auto h = cell_densities(inst, p);
  LinearProgram lp;
  for (std::size_t s = 0; s < slots.cut_cells.size(); ++s) {
    int c = slots.cut_cells[s];
    lp.add_var("x" + std::to_string(s), p[c], p[c + 1]);
  }
  for (std::size_t i = 0; i < inst.n(); ++i) {
    // mu_i(A+) - mu_i(A-) = 0; a cut cell with orientation o contributes
    // s_o h (x - a) - s_o h (b - x) = 2 s_o h x - s_o h (a + b).
    Rational constant = 0;
    std::vector<Rational> coeffs(lp.num_vars(), Rational(0));
    std::size_t s = 0;
    for (int c = 0; c < grid.m(); ++c) {
      if (s < slots.cut_cells.size() && slots.cut_cells[s] == c) {
        int o = sign_of(slots.orientation(s));
        coeffs[s] += 2 * o * h[i][c];
        constant -= o * h[i][c] * (p[c] + p[c + 1]);
        ++s;
      } else {
        constant += sign_of(slots.free_cell_label(c)) * h[i][c] * (p[c + 1] - p[c]);
      }
    }
    auto& row = lp.add_row(Sense::EQ, -constant);
    row.coeffs = std::move(coeffs);
  }
  return lp;
}

SlotResult lp_feasible(const Instance& inst, const BreakpointGrid& grid, const SlotAssignment& slots) {
  auto res = solve_lp(slot_program(inst, grid, slots));
  SlotResult out;
  out.pivots = res.pivots;
  if (res.status != LPResult::Status::Optimal) return out;
  out.feasible = true;
  out.cuts = res.x;
  out.solution = Solution::alternating(res.x, 0);
  return out;
}

SlotResult lp_feasible(const Instance& inst, const SlotAssignment& slots) {
  return lp_feasible(inst, breakpoints(inst), slots);
}

BudgetResult solve_with_budget(const Instance& inst, int ell, int jobs) {
  if (inst.k != 2) throw ArityError("solve_with_budget needs k = 2");
  if (ell < 1) throw DomainError("ell must be >= 1");
  BudgetResult out;
  out.budget = 2 * static_cast<int>(inst.n()) - ell;
  if (out.budget < 0) throw DomainError("cut budget 2n - ell is negative");
  const auto grid = breakpoints(inst);
  out.cells = grid.m();
  if (grid.m() <= out.budget) {
    out.solution = midpoint_solution(inst);
    return out;
  }

  // Lexicographic subsets, handed out in order; the lowest-index feasible
  // subset wins regardless of which worker finds it.
  std::mutex mu;
  std::vector<int> current(out.budget);
  for (int s = 0; s < out.budget; ++s) current[s] = s;
  bool exhausted = false;
  long next_index = 0, total = 0;
  long best_index = std::numeric_limits<long>::max();
  SlotResult best;
  SlotAssignment best_slots;

  auto worker = [&] {
    for (;;) {
      SlotAssignment slots;
      long index;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (exhausted || next_index >= best_index) return;
        slots.cut_cells = current;
        index = next_index++;
        total = next_index;
        if (!next_combination(current, grid.m())) exhausted = true;
      }
      auto r = lp_feasible(inst, grid, slots);
      if (r.feasible) {
        std::lock_guard<std::mutex> lock(mu);
        if (index < best_index) {
          best_index = index;
          best = std::move(r);
          best_slots = std::move(slots);
        }
      }
    }
  };
  const int threads = std::max(1, jobs);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (best_index == std::numeric_limits<long>::max()) {
    out.subsets_tried = total;
    return out;
  }
  out.subsets_tried = best_index + 1;
  out.solution = best.solution;
  out.program = slot_program(inst, grid, best_slots);
  out.slots = std::move(best_slots);
  return out;
}

Rational refine_threshold(const Instance& inst) {
  std::size_t bits = bit_length(inst.domain_right);
  for (const auto& a : inst.agents)
    for (const auto& b : a.blocks()) bits += bit_length(b.left) + bit_length(b.right) + bit_length(b.height);
  return pow2(-8 * static_cast<long>(bits + inst.n() + static_cast<std::size_t>(inst.k)));
}

RefineResult refine_exact(const Instance& inst, const Solution& approx, const Rational& eps, const RefineConfig& cfg) {
  check_solution(inst, approx);
  if (inst.k < 2) throw ArityError("refinement needs k >= 2");
  RefineResult out;
  out.threshold = cfg.threshold ? *cfg.threshold : refine_threshold(inst);
  out.best_effort = eps > out.threshold;

  std::set<Rational> pset{Rational(0), inst.domain_right};
  for (const auto& a : inst.agents)
    for (const auto& b : a.blocks()) pset.insert(b.left), pset.insert(b.right);
  const std::vector<Rational> p(pset.begin(), pset.end());
  const int cells = static_cast<int>(p.size()) - 1;
  const auto h = cell_densities(inst, p);
  const std::size_t T = approx.cuts.size();

  // Cell of every cut; a cut on a breakpoint takes the cell to its right.
  std::vector<int> cell(T);
  LinearProgram& lp = out.program;
  for (std::size_t t = 0; t < T; ++t) {
    int c = static_cast<int>(std::upper_bound(p.begin(), p.end(), approx.cuts[t]) - p.begin()) - 1;
    cell[t] = std::min(c, cells - 1);
    lp.add_var("x" + std::to_string(t), p[cell[t]], p[cell[t] + 1]);
  }
  const int z = lp.add_var("z", 0);
  for (std::size_t t = 0; t + 1 < T; ++t)
    if (cell[t] == cell[t + 1]) {
      auto& row = lp.add_row(Sense::LE, 0);
      row.coeffs[t] = 1;
      row.coeffs[t + 1] = -1;
    }

  const int k = inst.k;
  for (std::size_t i = 0; i < inst.n(); ++i) {
    // F_i(x_t) = F_i(p_c) + h (x_t - p_c); F_i at 0 is 0 and at D is 1.
    std::vector<Rational> F(p.size());
    for (int c = 0; c < cells; ++c) F[c + 1] = F[c] + h[i][c] * (p[c + 1] - p[c]);
    std::vector<std::vector<Rational>> coeff(k, std::vector<Rational>(lp.num_vars(), Rational(0)));
    std::vector<Rational> constant(k, Rational(0));
    // segment s runs from cut s-1 (or 0) to cut s (or D) with label labels[s]
    for (std::size_t s = 0; s <= T; ++s) {
      Label l = approx.labels[s];
      if (s < T) {
        coeff[l][s] += h[i][cell[s]];
        constant[l] += F[cell[s]] - h[i][cell[s]] * p[cell[s]];
      } else {
        constant[l] += F[cells];
      }
      if (s > 0) {
        coeff[l][s - 1] -= h[i][cell[s - 1]];
        constant[l] -= F[cell[s - 1]] - h[i][cell[s - 1]] * p[cell[s - 1]];
      }
    }
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b)
        for (int dir : {1, -1}) {
          // dir (mu_a - mu_b) - z <= 0
          auto& row = lp.add_row(Sense::LE, -dir * (constant[a] - constant[b]));
          for (std::size_t v = 0; v < T; ++v) row.coeffs[v] = dir * (coeff[a][v] - coeff[b][v]);
          row.coeffs[z] = -1;
        }
  }
  lp.objective.assign(lp.num_vars(), Rational(0));
  lp.objective[z] = 1;

  auto res = solve_lp(lp);
  out.pivots = res.pivots;
  if (res.status != LPResult::Status::Optimal)
    throw std::logic_error("refinement program has no optimum although the approximate solution is feasible");
  out.z = res.x[z];
  out.solution.cuts.assign(res.x.begin(), res.x.begin() + static_cast<long>(T));
  out.solution.labels = approx.labels;
  out.exact = out.z == 0;
  return out;
}

}  // namespace ccut
