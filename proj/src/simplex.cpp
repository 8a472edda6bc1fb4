#include "ccut/simplex.hpp"

#include <sstream>

namespace ccut {

int LinearProgram::add_var(std::string name, Rational lo, std::optional<Rational> hi) {
  names.push_back(std::move(name));
  lower.push_back(std::move(lo));
  upper.push_back(std::move(hi));
  for (auto& r : rows) r.coeffs.resize(num_vars());
  if (!objective.empty()) objective.resize(num_vars());
  return static_cast<int>(num_vars()) - 1;
}

LinearConstraint& LinearProgram::add_row(Sense s, Rational rhs) {
  rows.push_back({std::vector<Rational>(num_vars()), s, std::move(rhs)});
  return rows.back();
}

namespace {

class Tableau {
 public:
  std::vector<std::vector<Rational>> a;
  std::vector<Rational> b;
  std::vector<int> basis;
  std::vector<Rational> d;  // reduced costs
  Rational val;
  std::vector<bool> excluded;
  long pivots = 0;

  void pivot(std::size_t r, std::size_t e) {
    ++pivots;
    Rational piv = a[r][e];
    for (auto& x : a[r])
      if (x != 0) x /= piv;
    b[r] /= piv;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i == r || a[i][e] == 0) continue;
      Rational f = a[i][e];
      for (std::size_t j = 0; j < a[i].size(); ++j)
        if (a[r][j] != 0) a[i][j] -= f * a[r][j];
      b[i] -= f * b[r];
    }
    if (d[e] != 0) {
      Rational f = d[e];
      for (std::size_t j = 0; j < d.size(); ++j)
        if (a[r][j] != 0) d[j] -= f * a[r][j];
      val += f * b[r];
    }
    basis[r] = static_cast<int>(e);
  }

  // Returns false when unbounded.
  bool run() {
    for (;;) {
      std::size_t e = d.size();
      for (std::size_t j = 0; j < d.size(); ++j)
        if (!excluded[j] && d[j] < 0) {
          e = j;
          break;
        }
      if (e == d.size()) return true;
      std::size_t r = a.size();
      Rational best;
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i][e] <= 0) continue;
        Rational ratio = b[i] / a[i][e];
        if (r == a.size() || ratio < best || (ratio == best && basis[i] < basis[r])) {
          r = i;
          best = ratio;
        }
      }
      if (r == a.size()) return false;
      pivot(r, e);
    }
  }
};

}  // namespace

LPResult solve_lp(const LinearProgram& lp) {
  const std::size_t n = lp.num_vars();
  struct Row {
    std::vector<Rational> c;
    Sense s;
    Rational rhs;
  };
  std::vector<Row> rows;
  for (const auto& r : lp.rows) {
    Row row{r.coeffs, r.sense, r.rhs};
    row.c.resize(n);
    for (std::size_t j = 0; j < n; ++j)
      if (row.c[j] != 0) row.rhs -= row.c[j] * lp.lower[j];
    rows.push_back(std::move(row));
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!lp.upper[j]) continue;
    if (*lp.upper[j] < lp.lower[j]) return {};
    Row row{std::vector<Rational>(n), Sense::LE, *lp.upper[j] - lp.lower[j]};
    row.c[j] = 1;
    rows.push_back(std::move(row));
  }
  for (auto& row : rows) {
    if (row.rhs < 0) {
      for (auto& x : row.c) x = -x;
      row.rhs = -row.rhs;
      if (row.s == Sense::LE) row.s = Sense::GE;
      else if (row.s == Sense::GE) row.s = Sense::LE;
    }
  }

  const std::size_t m = rows.size();
  std::size_t n_slack = 0, n_art = 0;
  for (const auto& row : rows) {
    if (row.s != Sense::EQ) ++n_slack;
    if (row.s != Sense::LE) ++n_art;
  }
  const std::size_t cols = n + n_slack + n_art;
  Tableau t;
  t.a.assign(m, std::vector<Rational>(cols));
  t.b.resize(m);
  t.basis.resize(m);
  t.d.assign(cols, Rational(0));
  t.excluded.assign(cols, false);
  t.val = 0;
  std::size_t slack = n, art = n + n_slack;
  const std::size_t art_begin = art;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t.a[i][j] = rows[i].c[j];
    t.b[i] = rows[i].rhs;
    if (rows[i].s == Sense::LE) {
      t.a[i][slack] = 1;
      t.basis[i] = static_cast<int>(slack++);
    } else {
      if (rows[i].s == Sense::GE) t.a[i][slack++] = -1;
      t.a[i][art] = 1;
      t.basis[i] = static_cast<int>(art++);
      // phase-1 cost 1 on the artificial: d = c - c_B^T A
      for (std::size_t j = 0; j < art_begin; ++j)
        if (t.a[i][j] != 0) t.d[j] -= t.a[i][j];
      t.val += t.b[i];
    }
  }

  LPResult res;
  if (n_art > 0) {
    t.run();  // phase 1 is bounded below by 0
    if (t.val != 0) {
      res.pivots = t.pivots;
      res.status = LPResult::Status::Infeasible;
      return res;
    }
    // drive artificial variables out of the basis
    for (std::size_t i = 0; i < t.a.size();) {
      if (static_cast<std::size_t>(t.basis[i]) < art_begin) {
        ++i;
        continue;
      }
      std::size_t e = art_begin;
      for (std::size_t j = 0; j < art_begin; ++j)
        if (t.a[i][j] != 0) {
          e = j;
          break;
        }
      if (e < art_begin) {
        t.pivot(i, e);
        ++i;
      } else {  // redundant row
        t.a.erase(t.a.begin() + static_cast<long>(i));
        t.b.erase(t.b.begin() + static_cast<long>(i));
        t.basis.erase(t.basis.begin() + static_cast<long>(i));
      }
    }
    for (std::size_t j = art_begin; j < cols; ++j) t.excluded[j] = true;
  }

  // phase 2
  std::vector<Rational> cost(cols, Rational(0));
  for (std::size_t j = 0; j < n && j < lp.objective.size(); ++j) cost[j] = lp.objective[j];
  t.d = cost;
  t.val = 0;
  for (std::size_t i = 0; i < t.a.size(); ++i) {
    const Rational& cb = cost[t.basis[i]];
    if (cb == 0) continue;
    for (std::size_t j = 0; j < cols; ++j)
      if (t.a[i][j] != 0) t.d[j] -= cb * t.a[i][j];
    t.val += cb * t.b[i];
  }
  bool bounded = t.run();
  res.pivots = t.pivots;
  if (!bounded) {
    res.status = LPResult::Status::Unbounded;
    return res;
  }
  res.status = LPResult::Status::Optimal;
  res.x = lp.lower;
  for (std::size_t i = 0; i < t.a.size(); ++i)
    if (static_cast<std::size_t>(t.basis[i]) < n) res.x[t.basis[i]] += t.b[i];
  res.objective = 0;
  for (std::size_t j = 0; j < n && j < lp.objective.size(); ++j) res.objective += lp.objective[j] * res.x[j];
  return res;
}

std::string dump_lp(const LinearProgram& lp) {
  std::ostringstream os;
  auto term_list = [&](const std::vector<Rational>& c) {
    bool first = true;
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (c[j] == 0) continue;
      os << (first ? "" : " + ") << to_string(c[j]) << "*" << lp.names[j];
      first = false;
    }
    if (first) os << "0";
  };
  if (lp.objective.empty()) {
    os << "feasibility\n";
  } else {
    os << "minimize ";
    term_list(lp.objective);
    os << "\n";
  }
  os << "subject to\n";
  for (const auto& r : lp.rows) {
    os << "  ";
    term_list(r.coeffs);
    os << (r.sense == Sense::LE ? " <= " : r.sense == Sense::GE ? " >= " : " = ") << to_string(r.rhs) << "\n";
  }
  os << "bounds\n";
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    os << "  " << to_string(lp.lower[j]) << " <= " << lp.names[j];
    if (lp.upper[j]) os << " <= " << to_string(*lp.upper[j]);
    os << "\n";
  }
  return os.str();
}

}  // namespace ccut
