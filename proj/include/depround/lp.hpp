#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tolerances.hpp"

// Linear programming on dense tableaus: a two-phase primal simplex with
// bounded variables handled by dynamic column complementing, so every
// nonbasic variable always sits at zero in the working representation.
// Built for the moderate instances this library produces itself (hundreds of
// rows and columns); export the model through lp_io for anything bigger.

namespace depround {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { minimize, maximize };
enum class RowType { le, ge, eq };

struct LpRow {
  std::vector<std::pair<int, double>> terms;  // (variable, coefficient)
  RowType type = RowType::le;
  double rhs = 0.0;
};

struct LpModel {
  Sense sense = Sense::minimize;
  std::vector<double> objective;
  std::vector<double> lower, upper;
  std::vector<LpRow> rows;

  int num_vars() const { return static_cast<int>(objective.size()); }

  int add_var(double lo, double hi, double obj) {
    objective.push_back(obj);
    lower.push_back(lo);
    upper.push_back(hi);
    return num_vars() - 1;
  }

  void add_row(RowType type, double rhs, std::vector<std::pair<int, double>> terms) {
    rows.push_back({std::move(terms), type, rhs});
  }

  void validate() const {
    const int n = num_vars();
    if (static_cast<int>(lower.size()) != n || static_cast<int>(upper.size()) != n)
      throw std::invalid_argument("bound arrays out of sync with objective");
    for (int j = 0; j < n; ++j) {
      if (!std::isfinite(lower[j]))
        throw std::invalid_argument("finite lower bounds required");
      if (upper[j] < lower[j] - kFeasTol)
        throw std::invalid_argument("empty variable bound interval");
    }
    for (const auto& row : rows)
      for (const auto& [j, a] : row.terms) {
        if (j < 0 || j >= n) throw std::invalid_argument("row references unknown variable");
        if (!std::isfinite(a)) throw std::invalid_argument("non-finite coefficient");
      }
  }
};

inline double row_activity(const LpRow& row, std::span<const double> x) {
  double s = 0.0;
  for (const auto& [j, a] : row.terms) s += a * x[j];
  return s;
}

// True when x satisfies all rows and bounds, each to a tolerance scaled by
// the row's coefficient mass.
inline bool lp_feasible(const LpModel& model, std::span<const double> x, double tol) {
  const int n = model.num_vars();
  if (static_cast<int>(x.size()) != n) return false;
  for (int j = 0; j < n; ++j) {
    if (x[j] < model.lower[j] - tol || x[j] > model.upper[j] + tol) return false;
  }
  for (const auto& row : model.rows) {
    double mass = std::abs(row.rhs);
    for (const auto& [j, a] : row.terms) mass += std::abs(a);
    const double slack = tol * (1.0 + mass);
    const double act = row_activity(row, x);
    switch (row.type) {
      case RowType::le:
        if (act > row.rhs + slack) return false;
        break;
      case RowType::ge:
        if (act < row.rhs - slack) return false;
        break;
      case RowType::eq:
        if (std::abs(act - row.rhs) > slack) return false;
        break;
    }
  }
  return true;
}

inline double lp_objective_value(const LpModel& model, std::span<const double> x) {
  double s = 0.0;
  for (int j = 0; j < model.num_vars(); ++j) s += model.objective[j] * x[j];
  return s;
}

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
  LpStatus status = LpStatus::iteration_limit;
  std::vector<double> x;
  double objective = 0.0;  // in the model's own sense
  int iterations = 0;
};

struct LpOptions {
  int max_iterations = 0;  // 0 = automatic from problem size
  int stall_threshold = 256;  // degenerate pivots before escalating the pricing rule
};

namespace detail {

// Dense simplex working state. Columns: structural variables first, then one
// slack or surplus per inequality, then artificials. All variables live in
// [0, ub] after shifting out the lower bounds; a complemented column stands
// for ub - x so the nonbasic value is always zero.
struct SimplexTableau {
  int m = 0, ncols = 0, nstruct = 0;
  std::vector<std::vector<double>> tab;  // m rows, ncols + 1 (rhs last)
  std::vector<double> cost;              // phase-2 reduced costs
  std::vector<double> cost1;             // phase-1 reduced costs
  std::vector<double> ub;                // per-column upper bound (shifted space)
  std::vector<std::uint8_t> flipped;     // column complemented?
  std::vector<std::uint8_t> banned;      // column may never enter
  std::vector<int> basis;                // basic column of each row
  std::vector<int> artificial_cols;
  std::vector<int> unit_col;  // per original row, its slack or artificial

  double& rhs(int r) { return tab[r][ncols]; }
  double rhs(int r) const { return tab[r][ncols]; }

  // Complement a nonbasic column: substitute x_j = ub_j - x~_j.
  void complement(int j) {
    const double u = ub[j];
    for (int r = 0; r < m; ++r) {
      if (tab[r][j] != 0.0) {
        tab[r][ncols] -= tab[r][j] * u;
        tab[r][j] = -tab[r][j];
      }
    }
    cost[j] = -cost[j];
    cost1[j] = -cost1[j];
    flipped[j] ^= 1;
  }

  // Send the basic variable of row r to its upper bound: complement it and
  // renormalize the row so the basic coefficient is +1 again.
  void flip_basic(int r) {
    const int k = basis[r];
    const double u = ub[k];
    for (int c = 0; c <= ncols; ++c) tab[r][c] = -tab[r][c];
    tab[r][k] = 1.0;
    tab[r][ncols] += u;
    flipped[k] ^= 1;
  }

  void pivot(int r, int j) {
    const double p = tab[r][j];
    const double inv = 1.0 / p;
    auto& row = tab[r];
    for (int c = 0; c <= ncols; ++c) row[c] *= inv;
    row[j] = 1.0;
    for (int i = 0; i < m; ++i) {
      if (i == r) continue;
      const double f = tab[i][j];
      if (f == 0.0) continue;
      auto& target = tab[i];
      for (int c = 0; c <= ncols; ++c) target[c] -= f * row[c];
      target[j] = 0.0;
    }
    const double fc = cost[j];
    if (fc != 0.0) {
      for (int c = 0; c < ncols; ++c) cost[c] -= fc * row[c];
      cost[j] = 0.0;
    }
    const double fc1 = cost1[j];
    if (fc1 != 0.0) {
      for (int c = 0; c < ncols; ++c) cost1[c] -= fc1 * row[c];
      cost1[j] = 0.0;
    }
    basis[r] = j;
  }
};

// Builds the initial tableau: lower bounds shifted to zero, rows normalized
// to nonnegative rhs and scaled by their largest coefficient, slack and
// artificial columns appended. Cost rows are raw (no elimination): pivoting
// keeps them reduced relative to whatever basis is built on top. A trivially
// infeasible constant row sets the flag instead of building.
inline SimplexTableau build_tableau(const LpModel& model, bool maximize,
                                    bool& const_infeasible) {
  const int n = model.num_vars();
  struct NormRow {
    std::vector<std::pair<int, double>> terms;
    RowType type;
    double rhs;
  };
  std::vector<NormRow> rows;
  rows.reserve(model.rows.size());
  const_infeasible = false;
  for (const auto& row : model.rows) {
    NormRow nr{row.terms, row.type, row.rhs};
    for (auto& [j, a] : nr.terms) nr.rhs -= a * model.lower[j];
    double scale = 0.0;
    for (const auto& [j, a] : nr.terms) scale = std::max(scale, std::abs(a));
    if (scale > 0.0) {
      const double inv = 1.0 / scale;
      for (auto& [j, a] : nr.terms) a *= inv;
      nr.rhs *= inv;
    } else if (scale == 0.0) {
      // Constant row: feasible or trivially infeasible.
      const bool bad = (nr.type == RowType::le && nr.rhs < -kFeasTol) ||
                       (nr.type == RowType::ge && nr.rhs > kFeasTol) ||
                       (nr.type == RowType::eq && std::abs(nr.rhs) > kFeasTol);
      if (bad) const_infeasible = true;
      continue;
    }
    if (nr.rhs < 0.0) {
      for (auto& [j, a] : nr.terms) a = -a;
      nr.rhs = -nr.rhs;
      if (nr.type == RowType::le)
        nr.type = RowType::ge;
      else if (nr.type == RowType::ge)
        nr.type = RowType::le;
    }
    rows.push_back(std::move(nr));
  }

  const int m = static_cast<int>(rows.size());
  int n_slack = 0, n_art = 0;
  for (const auto& r : rows) {
    if (r.type != RowType::eq) ++n_slack;
    if (r.type != RowType::le) ++n_art;
  }
  SimplexTableau t;
  t.m = m;
  t.nstruct = n;
  t.ncols = n + n_slack + n_art;
  t.tab.assign(m, std::vector<double>(t.ncols + 1, 0.0));
  t.cost.assign(t.ncols, 0.0);
  t.cost1.assign(t.ncols, 0.0);
  t.ub.assign(t.ncols, kInf);
  t.flipped.assign(t.ncols, 0);
  t.banned.assign(t.ncols, 0);
  t.basis.assign(m, -1);

  for (int j = 0; j < n; ++j) {
    t.ub[j] = model.upper[j] - model.lower[j];
    t.cost[j] = maximize ? -model.objective[j] : model.objective[j];
    if (t.ub[j] <= kPivotTol) t.banned[j] = 1;  // fixed variable
  }

  int next_col = n;
  t.unit_col.assign(m, -1);
  for (int r = 0; r < m; ++r) {
    for (const auto& [j, a] : rows[r].terms) t.tab[r][j] += a;
    t.rhs(r) = rows[r].rhs;
    if (rows[r].type == RowType::le) {
      t.tab[r][next_col] = 1.0;
      t.unit_col[r] = next_col;
      t.basis[r] = next_col++;
    } else if (rows[r].type == RowType::ge) {
      t.tab[r][next_col] = -1.0;
      ++next_col;  // surplus stays nonbasic at zero
    }
  }
  for (int r = 0; r < m; ++r) {
    if (rows[r].type == RowType::le) continue;
    t.tab[r][next_col] = 1.0;
    t.unit_col[r] = next_col;
    t.basis[r] = next_col;
    t.artificial_cols.push_back(next_col);
    ++next_col;
  }
  for (int col : t.artificial_cols) t.cost1[col] = 1.0;
  return t;
}

// Rebuilds the tableau from the original model for the current basis,
// washing out the floating error a long degenerate pivot run accumulates.
// Column state (bounds, bans, complement flags) carries over; the basis is
// refactorized by greedy partial pivoting. Returns false (leaving the input
// untouched) when a basis column has no usable pivot row.
inline bool refactorize(SimplexTableau& t, const LpModel& model, bool maximize) {
  bool const_infeasible = false;
  SimplexTableau fresh = build_tableau(model, maximize, const_infeasible);
  if (const_infeasible || fresh.m != t.m || fresh.ncols != t.ncols) return false;
  fresh.ub = t.ub;
  fresh.banned = t.banned;
  for (int j = 0; j < t.ncols; ++j)
    if (t.flipped[j]) fresh.complement(j);

  std::vector<std::uint8_t> row_used(fresh.m, 0);
  std::vector<int> choice(fresh.m, -1);  // column to make basic, per step
  for (int r = 0; r < t.m; ++r) choice[r] = t.basis[r];
  for (int step = 0; step < fresh.m; ++step) {
    const int col = choice[step];
    int best_row = -1;
    double best = 1e-8;
    for (int r = 0; r < fresh.m; ++r) {
      if (row_used[r]) continue;
      if (std::abs(fresh.tab[r][col]) > best) {
        best = std::abs(fresh.tab[r][col]);
        best_row = r;
      }
    }
    if (best_row < 0) return false;
    fresh.pivot(best_row, col);
    row_used[best_row] = 1;
  }
  for (int r = 0; r < fresh.m; ++r)
    if (fresh.rhs(r) < 0.0 && fresh.rhs(r) > -1e-9) fresh.rhs(r) = 0.0;
  t = std::move(fresh);
  return true;
}

}  // namespace detail

// Solves the model with a two-phase dense simplex. Requires finite lower
// bounds on every variable (the models this library builds always have them).
inline LpResult solve_lp(const LpModel& model, const LpOptions& options = {}) {
  model.validate();
  const int n = model.num_vars();
  const bool maximize = model.sense == Sense::maximize;

  bool const_infeasible = false;
  detail::SimplexTableau t = detail::build_tableau(model, maximize, const_infeasible);
  if (const_infeasible) return {LpStatus::infeasible, {}, 0.0, 0};
  const int m = t.m;

  // Phase-1 objective: minimize the sum of artificials. Reduced costs start
  // as 1 on each artificial, then basic artificial rows are subtracted out.
  const bool need_phase1 = !t.artificial_cols.empty();
  if (need_phase1) {
    for (int r = 0; r < m; ++r) {
      const int b = t.basis[r];
      if (t.cost1[b] != 0.0) {
        const double f = t.cost1[b];
        for (int c = 0; c < t.ncols; ++c) t.cost1[c] -= f * t.tab[r][c];
        t.cost1[b] = 0.0;
      }
    }
  }

  const int max_iters = options.max_iterations > 0
                            ? options.max_iterations
                            : 2000 + 60 * (m + t.ncols);
  const int refactor_interval = std::max(256, m);
  int iters = 0;
  int stall = 0;
  int since_refactor = 0;
  // Dantzig pricing cruises cheaply; a degenerate stall switches to a
  // steepest-edge rule, sticky for the rest of the phase, that normalizes
  // each reduced cost by its column length (symmetric instances tie thousands
  // of columns on raw reduced cost, and the geometry is what separates them).
  // Ties within either rule are broken by a seeded generator: a symmetric
  // instance can resonate with any fixed preference and walk its degenerate
  // fans exhaustively, while random tie-breaking decorrelates the walk. The
  // seed is fixed, so solves stay reproducible. Termination rests on the
  // lexicographic leaving rule under either rule.
  enum class Pricing { dantzig, steepest };
  Pricing pricing = Pricing::dantzig;
  std::uint64_t prng = 0x9e3779b97f4a7c15ull ^
                       (static_cast<std::uint64_t>(m) << 32) ^
                       static_cast<std::uint64_t>(t.ncols);
  auto next_rand = [&prng] {
    prng ^= prng << 13;
    prng ^= prng >> 7;
    prng ^= prng << 17;
    return prng;
  };

  std::vector<std::uint8_t> is_basic(t.ncols, 0);
  std::vector<int> cand;      // tied blocking rows, reused across iterations
  std::vector<int> epool;     // tied entering columns, reused across iterations
  std::vector<double> escore; // steepest-edge scores parallel to epool
  auto run_phase = [&](bool phase1) -> LpStatus {
    for (;;) {
      if (iters >= max_iters) return LpStatus::iteration_limit;
      if (since_refactor >= refactor_interval &&
          detail::refactorize(t, model, maximize))
        since_refactor = 0;
      const std::vector<double>& d = phase1 ? t.cost1 : t.cost;
      // Basic columns have reduced cost zero up to floating dust; letting one
      // re-enter through that dust would pivot it into a second row and make
      // the basis singular, so they are excluded outright.
      std::fill(is_basic.begin(), is_basic.end(), 0);
      for (int r = 0; r < t.m; ++r) is_basic[t.basis[r]] = 1;
      // Entering column, by the current pricing rule.
      int enter = -1;
      if (pricing == Pricing::dantzig) {
        double best = 0.0;
        for (int j = 0; j < t.ncols; ++j) {
          if (t.banned[j] || is_basic[j]) continue;
          if (d[j] < best) best = d[j];
        }
        if (best < -kPivotTol) {
          const double window = 1e-9 * (1.0 + std::abs(best));
          epool.clear();
          for (int j = 0; j < t.ncols; ++j) {
            if (t.banned[j] || is_basic[j]) continue;
            if (d[j] <= best + window) epool.push_back(j);
          }
          enter = epool[next_rand() % epool.size()];
        }
      } else {
        // Each score costs a full column scan, so one pass keeps a generous
        // shortlist against the running best and exact ties are filtered out
        // of it afterwards.
        double best_score = 0.0;
        epool.clear();
        escore.clear();
        for (int j = 0; j < t.ncols; ++j) {
          if (t.banned[j] || is_basic[j] || d[j] >= -kPivotTol) continue;
          double nrm = 1.0;
          for (int r = 0; r < t.m; ++r) nrm += t.tab[r][j] * t.tab[r][j];
          const double score = d[j] * d[j] / nrm;
          if (score > best_score) best_score = score;
          if (score >= 0.5 * best_score) {
            epool.push_back(j);
            escore.push_back(score);
          }
        }
        if (best_score > 0.0) {
          std::size_t kept = 0;
          for (std::size_t i = 0; i < epool.size(); ++i)
            if (escore[i] >= best_score * (1.0 - 1e-9)) epool[kept++] = epool[i];
          enter = epool[next_rand() % kept];
        }
      }
      if (enter < 0) return LpStatus::optimal;

      // Ratio test over three kinds of blocks: a basic variable dropping to
      // zero, a basic variable rising to its finite upper bound, or the
      // entering variable hitting its own upper bound. Pivot elements below
      // kRatioTol are treated as zero: dividing a row by near-dust turns it
      // into garbage, while skipping such a row leaves at most a
      // step * kRatioTol violation that the next rebuild clamps away.
      constexpr double kRatioTol = 1e-7;
      double row_t = kInf;
      int best_row = -1;
      bool best_at_upper = false;
      cand.clear();
      for (int r = 0; r < t.m; ++r) {
        const double a = t.tab[r][enter];
        double lim;
        if (a > kRatioTol) {
          lim = t.rhs(r) / a;
        } else if (a < -kRatioTol && std::isfinite(t.ub[t.basis[r]])) {
          lim = (t.ub[t.basis[r]] - t.rhs(r)) / (-a);
        } else {
          continue;
        }
        if (lim < 0.0) lim = 0.0;  // numerical dust on a degenerate row
        if (lim < row_t - 1e-9) {
          row_t = lim;
          cand.clear();
          cand.push_back(r);
        } else if (lim < row_t + 1e-9) {
          row_t = std::min(row_t, lim);
          cand.push_back(r);
        }
      }
      if (!cand.empty()) {
        if (cand.size() > 1) {
          // Keep only rows whose pivot magnitude is near the best candidate:
          // a small pivot amplifies row error when the row is normalized.
          double mag_max = 0.0;
          for (int r : cand)
            mag_max = std::max(mag_max, std::abs(t.tab[r][enter]));
          std::size_t w = 0;
          for (int r : cand)
            if (std::abs(t.tab[r][enter]) >= 0.1 * mag_max) cand[w++] = r;
          cand.resize(w);
        }
        // Lexicographic tie-break: compare candidate rows scaled by their
        // pivot entry over the inverse-basis columns in a fixed order. The
        // choice is unique in exact arithmetic, so tie cycles cannot form
        // around a degenerate vertex.
        for (int c = 0; c < t.m && cand.size() > 1; ++c) {
          const int col = t.unit_col[c];
          double vmin = kInf;
          for (int r : cand)
            vmin = std::min(vmin, t.tab[r][col] / t.tab[r][enter]);
          const double tol = 1e-12 * (1.0 + std::abs(vmin));
          std::size_t w = 0;
          for (int r : cand)
            if (t.tab[r][col] / t.tab[r][enter] <= vmin + tol) cand[w++] = r;
          cand.resize(w);
        }
        best_row = cand.front();
        best_at_upper = t.tab[best_row][enter] < 0.0;
      }
      if (best_row < 0 && !std::isfinite(t.ub[enter])) {
        if (phase1) throw std::logic_error("phase-1 objective cannot be unbounded");
        return LpStatus::unbounded;
      }
      const double step = std::min(row_t, t.ub[enter]);
      ++iters;
      ++since_refactor;
      const bool bound_flip = t.ub[enter] < row_t - 1e-12;
      // A long degenerate run escalates the pricing rule for the rest of the
      // phase (with a rebuild, so the next rule sees accurate reduced costs).
      // Near-zero steps count as degenerate; bound flips keep the basis, so
      // they neither stall nor resolve one.
      if (!bound_flip) {
        if (step <= 1e-7) {
          if (++stall > options.stall_threshold &&
              pricing == Pricing::dantzig) {
            pricing = Pricing::steepest;
            stall = 0;
            if (detail::refactorize(t, model, maximize)) {
              since_refactor = 0;
              continue;
            }
          }
        } else {
          stall = 0;
        }
      }
      if (bound_flip) {
        t.complement(enter);  // entering variable rides to its upper bound
        continue;
      }
      if (best_at_upper) t.flip_basic(best_row);
      t.pivot(best_row, enter);
    }
  };

  if (need_phase1) {
    const LpStatus s1 = run_phase(true);
    if (s1 == LpStatus::iteration_limit) return {LpStatus::iteration_limit, {}, 0.0, iters};
    double infeas = 0.0;
    for (int r = 0; r < m; ++r) {
      bool art = false;
      for (int col : t.artificial_cols)
        if (t.basis[r] == col) art = true;
      if (art) infeas += t.rhs(r);
    }
    if (infeas > kFeasTol * (1.0 + m)) return {LpStatus::infeasible, {}, 0.0, iters};
    // Pivot artificials out of the basis where possible; leftover rows are
    // redundant and inert. Artificials never re-enter.
    for (int col : t.artificial_cols) {
      t.banned[col] = 1;
      t.ub[col] = 0.0;
    }
    for (int r = 0; r < m; ++r) {
      bool art = false;
      for (int col : t.artificial_cols)
        if (t.basis[r] == col) art = true;
      if (!art) continue;
      std::fill(is_basic.begin(), is_basic.end(), 0);
      for (int rr = 0; rr < m; ++rr) is_basic[t.basis[rr]] = 1;
      int pick = -1;
      double best = kPivotTol * 64;
      const int non_art = t.ncols - static_cast<int>(t.artificial_cols.size());
      for (int j = 0; j < non_art; ++j) {
        if (t.banned[j] || is_basic[j]) continue;
        if (std::abs(t.tab[r][j]) > best) {
          best = std::abs(t.tab[r][j]);
          pick = j;
        }
      }
      if (pick >= 0) t.pivot(r, pick);
    }
    stall = 0;
    pricing = Pricing::dantzig;
  }

  const LpStatus s2 = run_phase(false);
  if (s2 != LpStatus::optimal) return {s2, {}, 0.0, iters};
  if (since_refactor > 0) detail::refactorize(t, model, maximize);

  // Extract the solution back through complements and lower-bound shifts.
  std::vector<double> shifted(t.ncols, 0.0);
  for (int r = 0; r < m; ++r) shifted[t.basis[r]] = t.rhs(r);
  std::vector<double> x(n);
  for (int j = 0; j < n; ++j) {
    double v = t.flipped[j] ? t.ub[j] - shifted[j] : shifted[j];
    v += model.lower[j];
    x[j] = std::clamp(v, model.lower[j], model.upper[j]);
  }
  if (!lp_feasible(model, x, 1e-6))
    throw std::logic_error("simplex produced an infeasible point");
  const double obj = lp_objective_value(model, x);
  return {LpStatus::optimal, std::move(x), obj, iters};
}

}  // namespace depround
