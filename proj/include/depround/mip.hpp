#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

#include "lp.hpp"
#include "tolerances.hpp"

// Branch and bound over the dense LP solver: best-first on the relaxation
// bound, most-fractional branching, child relaxations solved eagerly so the
// queue always holds true bounds. Meant for the binary models this library
// builds (routing congestion, per-cell coverage subproblems).

namespace depround {

enum class IlpStatus { optimal, infeasible, limit_feasible, limit_infeasible, unbounded };

struct IlpOptions {
  std::vector<int> integer_vars;  // empty = every variable is integral
  double gap_tol = 1e-9;          // relative gap at which the search stops
  long max_nodes = 200000;
  double time_limit_s = kInf;
  // When every feasible objective is an integer (pure binary costs and
  // coefficients), bounds can be rounded inward, which prunes much harder.
  bool objective_is_integral = false;
  std::optional<std::vector<double>> warm_start;  // feasible integral point
  LpOptions lp;
};

struct IlpResult {
  IlpStatus status = IlpStatus::limit_infeasible;
  std::vector<double> x;
  double objective = 0.0;   // model sense
  double best_bound = 0.0;  // model sense
  double gap = kInf;        // relative, 0 when proven optimal
  long nodes = 0;
};

namespace detail {

struct BbNode {
  double bound = 0.0;  // LP relaxation value, minimize orientation
  int depth = 0;
  long seq = 0;
  std::vector<std::pair<int, double>> lo_overrides;
  std::vector<std::pair<int, double>> hi_overrides;
  std::vector<double> x;

  bool operator<(const BbNode& other) const {
    if (bound != other.bound) return bound > other.bound;  // min-heap on bound
    if (depth != other.depth) return depth < other.depth;  // deeper first
    return seq > other.seq;                                // then FIFO
  }
};

}  // namespace detail

inline IlpResult solve_ilp(const LpModel& model, const IlpOptions& options = {}) {
  model.validate();
  const auto t_start = std::chrono::steady_clock::now();
  const bool maximize = model.sense == Sense::maximize;
  const double sign = maximize ? -1.0 : 1.0;  // everything below minimizes

  std::vector<int> int_vars = options.integer_vars;
  if (int_vars.empty()) {
    int_vars.resize(model.num_vars());
    for (int j = 0; j < model.num_vars(); ++j) int_vars[j] = j;
  }
  for (int j : int_vars)
    if (j < 0 || j >= model.num_vars())
      throw std::invalid_argument("integer variable index out of range");

  LpModel work = model;

  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  auto solve_node = [&](const detail::BbNode& node) -> LpResult {
    for (const auto& [j, v] : node.lo_overrides) work.lower[j] = v;
    for (const auto& [j, v] : node.hi_overrides) work.upper[j] = v;
    LpResult res = solve_lp(work, options.lp);
    for (const auto& [j, v] : node.lo_overrides) work.lower[j] = model.lower[j];
    for (const auto& [j, v] : node.hi_overrides) work.upper[j] = model.upper[j];
    return res;
  };

  auto fractional_var = [&](std::span<const double> x) {
    int pick = -1;
    double most = kIntTol;
    for (int j : int_vars) {
      const double f = std::abs(x[j] - std::round(x[j]));
      if (f > most) {
        most = f;
        pick = j;
      }
    }
    return pick;
  };

  // Snap the integer variables and re-verify; the tolerance inside
  // lp_feasible scales with each row's coefficient mass, so a vertex that was
  // LP-feasible stays feasible after a sub-kIntTol snap.
  auto snap_candidate = [&](std::vector<double> x) -> std::optional<std::vector<double>> {
    for (int j : int_vars) x[j] = std::round(x[j]);
    if (!lp_feasible(model, x, kIntTol)) return std::nullopt;
    return x;
  };

  IlpResult out;
  std::optional<std::vector<double>> incumbent;
  double inc_obj = kInf;  // minimize orientation

  if (options.warm_start) {
    const auto& w = *options.warm_start;
    if (static_cast<int>(w.size()) != model.num_vars())
      throw std::invalid_argument("warm start has the wrong size");
    bool integral = true;
    for (int j : int_vars)
      if (std::abs(w[j] - std::round(w[j])) > kIntTol) integral = false;
    if (integral && lp_feasible(model, w, kIntTol)) {
      incumbent = w;
      for (int j : int_vars) (*incumbent)[j] = std::round(w[j]);
      inc_obj = sign * lp_objective_value(model, *incumbent);
    }
  }

  auto tighten = [&](double bound) {
    return options.objective_is_integral ? std::ceil(bound - 1e-6) : bound;
  };

  std::priority_queue<detail::BbNode> open;
  long seq = 0;

  {
    detail::BbNode root;
    LpResult res = solve_node(root);
    if (res.status == LpStatus::unbounded) {
      out.status = IlpStatus::unbounded;
      return out;
    }
    if (res.status == LpStatus::iteration_limit)
      throw std::runtime_error("LP iteration limit hit at the root relaxation");
    if (res.status == LpStatus::infeasible) {
      out.status = IlpStatus::infeasible;
      return out;
    }
    root.bound = tighten(sign * res.objective);
    root.x = std::move(res.x);
    root.seq = seq++;
    open.push(std::move(root));
  }

  double best_open_bound = open.top().bound;
  bool hit_limit = false;

  while (!open.empty()) {
    best_open_bound = open.top().bound;
    if (incumbent) {
      const double gap = (inc_obj - best_open_bound) / std::max(1.0, std::abs(inc_obj));
      if (gap <= options.gap_tol) break;
      if (options.objective_is_integral && best_open_bound > inc_obj - 0.5) break;
    }
    if (out.nodes >= options.max_nodes || elapsed() > options.time_limit_s) {
      hit_limit = true;
      break;
    }
    detail::BbNode node = open.top();
    open.pop();
    ++out.nodes;
    if (incumbent && node.bound >= inc_obj - options.gap_tol * std::max(1.0, std::abs(inc_obj)))
      continue;

    const int branch_var = fractional_var(node.x);
    if (branch_var < 0) {
      if (auto snapped = snap_candidate(node.x)) {
        const double obj = sign * lp_objective_value(model, *snapped);
        if (obj < inc_obj) {
          inc_obj = obj;
          incumbent = std::move(*snapped);
        }
      }
      continue;
    }

    const double v = node.x[branch_var];
    for (int dir = 0; dir < 2; ++dir) {
      detail::BbNode child;
      child.lo_overrides = node.lo_overrides;
      child.hi_overrides = node.hi_overrides;
      child.depth = node.depth + 1;
      if (dir == 0)
        child.hi_overrides.emplace_back(branch_var, std::floor(v));
      else
        child.lo_overrides.emplace_back(branch_var, std::ceil(v));
      LpResult res = solve_node(child);
      if (res.status == LpStatus::infeasible) continue;
      if (res.status == LpStatus::unbounded)
        throw std::logic_error("bounded node relaxation reported unbounded");
      if (res.status == LpStatus::iteration_limit)
        throw std::runtime_error("LP iteration limit hit inside branch and bound");
      child.bound = tighten(std::max(sign * res.objective, node.bound));
      child.x = std::move(res.x);
      if (incumbent &&
          child.bound >= inc_obj - options.gap_tol * std::max(1.0, std::abs(inc_obj)))
        continue;
      if (incumbent && options.objective_is_integral && child.bound > inc_obj - 0.5) continue;
      child.seq = seq++;
      open.push(std::move(child));
    }
  }

  const double final_bound = open.empty() ? (incumbent ? inc_obj : kInf) : open.top().bound;
  out.best_bound = sign * final_bound;
  if (incumbent) {
    out.x = std::move(*incumbent);
    out.objective = sign * inc_obj;
    out.gap = std::max(0.0, (inc_obj - final_bound) / std::max(1.0, std::abs(inc_obj)));
    out.status = hit_limit && out.gap > options.gap_tol ? IlpStatus::limit_feasible
                                                        : IlpStatus::optimal;
    if (!hit_limit) out.gap = 0.0;
  } else {
    out.status = hit_limit ? IlpStatus::limit_infeasible : IlpStatus::infeasible;
  }
  return out;
}

}  // namespace depround
