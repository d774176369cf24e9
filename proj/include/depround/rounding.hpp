#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"
#include "tolerances.hpp"

// Dependent randomized rounding with disjoint cardinality groups, plus the
// derandomized and budget-preserving variants built on the same pair walks.
//
// A rounding problem holds fractional values in [0,1] and disjoint index
// groups whose sums are integral; every method returns a 0/1 vector that
// preserves each group sum exactly. Values within kFixTol of 0 or 1 are fixed
// up front and never touched.

namespace depround {

enum class Direction { minimize, maximize };

// Score callback over a partially rounded vector. Entries equal to 0 or 1 are
// fixed; anything in between is still fractional. Oracles may cache state
// between calls as long as they stay a pure function of the argument.
struct EstimatorOracle {
  std::function<double(std::span<const double>)> evaluate;
  Direction direction = Direction::maximize;
};

struct RoundingProblem {
  std::vector<double> values;              // in [0,1]
  std::vector<std::vector<int>> groups;    // disjoint index sets
  std::vector<double> costs;               // empty = cardinality mode

  void validate() const;
};

struct RoundingResult {
  std::vector<std::uint8_t> bits;
  std::string method;
  std::optional<std::uint64_t> seed;  // absent for deterministic methods
};

enum class Pairing { tree, sequential };

namespace detail {

inline bool is_fixed(double v) { return v <= kFixTol || v >= 1.0 - kFixTol; }

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// Clamps to [0,1], snapping near-integral entries exactly. Entries outside
// [-kFeasTol, 1+kFeasTol] are rejected as genuinely out of range.
inline std::vector<double> normalized_values(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  for (double& v : out) {
    if (v < -kFeasTol || v > 1.0 + kFeasTol)
      throw std::invalid_argument("rounding value outside [0,1]");
    v = clamp01(v);
    if (v <= kFixTol) v = 0.0;
    if (v >= 1.0 - kFixTol) v = 1.0;
  }
  return out;
}

// The two extreme points of the sum-preserving pair line through (xi, xj).
// "up" raises the first coordinate as far as the box allows, "down" lowers
// it. Computed so the integral coordinate is exact and the pair sum is
// preserved bit for bit (s-1 and s are exact when s = xi+xj is in range).
struct PairCorners {
  double up_i, up_j;      // first coordinate raised
  double down_i, down_j;  // first coordinate lowered
  double dist_up;         // mass moved to reach the up corner
  double dist_down;
};

inline PairCorners pair_corners(double xi, double xj) {
  const double s = xi + xj;
  PairCorners c{};
  if (s >= 1.0) {
    c.up_i = 1.0;
    c.up_j = s - 1.0;
    c.down_i = s - 1.0;
    c.down_j = 1.0;
    c.dist_up = 1.0 - xi;
    c.dist_down = 1.0 - xj;
  } else {
    c.up_i = s;
    c.up_j = 0.0;
    c.down_i = 0.0;
    c.down_j = s;
    c.dist_up = xj;
    c.dist_down = xi;
  }
  return c;
}

inline void snap_if_near(double& v) {
  if (v > 0.0 && v <= kFixTol) v = 0.0;
  if (v < 1.0 && v >= 1.0 - kFixTol) v = 1.0;
}

}  // namespace detail

inline void RoundingProblem::validate() const {
  const int n = static_cast<int>(values.size());
  for (double v : values) {
    if (!(v >= -kFeasTol && v <= 1.0 + kFeasTol))
      throw std::invalid_argument("rounding value outside [0,1]");
  }
  std::vector<std::uint8_t> seen(values.size(), 0);
  for (const auto& group : groups) {
    double sum = 0.0;
    for (int idx : group) {
      if (idx < 0 || idx >= n) throw std::invalid_argument("group index out of range");
      if (seen[idx]) throw std::invalid_argument("groups must be disjoint");
      seen[idx] = 1;
      sum += detail::clamp01(values[idx]);
    }
    if (costs.empty()) {
      const double nearest = std::round(sum);
      if (std::abs(sum - nearest) > kGroupIntTol)
        throw std::invalid_argument("group sum is not integral");
    }
  }
  if (!costs.empty()) {
    if (costs.size() != values.size())
      throw std::invalid_argument("costs size mismatch");
    for (double c : costs)
      if (!(c > 0.0)) throw std::invalid_argument("costs must be positive");
  }
}

// Rounds one fractional pair so that the sum xi+xj is preserved exactly and
// each coordinate keeps its marginal in expectation. At least one output
// coordinate is integral. Rejects pairs where either input is already fixed.
inline std::pair<double, double> pair_round(double xi, double xj, Rng& rng) {
  if (detail::is_fixed(xi) || detail::is_fixed(xj))
    throw std::invalid_argument("pair_round requires two fractional values");
  const auto c = detail::pair_corners(xi, xj);
  // P(up) = dist_down / (dist_up + dist_down) keeps E[xi'] = xi.
  const double p_up = c.dist_down / (c.dist_up + c.dist_down);
  if (bernoulli(rng, p_up)) return {c.up_i, c.up_j};
  return {c.down_i, c.down_j};
}

namespace detail {

// Shared walk over one group's fractional members. `resolve(i, j)` must leave
// at least one of the two integral. Tree pairing resolves adjacent survivors
// level by level (leaves in ascending index order); sequential pairing keeps
// resolving the first two fractional members. Returns the index of the one
// member that can remain fractional, or -1.
template <typename Resolve>
int walk_group(std::span<double> w, const std::vector<int>& members, Pairing pairing,
               Resolve&& resolve) {
  std::vector<int> level;
  level.reserve(members.size());
  for (int idx : members)
    if (!is_fixed(w[idx])) level.push_back(idx);
  std::sort(level.begin(), level.end());

  if (pairing == Pairing::tree) {
    while (level.size() >= 2) {
      std::vector<int> next;
      next.reserve(level.size() / 2 + 1);
      std::size_t t = 0;
      for (; t + 1 < level.size(); t += 2) {
        resolve(level[t], level[t + 1]);
        if (!is_fixed(w[level[t]]))
          next.push_back(level[t]);
        else if (!is_fixed(w[level[t + 1]]))
          next.push_back(level[t + 1]);
      }
      if (t < level.size()) next.push_back(level[t]);
      level = std::move(next);
    }
    return level.empty() ? -1 : level[0];
  }

  // Sequential: pair the first two fractional members, repeat.
  int current = -1;
  for (int idx : level) {
    if (current < 0) {
      current = idx;
      continue;
    }
    resolve(current, idx);
    if (!is_fixed(w[current])) continue;
    current = is_fixed(w[idx]) ? -1 : idx;
  }
  return current;
}

// Snaps the final member of a group to the nearest integer; anything farther
// than kSnapTol from an integer means the walk itself is broken.
inline void snap_leftover(std::span<double> w, int idx) {
  if (idx < 0) return;
  const double nearest = std::round(w[idx]);
  if (std::abs(w[idx] - nearest) > kSnapTol)
    throw std::logic_error("group sum drifted during rounding");
  w[idx] = nearest;
}

inline std::vector<std::uint8_t> to_bits(std::span<const double> w) {
  std::vector<std::uint8_t> bits(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] != 0.0 && w[i] != 1.0)
      throw std::logic_error("rounding left a fractional value");
    bits[i] = w[i] == 1.0 ? 1 : 0;
  }
  return bits;
}

inline std::vector<int> free_indices(const RoundingProblem& problem) {
  std::vector<std::uint8_t> grouped(problem.values.size(), 0);
  for (const auto& g : problem.groups)
    for (int idx : g) grouped[idx] = 1;
  std::vector<int> free;
  for (int i = 0; i < static_cast<int>(problem.values.size()); ++i)
    if (!grouped[i]) free.push_back(i);
  return free;
}

}  // namespace detail

// Tree-based dependent rounding: every group is rounded along a balanced
// binary tree (leaves = members in ascending index order, pairs resolved
// bottom-up with pair_round); free indices are rounded independently.
// Preserves every group sum exactly and every marginal in expectation.
inline RoundingResult round_tree(const RoundingProblem& problem, std::uint64_t seed) {
  problem.validate();
  if (!problem.costs.empty())
    throw std::invalid_argument("round_tree requires cardinality mode");
  std::vector<double> w = detail::normalized_values(problem.values);
  Rng rng = make_rng(seed);
  // Draw order: groups as listed (level by level), then free indices
  // ascending. Fixed sequencing keeps results reproducible per seed.
  for (const auto& group : problem.groups) {
    const int leftover = detail::walk_group(
        std::span<double>(w), group, Pairing::tree, [&](int i, int j) {
          const auto [vi, vj] = pair_round(w[i], w[j], rng);
          w[i] = vi;
          w[j] = vj;
          detail::snap_if_near(w[i]);
          detail::snap_if_near(w[j]);
        });
    detail::snap_leftover(std::span<double>(w), leftover);
  }
  for (int idx : detail::free_indices(problem)) {
    if (!detail::is_fixed(w[idx])) w[idx] = bernoulli(rng, w[idx]) ? 1.0 : 0.0;
  }
  for (double& v : w) detail::snap_if_near(v);
  return {detail::to_bits(w), "tree", seed};
}

// Bit-wise dependent rounding. Values are first snapped to `precision_bits`
// binary digits by rounding the tail at random (group sums are repaired by
// adjusting the largest fractional member if the snap broke integrality).
// Bit levels are then eliminated least-significant-first: inside each group
// the members whose level bit is set are paired in ascending index order and
// a fair coin decides which member of a pair carries the bit upward. Free
// indices form one implicit group per level whose odd leftover flips a fair
// coin up or down.
inline RoundingResult round_bitwise(const RoundingProblem& problem, std::uint64_t seed,
                                    int precision_bits = 20) {
  problem.validate();
  if (!problem.costs.empty())
    throw std::invalid_argument("round_bitwise requires cardinality mode");
  if (precision_bits < 1 || precision_bits > 52)
    throw std::invalid_argument("precision_bits out of range");
  std::vector<double> norm = detail::normalized_values(problem.values);
  const int n = static_cast<int>(norm.size());
  const std::int64_t scale = std::int64_t{1} << precision_bits;
  Rng rng = make_rng(seed);

  // Snap to the grid, keeping each marginal exact in expectation.
  std::vector<std::int64_t> v(n);
  for (int i = 0; i < n; ++i) {
    const double t = norm[i] * static_cast<double>(scale);
    const double z = std::floor(t);
    const double frac = t - z;
    v[i] = static_cast<std::int64_t>(z);
    if (frac > 0.0 && bernoulli(rng, frac)) ++v[i];
  }

  // Repair group sums broken by the snap.
  for (const auto& group : problem.groups) {
    double target_value = 0.0;
    std::int64_t sum = 0;
    for (int idx : group) {
      target_value += norm[idx];
      sum += v[idx];
    }
    std::int64_t d = sum - static_cast<std::int64_t>(std::llround(target_value)) * scale;
    while (d != 0) {
      int pick = -1;
      for (int idx : group) {
        if (v[idx] > 0 && v[idx] < scale && (pick < 0 || v[idx] > v[pick])) pick = idx;
      }
      if (pick < 0) throw std::logic_error("bitwise snap repair ran out of members");
      if (d > 0) {
        --v[pick];
        --d;
      } else {
        ++v[pick];
        ++d;
      }
    }
  }

  // Eliminate bit levels from least significant upward.
  for (int b = 0; b < precision_bits; ++b) {
    const std::int64_t bit = std::int64_t{1} << b;
    std::vector<int> active;
    for (const auto& group : problem.groups) {
      active.clear();
      for (int idx : group)
        if ((v[idx] >> b) & 1) active.push_back(idx);
      std::sort(active.begin(), active.end());
      if (active.size() % 2 != 0)
        throw std::logic_error("bitwise level parity broken inside a group");
      for (std::size_t t = 0; t + 1 < active.size(); t += 2) {
        if (bernoulli(rng, 0.5)) {
          v[active[t]] += bit;
          v[active[t + 1]] -= bit;
        } else {
          v[active[t]] -= bit;
          v[active[t + 1]] += bit;
        }
      }
    }
    // Free indices act as one implicit group with a coin for the leftover.
    active.clear();
    for (int idx : detail::free_indices(problem))
      if ((v[idx] >> b) & 1) active.push_back(idx);
    std::size_t t = 0;
    for (; t + 1 < active.size(); t += 2) {
      if (bernoulli(rng, 0.5)) {
        v[active[t]] += bit;
        v[active[t + 1]] -= bit;
      } else {
        v[active[t]] -= bit;
        v[active[t + 1]] += bit;
      }
    }
    if (t < active.size()) {
      v[active[t]] += bernoulli(rng, 0.5) ? bit : -bit;
    }
  }

  std::vector<std::uint8_t> bits(n);
  for (int i = 0; i < n; ++i) {
    if (v[i] != 0 && v[i] != scale)
      throw std::logic_error("bitwise elimination left a fractional value");
    bits[i] = v[i] == scale ? 1 : 0;
  }
  return {std::move(bits), "bitwise", seed};
}

namespace detail {

struct ScoreTracker {
  const EstimatorOracle* oracle;
  bool have_current = false;
  double current = 0.0;

  double eval(std::span<const double> w) { return oracle->evaluate(w); }

  bool first_no_worse(double a, double b) const {
    return oracle->direction == Direction::maximize ? a >= b : a <= b;
  }

  // Commits a chosen score, enforcing that the walk never worsens it.
  void commit(double chosen) {
    if (have_current) {
      const double slack = kMonotoneTol * (1.0 + std::abs(current));
      const bool ok = oracle->direction == Direction::maximize
                          ? chosen >= current - slack
                          : chosen <= current + slack;
      if (!ok) throw std::logic_error("derandomization step worsened the oracle score");
    }
    current = chosen;
    have_current = true;
  }

  void ensure_current(std::span<const double> w) {
    if (!have_current) {
      current = eval(w);
      have_current = true;
    }
  }
};

}  // namespace detail

// Derandomized dependent rounding via conditional expectation: walks the same
// pair structure as the randomized methods, evaluates the oracle at both
// extreme points of each pair line, and keeps the better one (ties round the
// lower index up). The score never worsens along the walk as long as the
// oracle is convex-safe along pair lines, which both the coverage objective
// and the congestion estimator are.
inline RoundingResult derandomize(const RoundingProblem& problem, const EstimatorOracle& oracle,
                                  Pairing pairing) {
  problem.validate();
  if (!problem.costs.empty())
    throw std::invalid_argument("derandomize requires cardinality mode");
  if (!oracle.evaluate) throw std::invalid_argument("oracle missing");
  std::vector<double> w = detail::normalized_values(problem.values);
  detail::ScoreTracker tracker{&oracle};
  const std::span<double> ws(w);

  auto resolve = [&](int i, int j) {
    tracker.ensure_current(ws);
    const auto c = detail::pair_corners(w[i], w[j]);
    w[i] = c.up_i;
    w[j] = c.up_j;
    const double score_up = tracker.eval(ws);
    w[i] = c.down_i;
    w[j] = c.down_j;
    const double score_down = tracker.eval(ws);
    if (tracker.first_no_worse(score_up, score_down)) {
      w[i] = c.up_i;
      w[j] = c.up_j;
      tracker.commit(score_up);
    } else {
      tracker.commit(score_down);
    }
    detail::snap_if_near(w[i]);
    detail::snap_if_near(w[j]);
  };

  for (const auto& group : problem.groups) {
    const int leftover = detail::walk_group(ws, group, pairing, resolve);
    detail::snap_leftover(ws, leftover);
  }
  for (int idx : detail::free_indices(problem)) {
    if (detail::is_fixed(w[idx])) continue;
    tracker.ensure_current(ws);
    w[idx] = 1.0;
    const double score_up = tracker.eval(ws);
    w[idx] = 0.0;
    const double score_down = tracker.eval(ws);
    if (tracker.first_no_worse(score_up, score_down)) {
      w[idx] = 1.0;
      tracker.commit(score_up);
    } else {
      tracker.commit(score_down);
    }
  }
  return {detail::to_bits(w),
          pairing == Pairing::tree ? "derand-tree" : "derand-sequential",
          std::nullopt};
}

namespace detail {

// Extreme points of the budget-preserving line through (y_i, y_j): moving
// delta units of weighted mass keeps c_i*y_i + c_j*y_j constant. "up" raises
// the first coordinate until it hits 1 or the partner hits 0.
struct BudgetCorners {
  double up_i, up_j, delta_up;
  double down_i, down_j, delta_down;
};

inline BudgetCorners budget_corners(double yi, double yj, double ci, double cj) {
  BudgetCorners c{};
  const double room_up_i = ci * (1.0 - yi);
  const double room_up_j = cj * yj;
  if (room_up_i <= room_up_j) {
    c.up_i = 1.0;
    c.up_j = yj - room_up_i / cj;
    c.delta_up = room_up_i;
  } else {
    c.up_i = yi + room_up_j / ci;
    c.up_j = 0.0;
    c.delta_up = room_up_j;
  }
  const double room_down_i = ci * yi;
  const double room_down_j = cj * (1.0 - yj);
  if (room_down_i <= room_down_j) {
    c.down_i = 0.0;
    c.down_j = yj + room_down_i / cj;
    c.delta_down = room_down_i;
  } else {
    c.down_i = yi - room_down_j / ci;
    c.down_j = 1.0;
    c.delta_down = room_down_j;
  }
  return c;
}

}  // namespace detail

// Deterministic budget-preserving rounding: repeatedly takes the first two
// fractional variables (index order), moves along the cost-weighted line to
// whichever extreme the oracle prefers, and finally rounds the at most one
// remaining fractional variable up. For a monotone objective with convex
// restrictions to those lines (the coverage objective qualifies) the score
// never decreases, and the final cost is at most L + max_i costs_i.
inline RoundingResult round_budget_preserving(std::span<const double> y,
                                              std::span<const double> costs, double budget,
                                              const EstimatorOracle& oracle) {
  if (y.size() != costs.size()) throw std::invalid_argument("costs size mismatch");
  if (!oracle.evaluate) throw std::invalid_argument("oracle missing");
  if (oracle.direction != Direction::maximize)
    throw std::invalid_argument("round_budget_preserving expects a maximize oracle");
  std::vector<double> w = detail::normalized_values(y);
  const int n = static_cast<int>(w.size());
  double spent = 0.0;
  double max_cost = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!(costs[i] > 0.0)) throw std::invalid_argument("costs must be positive");
    spent += costs[i] * w[i];
    max_cost = std::max(max_cost, costs[i]);
  }
  if (spent > budget + kFeasTol * (1.0 + std::abs(budget)))
    throw std::invalid_argument("weighted value sum exceeds the budget");

  detail::ScoreTracker tracker{&oracle};
  const std::span<double> ws(w);
  int current = -1;
  for (int idx = 0; idx < n; ++idx) {
    if (detail::is_fixed(w[idx])) continue;
    if (current < 0) {
      current = idx;
      continue;
    }
    tracker.ensure_current(ws);
    const auto c = detail::budget_corners(w[current], w[idx], costs[current], costs[idx]);
    w[current] = c.up_i;
    w[idx] = c.up_j;
    const double score_up = tracker.eval(ws);
    w[current] = c.down_i;
    w[idx] = c.down_j;
    const double score_down = tracker.eval(ws);
    if (score_up >= score_down) {  // tie rounds the lower index up
      w[current] = c.up_i;
      w[idx] = c.up_j;
      tracker.commit(score_up);
    } else {
      tracker.commit(score_down);
    }
    detail::snap_if_near(w[current]);
    detail::snap_if_near(w[idx]);
    if (!detail::is_fixed(w[current])) continue;
    current = detail::is_fixed(w[idx]) ? -1 : idx;
  }
  if (current >= 0) w[current] = 1.0;  // lone leftover rounds up

  double final_cost = 0.0;
  for (int i = 0; i < n; ++i) final_cost += costs[i] * w[i];
  if (final_cost > budget + max_cost + 1e-9 * (1.0 + std::abs(budget)))
    throw std::logic_error("budget-preserving rounding exceeded L + max cost");
  return {detail::to_bits(w), "budget-derand", std::nullopt};
}

// Randomized counterpart of round_budget_preserving: the same cost-weighted
// pair lines, with corner probabilities that preserve every marginal; the at
// most one leftover fractional variable is rounded by an independent coin.
// The weighted sum of the result stays below budget + max_i costs_i.
inline RoundingResult round_budget_random(std::span<const double> y,
                                          std::span<const double> costs, std::uint64_t seed) {
  if (y.size() != costs.size()) throw std::invalid_argument("costs size mismatch");
  std::vector<double> w = detail::normalized_values(y);
  const int n = static_cast<int>(w.size());
  for (int i = 0; i < n; ++i)
    if (!(costs[i] > 0.0)) throw std::invalid_argument("costs must be positive");
  Rng rng = make_rng(seed);
  int current = -1;
  for (int idx = 0; idx < n; ++idx) {
    if (detail::is_fixed(w[idx])) continue;
    if (current < 0) {
      current = idx;
      continue;
    }
    const auto c = detail::budget_corners(w[current], w[idx], costs[current], costs[idx]);
    // P(up) = delta_down / (delta_up + delta_down) keeps both marginals.
    const double p_up = c.delta_down / (c.delta_up + c.delta_down);
    if (bernoulli(rng, p_up)) {
      w[current] = c.up_i;
      w[idx] = c.up_j;
    } else {
      w[current] = c.down_i;
      w[idx] = c.down_j;
    }
    detail::snap_if_near(w[current]);
    detail::snap_if_near(w[idx]);
    if (!detail::is_fixed(w[current])) continue;
    current = detail::is_fixed(w[idx]) ? -1 : idx;
  }
  if (current >= 0) w[current] = bernoulli(rng, w[current]) ? 1.0 : 0.0;
  return {detail::to_bits(w), "budget-random", seed};
}

// Gradient-guided deterministic rounding. Each step recomputes the full
// gradient, pairs the fractional variables with the largest and smallest
// derivative (divided by cost in budget mode; ties take the lowest index)
// and moves mass toward the larger derivative until one of the two becomes
// integral. Cardinality mode requires an integral value sum; budget mode
// rounds the at most one leftover variable up.
inline RoundingResult gradient_round(
    std::span<const double> y,
    const std::function<std::vector<double>(std::span<const double>)>& gradient,
    std::span<const double> costs, const EstimatorOracle& oracle) {
  if (!gradient) throw std::invalid_argument("gradient callback missing");
  if (!oracle.evaluate) throw std::invalid_argument("oracle missing");
  if (oracle.direction != Direction::maximize)
    throw std::invalid_argument("gradient_round expects a maximize oracle");
  const bool budget_mode = !costs.empty();
  if (budget_mode && costs.size() != y.size())
    throw std::invalid_argument("costs size mismatch");
  std::vector<double> w = detail::normalized_values(y);
  const int n = static_cast<int>(w.size());
  if (budget_mode) {
    for (int i = 0; i < n; ++i)
      if (!(costs[i] > 0.0)) throw std::invalid_argument("costs must be positive");
  } else {
    double sum = 0.0;
    for (double v : w) sum += v;
    if (std::abs(sum - std::round(sum)) > kSnapTol)
      throw std::invalid_argument("cardinality-mode gradient rounding needs an integral sum");
  }

  detail::ScoreTracker tracker{&oracle};
  const std::span<double> ws(w);
  for (;;) {
    int hi = -1, lo = -1;
    {
      int fractional = 0;
      for (int i = 0; i < n; ++i)
        if (!detail::is_fixed(w[i])) ++fractional;
      if (fractional < 2) break;
    }
    const std::vector<double> grad = gradient(ws);
    if (static_cast<int>(grad.size()) != n)
      throw std::invalid_argument("gradient size mismatch");
    for (int i = 0; i < n; ++i) {
      if (detail::is_fixed(w[i])) continue;
      const double scaled = budget_mode ? grad[i] / costs[i] : grad[i];
      if (hi < 0 || scaled > (budget_mode ? grad[hi] / costs[hi] : grad[hi])) hi = i;
    }
    for (int i = 0; i < n; ++i) {
      if (detail::is_fixed(w[i]) || i == hi) continue;
      const double scaled = budget_mode ? grad[i] / costs[i] : grad[i];
      if (lo < 0 || scaled < (budget_mode ? grad[lo] / costs[lo] : grad[lo])) lo = i;
    }
    tracker.ensure_current(ws);
    if (budget_mode) {
      const auto c = detail::budget_corners(w[hi], w[lo], costs[hi], costs[lo]);
      w[hi] = c.up_i;
      w[lo] = c.up_j;
    } else {
      const auto c = detail::pair_corners(w[hi], w[lo]);
      w[hi] = c.up_i;
      w[lo] = c.up_j;
    }
    detail::snap_if_near(w[hi]);
    detail::snap_if_near(w[lo]);
    tracker.commit(tracker.eval(ws));
  }
  if (budget_mode) {
    for (int i = 0; i < n; ++i)
      if (!detail::is_fixed(w[i])) w[i] = 1.0;
  } else {
    int leftover = -1;
    for (int i = 0; i < n; ++i)
      if (!detail::is_fixed(w[i])) leftover = i;
    detail::snap_leftover(ws, leftover);
  }
  return {detail::to_bits(w), "gradient", std::nullopt};
}

// Independent randomized rounding: bit i is 1 with probability values[i].
inline std::vector<std::uint8_t> round_independent(std::span<const double> values,
                                                   std::uint64_t seed) {
  std::vector<double> w = detail::normalized_values(values);
  Rng rng = make_rng(seed);
  std::vector<std::uint8_t> bits(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0)
      bits[i] = 0;
    else if (w[i] == 1.0)
      bits[i] = 1;
    else
      bits[i] = bernoulli(rng, w[i]) ? 1 : 0;
  }
  return bits;
}

// Adds `delta = target - sum(values over members)` to the member best able to
// absorb it, then folds the few-ulp residual once more. Used to clean LP dust
// off group sums before rounding; |delta| beyond 0.5 is a caller bug.
inline void adjust_group_to_integer(std::vector<double>& values,
                                    const std::vector<int>& members, double target) {
  for (int pass = 0; pass < 2; ++pass) {
    double sum = 0.0;
    for (int idx : members) sum += values[idx];
    const double delta = target - sum;
    if (delta == 0.0) return;
    if (std::abs(delta) > 0.5) throw std::invalid_argument("group sum too far from target");
    int pick = -1;
    double room = -1.0;
    for (int idx : members) {
      const double v = values[idx];
      const double r = delta > 0.0 ? 1.0 - v : v;
      if (r > room) {
        room = r;
        pick = idx;
      }
    }
    if (pick < 0 || room < std::abs(delta))
      throw std::invalid_argument("group has no room to absorb the adjustment");
    values[pick] += delta;
  }
}

}  // namespace depround
