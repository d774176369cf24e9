#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lp.hpp"
#include "rng.hpp"
#include "rounding.hpp"
#include "tolerances.hpp"

// Weighted maximum coverage: pick sets under a cardinality or cost budget to
// maximize the total weight of covered elements. Provides the multilinear
// relaxation F(y) = sum_i w_i (1 - prod_{j covers i} (1 - y_j)) with its
// gradient, a lazy-free greedy, an LP relaxation plus dependent-rounding
// pipeline, a gradient-guided rounding, and a greedy/LP hybrid.

namespace depround {

struct CoverageInstance {
  std::vector<double> weights;             // per element
  std::vector<std::vector<int>> sets;      // set -> elements it covers
  std::vector<double> costs;               // per set; empty = unit costs
  double budget = 0.0;

  int num_elements() const { return static_cast<int>(weights.size()); }
  int num_sets() const { return static_cast<int>(sets.size()); }
  bool unit_costs() const { return costs.empty(); }
  double set_cost(int j) const { return costs.empty() ? 1.0 : costs[j]; }

  void validate() const {
    for (double w : weights)
      if (!(w >= 0.0)) throw std::invalid_argument("element weights must be nonnegative");
    for (const auto& s : sets)
      for (int e : s)
        if (e < 0 || e >= num_elements())
          throw std::invalid_argument("set covers an unknown element");
    if (!costs.empty()) {
      if (static_cast<int>(costs.size()) != num_sets())
        throw std::invalid_argument("costs size mismatch");
      for (double c : costs)
        if (!(c > 0.0)) throw std::invalid_argument("set costs must be positive");
    }
    if (!(budget >= 0.0)) throw std::invalid_argument("budget must be nonnegative");
  }
};

struct CoverResult {
  std::vector<int> chosen;  // set indices, ascending
  double value = 0.0;       // covered weight of the chosen union
  double cost = 0.0;
  std::string method;
};

// Union weight of an explicit set selection.
inline double coverage_of(const CoverageInstance& inst, std::span<const int> chosen) {
  std::vector<std::uint8_t> covered(inst.num_elements(), 0);
  for (int j : chosen)
    for (int e : inst.sets[j]) covered[e] = 1;
  double total = 0.0;
  for (int i = 0; i < inst.num_elements(); ++i)
    if (covered[i]) total += inst.weights[i];
  return total;
}

inline CoverResult make_cover_result(const CoverageInstance& inst, std::vector<int> chosen,
                                     std::string method) {
  std::sort(chosen.begin(), chosen.end());
  CoverResult r;
  r.value = coverage_of(inst, chosen);
  r.cost = 0.0;
  for (int j : chosen) r.cost += inst.set_cost(j);
  r.chosen = std::move(chosen);
  r.method = std::move(method);
  return r;
}

// Multilinear coverage objective and its gradient. The evaluator accepts
// vectors longer than num_sets so padding variables pass through untouched.
class CoverageEvaluator {
 public:
  explicit CoverageEvaluator(const CoverageInstance& inst) : inst_(&inst) {
    covering_.resize(inst.num_elements());
    for (int j = 0; j < inst.num_sets(); ++j)
      for (int e : inst.sets[j]) covering_[e].push_back(j);
  }

  double value(std::span<const double> y) const {
    double total = 0.0;
    for (int i = 0; i < inst_->num_elements(); ++i) {
      double miss = 1.0;
      for (int j : covering_[i]) miss *= 1.0 - y[j];
      total += inst_->weights[i] * (1.0 - miss);
    }
    return total;
  }

  // grad_j = sum over elements i in set j of w_i * prod_{k covers i, k != j}
  // (1 - y_k), assembled per element with prefix/suffix products so a zero
  // factor never needs a division.
  std::vector<double> gradient(std::span<const double> y) const {
    std::vector<double> grad(y.size(), 0.0);
    std::vector<double> suffix;
    for (int i = 0; i < inst_->num_elements(); ++i) {
      const auto& cov = covering_[i];
      if (cov.empty()) continue;
      suffix.assign(cov.size() + 1, 1.0);
      for (int t = static_cast<int>(cov.size()) - 1; t >= 0; --t)
        suffix[t] = suffix[t + 1] * (1.0 - y[cov[t]]);
      double prefix = 1.0;
      for (std::size_t t = 0; t < cov.size(); ++t) {
        grad[cov[t]] += inst_->weights[i] * prefix * suffix[t + 1];
        prefix *= 1.0 - y[cov[t]];
      }
    }
    return grad;
  }

  EstimatorOracle oracle() const {
    return {[this](std::span<const double> y) { return value(y); }, Direction::maximize};
  }

 private:
  const CoverageInstance* inst_;
  std::vector<std::vector<int>> covering_;
};

// Cost-ratio greedy: repeatedly takes the set with the best uncovered weight
// per cost that still fits the budget, stopping when nothing fits or nothing
// adds. Ties take the earliest set in the scan order; `order_seed` shuffles
// that order, the default is set-index order.
inline CoverResult greedy_cover(const CoverageInstance& inst,
                                std::optional<std::uint64_t> order_seed = {}) {
  inst.validate();
  const int m = inst.num_sets();
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  if (order_seed) {
    Rng rng = make_rng(*order_seed);
    order = random_permutation(m, rng);
  }
  std::vector<std::uint8_t> covered(inst.num_elements(), 0);
  std::vector<std::uint8_t> taken(m, 0);
  std::vector<int> chosen;
  double spent = 0.0;
  for (;;) {
    int best = -1;
    double best_ratio = 0.0;
    for (int j : order) {
      if (taken[j]) continue;
      const double c = inst.set_cost(j);
      if (spent + c > inst.budget + kFeasTol) continue;
      double marginal = 0.0;
      for (int e : inst.sets[j])
        if (!covered[e]) marginal += inst.weights[e];
      const double ratio = marginal / c;
      if (ratio > best_ratio + kOptTol) {
        best_ratio = ratio;
        best = j;
      }
    }
    if (best < 0) break;
    taken[best] = 1;
    chosen.push_back(best);
    spent += inst.set_cost(best);
    for (int e : inst.sets[best]) covered[e] = 1;
  }
  return make_cover_result(inst, std::move(chosen), "greedy");
}

struct CoverLpSolution {
  std::vector<double> y;   // per set
  std::vector<double> x;   // per element coverage, x_i <= sum of covering y_j
  double lp_value = 0.0;   // optimal relaxation objective
  double frac_value = 0.0; // multilinear F at y
};

// LP relaxation: maximize sum w_i z_i with z_i <= sum of y_j over covering
// sets, sum of costs <= budget, everything in [0,1].
inline LpModel build_cover_lp(const CoverageInstance& inst) {
  inst.validate();
  LpModel model;
  model.sense = Sense::maximize;
  const int m = inst.num_sets();
  for (int j = 0; j < m; ++j) model.add_var(0.0, 1.0, 0.0);
  for (int i = 0; i < inst.num_elements(); ++i) model.add_var(0.0, 1.0, inst.weights[i]);
  std::vector<std::vector<int>> covering(inst.num_elements());
  for (int j = 0; j < m; ++j)
    for (int e : inst.sets[j]) covering[e].push_back(j);
  for (int i = 0; i < inst.num_elements(); ++i) {
    // A zero-weight element cannot move the objective; its coverage row would
    // only feed the solver degenerate pivots, so it is omitted and the
    // element variable stays inert at zero.
    if (inst.weights[i] == 0.0) continue;
    std::vector<std::pair<int, double>> terms{{m + i, 1.0}};
    for (int j : covering[i]) terms.emplace_back(j, -1.0);
    model.add_row(RowType::le, 0.0, std::move(terms));
  }
  std::vector<std::pair<int, double>> budget_terms;
  for (int j = 0; j < m; ++j) budget_terms.emplace_back(j, inst.set_cost(j));
  model.add_row(RowType::le, inst.budget, std::move(budget_terms));
  return model;
}

inline CoverLpSolution solve_cover_lp(const CoverageInstance& inst,
                                      const LpOptions& options = {}) {
  const LpModel model = build_cover_lp(inst);
  const LpResult res = solve_lp(model, options);
  if (res.status != LpStatus::optimal)
    throw std::runtime_error("coverage LP relaxation did not solve to optimality");
  CoverLpSolution sol;
  sol.y.assign(res.x.begin(), res.x.begin() + inst.num_sets());
  sol.x.assign(res.x.begin() + inst.num_sets(), res.x.end());
  sol.lp_value = res.objective;
  sol.frac_value = CoverageEvaluator(inst).value(sol.y);
  return sol;
}

// Drops sets until the selection fits the budget, each time removing the one
// whose exclusively covered weight per cost is smallest (ties: lowest index).
// Indices in `protect` are only dropped once nothing else remains.
inline std::vector<int> enforce_budget(const CoverageInstance& inst, std::vector<int> chosen,
                                       const std::vector<int>& protect = {}) {
  std::vector<std::uint8_t> is_protected(inst.num_sets(), 0);
  for (int j : protect) is_protected[j] = 1;
  auto total_cost = [&] {
    double c = 0.0;
    for (int j : chosen) c += inst.set_cost(j);
    return c;
  };
  while (total_cost() > inst.budget + kFeasTol) {
    std::vector<int> cover_count(inst.num_elements(), 0);
    for (int j : chosen)
      for (int e : inst.sets[j]) ++cover_count[e];
    int pick = -1;
    double pick_ratio = 0.0;
    bool pick_protected = true;
    for (int j : chosen) {
      double loss = 0.0;
      for (int e : inst.sets[j])
        if (cover_count[e] == 1) loss += inst.weights[e];
      const double ratio = loss / inst.set_cost(j);
      const bool prot = is_protected[j] != 0;
      bool better;
      if (pick < 0)
        better = true;
      else if (prot != pick_protected)
        better = !prot;  // an unprotected set always beats a protected one
      else if (ratio < pick_ratio - kOptTol)
        better = true;
      else
        better = ratio <= pick_ratio + kOptTol && j < pick;
      if (better) {
        pick = j;
        pick_ratio = ratio;
        pick_protected = prot;
      }
    }
    if (pick < 0) throw std::logic_error("budget enforcement has nothing left to drop");
    chosen.erase(std::find(chosen.begin(), chosen.end(), pick));
  }
  return chosen;
}

enum class CoverRounding {
  tree,
  bitwise,
  derand_tree,
  derand_sequential,
  budget_derand,
  budget_random,
  gradient,
  independent,
};

inline std::string to_string(CoverRounding m) {
  switch (m) {
    case CoverRounding::tree: return "tree";
    case CoverRounding::bitwise: return "bitwise";
    case CoverRounding::derand_tree: return "derand-tree";
    case CoverRounding::derand_sequential: return "derand-sequential";
    case CoverRounding::budget_derand: return "budget-derand";
    case CoverRounding::budget_random: return "budget-random";
    case CoverRounding::gradient: return "gradient";
    case CoverRounding::independent: return "independent";
  }
  return "?";
}

namespace detail {

// Pads a unit-cost fractional selection with one throwaway variable so the
// total becomes the integral rounding target; the target never exceeds the
// budget. Returns the padded vector and the target.
inline std::pair<std::vector<double>, int> pad_to_integral(std::span<const double> y,
                                                           double budget) {
  std::vector<double> padded(y.begin(), y.end());
  double s = 0.0;
  for (double v : padded) s += v;
  int target = static_cast<int>(std::ceil(s - kIntTol));
  target = std::min(target, static_cast<int>(std::floor(budget + kIntTol)));
  target = std::max(target, 0);
  padded.push_back(std::clamp(static_cast<double>(target) - s, 0.0, 1.0));
  std::vector<int> all(padded.size());
  std::iota(all.begin(), all.end(), 0);
  adjust_group_to_integer(padded, all, target);
  return {std::move(padded), target};
}

inline std::vector<int> bits_to_chosen(std::span<const std::uint8_t> bits, int num_sets) {
  std::vector<int> chosen;
  for (int j = 0; j < num_sets && j < static_cast<int>(bits.size()); ++j)
    if (bits[j]) chosen.push_back(j);
  return chosen;
}

}  // namespace detail

// Rounds a fractional set selection to a feasible one. Unit-cost instances
// go through group rounding on a padded vector whose sum is the integral
// target; cost instances go through the budget-preserving walks followed by
// ratio-based budget enforcement.
inline CoverResult round_cover(const CoverageInstance& inst, std::span<const double> y,
                               CoverRounding method, std::uint64_t seed = 0) {
  inst.validate();
  if (static_cast<int>(y.size()) != inst.num_sets())
    throw std::invalid_argument("fractional selection size mismatch");
  CoverageEvaluator eval(inst);
  const std::string tag = "lp-" + to_string(method);

  if (method == CoverRounding::independent) {
    const auto bits = round_independent(y, seed);
    auto chosen = detail::bits_to_chosen(bits, inst.num_sets());
    chosen = enforce_budget(inst, std::move(chosen));
    return make_cover_result(inst, std::move(chosen), tag);
  }

  if (method == CoverRounding::budget_derand || method == CoverRounding::budget_random ||
      (!inst.unit_costs() && method != CoverRounding::gradient)) {
    std::vector<double> costs(inst.num_sets());
    for (int j = 0; j < inst.num_sets(); ++j) costs[j] = inst.set_cost(j);
    RoundingResult rr;
    if (method == CoverRounding::budget_random)
      rr = round_budget_random(y, costs, seed);
    else
      rr = round_budget_preserving(y, costs, inst.budget, eval.oracle());
    auto chosen = detail::bits_to_chosen(rr.bits, inst.num_sets());
    chosen = enforce_budget(inst, std::move(chosen));
    return make_cover_result(inst, std::move(chosen), tag);
  }

  if (method == CoverRounding::gradient) {
    std::vector<double> costs;
    std::vector<double> base(y.begin(), y.end());
    if (inst.unit_costs()) {
      base = detail::pad_to_integral(y, inst.budget).first;
    } else {
      costs.resize(inst.num_sets());
      for (int j = 0; j < inst.num_sets(); ++j) costs[j] = inst.set_cost(j);
    }
    const auto grad_fn = [&eval](std::span<const double> v) { return eval.gradient(v); };
    const auto rr = gradient_round(base, grad_fn, costs, eval.oracle());
    auto chosen = detail::bits_to_chosen(rr.bits, inst.num_sets());
    chosen = enforce_budget(inst, std::move(chosen));
    return make_cover_result(inst, std::move(chosen), "gradient");
  }

  // Unit-cost group rounding on the padded vector.
  auto [padded, target] = detail::pad_to_integral(y, inst.budget);
  RoundingProblem problem;
  problem.values = padded;
  std::vector<int> all(padded.size());
  std::iota(all.begin(), all.end(), 0);
  problem.groups = {all};
  RoundingResult rr;
  switch (method) {
    case CoverRounding::tree: rr = round_tree(problem, seed); break;
    case CoverRounding::bitwise: rr = round_bitwise(problem, seed); break;
    case CoverRounding::derand_tree:
      rr = derandomize(problem, eval.oracle(), Pairing::tree);
      break;
    case CoverRounding::derand_sequential:
      rr = derandomize(problem, eval.oracle(), Pairing::sequential);
      break;
    default: throw std::logic_error("unhandled rounding method");
  }
  auto chosen = detail::bits_to_chosen(rr.bits, inst.num_sets());
  if (static_cast<int>(chosen.size()) > static_cast<int>(std::floor(inst.budget + kIntTol)))
    throw std::logic_error("unit-cost rounding exceeded the budget");
  return make_cover_result(inst, std::move(chosen), tag);
}

// Repeated randomized rounding, keeping the trial with the best true value.
// Unit-cost instances use the tree scheme, cost instances the randomized
// budget walk; trial seeds are derived from the base seed by stream index.
inline CoverResult best_of_k(const CoverageInstance& inst, std::span<const double> y,
                             int trials, std::uint64_t seed = 0) {
  if (trials < 1) throw std::invalid_argument("best_of_k needs at least one trial");
  const CoverRounding scheme =
      inst.unit_costs() ? CoverRounding::tree : CoverRounding::budget_random;
  CoverResult best;
  for (int t = 0; t < trials; ++t) {
    CoverResult r = round_cover(inst, y, scheme, mix_seed(seed, t));
    if (t == 0 || r.value > best.value) best = std::move(r);
  }
  best.method = "random-" + std::to_string(trials);
  return best;
}

// Greedy prefix plus LP rounding on the residue. The greedy phase spends at
// most a rho fraction of the budget (floor(rho*L) picks under unit costs),
// the LP sees only uncovered weight and the leftover budget, and final
// enforcement never drops the greedy prefix unless nothing else remains.
inline CoverResult hybrid_cover(const CoverageInstance& inst, double rho,
                                CoverRounding method, std::uint64_t seed = 0,
                                int trials = 1, const LpOptions& lp_options = {}) {
  inst.validate();
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in [0,1]");
  if (trials < 1) throw std::invalid_argument("hybrid needs at least one rounding trial");

  // Greedy prefix, identity scan order, capped by the rho share.
  CoverageInstance prefix_inst = inst;
  prefix_inst.budget = inst.unit_costs()
                           ? std::floor(rho * inst.budget + kIntTol)
                           : rho * inst.budget;
  const CoverResult prefix = greedy_cover(prefix_inst);

  std::vector<std::uint8_t> covered(inst.num_elements(), 0);
  double spent = 0.0;
  for (int j : prefix.chosen) {
    spent += inst.set_cost(j);
    for (int e : inst.sets[j]) covered[e] = 1;
  }

  CoverageInstance residual = inst;
  residual.budget = std::max(0.0, inst.budget - spent);
  for (int i = 0; i < inst.num_elements(); ++i)
    if (covered[i]) residual.weights[i] = 0.0;

  LpModel lp = build_cover_lp(residual);
  for (int j : prefix.chosen) lp.upper[j] = 0.0;  // already taken
  const LpResult res = solve_lp(lp, lp_options);
  if (res.status != LpStatus::optimal)
    throw std::runtime_error("residual coverage LP did not solve to optimality");
  std::vector<double> y(res.x.begin(), res.x.begin() + inst.num_sets());

  const CoverResult rounded = trials == 1 ? round_cover(residual, y, method, seed)
                                          : best_of_k(residual, y, trials, seed);
  std::vector<int> combined = prefix.chosen;
  for (int j : rounded.chosen)
    if (std::find(combined.begin(), combined.end(), j) == combined.end())
      combined.push_back(j);
  combined = enforce_budget(inst, std::move(combined), prefix.chosen);
  const std::string tag =
      trials == 1 ? "hybrid-" + to_string(method) : "hybrid-" + rounded.method;
  return make_cover_result(inst, std::move(combined), tag);
}

}  // namespace depround
