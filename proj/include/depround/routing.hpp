#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lp.hpp"
#include "mip.hpp"
#include "rng.hpp"
#include "rounding.hpp"
#include "tolerances.hpp"

// Low-congestion multipath routing on grid graphs. Each request ships an
// integer demand from source to sink as that many unit flows on edge-disjoint
// paths (per-request edge capacity one); the objective is the maximum total
// load over directed edges. The fractional relaxation is solved as an LP,
// decomposed into weighted paths, and rounded one request-group at a time;
// the exact optimum comes from branch and bound over the binary formulation.

namespace depround {

struct GridNetwork {
  int width = 0, height = 0;
  struct Edge {
    int from = 0, to = 0;
  };
  std::vector<Edge> edges;
  std::vector<std::vector<int>> out_edges;  // per vertex, N,E,S,W order
  std::vector<std::vector<int>> in_edges;

  int num_vertices() const { return width * height; }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int vertex(int x, int y) const { return y * width + x; }

  static GridNetwork make(int width, int height) {
    if (width < 1 || height < 1 || width * height < 2)
      throw std::invalid_argument("grid needs at least two vertices");
    GridNetwork g;
    g.width = width;
    g.height = height;
    g.out_edges.resize(width * height);
    g.in_edges.resize(width * height);
    auto add = [&](int from, int to) {
      g.out_edges[from].push_back(g.num_edges());
      g.in_edges[to].push_back(g.num_edges());
      g.edges.push_back({from, to});
    };
    // Row-major vertex sweep; out-edges appended in N,E,S,W order.
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const int v = g.vertex(x, y);
        if (y > 0) add(v, g.vertex(x, y - 1));
        if (x + 1 < width) add(v, g.vertex(x + 1, y));
        if (y + 1 < height) add(v, g.vertex(x, y + 1));
        if (x > 0) add(v, g.vertex(x - 1, y));
      }
    return g;
  }
};

struct RoutingRequest {
  int src = 0, dst = 0;
  int demand = 1;
};

// Unit-capacity max flow (BFS augmenting paths), stopped once `need` units
// are routed. This is the per-request feasibility certificate: a demand is
// routable on edge-disjoint paths exactly when it is at most this flow.
inline int grid_max_flow(const GridNetwork& net, int src, int dst, int need) {
  std::vector<std::int8_t> cap(net.num_edges(), 1);
  // Residuals for reversed arcs live on the paired opposite edge when it
  // exists; the grid always has both directions, so find the partner once.
  std::vector<int> partner(net.num_edges(), -1);
  for (int e = 0; e < net.num_edges(); ++e) {
    for (int f : net.out_edges[net.edges[e].to])
      if (net.edges[f].to == net.edges[e].from) partner[e] = f;
  }
  int flow = 0;
  std::vector<int> via(net.num_vertices());
  while (flow < need) {
    std::fill(via.begin(), via.end(), -1);
    std::deque<int> queue{src};
    via[src] = -2;
    while (!queue.empty() && via[dst] == -1) {
      const int v = queue.front();
      queue.pop_front();
      for (int e : net.out_edges[v]) {
        if (cap[e] <= 0 || via[net.edges[e].to] != -1) continue;
        via[net.edges[e].to] = e;
        queue.push_back(net.edges[e].to);
      }
    }
    if (via[dst] == -1) break;
    for (int v = dst; v != src;) {
      const int e = via[v];
      --cap[e];
      ++cap[partner[e]];
      v = net.edges[e].from;
    }
    ++flow;
  }
  return flow;
}

inline void validate_requests(const GridNetwork& net, const std::vector<RoutingRequest>& reqs) {
  for (const auto& r : reqs) {
    if (r.src < 0 || r.src >= net.num_vertices() || r.dst < 0 || r.dst >= net.num_vertices())
      throw std::invalid_argument("request endpoint out of range");
    if (r.src == r.dst) throw std::invalid_argument("request source equals sink");
    if (r.demand < 1) throw std::invalid_argument("request demand must be positive");
    if (grid_max_flow(net, r.src, r.dst, r.demand) < r.demand)
      throw std::invalid_argument("request demand exceeds the edge-disjoint path capacity");
  }
}

// Fractional congestion LP. Variables: x_{i,e} = i*m + e in [0,1] for request
// i and edge e, then the congestion bound C at k*m. Rows: per edge the total
// load minus C is nonpositive; per request, net outflow at the source equals
// the demand and is conserved at every other vertex except the sink.
inline LpModel build_routing_lp(const GridNetwork& net,
                                const std::vector<RoutingRequest>& reqs) {
  validate_requests(net, reqs);
  const int m = net.num_edges();
  const int k = static_cast<int>(reqs.size());
  LpModel model;
  model.sense = Sense::minimize;
  for (int i = 0; i < k; ++i)
    for (int e = 0; e < m; ++e) model.add_var(0.0, 1.0, 0.0);
  const int c_var = model.add_var(0.0, kInf, 1.0);
  for (int e = 0; e < m; ++e) {
    std::vector<std::pair<int, double>> terms;
    for (int i = 0; i < k; ++i) terms.emplace_back(i * m + e, 1.0);
    terms.emplace_back(c_var, -1.0);
    model.add_row(RowType::le, 0.0, std::move(terms));
  }
  for (int i = 0; i < k; ++i) {
    for (int v = 0; v < net.num_vertices(); ++v) {
      if (v == reqs[i].dst) continue;  // implied by the other rows
      std::vector<std::pair<int, double>> terms;
      for (int e : net.out_edges[v]) terms.emplace_back(i * m + e, 1.0);
      for (int e : net.in_edges[v]) terms.emplace_back(i * m + e, -1.0);
      const double rhs = v == reqs[i].src ? static_cast<double>(reqs[i].demand) : 0.0;
      model.add_row(RowType::eq, rhs, std::move(terms));
    }
  }
  return model;
}

// Binary single-unit-per-path formulation of the same instance; C stays
// continuous and lands on the integral maximum load at the optimum.
inline LpModel build_routing_ilp(const GridNetwork& net,
                                 const std::vector<RoutingRequest>& reqs) {
  return build_routing_lp(net, reqs);  // identical model; integrality is a solver option
}

// Slack re-optimization: with C* from a prior solve, cap every edge load at
// C* - delta + z_e with z_e in [0, delta] and minimize the total slack used.
// Any optimum still has fractional congestion at most C*. Variable layout:
// x_{i,e} as in the base LP, then z_e at k*m + e.
inline LpModel build_routing_slack_lp(const GridNetwork& net,
                                      const std::vector<RoutingRequest>& reqs, double c_star,
                                      double delta) {
  if (!(delta >= 0.0) || !(delta <= c_star))
    throw std::invalid_argument("slack window must satisfy 0 <= delta <= C*");
  validate_requests(net, reqs);
  const int m = net.num_edges();
  const int k = static_cast<int>(reqs.size());
  LpModel model;
  model.sense = Sense::minimize;
  for (int i = 0; i < k; ++i)
    for (int e = 0; e < m; ++e) model.add_var(0.0, 1.0, 0.0);
  for (int e = 0; e < m; ++e) model.add_var(0.0, delta, 1.0);  // z_e
  for (int e = 0; e < m; ++e) {
    std::vector<std::pair<int, double>> terms;
    for (int i = 0; i < k; ++i) terms.emplace_back(i * m + e, 1.0);
    terms.emplace_back(k * m + e, -1.0);
    model.add_row(RowType::le, c_star - delta, std::move(terms));
  }
  for (int i = 0; i < k; ++i) {
    for (int v = 0; v < net.num_vertices(); ++v) {
      if (v == reqs[i].dst) continue;
      std::vector<std::pair<int, double>> terms;
      for (int e : net.out_edges[v]) terms.emplace_back(i * m + e, 1.0);
      for (int e : net.in_edges[v]) terms.emplace_back(i * m + e, -1.0);
      const double rhs = v == reqs[i].src ? static_cast<double>(reqs[i].demand) : 0.0;
      model.add_row(RowType::eq, rhs, std::move(terms));
    }
  }
  return model;
}

// One request's fractional flow decomposed into weighted paths.
struct PathDecomposition {
  std::vector<std::vector<int>> paths;  // edge id sequences, src to dst
  std::vector<double> weights;          // per path; sums to the demand
};

namespace detail {

// Removes circulation from a single-request flow. Depth-first search over
// every support edge (a back edge into the gray stack closes a cycle) rather
// than just first-support walks: peeling a path later can promote a shadowed
// second out-edge to first support, so the whole support graph must already
// be acyclic. Each cancellation zeroes at least one support edge, so the
// restart loop terminates.
inline void cancel_cycles(const GridNetwork& net, std::vector<double>& flow) {
  const double tol = 1e-9;
  const int n = net.num_vertices();
  std::vector<std::int8_t> color(n);  // 0 unseen, 1 on stack, 2 done
  std::vector<int> via_edge(n);       // tree edge that discovered the vertex
  std::vector<std::size_t> next_out(n);
  for (;;) {
    std::fill(color.begin(), color.end(), 0);
    std::vector<int> cycle;  // edge ids
    for (int root = 0; root < n && cycle.empty(); ++root) {
      if (color[root] != 0) continue;
      std::vector<int> stack{root};
      color[root] = 1;
      next_out[root] = 0;
      via_edge[root] = -1;
      while (!stack.empty() && cycle.empty()) {
        const int v = stack.back();
        bool descended = false;
        while (next_out[v] < net.out_edges[v].size()) {
          const int e = net.out_edges[v][next_out[v]++];
          if (flow[e] <= tol) continue;
          const int to = net.edges[e].to;
          if (color[to] == 1) {
            cycle.push_back(e);
            for (int u = v; u != to; u = net.edges[via_edge[u]].from)
              cycle.push_back(via_edge[u]);
            break;
          }
          if (color[to] == 0) {
            color[to] = 1;
            via_edge[to] = e;
            next_out[to] = 0;
            stack.push_back(to);
            descended = true;
            break;
          }
        }
        if (!descended && cycle.empty()) {
          color[v] = 2;
          stack.pop_back();
        }
      }
    }
    if (cycle.empty()) return;
    double bottleneck = kInf;
    for (int e : cycle) bottleneck = std::min(bottleneck, flow[e]);
    for (int e : cycle) {
      flow[e] -= bottleneck;
      if (flow[e] < tol) flow[e] = 0.0;
    }
  }
}

}  // namespace detail

// Strips one request's flow into source-to-sink paths: verify conservation,
// clamp LP dust, cancel cycles, then repeatedly peel the bottleneck path
// found by walking first-support out-edges from the source. The returned
// weights are renormalized to sum to the demand exactly.
inline PathDecomposition strip_paths(const GridNetwork& net, std::span<const double> edge_flow,
                                     int src, int dst, int demand) {
  if (static_cast<int>(edge_flow.size()) != net.num_edges())
    throw std::invalid_argument("edge flow size mismatch");
  std::vector<double> flow(edge_flow.begin(), edge_flow.end());
  for (double& f : flow) {
    if (f < -kFeasTol || f > 1.0 + kFeasTol)
      throw std::invalid_argument("edge flow outside [0,1]");
    f = std::clamp(f, 0.0, 1.0);
  }
  for (int v = 0; v < net.num_vertices(); ++v) {
    double net_out = 0.0;
    for (int e : net.out_edges[v]) net_out += flow[e];
    for (int e : net.in_edges[v]) net_out -= flow[e];
    double expect = 0.0;
    if (v == src) expect = demand;
    if (v == dst) expect = -demand;
    if (std::abs(net_out - expect) > 1e-7) throw std::invalid_argument("not a flow");
  }
  detail::cancel_cycles(net, flow);

  PathDecomposition out;
  const double tol = 1e-7;
  for (;;) {
    double supply = 0.0;
    for (int e : net.out_edges[src]) supply += flow[e];
    for (int e : net.in_edges[src]) supply -= flow[e];
    if (supply <= tol) break;
    std::vector<int> path;
    int v = src;
    double bottleneck = kInf;
    while (v != dst) {
      int next_edge = -1;
      for (int e : net.out_edges[v])
        if (flow[e] > tol) {
          next_edge = e;
          break;
        }
      if (next_edge < 0) throw std::logic_error("path stripping hit a dead end");
      path.push_back(next_edge);
      bottleneck = std::min(bottleneck, flow[next_edge]);
      v = net.edges[next_edge].to;
      if (static_cast<int>(path.size()) > net.num_vertices() + 1)
        throw std::logic_error("path stripping walked into a cycle");
    }
    for (int e : path) {
      flow[e] -= bottleneck;
      if (flow[e] < 1e-12) flow[e] = 0.0;
    }
    out.paths.push_back(std::move(path));
    out.weights.push_back(bottleneck);
  }
  if (out.paths.empty()) throw std::logic_error("no flow to decompose");
  double total = 0.0;
  for (double w : out.weights) total += w;
  if (std::abs(total - demand) > 1e-5)
    throw std::logic_error("stripped weights are far from the demand");
  std::vector<int> all(out.weights.size());
  std::iota(all.begin(), all.end(), 0);
  adjust_group_to_integer(out.weights, all, static_cast<double>(demand));
  return out;
}

// Whole-instance decomposition plus the flattened rounding problem built on
// it: variables are request-major path-minor, one group per request.
struct RouteDecomposition {
  std::vector<PathDecomposition> per_request;

  int total_paths() const {
    int n = 0;
    for (const auto& d : per_request) n += static_cast<int>(d.paths.size());
    return n;
  }
};

inline RouteDecomposition decompose_routing(const GridNetwork& net,
                                            const std::vector<RoutingRequest>& reqs,
                                            std::span<const double> x) {
  const int m = net.num_edges();
  if (static_cast<int>(x.size()) < m * static_cast<int>(reqs.size()))
    throw std::invalid_argument("solution vector too short");
  RouteDecomposition out;
  for (std::size_t i = 0; i < reqs.size(); ++i)
    out.per_request.push_back(strip_paths(net, x.subspan(i * m, m), reqs[i].src, reqs[i].dst,
                                          reqs[i].demand));
  return out;
}

inline RoundingProblem decomposition_problem(const RouteDecomposition& decomp) {
  RoundingProblem problem;
  for (const auto& d : decomp.per_request) {
    std::vector<int> group;
    for (double w : d.weights) {
      group.push_back(static_cast<int>(problem.values.size()));
      problem.values.push_back(std::clamp(w, 0.0, 1.0));
    }
    problem.groups.push_back(std::move(group));
  }
  return problem;
}

// Maximum directed-edge load of an integral selection (path indices per
// request); paths may overlap, every use counts.
inline double selection_congestion(const GridNetwork& net, const RouteDecomposition& decomp,
                                   const std::vector<std::vector<int>>& selected) {
  std::vector<int> load(net.num_edges(), 0);
  for (std::size_t i = 0; i < selected.size(); ++i)
    for (int p : selected[i])
      for (int e : decomp.per_request[i].paths[p]) ++load[e];
  int worst = 0;
  for (int l : load) worst = std::max(worst, l);
  return worst;
}

// Moment-generating-function congestion estimator: for a fixed lambda and
// threshold T the score is exp(-lambda T) * sum_e prod_{p through e}
// (1 + y_p (e^lambda - 1)). A score below one certifies that every edge load
// stays below T under the current (partially rounded) selection probabilities.
// The restriction of the score to any sum-preserving pair line is concave,
// so a minimizing walk always has a corner no worse than the interior point.
// Evaluations cache per-edge products and update them by diffing against the
// previous argument; every factor is at least one, so division is safe.
class CongestionEstimator {
 public:
  CongestionEstimator(const GridNetwork& net, const RouteDecomposition& decomp, double lambda,
                      double threshold)
      : lambda_(lambda), threshold_(threshold), num_edges_(net.num_edges()) {
    for (const auto& d : decomp.per_request)
      for (const auto& path : d.paths) paths_.push_back(path);
    gain_ = std::exp(lambda_) - 1.0;
    cached_y_.assign(paths_.size(), 0.0);
    products_.assign(num_edges_, 1.0);
  }

  double evaluate(std::span<const double> y) {
    if (y.size() != cached_y_.size()) throw std::invalid_argument("estimator size mismatch");
    for (std::size_t p = 0; p < paths_.size(); ++p) {
      if (y[p] == cached_y_[p]) continue;
      const double old_f = 1.0 + cached_y_[p] * gain_;
      const double new_f = 1.0 + y[p] * gain_;
      const double ratio = new_f / old_f;
      for (int e : paths_[p]) products_[e] *= ratio;
      cached_y_[p] = y[p];
    }
    double sum = 0.0;
    for (int e = 0; e < num_edges_; ++e) sum += products_[e];
    return std::exp(-lambda_ * threshold_) * sum;
  }

  EstimatorOracle oracle() {
    return {[this](std::span<const double> y) { return evaluate(y); }, Direction::minimize};
  }

  double lambda() const { return lambda_; }
  double threshold() const { return threshold_; }

 private:
  double lambda_, threshold_;
  int num_edges_ = 0;
  double gain_ = 0.0;
  std::vector<std::vector<int>> paths_;
  std::vector<double> cached_y_;
  std::vector<double> products_;
};

namespace detail {

// Fresh (uncached) score for parameter fitting.
inline double congestion_score(const RouteDecomposition& decomp, int num_edges,
                               std::span<const double> y, double lambda, double threshold) {
  std::vector<double> prod(num_edges, 1.0);
  int p = 0;
  for (const auto& d : decomp.per_request)
    for (const auto& path : d.paths) {
      const double f = 1.0 + y[p] * (std::exp(lambda) - 1.0);
      for (int e : path) prod[e] *= f;
      ++p;
    }
  double sum = 0.0;
  for (double v : prod) sum += v;
  return std::exp(-lambda * threshold) * sum;
}

}  // namespace detail

struct CongestionBound {
  double lambda = 0.0;
  double threshold = 0.0;
  double score = 0.0;  // certified failure bound at (lambda, threshold)
};

// Picks the certificate parameters for a fractional selection: for each
// candidate threshold (doubling up from the fractional optimum) the score is
// minimized over lambda by ternary search (it is convex in lambda), stopping
// at the first threshold whose best score drops below one.
inline CongestionBound fit_congestion_bound(const GridNetwork& net,
                                            const RouteDecomposition& decomp,
                                            std::span<const double> y, double lp_congestion) {
  const int num_edges = net.num_edges();
  auto best_lambda = [&](double threshold) {
    double lo = 1e-4, hi = 24.0;
    for (int it = 0; it < 96; ++it) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (detail::congestion_score(decomp, num_edges, y, m1, threshold) <
          detail::congestion_score(decomp, num_edges, y, m2, threshold))
        hi = m2;
      else
        lo = m1;
    }
    return 0.5 * (lo + hi);
  };
  double threshold = std::max(1.0, std::ceil(lp_congestion - kIntTol));
  CongestionBound bound;
  for (int rounds = 0; rounds < 24; ++rounds) {
    bound.lambda = best_lambda(threshold);
    bound.threshold = threshold;
    bound.score = detail::congestion_score(decomp, num_edges, y, bound.lambda, threshold);
    if (bound.score < 1.0) return bound;
    threshold *= 2.0;
  }
  throw std::logic_error("no certifiable congestion threshold found");
}

enum class RouteMethod {
  opt,
  rr_tree,
  rr_bitwise,
  rr_plus,
  derr_sequential,
  derr_tree,
  derr_plus,
  independent,
};

inline std::string to_string(RouteMethod m) {
  switch (m) {
    case RouteMethod::opt: return "OPT";
    case RouteMethod::rr_tree: return "RR-tree";
    case RouteMethod::rr_bitwise: return "RR-bitwise";
    case RouteMethod::rr_plus: return "RR+";
    case RouteMethod::derr_sequential: return "DeRR-bitwise";
    case RouteMethod::derr_tree: return "DeRR-tree";
    case RouteMethod::derr_plus: return "DeRR+";
    case RouteMethod::independent: return "independent";
  }
  return "?";
}

inline std::optional<RouteMethod> route_method_from_string(const std::string& s) {
  for (RouteMethod m : {RouteMethod::opt, RouteMethod::rr_tree, RouteMethod::rr_bitwise,
                        RouteMethod::rr_plus, RouteMethod::derr_sequential,
                        RouteMethod::derr_tree, RouteMethod::derr_plus,
                        RouteMethod::independent})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

struct RouteOptions {
  double delta = 1.0;  // slack window for the + variants, clamped to [0, C*]
  IlpOptions ilp;      // limits for the exact method
  LpOptions lp;
};

struct RoutingOutcome {
  std::string method;
  double congestion = 0.0;     // integral max load achieved
  double lp_congestion = 0.0;  // fractional optimum C*
  std::vector<std::vector<std::vector<int>>> routes;  // [request][path] edge ids
  // Dependent methods always route exactly demand-many paths per request;
  // the independent baseline usually does not, and reports it here.
  bool cardinality_feasible = true;
  // Certificate diagnostics, zero when the method carries none.
  double chernoff_threshold = 0.0, lambda = 0.0, score = 0.0;
  // Exact-method diagnostics.
  double best_bound = 0.0, gap = 0.0;
  long nodes = 0;
};

namespace detail {

inline std::vector<std::vector<int>> bits_to_selection(const RouteDecomposition& decomp,
                                                       std::span<const std::uint8_t> bits,
                                                       const std::vector<RoutingRequest>& reqs) {
  std::vector<std::vector<int>> selected(decomp.per_request.size());
  int flat = 0;
  for (std::size_t i = 0; i < decomp.per_request.size(); ++i) {
    for (std::size_t p = 0; p < decomp.per_request[i].paths.size(); ++p, ++flat)
      if (bits[flat]) selected[i].push_back(static_cast<int>(p));
    if (static_cast<int>(selected[i].size()) != reqs[i].demand)
      throw std::logic_error("rounded selection count differs from the demand");
  }
  return selected;
}

inline std::vector<std::vector<std::vector<int>>> selection_routes(
    const RouteDecomposition& decomp, const std::vector<std::vector<int>>& selected) {
  std::vector<std::vector<std::vector<int>>> routes(selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i)
    for (int p : selected[i]) routes[i].push_back(decomp.per_request[i].paths[p]);
  return routes;
}

}  // namespace detail

// Runs one method end to end on one instance. Randomized methods consume the
// seed; deterministic ones ignore it.
inline RoutingOutcome route_instance(const GridNetwork& net,
                                     const std::vector<RoutingRequest>& reqs,
                                     RouteMethod method, std::uint64_t seed,
                                     const RouteOptions& options = {}) {
  RoutingOutcome out;
  out.method = to_string(method);

  const LpModel base_lp = build_routing_lp(net, reqs);
  const LpResult base = solve_lp(base_lp, options.lp);
  if (base.status != LpStatus::optimal)
    throw std::runtime_error("routing LP did not solve to optimality");
  out.lp_congestion = base.objective;

  if (method == RouteMethod::opt) {
    IlpOptions ilp = options.ilp;
    ilp.objective_is_integral = true;
    ilp.integer_vars.resize(net.num_edges() * static_cast<int>(reqs.size()));
    std::iota(ilp.integer_vars.begin(), ilp.integer_vars.end(), 0);
    // Warm incumbent from the deterministic tree derandomization, expressed
    // as binary edge variables; usable only when each request's paths are
    // edge-disjoint (the ILP ignores it otherwise).
    const RoutingOutcome warm = route_instance(net, reqs, RouteMethod::derr_tree, 0, options);
    std::vector<double> warm_x(base_lp.num_vars(), 0.0);
    bool warm_ok = true;
    for (std::size_t i = 0; i < warm.routes.size() && warm_ok; ++i)
      for (const auto& path : warm.routes[i])
        for (int e : path) {
          double& cell = warm_x[i * net.num_edges() + e];
          if (cell != 0.0) warm_ok = false;
          cell = 1.0;
        }
    if (warm_ok) {
      warm_x[base_lp.num_vars() - 1] = warm.congestion;
      ilp.warm_start = std::move(warm_x);
    }
    const IlpResult res = solve_ilp(base_lp, ilp);
    if (res.status != IlpStatus::optimal && res.status != IlpStatus::limit_feasible)
      throw std::runtime_error("routing ILP found no feasible selection");
    out.congestion = res.objective;
    out.best_bound = res.best_bound;
    out.gap = res.gap;
    out.nodes = res.nodes;
    const RouteDecomposition decomp = decompose_routing(net, reqs, res.x);
    out.routes.clear();
    for (const auto& d : decomp.per_request) out.routes.push_back(d.paths);
    return out;
  }

  // Fractional point to decompose: the plus variants re-optimize with a
  // slack window below the fractional optimum first.
  std::vector<double> x(base.x.begin(),
                        base.x.begin() + net.num_edges() * static_cast<int>(reqs.size()));
  if (method == RouteMethod::rr_plus || method == RouteMethod::derr_plus) {
    const double delta = std::clamp(options.delta, 0.0, out.lp_congestion);
    const LpModel slack_lp = build_routing_slack_lp(net, reqs, out.lp_congestion, delta);
    const LpResult slack = solve_lp(slack_lp, options.lp);
    if (slack.status != LpStatus::optimal)
      throw std::runtime_error("slack routing LP did not solve to optimality");
    x.assign(slack.x.begin(),
             slack.x.begin() + net.num_edges() * static_cast<int>(reqs.size()));
  }

  const RouteDecomposition decomp = decompose_routing(net, reqs, x);
  RoundingProblem problem = decomposition_problem(decomp);
  std::vector<std::vector<int>> selected;

  switch (method) {
    case RouteMethod::rr_tree:
      selected = detail::bits_to_selection(decomp, round_tree(problem, seed).bits, reqs);
      break;
    case RouteMethod::rr_bitwise:
    case RouteMethod::rr_plus:
      selected = detail::bits_to_selection(decomp, round_bitwise(problem, seed).bits, reqs);
      break;
    case RouteMethod::derr_tree:
    case RouteMethod::derr_plus:
    case RouteMethod::derr_sequential: {
      const CongestionBound fit =
          fit_congestion_bound(net, decomp, problem.values, out.lp_congestion);
      CongestionEstimator estimator(net, decomp, fit.lambda, fit.threshold);
      const Pairing pairing =
          method == RouteMethod::derr_sequential ? Pairing::sequential : Pairing::tree;
      const auto oracle = estimator.oracle();
      const auto rr = derandomize(problem, oracle, pairing);
      selected = detail::bits_to_selection(decomp, rr.bits, reqs);
      out.chernoff_threshold = fit.threshold;
      out.lambda = fit.lambda;
      std::vector<double> final_y(rr.bits.begin(), rr.bits.end());
      out.score = estimator.evaluate(final_y);
      break;
    }
    case RouteMethod::independent: {
      // Bernoulli per path with no cardinality repair; the outcome's
      // feasibility flag records whether every request kept its demand.
      Rng rng = make_rng(seed);
      selected.resize(decomp.per_request.size());
      for (std::size_t i = 0; i < decomp.per_request.size(); ++i) {
        const auto& d = decomp.per_request[i];
        for (std::size_t p = 0; p < d.paths.size(); ++p)
          if (bernoulli(rng, std::clamp(d.weights[p], 0.0, 1.0)))
            selected[i].push_back(static_cast<int>(p));
        if (static_cast<int>(selected[i].size()) != reqs[i].demand)
          out.cardinality_feasible = false;
      }
      break;
    }
    default: throw std::logic_error("unhandled routing method");
  }

  out.congestion = selection_congestion(net, decomp, selected);
  out.routes = detail::selection_routes(decomp, selected);
  return out;
}

}  // namespace depround
