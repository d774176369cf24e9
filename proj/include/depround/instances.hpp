#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "coverage.hpp"
#include "rng.hpp"
#include "routing.hpp"

// Instance generators (chessboard king coverage, finite projective planes,
// random grid-routing requests), converters from facility-location data to
// max-coverage, and canonical JSON serialization for replay. Canonical form
// is the compact dump with alphabetically ordered keys; golden tests pin its
// FNV-1a hash.

namespace depround {

// Chessboard coverage: a (3k)x(3k) board, one element and one set per
// square, set j = squares a king reaches from square j in at most one step
// (j included). Unit weights and costs; budget k*k admits a perfect tiling
// by the 3x3 blocks around the block centers.
inline CoverageInstance gen_chessboard(int k) {
  if (k < 1) throw std::invalid_argument("chessboard needs k >= 1");
  const int side = 3 * k;
  CoverageInstance inst;
  inst.weights.assign(side * side, 1.0);
  inst.budget = static_cast<double>(k) * k;
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      std::vector<int> members;
      for (int rr = std::max(0, r - 1); rr <= std::min(side - 1, r + 1); ++rr)
        for (int cc = std::max(0, c - 1); cc <= std::min(side - 1, c + 1); ++cc)
          members.push_back(rr * side + cc);
      std::sort(members.begin(), members.end());
      inst.sets.push_back(std::move(members));
    }
  return inst;
}

namespace detail {

inline bool is_prime(int q) {
  if (q < 2) return false;
  for (int d = 2; d * d <= q; ++d)
    if (q % d == 0) return false;
  return true;
}

// Canonical enumeration of the projective points/lines over the prime field:
// (1,a,b) for all a,b; then (0,1,c); then (0,0,1).
inline std::vector<std::array<int, 3>> projective_triples(int q) {
  std::vector<std::array<int, 3>> out;
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b) out.push_back({1, a, b});
  for (int c = 0; c < q; ++c) out.push_back({0, 1, c});
  out.push_back({0, 0, 1});
  return out;
}

}  // namespace detail

// Finite projective plane of prime order q: q*q+q+1 points and lines, every
// line holds q+1 points, every point lies on q+1 lines. Elements are points,
// sets are lines; unit weights and costs, budget q.
inline CoverageInstance gen_fpp(int q) {
  if (!detail::is_prime(q)) throw std::invalid_argument("projective plane order must be prime");
  const auto points = detail::projective_triples(q);
  const auto lines = detail::projective_triples(q);
  CoverageInstance inst;
  inst.weights.assign(points.size(), 1.0);
  inst.budget = q;
  for (const auto& l : lines) {
    std::vector<int> members;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const int dot = l[0] * points[i][0] + l[1] * points[i][1] + l[2] * points[i][2];
      if (dot % q == 0) members.push_back(static_cast<int>(i));
    }
    inst.sets.push_back(std::move(members));
  }
  return inst;
}

// Random coverage instance: each set covers each element independently with
// the given density (empty draws get one uniform member so no set is void),
// element weights are uniform integers in 1..10. Unit costs by default;
// otherwise costs are uniform in [0.5, 3.0].
inline CoverageInstance gen_random_coverage(int num_sets, int num_elements, double budget,
                                            std::uint64_t seed, double density = 0.3,
                                            bool unit_costs = true) {
  if (num_sets < 1 || num_elements < 1)
    throw std::invalid_argument("coverage generator needs sets and elements");
  if (!(density > 0.0 && density <= 1.0))
    throw std::invalid_argument("density must lie in (0,1]");
  Rng rng = make_rng(seed);
  CoverageInstance inst;
  inst.budget = budget;
  for (int i = 0; i < num_elements; ++i)
    inst.weights.push_back(1.0 + static_cast<double>(uniform_below(rng, 10)));
  for (int j = 0; j < num_sets; ++j) {
    std::vector<int> members;
    for (int e = 0; e < num_elements; ++e)
      if (bernoulli(rng, density)) members.push_back(e);
    if (members.empty())
      members.push_back(static_cast<int>(uniform_below(rng, num_elements)));
    inst.sets.push_back(std::move(members));
  }
  if (!unit_costs)
    for (int j = 0; j < num_sets; ++j) inst.costs.push_back(0.5 + 2.5 * uniform01(rng));
  inst.validate();
  return inst;
}

enum class DemandMode { fixed3, uniform1to5 };

inline std::string to_string(DemandMode m) {
  return m == DemandMode::fixed3 ? "fixed3" : "u1-5";
}

inline DemandMode demand_mode_from_string(const std::string& s) {
  if (s == "fixed3") return DemandMode::fixed3;
  if (s == "u1-5") return DemandMode::uniform1to5;
  throw std::invalid_argument("unknown demand mode '" + s + "' (fixed3 or u1-5)");
}

struct RoutingInstance {
  int width = 0, height = 0;
  std::uint64_t seed = 0;  // generator seed, recorded for replay
  std::vector<RoutingRequest> requests;
};

// Draws k requests with endpoints uniform on the vertices (resampled while
// equal) and demands per the mode. Attempts whose demands exceed some
// request's edge-disjoint path capacity are rejected wholesale and redrawn
// from the next derived stream, so one seed always names one instance.
inline RoutingInstance gen_routing_instance(int width, int height, int k, DemandMode mode,
                                            std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("need at least one request");
  const GridNetwork net = GridNetwork::make(width, height);
  const std::uint64_t vertices = static_cast<std::uint64_t>(net.num_vertices());
  for (std::uint64_t attempt = 0; attempt < 100000; ++attempt) {
    Rng rng = make_rng(mix_seed(seed, attempt));
    std::vector<RoutingRequest> reqs;
    for (int i = 0; i < k; ++i) {
      RoutingRequest r;
      r.src = static_cast<int>(uniform_below(rng, vertices));
      do r.dst = static_cast<int>(uniform_below(rng, vertices));
      while (r.dst == r.src);
      r.demand = mode == DemandMode::fixed3
                     ? 3
                     : 1 + static_cast<int>(uniform_below(rng, 5));
      reqs.push_back(r);
    }
    bool feasible = true;
    for (const auto& r : reqs)
      if (grid_max_flow(net, r.src, r.dst, r.demand) < r.demand) {
        feasible = false;
        break;
      }
    if (feasible) return {width, height, seed, std::move(reqs)};
  }
  throw std::runtime_error("no feasible request draw for this grid");
}

// Point cloud with per-point profits, the raw material of the geometric
// coverage instances. File format: one "x y profit" line per point; blank
// lines and lines starting with '#' are skipped.
struct PointSet {
  std::vector<double> x, y, profit;
  int size() const { return static_cast<int>(x.size()); }
};

inline PointSet parse_point_text(const std::string& text, const std::string& origin) {
  PointSet pts;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    double px, py, pw;
    std::string extra;
    if (!(row >> px >> py >> pw) || (row >> extra))
      throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                               ": expected 'x y profit'");
    pts.x.push_back(px);
    pts.y.push_back(py);
    pts.profit.push_back(pw);
  }
  return pts;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

inline PointSet parse_point_file(const std::string& path) {
  return parse_point_text(read_text_file(path), path);
}

// Unit-disk coverage instance: one set and one element per point, set j =
// closed neighborhood of point j under Euclidean distance <= diameter.
// Profits become element weights; costs are unit.
inline CoverageInstance build_udg(const PointSet& pts, double diameter, double budget) {
  if (!(diameter >= 0.0)) throw std::invalid_argument("diameter must be nonnegative");
  CoverageInstance inst;
  inst.weights = pts.profit;
  inst.budget = budget;
  const int n = pts.size();
  for (int j = 0; j < n; ++j) {
    std::vector<int> members;
    for (int i = 0; i < n; ++i) {
      const double dx = pts.x[i] - pts.x[j], dy = pts.y[i] - pts.y[j];
      if (std::sqrt(dx * dx + dy * dy) <= diameter) members.push_back(i);
    }
    inst.sets.push_back(std::move(members));
  }
  return inst;
}

enum class FacilityFormat { orlib_points, ufllib };

namespace detail {

// Drops zero-weight elements and reindexes the sets accordingly.
inline CoverageInstance drop_zero_weights(CoverageInstance inst) {
  std::vector<int> remap(inst.num_elements(), -1);
  std::vector<double> weights;
  for (int i = 0; i < inst.num_elements(); ++i)
    if (inst.weights[i] > 0.0) {
      remap[i] = static_cast<int>(weights.size());
      weights.push_back(inst.weights[i]);
    }
  for (auto& s : inst.sets) {
    std::vector<int> kept;
    for (int e : s)
      if (remap[e] >= 0) kept.push_back(remap[e]);
    s = std::move(kept);
  }
  inst.weights = std::move(weights);
  return inst;
}

// Whitespace matrix layout for the demand-scaled facility files: first line
// "m n" (elements, sets), then m rows of n distances, then m demands.
struct FacilityMatrix {
  std::vector<std::vector<double>> dist;  // [element][set]
  std::vector<double> demand;
};

inline FacilityMatrix parse_facility_matrix(const std::string& text,
                                            const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> std::string {
    while (std::getline(in, line)) {
      ++lineno;
      const auto first = line.find_first_not_of(" \t\r");
      if (first != std::string::npos && line[first] != '#') return line;
    }
    throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": unexpected end of file");
  };
  auto fail = [&](const std::string& what) -> std::runtime_error {
    return std::runtime_error(origin + ":" + std::to_string(lineno) + ": " + what);
  };
  int m = 0, n = 0;
  {
    std::istringstream row(next_line());
    if (!(row >> m >> n) || m < 1 || n < 1) throw fail("expected 'm n' header");
  }
  FacilityMatrix out;
  for (int i = 0; i < m; ++i) {
    std::istringstream row(next_line());
    std::vector<double> d(n);
    for (int j = 0; j < n; ++j)
      if (!(row >> d[j])) throw fail("expected " + std::to_string(n) + " distances");
    out.dist.push_back(std::move(d));
  }
  {
    std::istringstream row(next_line());
    out.demand.resize(m);
    for (int i = 0; i < m; ++i)
      if (!(row >> out.demand[i])) throw fail("expected " + std::to_string(m) + " demands");
  }
  return out;
}

}  // namespace detail

// Converts facility-location data to max-coverage: element i belongs to set
// j when their distance is at most the threshold, demands become element
// weights, costs are unit. Demand-scaled files ("M*" data, where stored
// distances were multiplied by the demand) are de-scaled by dividing row i
// by demand i before thresholding. Zero-weight elements are dropped.
inline CoverageInstance convert_facility(const std::string& path, FacilityFormat format,
                                         double threshold, bool mstar_descale, double budget) {
  if (!(threshold >= 0.0)) throw std::invalid_argument("threshold must be nonnegative");
  CoverageInstance inst;
  if (format == FacilityFormat::orlib_points) {
    const PointSet pts = parse_point_file(path);
    if (mstar_descale)
      for (int i = 0; i < pts.size(); ++i)
        if (pts.profit[i] == 0.0)
          throw std::runtime_error("zero demand cannot be de-scaled: point " +
                                   std::to_string(i));
    inst.weights = pts.profit;
    inst.budget = budget;
    const int n = pts.size();
    for (int j = 0; j < n; ++j) {
      std::vector<int> members;
      for (int i = 0; i < n; ++i) {
        const double dx = pts.x[i] - pts.x[j], dy = pts.y[i] - pts.y[j];
        double d = std::sqrt(dx * dx + dy * dy);
        if (mstar_descale) d /= pts.profit[i];
        if (d <= threshold) members.push_back(i);
      }
      inst.sets.push_back(std::move(members));
    }
  } else {
    const auto mat = detail::parse_facility_matrix(read_text_file(path), path);
    if (mstar_descale)
      for (std::size_t i = 0; i < mat.demand.size(); ++i)
        if (mat.demand[i] == 0.0)
          throw std::runtime_error("zero demand cannot be de-scaled: row " + std::to_string(i));
    inst.weights = mat.demand;
    inst.budget = budget;
    const int m = static_cast<int>(mat.dist.size());
    const int n = static_cast<int>(mat.dist[0].size());
    for (int j = 0; j < n; ++j) {
      std::vector<int> members;
      for (int i = 0; i < m; ++i) {
        const double d = mstar_descale ? mat.dist[i][j] / mat.demand[i] : mat.dist[i][j];
        if (d <= threshold) members.push_back(i);
      }
      inst.sets.push_back(std::move(members));
    }
  }
  inst = detail::drop_zero_weights(std::move(inst));
  inst.validate();
  return inst;
}

// Canonical JSON schema for coverage instances:
// {m, n, budget, costs[], weights[], sets[[]]} with per-set element lists
// sorted ascending. Costs are written per set even in unit mode.
inline nlohmann::json to_json(const CoverageInstance& inst) {
  nlohmann::json j;
  j["m"] = inst.num_elements();
  j["n"] = inst.num_sets();
  j["budget"] = inst.budget;
  std::vector<double> costs(inst.num_sets());
  for (int s = 0; s < inst.num_sets(); ++s) costs[s] = inst.set_cost(s);
  j["costs"] = costs;
  j["weights"] = inst.weights;
  auto sets = inst.sets;
  for (auto& s : sets) std::sort(s.begin(), s.end());
  j["sets"] = sets;
  return j;
}

inline CoverageInstance coverage_from_json(const nlohmann::json& j) {
  CoverageInstance inst;
  inst.weights = j.at("weights").get<std::vector<double>>();
  inst.sets = j.at("sets").get<std::vector<std::vector<int>>>();
  inst.budget = j.at("budget").get<double>();
  inst.costs = j.at("costs").get<std::vector<double>>();
  if (j.at("m").get<int>() != inst.num_elements() || j.at("n").get<int>() != inst.num_sets())
    throw std::runtime_error("instance header disagrees with array sizes");
  bool unit = true;
  for (double c : inst.costs)
    if (c != 1.0) unit = false;
  if (unit) inst.costs.clear();
  inst = detail::drop_zero_weights(std::move(inst));
  inst.validate();
  return inst;
}

// Routing replay schema: {width, height, seed, requests:[{src,dst,demand}]}.
inline nlohmann::json to_json(const RoutingInstance& inst) {
  nlohmann::json j;
  j["width"] = inst.width;
  j["height"] = inst.height;
  j["seed"] = inst.seed;
  j["requests"] = nlohmann::json::array();
  for (const auto& r : inst.requests)
    j["requests"].push_back({{"src", r.src}, {"dst", r.dst}, {"demand", r.demand}});
  return j;
}

inline RoutingInstance routing_from_json(const nlohmann::json& j) {
  RoutingInstance inst;
  inst.width = j.at("width").get<int>();
  inst.height = j.at("height").get<int>();
  inst.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& r : j.at("requests")) {
    RoutingRequest req;
    req.src = r.at("src").get<int>();
    req.dst = r.at("dst").get<int>();
    req.demand = r.at("demand").get<int>();
    inst.requests.push_back(req);
  }
  validate_requests(GridNetwork::make(inst.width, inst.height), inst.requests);
  return inst;
}

// Point-set schema: {n, x[], y[], profit[]}.
inline nlohmann::json to_json(const PointSet& pts) {
  nlohmann::json j;
  j["n"] = pts.size();
  j["x"] = pts.x;
  j["y"] = pts.y;
  j["profit"] = pts.profit;
  return j;
}

template <typename T>
std::string canonical_json(const T& value) {
  return to_json(value).dump();
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

template <typename T>
void save_instance(const std::string& path, const T& value) {
  write_text_file(path, canonical_json(value) + "\n");
}

inline CoverageInstance load_coverage(const std::string& path) {
  return coverage_from_json(nlohmann::json::parse(read_text_file(path)));
}

inline RoutingInstance load_routing(const std::string& path) {
  return routing_from_json(nlohmann::json::parse(read_text_file(path)));
}

}  // namespace depround
