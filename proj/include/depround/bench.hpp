#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "coverage.hpp"
#include "instances.hpp"
#include "parallel.hpp"
#include "ptas.hpp"
#include "routing.hpp"

// Benchmark sweeps: seeded end-to-end runs of the routing and coverage
// pipelines with CSV emission. Every row logs the instance hash, method, and
// seed it was produced from, so any number can be recomputed in isolation.
// Headers start with a schema_v column and are frozen by golden tests.

namespace depround {

inline constexpr int kCsvSchemaVersion = 1;
inline constexpr const char* kRoutingRunsHeader =
    "schema_v,instance,width,height,k,demands,seed,method,congestion,lp_congestion,"
    "reference,gap_pct,cardinality_feasible,wall_ms";
inline constexpr const char* kRoutingTableHeader =
    "schema_v,width,height,k,demands,method,n,mean_congestion,stddev_congestion,"
    "mean_gap_pct,reference";
inline constexpr const char* kCoverageRunsHeader =
    "schema_v,instance,budget,method,rho,seed,value,cost,wall_ms";
inline constexpr const char* kPtasRunsHeader =
    "schema_v,instance,diameter,budget,ell,value,cost,shift_h,shift_v,wall_ms";

namespace detail {

inline std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string fmt_hash(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

class WallTimer {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::ofstream open_out(const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Routing tables: mean congestion per method with per-seed relative gaps.

struct RoutingTableConfig {
  int width = 5, height = 5;
  int k = 10;
  DemandMode demands = DemandMode::fixed3;
  int seeds = 100;
  std::uint64_t seed_base = 1;
  std::vector<RouteMethod> methods;
  // Reference for gaps: the exact optimum when the integer solver is on,
  // otherwise the rounded-up fractional optimum.
  bool use_ilp = true;
  int workers = 1;
  RouteOptions route;
};

struct RoutingRun {
  std::uint64_t seed = 0, instance_hash = 0;
  std::string method;
  double congestion = 0.0, lp_congestion = 0.0, reference = 0.0;
  std::optional<double> gap_pct;  // absent for the exact method itself
  bool cardinality_feasible = true;
  double wall_ms = 0.0;
};

struct RoutingAggregate {
  std::string method;
  int n = 0;
  double mean_congestion = 0.0, stddev_congestion = 0.0;
  std::optional<double> mean_gap_pct;
};

struct RoutingTable {
  RoutingTableConfig config;
  std::string reference_kind;  // "opt" or "ceil-lp"
  std::vector<RoutingRun> runs;         // seed-major, method-minor
  std::vector<RoutingAggregate> cells;  // config method order
};

inline RoutingTable run_routing_table(const RoutingTableConfig& config) {
  if (config.methods.empty()) throw std::invalid_argument("empty method list");
  if (config.seeds < 1) throw std::invalid_argument("need at least one seed");
  const bool wants_opt =
      std::find(config.methods.begin(), config.methods.end(), RouteMethod::opt) !=
      config.methods.end();
  if (wants_opt && !config.use_ilp)
    throw std::invalid_argument("the exact method requires the integer solver");

  RoutingTable table;
  table.config = config;
  table.reference_kind = config.use_ilp ? "opt" : "ceil-lp";
  const int per_seed = static_cast<int>(config.methods.size());
  table.runs.assign(static_cast<std::size_t>(config.seeds) * per_seed, {});

  parallel_for(config.seeds, config.workers, [&](int s) {
    const std::uint64_t seed = config.seed_base + static_cast<std::uint64_t>(s);
    const RoutingInstance inst =
        gen_routing_instance(config.width, config.height, config.k, config.demands, seed);
    const std::uint64_t hash = fnv1a64(canonical_json(inst));
    const GridNetwork net = GridNetwork::make(inst.width, inst.height);

    // The reference is computed once per seed; when the method list also
    // names the exact method, that run is reused rather than repeated.
    std::optional<RoutingOutcome> opt_outcome;
    double opt_ms = 0.0;
    if (config.use_ilp) {
      detail::WallTimer t;
      opt_outcome = route_instance(net, inst.requests, RouteMethod::opt, seed, config.route);
      opt_ms = t.ms();
    }

    double reference = 0.0;
    bool have_reference = config.use_ilp;
    if (have_reference) reference = opt_outcome->congestion;
    for (int m = 0; m < per_seed; ++m) {
      const RouteMethod method = config.methods[m];
      RoutingRun run;
      run.seed = seed;
      run.instance_hash = hash;
      run.method = to_string(method);
      if (method == RouteMethod::opt) {
        run.congestion = opt_outcome->congestion;
        run.lp_congestion = opt_outcome->lp_congestion;
        run.cardinality_feasible = opt_outcome->cardinality_feasible;
        run.wall_ms = opt_ms;
      } else {
        detail::WallTimer t;
        const RoutingOutcome out =
            route_instance(net, inst.requests, method, seed, config.route);
        run.wall_ms = t.ms();
        run.congestion = out.congestion;
        run.lp_congestion = out.lp_congestion;
        run.cardinality_feasible = out.cardinality_feasible;
      }
      if (!have_reference) {
        // All methods share one fractional optimum per instance, so the
        // rounded-up value from the first run stands in for the whole seed.
        reference = std::ceil(run.lp_congestion - kIntTol);
        have_reference = true;
      }
      run.reference = reference;
      if (method != RouteMethod::opt && reference > 0.0)
        run.gap_pct = 100.0 * (run.congestion - reference) / reference;
      table.runs[static_cast<std::size_t>(s) * per_seed + m] = std::move(run);
    }
  });

  for (int m = 0; m < per_seed; ++m) {
    RoutingAggregate agg;
    agg.method = to_string(config.methods[m]);
    double sum = 0.0, gap_sum = 0.0;
    int gap_n = 0;
    for (int s = 0; s < config.seeds; ++s) {
      const RoutingRun& run = table.runs[static_cast<std::size_t>(s) * per_seed + m];
      sum += run.congestion;
      if (run.gap_pct) {
        gap_sum += *run.gap_pct;
        ++gap_n;
      }
      ++agg.n;
    }
    agg.mean_congestion = sum / agg.n;
    if (agg.n > 1) {
      double ss = 0.0;
      for (int s = 0; s < config.seeds; ++s) {
        const double d =
            table.runs[static_cast<std::size_t>(s) * per_seed + m].congestion -
            agg.mean_congestion;
        ss += d * d;
      }
      agg.stddev_congestion = std::sqrt(ss / (agg.n - 1));
    }
    if (gap_n > 0) agg.mean_gap_pct = gap_sum / gap_n;
    table.cells.push_back(std::move(agg));
  }
  return table;
}

inline void write_routing_csvs(const RoutingTable& table, const std::string& out_dir) {
  auto runs = detail::open_out(out_dir, "routing_runs.csv");
  runs << kRoutingRunsHeader << "\n";
  for (const RoutingRun& r : table.runs) {
    runs << kCsvSchemaVersion << ',' << detail::fmt_hash(r.instance_hash) << ','
         << table.config.width << ',' << table.config.height << ',' << table.config.k << ','
         << to_string(table.config.demands) << ',' << r.seed << ',' << r.method << ','
         << detail::fmt_num(r.congestion) << ',' << detail::fmt_num(r.lp_congestion) << ','
         << detail::fmt_num(r.reference) << ','
         << (r.gap_pct ? detail::fmt_num(*r.gap_pct) : "") << ','
         << (r.cardinality_feasible ? 1 : 0) << ',' << detail::fmt_num(r.wall_ms) << "\n";
  }
  auto cells = detail::open_out(out_dir, "routing_table.csv");
  cells << kRoutingTableHeader << "\n";
  for (const RoutingAggregate& c : table.cells) {
    cells << kCsvSchemaVersion << ',' << table.config.width << ',' << table.config.height << ','
          << table.config.k << ',' << to_string(table.config.demands) << ',' << c.method << ','
          << c.n << ',' << detail::fmt_num(c.mean_congestion) << ','
          << detail::fmt_num(c.stddev_congestion) << ','
          << (c.mean_gap_pct ? detail::fmt_num(*c.mean_gap_pct) : "") << ','
          << table.reference_kind << "\n";
  }
}

// ---------------------------------------------------------------------------
// Coverage sweeps: one LP per budget, every rounding method from that point.

struct CoverageSweepConfig {
  CoverageInstance instance;
  std::vector<double> budgets;   // empty = the instance's own budget
  std::vector<double> rho_grid;  // hybrid prefix shares
  std::vector<std::string> methods;
  int best_of_trials = 1000;
  int seeds = 1;  // repetitions of the seeded methods
  std::uint64_t seed_base = 1;
  int workers = 1;
  LpOptions lp;
};

struct CoverageRun {
  std::uint64_t instance_hash = 0;
  double budget = 0.0;
  std::string method;
  std::optional<double> rho;
  std::optional<std::uint64_t> seed;
  double value = 0.0;
  std::optional<double> cost;
  double wall_ms = 0.0;
};

struct CoverageSweep {
  CoverageSweepConfig config;
  std::vector<CoverageRun> runs;
};

inline const std::vector<std::string>& coverage_sweep_methods() {
  static const std::vector<std::string> names{"greedy",   "random", "derand",
                                              "gradient", "hybrid", "independent"};
  return names;
}

inline CoverageSweep run_coverage_sweep(const CoverageSweepConfig& config) {
  if (config.methods.empty()) throw std::invalid_argument("empty method list");
  for (const std::string& m : config.methods) {
    const auto& known = coverage_sweep_methods();
    if (std::find(known.begin(), known.end(), m) == known.end())
      throw std::invalid_argument("unknown coverage method '" + m + "'");
    if (m == "hybrid" && config.rho_grid.empty())
      throw std::invalid_argument("hybrid needs a rho grid");
  }
  if (config.seeds < 1) throw std::invalid_argument("need at least one seed");
  config.instance.validate();

  std::vector<double> budgets = config.budgets;
  if (budgets.empty()) budgets.push_back(config.instance.budget);
  const std::uint64_t hash = fnv1a64(canonical_json(config.instance));

  CoverageSweep sweep;
  sweep.config = config;
  std::vector<std::vector<CoverageRun>> per_budget(budgets.size());

  parallel_for(static_cast<int>(budgets.size()), config.workers, [&](int b) {
    CoverageInstance inst = config.instance;
    inst.budget = budgets[b];
    std::vector<CoverageRun>& rows = per_budget[b];
    auto emit = [&](std::string method, double value, std::optional<double> cost,
                    std::optional<double> rho, std::optional<std::uint64_t> seed,
                    double wall_ms) {
      CoverageRun run;
      run.instance_hash = hash;
      run.budget = inst.budget;
      run.method = std::move(method);
      run.rho = rho;
      run.seed = seed;
      run.value = value;
      run.cost = cost;
      run.wall_ms = wall_ms;
      rows.push_back(std::move(run));
    };

    // One relaxation per budget; every LP-based method rounds this point.
    detail::WallTimer lp_timer;
    const CoverLpSolution lp = solve_cover_lp(inst, config.lp);
    const double lp_ms = lp_timer.ms();
    emit("lp-bound", lp.lp_value, {}, {}, {}, lp_ms);
    emit("lp-fractional", lp.frac_value, {}, {}, {}, 0.0);
    emit("approx-floor", (1.0 - 1.0 / std::numbers::e) * lp.lp_value, {}, {}, {}, 0.0);

    for (const std::string& m : config.methods) {
      if (m == "greedy") {
        for (int s = 0; s < config.seeds; ++s) {
          detail::WallTimer t;
          // Seed zero keeps the canonical scan order; later repetitions
          // shuffle it to expose the spread over tie-breaks.
          const std::optional<std::uint64_t> order =
              s == 0 ? std::optional<std::uint64_t>{}
                     : std::optional<std::uint64_t>{config.seed_base + s};
          const CoverResult r = greedy_cover(inst, order);
          emit("greedy", r.value, r.cost, {}, order, t.ms());
        }
      } else if (m == "random") {
        for (int s = 0; s < config.seeds; ++s) {
          const std::uint64_t seed = config.seed_base + s;
          detail::WallTimer t;
          const CoverResult r = best_of_k(inst, lp.y, config.best_of_trials, seed);
          emit(r.method, r.value, r.cost, {}, seed, t.ms());
        }
      } else if (m == "derand") {
        detail::WallTimer t;
        const CoverResult r = round_cover(inst, lp.y, CoverRounding::derand_tree);
        emit("derand", r.value, r.cost, {}, {}, t.ms());
      } else if (m == "gradient") {
        detail::WallTimer t;
        const CoverResult r = round_cover(inst, lp.y, CoverRounding::gradient);
        emit("gradient", r.value, r.cost, {}, {}, t.ms());
      } else if (m == "independent") {
        for (int s = 0; s < config.seeds; ++s) {
          const std::uint64_t seed = config.seed_base + s;
          detail::WallTimer t;
          const CoverResult r = round_cover(inst, lp.y, CoverRounding::independent, seed);
          emit("independent", r.value, r.cost, {}, seed, t.ms());
        }
      } else {  // hybrid
        for (double rho : config.rho_grid)
          for (int s = 0; s < config.seeds; ++s) {
            const std::uint64_t seed = config.seed_base + s;
            detail::WallTimer t;
            const CoverResult r = hybrid_cover(inst, rho, CoverRounding::tree, seed,
                                               config.best_of_trials, config.lp);
            emit("hybrid", r.value, r.cost, rho, seed, t.ms());
          }
      }
    }
  });

  for (auto& rows : per_budget)
    for (auto& run : rows) sweep.runs.push_back(std::move(run));
  return sweep;
}

inline void write_coverage_csvs(const CoverageSweep& sweep, const std::string& out_dir) {
  auto runs = detail::open_out(out_dir, "coverage_runs.csv");
  runs << kCoverageRunsHeader << "\n";
  for (const CoverageRun& r : sweep.runs) {
    runs << kCsvSchemaVersion << ',' << detail::fmt_hash(r.instance_hash) << ','
         << detail::fmt_num(r.budget) << ',' << r.method << ','
         << (r.rho ? detail::fmt_num(*r.rho) : "") << ','
         << (r.seed ? std::to_string(*r.seed) : "") << ',' << detail::fmt_num(r.value) << ','
         << (r.cost ? detail::fmt_num(*r.cost) : "") << ',' << detail::fmt_num(r.wall_ms)
         << "\n";
  }

  // Budget-sweep plot data: per method, mean value at each budget, plus a
  // gnuplot stub wiring the files together.
  std::map<std::string, std::map<double, std::pair<double, int>>> series;
  for (const CoverageRun& r : sweep.runs) {
    std::string label = r.method;
    if (r.rho) label += "-" + detail::fmt_num(*r.rho);
    auto& cell = series[label][r.budget];
    cell.first += r.value;
    cell.second += 1;
  }
  std::vector<std::string> labels;
  for (const auto& [label, points] : series) {
    auto dat = detail::open_out(out_dir, "sweep_" + label + ".dat");
    for (const auto& [budget, acc] : points)
      dat << detail::fmt_num(budget) << ' ' << detail::fmt_num(acc.first / acc.second) << "\n";
    labels.push_back(label);
  }
  auto gp = detail::open_out(out_dir, "plot.gp");
  gp << "set xlabel 'budget'\nset ylabel 'covered weight'\nset key outside\nplot";
  for (std::size_t i = 0; i < labels.size(); ++i)
    gp << (i ? ", \\\n     " : " ") << "'sweep_" << labels[i] << ".dat' with linespoints title '"
       << labels[i] << "'";
  gp << "\n";
}

// ---------------------------------------------------------------------------
// Unit-disk placement: one row per grid granularity.

struct PtasRow {
  std::uint64_t instance_hash = 0;
  double diameter = 0.0;
  int budget = 0, ell = 0;
  double value = 0.0, cost = 0.0;
  int shift_h = 0, shift_v = 0;
  double wall_ms = 0.0;
};

inline PtasRow run_ptas(const PointSet& pts, double diameter, int budget, int ell,
                        const IlpOptions& ilp = {}) {
  detail::WallTimer t;
  const PtasResult res = ptas_solve(pts, diameter, budget, ell, ilp);
  PtasRow row;
  row.instance_hash = fnv1a64(canonical_json(pts));
  row.diameter = diameter;
  row.budget = budget;
  row.ell = ell;
  row.value = res.best.value;
  row.cost = res.best.cost;
  row.shift_h = res.shift_h;
  row.shift_v = res.shift_v;
  row.wall_ms = t.ms();
  return row;
}

inline void write_ptas_csv(const std::vector<PtasRow>& rows, const std::string& out_dir) {
  auto out = detail::open_out(out_dir, "ptas_runs.csv");
  out << kPtasRunsHeader << "\n";
  for (const PtasRow& r : rows) {
    out << kCsvSchemaVersion << ',' << detail::fmt_hash(r.instance_hash) << ','
        << detail::fmt_num(r.diameter) << ',' << r.budget << ',' << r.ell << ','
        << detail::fmt_num(r.value) << ',' << detail::fmt_num(r.cost) << ',' << r.shift_h
        << ',' << r.shift_v << ',' << detail::fmt_num(r.wall_ms) << "\n";
  }
}

}  // namespace depround
