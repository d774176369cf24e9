#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>
#include <depround/bench.hpp>

using namespace depround;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("csv headers are frozen") {
  // Golden copies: consumers parse by these exact names, so any rename must
  // bump the schema version instead of editing in place.
  CHECK(std::string(kRoutingRunsHeader) ==
        "schema_v,instance,width,height,k,demands,seed,method,congestion,lp_congestion,"
        "reference,gap_pct,cardinality_feasible,wall_ms");
  CHECK(std::string(kRoutingTableHeader) ==
        "schema_v,width,height,k,demands,method,n,mean_congestion,stddev_congestion,"
        "mean_gap_pct,reference");
  CHECK(std::string(kCoverageRunsHeader) ==
        "schema_v,instance,budget,method,rho,seed,value,cost,wall_ms");
  CHECK(std::string(kPtasRunsHeader) ==
        "schema_v,instance,diameter,budget,ell,value,cost,shift_h,shift_v,wall_ms");
  CHECK(kCsvSchemaVersion == 1);
}

TEST_CASE("parallel_for covers every index exactly once") {
  for (int workers : {1, 2, 5}) {
    const int n = 137;
    std::vector<std::atomic<int>> hits(n);
    parallel_for(n, workers, [&](int i) { hits[i].fetch_add(1); });
    for (int i = 0; i < n; ++i) CHECK(hits[i].load() == 1);
  }
  // Degenerate shapes: nothing to do, and more workers than items.
  parallel_for(0, 4, [](int) { FAIL("no work expected"); });
  std::atomic<int> count{0};
  parallel_for(2, 8, [&](int) { count.fetch_add(1); });
  CHECK(count.load() == 2);
}

TEST_CASE("parallel_for propagates the first exception") {
  CHECK_THROWS_WITH(parallel_for(16, 3,
                                 [](int i) {
                                   if (i == 7) throw std::runtime_error("boom");
                                 }),
                    "boom");
  // After a failure the pool still joins; a fresh run works.
  std::atomic<int> count{0};
  parallel_for(4, 3, [&](int) { count.fetch_add(1); });
  CHECK(count.load() == 4);
}

TEST_CASE("routing table aggregates per-seed gaps against the exact optimum") {
  RoutingTableConfig config;
  config.width = 3;
  config.height = 3;
  config.k = 2;
  config.seeds = 3;
  config.methods = {RouteMethod::opt, RouteMethod::rr_tree, RouteMethod::derr_tree};
  const RoutingTable table = run_routing_table(config);

  REQUIRE(table.runs.size() == 9);
  REQUIRE(table.cells.size() == 3);
  CHECK(table.reference_kind == "opt");

  for (std::size_t i = 0; i < table.runs.size(); ++i) {
    const RoutingRun& run = table.runs[i];
    CHECK(run.reference == table.runs[i / 3 * 3].congestion);  // the OPT row of that seed
    if (run.method == "OPT") {
      CHECK_FALSE(run.gap_pct.has_value());
    } else {
      REQUIRE(run.gap_pct.has_value());
      CHECK(*run.gap_pct ==
            Catch::Approx(100.0 * (run.congestion - run.reference) / run.reference));
      CHECK(run.congestion >= run.reference);  // exact optimum is a lower bound
    }
    CHECK(run.lp_congestion <= run.congestion + 1e-9);
    CHECK(run.instance_hash != 0);
  }
  // The derandomized mean never exceeds the randomized one on shared seeds.
  CHECK(table.cells[2].mean_congestion <= table.cells[1].mean_congestion + 1e-12);
  for (const RoutingAggregate& cell : table.cells) CHECK(cell.n == 3);
}

TEST_CASE("routing table validates its configuration") {
  RoutingTableConfig config;
  config.methods = {};
  CHECK_THROWS_WITH(run_routing_table(config), "empty method list");
  config.methods = {RouteMethod::opt};
  config.use_ilp = false;
  CHECK_THROWS_WITH(run_routing_table(config), "the exact method requires the integer solver");
  config.methods = {RouteMethod::rr_tree};
  config.seeds = 0;
  CHECK_THROWS_WITH(run_routing_table(config), "need at least one seed");
}

TEST_CASE("routing table with the solver off references the rounded-up relaxation") {
  RoutingTableConfig config;
  config.width = 3;
  config.height = 3;
  config.k = 2;
  config.seeds = 2;
  config.use_ilp = false;
  config.methods = {RouteMethod::derr_tree};
  const RoutingTable table = run_routing_table(config);
  CHECK(table.reference_kind == "ceil-lp");
  for (const RoutingRun& run : table.runs) {
    CHECK(run.reference == std::ceil(run.lp_congestion - kIntTol));
    REQUIRE(run.gap_pct.has_value());
  }
}

TEST_CASE("single-seed stddev is zero and csv files carry the schema column") {
  RoutingTableConfig config;
  config.width = 3;
  config.height = 3;
  config.k = 2;
  config.seeds = 1;
  config.methods = {RouteMethod::opt, RouteMethod::derr_tree};
  const RoutingTable table = run_routing_table(config);
  for (const RoutingAggregate& cell : table.cells) {
    CHECK(cell.n == 1);
    CHECK(cell.stddev_congestion == 0.0);
  }
  // OPT-only cell keeps the gap column empty.
  CHECK_FALSE(table.cells[0].mean_gap_pct.has_value());

  const auto dir = fresh_dir("depround_bench_rt");
  write_routing_csvs(table, dir.string());
  const auto runs = lines_of(slurp(dir / "routing_runs.csv"));
  const auto cells = lines_of(slurp(dir / "routing_table.csv"));
  REQUIRE(runs.size() == 3);  // header + one row per (seed, method)
  REQUIRE(cells.size() == 3);
  CHECK(runs[0] == kRoutingRunsHeader);
  CHECK(cells[0] == kRoutingTableHeader);
  for (std::size_t i = 1; i < runs.size(); ++i) CHECK(runs[i].rfind("1,", 0) == 0);
  // OPT data row has an empty gap field: ",," straddling the gap column.
  CHECK(runs[1].find("OPT") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("routing table is deterministic and worker-count independent") {
  RoutingTableConfig config;
  config.width = 3;
  config.height = 3;
  config.k = 2;
  config.seeds = 3;
  config.methods = {RouteMethod::rr_bitwise, RouteMethod::derr_sequential};
  config.use_ilp = false;
  const RoutingTable a = run_routing_table(config);
  config.workers = 3;
  const RoutingTable b = run_routing_table(config);
  REQUIRE(a.runs.size() == b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    CHECK(a.runs[i].method == b.runs[i].method);
    CHECK(a.runs[i].seed == b.runs[i].seed);
    CHECK(a.runs[i].congestion == b.runs[i].congestion);
    CHECK(a.runs[i].instance_hash == b.runs[i].instance_hash);
  }
}

TEST_CASE("coverage sweep emits bound rows once per budget and method rows per seed") {
  CoverageSweepConfig config;
  config.instance = gen_random_coverage(15, 40, 4.0, 11);
  config.budgets = {3.0, 4.0};
  config.rho_grid = {0.2, 0.5};
  config.methods = {"greedy", "random", "derand", "gradient", "hybrid", "independent"};
  config.best_of_trials = 25;
  config.seeds = 2;
  const CoverageSweep sweep = run_coverage_sweep(config);

  // Per budget: 3 bound rows + greedy x2 + random x2 + derand + gradient +
  // independent x2 + hybrid (2 rho x 2 seeds).
  REQUIRE(sweep.runs.size() == 2 * (3 + 2 + 2 + 1 + 1 + 2 + 4));

  int bound_rows = 0;
  for (const CoverageRun& run : sweep.runs) {
    if (run.method == "lp-bound" || run.method == "lp-fractional" ||
        run.method == "approx-floor") {
      ++bound_rows;
      CHECK_FALSE(run.cost.has_value());
      continue;
    }
    REQUIRE(run.cost.has_value());
    CHECK(*run.cost <= run.budget + 1e-9);
    const bool is_hybrid = run.method.rfind("hybrid", 0) == 0;
    CHECK(run.rho.has_value() == is_hybrid);
  }
  CHECK(bound_rows == 6);

  // Every run's value sits at or below that budget's fractional bound.
  for (const CoverageRun& run : sweep.runs) {
    double bound = 0.0;
    for (const CoverageRun& other : sweep.runs)
      if (other.budget == run.budget && other.method == "lp-bound") bound = other.value;
    CHECK(run.value <= bound + 1e-6);
  }
}

TEST_CASE("coverage sweep rejects bad method lists") {
  CoverageSweepConfig config;
  config.instance = gen_random_coverage(6, 10, 2.0, 3);
  config.methods = {};
  CHECK_THROWS_WITH(run_coverage_sweep(config), "empty method list");
  config.methods = {"greedy", "simulated-annealing"};
  CHECK_THROWS_WITH(run_coverage_sweep(config),
                    "unknown coverage method 'simulated-annealing'");
  config.methods = {"hybrid"};
  config.rho_grid = {};
  CHECK_THROWS_WITH(run_coverage_sweep(config), "hybrid needs a rho grid");
}

TEST_CASE("coverage sweep defaults to the instance budget and writes plot data") {
  CoverageSweepConfig config;
  config.instance = gen_random_coverage(10, 25, 3.0, 5);
  config.methods = {"greedy", "derand"};
  config.best_of_trials = 10;
  const CoverageSweep sweep = run_coverage_sweep(config);
  for (const CoverageRun& run : sweep.runs) CHECK(run.budget == 3.0);

  const auto dir = fresh_dir("depround_bench_cov");
  write_coverage_csvs(sweep, dir.string());
  const auto runs = lines_of(slurp(dir / "coverage_runs.csv"));
  CHECK(runs[0] == kCoverageRunsHeader);
  CHECK(runs.size() == sweep.runs.size() + 1);
  CHECK(std::filesystem::exists(dir / "sweep_greedy.dat"));
  CHECK(std::filesystem::exists(dir / "sweep_derand.dat"));
  CHECK(std::filesystem::exists(dir / "sweep_lp-bound.dat"));
  const auto greedy = lines_of(slurp(dir / "sweep_greedy.dat"));
  REQUIRE(greedy.size() == 1);  // one budget, one mean point
  CHECK(greedy[0].rfind("3 ", 0) == 0);
  const std::string gp = slurp(dir / "plot.gp");
  CHECK(gp.find("plot") != std::string::npos);
  CHECK(gp.find("sweep_greedy.dat") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("coverage sweep rows are reproducible from their logged coordinates") {
  CoverageSweepConfig config;
  config.instance = gen_random_coverage(12, 30, 4.0, 21);
  config.methods = {"random", "hybrid", "independent"};
  config.rho_grid = {0.4};
  config.best_of_trials = 15;
  config.seeds = 2;
  config.seed_base = 5;
  const CoverageSweep a = run_coverage_sweep(config);
  const CoverageSweep b = run_coverage_sweep(config);
  REQUIRE(a.runs.size() == b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    CHECK(a.runs[i].method == b.runs[i].method);
    CHECK(a.runs[i].value == b.runs[i].value);
    CHECK(a.runs[i].seed == b.runs[i].seed);
  }
  // Seeded rows really carry the configured seed base.
  bool saw_seeded = false;
  for (const CoverageRun& run : a.runs)
    if (run.seed) {
      saw_seeded = true;
      CHECK(*run.seed >= 5);
      CHECK(*run.seed <= 6);
    }
  CHECK(saw_seeded);
}

TEST_CASE("ptas rows capture the certified shift") {
  PointSet pts;
  for (int i = 0; i < 9; ++i) {
    pts.x.push_back(static_cast<double>(i % 3) * 2.0);
    pts.y.push_back(static_cast<double>(i / 3) * 2.0);
    pts.profit.push_back(1.0);
  }
  const PtasRow row = run_ptas(pts, 1.0, 2, 3);
  CHECK(row.value == 2.0);  // disjoint points: each disk dominates itself only
  CHECK(row.cost == 2.0);
  CHECK(row.ell == 3);
  CHECK(row.instance_hash == fnv1a64(canonical_json(pts)));

  const auto dir = fresh_dir("depround_bench_ptas");
  write_ptas_csv({row}, dir.string());
  const auto lines = lines_of(slurp(dir / "ptas_runs.csv"));
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == kPtasRunsHeader);
  CHECK(lines[1].rfind("1,", 0) == 0);
  std::filesystem::remove_all(dir);
}
