#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <depround/depround.hpp>

// Experiment runner: generates instances, converts benchmark files, and
// sweeps the routing and coverage pipelines over seeds, writing versioned
// CSVs plus plot-ready data. Options may also come from a key=value config
// file (--config); explicit flags override the file.

namespace {

using namespace depround;

struct GridFlags {
  int width = 5, height = 5;
  std::string grid;  // "WxH" shorthand, wins over the separate flags

  void add_to(CLI::App* cmd) {
    cmd->add_option("--grid", grid, "grid size as WxH (overrides --width/--height)");
    cmd->add_option("--width", width, "grid width");
    cmd->add_option("--height", height, "grid height");
  }

  void resolve() {
    if (grid.empty()) return;
    int w = 0, h = 0;
    char tail = 0;
    if (std::sscanf(grid.c_str(), "%dx%d%c", &w, &h, &tail) != 2 || w < 1 || h < 1)
      throw CLI::ValidationError("--grid", "expected WxH, e.g. 5x5");
    width = w;
    height = h;
  }
};

std::vector<RouteMethod> parse_route_methods(const std::vector<std::string>& names) {
  std::vector<RouteMethod> methods;
  for (const std::string& name : names) {
    const std::optional<RouteMethod> m = route_method_from_string(name);
    if (!m) throw std::runtime_error("unknown routing method '" + name + "'");
    methods.push_back(*m);
  }
  return methods;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dependent-rounding toolkit: routing and coverage benchmark sweeps"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; command-line flags override it");
  app.option_defaults()->configurable();

  // --- gen: instance generators -------------------------------------------
  CLI::App* gen = app.add_subcommand("gen", "generate an instance file");
  gen->require_subcommand(1);

  auto* gen_chess = gen->add_subcommand("chessboard", "king-neighborhood coverage on a 3k x 3k board");
  int chess_k = 4;
  double chess_budget = -1.0;
  std::string chess_out;
  gen_chess->add_option("--k", chess_k, "board scale (side 3k)")->check(CLI::PositiveNumber);
  gen_chess->add_option("--budget", chess_budget, "override the default budget k^2");
  gen_chess->add_option("--out", chess_out, "output JSON path")->required();

  auto* gen_fpp_cmd = gen->add_subcommand("fpp", "projective-plane line coverage of prime order q");
  int fpp_q = 17;
  double fpp_budget = -1.0;
  std::string fpp_out;
  gen_fpp_cmd->add_option("--q", fpp_q, "plane order (prime)")->check(CLI::PositiveNumber);
  gen_fpp_cmd->add_option("--budget", fpp_budget, "override the default budget q");
  gen_fpp_cmd->add_option("--out", fpp_out, "output JSON path")->required();

  auto* gen_rt = gen->add_subcommand("routing", "seeded grid routing instance");
  GridFlags gen_rt_grid;
  gen_rt_grid.add_to(gen_rt);
  int gen_rt_k = 10;
  std::string gen_rt_demands = "fixed3";
  std::uint64_t gen_rt_seed = 1;
  std::string gen_rt_out;
  gen_rt->add_option("--k,--requests", gen_rt_k, "number of requests")->check(CLI::PositiveNumber);
  gen_rt->add_option("--demands", gen_rt_demands, "demand mode: fixed3 or u1-5");
  gen_rt->add_option("--seed", gen_rt_seed, "instance seed");
  gen_rt->add_option("--out", gen_rt_out, "output JSON path")->required();

  auto* gen_cov = gen->add_subcommand("coverage-random", "random coverage instance");
  int cov_sets = 40, cov_elements = 120;
  double cov_budget = 8.0, cov_density = 0.3;
  std::uint64_t cov_seed = 1;
  bool cov_costed = false;
  std::string cov_out;
  gen_cov->add_option("--sets", cov_sets, "number of sets")->check(CLI::PositiveNumber);
  gen_cov->add_option("--elements", cov_elements, "number of elements")->check(CLI::PositiveNumber);
  gen_cov->add_option("--budget", cov_budget, "selection budget");
  gen_cov->add_option("--seed", cov_seed, "instance seed");
  gen_cov->add_option("--density", cov_density, "expected membership fraction");
  gen_cov->add_flag("--costed", cov_costed, "draw non-unit set costs");
  gen_cov->add_option("--out", cov_out, "output JSON path")->required();

  // --- convert: facility-location benchmark files --------------------------
  CLI::App* convert = app.add_subcommand("convert", "convert a facility benchmark to coverage JSON");
  std::string conv_format = "orlib-points", conv_in, conv_out;
  double conv_threshold = 0.0, conv_budget = 0.0;
  bool conv_mstar = false;
  convert->add_option("--format", conv_format, "orlib-points or ufllib")
      ->check(CLI::IsMember({"orlib-points", "ufllib"}));
  convert->add_option("--in", conv_in, "input benchmark file")->required();
  convert->add_option("--threshold", conv_threshold, "membership distance threshold")->required();
  convert->add_flag("--mstar", conv_mstar, "descale distances by demand before thresholding");
  convert->add_option("--budget", conv_budget, "selection budget")->required();
  convert->add_option("--out", conv_out, "output JSON path")->required();

  // --- routing-table --------------------------------------------------------
  CLI::App* rt = app.add_subcommand("routing-table", "mean congestion per method over seeds");
  RoutingTableConfig rt_config;
  GridFlags rt_grid;
  rt_grid.add_to(rt);
  std::vector<std::string> rt_methods{"OPT", "RR-tree", "RR-bitwise", "RR+",
                                      "DeRR-bitwise", "DeRR-tree", "DeRR+", "independent"};
  std::string rt_demands = "fixed3", rt_ilp = "internal", rt_out = "routing-out";
  rt->add_option("--k,--requests", rt_config.k, "number of requests")->check(CLI::PositiveNumber);
  rt->add_option("--demands", rt_demands, "demand mode: fixed3 or u1-5");
  rt->add_option("--seeds", rt_config.seeds, "number of seeds")->check(CLI::PositiveNumber);
  rt->add_option("--seed-base", rt_config.seed_base, "first seed");
  rt->add_option("--methods", rt_methods, "comma-separated method names")->delimiter(',');
  rt->add_option("--ilp", rt_ilp, "reference solver: internal, external, or off")
      ->check(CLI::IsMember({"internal", "external", "off"}));
  rt->add_option("--delta", rt_config.route.delta, "slack window for the + variants");
  rt->add_option("--workers", rt_config.workers, "seed-level worker threads")
      ->check(CLI::PositiveNumber);
  rt->add_option("--out,--out-dir", rt_out, "output directory");

  // --- coverage-sweep -------------------------------------------------------
  CLI::App* cs = app.add_subcommand("coverage-sweep", "coverage methods across budgets");
  CoverageSweepConfig cs_config;
  std::string cs_instance, cs_out = "coverage-out";
  std::vector<std::string> cs_methods{"greedy", "random", "derand", "gradient", "hybrid"};
  cs->add_option("--instance", cs_instance, "coverage instance JSON")->required();
  cs->add_option("--methods", cs_methods, "comma-separated method names")->delimiter(',');
  cs->add_option("--rho-grid,--rho", cs_config.rho_grid, "hybrid greedy-prefix shares")
      ->delimiter(',');
  cs->add_option("--budget", cs_config.budgets, "budget sweep values (default: the instance's)")
      ->delimiter(',');
  cs->add_option("--seeds", cs_config.seeds, "repetitions of seeded methods")
      ->check(CLI::PositiveNumber);
  cs->add_option("--seed-base", cs_config.seed_base, "first seed");
  cs->add_option("--trials", cs_config.best_of_trials, "trials for best-of-k rounding")
      ->check(CLI::PositiveNumber);
  cs->add_option("--workers", cs_config.workers, "budget-level worker threads")
      ->check(CLI::PositiveNumber);
  cs->add_option("--out,--out-dir", cs_out, "output directory");

  // --- ptas ------------------------------------------------------------------
  CLI::App* pt = app.add_subcommand("ptas", "shifted-grid unit-disk placement");
  std::string pt_instance, pt_out = "ptas-out";
  double pt_diameter = 1.0;
  int pt_budget = 1;
  std::vector<int> pt_ells{3};
  pt->add_option("--instance", pt_instance, "point file with 'x y profit' lines")->required();
  pt->add_option("--diameter", pt_diameter, "disk diameter")->required();
  pt->add_option("--budget", pt_budget, "number of disks")->required()
      ->check(CLI::PositiveNumber);
  pt->add_option("--ell", pt_ells, "shift-grid granularities")->delimiter(',');
  pt->add_option("--out,--out-dir", pt_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_chess->parsed()) {
      CoverageInstance inst = gen_chessboard(chess_k);
      if (chess_budget >= 0.0) inst.budget = chess_budget;
      save_instance(chess_out, inst);
      std::printf("wrote %s: %d sets, %d elements, budget %g\n", chess_out.c_str(),
                  inst.num_sets(), inst.num_elements(), inst.budget);
    } else if (gen_fpp_cmd->parsed()) {
      CoverageInstance inst = gen_fpp(fpp_q);
      if (fpp_budget >= 0.0) inst.budget = fpp_budget;
      save_instance(fpp_out, inst);
      std::printf("wrote %s: %d sets, %d elements, budget %g\n", fpp_out.c_str(),
                  inst.num_sets(), inst.num_elements(), inst.budget);
    } else if (gen_rt->parsed()) {
      gen_rt_grid.resolve();
      const RoutingInstance inst =
          gen_routing_instance(gen_rt_grid.width, gen_rt_grid.height, gen_rt_k,
                               demand_mode_from_string(gen_rt_demands), gen_rt_seed);
      save_instance(gen_rt_out, inst);
      std::printf("wrote %s: %dx%d grid, %zu requests\n", gen_rt_out.c_str(), inst.width,
                  inst.height, inst.requests.size());
    } else if (gen_cov->parsed()) {
      const CoverageInstance inst = gen_random_coverage(cov_sets, cov_elements, cov_budget,
                                                        cov_seed, cov_density, !cov_costed);
      save_instance(cov_out, inst);
      std::printf("wrote %s: %d sets, %d elements, budget %g\n", cov_out.c_str(),
                  inst.num_sets(), inst.num_elements(), inst.budget);
    } else if (convert->parsed()) {
      const FacilityFormat format = conv_format == "ufllib" ? FacilityFormat::ufllib
                                                            : FacilityFormat::orlib_points;
      const CoverageInstance inst =
          convert_facility(conv_in, format, conv_threshold, conv_mstar, conv_budget);
      save_instance(conv_out, inst);
      std::printf("wrote %s: %d sets, %d elements, budget %g\n", conv_out.c_str(),
                  inst.num_sets(), inst.num_elements(), inst.budget);
    } else if (rt->parsed()) {
      rt_grid.resolve();
      rt_config.width = rt_grid.width;
      rt_config.height = rt_grid.height;
      rt_config.demands = demand_mode_from_string(rt_demands);
      rt_config.methods = parse_route_methods(rt_methods);
      if (rt_ilp == "external")
        throw std::runtime_error(
            "no external solver is wired into this build; use the model export API "
            "or --ilp internal|off");
      rt_config.use_ilp = rt_ilp == "internal";
      const RoutingTable table = run_routing_table(rt_config);
      write_routing_csvs(table, rt_out);
      std::printf("wrote %s/routing_runs.csv and routing_table.csv (%d seeds x %zu methods)\n",
                  rt_out.c_str(), rt_config.seeds, rt_config.methods.size());
      for (const RoutingAggregate& c : table.cells)
        std::printf("  %-12s mean %.3f  stddev %.3f  gap %s\n", c.method.c_str(),
                    c.mean_congestion, c.stddev_congestion,
                    c.mean_gap_pct ? (std::to_string(*c.mean_gap_pct) + "%").c_str() : "-");
    } else if (cs->parsed()) {
      cs_config.instance = load_coverage(cs_instance);
      cs_config.methods = cs_methods;
      const CoverageSweep sweep = run_coverage_sweep(cs_config);
      write_coverage_csvs(sweep, cs_out);
      std::printf("wrote %s/coverage_runs.csv and per-method sweep data (%zu rows)\n",
                  cs_out.c_str(), sweep.runs.size());
    } else if (pt->parsed()) {
      const PointSet pts = parse_point_file(pt_instance);
      std::vector<PtasRow> rows;
      for (int ell : pt_ells) {
        rows.push_back(run_ptas(pts, pt_diameter, pt_budget, ell));
        std::printf("  ell=%d  value %.6g  shift (%d,%d)\n", ell, rows.back().value,
                    rows.back().shift_h, rows.back().shift_v);
      }
      write_ptas_csv(rows, pt_out);
      std::printf("wrote %s/ptas_runs.csv\n", pt_out.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
