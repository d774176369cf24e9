#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "depround/lp.hpp"
#include "depround/lp_io.hpp"
#include "depround/mip.hpp"
#include "depround/rng.hpp"
#include "depround/routing.hpp"

using namespace depround;

namespace {

// Exhaustive 0/1 oracle for tiny integer programs (n <= 12): best objective
// over all assignments that satisfy every row, or nullopt if none does.
std::optional<double> brute_force_binary(const LpModel& model) {
  const int n = model.num_vars();
  REQUIRE(n <= 12);
  std::optional<double> best;
  std::vector<double> x(n);
  for (int mask = 0; mask < (1 << n); ++mask) {
    for (int j = 0; j < n; ++j) x[j] = (mask >> j) & 1;
    bool ok = true;
    for (int j = 0; j < n && ok; ++j)
      ok = x[j] >= model.lower[j] - 1e-9 && x[j] <= model.upper[j] + 1e-9;
    for (const auto& row : model.rows) {
      if (!ok) break;
      const double act = row_activity(row, x);
      switch (row.type) {
        case RowType::le: ok = act <= row.rhs + 1e-9; break;
        case RowType::ge: ok = act >= row.rhs - 1e-9; break;
        case RowType::eq: ok = std::abs(act - row.rhs) <= 1e-9; break;
      }
    }
    if (!ok) continue;
    const double obj = lp_objective_value(model, x);
    if (!best || (model.sense == Sense::minimize ? obj < *best : obj > *best)) best = obj;
  }
  return best;
}

LpModel random_binary_model(Rng& rng, int n, int m, bool with_eq) {
  LpModel model;
  model.sense = (rng() & 1) ? Sense::minimize : Sense::maximize;
  for (int j = 0; j < n; ++j)
    model.add_var(0.0, 1.0, std::floor(uniform01(rng) * 21.0) - 10.0);
  for (int r = 0; r < m; ++r) {
    std::vector<std::pair<int, double>> terms;
    for (int j = 0; j < n; ++j)
      if (uniform01(rng) < 0.6)
        terms.emplace_back(j, std::floor(uniform01(rng) * 9.0) - 4.0);
    if (terms.empty()) terms.emplace_back(static_cast<int>(uniform_below(rng, n)), 1.0);
    const double rhs = std::floor(uniform01(rng) * 7.0) - 1.0;
    RowType type = RowType::le;
    if (with_eq && r == 0)
      type = RowType::eq;
    else if (uniform01(rng) < 0.3)
      type = RowType::ge;
    model.add_row(type, rhs, std::move(terms));
  }
  return model;
}

}  // namespace

TEST_CASE("simplex solves textbook instances to their known optima", "[lp]") {
  SECTION("two-variable maximum") {
    LpModel m;
    m.sense = Sense::maximize;
    m.add_var(0.0, kInf, 3.0);
    m.add_var(0.0, kInf, 2.0);
    m.add_row(RowType::le, 4.0, {{0, 1.0}, {1, 1.0}});
    m.add_row(RowType::le, 6.0, {{0, 1.0}, {1, 3.0}});
    const auto r = solve_lp(m);
    REQUIRE(r.status == LpStatus::optimal);
    REQUIRE(r.objective == Catch::Approx(12.0));
    REQUIRE(r.x[0] == Catch::Approx(4.0));
    REQUIRE(r.x[1] == Catch::Approx(0.0).margin(1e-9));
  }

  SECTION("equality and >= rows go through phase one") {
    LpModel m;
    m.add_var(0.0, kInf, 1.0);
    m.add_var(0.0, kInf, 1.0);
    m.add_row(RowType::ge, 2.0, {{0, 1.0}, {1, 1.0}});
    m.add_row(RowType::eq, 0.5, {{0, 1.0}, {1, -1.0}});
    const auto r = solve_lp(m);
    REQUIRE(r.status == LpStatus::optimal);
    REQUIRE(r.objective == Catch::Approx(2.0));
    REQUIRE(r.x[0] == Catch::Approx(1.25));
    REQUIRE(r.x[1] == Catch::Approx(0.75));
  }

  SECTION("upper-bounded variables without explicit rows") {
    LpModel m;
    m.sense = Sense::maximize;
    m.add_var(0.0, 2.0, 1.0);
    m.add_var(0.0, 3.0, 1.0);
    m.add_row(RowType::le, 4.0, {{0, 1.0}, {1, 1.0}});
    const auto r = solve_lp(m);
    REQUIRE(r.status == LpStatus::optimal);
    REQUIRE(r.objective == Catch::Approx(4.0));
  }

  SECTION("shifted lower bounds") {
    LpModel m;
    m.add_var(1.0, 2.0, -1.0);  // min -x over [1,2]
    const auto r = solve_lp(m);
    REQUIRE(r.status == LpStatus::optimal);
    REQUIRE(r.x[0] == Catch::Approx(2.0));
    REQUIRE(r.objective == Catch::Approx(-2.0));
  }

  SECTION("degenerate cycling-prone instance terminates at its optimum") {
    // A classic degenerate minimum: every simplex variant that cycles under
    // naive pricing must escape via the stall fallback and land on -0.05.
    LpModel m;
    m.add_var(0.0, kInf, -0.75);
    m.add_var(0.0, kInf, 150.0);
    m.add_var(0.0, kInf, -0.02);
    m.add_var(0.0, kInf, 6.0);
    m.add_row(RowType::le, 0.0, {{0, 0.25}, {1, -60.0}, {2, -0.04}, {3, 9.0}});
    m.add_row(RowType::le, 0.0, {{0, 0.5}, {1, -90.0}, {2, -0.02}, {3, 3.0}});
    m.add_row(RowType::le, 1.0, {{2, 1.0}});
    const auto r = solve_lp(m);
    REQUIRE(r.status == LpStatus::optimal);
    REQUIRE(r.objective == Catch::Approx(-0.05));
  }

  SECTION("infeasible row system is reported") {
    LpModel m;
    m.add_var(0.0, 1.0, 1.0);
    m.add_row(RowType::ge, 2.0, {{0, 1.0}});
    REQUIRE(solve_lp(m).status == LpStatus::infeasible);
  }

  SECTION("unbounded maximum is reported") {
    LpModel m;
    m.sense = Sense::maximize;
    m.add_var(0.0, kInf, 1.0);
    m.add_row(RowType::ge, 1.0, {{0, 1.0}});
    REQUIRE(solve_lp(m).status == LpStatus::unbounded);
  }

  SECTION("infinite lower bounds are rejected") {
    LpModel m;
    m.add_var(-kInf, 1.0, 1.0);
    REQUIRE_THROWS_AS(solve_lp(m), std::invalid_argument);
  }
}

TEST_CASE("simplex objective is invariant under variable permutation", "[lp]") {
  Rng rng = make_rng(515151);
  int solved = 0;
  for (int rep = 0; rep < 25; ++rep) {
    LpModel m = random_binary_model(rng, 8, 5, rep % 3 == 0);
    // Relax to the unit box: compare objective across a variable relabeling.
    const auto base = solve_lp(m);
    std::vector<int> perm(m.num_vars());
    std::iota(perm.begin(), perm.end(), 0);
    const auto shuffle = random_permutation(m.num_vars(), rng);
    LpModel pm;
    pm.sense = m.sense;
    pm.objective.resize(m.num_vars());
    pm.lower.resize(m.num_vars());
    pm.upper.resize(m.num_vars());
    for (int j = 0; j < m.num_vars(); ++j) {
      pm.objective[shuffle[j]] = m.objective[j];
      pm.lower[shuffle[j]] = m.lower[j];
      pm.upper[shuffle[j]] = m.upper[j];
    }
    for (const auto& row : m.rows) {
      auto terms = row.terms;
      for (auto& [j, a] : terms) j = shuffle[j];
      pm.add_row(row.type, row.rhs, std::move(terms));
    }
    const auto permuted = solve_lp(pm);
    REQUIRE(base.status == permuted.status);
    if (base.status == LpStatus::optimal) {
      ++solved;
      REQUIRE(base.objective == Catch::Approx(permuted.objective).margin(1e-7));
    }
  }
  REQUIRE(solved >= 10);  // the generator must produce mostly solvable models
}

TEST_CASE("branch and bound matches exhaustive enumeration on binary programs", "[mip]") {
  Rng rng = make_rng(90210);
  int feasible_seen = 0, infeasible_seen = 0;
  for (int rep = 0; rep < 30; ++rep) {
    LpModel m = random_binary_model(rng, 9, 6, rep % 4 == 0);
    const auto truth = brute_force_binary(m);
    const auto r = solve_ilp(m);
    if (!truth) {
      ++infeasible_seen;
      REQUIRE(r.status == IlpStatus::infeasible);
      continue;
    }
    ++feasible_seen;
    REQUIRE(r.status == IlpStatus::optimal);
    REQUIRE(r.objective == Catch::Approx(*truth).margin(1e-6));
    REQUIRE(r.gap == 0.0);
    for (double v : r.x) REQUIRE(std::abs(v - std::round(v)) < 1e-9);
    REQUIRE(lp_feasible(m, r.x, 1e-7));
  }
  REQUIRE(feasible_seen >= 10);
  REQUIRE(infeasible_seen >= 1);
}

TEST_CASE("integral-objective pruning changes nothing but the node count", "[mip]") {
  Rng rng = make_rng(777001);
  for (int rep = 0; rep < 10; ++rep) {
    LpModel m = random_binary_model(rng, 10, 5, false);
    IlpOptions plain, tight;
    tight.objective_is_integral = true;
    const auto a = solve_ilp(m, plain);
    const auto b = solve_ilp(m, tight);
    REQUIRE(a.status == b.status);
    if (a.status == IlpStatus::optimal)
      REQUIRE(a.objective == Catch::Approx(b.objective).margin(1e-6));
  }
}

TEST_CASE("warm starts and limits behave honestly", "[mip]") {
  LpModel m;
  m.sense = Sense::maximize;
  for (int j = 0; j < 6; ++j) m.add_var(0.0, 1.0, 1.0 + j);
  m.add_row(RowType::le, 3.0, {{0, 1.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}, {4, 1.0}, {5, 1.0}});
  // Optimum picks the three largest objective entries: 4 + 5 + 6 = 15.

  SECTION("a valid warm start is kept and the optimum still found") {
    IlpOptions opt;
    opt.warm_start = std::vector<double>{1.0, 1.0, 1.0, 0.0, 0.0, 0.0};
    const auto r = solve_ilp(m, opt);
    REQUIRE(r.status == IlpStatus::optimal);
    REQUIRE(r.objective == Catch::Approx(15.0));
  }

  SECTION("an infeasible warm start is ignored") {
    IlpOptions opt;
    opt.warm_start = std::vector<double>{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    const auto r = solve_ilp(m, opt);
    REQUIRE(r.status == IlpStatus::optimal);
    REQUIRE(r.objective == Catch::Approx(15.0));
  }

  SECTION("node limit zero with a warm start reports the incumbent and a gap") {
    IlpOptions opt;
    opt.warm_start = std::vector<double>{1.0, 1.0, 1.0, 0.0, 0.0, 0.0};
    opt.max_nodes = 0;
    const auto r = solve_ilp(m, opt);
    REQUIRE(r.status == IlpStatus::limit_feasible);
    REQUIRE(r.objective == Catch::Approx(6.0));
    REQUIRE(r.gap > 0.0);
    REQUIRE(r.best_bound >= 15.0 - 1e-9);
  }

  SECTION("node limit zero without a warm start is honest about not knowing") {
    IlpOptions opt;
    opt.max_nodes = 0;
    REQUIRE(solve_ilp(m, opt).status == IlpStatus::limit_infeasible);
  }

  SECTION("fractional equality with no integral point is proven infeasible") {
    LpModel bad;
    bad.add_var(0.0, 1.0, 1.0);
    bad.add_var(0.0, 1.0, 1.0);
    bad.add_row(RowType::eq, 1.5, {{0, 1.0}, {1, 1.0}});
    REQUIRE(solve_ilp(bad).status == IlpStatus::infeasible);
  }
}

TEST_CASE("LP text export is stable and solutions read back", "[lp_io]") {
  LpModel m;
  m.sense = Sense::maximize;
  m.add_var(0.0, 1.0, 2.5);
  m.add_var(0.0, kInf, -1.0);
  m.add_var(0.5, 0.5, 0.0);
  m.add_row(RowType::le, 4.0, {{0, 1.0}, {1, 2.0}});
  m.add_row(RowType::ge, -1.0, {{1, -3.0}, {2, 1.0}});
  m.add_row(RowType::eq, 0.5, {{2, 1.0}});

  SECTION("golden export") {
    const std::string expected =
        "Maximize\n"
        " obj: 2.5 x0 - 1 x1\n"
        "Subject To\n"
        " c0: 1 x0 + 2 x1 <= 4\n"
        " c1: - 3 x1 + 1 x2 >= -1\n"
        " c2: 1 x2 = 0.5\n"
        "Bounds\n"
        " x0 <= 1\n"
        " x2 = 0.5\n"
        "End\n";
    REQUIRE(write_lp_string(m) == expected);
  }

  SECTION("integer markers are listed") {
    const std::string text = write_lp_string(m, {0, 1});
    REQUIRE(text.find("General\n x0 x1\n") != std::string::npos);
  }

  SECTION("solution listings parse with defaults and errors") {
    const auto x = read_solution_string("x0 0.25\n\n# comment\nx2 1\n", 3);
    REQUIRE(x == std::vector<double>{0.25, 0.0, 1.0});
    REQUIRE_THROWS_WITH(read_solution_string("x0 1\ny1 2\n", 3),
                        Catch::Matchers::ContainsSubstring("line 2"));
    REQUIRE_THROWS_WITH(read_solution_string("x9 1\n", 3),
                        Catch::Matchers::ContainsSubstring("x9"));
  }

  SECTION("file round trip") {
    const std::string lp_path = "/tmp/depround_test_model.lp";
    const std::string sol_path = "/tmp/depround_test_model.sol";
    write_lp_file(m, lp_path);
    std::ifstream f(lp_path);
    REQUIRE(f.good());
    std::ofstream s(sol_path);
    s << "x0 1\nx1 0.5\nx2 0.5\n";
    s.close();
    const auto x = read_solution_file(sol_path, 3);
    REQUIRE(x == std::vector<double>{1.0, 0.5, 0.5});
  }
}

TEST_CASE("bound formatting covers open and closed intervals", "[lp_io]") {
  LpModel m;
  m.add_var(0.0, kInf, 1.0);   // default, no line
  m.add_var(2.0, kInf, 1.0);   // one-sided
  m.add_var(-1.0, 3.0, 1.0);   // two-sided
  const std::string text = write_lp_string(m);
  REQUIRE(text.find(" x1 >= 2\n") != std::string::npos);
  REQUIRE(text.find(" -1 <= x2 <= 3\n") != std::string::npos);
  REQUIRE(text.find("x0 <=") == std::string::npos);
}

TEST_CASE("routing model export is structurally complete", "[lp_io]") {
  const GridNetwork net = GridNetwork::make(5, 5);
  const LpModel model = build_routing_lp(net, {{0, 24, 1}});
  const std::string text = write_lp_string(model);

  int lines = 0;
  for (char c : text) lines += c == '\n';
  int bound_lines = 0;
  for (int j = 0; j < model.num_vars(); ++j)
    if (!(model.lower[j] == 0.0 && model.upper[j] == kInf)) ++bound_lines;
  // Sense + objective + "Subject To" + "Bounds" + "End" = 5 header lines;
  // one line per row, one per non-default bound, no wrapping at this size.
  REQUIRE(lines == 5 + static_cast<int>(model.rows.size()) + bound_lines);
  REQUIRE(bound_lines == net.num_edges());      // path vars live in [0,1]
  REQUIRE(text.find("Maximize") == std::string::npos);

  // A line never exceeds the wrap column, so counts stay parseable.
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) REQUIRE(line.size() <= 104);
}
