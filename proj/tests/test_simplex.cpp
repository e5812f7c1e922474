#include <random>

#include <catch_amalgamated.hpp>

#include "nsnm/simplex.hpp"

using namespace nsnm::lp;

TEST_CASE("single bounded variable", "[simplex]") {
  Problem p;
  int x = p.add_var(0, 10, 1.0);
  p.add_row({{x, 1.0}}, RowSense::LessEqual, 5.0);
  Solution s = solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  REQUIRE(s.objective == Catch::Approx(5.0));
  REQUIRE(s.x[0] == Catch::Approx(5.0));
  REQUIRE(s.row_duals[0] == Catch::Approx(1.0));
  REQUIRE(check_optimal(p, s).empty());
}

TEST_CASE("conflicting rows give a verifying certificate", "[simplex]") {
  Problem p;
  int x = p.add_var(0, 10, 1.0);
  p.add_row({{x, 1.0}}, RowSense::GreaterEqual, 3.0);
  p.add_row({{x, 1.0}}, RowSense::LessEqual, 2.0);
  Solution s = solve(p);
  REQUIRE(s.status == SolveStatus::Infeasible);
  REQUIRE(check_farkas(p, s).empty());
  REQUIRE(s.farkas_value < -1e-8);
}

TEST_CASE("two-variable polygon optimum matches vertex enumeration",
          "[simplex]") {
  // max 2x + 3y  s.t.  x + y <= 4,  x <= 2,  0 <= x,y <= 100.
  Problem p;
  int x = p.add_var(0, 100, 2.0);
  int y = p.add_var(0, 100, 3.0);
  p.add_row({{x, 1.0}, {y, 1.0}}, RowSense::LessEqual, 4.0);
  p.add_row({{x, 1.0}}, RowSense::LessEqual, 2.0);
  Solution s = solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);

  // Oracle: evaluate every candidate vertex of the feasible polygon.
  double best = -1e300;
  const double verts[][2] = {{0, 0}, {2, 0}, {2, 2}, {0, 4}};
  for (const auto& v : verts) best = std::max(best, 2 * v[0] + 3 * v[1]);
  REQUIRE(best == 12.0);
  REQUIRE(s.objective == Catch::Approx(best));
  REQUIRE(s.x[0] == Catch::Approx(0.0));
  REQUIRE(s.x[1] == Catch::Approx(4.0));
  REQUIRE(check_optimal(p, s).empty());
}

TEST_CASE("equality rows and fixed variables", "[simplex]") {
  // max x1 + x2  s.t.  x1 + x2 = 3,  x1 - x2 >= -1, x in [0,2]^2.
  Problem p;
  int x1 = p.add_var(0, 2, 1.0);
  int x2 = p.add_var(0, 2, 1.0);
  p.add_row({{x1, 1.0}, {x2, 1.0}}, RowSense::Equal, 3.0);
  p.add_row({{x1, 1.0}, {x2, -1.0}}, RowSense::GreaterEqual, -1.0);
  Solution s = solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  REQUIRE(s.objective == Catch::Approx(3.0));
  REQUIRE(check_optimal(p, s).empty());

  // Pinned variable forces the rest through the equality.
  Problem q;
  int z1 = q.add_var(1.5, 1.5, 0.0);
  int z2 = q.add_var(0, 10, 1.0);
  q.add_row({{z1, 1.0}, {z2, 1.0}}, RowSense::Equal, 4.0);
  Solution sq = solve(q);
  REQUIRE(sq.status == SolveStatus::Optimal);
  REQUIRE(sq.x[1] == Catch::Approx(2.5));
}

TEST_CASE("infeasible equality system yields a ray", "[simplex]") {
  Problem p;
  int x = p.add_var(0, 1, 0.0);
  int y = p.add_var(0, 1, 0.0);
  p.add_row({{x, 1.0}, {y, 1.0}}, RowSense::Equal, 5.0);
  Solution s = solve(p);
  REQUIRE(s.status == SolveStatus::Infeasible);
  REQUIRE(check_farkas(p, s).empty());
}

namespace {

// Random transportation-style LPs with a known feasible point, so feasibility
// is guaranteed by construction.
Problem random_network_lp(std::mt19937_64& rng, int sources, int sinks) {
  Problem p;
  std::vector<std::vector<int>> var(sources, std::vector<int>(sinks));
  std::vector<double> flow(sources * sinks);
  for (int i = 0; i < sources; ++i)
    for (int j = 0; j < sinks; ++j) {
      double f = static_cast<double>(rng() % 50);
      flow[i * sinks + j] = f;
      double slackup = static_cast<double>(rng() % 30);
      double obj = static_cast<double>(static_cast<int>(rng() % 21) - 10);
      var[i][j] = p.add_var(0.0, f + slackup, obj);
    }
  for (int i = 0; i < sources; ++i) {
    std::vector<std::pair<int, double>> c;
    double total = 0;
    for (int j = 0; j < sinks; ++j) {
      c.push_back({var[i][j], 1.0});
      total += flow[i * sinks + j];
    }
    p.add_row(c, rng() % 2 ? RowSense::LessEqual : RowSense::Equal, total);
  }
  for (int j = 0; j < sinks; ++j) {
    std::vector<std::pair<int, double>> c;
    double total = 0;
    for (int i = 0; i < sources; ++i) {
      c.push_back({var[i][j], 1.0});
      total += flow[i * sinks + j];
    }
    p.add_row(c, RowSense::GreaterEqual, total - static_cast<double>(rng() % 10));
  }
  return p;
}

}  // namespace

TEST_CASE("strong duality holds on random feasible LPs", "[simplex]") {
  std::mt19937_64 rng(2024);
  long total_iterations = 0, total_size = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Problem p = random_network_lp(rng, 2 + static_cast<int>(rng() % 4),
                                  2 + static_cast<int>(rng() % 4));
    Solution s = solve(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    auto issues = check_optimal(p, s);
    CAPTURE(trial, issues);
    REQUIRE(issues.empty());
    total_iterations += s.iterations;
    total_size += p.num_rows() + p.num_vars;
  }
  // Pathology tripwire for the pivot rules on this corpus.
  REQUIRE(total_iterations <= 10 * total_size);
}

TEST_CASE("random infeasible LPs always produce verifying rays", "[simplex]") {
  std::mt19937_64 rng(99);
  int infeasible_seen = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Problem p = random_network_lp(rng, 2, 2);
    // Demand beyond the total capacity of the box.
    double cap = 0;
    for (int j = 0; j < p.num_vars; ++j) cap += p.upper[j];
    p.add_row({{0, 1.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}}, RowSense::GreaterEqual,
              cap + 1 + static_cast<double>(rng() % 10));
    Solution s = solve(p);
    if (s.status == SolveStatus::Infeasible) {
      ++infeasible_seen;
      auto issues = check_farkas(p, s);
      CAPTURE(trial, issues);
      REQUIRE(issues.empty());
    }
  }
  REQUIRE(infeasible_seen == 200);
}

TEST_CASE("solves are deterministic", "[simplex]") {
  std::mt19937_64 rng(5);
  Problem p = random_network_lp(rng, 4, 4);
  Solution a = solve(p), b = solve(p);
  REQUIRE(a.iterations == b.iterations);
  REQUIRE(a.objective == b.objective);
  REQUIRE(a.x == b.x);
  REQUIRE(a.row_duals == b.row_duals);
}

TEST_CASE("degenerate staircase still terminates", "[simplex]") {
  // Many overlapping ties around one vertex.
  Problem p;
  std::vector<int> xs;
  for (int i = 0; i < 8; ++i) xs.push_back(p.add_var(0, 1, 1.0));
  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j)
      p.add_row({{xs[i], 1.0}, {xs[j], 1.0}}, RowSense::LessEqual, 1.0);
  Solution s = solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  // Fractional vertex: every variable at one half.
  REQUIRE(s.objective == Catch::Approx(4.0));
  REQUIRE(check_optimal(p, s).empty());
}

TEST_CASE("infinite variable bounds are rejected up front", "[simplex]") {
  Problem p;
  p.add_var(0, std::numeric_limits<double>::infinity(), 1.0);
  Solution s = solve(p);
  REQUIRE(s.status == SolveStatus::NumericalFailure);
  REQUIRE(s.message.find("infinite bound") != std::string::npos);
}
