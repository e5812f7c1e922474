#include <random>

#include <catch_amalgamated.hpp>

#include "nsnm/transform.hpp"
#include "test_support.hpp"

using namespace nsnm;

namespace {
NsnmIndexing indexing_for(int m, int n) {
  Instance inst = testutil::single_node_instance(m, n);
  return make_indexing(inst.network);
}
}  // namespace

TEST_CASE("w_to_y on forced examples", "[transform]") {
  NsnmIndexing idx = indexing_for(2, 2);

  WAssignment wa{{{2, 0}}};
  YAssignment ya = w_to_y(wa, idx);
  REQUIRE(ya.y[0] == std::vector<std::vector<int>>{{0, 1}, {0, 0}});

  WAssignment zeros{{{0, 0}}};
  YAssignment yz = w_to_y(zeros, idx);
  REQUIRE(yz.y[0] == std::vector<std::vector<int>>{{0, 0}, {0, 0}});

  NsnmIndexing idx3 = indexing_for(3, 3);
  WAssignment w3{{{3, 1, 0}}};
  YAssignment y3 = w_to_y(w3, idx3);
  REQUIRE(y3.y[0][0][2] == 1);
  REQUIRE(y3.y[0][1][0] == 1);
  int ones = 0;
  for (const auto& row : y3.y[0])
    for (int v : row) ones += v;
  REQUIRE(ones == 2);
}

TEST_CASE("y_to_w on forced examples", "[transform]") {
  NsnmIndexing idx = indexing_for(2, 2);

  YAssignment zeros{{{{0, 0}, {0, 0}}}};
  REQUIRE(y_to_w(zeros, idx).w[0] == std::vector<int>{0, 0});

  YAssignment ident{{{{1, 0}, {0, 1}}}};
  REQUIRE(y_to_w(ident, idx).w[0] == std::vector<int>{1, 2});
}

TEST_CASE("malformed assignments are rejected", "[transform]") {
  NsnmIndexing idx = indexing_for(2, 2);
  WAssignment dup{{{1, 1}}};
  REQUIRE_THROWS_AS(w_to_y(dup, idx), std::invalid_argument);
  REQUIRE_NOTHROW(w_to_y_unchecked(dup, idx));  // relaxed-path escape hatch

  YAssignment col{{{{1, 0}, {1, 0}}}};  // column sum 2
  REQUIRE_THROWS_AS(y_to_w(col, idx), std::invalid_argument);
}

TEST_CASE("round-trip bijection over exhaustive feasible sets", "[transform]") {
  for (int m = 1; m <= 4; ++m) {
    for (int n = 1; n <= 4; ++n) {
      NsnmIndexing idx = indexing_for(m, n);
      auto ws = testutil::enumerate_feasible_w(m, n);
      auto ys = testutil::enumerate_feasible_y(m, n);
      REQUIRE(static_cast<long long>(ws.size()) ==
              testutil::partial_matching_count(m, n));
      REQUIRE(ws.size() == ys.size());

      for (const auto& w : ws) {
        WAssignment wa{{w}};
        WAssignment back = y_to_w(w_to_y(wa, idx), idx);
        REQUIRE(back.w[0] == w);
      }
      for (const auto& y : ys) {
        YAssignment ya{{y}};
        YAssignment back = w_to_y(y_to_w(ya, idx), idx);
        REQUIRE(back.y[0] == y);
      }
    }
  }
}

TEST_CASE("3x3 node has 34 feasible assignments that all round-trip",
          "[transform]") {
  auto ws = testutil::enumerate_feasible_w(3, 3);
  REQUIRE(ws.size() == 34);  // 1 + 9 + 18 + 6
}

TEST_CASE("layer tables reproduce the y-space cut", "[transform]") {
  NsnmIndexing idx = indexing_for(2, 2);
  Cut cut = zero_cut(idx, Cut::Kind::Optimality);
  cut.coef[0][0][0] = 3;  // 3 y11
  cut.coef[0][0][1] = 2;  // 2 y12
  cut.constant = 10;

  dd::LayerCut lc = cut_to_layer_contributions(cut, idx);
  REQUIRE(lc.tables.size() == 2);
  REQUIRE(lc.tables[0] == std::vector<double>{0, 3, 2});
  REQUIRE(lc.tables[1] == std::vector<double>{0, 0, 0});
  REQUIRE(lc.constant == 10);

  Cut zero = zero_cut(idx, Cut::Kind::Feasibility);
  dd::LayerCut lz = cut_to_layer_contributions(zero, idx);
  for (const auto& t : lz.tables)
    for (double v : t) REQUIRE(v == 0.0);
}

TEST_CASE("table sums equal direct y-space evaluation exactly", "[transform]") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    int m = 1 + static_cast<int>(rng() % 4);
    int n = 1 + static_cast<int>(rng() % 4);
    NsnmIndexing idx = indexing_for(m, n);
    Cut cut = zero_cut(idx, Cut::Kind::Optimality);
    for (int h = 0; h < m; ++h)
      for (int k = 0; k < n; ++k)
        cut.coef[0][h][k] = static_cast<double>(static_cast<int>(rng() % 2001) - 1000) / 8.0;
    cut.constant = static_cast<double>(static_cast<int>(rng() % 1000)) / 4.0;
    dd::LayerCut lc = cut_to_layer_contributions(cut, idx);

    auto ws = testutil::enumerate_feasible_w(m, n);
    const auto& w = ws[rng() % ws.size()];
    double table_sum = lc.constant;
    for (int h = 0; h < m; ++h) table_sum += lc.tables[h][w[h]];
    WAssignment wa{{w}};
    double direct = cut.evaluate(w_to_y(wa, idx));
    REQUIRE(table_sum == direct);  // exact, no tolerance
  }
}
