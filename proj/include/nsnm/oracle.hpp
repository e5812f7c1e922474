#pragma once

// Ground-truth solver: enumerate every feasible matching-index vector across
// the unsplittable nodes, price each one by solving all scenario LPs, and
// keep the best expected value.  This path deliberately shares only the
// domain types, the mappings, and the LP kernel with the decomposition
// solver, so the two can cross-check each other.

#include <atomic>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "model.hpp"
#include "report.hpp"
#include "simplex.hpp"
#include "transform.hpp"

namespace nsnm::oracle {

/// Every feasible w for one block, lexicographic.
inline void enumerate_block(int in_count, int out_count,
                            std::vector<std::vector<int>>* out) {
  std::vector<int> w(in_count, 0);
  std::vector<char> used(out_count + 1, 0);
  std::function<void(int)> rec = [&](int h) {
    if (h == in_count) {
      out->push_back(w);
      return;
    }
    for (int v = 0; v <= out_count; ++v) {
      if (v > 0 && used[v]) continue;
      w[h] = v;
      if (v > 0) used[v] = 1;
      rec(h + 1);
      if (v > 0) used[v] = 0;
    }
  };
  rec(0);
}

/// Yields each feasible assignment exactly once, lexicographic across blocks.
/// Throws when the product of per-block counts exceeds the cap.
inline std::vector<WAssignment> enumerate_matchings(const NsnmIndexing& idx,
                                                    long long cap = 1000000) {
  std::vector<std::vector<std::vector<int>>> per_block(idx.blocks());
  long long total = 1;
  for (int b = 0; b < idx.blocks(); ++b) {
    enumerate_block(idx.in_count(b), idx.out_count(b), &per_block[b]);
    total *= static_cast<long long>(per_block[b].size());
    if (total > cap)
      throw std::runtime_error(
          "enumerate_matchings: combination count exceeds cap of " +
          std::to_string(cap));
  }
  std::vector<WAssignment> out;
  out.reserve(static_cast<size_t>(total));
  std::vector<size_t> pos(idx.blocks(), 0);
  while (true) {
    WAssignment wa;
    wa.w.resize(idx.blocks());
    for (int b = 0; b < idx.blocks(); ++b) wa.w[b] = per_block[b][pos[b]];
    out.push_back(std::move(wa));
    int b = idx.blocks() - 1;
    while (b >= 0) {
      if (++pos[b] < per_block[b].size()) break;
      pos[b] = 0;
      --b;
    }
    if (b < 0) break;
  }
  return out;
}

// The oracle's own literal LP assembly for a fixed matching: conservation at
// every non-boundary node plus the four matching constraint families written
// directly from the y matrix, all rows present.
inline lp::Problem oracle_subproblem(const Network& applied,
                                     const NsnmIndexing& idx,
                                     const YAssignment& ya) {
  lp::Problem p;
  for (const Arc& arc : applied.arcs) p.add_var(arc.lower, arc.upper, arc.reward);
  for (NodeId q = 0; q < applied.num_nodes(); ++q) {
    if (!applied.conserves_flow(q)) continue;
    std::vector<std::pair<int, double>> c;
    for (ArcId a = 0; a < applied.num_arcs(); ++a) {
      if (applied.arcs[a].head == q) c.push_back({a, 1.0});
      if (applied.arcs[a].tail == q) c.push_back({a, -1.0});
    }
    p.add_row(std::move(c), lp::RowSense::Equal, 0.0);
  }
  for (int b = 0; b < idx.blocks(); ++b) {
    for (int h = 0; h < idx.in_count(b); ++h) {
      ArcId in = idx.in_arcs[b][h];
      double u_in = applied.arcs[in].upper;
      int row_sum = 0;
      for (int k = 0; k < idx.out_count(b); ++k) {
        ArcId out = idx.out_arcs[b][k];
        double u_out = applied.arcs[out].upper;
        int y = ya.y[b][h][k];
        row_sum += y;
        p.add_row({{in, 1.0}, {out, -1.0}}, lp::RowSense::LessEqual,
                  u_in * (1 - y));
        p.add_row({{out, 1.0}, {in, -1.0}}, lp::RowSense::LessEqual,
                  u_out * (1 - y));
      }
      p.add_row({{in, 1.0}}, lp::RowSense::LessEqual, u_in * row_sum);
    }
    for (int k = 0; k < idx.out_count(b); ++k) {
      ArcId out = idx.out_arcs[b][k];
      int col_sum = 0;
      for (int h = 0; h < idx.in_count(b); ++h) col_sum += ya.y[b][h][k];
      p.add_row({{out, 1.0}}, lp::RowSense::LessEqual,
                applied.arcs[out].upper * col_sum);
    }
  }
  return p;
}

struct ExhaustiveConfig {
  long long cap = 1000000;
  int parallelism = 1;
};

/// Full enumeration over (matching, scenario) pairs.  Matchings whose
/// subproblem is infeasible in any scenario are skipped.
inline SolveReport solve_exhaustive(const Instance& inst,
                                    const ExhaustiveConfig& cfg = {}) {
  NsnmIndexing idx = make_indexing(inst.network);
  std::vector<Network> applied;
  for (int k = 0; k < inst.scenarios.size(); ++k)
    applied.push_back(apply_scenario(inst.network, k, inst.scenarios));

  std::vector<WAssignment> all = enumerate_matchings(idx, cfg.cap);

  struct Eval {
    bool feasible = false;
    double value = 0.0;
    std::vector<ScenarioFlows> flows;
  };
  std::vector<Eval> evals(all.size());
  std::atomic<long> lp_count{0};

  auto work = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      YAssignment ya = w_to_y(all[i], idx);
      Eval ev;
      ev.feasible = true;
      for (int k = 0; k < inst.scenarios.size(); ++k) {
        lp::Problem p = oracle_subproblem(applied[k], idx, ya);
        lp::Solution sol = lp::solve(p);
        ++lp_count;
        if (sol.status != lp::SolveStatus::Optimal) {
          ev.feasible = false;
          break;
        }
        ev.value += inst.scenarios.scenarios[k].probability * sol.objective;
        ev.flows.push_back(ScenarioFlows{sol.objective, sol.x});
      }
      evals[i] = std::move(ev);
    }
  };

  const int workers = std::max(1, cfg.parallelism);
  if (workers == 1 || all.size() < 2) {
    work(0, all.size());
  } else {
    std::vector<std::thread> pool;
    size_t chunk = (all.size() + workers - 1) / workers;
    for (int t = 0; t < workers; ++t) {
      size_t b = t * chunk, e = std::min(all.size(), b + chunk);
      if (b >= e) break;
      pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }

  SolveReport rep;
  rep.stats.lp_solves = lp_count.load();
  long long best = -1;
  for (size_t i = 0; i < all.size(); ++i) {
    if (!evals[i].feasible) continue;
    if (best < 0 || evals[i].value > evals[best].value + 1e-12)
      best = static_cast<long long>(i);
  }
  if (best < 0) {
    rep.termination = Termination::Infeasible;
    return rep;
  }
  rep.termination = Termination::Optimal;
  rep.value = evals[best].value;
  rep.w = all[best];
  rep.y = w_to_y(rep.w, idx);
  rep.flows = evals[best].flows;
  rep.stats.iterations = static_cast<long>(all.size());
  return rep;
}

}  // namespace nsnm::oracle
