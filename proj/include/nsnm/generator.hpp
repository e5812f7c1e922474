#pragma once

// Random instance generator.
//
// Base network of n nodes: 10% supply, 30% demand, remaining interior, with
// half of the nodes (drawn from interior and demand nodes) flagged as
// no-split no-merge.  Topology is a four-layer DAG (supply, two interior
// layers, demand) with independent arc probability `density`, then augmented
// with a source feeding the supply nodes, demand-to-sink arcs, and an
// artificial supply wired to every demand node so shortages never make the
// problem infeasible.  Integer data: supplies in [100,600] (as source-arc
// capacities), other capacities in [100,300], demands in [100,200], rewards
// in [5,10] on source arcs, [-10,-5] on artificial arcs, 0 on sink arcs and
// [-2,2] elsewhere.
//
// Draws use mt19937_64 with explicit rejection sampling so identical seeds
// reproduce identical instances on every platform.

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "model.hpp"

namespace nsnm {

/// Uniform integer on [lo, hi], inclusive, via rejection from the raw 64-bit
/// stream (std::uniform_int_distribution is not portable across standard
/// library implementations).
inline long uniform_int(std::mt19937_64& rng, long lo, long hi) {
  const unsigned long span = static_cast<unsigned long>(hi - lo) + 1UL;
  const unsigned long limit = ~0UL - (~0UL % span);
  unsigned long draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return lo + static_cast<long>(draw % span);
}

/// Bernoulli with probability p expressed over a 2^53 grid.
inline bool bernoulli(std::mt19937_64& rng, double p) {
  const unsigned long grid = 1UL << 53;
  return (rng() >> 11) < static_cast<unsigned long>(p * grid);
}

struct GeneratorConfig {
  int nodes = 40;       // base network size |V'|
  int scenarios = 50;
  unsigned long seed = 1;
  double density = 0.4;
};

inline Instance generate(const GeneratorConfig& cfg) {
  if (cfg.nodes < 5)
    throw std::invalid_argument("generate: need at least 5 base nodes");
  if (cfg.scenarios < 1)
    throw std::invalid_argument("generate: need at least one scenario");
  if (cfg.density <= 0.0 || cfg.density > 1.0)
    throw std::invalid_argument("generate: density must be in (0, 1]");

  std::mt19937_64 rng(cfg.seed);
  const int n = cfg.nodes;
  const int n_supply = std::max(1, n / 10);
  const int n_demand = std::max(1, (3 * n) / 10);
  const int n_nsnm = std::max(1, n / 2);
  const int n_interior = n - n_supply - n_demand;
  if (n_interior < 1)
    throw std::invalid_argument("generate: no interior nodes left");

  // Base ids: supply, interior layer 1, interior layer 2, demand; then the
  // three boundary nodes.
  Instance inst;
  Network& net = inst.network;
  net.roles.assign(n + 3, NodeRole::Interior);
  const int i1 = n_supply, i1n = (n_interior + 1) / 2;
  const int i2 = i1 + i1n, i2n = n_interior - i1n;
  const int dem = i2 + i2n;
  for (int v = 0; v < n_supply; ++v) net.roles[v] = NodeRole::Supply;
  for (int v = dem; v < dem + n_demand; ++v) net.roles[v] = NodeRole::Demand;
  const NodeId s = n, s0 = n + 1, t = n + 2;
  net.roles[s] = NodeRole::Source;
  net.roles[s0] = NodeRole::Artificial;
  net.roles[t] = NodeRole::Sink;

  auto add_arc = [&](NodeId tail, NodeId head, double lo, double hi,
                     double reward) {
    net.arcs.push_back(Arc{tail, head, lo, hi, reward});
  };
  auto capacity = [&] { return double(uniform_int(rng, 100, 300)); };
  auto inner_reward = [&] { return double(uniform_int(rng, -2, 2)); };

  // Layered random arcs.
  auto layer_pair = [&](int a_begin, int a_end, int b_begin, int b_end) {
    for (int a = a_begin; a < a_end; ++a)
      for (int b = b_begin; b < b_end; ++b)
        if (bernoulli(rng, cfg.density))
          add_arc(a, b, 0.0, capacity(), inner_reward());
  };
  layer_pair(0, n_supply, i1, i1 + i1n);
  if (i2n > 0) {
    layer_pair(i1, i1 + i1n, i2, i2 + i2n);
    layer_pair(i2, i2 + i2n, dem, dem + n_demand);
  } else {
    layer_pair(i1, i1 + i1n, dem, dem + n_demand);
  }

  // Every base node needs flow-through: patch missing in/out arcs so the
  // conservation rows and the printed dual's arc partition stay aligned.
  auto has_in = [&](NodeId v) {
    for (const Arc& a : net.arcs)
      if (a.head == v) return true;
    return false;
  };
  auto has_out = [&](NodeId v) {
    for (const Arc& a : net.arcs)
      if (a.tail == v) return true;
    return false;
  };
  for (int v = i1; v < i1 + i1n; ++v) {
    if (!has_in(v))
      add_arc(NodeId(uniform_int(rng, 0, n_supply - 1)), v, 0.0, capacity(),
              inner_reward());
    if (!has_out(v)) {
      int lo = i2n > 0 ? i2 : dem;
      int hi = i2n > 0 ? i2 + i2n - 1 : dem + n_demand - 1;
      add_arc(v, NodeId(uniform_int(rng, lo, hi)), 0.0, capacity(),
              inner_reward());
    }
  }
  for (int v = i2; v < i2 + i2n; ++v) {
    if (!has_in(v))
      add_arc(NodeId(uniform_int(rng, i1, i1 + i1n - 1)), v, 0.0, capacity(),
              inner_reward());
    if (!has_out(v))
      add_arc(v, NodeId(uniform_int(rng, dem, dem + n_demand - 1)), 0.0,
              capacity(), inner_reward());
  }
  for (int v = dem; v < dem + n_demand; ++v)
    if (!has_in(v))
      add_arc(NodeId(uniform_int(rng, i2n > 0 ? i2 : i1,
                                 (i2n > 0 ? i2 + i2n : i1 + i1n) - 1)),
              v, 0.0, capacity(), inner_reward());

  // Augmentation: source, sink, artificial supply.
  for (int v = 0; v < n_supply; ++v)
    add_arc(s, v, 0.0, double(uniform_int(rng, 100, 600)),
            double(uniform_int(rng, 5, 10)));
  for (int v = dem; v < dem + n_demand; ++v)
    add_arc(v, t, 0.0, 0.0, 0.0);  // bounds pinned per scenario
  for (int v = dem; v < dem + n_demand; ++v)
    add_arc(s0, v, 0.0, kInf, double(uniform_int(rng, -10, -5)));

  // NSNM draw over interior + demand nodes.
  std::vector<NodeId> eligible;
  for (int v = i1; v < dem + n_demand; ++v) eligible.push_back(v);
  if (static_cast<int>(eligible.size()) < n_nsnm)
    throw std::invalid_argument("generate: not enough nsnm-eligible nodes");
  for (int pick = 0; pick < n_nsnm; ++pick) {
    long j = uniform_int(rng, pick, static_cast<long>(eligible.size()) - 1);
    std::swap(eligible[pick], eligible[j]);
  }
  net.nsnm.assign(eligible.begin(), eligible.begin() + n_nsnm);
  std::sort(net.nsnm.begin(), net.nsnm.end());

  // Demand scenarios, equal probabilities.
  for (int k = 0; k < cfg.scenarios; ++k) {
    Scenario sc;
    sc.probability = 1.0 / cfg.scenarios;
    for (int v = dem; v < dem + n_demand; ++v)
      sc.demand[v] = double(uniform_int(rng, 100, 200));
    inst.scenarios.scenarios.push_back(std::move(sc));
  }

  inst.gamma = compute_gamma(inst);
  return inst;
}

}  // namespace nsnm
