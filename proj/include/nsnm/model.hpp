#pragma once

// Core domain types for the stochastic unsplittable-flow instance:
// the augmented network (source, sink, artificial supply), the set of
// no-split no-merge nodes, demand scenarios, and the z-bound gamma.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace nsnm {

using NodeId = int;
using ArcId = int;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class NodeRole { Source, Sink, Artificial, Supply, Demand, Interior };

inline const char* to_string(NodeRole r) {
  switch (r) {
    case NodeRole::Source: return "source";
    case NodeRole::Sink: return "sink";
    case NodeRole::Artificial: return "artificial";
    case NodeRole::Supply: return "supply";
    case NodeRole::Demand: return "demand";
    case NodeRole::Interior: return "interior";
  }
  return "?";
}

struct Arc {
  NodeId tail = -1;
  NodeId head = -1;
  double lower = 0.0;
  double upper = 0.0;  // kInf marks an uncapped artificial-supply arc
  double reward = 0.0;
};

struct Network {
  std::vector<NodeRole> roles;  // indexed by NodeId, contiguous from 0
  std::vector<Arc> arcs;        // indexed by ArcId, contiguous from 0
  std::vector<NodeId> nsnm;     // sorted ascending

  int num_nodes() const { return static_cast<int>(roles.size()); }
  int num_arcs() const { return static_cast<int>(arcs.size()); }

  NodeId find_role(NodeRole r) const {
    for (NodeId v = 0; v < num_nodes(); ++v)
      if (roles[v] == r) return v;
    return -1;
  }
  NodeId source() const { return find_role(NodeRole::Source); }
  NodeId sink() const { return find_role(NodeRole::Sink); }
  NodeId artificial() const { return find_role(NodeRole::Artificial); }

  bool is_nsnm(NodeId v) const {
    return std::binary_search(nsnm.begin(), nsnm.end(), v);
  }

  // Conservation holds at every node except the three boundary nodes.
  bool conserves_flow(NodeId v) const {
    NodeRole r = roles[v];
    return r != NodeRole::Source && r != NodeRole::Sink &&
           r != NodeRole::Artificial;
  }

  std::vector<ArcId> in_arcs(NodeId v) const {
    std::vector<ArcId> out;
    for (ArcId a = 0; a < num_arcs(); ++a)
      if (arcs[a].head == v) out.push_back(a);
    return out;
  }
  std::vector<ArcId> out_arcs(NodeId v) const {
    std::vector<ArcId> out;
    for (ArcId a = 0; a < num_arcs(); ++a)
      if (arcs[a].tail == v) out.push_back(a);
    return out;
  }
};

struct Scenario {
  std::map<NodeId, double> demand;  // keyed by demand node
  double probability = 0.0;
};

struct ScenarioSet {
  std::vector<Scenario> scenarios;
  int size() const { return static_cast<int>(scenarios.size()); }
};

struct Instance {
  Network network;
  ScenarioSet scenarios;
  double gamma = 0.0;
};

// ---------------------------------------------------------------------------
// validate

namespace detail {
inline std::string arc_str(const Network& net, ArcId a) {
  return "arc " + std::to_string(a) + " (" + std::to_string(net.arcs[a].tail) +
         "->" + std::to_string(net.arcs[a].head) + ")";
}
}  // namespace detail

double compute_gamma(const Instance& inst);
Network apply_scenario(const Network& net, int scenario_index,
                       const ScenarioSet& scenarios);

/// Checks every structural invariant and returns one message per violation.
/// An empty result means the instance is well formed.
inline std::vector<std::string> validate(const Instance& inst) {
  std::vector<std::string> out;
  const Network& net = inst.network;
  const int n = net.num_nodes();

  int n_source = 0, n_sink = 0, n_artificial = 0;
  for (NodeId v = 0; v < n; ++v) {
    if (net.roles[v] == NodeRole::Source) ++n_source;
    if (net.roles[v] == NodeRole::Sink) ++n_sink;
    if (net.roles[v] == NodeRole::Artificial) ++n_artificial;
  }
  if (n_source != 1)
    out.push_back("network: expected exactly one source node, found " +
                  std::to_string(n_source));
  if (n_sink != 1)
    out.push_back("network: expected exactly one sink node, found " +
                  std::to_string(n_sink));
  if (n_artificial != 1)
    out.push_back("network: expected exactly one artificial node, found " +
                  std::to_string(n_artificial));
  if (n_source != 1 || n_sink != 1 || n_artificial != 1) return out;

  const NodeId s = net.source(), t = net.sink(), s0 = net.artificial();

  for (ArcId a = 0; a < net.num_arcs(); ++a) {
    const Arc& arc = net.arcs[a];
    if (arc.tail < 0 || arc.tail >= n || arc.head < 0 || arc.head >= n) {
      out.push_back(detail::arc_str(net, a) + ": endpoint out of range");
      continue;
    }
    if (arc.tail == s && net.roles[arc.head] != NodeRole::Supply)
      out.push_back(detail::arc_str(net, a) +
                    ": source arcs may only enter supply nodes");
    if (arc.tail == s0 && net.roles[arc.head] != NodeRole::Demand)
      out.push_back(detail::arc_str(net, a) +
                    ": artificial arcs may only enter demand nodes");
    if (arc.head == s)
      out.push_back(detail::arc_str(net, a) + ": no arc may enter the source");
    if (arc.tail == t)
      out.push_back(detail::arc_str(net, a) + ": no arc may leave the sink");
    if (arc.lower < 0)
      out.push_back(detail::arc_str(net, a) + ": negative lower bound");
  }

  for (NodeId v : net.nsnm) {
    if (v < 0 || v >= n) {
      out.push_back("nsnm node " + std::to_string(v) + " out of range");
      continue;
    }
    if (v == s || v == t || v == s0)
      out.push_back("nsnm set may not contain boundary node " +
                    std::to_string(v));
    if (net.in_arcs(v).empty() || net.out_arcs(v).empty())
      out.push_back("nsnm node " + std::to_string(v) +
                    " needs at least one incoming and one outgoing arc");
  }

  for (NodeId v = 0; v < n; ++v) {
    if (net.roles[v] != NodeRole::Demand) continue;
    bool has_sink_arc = false;
    for (const Arc& arc : net.arcs)
      if (arc.tail == v && arc.head == t) has_sink_arc = true;
    if (!has_sink_arc)
      out.push_back("demand node " + std::to_string(v) +
                    " has no arc to the sink");
  }

  // Scenario data.
  double prob_sum = 0.0;
  for (int k = 0; k < inst.scenarios.size(); ++k) {
    const Scenario& sc = inst.scenarios.scenarios[k];
    prob_sum += sc.probability;
    if (sc.probability < 0.0 || sc.probability > 1.0)
      out.push_back("scenario " + std::to_string(k) +
                    ": probability outside [0,1]");
    for (NodeId v = 0; v < n; ++v) {
      if (net.roles[v] != NodeRole::Demand) continue;
      auto it = sc.demand.find(v);
      if (it == sc.demand.end())
        out.push_back("scenario " + std::to_string(k) + ": demand node " +
                      std::to_string(v) + " has no demand value");
      else if (it->second < 0)
        out.push_back("scenario " + std::to_string(k) + ": demand node " +
                      std::to_string(v) + " has negative demand");
    }
  }
  if (inst.scenarios.size() == 0) {
    out.push_back("scenario set is empty");
  } else if (std::abs(prob_sum - 1.0) > 1e-9) {
    out.push_back("scenario probabilities sum to " + std::to_string(prob_sum) +
                  ", expected 1");
  }

  // Bound consistency is only meaningful after demand overrides.
  if (out.empty()) {
    for (int k = 0; k < inst.scenarios.size(); ++k) {
      Network applied = apply_scenario(net, k, inst.scenarios);
      for (ArcId a = 0; a < applied.num_arcs(); ++a) {
        const Arc& arc = applied.arcs[a];
        if (arc.lower > arc.upper + 1e-12)
          out.push_back("scenario " + std::to_string(k) + ": " +
                        detail::arc_str(net, a) + " has lower > upper");
        if (!std::isfinite(arc.upper))
          out.push_back("scenario " + std::to_string(k) + ": " +
                        detail::arc_str(net, a) +
                        " still unbounded after demand override");
      }
    }
  }

  if (inst.gamma <= 0.0)
    out.push_back("gamma must be positive, got " + std::to_string(inst.gamma));
  else if (out.empty() && inst.gamma < compute_gamma(inst) - 1e-9)
    out.push_back("gamma " + std::to_string(inst.gamma) +
                  " is below the certified bound " +
                  std::to_string(compute_gamma(inst)));

  return out;
}

// ---------------------------------------------------------------------------
// apply_scenario

/// Returns a copy of the network with scenario demands folded into arc
/// bounds: each demand-to-sink arc is pinned to the scenario demand, and
/// uncapped artificial-supply arcs are capped at the total demand.
inline Network apply_scenario(const Network& net, int scenario_index,
                              const ScenarioSet& scenarios) {
  if (scenario_index < 0 || scenario_index >= scenarios.size())
    throw std::out_of_range("apply_scenario: scenario index " +
                            std::to_string(scenario_index) + " out of range");
  const Scenario& sc = scenarios.scenarios[scenario_index];
  const NodeId t = net.sink(), s0 = net.artificial();

  double total_demand = 0.0;
  for (const auto& [node, d] : sc.demand) total_demand += d;

  Network out = net;
  for (Arc& arc : out.arcs) {
    if (arc.head == t && net.roles[arc.tail] == NodeRole::Demand) {
      auto it = sc.demand.find(arc.tail);
      if (it != sc.demand.end()) {
        arc.lower = it->second;
        arc.upper = it->second;
      }
    } else if (arc.tail == s0) {
      arc.upper = total_demand;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// compute_gamma

/// A priori bound on the second-stage value: the larger of the positive-
/// and negative-reward capacity sums, maximised over scenarios, floored at
/// one so the z interval always has interior.
inline double compute_gamma(const Instance& inst) {
  double best = 0.0;
  for (int k = 0; k < inst.scenarios.size(); ++k) {
    Network applied = apply_scenario(inst.network, k, inst.scenarios);
    double pos = 0.0, neg = 0.0;
    for (const Arc& arc : applied.arcs) {
      if (!std::isfinite(arc.upper)) continue;
      pos += std::max(0.0, arc.reward) * arc.upper;
      neg += std::max(0.0, -arc.reward) * arc.upper;
    }
    best = std::max(best, std::max(pos, neg));
  }
  return best > 0.0 ? best : 1.0;
}

}  // namespace nsnm
