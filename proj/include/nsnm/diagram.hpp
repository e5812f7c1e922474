#pragma once

// Layered decision diagrams over the matching-index variable space.
//
// A diagram has W arc layers carrying integer labels (one layer per incoming
// arc of each no-split no-merge node, grouped in blocks per node) followed by
// a single arc layer for the continuous objective variable z whose two arcs
// carry labels +gamma and -gamma.  Node states are the sets of still-unused
// outgoing-arc indices of the block under construction, with 0 (leave the
// incoming arc unmatched) always available.
//
// The module is deliberately network-agnostic: construction consumes only the
// per-block in/out counts, and refinement consumes per-layer contribution
// tables, so tests can drive it with hand-built fixtures.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsnm::dd {

enum class Kind { Exact, Relaxed, Restricted };
enum class CutSense { Optimality, Feasibility };

// A cut reduced to per-layer separable contributions:
//   optimality:  z <= sum_j tables[j][w_j] + constant
//   feasibility: sum_j tables[j][w_j] + constant >= 0
struct LayerCut {
  std::vector<std::vector<double>> tables;
  double constant = 0.0;
  CutSense sense = CutSense::Optimality;
};

struct Node {
  uint64_t state = 0;  // bit k set <=> out-index k still available; bit 0 always set
  bool exact = true;   // false once a widening merge touches the node or an ancestor
};

struct Arc {
  int tail = -1;
  int head = -1;
  double label = 0.0;
  double weight = 0.0;
  bool z_floor = false;  // marks the -gamma arc, which refinement never edits
};

struct Shape {
  std::vector<int> in_counts;   // per block
  std::vector<int> out_counts;  // per block

  int blocks() const { return static_cast<int>(in_counts.size()); }
  int total_w_layers() const {
    int w = 0;
    for (int m : in_counts) w += m;
    return w;
  }
};

// Lexicographic order of states viewed as ascending element lists.
inline bool state_lex_less(uint64_t a, uint64_t b) {
  if (a == b) return false;
  uint64_t diff = a ^ b;
  uint64_t low = diff & ~(diff - 1);
  if (b & low) return (a & ~(low - 1)) == 0;
  return (b & ~(low - 1)) != 0;
}

inline int state_size(uint64_t s) { return __builtin_popcountll(s); }

struct LongestPath {
  double value = 0.0;
  std::vector<int> labels;  // w part only
  double z = 0.0;
};

class Diagram {
 public:
  Kind kind = Kind::Exact;
  int width_limit = 0;  // <= 0: unlimited
  double gamma = 0.0;

  // node_layers has n_w_layers + 2 entries when nonempty; arc layer j joins
  // node layer j to j + 1, and the final arc layer is the z layer.
  std::vector<std::vector<Node>> node_layers;
  std::vector<std::vector<Arc>> arc_layers;
  std::vector<int> layer_block;      // per w layer
  std::vector<int> layer_out_count;  // per w layer

  // Deepest node layer d such that layers 0..d contain only exact nodes.
  int last_exact_layer = 0;
  // For restricted kinds: false once construction dropped a node.
  bool exact_representation = true;

  int n_w_layers() const { return static_cast<int>(layer_block.size()); }
  bool empty() const { return node_layers.empty(); }
  void clear() {
    node_layers.clear();
    arc_layers.clear();
  }

  int width() const {
    int w = 0;
    for (const auto& layer : node_layers)
      w = std::max(w, static_cast<int>(layer.size()));
    return w;
  }

  // -------------------------------------------------------------------------
  // helpers for hand-built fixtures

  int add_node(int layer, uint64_t state = 1, bool exact = true) {
    if (layer >= static_cast<int>(node_layers.size()))
      node_layers.resize(layer + 1);
    node_layers[layer].push_back(Node{state, exact});
    return static_cast<int>(node_layers[layer].size()) - 1;
  }

  void add_arc(int layer, int tail, int head, double label, double weight,
               bool z_floor = false) {
    if (layer >= static_cast<int>(arc_layers.size()))
      arc_layers.resize(layer + 1);
    arc_layers[layer].push_back(Arc{tail, head, label, weight, z_floor});
  }

  // -------------------------------------------------------------------------

  std::optional<LongestPath> longest_path() const {
    if (empty()) return std::nullopt;
    const int L = static_cast<int>(arc_layers.size());
    std::vector<std::vector<double>> best(node_layers.size());
    std::vector<std::vector<int>> from(node_layers.size());
    for (size_t j = 0; j < node_layers.size(); ++j) {
      best[j].assign(node_layers[j].size(), -kInfValue());
      from[j].assign(node_layers[j].size(), -1);
    }
    if (best[0].empty()) return std::nullopt;
    best[0][0] = 0.0;
    for (int j = 0; j < L; ++j) {
      const auto& arcs = arc_layers[j];
      for (int a = 0; a < static_cast<int>(arcs.size()); ++a) {
        const Arc& arc = arcs[a];
        if (best[j][arc.tail] == -kInfValue()) continue;
        double cand = best[j][arc.tail] + arc.weight;
        if (cand > best[j + 1][arc.head]) {
          best[j + 1][arc.head] = cand;
          from[j + 1][arc.head] = a;
        }
      }
    }
    if (best[L].empty() || best[L][0] == -kInfValue()) return std::nullopt;

    LongestPath out;
    out.value = best[L][0];
    std::vector<double> labels(L);
    int node = 0;
    for (int j = L - 1; j >= 0; --j) {
      int a = from[j + 1][node];
      labels[j] = arc_layers[j][a].label;
      node = arc_layers[j][a].tail;
    }
    out.z = labels[L - 1];
    out.labels.resize(L - 1);
    for (int j = 0; j + 1 < L; ++j)
      out.labels[j] = static_cast<int>(std::llround(labels[j]));
    return out;
  }

  // All label sequences from the root into the given node layer.  With a cap
  // the walk aborts once the output would exceed it and reports failure.
  bool prefixes_to_layer(int node_layer, std::vector<std::vector<int>>* out,
                         long cap = 0) const {
    out->clear();
    if (empty() || node_layer <= 0 ||
        node_layer >= static_cast<int>(node_layers.size()))
      return true;
    bool ok = true;
    std::vector<int> stack;
    std::function<void(int, int)> walk = [&](int layer, int node) {
      if (!ok) return;
      if (layer == node_layer) {
        if (cap > 0 && static_cast<long>(out->size()) >= cap) {
          ok = false;
          return;
        }
        out->push_back(stack);
        return;
      }
      for (const Arc& arc : arc_layers[layer]) {
        if (arc.tail != node) continue;
        stack.push_back(static_cast<int>(std::llround(arc.label)));
        walk(layer + 1, arc.head);
        stack.pop_back();
        if (!ok) return;
      }
    };
    walk(0, 0);
    if (!ok) out->clear();
    return ok;
  }

  std::vector<std::vector<int>> prefixes_to_layer(int node_layer) const {
    std::vector<std::vector<int>> out;
    prefixes_to_layer(node_layer, &out);
    return out;
  }

  // Enumerates encoded w vectors (ignoring the z layer).  Intended for tests
  // and small diagrams; walks every path.
  std::vector<std::vector<int>> enumerate_w_paths() const {
    return prefixes_to_layer(n_w_layers());
  }

  long long count_w_paths() const {
    if (empty()) return 0;
    std::vector<std::vector<long long>> cnt(node_layers.size());
    cnt[0].assign(1, 1);
    for (int j = 0; j < n_w_layers(); ++j) {
      cnt[j + 1].assign(node_layers[j + 1].size(), 0);
      for (const Arc& arc : arc_layers[j])
        cnt[j + 1][arc.head] += cnt[j][arc.tail];
    }
    long long total = 0;
    for (long long c : cnt[n_w_layers()]) total += c;
    return total;
  }

  // -------------------------------------------------------------------------
  // refinement

  // Splits nodes on distinct accumulated cut values, prunes arcs that cannot
  // satisfy a feasibility cut, and lowers the +gamma z labels for optimality
  // cuts.  Exact diagrams keep exactly the paths satisfying the cut.
  //
  // Width-limited diagrams keep their budget through refinement as well:
  // when the split classes of one layer would exceed the limit, a restricted
  // diagram keeps the best-ranked classes (still a subset of its paths, but
  // no longer everything, which drops the exact_representation flag), while
  // a relaxed diagram falls back to one node per original node carrying the
  // largest accumulated value, which over-estimates every member and so
  // remains a relaxation.
  void refine(const LayerCut& cut) {
    if (empty()) return;
    const int W = n_w_layers();
    if (static_cast<int>(cut.tables.size()) != W)
      throw std::invalid_argument("refine: cut has " +
                                  std::to_string(cut.tables.size()) +
                                  " layer tables, diagram has " +
                                  std::to_string(W) + " w layers");
    for (int j = 0; j < W; ++j)
      if (static_cast<int>(cut.tables[j].size()) != layer_out_count[j] + 1)
        throw std::invalid_argument("refine: table size mismatch at layer " +
                                    std::to_string(j));

    const bool feas = cut.sense == CutSense::Feasibility;
    const int budget = width_limit > 0 ? width_limit : 0;

    // Best achievable completion of the cut sum, per original node.
    std::vector<std::vector<double>> max_comp(node_layers.size());
    max_comp[node_layers.size() - 1].assign(1, 0.0);
    max_comp[W].assign(node_layers[W].size(), 0.0);  // z layer adds nothing
    for (int j = W - 1; j >= 0; --j) {
      max_comp[j].assign(node_layers[j].size(), -kInfValue());
      for (const Arc& arc : arc_layers[j]) {
        double g = cut.tables[j][static_cast<int>(std::llround(arc.label))];
        double cand = g + max_comp[j + 1][arc.head];
        max_comp[j][arc.tail] = std::max(max_comp[j][arc.tail], cand);
      }
    }

    // Top-down rebuild; nodes keyed by (original index, accumulated value).
    auto acc_key = [](double v) { return std::llround(v * 1e9); };
    struct NewNode {
      int orig;
      double acc;
      Node data;
    };
    std::vector<std::vector<NewNode>> nodes(node_layers.size());
    std::vector<std::vector<Arc>> arcs(arc_layers.size());

    nodes[0].push_back(NewNode{0, 0.0, node_layers[0][0]});
    for (int j = 0; j < W; ++j) {
      // Original arcs grouped by tail for a deterministic sweep.
      std::vector<std::vector<int>> by_tail(node_layers[j].size());
      for (int a = 0; a < static_cast<int>(arc_layers[j].size()); ++a)
        by_tail[arc_layers[j][a].tail].push_back(a);

      // First pass: collect the (head, acc) classes this layer would need.
      std::map<std::pair<int, long long>, double> classes;
      for (const NewNode& nu : nodes[j])
        for (int a : by_tail[nu.orig]) {
          const Arc& arc = arc_layers[j][a];
          int label = static_cast<int>(std::llround(arc.label));
          double nacc = nu.acc + cut.tables[j][label];
          if (feas &&
              nacc + max_comp[j + 1][arc.head] + cut.constant < -1e-9)
            continue;
          classes.emplace(std::make_pair(arc.head, acc_key(nacc)), nacc);
        }

      const bool over = budget > 0 && static_cast<int>(classes.size()) > budget;
      std::map<std::pair<int, long long>, int> index;
      std::map<int, int> coarse;        // relaxed fallback: orig -> new index
      std::map<int, double> coarse_acc;  // max accumulated value per orig
      if (over && kind == Kind::Relaxed) {
        for (const auto& [key, acc] : classes) {
          auto it = coarse_acc.find(key.first);
          if (it == coarse_acc.end() || acc > it->second)
            coarse_acc[key.first] = acc;
        }
        for (const auto& [orig, acc] : coarse_acc) {
          coarse[orig] = static_cast<int>(nodes[j + 1].size());
          Node data = node_layers[j + 1][orig];
          data.exact = false;  // carries paths with smaller accumulators too
          nodes[j + 1].push_back(NewNode{orig, acc, data});
        }
        exact_representation = false;
      } else if (over) {
        // Restricted (and exact diagrams never carry a budget): rank classes
        // and keep the most promising ones.
        std::vector<std::pair<std::pair<int, long long>, double>> ranked(
            classes.begin(), classes.end());
        std::stable_sort(ranked.begin(), ranked.end(),
                         [&](const auto& a, const auto& b) {
                           double pa = a.second + max_comp[j + 1][a.first.first];
                           double pb = b.second + max_comp[j + 1][b.first.first];
                           if (pa != pb) return pa > pb;
                           return a.first < b.first;
                         });
        for (int r = 0; r < budget; ++r) {
          const auto& [key, acc] = ranked[r];
          index[key] = static_cast<int>(nodes[j + 1].size());
          nodes[j + 1].push_back(NewNode{key.first, acc,
                                         node_layers[j + 1][key.first]});
        }
        exact_representation = false;
      } else {
        for (const auto& [key, acc] : classes) {
          index[key] = static_cast<int>(nodes[j + 1].size());
          nodes[j + 1].push_back(NewNode{key.first, acc,
                                         node_layers[j + 1][key.first]});
        }
      }

      // Second pass: materialise arcs into the surviving classes.
      for (int u = 0; u < static_cast<int>(nodes[j].size()); ++u) {
        const NewNode& nu = nodes[j][u];
        for (int a : by_tail[nu.orig]) {
          const Arc& arc = arc_layers[j][a];
          int label = static_cast<int>(std::llround(arc.label));
          double nacc = nu.acc + cut.tables[j][label];
          if (feas &&
              nacc + max_comp[j + 1][arc.head] + cut.constant < -1e-9)
            continue;
          int head = -1;
          if (over && kind == Kind::Relaxed) {
            head = coarse[arc.head];
          } else {
            auto it = index.find(std::make_pair(arc.head, acc_key(nacc)));
            if (it == index.end()) continue;  // trimmed class
            head = it->second;
          }
          arcs[j].push_back(Arc{u, head, arc.label, arc.weight, false});
        }
      }
      if (nodes[j + 1].empty()) {
        clear();
        return;
      }
    }

    // z layer.
    std::vector<std::vector<int>> by_tail(node_layers[W].size());
    for (int a = 0; a < static_cast<int>(arc_layers[W].size()); ++a)
      by_tail[arc_layers[W][a].tail].push_back(a);
    for (int u = 0; u < static_cast<int>(nodes[W].size()); ++u) {
      const NewNode& nu = nodes[W][u];
      if (feas) {
        if (nu.acc + cut.constant < -1e-9) continue;
        for (int a : by_tail[nu.orig]) {
          Arc arc = arc_layers[W][a];
          arc.tail = u;
          arc.head = 0;
          arcs[W].push_back(arc);
        }
      } else {
        double bound = nu.acc + cut.constant;
        if (bound < -gamma - 1e-9) continue;  // z range empty for these paths
        for (int a : by_tail[nu.orig]) {
          Arc arc = arc_layers[W][a];
          arc.tail = u;
          arc.head = 0;
          if (!arc.z_floor && bound < arc.label) {
            arc.label = bound;
            arc.weight = bound;
          }
          arcs[W].push_back(arc);
        }
      }
    }

    nodes[W + 1].push_back(NewNode{0, 0.0, node_layers[W + 1][0]});

    // Commit and drop nodes that lost all their paths.
    node_layers.assign(nodes.size(), {});
    for (size_t j = 0; j < nodes.size(); ++j)
      for (const NewNode& nn : nodes[j]) node_layers[j].push_back(nn.data);
    arc_layers = std::move(arcs);
    prune_dead();
    reduce();
  }

  // Bottom-up structural compression: nodes of one layer with equal states
  // and identical outgoing (label, head, weight) signatures are
  // interchangeable, so they merge and duplicate arcs collapse.  Keeps the
  // growth from repeated cut-splitting in check without changing the path
  // set.
  void reduce() {
    if (empty()) return;
    const int L = static_cast<int>(arc_layers.size());
    for (int j = L - 1; j >= 0; --j) {
      auto& layer = node_layers[j + 1];
      if (j + 1 == static_cast<int>(node_layers.size()) - 1) continue;
      // Signature of each node in layer j+1 from arc layer j+1.
      std::vector<std::vector<std::tuple<long long, int, long long, bool>>> sig(
          layer.size());
      for (const Arc& arc : arc_layers[j + 1])
        sig[arc.tail].push_back({std::llround(arc.label * 1e9), arc.head,
                                 std::llround(arc.weight * 1e9), arc.z_floor});
      std::map<std::pair<uint64_t,
                         std::vector<std::tuple<long long, int, long long, bool>>>,
               int>
          groups;
      std::vector<int> remap(layer.size());
      std::vector<Node> packed;
      for (size_t v = 0; v < layer.size(); ++v) {
        std::sort(sig[v].begin(), sig[v].end());
        auto key = std::make_pair(layer[v].state, std::move(sig[v]));
        auto it = groups.find(key);
        if (it == groups.end()) {
          remap[v] = static_cast<int>(packed.size());
          groups.emplace(std::move(key), remap[v]);
          packed.push_back(layer[v]);
        } else {
          remap[v] = it->second;
          packed[it->second].exact = packed[it->second].exact && layer[v].exact;
        }
      }
      if (packed.size() == layer.size()) continue;
      layer = std::move(packed);
      for (Arc& arc : arc_layers[j]) arc.head = remap[arc.head];
      // Collapse arcs made identical by the merge.
      auto& prev = arc_layers[j + 1];
      for (Arc& arc : prev) arc.tail = remap[arc.tail];
      std::sort(prev.begin(), prev.end(), [](const Arc& a, const Arc& b) {
        if (a.tail != b.tail) return a.tail < b.tail;
        if (a.label != b.label) return a.label < b.label;
        return a.head < b.head;
      });
      prev.erase(std::unique(prev.begin(), prev.end(),
                             [](const Arc& a, const Arc& b) {
                               return a.tail == b.tail && a.head == b.head &&
                                      a.label == b.label &&
                                      a.weight == b.weight &&
                                      a.z_floor == b.z_floor;
                             }),
                 prev.end());
    }
  }

  // Removes nodes that no longer lie on a root-terminal path.
  void prune_dead() {
    if (empty()) return;
    const int L = static_cast<int>(arc_layers.size());
    std::vector<std::vector<char>> fwd(node_layers.size()),
        bwd(node_layers.size());
    for (size_t j = 0; j < node_layers.size(); ++j) {
      fwd[j].assign(node_layers[j].size(), 0);
      bwd[j].assign(node_layers[j].size(), 0);
    }
    if (fwd[0].empty() || fwd[L].empty()) {
      clear();
      return;
    }
    fwd[0][0] = 1;
    for (int j = 0; j < L; ++j)
      for (const Arc& arc : arc_layers[j])
        if (fwd[j][arc.tail]) fwd[j + 1][arc.head] = 1;
    for (auto& v : bwd[L]) v = 1;
    for (int j = L - 1; j >= 0; --j)
      for (const Arc& arc : arc_layers[j])
        if (bwd[j + 1][arc.head]) bwd[j][arc.tail] = 1;
    if (!fwd[L][0] || !bwd[0][0]) {
      clear();
      return;
    }

    std::vector<std::vector<int>> remap(node_layers.size());
    std::vector<std::vector<Node>> new_nodes(node_layers.size());
    for (size_t j = 0; j < node_layers.size(); ++j) {
      remap[j].assign(node_layers[j].size(), -1);
      for (size_t v = 0; v < node_layers[j].size(); ++v) {
        if (fwd[j][v] && bwd[j][v]) {
          remap[j][v] = static_cast<int>(new_nodes[j].size());
          new_nodes[j].push_back(node_layers[j][v]);
        }
      }
      if (new_nodes[j].empty()) {
        clear();
        return;
      }
    }
    std::vector<std::vector<Arc>> new_arcs(arc_layers.size());
    for (int j = 0; j < L; ++j)
      for (Arc arc : arc_layers[j]) {
        if (remap[j][arc.tail] < 0 || remap[j + 1][arc.head] < 0) continue;
        arc.tail = remap[j][arc.tail];
        arc.head = remap[j + 1][arc.head];
        new_arcs[j].push_back(arc);
      }
    node_layers = std::move(new_nodes);
    arc_layers = std::move(new_arcs);
  }

  void to_dot(std::ostream& os) const {
    os << "digraph dd {\n  rankdir=TB;\n";
    auto name = [](size_t j, size_t v) {
      return "n" + std::to_string(j) + "_" + std::to_string(v);
    };
    for (size_t j = 0; j < node_layers.size(); ++j)
      for (size_t v = 0; v < node_layers[j].size(); ++v)
        os << "  " << name(j, v) << " [label=\"" << j << ":" << v
           << (node_layers[j][v].exact ? "" : "*") << "\"];\n";
    for (size_t j = 0; j < arc_layers.size(); ++j)
      for (const Arc& arc : arc_layers[j])
        os << "  " << name(j, arc.tail) << " -> " << name(j + 1, arc.head)
           << " [label=\"" << arc.label << " (" << arc.weight << ")\"];\n";
    os << "}\n";
  }

 private:
  static double kInfValue() { return 1e300; }
};

// ---------------------------------------------------------------------------
// construction

namespace detail {

inline uint64_t full_state(int out_count) {
  return (out_count >= 63) ? ~uint64_t{0} : ((uint64_t{1} << (out_count + 1)) - 1);
}

struct MergeCand {
  int overlap;
  int combined_size;
  uint64_t combined;
  int i, j;
  int stamp_i, stamp_j;
};

}  // namespace detail

/// Builds a diagram of the requested kind.  The first `prefix.size()` layers
/// are forced to the given labels; an unsatisfiable prefix yields an empty
/// diagram.  Passing width_limit <= 0 disables widening/trimming, which makes
/// every kind coincide with the exact diagram.
inline Diagram build_diagram(const Shape& shape, double gamma, Kind kind,
                             int width_limit = 0,
                             const std::vector<int>& prefix = {}) {
  for (int n : shape.out_counts)
    if (n > 62)
      throw std::invalid_argument(
          "build_diagram: out-degree above 62 is not supported");
  for (int i = 0; i < shape.blocks(); ++i)
    if (shape.in_counts[i] <= 0 || shape.out_counts[i] <= 0)
      throw std::invalid_argument("build_diagram: empty block");

  const int W = shape.total_w_layers();
  if (static_cast<int>(prefix.size()) > W)
    throw std::invalid_argument("build_diagram: prefix longer than diagram");

  Diagram d;
  d.kind = kind;
  d.width_limit = width_limit;
  d.gamma = gamma;
  d.layer_block.reserve(W);
  d.layer_out_count.reserve(W);
  for (int b = 0; b < shape.blocks(); ++b)
    for (int h = 0; h < shape.in_counts[b]; ++h) {
      d.layer_block.push_back(b);
      d.layer_out_count.push_back(shape.out_counts[b]);
    }

  d.node_layers.assign(W + 2, {});
  d.arc_layers.assign(W + 1, {});
  uint64_t root_state =
      shape.blocks() > 0 ? detail::full_state(shape.out_counts[0]) : 1;
  d.node_layers[0].push_back(Node{root_state, true});

  bool any_merge = false;
  std::vector<double> cur_val{0.0};  // longest prefix value per current node
  for (int j = 0; j < W; ++j) {
    auto& cur = d.node_layers[j];
    auto& nxt = d.node_layers[j + 1];
    auto& arcs = d.arc_layers[j];
    const bool block_ends = (j + 1 == W) || (d.layer_block[j + 1] != d.layer_block[j]);
    const uint64_t next_full =
        (j + 1 < W) ? detail::full_state(d.layer_out_count[j + 1]) : 1;

    // Restricted construction keeps block-boundary children distinct per
    // (tail, label): the trimming step selects paths, and collapsing them
    // into the single fresh-state node first would put them beyond its
    // reach.  Elsewhere equal states merge losslessly.
    const bool dedup_here =
        !(block_ends && kind == Kind::Restricted && width_limit > 0);
    std::map<uint64_t, int> dedup;
    for (int u = 0; u < static_cast<int>(cur.size()); ++u) {
      uint64_t st = cur[u].state;
      for (int label = 0; label <= d.layer_out_count[j]; ++label) {
        if (!(st & (uint64_t{1} << label))) continue;
        if (j < static_cast<int>(prefix.size()) && label != prefix[j]) continue;
        uint64_t child_state;
        if (block_ends) {
          child_state = next_full;  // fresh state for the next block (or z)
        } else {
          child_state = st;
          if (label > 0) child_state &= ~(uint64_t{1} << label);
          child_state |= 1;
        }
        int head;
        if (dedup_here) {
          auto it = dedup.find(child_state);
          if (it == dedup.end()) {
            head = static_cast<int>(nxt.size());
            nxt.push_back(Node{child_state, cur[u].exact});
            dedup.emplace(child_state, head);
          } else {
            head = it->second;
            nxt[head].exact = nxt[head].exact && cur[u].exact;
          }
        } else {
          head = static_cast<int>(nxt.size());
          nxt.push_back(Node{child_state, cur[u].exact});
        }
        arcs.push_back(Arc{u, head, static_cast<double>(label), 0.0, false});
      }
    }
    if (nxt.empty()) {
      d.clear();
      return d;
    }

    const bool limited = width_limit > 0 && j >= static_cast<int>(prefix.size());
    if (limited && kind == Kind::Relaxed &&
        static_cast<int>(nxt.size()) > width_limit) {
      // Repeatedly merge the pair of nodes sharing the most state members.
      std::vector<int> stamp(nxt.size(), 0);
      std::vector<char> alive(nxt.size(), 1);
      auto better = [&](const detail::MergeCand& a, const detail::MergeCand& b) {
        // "better" = preferred merge; heap keeps the best on top.
        if (a.overlap != b.overlap) return a.overlap > b.overlap;
        if (a.combined_size != b.combined_size)
          return a.combined_size < b.combined_size;
        if (a.combined != b.combined)
          return state_lex_less(a.combined, b.combined);
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
      };
      auto worse = [&](const detail::MergeCand& a, const detail::MergeCand& b) {
        return better(b, a);
      };
      std::priority_queue<detail::MergeCand, std::vector<detail::MergeCand>,
                          decltype(worse)>
          heap(worse);
      auto push_pair = [&](int i, int jj) {
        uint64_t comb = nxt[i].state | nxt[jj].state;
        heap.push(detail::MergeCand{
            state_size(nxt[i].state & nxt[jj].state), state_size(comb), comb,
            i, jj, stamp[i], stamp[jj]});
      };
      for (int i = 0; i < static_cast<int>(nxt.size()); ++i)
        for (int jj = i + 1; jj < static_cast<int>(nxt.size()); ++jj)
          push_pair(i, jj);

      int alive_count = static_cast<int>(nxt.size());
      std::vector<int> target(nxt.size());
      for (size_t i = 0; i < target.size(); ++i) target[i] = static_cast<int>(i);
      while (alive_count > width_limit) {
        detail::MergeCand c = heap.top();
        heap.pop();
        if (!alive[c.i] || !alive[c.j] || stamp[c.i] != c.stamp_i ||
            stamp[c.j] != c.stamp_j)
          continue;
        nxt[c.i].state |= nxt[c.j].state;
        nxt[c.i].exact = false;
        alive[c.j] = 0;
        target[c.j] = c.i;
        ++stamp[c.i];
        --alive_count;
        any_merge = true;
        for (int k = 0; k < static_cast<int>(nxt.size()); ++k)
          if (alive[k] && k != c.i) push_pair(std::min(k, c.i), std::max(k, c.i));
      }
      // Compact the layer and rewire arcs.
      auto resolve = [&](int v) {
        while (target[v] != v) v = target[v];
        return v;
      };
      std::vector<int> remap(nxt.size(), -1);
      std::vector<Node> packed;
      for (int v = 0; v < static_cast<int>(nxt.size()); ++v) {
        if (!alive[v]) continue;
        remap[v] = static_cast<int>(packed.size());
        packed.push_back(nxt[v]);
      }
      for (Arc& arc : arcs) arc.head = remap[resolve(arc.head)];
      nxt = std::move(packed);
    } else if (limited && kind == Kind::Restricted &&
               static_cast<int>(nxt.size()) > width_limit) {
      // Keep the nodes with the best prefix value, preferring states that
      // leave more matching options open.
      std::vector<double> prefix_val(nxt.size(), -1e300);
      for (const Arc& arc : arcs)
        prefix_val[arc.head] =
            std::max(prefix_val[arc.head], cur_val[arc.tail] + arc.weight);
      std::vector<int> order(nxt.size());
      for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (prefix_val[a] != prefix_val[b]) return prefix_val[a] > prefix_val[b];
        int sa = state_size(nxt[a].state), sb = state_size(nxt[b].state);
        if (sa != sb) return sa > sb;
        if (nxt[a].state != nxt[b].state)
          return state_lex_less(nxt[a].state, nxt[b].state);
        return a < b;
      });
      std::vector<int> remap(nxt.size(), -1);
      std::vector<Node> packed;
      for (int r = 0; r < width_limit; ++r) {
        remap[order[r]] = r;
        packed.push_back(nxt[order[r]]);
      }
      std::vector<Arc> kept;
      for (Arc arc : arcs) {
        if (remap[arc.head] < 0) continue;
        arc.head = remap[arc.head];
        kept.push_back(arc);
      }
      nxt = std::move(packed);
      arcs = std::move(kept);
      d.exact_representation = false;
      if (arcs.empty()) {
        d.clear();
        return d;
      }
    }

    std::vector<double> nxt_val(nxt.size(), -1e300);
    for (const Arc& arc : arcs)
      nxt_val[arc.head] =
          std::max(nxt_val[arc.head], cur_val[arc.tail] + arc.weight);
    cur_val = std::move(nxt_val);
  }

  // z layer.
  d.node_layers[W + 1].push_back(Node{1, true});
  for (int u = 0; u < static_cast<int>(d.node_layers[W].size()); ++u) {
    d.arc_layers[W].push_back(Arc{u, 0, gamma, gamma, false});
    d.arc_layers[W].push_back(Arc{u, 0, -gamma, -gamma, true});
  }

  d.prune_dead();  // restricted trimming can orphan upstream nodes
  if (d.empty()) return d;

  d.last_exact_layer = 0;
  for (size_t j = 0; j < d.node_layers.size(); ++j) {
    bool all_exact = true;
    for (const Node& nd : d.node_layers[j]) all_exact = all_exact && nd.exact;
    if (!all_exact) break;
    d.last_exact_layer = static_cast<int>(j);
  }
  if (any_merge) d.exact_representation = false;
  return d;
}

inline Diagram build_exact(const Shape& shape, double gamma,
                           const std::vector<int>& prefix = {}) {
  return build_diagram(shape, gamma, Kind::Exact, 0, prefix);
}

inline Diagram build_relaxed(const Shape& shape, double gamma, int width_limit,
                             const std::vector<int>& prefix = {}) {
  return build_diagram(shape, gamma, Kind::Relaxed, width_limit, prefix);
}

inline Diagram build_restricted(const Shape& shape, double gamma,
                                int width_limit,
                                const std::vector<int>& prefix = {}) {
  return build_diagram(shape, gamma, Kind::Restricted, width_limit, prefix);
}

}  // namespace nsnm::dd
