#pragma once

// Index mappings between the binary matching variables y and the integer
// matching-index variables w, one block per no-split no-merge node.
//
// For a node q, ind- numbers the incoming arcs 1..|in(q)| and ind+ numbers
// the outgoing arcs 1..|out(q)|, both in ascending arc order so results are
// reproducible.  w[h] = k > 0 matches the h-th incoming arc with the k-th
// outgoing arc; w[h] = 0 leaves it unmatched.

#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "diagram.hpp"
#include "model.hpp"

namespace nsnm {

struct NsnmIndexing {
  std::vector<NodeId> nodes;                 // ascending NSNM node ids
  std::vector<std::vector<ArcId>> in_arcs;   // per node, ascending; ind- = pos + 1
  std::vector<std::vector<ArcId>> out_arcs;  // per node, ascending; ind+ = pos + 1
  std::vector<int> layer_offset;             // first w layer of each block

  int blocks() const { return static_cast<int>(nodes.size()); }
  int in_count(int b) const { return static_cast<int>(in_arcs[b].size()); }
  int out_count(int b) const { return static_cast<int>(out_arcs[b].size()); }
  int total_w_layers() const {
    return blocks() == 0 ? 0 : layer_offset.back() + in_count(blocks() - 1);
  }

  int block_of_node(NodeId q) const {
    for (int b = 0; b < blocks(); ++b)
      if (nodes[b] == q) return b;
    return -1;
  }

  // 1-based index of an incoming arc within its block, 0 if absent.
  int in_index(int b, ArcId a) const {
    for (size_t h = 0; h < in_arcs[b].size(); ++h)
      if (in_arcs[b][h] == a) return static_cast<int>(h) + 1;
    return 0;
  }
  int out_index(int b, ArcId a) const {
    for (size_t k = 0; k < out_arcs[b].size(); ++k)
      if (out_arcs[b][k] == a) return static_cast<int>(k) + 1;
    return 0;
  }

  dd::Shape diagram_shape() const {
    dd::Shape s;
    for (int b = 0; b < blocks(); ++b) {
      s.in_counts.push_back(in_count(b));
      s.out_counts.push_back(out_count(b));
    }
    return s;
  }
};

inline NsnmIndexing make_indexing(const Network& net) {
  NsnmIndexing idx;
  idx.nodes = net.nsnm;  // already sorted ascending
  int offset = 0;
  for (NodeId q : idx.nodes) {
    idx.in_arcs.push_back(net.in_arcs(q));    // ascending ArcId by construction
    idx.out_arcs.push_back(net.out_arcs(q));
    idx.layer_offset.push_back(offset);
    offset += static_cast<int>(idx.in_arcs.back().size());
  }
  return idx;
}

// Per-block integer vectors; w[b][h-1] in {0..out_count(b)}.
struct WAssignment {
  std::vector<std::vector<int>> w;
};

// Per-block 0/1 matrices; y[b][h-1][k-1] pairs the h-th in arc with the k-th
// out arc.
struct YAssignment {
  std::vector<std::vector<std::vector<int>>> y;
};

// ---------------------------------------------------------------------------
// feasibility checks

/// True when every entry is in range and no two entries of a block share the
/// same positive value.
inline bool w_feasible(const WAssignment& wa, const NsnmIndexing& idx) {
  if (static_cast<int>(wa.w.size()) != idx.blocks()) return false;
  for (int b = 0; b < idx.blocks(); ++b) {
    const auto& w = wa.w[b];
    if (static_cast<int>(w.size()) != idx.in_count(b)) return false;
    std::vector<char> used(idx.out_count(b) + 1, 0);
    for (int v : w) {
      if (v < 0 || v > idx.out_count(b)) return false;
      if (v > 0) {
        if (used[v]) return false;
        used[v] = 1;
      }
    }
  }
  return true;
}

/// True when shapes match, entries are 0/1, and every row and column sums to
/// at most one.
inline bool y_feasible(const YAssignment& ya, const NsnmIndexing& idx) {
  if (static_cast<int>(ya.y.size()) != idx.blocks()) return false;
  for (int b = 0; b < idx.blocks(); ++b) {
    const auto& y = ya.y[b];
    const int m = idx.in_count(b), n = idx.out_count(b);
    if (static_cast<int>(y.size()) != m) return false;
    std::vector<int> col(n, 0);
    for (int h = 0; h < m; ++h) {
      if (static_cast<int>(y[h].size()) != n) return false;
      int row = 0;
      for (int k = 0; k < n; ++k) {
        if (y[h][k] != 0 && y[h][k] != 1) return false;
        row += y[h][k];
        col[k] += y[h][k];
      }
      if (row > 1) return false;
    }
    for (int c : col)
      if (c > 1) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// mappings

/// y[h][k] = 1 - sign(|w[h] - (k+1)|); integers only, no rounding involved.
/// Accepts any in-range w (duplicate positive entries included) so callers
/// can convert points encoded by relaxed diagrams; such points simply map to
/// y with repeated column matches.
inline YAssignment w_to_y_unchecked(const WAssignment& wa,
                                    const NsnmIndexing& idx) {
  YAssignment ya;
  ya.y.resize(idx.blocks());
  for (int b = 0; b < idx.blocks(); ++b) {
    const int m = idx.in_count(b), n = idx.out_count(b);
    if (static_cast<int>(wa.w[b].size()) != m)
      throw std::invalid_argument("w_to_y: block " + std::to_string(b) +
                                  " has wrong length");
    ya.y[b].assign(m, std::vector<int>(n, 0));
    for (int h = 0; h < m; ++h) {
      int v = wa.w[b][h];
      if (v < 0 || v > n)
        throw std::invalid_argument("w_to_y: label out of range in block " +
                                    std::to_string(b));
      if (v > 0) ya.y[b][h][v - 1] = 1;
    }
  }
  return ya;
}

inline YAssignment w_to_y(const WAssignment& wa, const NsnmIndexing& idx) {
  if (!w_feasible(wa, idx))
    throw std::invalid_argument(
        "w_to_y: assignment violates the distinct-positive-labels rule");
  return w_to_y_unchecked(wa, idx);
}

/// w[h] = sum_k (k+1) * y[h][k].
inline WAssignment y_to_w(const YAssignment& ya, const NsnmIndexing& idx) {
  if (!y_feasible(ya, idx))
    throw std::invalid_argument("y_to_w: assignment violates row/column sums");
  WAssignment wa;
  wa.w.resize(idx.blocks());
  for (int b = 0; b < idx.blocks(); ++b) {
    const int m = idx.in_count(b), n = idx.out_count(b);
    wa.w[b].assign(m, 0);
    for (int h = 0; h < m; ++h)
      for (int k = 0; k < n; ++k)
        if (ya.y[b][h][k]) wa.w[b][h] = k + 1;
  }
  return wa;
}

/// Flattens per-block vectors into the diagram's layer order.
inline std::vector<int> flatten(const WAssignment& wa) {
  std::vector<int> out;
  for (const auto& block : wa.w) out.insert(out.end(), block.begin(), block.end());
  return out;
}

inline WAssignment unflatten(const std::vector<int>& labels,
                             const NsnmIndexing& idx) {
  WAssignment wa;
  wa.w.resize(idx.blocks());
  size_t pos = 0;
  for (int b = 0; b < idx.blocks(); ++b) {
    const int m = idx.in_count(b);
    if (pos + m > labels.size())
      throw std::invalid_argument("unflatten: label vector too short");
    wa.w[b].assign(labels.begin() + pos, labels.begin() + pos + m);
    pos += m;
  }
  if (pos != labels.size())
    throw std::invalid_argument("unflatten: label vector too long");
  return wa;
}

// ---------------------------------------------------------------------------
// cuts

// A Benders cut in the y space.  Optimality cuts read
//   z <= sum coef[b][h][k] * y[b][h][k] + constant,
// feasibility cuts read
//   sum coef[b][h][k] * y[b][h][k] + constant >= 0.
struct Cut {
  enum class Kind { Optimality, Feasibility };
  Kind kind = Kind::Optimality;
  std::vector<std::vector<std::vector<double>>> coef;  // [block][in][out]
  double constant = 0.0;
  int iteration = -1;  // provenance
  int scenario = -1;   // generating scenario for feasibility cuts

  double evaluate(const YAssignment& ya) const {
    double v = constant;
    for (size_t b = 0; b < coef.size(); ++b)
      for (size_t h = 0; h < coef[b].size(); ++h)
        for (size_t k = 0; k < coef[b][h].size(); ++k)
          v += coef[b][h][k] * ya.y[b][h][k];
    return v;
  }
};

inline Cut zero_cut(const NsnmIndexing& idx, Cut::Kind kind) {
  Cut c;
  c.kind = kind;
  c.coef.resize(idx.blocks());
  for (int b = 0; b < idx.blocks(); ++b)
    c.coef[b].assign(idx.in_count(b),
                     std::vector<double>(idx.out_count(b), 0.0));
  return c;
}

/// Rewrites a y-space cut as per-layer label contributions: substituting
/// y[h][k] = 1 - sign(|w[h] - k - 1|) turns each y coefficient into a lookup
/// on a single w coordinate, so the sum over layers reproduces the y-space
/// value exactly.
inline dd::LayerCut cut_to_layer_contributions(const Cut& cut,
                                               const NsnmIndexing& idx) {
  if (static_cast<int>(cut.coef.size()) != idx.blocks())
    throw std::invalid_argument("cut_to_layer_contributions: block mismatch");
  dd::LayerCut lc;
  lc.constant = cut.constant;
  lc.sense = cut.kind == Cut::Kind::Optimality ? dd::CutSense::Optimality
                                               : dd::CutSense::Feasibility;
  lc.tables.resize(idx.total_w_layers());
  for (int b = 0; b < idx.blocks(); ++b) {
    const int m = idx.in_count(b), n = idx.out_count(b);
    if (static_cast<int>(cut.coef[b].size()) != m)
      throw std::invalid_argument(
          "cut_to_layer_contributions: row count mismatch in block " +
          std::to_string(b));
    for (int h = 0; h < m; ++h) {
      if (static_cast<int>(cut.coef[b][h].size()) != n)
        throw std::invalid_argument(
            "cut_to_layer_contributions: column count mismatch in block " +
            std::to_string(b));
      auto& table = lc.tables[idx.layer_offset[b] + h];
      table.assign(n + 1, 0.0);
      for (int k = 0; k < n; ++k) table[k + 1] = cut.coef[b][h][k];
    }
  }
  return lc;
}

}  // namespace nsnm
