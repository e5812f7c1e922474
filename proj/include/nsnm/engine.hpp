#pragma once

// The decomposition solver: branch-and-bound over partial matching-index
// assignments, with a restricted-diagram primal pass and a relaxed-diagram
// dual pass per node.  Each pass alternates longest-path extraction, scenario
// LP solves, cut generation and diagram refinement until the generated cut
// repeats (or the bound stalls, which floating-point duals occasionally force
// where the textbook loop would insist on an exact repeat).
//
// Cuts are valid in the full matching space, so one shared pool serves every
// node of the search tree.  Incumbent values are always re-evaluated from the
// scenario LPs at the candidate matching; refined z labels are never trusted
// as primal values.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "benders.hpp"
#include "diagram.hpp"
#include "model.hpp"
#include "report.hpp"
#include "simplex.hpp"
#include "transform.hpp"

namespace nsnm::engine {

struct Config {
  int width_limit = 64;              // <= 0: unlimited (exact diagrams)
  double time_limit_seconds = 0.0;   // <= 0: no limit
  int parallelism = 1;               // scenario LP workers
  double gap_tolerance = 1e-6;       // reporting tolerance
  double stall_improvement = 1e-6;   // cut-loop stall threshold
  int stall_rounds = 3;
  lp::Tolerances lp;
};

struct ProgressEvent {
  long node = 0;
  const char* phase = "";     // "restricted" | "relaxed" | "branch"
  long iteration = 0;         // global cut-round counter
  double dd_bound = 0.0;      // longest path of the active diagram
  double incumbent = 0.0;     // best true value so far (-inf if none)
  int queue_size = 0;
  char cut = '-';             // 'O' optimality, 'F' feasibility, '=' repeat
};

using ProgressFn = std::function<void(const ProgressEvent&)>;

namespace detail {

inline long long round9(double v) { return std::llround(v * 1e9); }

class CutPool {
 public:
  bool contains(const Cut& c) const { return keys_.count(key(c)) > 0; }

  void add(const Cut& c, dd::LayerCut lc) {
    keys_.insert(key(c));
    cuts_.push_back(c);
    layer_cuts_.push_back(std::move(lc));
  }

  size_t size() const { return cuts_.size(); }
  const dd::LayerCut& layer_cut(size_t i) const { return layer_cuts_[i]; }
  const Cut& cut(size_t i) const { return cuts_[i]; }

 private:
  static std::string key(const Cut& c) {
    std::string k;
    auto push = [&k](long long v) {
      k.append(reinterpret_cast<const char*>(&v), sizeof v);
    };
    push(c.kind == Cut::Kind::Optimality ? 1 : 0);
    push(round9(c.constant));
    for (const auto& block : c.coef)
      for (const auto& row : block)
        for (double v : row) push(round9(v));
    return k;
  }

  std::unordered_set<std::string> keys_;
  std::vector<Cut> cuts_;
  std::vector<dd::LayerCut> layer_cuts_;
};

// A prefix is extendable iff each touched block uses distinct positive labels.
inline bool prefix_feasible(const std::vector<int>& prefix,
                            const NsnmIndexing& idx) {
  size_t pos = 0;
  for (int b = 0; b < idx.blocks() && pos < prefix.size(); ++b) {
    std::vector<char> used(idx.out_count(b) + 1, 0);
    for (int h = 0; h < idx.in_count(b) && pos < prefix.size(); ++h, ++pos) {
      int v = prefix[pos];
      if (v < 0 || v > idx.out_count(b)) return false;
      if (v > 0) {
        if (used[v]) return false;
        used[v] = 1;
      }
    }
  }
  return true;
}

}  // namespace detail

class Solver {
 public:
  Solver(const Instance& inst, const Config& cfg, ProgressFn progress = {})
      : inst_(inst), cfg_(cfg), progress_(std::move(progress)) {
    idx_ = make_indexing(inst.network);
    shape_ = idx_.diagram_shape();
    for (int k = 0; k < inst.scenarios.size(); ++k)
      applied_.push_back(apply_scenario(inst.network, k, inst.scenarios));
    start_ = Clock::now();
  }

  SolveReport solve() {
    queue_.push_back(QueueEntry{{}, kHuge, 0});
    while (!queue_.empty()) {
      if (out_of_time()) break;
      auto it = std::max_element(
          queue_.begin(), queue_.end(), [](const QueueEntry& a, const QueueEntry& b) {
            if (a.bound != b.bound) return a.bound < b.bound;
            return a.seq > b.seq;  // FIFO among equal bounds
          });
      QueueEntry entry = std::move(*it);
      queue_.erase(it);
      if (have_incumbent_ && entry.bound <= incumbent_value_ + 1e-9) continue;
      process_node(entry);
      ++stats_.search_nodes;
    }

    SolveReport rep;
    rep.stats = stats_;
    rep.stats.wall_seconds = elapsed();
    if (timed_out_) {
      rep.termination = Termination::TimeLimit;
    } else {
      rep.termination =
          have_incumbent_ ? Termination::Optimal : Termination::Infeasible;
    }
    if (have_incumbent_) {
      rep.value = incumbent_value_;
      rep.w = incumbent_w_;
      rep.y = incumbent_y_;
      rep.flows = incumbent_flows_;
    }
    return rep;
  }

 private:
  using Clock = std::chrono::steady_clock;
  static constexpr double kHuge = 1e300;
  static constexpr long kBranchCap = 512;

  struct QueueEntry {
    std::vector<int> prefix;
    double bound;
    long seq;
  };

  struct LoopResult {
    bool diagram_alive = false;  // still has paths after the loop
    double bound = -kHuge;       // longest-path value at exit
    bool fathomed = false;       // relaxed pass dipped below the incumbent
  };

  const Instance& inst_;
  Config cfg_;
  ProgressFn progress_;
  NsnmIndexing idx_;
  dd::Shape shape_;
  std::vector<Network> applied_;
  detail::CutPool pool_;
  std::vector<QueueEntry> queue_;
  long next_seq_ = 1;

  bool timed_out_ = false;
  bool have_incumbent_ = false;
  double incumbent_value_ = -kHuge;
  WAssignment incumbent_w_;
  YAssignment incumbent_y_;
  std::vector<ScenarioFlows> incumbent_flows_;

  SolveStats stats_;
  Clock::time_point start_;

  double elapsed() const {
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }
  // Latching: once a check interrupts pending work the search is incomplete.
  bool out_of_time() {
    if (cfg_.time_limit_seconds > 0 && elapsed() > cfg_.time_limit_seconds)
      timed_out_ = true;
    return timed_out_;
  }

  void emit(long node, const char* phase, double bound, char cut) {
    if (!progress_) return;
    ProgressEvent ev;
    ev.node = node;
    ev.phase = phase;
    ev.iteration = stats_.iterations;
    ev.dd_bound = bound;
    ev.incumbent = have_incumbent_ ? incumbent_value_ : -kHuge;
    ev.queue_size = static_cast<int>(queue_.size());
    ev.cut = cut;
    progress_(ev);
  }

  // Scenario solves for a fixed matching, truncated after the first
  // infeasible scenario (by index, independent of thread timing).
  struct Evaluation {
    std::vector<lp::Solution> outcomes;
    std::vector<SubproblemLayout> layouts;
    bool all_optimal = false;
    double expected = 0.0;
  };

  Evaluation evaluate(const YAssignment& ya) {
    const int K = inst_.scenarios.size();
    Evaluation ev;
    ev.outcomes.resize(K);
    ev.layouts.resize(K);
    const int workers = std::max(1, std::min(cfg_.parallelism, K));
    auto run = [&](int begin, int end) {
      for (int k = begin; k < end; ++k) {
        lp::Problem p = build_subproblem(applied_[k], idx_, ya, &ev.layouts[k],
                                         /*full_rows=*/false);
        ev.outcomes[k] = lp::solve(p, cfg_.lp);
      }
    };
    if (workers == 1) {
      run(0, K);
    } else {
      std::vector<std::thread> pool;
      int chunk = (K + workers - 1) / workers;
      for (int t = 0; t < workers; ++t) {
        int b = t * chunk, e = std::min(K, b + chunk);
        if (b >= e) break;
        pool.emplace_back(run, b, e);
      }
      for (auto& th : pool) th.join();
    }
    stats_.lp_solves += K;

    int first_infeasible = -1;
    for (int k = 0; k < K; ++k) {
      if (ev.outcomes[k].status == lp::SolveStatus::Infeasible) {
        first_infeasible = k;
        break;
      }
      if (ev.outcomes[k].status != lp::SolveStatus::Optimal)
        throw std::runtime_error("scenario " + std::to_string(k) +
                                 " LP failed: " + ev.outcomes[k].message);
    }
    if (first_infeasible >= 0) {
      ev.outcomes.resize(first_infeasible + 1);
      ev.layouts.resize(first_infeasible + 1);
      ev.all_optimal = false;
    } else {
      ev.all_optimal = true;
      for (int k = 0; k < K; ++k)
        ev.expected +=
            inst_.scenarios.scenarios[k].probability * ev.outcomes[k].objective;
    }
    return ev;
  }

  void offer_incumbent(const WAssignment& wa, const YAssignment& ya,
                       const Evaluation& ev) {
    if (!ev.all_optimal) return;
    if (have_incumbent_ && ev.expected <= incumbent_value_ + 1e-12) return;
    have_incumbent_ = true;
    incumbent_value_ = ev.expected;
    incumbent_w_ = wa;
    incumbent_y_ = ya;
    incumbent_flows_.clear();
    for (const auto& sol : ev.outcomes)
      incumbent_flows_.push_back(ScenarioFlows{sol.objective, sol.x});
  }

  // Applies every pooled cut to a freshly built diagram.
  void apply_pool(dd::Diagram* d) {
    for (size_t i = 0; i < pool_.size() && !d->empty(); ++i)
      d->refine(pool_.layer_cut(i));
  }

  // The shared cut loop of both passes.  `dual_pass` additionally fathoms
  // against the incumbent and allows matching-infeasible path encodings.
  // With allow_stall off the loop runs until the generated cut repeats or
  // the diagram empties, which deterministic LP solves guarantee is finite.
  LoopResult cut_loop(dd::Diagram* d, long node, bool dual_pass,
                      bool allow_stall = true) {
    const char* phase = dual_pass ? "relaxed" : "restricted";
    LoopResult res;
    int stall = 0;
    double prev_bound = kHuge;
    while (true) {
      if (d->empty()) return res;
      auto lp_path = d->longest_path();
      if (!lp_path) {
        d->clear();
        return res;
      }
      res.diagram_alive = true;
      res.bound = lp_path->value;
      stats_.max_width = std::max(stats_.max_width, d->width());

      if (dual_pass && have_incumbent_ &&
          lp_path->value <= incumbent_value_ + 1e-9) {
        res.fathomed = true;
        emit(node, phase, lp_path->value, '-');
        return res;
      }
      if (out_of_time()) return res;

      WAssignment wa = unflatten(lp_path->labels, idx_);
      bool feasible_w = w_feasible(wa, idx_);
      YAssignment ya = w_to_y_unchecked(wa, idx_);

      Evaluation ev = evaluate(ya);
      ++stats_.iterations;
      if (feasible_w) offer_incumbent(wa, ya, ev);

      Cut cut = make_cut(inst_.scenarios, applied_, idx_, ev.outcomes,
                         ev.layouts, static_cast<int>(stats_.iterations));
      if (pool_.contains(cut)) {
        emit(node, phase, lp_path->value, '=');
        return res;
      }
      if (cut.kind == Cut::Kind::Optimality)
        ++stats_.optimality_cuts;
      else
        ++stats_.feasibility_cuts;
      pool_.add(cut, cut_to_layer_contributions(cut, idx_));
      d->refine(pool_.layer_cut(pool_.size() - 1));
      emit(node, phase, lp_path->value,
           cut.kind == Cut::Kind::Optimality ? 'O' : 'F');

      // Stall accounting applies to optimality-cut rounds only: during a
      // feasibility-cut streak the bound legitimately sits still while each
      // round prunes another matching class.
      if (allow_stall && cut.kind == Cut::Kind::Optimality) {
        if (std::abs(prev_bound - lp_path->value) < cfg_.stall_improvement) {
          if (++stall >= cfg_.stall_rounds) {
            // Documented deviation: floating-point duals rarely reproduce a
            // cut bit-for-bit, so a stalled bound also ends the loop.
            auto after = d->longest_path();
            if (after) res.bound = after->value;
            res.diagram_alive = after.has_value();
            return res;
          }
        } else {
          stall = 0;
        }
        prev_bound = lp_path->value;
      }
    }
  }

  void process_node(const QueueEntry& entry) {
    const long node = stats_.search_nodes;

    dd::Diagram restricted = dd::build_restricted(
        shape_, inst_.gamma, cfg_.width_limit, entry.prefix);
    apply_pool(&restricted);
    LoopResult primal = cut_loop(&restricted, node, /*dual_pass=*/false);
    // Refinement trimming can retract the exactness flag, so read it after
    // the loop.  While it holds, the pass saw every completion of this
    // prefix; if the stall rule cut the loop short of convergence, run on to
    // a repeated cut so the node closes with its true optimum explored.
    if (restricted.exact_representation) {
      if (primal.diagram_alive && !out_of_time() &&
          (!have_incumbent_ ||
           primal.bound > incumbent_value_ + cfg_.gap_tolerance))
        cut_loop(&restricted, node, /*dual_pass=*/false, /*allow_stall=*/false);
      if (restricted.exact_representation) return;
    }
    if (out_of_time()) return;

    dd::Diagram relaxed =
        dd::build_relaxed(shape_, inst_.gamma, cfg_.width_limit, entry.prefix);
    apply_pool(&relaxed);
    LoopResult dual = cut_loop(&relaxed, node, /*dual_pass=*/true);
    if (!dual.diagram_alive || dual.fathomed) return;
    if (have_incumbent_ && dual.bound <= incumbent_value_ + 1e-9) return;
    if (out_of_time()) return;

    if (relaxed.exact_representation) {
      // Neither construction nor refinement ever merged or trimmed, so the
      // diagram sees every completion: run the loop to a repeated cut and,
      // if exactness survived it, close the node; branching could not
      // expose anything new.
      dual = cut_loop(&relaxed, node, /*dual_pass=*/true, /*allow_stall=*/false);
      if (relaxed.exact_representation || !dual.diagram_alive || dual.fathomed)
        return;
      if (have_incumbent_ && dual.bound <= incumbent_value_ + 1e-9) return;
      if (out_of_time()) return;
    }

    // Branch on the deepest merge-free layer, at least one label deeper than
    // the fixed prefix.  Every distinct root path into that layer becomes a
    // child; state deduplication means one node can carry several prefixes,
    // all of which must be explored.  If that layer holds too many prefixes,
    // retreat to a shallower one -- any depth keeps the search complete.
    int target = std::max(relaxed.last_exact_layer,
                          static_cast<int>(entry.prefix.size()) + 1);
    target = std::min(target, relaxed.n_w_layers());
    const int floor_layer = static_cast<int>(entry.prefix.size()) + 1;
    std::vector<std::vector<int>> prefixes;
    while (target > floor_layer &&
           !relaxed.prefixes_to_layer(target, &prefixes, kBranchCap))
      --target;
    if (prefixes.empty()) relaxed.prefixes_to_layer(target, &prefixes);
    for (auto& pf : prefixes) {
      if (!detail::prefix_feasible(pf, idx_)) continue;
      queue_.push_back(QueueEntry{std::move(pf), dual.bound, next_seq_++});
    }
    emit(node, "branch", dual.bound, '-');
  }
};

inline SolveReport solve(const Instance& inst, const Config& cfg = {},
                         ProgressFn progress = {}) {
  Solver solver(inst, cfg, std::move(progress));
  return solver.solve();
}

}  // namespace nsnm::engine
