#pragma once

// Scenario subproblem assembly and Benders cut generation.
//
// For a fixed first-stage matching y and scenario bounds, the subproblem is
// the continuous flow LP (objective: arc rewards; rows: flow conservation at
// every non-boundary node, equal flows on matched arc pairs, zero flow on
// unmatched arcs incident to matching nodes).  Its duals define the affine
// bi-function
//   f(y; theta) = sum_a (-l_a beta_a + u_a gamma_a)
//               + sum_pairs u_in (1 - y) lambda + u_out (1 - y) mu
//               + sum_in   u_in  sigma * (row sum of y)
//               + sum_out  u_out phi   * (column sum of y),
// which yields optimality cuts z <= sum_xi Pr f(y; theta_xi) and, from a
// Farkas ray of an infeasible scenario, feasibility cuts f(y; ray) >= 0.

#include <stdexcept>
#include <string>
#include <vector>

#include "model.hpp"
#include "simplex.hpp"
#include "transform.hpp"

namespace nsnm {

// Row bookkeeping for one assembled subproblem; -1 marks a row that was
// provably redundant for the fixed y and therefore not emitted (its dual is
// zero in any optimal dual of the full formulation).
struct SubproblemLayout {
  std::vector<int> conservation_row;                  // per node
  std::vector<std::vector<std::vector<int>>> lambda_row;  // [block][in][out]
  std::vector<std::vector<std::vector<int>>> mu_row;      // [block][in][out]
  std::vector<std::vector<int>> sigma_row;            // [block][in]
  std::vector<std::vector<int>> phi_row;              // [block][out]
};

// Duals of one scenario subproblem in the paper's naming.  For infeasible
// scenarios the same container carries the Farkas ray.
struct DualVector {
  std::vector<double> alpha;                         // per node, 0 if absent
  std::vector<double> beta, gamma;                   // per arc (bound duals)
  std::vector<std::vector<std::vector<double>>> lambda, mu;
  std::vector<std::vector<double>> sigma, phi;
};

/// Builds the scenario LP for a fixed y over the scenario-applied network.
/// With full_rows the formulation is emitted literally; otherwise rows whose
/// right-hand side makes them redundant against the variable bounds are
/// dropped, which leaves the optimum and the cut mathematics unchanged.
inline lp::Problem build_subproblem(const Network& applied,
                                    const NsnmIndexing& idx,
                                    const YAssignment& ybar,
                                    SubproblemLayout* layout = nullptr,
                                    bool full_rows = true) {
  lp::Problem p;
  for (const Arc& arc : applied.arcs) {
    if (!std::isfinite(arc.upper))
      throw std::invalid_argument(
          "build_subproblem: network still has unbounded arcs; apply a "
          "scenario first");
    p.add_var(arc.lower, arc.upper, arc.reward);
  }

  SubproblemLayout lay;
  lay.conservation_row.assign(applied.num_nodes(), -1);
  lay.lambda_row.resize(idx.blocks());
  lay.mu_row.resize(idx.blocks());
  lay.sigma_row.resize(idx.blocks());
  lay.phi_row.resize(idx.blocks());

  for (NodeId q = 0; q < applied.num_nodes(); ++q) {
    if (!applied.conserves_flow(q)) continue;
    std::vector<std::pair<int, double>> coeffs;
    for (ArcId a = 0; a < applied.num_arcs(); ++a) {
      if (applied.arcs[a].head == q) coeffs.push_back({a, 1.0});
      if (applied.arcs[a].tail == q) coeffs.push_back({a, -1.0});
    }
    lay.conservation_row[q] = p.num_rows();
    p.add_row(std::move(coeffs), lp::RowSense::Equal, 0.0);
  }

  for (int b = 0; b < idx.blocks(); ++b) {
    const int m = idx.in_count(b), n = idx.out_count(b);
    lay.lambda_row[b].assign(m, std::vector<int>(n, -1));
    lay.mu_row[b].assign(m, std::vector<int>(n, -1));
    lay.sigma_row[b].assign(m, -1);
    lay.phi_row[b].assign(n, -1);
    for (int h = 0; h < m; ++h) {
      ArcId in = idx.in_arcs[b][h];
      for (int k = 0; k < n; ++k) {
        ArcId out = idx.out_arcs[b][k];
        int y = ybar.y[b][h][k];
        if (full_rows || y == 1) {
          lay.lambda_row[b][h][k] = p.num_rows();
          p.add_row({{in, 1.0}, {out, -1.0}}, lp::RowSense::LessEqual,
                    applied.arcs[in].upper * (1 - y));
          lay.mu_row[b][h][k] = p.num_rows();
          p.add_row({{out, 1.0}, {in, -1.0}}, lp::RowSense::LessEqual,
                    applied.arcs[out].upper * (1 - y));
        }
      }
    }
    for (int h = 0; h < m; ++h) {
      ArcId in = idx.in_arcs[b][h];
      int row_sum = 0;
      for (int k = 0; k < n; ++k) row_sum += ybar.y[b][h][k];
      if (full_rows || row_sum == 0) {
        lay.sigma_row[b][h] = p.num_rows();
        p.add_row({{in, 1.0}}, lp::RowSense::LessEqual,
                  applied.arcs[in].upper * row_sum);
      }
    }
    for (int k = 0; k < n; ++k) {
      ArcId out = idx.out_arcs[b][k];
      int col_sum = 0;
      for (int h = 0; h < m; ++h) col_sum += ybar.y[b][h][k];
      if (full_rows || col_sum == 0) {
        lay.phi_row[b][k] = p.num_rows();
        p.add_row({{out, 1.0}}, lp::RowSense::LessEqual,
                  applied.arcs[out].upper * col_sum);
      }
    }
  }

  if (layout) *layout = lay;
  return p;
}

// ---------------------------------------------------------------------------
// dual extraction

inline DualVector extract_duals(const Network& applied, const NsnmIndexing& idx,
                                const SubproblemLayout& lay,
                                const lp::Solution& sol) {
  const bool ray = sol.status == lp::SolveStatus::Infeasible;
  const std::vector<double>& rows = ray ? sol.farkas_rows : sol.row_duals;

  DualVector d;
  d.alpha.assign(applied.num_nodes(), 0.0);
  d.beta.assign(applied.num_arcs(), 0.0);
  d.gamma.assign(applied.num_arcs(), 0.0);
  for (NodeId q = 0; q < applied.num_nodes(); ++q)
    if (lay.conservation_row[q] >= 0) d.alpha[q] = rows[lay.conservation_row[q]];

  if (ray) {
    d.beta = sol.farkas_lower;
    d.gamma = sol.farkas_upper;
  } else {
    for (ArcId a = 0; a < applied.num_arcs(); ++a) {
      double rc = sol.reduced_costs[a];
      if (rc > 0)
        d.gamma[a] = rc;
      else
        d.beta[a] = -rc;
    }
  }

  d.lambda.resize(idx.blocks());
  d.mu.resize(idx.blocks());
  d.sigma.resize(idx.blocks());
  d.phi.resize(idx.blocks());
  for (int b = 0; b < idx.blocks(); ++b) {
    const int m = idx.in_count(b), n = idx.out_count(b);
    d.lambda[b].assign(m, std::vector<double>(n, 0.0));
    d.mu[b].assign(m, std::vector<double>(n, 0.0));
    d.sigma[b].assign(m, 0.0);
    d.phi[b].assign(n, 0.0);
    for (int h = 0; h < m; ++h) {
      for (int k = 0; k < n; ++k) {
        if (lay.lambda_row[b][h][k] >= 0)
          d.lambda[b][h][k] = rows[lay.lambda_row[b][h][k]];
        if (lay.mu_row[b][h][k] >= 0) d.mu[b][h][k] = rows[lay.mu_row[b][h][k]];
      }
      if (lay.sigma_row[b][h] >= 0) d.sigma[b][h] = rows[lay.sigma_row[b][h]];
    }
    for (int k = 0; k < n; ++k)
      if (lay.phi_row[b][k] >= 0) d.phi[b][k] = rows[lay.phi_row[b][k]];
  }
  return d;
}

// ---------------------------------------------------------------------------
// the bi-function as a y-space linear form

/// Expands f(. ; theta) for one scenario into y coefficients and a constant.
inline void accumulate_f_terms(const Network& applied, const NsnmIndexing& idx,
                               const DualVector& th, double weight, Cut* cut) {
  for (ArcId a = 0; a < applied.num_arcs(); ++a)
    cut->constant += weight * (-applied.arcs[a].lower * th.beta[a] +
                               applied.arcs[a].upper * th.gamma[a]);
  for (int b = 0; b < idx.blocks(); ++b) {
    const int m = idx.in_count(b), n = idx.out_count(b);
    for (int h = 0; h < m; ++h) {
      double u_in = applied.arcs[idx.in_arcs[b][h]].upper;
      for (int k = 0; k < n; ++k) {
        double u_out = applied.arcs[idx.out_arcs[b][k]].upper;
        double lam = th.lambda[b][h][k], mu = th.mu[b][h][k];
        cut->constant += weight * (u_in * lam + u_out * mu);
        cut->coef[b][h][k] +=
            weight * (-u_in * lam - u_out * mu + u_in * th.sigma[b][h] +
                      u_out * th.phi[b][k]);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// make_cut

/// Turns the per-scenario outcomes into a single Benders cut.  The first
/// infeasible scenario wins and produces a feasibility cut from its ray;
/// otherwise all outcomes must be optimal and the optimality cuts aggregate
/// into one probability-weighted inequality.
inline Cut make_cut(const ScenarioSet& scenarios,
                    const std::vector<Network>& applied,
                    const NsnmIndexing& idx,
                    const std::vector<lp::Solution>& outcomes,
                    const std::vector<SubproblemLayout>& layouts,
                    int iteration = -1) {
  for (size_t k = 0; k < outcomes.size(); ++k) {
    if (outcomes[k].status == lp::SolveStatus::Infeasible) {
      Cut cut = zero_cut(idx, Cut::Kind::Feasibility);
      cut.iteration = iteration;
      cut.scenario = static_cast<int>(k);
      DualVector ray = extract_duals(applied[k], idx, layouts[k], outcomes[k]);
      accumulate_f_terms(applied[k], idx, ray, 1.0, &cut);
      return cut;
    }
    if (outcomes[k].status != lp::SolveStatus::Optimal)
      throw std::runtime_error("make_cut: scenario " + std::to_string(k) +
                               " failed numerically: " + outcomes[k].message);
  }
  if (static_cast<int>(outcomes.size()) != scenarios.size())
    throw std::runtime_error(
        "make_cut: outcomes truncated without an infeasible scenario");

  Cut cut = zero_cut(idx, Cut::Kind::Optimality);
  cut.iteration = iteration;
  for (int k = 0; k < scenarios.size(); ++k) {
    DualVector th = extract_duals(applied[k], idx, layouts[k], outcomes[k]);
    accumulate_f_terms(applied[k], idx, th, scenarios.scenarios[k].probability,
                       &cut);
  }
  return cut;
}

// ---------------------------------------------------------------------------
// explicit dual, used as a validation oracle

/// Builds the printed dual of the scenario subproblem over the arc partition
/// (arcs out of in-degree-zero nodes, arcs into out-degree-zero nodes, inner
/// arcs, and direct source-sink arcs), maximising -f so the reported optimum
/// is the negated dual value.  Free duals get wide box bounds since the
/// kernel requires finite boxes.
inline lp::Problem assemble_dual(const Network& applied, const NsnmIndexing& idx,
                                 const YAssignment& ybar,
                                 double box = 1e6) {
  lp::Problem p;
  const int n_nodes = applied.num_nodes();
  const int n_arcs = applied.num_arcs();

  // Variables.
  std::vector<int> alpha(n_nodes, -1);
  for (NodeId q = 0; q < n_nodes; ++q)
    if (applied.conserves_flow(q)) alpha[q] = p.add_var(-box, box, 0.0);

  std::vector<int> beta(n_arcs), gamma(n_arcs);
  for (ArcId a = 0; a < n_arcs; ++a) {
    beta[a] = p.add_var(0.0, box, applied.arcs[a].lower);    // -(-l beta)
    gamma[a] = p.add_var(0.0, box, -applied.arcs[a].upper);  // -(u gamma)
  }

  std::vector<std::vector<std::vector<int>>> lam(idx.blocks()), mu(idx.blocks());
  std::vector<std::vector<int>> sig(idx.blocks()), phi(idx.blocks());
  for (int b = 0; b < idx.blocks(); ++b) {
    const int m = idx.in_count(b), n = idx.out_count(b);
    lam[b].assign(m, std::vector<int>(n, -1));
    mu[b].assign(m, std::vector<int>(n, -1));
    sig[b].assign(m, -1);
    phi[b].assign(n, -1);
    for (int h = 0; h < m; ++h) {
      double u_in = applied.arcs[idx.in_arcs[b][h]].upper;
      int row_sum = 0;
      for (int k = 0; k < n; ++k) {
        double u_out = applied.arcs[idx.out_arcs[b][k]].upper;
        int y = ybar.y[b][h][k];
        row_sum += y;
        lam[b][h][k] = p.add_var(0.0, box, -u_in * (1 - y));
        mu[b][h][k] = p.add_var(0.0, box, -u_out * (1 - y));
      }
      sig[b][h] = p.add_var(0.0, box, -u_in * row_sum);
    }
    for (int k = 0; k < n; ++k) {
      double u_out = applied.arcs[idx.out_arcs[b][k]].upper;
      int col_sum = 0;
      for (int h = 0; h < m; ++h) col_sum += ybar.y[b][h][k];
      phi[b][k] = p.add_var(0.0, box, -u_out * col_sum);
    }
  }

  // One constraint per arc, following the paper's case split.
  for (ArcId a = 0; a < n_arcs; ++a) {
    const Arc& arc = applied.arcs[a];
    std::vector<std::pair<int, double>> c;
    if (alpha[arc.tail] >= 0) c.push_back({alpha[arc.tail], -1.0});
    if (alpha[arc.head] >= 0) c.push_back({alpha[arc.head], 1.0});
    c.push_back({beta[a], -1.0});
    c.push_back({gamma[a], 1.0});

    // Tail-side matching terms: the arc leaves an unsplittable node.
    int bt = idx.block_of_node(arc.tail);
    if (bt >= 0) {
      int k = idx.out_index(bt, a) - 1;
      for (int h = 0; h < idx.in_count(bt); ++h) {
        c.push_back({mu[bt][h][k], 1.0});
        c.push_back({lam[bt][h][k], -1.0});
      }
      c.push_back({phi[bt][k], 1.0});
    }
    // Head-side matching terms: the arc enters an unsplittable node.
    int bh = idx.block_of_node(arc.head);
    if (bh >= 0) {
      int h = idx.in_index(bh, a) - 1;
      for (int k = 0; k < idx.out_count(bh); ++k) {
        c.push_back({lam[bh][h][k], 1.0});
        c.push_back({mu[bh][h][k], -1.0});
      }
      c.push_back({sig[bh][h], 1.0});
    }
    p.add_row(std::move(c), lp::RowSense::GreaterEqual, arc.reward);
  }
  return p;
}

}  // namespace nsnm
