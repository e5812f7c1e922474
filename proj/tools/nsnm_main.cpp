// Command-line front end: instance generation, validation, summary stats and
// the two solvers (decomposition and exhaustive enumeration).
//
// Exit codes: 0 success, 1 infeasible instance, 2 time limit reached,
// 64 usage or input error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nsnm/engine.hpp"
#include "nsnm/generator.hpp"
#include "nsnm/instance_io.hpp"
#include "nsnm/model.hpp"
#include "nsnm/oracle.hpp"

namespace {

int log_level() {
  const char* env = std::getenv("NSNM_LOG");
  if (!env) return 1;
  std::string v(env);
  if (v == "quiet" || v == "0") return 0;
  if (v == "debug" || v == "2") return 2;
  return 1;
}

nlohmann::ordered_json report_to_json(const nsnm::SolveReport& rep) {
  using nlohmann::ordered_json;
  ordered_json j;
  switch (rep.termination) {
    case nsnm::Termination::Optimal: j["termination"] = "optimal"; break;
    case nsnm::Termination::TimeLimit: j["termination"] = "time_limit"; break;
    case nsnm::Termination::Infeasible: j["termination"] = "infeasible"; break;
  }
  j["value"] = rep.value;
  j["w"] = rep.w.w;
  ordered_json flows = ordered_json::array();
  for (const auto& f : rep.flows)
    flows.push_back({{"objective", f.objective}, {"flow", f.flow}});
  j["per_scenario"] = flows;
  j["stats"] = {{"iterations", rep.stats.iterations},
                {"search_nodes", rep.stats.search_nodes},
                {"optimality_cuts", rep.stats.optimality_cuts},
                {"feasibility_cuts", rep.stats.feasibility_cuts},
                {"lp_solves", rep.stats.lp_solves},
                {"max_width", rep.stats.max_width},
                {"wall_seconds", rep.stats.wall_seconds}};
  return j;
}

void print_matching(const nsnm::Instance& inst, const nsnm::SolveReport& rep) {
  nsnm::NsnmIndexing idx = nsnm::make_indexing(inst.network);
  for (int b = 0; b < idx.blocks(); ++b) {
    std::cout << "  node " << idx.nodes[b] << ":";
    bool any = false;
    for (int h = 0; h < idx.in_count(b); ++h) {
      int v = rep.w.w[b][h];
      if (v == 0) continue;
      any = true;
      const nsnm::Arc& in = inst.network.arcs[idx.in_arcs[b][h]];
      const nsnm::Arc& out = inst.network.arcs[idx.out_arcs[b][v - 1]];
      std::cout << "  (" << in.tail << "->" << in.head << ") => (" << out.tail
                << "->" << out.head << ")";
    }
    if (!any) std::cout << "  all unmatched";
    std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision-diagram decomposition solver for stochastic "
               "unsplittable network flow"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a random instance");
  nsnm::GeneratorConfig gcfg;
  std::string gen_out;
  gen->add_option("--nodes", gcfg.nodes, "Base network size")->required();
  gen->add_option("--scenarios", gcfg.scenarios, "Number of demand scenarios")
      ->required();
  gen->add_option("--seed", gcfg.seed, "Random seed")->default_val(1);
  gen->add_option("--density", gcfg.density, "Arc probability between layers")
      ->default_val(0.4);
  gen->add_option("--out", gen_out, "Output path (default: stdout)");

  // solve
  auto* solve = app.add_subcommand("solve", "Solve an instance");
  std::string solve_path, method = "dd-bd", log_format = "text";
  std::string report_path, dot_path;
  nsnm::engine::Config ecfg;
  double time_limit = 0.0, tolerance = 1e-6;
  solve->add_option("instance", solve_path, "Instance file")->required();
  solve->add_option("--method", method, "dd-bd or enum")
      ->check(CLI::IsMember({"dd-bd", "enum"}));
  solve->add_option("--width-limit", ecfg.width_limit, "Diagram width limit")
      ->default_val(64);
  solve->add_option("--time-limit", time_limit, "Seconds, 0 = unlimited");
  solve->add_option("--parallelism", ecfg.parallelism,
                    "Scenario LP worker threads")
      ->default_val(1);
  solve->add_option("--tolerance", tolerance, "Convergence tolerance");
  solve->add_option("--log", log_format, "Progress log style")
      ->check(CLI::IsMember({"text", "csv"}));
  solve->add_option("--out-report", report_path, "Write a JSON report here");
  solve->add_option("--dump-dd", dot_path,
                    "Write the root exact diagram in DOT form before solving");

  // validate
  auto* val = app.add_subcommand("validate", "Check instance invariants");
  std::string val_path;
  val->add_option("instance", val_path, "Instance file")->required();

  // stats
  auto* st = app.add_subcommand("stats", "Print an instance summary");
  std::string st_path;
  st->add_option("instance", st_path, "Instance file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 64;
  }

  const int verbosity = log_level();
  try {
    if (gen->parsed()) {
      nsnm::Instance inst = nsnm::generate(gcfg);
      if (gen_out.empty()) {
        std::cout << nsnm::instance_to_json(inst).dump(2) << "\n";
      } else {
        nsnm::write_instance(inst, gen_out);
        if (verbosity > 0)
          std::cout << "wrote " << gen_out << " (" << inst.network.num_nodes()
                    << " nodes, " << inst.network.num_arcs() << " arcs, "
                    << inst.scenarios.size() << " scenarios)\n";
      }
      return 0;
    }

    if (val->parsed()) {
      nsnm::Instance inst = nsnm::read_instance(val_path);
      auto violations = nsnm::validate(inst);
      for (const auto& v : violations) std::cout << "violation: " << v << "\n";
      if (violations.empty() && verbosity > 0) std::cout << "ok\n";
      return violations.empty() ? 0 : 64;
    }

    if (st->parsed()) {
      nsnm::Instance inst = nsnm::read_instance(st_path);
      const nsnm::Network& net = inst.network;
      int supply = 0, demand = 0, interior = 0;
      for (auto r : net.roles) {
        if (r == nsnm::NodeRole::Supply) ++supply;
        if (r == nsnm::NodeRole::Demand) ++demand;
        if (r == nsnm::NodeRole::Interior) ++interior;
      }
      nsnm::NsnmIndexing idx = nsnm::make_indexing(net);
      std::cout << "nodes: " << net.num_nodes() << " (supply " << supply
                << ", demand " << demand << ", interior " << interior
                << ", nsnm " << net.nsnm.size() << ")\n"
                << "arcs: " << net.num_arcs() << "\n"
                << "scenarios: " << inst.scenarios.size() << "\n"
                << "gamma: " << inst.gamma << "\n"
                << "w layers: " << idx.total_w_layers() << "\n";
      return 0;
    }

    // solve
    nsnm::Instance inst = nsnm::read_instance(solve_path);
    auto violations = nsnm::validate(inst);
    if (!violations.empty()) {
      for (const auto& v : violations) std::cerr << "violation: " << v << "\n";
      return 64;
    }

    if (!dot_path.empty()) {
      nsnm::NsnmIndexing idx = nsnm::make_indexing(inst.network);
      nsnm::dd::Diagram d =
          nsnm::dd::build_exact(idx.diagram_shape(), inst.gamma);
      std::ofstream out(dot_path);
      d.to_dot(out);
    }

    nsnm::SolveReport rep;
    if (method == "enum") {
      nsnm::oracle::ExhaustiveConfig ocfg;
      ocfg.parallelism = ecfg.parallelism;
      rep = nsnm::oracle::solve_exhaustive(inst, ocfg);
    } else {
      ecfg.time_limit_seconds = time_limit;
      ecfg.gap_tolerance = tolerance;
      bool csv = log_format == "csv";
      if (csv)
        std::cout << "node,phase,iteration,dd_bound,incumbent,queue,cut\n";
      nsnm::engine::ProgressFn progress;
      if (csv || verbosity > 1) {
        progress = [csv](const nsnm::engine::ProgressEvent& ev) {
          if (csv)
            std::cout << ev.node << "," << ev.phase << "," << ev.iteration
                      << "," << ev.dd_bound << "," << ev.incumbent << ","
                      << ev.queue_size << "," << ev.cut << "\n";
          else
            std::cerr << "[node " << ev.node << " " << ev.phase << " #"
                      << ev.iteration << "] bound=" << ev.dd_bound
                      << " incumbent=" << ev.incumbent << " cut=" << ev.cut
                      << "\n";
        };
      }
      rep = nsnm::engine::solve(inst, ecfg, progress);
    }

    if (!report_path.empty()) {
      std::ofstream out(report_path);
      out << report_to_json(rep).dump(2) << "\n";
    }

    switch (rep.termination) {
      case nsnm::Termination::Infeasible:
        std::cout << "infeasible\n";
        return 1;
      case nsnm::Termination::TimeLimit:
        std::cout << "time limit reached; best value " << rep.value << "\n";
        return 2;
      case nsnm::Termination::Optimal:
        break;
    }
    std::cout << "optimal value: " << rep.value << "\n";
    std::cout << "matching:\n";
    print_matching(inst, rep);
    for (size_t k = 0; k < rep.flows.size(); ++k) {
      double total = 0.0;
      for (double f : rep.flows[k].flow) total += f;
      std::cout << "scenario " << k << ": objective " << rep.flows[k].objective
                << ", total flow " << total << "\n";
    }
    if (verbosity > 0)
      std::cout << "nodes " << rep.stats.search_nodes << ", cuts "
                << rep.stats.optimality_cuts << "+"
                << rep.stats.feasibility_cuts << ", lp solves "
                << rep.stats.lp_solves << ", " << rep.stats.wall_seconds
                << " s\n";
    return 0;
  } catch (const nsnm::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 64;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 64;
  }
}
