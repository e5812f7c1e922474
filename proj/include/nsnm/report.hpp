#pragma once

#include <string>
#include <vector>

#include "transform.hpp"

namespace nsnm {

enum class Termination { Optimal, TimeLimit, Infeasible };

struct SolveStats {
  long iterations = 0;        // cut-loop rounds across the whole search
  long search_nodes = 0;      // branch-and-bound nodes processed
  long optimality_cuts = 0;
  long feasibility_cuts = 0;
  long lp_solves = 0;
  int max_width = 0;
  double wall_seconds = 0.0;
};

struct ScenarioFlows {
  double objective = 0.0;
  std::vector<double> flow;  // per arc
};

struct SolveReport {
  Termination termination = Termination::Infeasible;
  double value = 0.0;
  WAssignment w;
  YAssignment y;
  std::vector<ScenarioFlows> flows;  // per scenario at the reported solution
  SolveStats stats;
};

}  // namespace nsnm
