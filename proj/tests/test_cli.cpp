// End-to-end checks of the command-line tool via subprocess calls: the
// documented exit codes, the generate/validate/solve pipeline, and agreement
// between the two solve methods.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  std::cout << (ok ? "[ok]   " : "[FAIL] ") << what << "\n";
  if (!ok) ++failures;
}

struct RunResult {
  int code;
  std::string out;
};

RunResult run(const std::string& args) {
  std::string path =
      (std::filesystem::temp_directory_path() / "nsnm_cli_out.txt").string();
  std::string cmd = std::string(NSNM_CLI_PATH) + " " + args + " > " + path +
                    " 2>/dev/null";
  int raw = std::system(cmd.c_str());
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::remove(path.c_str());
  int code = (raw >= 0 && WIFEXITED(raw)) ? WEXITSTATUS(raw) : -1;
  return RunResult{code, ss.str()};
}

std::string first_value_line(const std::string& out) {
  std::istringstream ss(out);
  std::string line;
  while (std::getline(ss, line))
    if (line.rfind("optimal value:", 0) == 0) return line;
  return "";
}

std::string tmpfile(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

int main() {
  const std::string inst = tmpfile("nsnm_cli_instance.json");

  expect(run("").code == 64, "no subcommand is a usage error (64)");
  expect(run("generate --nodes 5").code == 64,
         "missing required flag is a usage error (64)");
  expect(run("solve /nonexistent.json").code == 64,
         "unreadable instance is an input error (64)");

  expect(run("generate --nodes 12 --scenarios 2 --seed 7 --out " + inst)
                 .code == 0,
         "generate succeeds");
  expect(run("validate " + inst).code == 0, "generated instance validates");
  expect(run("stats " + inst).code == 0, "stats prints a summary");

  RunResult dd = run("solve " + inst + " --method dd-bd --width-limit 4");
  RunResult en = run("solve " + inst + " --method enum");
  expect(dd.code == 0, "dd-bd solve exits 0");
  expect(en.code == 0, "enum solve exits 0");
  std::string v1 = first_value_line(dd.out), v2 = first_value_line(en.out);
  expect(!v1.empty() && v1 == v2,
         "both methods print the same optimal value (" + v1 + ")");

  RunResult csv =
      run("solve " + inst + " --method dd-bd --width-limit 4 --log csv");
  expect(csv.code == 0 && csv.out.find("node,phase,iteration") == 0,
         "csv log starts with its header");

  // Time limit: exit code 2.
  const std::string big = tmpfile("nsnm_cli_big.json");
  run("generate --nodes 40 --scenarios 10 --seed 1 --out " + big);
  RunResult tl = run("solve " + big +
                     " --method dd-bd --width-limit 2 --time-limit 0.02");
  expect(tl.code == 2, "time limit exits 2");

  // Infeasible instance: a no-split demand node with no backstop arc and
  // feeders too small for its demand; every matching fails.
  const std::string bad = tmpfile("nsnm_cli_infeasible.json");
  {
    std::ofstream f(bad);
    f << R"({"format":"sgufp-instance","version":1,
      "nodes":[{"id":0,"role":"supply"},{"id":1,"role":"demand"},
               {"id":2,"role":"source"},{"id":3,"role":"artificial"},
               {"id":4,"role":"sink"}],
      "nsnm":[1],
      "arcs":[{"tail":2,"head":0,"lower":0,"upper":50,"reward":5},
              {"tail":0,"head":1,"lower":0,"upper":50,"reward":1},
              {"tail":1,"head":4,"lower":0,"upper":0,"reward":0}],
      "scenarios":[{"probability":1.0,"demand":[{"node":1,"value":100}]}],
      "gamma":400})";
  }
  expect(run("validate " + bad).code == 0, "infeasible instance still validates");
  expect(run("solve " + bad + " --method dd-bd").code == 1,
         "infeasible instance exits 1");
  expect(run("solve " + bad + " --method enum").code == 1,
         "enum agrees the instance is infeasible");

  std::remove(inst.c_str());
  std::remove(big.c_str());
  std::remove(bad.c_str());

  if (failures) {
    std::cout << failures << " cli checks failed\n";
    return 1;
  }
  std::cout << "all cli checks passed\n";
  return 0;
}
