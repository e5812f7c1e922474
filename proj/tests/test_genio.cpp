#include <cstdio>
#include <filesystem>

#include <catch_amalgamated.hpp>

#include "nsnm/generator.hpp"
#include "nsnm/instance_io.hpp"

using namespace nsnm;

namespace {

bool same_instance(const Instance& a, const Instance& b) {
  if (a.network.roles != b.network.roles) return false;
  if (a.network.nsnm != b.network.nsnm) return false;
  if (a.network.num_arcs() != b.network.num_arcs()) return false;
  for (int i = 0; i < a.network.num_arcs(); ++i) {
    const Arc &x = a.network.arcs[i], &y = b.network.arcs[i];
    bool both_inf = !std::isfinite(x.upper) && !std::isfinite(y.upper);
    if (x.tail != y.tail || x.head != y.head || x.lower != y.lower ||
        x.reward != y.reward || (!both_inf && x.upper != y.upper))
      return false;
  }
  if (a.scenarios.size() != b.scenarios.size()) return false;
  for (int k = 0; k < a.scenarios.size(); ++k) {
    if (a.scenarios.scenarios[k].probability !=
        b.scenarios.scenarios[k].probability)
      return false;
    if (a.scenarios.scenarios[k].demand != b.scenarios.scenarios[k].demand)
      return false;
  }
  return a.gamma == b.gamma;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("role counts follow the 10/30/50 shares", "[genio]") {
  GeneratorConfig cfg;
  cfg.nodes = 40;
  cfg.scenarios = 3;
  cfg.seed = 1;
  Instance inst = generate(cfg);
  int supply = 0, demand = 0;
  for (NodeRole r : inst.network.roles) {
    if (r == NodeRole::Supply) ++supply;
    if (r == NodeRole::Demand) ++demand;
  }
  REQUIRE(supply == 4);
  REQUIRE(demand == 12);
  REQUIRE(inst.network.nsnm.size() == 20);
  REQUIRE(inst.network.num_nodes() == 43);  // base plus source/sink/artificial
  REQUIRE(validate(inst).empty());
}

TEST_CASE("identical seeds give byte-identical instances", "[genio]") {
  GeneratorConfig cfg;
  cfg.nodes = 20;
  cfg.scenarios = 5;
  cfg.seed = 42;
  std::string a = instance_to_json(generate(cfg)).dump();
  std::string b = instance_to_json(generate(cfg)).dump();
  REQUIRE(a == b);
  cfg.seed = 43;
  REQUIRE(a != instance_to_json(generate(cfg)).dump());
}

TEST_CASE("generated values stay inside the stated intervals", "[genio]") {
  for (unsigned long seed = 1; seed <= 5; ++seed) {
    GeneratorConfig cfg;
    cfg.nodes = 30;
    cfg.scenarios = 10;
    cfg.seed = seed;
    Instance inst = generate(cfg);
    const Network& net = inst.network;
    NodeId s = net.source(), s0 = net.artificial(), t = net.sink();
    for (const Arc& a : net.arcs) {
      if (a.tail == s) {
        REQUIRE((a.upper >= 100 && a.upper <= 600));
        REQUIRE((a.reward >= 5 && a.reward <= 10));
      } else if (a.tail == s0) {
        REQUIRE(!std::isfinite(a.upper));
        REQUIRE((a.reward >= -10 && a.reward <= -5));
      } else if (a.head == t) {
        REQUIRE(a.reward == 0.0);
      } else {
        REQUIRE((a.upper >= 100 && a.upper <= 300));
        REQUIRE((a.reward >= -2 && a.reward <= 2));
      }
      REQUIRE(a.reward == std::floor(a.reward));
    }
    for (const Scenario& sc : inst.scenarios.scenarios)
      for (const auto& [node, d] : sc.demand) {
        REQUIRE((d >= 100 && d <= 200));
        REQUIRE(d == std::floor(d));
      }
    REQUIRE(validate(inst).empty());
  }
}

TEST_CASE("write/read round-trips equal instances", "[genio]") {
  for (unsigned long seed = 1; seed <= 10; ++seed) {
    GeneratorConfig cfg;
    cfg.nodes = 12;
    cfg.scenarios = 2;
    cfg.seed = seed;
    Instance inst = generate(cfg);
    std::string path = temp_path("nsnm_roundtrip.json");
    write_instance(inst, path);
    Instance back = read_instance(path);
    REQUIRE(same_instance(inst, back));
    std::remove(path.c_str());
  }
}

TEST_CASE("documented example parses to the documented object", "[genio]") {
  Instance inst = read_instance(std::string(NSNM_SOURCE_DIR) +
                                "/docs/example_instance.json");
  REQUIRE(inst.network.num_nodes() == 8);
  REQUIRE(inst.network.roles[5] == NodeRole::Source);
  REQUIRE(inst.network.roles[6] == NodeRole::Artificial);
  REQUIRE(inst.network.roles[7] == NodeRole::Sink);
  REQUIRE(inst.network.nsnm == std::vector<NodeId>{1});
  REQUIRE(inst.network.num_arcs() == 10);
  REQUIRE(!std::isfinite(inst.network.arcs[8].upper));
  REQUIRE(inst.scenarios.size() == 2);
  REQUIRE(inst.scenarios.scenarios[1].demand.at(3) == 160.0);
  REQUIRE(inst.gamma == 3930.0);
  REQUIRE(validate(inst).empty());
  REQUIRE(compute_gamma(inst) == 3930.0);
}

TEST_CASE("parse-level rejections carry diagnostics", "[genio]") {
  auto parse = [](const std::string& body) {
    return instance_from_json(nlohmann::json::parse(body));
  };
  // Negative capacity.
  REQUIRE_THROWS_AS(
      parse(R"({"format":"sgufp-instance","version":1,
        "nodes":[{"id":0,"role":"source"}],"nsnm":[],
        "arcs":[{"tail":0,"head":0,"lower":0,"upper":-5,"reward":0}],
        "scenarios":[],"gamma":1})"),
      ParseError);
  // Wrong schema version.
  REQUIRE_THROWS_AS(parse(R"({"format":"sgufp-instance","version":99,
        "nodes":[],"nsnm":[],"arcs":[],"scenarios":[],"gamma":1})"),
                    ParseError);
  // Missing fields.
  REQUIRE_THROWS_AS(parse(R"({"format":"sgufp-instance","version":1})"),
                    ParseError);
  // Not an instance document at all.
  REQUIRE_THROWS_AS(parse(R"({"hello":"world"})"), ParseError);
}
