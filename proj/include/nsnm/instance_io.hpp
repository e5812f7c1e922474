#pragma once

// Instance (de)serialisation.  One JSON document per instance; the schema is
// documented in docs/instance_format.md and carries an explicit version so
// future changes stay detectable.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "model.hpp"

namespace nsnm {

inline constexpr int kInstanceFormatVersion = 1;

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

inline NodeRole role_from_string(const std::string& s) {
  if (s == "source") return NodeRole::Source;
  if (s == "sink") return NodeRole::Sink;
  if (s == "artificial") return NodeRole::Artificial;
  if (s == "supply") return NodeRole::Supply;
  if (s == "demand") return NodeRole::Demand;
  if (s == "interior") return NodeRole::Interior;
  throw ParseError("unknown node role '" + s + "'");
}

inline nlohmann::ordered_json instance_to_json(const Instance& inst) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["format"] = "sgufp-instance";
  j["version"] = kInstanceFormatVersion;
  ordered_json nodes = ordered_json::array();
  for (NodeId v = 0; v < inst.network.num_nodes(); ++v)
    nodes.push_back({{"id", v}, {"role", to_string(inst.network.roles[v])}});
  j["nodes"] = nodes;
  j["nsnm"] = inst.network.nsnm;
  ordered_json arcs = ordered_json::array();
  for (const Arc& a : inst.network.arcs) {
    ordered_json ja;
    ja["tail"] = a.tail;
    ja["head"] = a.head;
    ja["lower"] = a.lower;
    if (std::isfinite(a.upper))
      ja["upper"] = a.upper;
    else
      ja["upper"] = nullptr;  // uncapped artificial-supply arc
    ja["reward"] = a.reward;
    arcs.push_back(ja);
  }
  j["arcs"] = arcs;
  ordered_json scenarios = ordered_json::array();
  for (const Scenario& sc : inst.scenarios.scenarios) {
    ordered_json js;
    js["probability"] = sc.probability;
    ordered_json dem = ordered_json::array();
    for (const auto& [node, value] : sc.demand)
      dem.push_back({{"node", node}, {"value", value}});
    js["demand"] = dem;
    scenarios.push_back(js);
  }
  j["scenarios"] = scenarios;
  j["gamma"] = inst.gamma;
  return j;
}

inline Instance instance_from_json(const nlohmann::json& j) {
  Instance inst;
  try {
    if (j.value("format", std::string()) != "sgufp-instance")
      throw ParseError("missing or wrong 'format' marker");
    int version = j.at("version").get<int>();
    if (version != kInstanceFormatVersion)
      throw ParseError("unsupported schema version " + std::to_string(version));

    const auto& nodes = j.at("nodes");
    inst.network.roles.resize(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) {
      int id = nodes[i].at("id").get<int>();
      if (id < 0 || id >= static_cast<int>(nodes.size()))
        throw ParseError("node id " + std::to_string(id) +
                         " not contiguous from 0");
      inst.network.roles[id] =
          role_from_string(nodes[i].at("role").get<std::string>());
    }

    for (const auto& v : j.at("nsnm"))
      inst.network.nsnm.push_back(v.get<int>());
    std::sort(inst.network.nsnm.begin(), inst.network.nsnm.end());

    for (size_t i = 0; i < j.at("arcs").size(); ++i) {
      const auto& ja = j.at("arcs")[i];
      Arc a;
      a.tail = ja.at("tail").get<int>();
      a.head = ja.at("head").get<int>();
      a.lower = ja.at("lower").get<double>();
      a.upper = ja.at("upper").is_null() ? kInf : ja.at("upper").get<double>();
      a.reward = ja.at("reward").get<double>();
      if (a.lower < 0)
        throw ParseError("arc " + std::to_string(i) + ": negative lower bound");
      if (!ja.at("upper").is_null() && a.upper < 0)
        throw ParseError("arc " + std::to_string(i) + ": negative capacity");
      if (a.lower > a.upper)
        throw ParseError("arc " + std::to_string(i) + ": lower above upper");
      inst.network.arcs.push_back(a);
    }

    for (size_t k = 0; k < j.at("scenarios").size(); ++k) {
      const auto& js = j.at("scenarios")[k];
      Scenario sc;
      sc.probability = js.at("probability").get<double>();
      if (sc.probability < 0 || sc.probability > 1)
        throw ParseError("scenario " + std::to_string(k) +
                         ": probability outside [0,1]");
      for (const auto& d : js.at("demand")) {
        double value = d.at("value").get<double>();
        if (value < 0)
          throw ParseError("scenario " + std::to_string(k) +
                           ": negative demand");
        sc.demand[d.at("node").get<int>()] = value;
      }
      inst.scenarios.scenarios.push_back(std::move(sc));
    }

    inst.gamma = j.at("gamma").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed instance document: ") + e.what());
  }
  return inst;
}

inline void write_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << instance_to_json(inst).dump(2) << "\n";
}

inline Instance read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON in ") + path + ": " + e.what());
  }
  return instance_from_json(j);
}

}  // namespace nsnm
