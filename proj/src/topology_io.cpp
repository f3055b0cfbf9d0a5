#include "jcc/topology_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace jcc {

using nlohmann::json;

namespace {

json number(double x) {
  if (std::isinf(x) && x > 0) return "inf";
  return x;
}

double read_number(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  const json& v = j.at(key);
  if (v.is_string() && v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
  if (!v.is_number()) throw Error(ErrorCode::ParseError, std::string("field '") + key + "' is not a number");
  return v.get<double>();
}

double read_number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? read_number(j, key) : fallback;
}

Eigen::VectorXd read_vector(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "expected an array of numbers");
  Eigen::VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
  return v;
}

json write_vector(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

json to_json(const TopologySpec& spec) {
  json nodes = json::array();
  for (const auto& n : spec.nodes) {
    nodes.push_back({{"id", n.id},
                     {"parent", n.parent ? json(*n.parent) : json(nullptr)},
                     {"eps_rx", n.params.eps_rx},
                     {"eps_tx", n.params.eps_tx},
                     {"eps_cp", n.params.eps_cp},
                     {"cache_capacity", number(n.params.cache_capacity)},
                     {"data_volume", n.params.data_volume},
                     {"request_count", n.params.request_count}});
  }
  json latency = json::object();
  if (spec.default_latency) latency["default"] = *spec.default_latency;
  json edges = json::array();
  for (const auto& e : spec.edge_latencies) edges.push_back({{"parent", e.parent}, {"child", e.child}, {"latency", e.latency}});
  latency["edges"] = edges;
  return {{"nodes", nodes}, {"edge_latency", latency}};
}

TopologySpec topology_from_json(const json& j) {
  try {
    TopologySpec spec;
    for (const auto& n : j.at("nodes")) {
      NodeSpec node;
      node.id = n.at("id").get<int>();
      if (n.contains("parent") && !n.at("parent").is_null()) node.parent = n.at("parent").get<int>();
      node.params.eps_rx = read_number(n, "eps_rx");
      node.params.eps_tx = read_number(n, "eps_tx");
      node.params.eps_cp = read_number(n, "eps_cp");
      node.params.cache_capacity = read_number(n, "cache_capacity");
      node.params.data_volume = read_number_or(n, "data_volume", 0.0);
      node.params.request_count = n.value("request_count", 0);
      spec.nodes.push_back(node);
    }
    if (j.contains("edge_latency")) {
      const json& l = j.at("edge_latency");
      if (l.is_number()) {
        spec.default_latency = l.get<double>();
      } else {
        if (l.contains("default")) spec.default_latency = l.at("default").get<double>();
        for (const auto& e : l.value("edges", json::array())) {
          spec.edge_latencies.push_back({e.at("parent").get<int>(), e.at("child").get<int>(), e.at("latency").get<double>()});
        }
      }
    }
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

json to_json(const GlobalParams& g) {
  return {{"w_ca", g.w_ca}, {"period", g.period}, {"energy_budget", number(g.energy_budget)}};
}

GlobalParams globals_from_json(const json& j) {
  GlobalParams g;
  g.w_ca = read_number(j, "w_ca");
  g.period = read_number(j, "period");
  g.energy_budget = read_number(j, "energy_budget");
  return g;
}

json to_json(const CompressionPlan& plan) { return {{"delta", write_vector(plan.delta)}}; }

CompressionPlan compression_plan_from_json(const json& j) {
  try {
    return {read_vector(j.at("delta"))};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

json to_json(const CachePlan& plan) {
  return {{"mode", plan.mode == CacheMode::Binary ? "binary" : "relaxed"}, {"b", write_vector(plan.b)}};
}

CachePlan cache_plan_from_json(const json& j) {
  try {
    CachePlan plan;
    plan.b = read_vector(j.at("b"));
    plan.mode = j.value("mode", std::string("binary")) == "relaxed" ? CacheMode::Relaxed : CacheMode::Binary;
    return plan;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace jcc
