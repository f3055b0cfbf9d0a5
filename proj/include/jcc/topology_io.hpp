#pragma once

#include <json.hpp>

#include <string>

#include "jcc/model.hpp"

namespace jcc {

// JSON encoding of topologies, global parameters and plans.
//
// Topology:
//   {"nodes": [{"id": 0, "parent": null, "eps_rx": 5e-8, "eps_tx": 2e-7,
//               "eps_cp": 8e-8, "cache_capacity": 120, "data_volume": 0,
//               "request_count": 0}, ...],
//    "edge_latency": 0.6 | {"default": 0.6,
//                           "edges": [{"parent": 0, "child": 1, "latency": 0.6}]}}
// Globals:
//   {"w_ca": 1.88e-6, "period": 10, "energy_budget": 200}
// Unbounded capacities and budgets are written as the string "inf".

nlohmann::json to_json(const TopologySpec& spec);
TopologySpec topology_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GlobalParams& g);
GlobalParams globals_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CompressionPlan& plan);
CompressionPlan compression_plan_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CachePlan& plan);
CachePlan cache_plan_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace jcc
