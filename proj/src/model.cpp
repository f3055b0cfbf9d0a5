#include "jcc/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <string>
#include <unordered_map>

namespace jcc {

namespace {

bool nonneg_finite(double x) { return std::isfinite(x) && x >= 0.0; }

void check_params(int id, const NodeParams& p, bool is_leaf) {
  if (!nonneg_finite(p.eps_rx) || !nonneg_finite(p.eps_tx) || !nonneg_finite(p.eps_cp)) {
    throw Error(ErrorCode::InvalidParameter, "node " + std::to_string(id) + ": energies must be finite and >= 0");
  }
  if (std::isnan(p.cache_capacity) || p.cache_capacity < 0.0) {
    throw Error(ErrorCode::InvalidParameter, "node " + std::to_string(id) + ": cache_capacity must be >= 0");
  }
  if (is_leaf) {
    if (!std::isfinite(p.data_volume) || p.data_volume <= 0.0 || p.request_count < 1) {
      throw Error(ErrorCode::InvalidParameter,
                  "leaf " + std::to_string(id) + ": data_volume must be > 0 and request_count >= 1");
    }
  } else if (p.data_volume != 0.0 || p.request_count != 0) {
    throw Error(ErrorCode::NonLeafWithData, "node " + std::to_string(id) + " has children but carries data or requests");
  }
}

}  // namespace

void validate(const GlobalParams& g) {
  if (!(std::isfinite(g.w_ca) && g.w_ca > 0.0)) throw Error(ErrorCode::InvalidParameter, "w_ca must be > 0");
  if (!(std::isfinite(g.period) && g.period > 0.0)) throw Error(ErrorCode::InvalidParameter, "period must be > 0");
  // A zero budget is admitted so that the infeasible case can be expressed.
  if (std::isnan(g.energy_budget) || g.energy_budget < 0.0) {
    throw Error(ErrorCode::InvalidParameter, "energy_budget must be >= 0");
  }
}

double TreeNetwork::edge_latency(NodeId parent, NodeId child) const {
  auto it = latency_.find({parent, child});
  if (it == latency_.end()) {
    throw Error(ErrorCode::MissingLatency, "no edge " + std::to_string(parent) + "->" + std::to_string(child));
  }
  return it->second;
}

std::optional<LeafIndex> TreeNetwork::leaf_index(NodeId v) const {
  auto it = std::lower_bound(leaves_.begin(), leaves_.end(), v);
  if (it == leaves_.end() || *it != v) return std::nullopt;
  return static_cast<LeafIndex>(it - leaves_.begin());
}

std::size_t TreeNetwork::checked(LeafIndex k) const {
  if (k < 0 || k >= num_leaves()) throw Error(ErrorCode::UnknownLeaf, "leaf index " + std::to_string(k));
  return static_cast<std::size_t>(k);
}

TopologySpec TreeNetwork::to_spec() const {
  TopologySpec spec;
  for (std::size_t v = 0; v < params_.size(); ++v) {
    NodeSpec n;
    n.id = static_cast<int>(v);
    if (parent_[v] >= 0) n.parent = parent_[v];
    n.params = params_[v];
    spec.nodes.push_back(n);
  }
  for (const auto& [edge, l] : latency_) spec.edge_latencies.push_back({edge.first, edge.second, l});
  return spec;
}

bool TreeNetwork::operator==(const TreeNetwork& o) const {
  return params_ == o.params_ && parent_ == o.parent_ && children_ == o.children_ && latency_ == o.latency_ &&
         leaves_ == o.leaves_ && paths_ == o.paths_;
}

TreeNetwork build_tree(const TopologySpec& spec) {
  const std::size_t n = spec.nodes.size();
  if (n == 0) throw Error(ErrorCode::InvalidParameter, "topology has no nodes");

  std::unordered_map<int, std::size_t> slot;
  for (std::size_t i = 0; i < n; ++i) {
    if (!slot.emplace(spec.nodes[i].id, i).second) {
      throw Error(ErrorCode::InvalidParameter, "duplicate node id " + std::to_string(spec.nodes[i].id));
    }
  }

  std::vector<std::size_t> roots;
  for (const auto& node : spec.nodes) {
    if (!node.parent) {
      roots.push_back(slot.at(node.id));
      continue;
    }
    if (*node.parent == node.id) throw Error(ErrorCode::CycleDetected, "node " + std::to_string(node.id) + " is its own parent");
    if (!slot.contains(*node.parent)) {
      throw Error(ErrorCode::OrphanNode,
                  "node " + std::to_string(node.id) + " references missing parent " + std::to_string(*node.parent));
    }
  }
  if (roots.size() > 1) throw Error(ErrorCode::MultipleRoots, std::to_string(roots.size()) + " nodes have no parent");
  // Every node has a parent, so following parent links must revisit a node.
  if (roots.empty()) throw Error(ErrorCode::CycleDetected, "no root node");

  // Re-index: keep labels when they already are 0..n-1 with the root at 0,
  // otherwise root -> 0 and the rest in ascending label order.
  std::vector<int> labels;
  for (const auto& node : spec.nodes) labels.push_back(node.id);
  std::sort(labels.begin(), labels.end());
  const int root_label = spec.nodes[roots.front()].id;
  std::unordered_map<int, NodeId> new_id;
  bool identity = root_label == 0 && labels.front() == 0 && labels.back() == static_cast<int>(n) - 1;
  if (identity) {
    for (int l : labels) new_id[l] = l;
  } else {
    new_id[root_label] = 0;
    NodeId next = 1;
    for (int l : labels) {
      if (l != root_label) new_id[l] = next++;
    }
  }

  TreeNetwork net;
  net.params_.resize(n);
  net.parent_.assign(n, -1);
  net.children_.assign(n, {});
  net.depth_.assign(n, -1);
  net.through_.assign(n, {});
  for (const auto& node : spec.nodes) {
    const NodeId v = new_id.at(node.id);
    net.params_[static_cast<std::size_t>(v)] = node.params;
    if (node.parent) {
      const NodeId p = new_id.at(*node.parent);
      net.parent_[static_cast<std::size_t>(v)] = p;
      net.children_[static_cast<std::size_t>(p)].push_back(v);
    }
  }
  for (auto& c : net.children_) std::sort(c.begin(), c.end());

  // Breadth-first from the sink; anything unreached sits on a parent cycle.
  std::deque<NodeId> queue{0};
  net.depth_[0] = 0;
  std::size_t reached = 0;
  while (!queue.empty()) {
    NodeId v = queue.front();
    queue.pop_front();
    ++reached;
    for (NodeId c : net.children_[static_cast<std::size_t>(v)]) {
      net.depth_[static_cast<std::size_t>(c)] = net.depth_[static_cast<std::size_t>(v)] + 1;
      queue.push_back(c);
    }
  }
  if (reached != n) throw Error(ErrorCode::CycleDetected, std::to_string(n - reached) + " nodes unreachable from the root");

  for (std::size_t v = 0; v < n; ++v) {
    check_params(static_cast<int>(v), net.params_[v], net.children_[v].empty() && n > 1);
  }
  if (n == 1) throw Error(ErrorCode::InvalidParameter, "a tree needs at least one leaf below the sink");

  // Edge latencies, explicit entries taking precedence over the default.
  std::map<std::pair<NodeId, NodeId>, double> explicit_latency;
  for (const auto& e : spec.edge_latencies) {
    if (!new_id.contains(e.parent) || !new_id.contains(e.child)) {
      throw Error(ErrorCode::InvalidParameter, "latency entry for unknown node");
    }
    const NodeId p = new_id.at(e.parent);
    const NodeId c = new_id.at(e.child);
    if (net.parent_[static_cast<std::size_t>(c)] != p) {
      throw Error(ErrorCode::InvalidParameter,
                  "latency entry " + std::to_string(e.parent) + "->" + std::to_string(e.child) + " is not an edge");
    }
    explicit_latency[{p, c}] = e.latency;
  }
  for (std::size_t c = 1; c < n; ++c) {
    const NodeId p = net.parent_[c];
    const std::pair<NodeId, NodeId> edge{p, static_cast<NodeId>(c)};
    double l;
    if (auto it = explicit_latency.find(edge); it != explicit_latency.end()) {
      l = it->second;
    } else if (spec.default_latency) {
      l = *spec.default_latency;
    } else {
      throw Error(ErrorCode::MissingLatency, "edge " + std::to_string(p) + "->" + std::to_string(c));
    }
    if (!(std::isfinite(l) && l > 0.0)) {
      throw Error(ErrorCode::MissingLatency, "edge " + std::to_string(p) + "->" + std::to_string(c) + " latency must be > 0");
    }
    net.latency_[edge] = l;
  }

  net.offsets_.push_back(0);
  for (std::size_t v = 0; v < n; ++v) {
    if (!net.children_[v].empty()) continue;
    const NodeId leaf = static_cast<NodeId>(v);
    std::vector<NodeId> path;
    for (NodeId x = leaf; x >= 0; x = net.parent_[static_cast<std::size_t>(x)]) path.push_back(x);
    std::reverse(path.begin(), path.end());
    std::vector<double> hops;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) hops.push_back(net.latency_.at({path[i], path[i + 1]}));
    const LeafIndex k = static_cast<LeafIndex>(net.leaves_.size());
    for (NodeId x : path) net.through_[static_cast<std::size_t>(x)].push_back(k);
    net.leaves_.push_back(leaf);
    net.offsets_.push_back(net.offsets_.back() + static_cast<Index>(path.size()));
    net.paths_.push_back(std::move(path));
    net.hop_latency_.push_back(std::move(hops));
  }
  return net;
}

TreeNetwork uniform_binary_tree(int depth, const NodeParams& leaf, double latency) {
  if (depth < 1) throw Error(ErrorCode::InvalidParameter, "depth must be >= 1");
  const int n = (1 << (depth + 1)) - 1;
  const int first_leaf = (1 << depth) - 1;
  NodeParams inner = leaf;
  inner.data_volume = 0.0;
  inner.request_count = 0;
  TopologySpec spec;
  spec.default_latency = latency;
  for (int v = 0; v < n; ++v) {
    NodeSpec node;
    node.id = v;
    if (v > 0) node.parent = (v - 1) / 2;
    node.params = v >= first_leaf ? leaf : inner;
    spec.nodes.push_back(node);
  }
  return build_tree(spec);
}

// ---------------------------------------------------------------------------

CompressionPlan CompressionPlan::uniform(const TreeNetwork& net, double value) {
  return {Eigen::VectorXd::Constant(net.plan_size(), value)};
}

CachePlan CachePlan::empty(const TreeNetwork& net, CacheMode mode) {
  return {Eigen::VectorXd::Zero(net.plan_size()), mode};
}

CachePlan CachePlan::at_positions(const TreeNetwork& net, std::span<const int> positions) {
  if (static_cast<int>(positions.size()) != net.num_leaves()) {
    throw Error(ErrorCode::InvalidPlan, "one cache position per leaf expected");
  }
  CachePlan plan = empty(net);
  for (LeafIndex k = 0; k < net.num_leaves(); ++k) {
    const int p = positions[static_cast<std::size_t>(k)];
    if (p < -1 || p > net.height(k)) throw Error(ErrorCode::InvalidPlan, "cache position out of path");
    if (p >= 0) plan.b[net.offset(k) + p] = 1.0;
  }
  return plan;
}

int CachePlan::position(const TreeNetwork& net, LeafIndex k) const {
  const auto seg = leaf(net, k);
  for (Index i = 0; i < seg.size(); ++i) {
    if (seg[i] > 0.5) return static_cast<int>(i);
  }
  return -1;
}

void validate(const TreeNetwork& net, const CompressionPlan& plan) {
  if (plan.delta.size() != net.plan_size()) throw Error(ErrorCode::InvalidPlan, "compression plan size mismatch");
  for (Index e = 0; e < plan.delta.size(); ++e) {
    const double d = plan.delta[e];
    if (!(d >= kDeltaMin && d <= 1.0)) {
      throw Error(ErrorCode::DeltaOutOfRange, "delta entry " + std::to_string(e) + " = " + std::to_string(d));
    }
  }
}

void validate(const TreeNetwork& net, const CachePlan& plan, double tol) {
  if (plan.b.size() != net.plan_size()) throw Error(ErrorCode::InvalidPlan, "cache plan size mismatch");
  for (Index e = 0; e < plan.b.size(); ++e) {
    const double x = plan.b[e];
    if (!(x >= -tol && x <= 1.0 + tol)) throw Error(ErrorCode::InvalidPlan, "cache entry outside [0, 1]");
    if (plan.mode == CacheMode::Binary && x != 0.0 && x != 1.0) {
      throw Error(ErrorCode::InvalidPlan, "binary cache plan holds a fractional entry");
    }
  }
  for (LeafIndex k = 0; k < net.num_leaves(); ++k) {
    if (plan.leaf(net, k).sum() > 1.0 + tol) {
      throw Error(ErrorCode::InvalidPlan, "leaf " + std::to_string(k) + " cached more than once");
    }
  }
}

}  // namespace jcc
