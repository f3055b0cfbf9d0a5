#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "jcc/error.hpp"

namespace jcc {

using NodeId = int;
using LeafIndex = int;
using Index = Eigen::Index;

// Smallest admissible data reduction rate. The compression cost term grows
// like 1/delta, so the floor keeps every evaluation finite.
inline constexpr double kDeltaMin = 1e-3;

struct NodeParams {
  double eps_rx = 0.0;          // J/bit received
  double eps_tx = 0.0;          // J/bit transmitted
  double eps_cp = 0.0;          // J/bit compressed
  double cache_capacity = 0.0;  // bits
  double data_volume = 0.0;     // bits generated (leaves only)
  int request_count = 0;        // requests per period (leaves only)

  bool operator==(const NodeParams&) const = default;
};

struct GlobalParams {
  double w_ca = 0.0;           // J/(bit*s)
  double period = 0.0;         // s
  double energy_budget = 0.0;  // J, may be +inf

  bool operator==(const GlobalParams&) const = default;
};

void validate(const GlobalParams& globals);

// Raw topology description, as read from a scenario file. Ids are arbitrary
// labels; build_tree re-indexes them so that the sink is node 0.
struct NodeSpec {
  int id = 0;
  std::optional<int> parent;
  NodeParams params;

  bool operator==(const NodeSpec&) const = default;
};

struct EdgeLatencySpec {
  int parent = 0;
  int child = 0;
  double latency = 0.0;

  bool operator==(const EdgeLatencySpec&) const = default;
};

struct TopologySpec {
  std::vector<NodeSpec> nodes;
  std::optional<double> default_latency;
  std::vector<EdgeLatencySpec> edge_latencies;  // overrides the default

  bool operator==(const TopologySpec&) const = default;
};

/// Rooted collection tree. Node 0 is the sink; leaves generate data and are
/// addressed by a dense leaf index in ascending node-id order. Immutable after
/// construction.
///
/// Per-leaf plan entries (compression rates, cache decisions) are laid out in
/// one flat vector: leaf k owns entries [offset(k), offset(k) + height(k) + 1),
/// entry i being path position i (0 = sink, height(k) = the leaf itself).
class TreeNetwork {
 public:
  std::size_t num_nodes() const { return params_.size(); }
  const NodeParams& node(NodeId v) const { return params_.at(static_cast<std::size_t>(v)); }
  NodeId parent(NodeId v) const { return parent_.at(static_cast<std::size_t>(v)); }
  std::span<const NodeId> children(NodeId v) const { return children_.at(static_cast<std::size_t>(v)); }
  int depth(NodeId v) const { return depth_.at(static_cast<std::size_t>(v)); }
  double edge_latency(NodeId parent, NodeId child) const;

  int num_leaves() const { return static_cast<int>(leaves_.size()); }
  std::span<const NodeId> leaves() const { return leaves_; }
  NodeId leaf_node(LeafIndex k) const { return leaves_.at(checked(k)); }
  std::optional<LeafIndex> leaf_index(NodeId v) const;

  /// h(k): number of hops from the sink to leaf k.
  int height(LeafIndex k) const { return static_cast<int>(paths_.at(checked(k)).size()) - 1; }
  std::span<const NodeId> path(LeafIndex k) const { return paths_.at(checked(k)); }
  /// Latency of hop i -> i+1 on leaf k's path.
  double hop_latency(LeafIndex k, int i) const { return hop_latency_.at(checked(k)).at(static_cast<std::size_t>(i)); }

  Index offset(LeafIndex k) const { return offsets_.at(checked(k)); }
  Index plan_size() const { return offsets_.back(); }

  /// Leaves whose path passes through v (C_v), ascending.
  std::span<const LeafIndex> leaves_through(NodeId v) const { return through_.at(static_cast<std::size_t>(v)); }

  /// Topology description that rebuilds an identical network.
  TopologySpec to_spec() const;

  bool operator==(const TreeNetwork& other) const;

 private:
  friend TreeNetwork build_tree(const TopologySpec& spec);

  std::size_t checked(LeafIndex k) const;

  std::vector<NodeParams> params_;
  std::vector<NodeId> parent_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<int> depth_;
  std::map<std::pair<NodeId, NodeId>, double> latency_;
  std::vector<NodeId> leaves_;
  std::vector<std::vector<NodeId>> paths_;
  std::vector<std::vector<double>> hop_latency_;
  std::vector<Index> offsets_;
  std::vector<std::vector<LeafIndex>> through_;
};

/// Validates a topology description and precomputes root-to-leaf paths.
/// Throws Error with CycleDetected, MultipleRoots, OrphanNode, MissingLatency,
/// NonLeafWithData or InvalidParameter.
TreeNetwork build_tree(const TopologySpec& spec);

/// Complete binary tree with 2^(depth+1)-1 nodes. Leaves take `leaf` params,
/// inner nodes the same energies and capacity with no data or requests.
TreeNetwork uniform_binary_tree(int depth, const NodeParams& leaf, double latency);

// ---------------------------------------------------------------------------
// Plans

struct CompressionPlan {
  Eigen::VectorXd delta;

  static CompressionPlan uniform(const TreeNetwork& net, double value);
  auto leaf(const TreeNetwork& net, LeafIndex k) const {
    return delta.segment(net.offset(k), net.height(k) + 1);
  }
  auto leaf(const TreeNetwork& net, LeafIndex k) {
    return delta.segment(net.offset(k), net.height(k) + 1);
  }
};

enum class CacheMode { Binary, Relaxed };

struct CachePlan {
  Eigen::VectorXd b;
  CacheMode mode = CacheMode::Binary;

  static CachePlan empty(const TreeNetwork& net, CacheMode mode = CacheMode::Binary);
  /// positions[k] is the cached path position of leaf k, or -1 for none.
  static CachePlan at_positions(const TreeNetwork& net, std::span<const int> positions);
  /// Cache position of leaf k in a binary plan, -1 if not cached.
  int position(const TreeNetwork& net, LeafIndex k) const;

  auto leaf(const TreeNetwork& net, LeafIndex k) const {
    return b.segment(net.offset(k), net.height(k) + 1);
  }
  auto leaf(const TreeNetwork& net, LeafIndex k) {
    return b.segment(net.offset(k), net.height(k) + 1);
  }
};

/// Throws InvalidPlan (size) or DeltaOutOfRange.
void validate(const TreeNetwork& net, const CompressionPlan& plan);
/// Throws InvalidPlan on size, range, integrality (binary mode) or a leaf
/// whose entries sum above 1 + tol.
void validate(const TreeNetwork& net, const CachePlan& plan, double tol = 1e-9);

}  // namespace jcc
