#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "dyann/activation.hpp"

namespace dyann {

/// Position of a node: layer order for layerindex, list order (head = 0)
/// for nodeindex.
struct NodeAddress {
  std::size_t layerindex = 0;
  std::size_t nodeindex = 0;

  friend auto operator<=>(const NodeAddress&, const NodeAddress&) = default;
};

std::string to_string(const NodeAddress& address);

/// Stable handle to a node's storage slot. Unlike NodeAddress it does not
/// shift when nodes or layers are inserted; it is invalidated only when the
/// node itself is swept.
struct NodeId {
  std::uint32_t value = 0;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

class Network;

class Edge {
 public:
  Edge(double w, NodeId target) : weight(w), target_(target) {}

  double weight;
  NodeId target() const noexcept { return target_; }

 private:
  NodeId target_;
};

/// A node's attributes are plain data mutated by the forward and backward
/// passes. The edge list is owned by the network so that topology
/// invariants cannot be bypassed; weights remain writable.
class Node {
 public:
  double bias = 0.0;
  double sum = 0.0;      // running input total, reset after each forward pass
  double pastsum = 0.0;  // sum as it was just before the reset
  double actvalue = 0.0;
  double delta = 0.0;
  ActivationKind actfunction = ActivationKind::Linear;
  bool markedfordeletion = false;
  NodeAddress address;  // valid as of the last assign_indices()

  std::span<Edge> edges() noexcept { return edges_; }
  std::span<const Edge> edges() const noexcept { return edges_; }

 private:
  friend class Network;
  std::vector<Edge> edges_;
};

struct Layer {
  std::vector<NodeId> nodes;  // front is the head of the node list
};

struct SweepReport {
  std::size_t edges_removed = 0;
  std::size_t nodes_removed = 0;
  std::size_t layers_removed = 0;

  friend bool operator==(const SweepReport&, const SweepReport&) = default;
};

/// Layered graph with forward (possibly skip) edges. Layer 0 is the input
/// layer and the last layer is the output layer; both always exist.
///
/// Not internally synchronized: every mutation, including a forward pass,
/// needs exclusive access.
class Network {
 public:
  Network(std::size_t input_size, std::size_t output_size, OutputHead head);

  const OutputHead& head() const noexcept { return head_; }

  std::size_t layer_count() const noexcept { return layers_.size(); }
  std::span<const Layer> layers() const noexcept { return layers_; }
  const Layer& layer(std::size_t index) const;
  const Layer& input_layer() const noexcept { return layers_.front(); }
  const Layer& output_layer() const noexcept { return layers_.back(); }
  std::vector<std::size_t> layer_sizes() const;

  Node& node(NodeId id);
  const Node& node(NodeId id) const;
  bool contains(NodeId id) const noexcept;

  /// Resolves an address against the current layer/list positions.
  /// Throws UnknownNode.
  NodeId node_at(NodeAddress address) const;

  std::size_t node_count() const noexcept;
  std::size_t edge_count() const noexcept { return edge_pairs_.size(); }
  bool has_edge(NodeId source, NodeId target) const;

  // Surgery.

  /// Inserts an empty layer so that it occupies `position`; valid positions
  /// are 1..layer_count()-1. Returns the position.
  std::size_t insert_layer(std::size_t position);

  /// Inserts an edgeless node at the head of a layer's node list. Input
  /// nodes must be linear with zero bias.
  NodeAddress insert_node(std::size_t layerindex, double bias, ActivationKind act);

  /// Appends an edge to the source's edge list. The reference is valid
  /// until the next structural change.
  Edge& add_edge(NodeAddress source, NodeAddress target, double weight);

  void set_activation(NodeAddress address, ActivationKind act);

  /// Internal nodes only.
  void mark_for_deletion(NodeAddress address);

  /// Removes every edge into a marked node, then the marked nodes, then
  /// internal layers left empty. Clears all marks.
  SweepReport sweep_deletions();

  /// Removes every edge with |weight| < threshold.
  std::size_t prune_edges(double threshold);

  /// Writes each node's current position into Node::address.
  void assign_indices();

  /// Empty when every topology invariant holds, otherwise one message per
  /// violation.
  std::vector<std::string> check_invariants() const;

 private:
  NodeId allocate_node();
  void release_node(NodeId id);
  static std::uint64_t pair_key(NodeId source, NodeId target) noexcept {
    return (std::uint64_t{source.value} << 32) | target.value;
  }

  OutputHead head_;
  std::vector<Layer> layers_;
  std::vector<std::optional<Node>> slots_;
  std::vector<NodeId> free_slots_;
  std::unordered_set<std::uint64_t> edge_pairs_;
};

}  // namespace dyann
