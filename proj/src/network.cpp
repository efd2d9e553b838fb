#include "dyann/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dyann/error.hpp"

namespace dyann {

std::string to_string(const NodeAddress& address) {
  return "(" + std::to_string(address.layerindex) + "," + std::to_string(address.nodeindex) + ")";
}

Network::Network(std::size_t input_size, std::size_t output_size, OutputHead head)
    : head_(head) {
  if (input_size == 0 || output_size == 0) {
    throw InvalidArgument("input and output layers need at least one node");
  }
  layers_.resize(2);
  for (std::size_t i = 0; i < input_size; ++i) {
    layers_.front().nodes.push_back(allocate_node());
  }
  for (std::size_t i = 0; i < output_size; ++i) {
    const NodeId id = allocate_node();
    node(id).actfunction = head_.node_activation();
    layers_.back().nodes.push_back(id);
  }
  assign_indices();
}

const Layer& Network::layer(std::size_t index) const {
  if (index >= layers_.size()) {
    throw InvalidArgument("no layer " + std::to_string(index));
  }
  return layers_[index];
}

std::vector<std::size_t> Network::layer_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(layers_.size());
  for (const Layer& l : layers_) sizes.push_back(l.nodes.size());
  return sizes;
}

Node& Network::node(NodeId id) {
  if (!contains(id)) throw UnknownNode("no node with id " + std::to_string(id.value));
  return *slots_[id.value];
}

const Node& Network::node(NodeId id) const {
  if (!contains(id)) throw UnknownNode("no node with id " + std::to_string(id.value));
  return *slots_[id.value];
}

bool Network::contains(NodeId id) const noexcept {
  return id.value < slots_.size() && slots_[id.value].has_value();
}

NodeId Network::node_at(NodeAddress address) const {
  if (address.layerindex >= layers_.size() ||
      address.nodeindex >= layers_[address.layerindex].nodes.size()) {
    throw UnknownNode("no node at " + to_string(address));
  }
  return layers_[address.layerindex].nodes[address.nodeindex];
}

std::size_t Network::node_count() const noexcept {
  return slots_.size() - free_slots_.size();
}

bool Network::has_edge(NodeId source, NodeId target) const {
  return edge_pairs_.contains(pair_key(source, target));
}

NodeId Network::allocate_node() {
  if (!free_slots_.empty()) {
    const NodeId id = free_slots_.back();
    free_slots_.pop_back();
    slots_[id.value].emplace();
    return id;
  }
  if (slots_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidArgument("node capacity exhausted");
  }
  slots_.emplace_back(std::in_place);
  return NodeId{static_cast<std::uint32_t>(slots_.size() - 1)};
}

void Network::release_node(NodeId id) {
  slots_[id.value].reset();
  free_slots_.push_back(id);
}

std::size_t Network::insert_layer(std::size_t position) {
  if (position == 0 || position >= layers_.size()) {
    throw InvalidArgument("layer position " + std::to_string(position) +
                          " must lie strictly between the input and output layers (1.." +
                          std::to_string(layers_.size() - 1) + ")");
  }
  layers_.insert(layers_.begin() + static_cast<std::ptrdiff_t>(position), Layer{});
  return position;
}

NodeAddress Network::insert_node(std::size_t layerindex, double bias, ActivationKind act) {
  if (layerindex >= layers_.size()) {
    throw UnknownNode("no layer " + std::to_string(layerindex));
  }
  if (layerindex == 0 && (bias != 0.0 || act != ActivationKind::Linear)) {
    throw InvalidArgument("input nodes must be linear with zero bias");
  }
  const NodeId id = allocate_node();
  Node& n = node(id);
  n.bias = bias;
  n.actfunction = act;
  auto& list = layers_[layerindex].nodes;
  list.insert(list.begin(), id);
  return NodeAddress{layerindex, 0};
}

Edge& Network::add_edge(NodeAddress source, NodeAddress target, double weight) {
  const NodeId from = node_at(source);
  const NodeId to = node_at(target);
  if (target.layerindex <= source.layerindex) {
    throw NonForwardEdge("edge " + to_string(source) + " -> " + to_string(target) +
                         " does not point to a later layer");
  }
  if (!edge_pairs_.insert(pair_key(from, to)).second) {
    throw DuplicateEdge("edge " + to_string(source) + " -> " + to_string(target) +
                        " already exists");
  }
  auto& edges = node(from).edges_;
  edges.emplace_back(weight, to);
  return edges.back();
}

void Network::set_activation(NodeAddress address, ActivationKind act) {
  const NodeId id = node_at(address);
  if (address.layerindex == 0 && act != ActivationKind::Linear) {
    throw InvalidArgument("input nodes must be linear");
  }
  node(id).actfunction = act;
}

void Network::mark_for_deletion(NodeAddress address) {
  const NodeId id = node_at(address);
  if (address.layerindex == 0 || address.layerindex + 1 == layers_.size()) {
    throw InvalidArgument("input and output nodes cannot be deleted: " + to_string(address));
  }
  node(id).markedfordeletion = true;
}

SweepReport Network::sweep_deletions() {
  SweepReport report;

  // One pass over every edge list drops edges into marked nodes.
  for (const Layer& l : layers_) {
    for (NodeId source : l.nodes) {
      auto& edges = node(source).edges_;
      const auto kept = std::remove_if(edges.begin(), edges.end(), [&](const Edge& e) {
        if (!node(e.target()).markedfordeletion) return false;
        edge_pairs_.erase(pair_key(source, e.target()));
        return true;
      });
      report.edges_removed += static_cast<std::size_t>(edges.end() - kept);
      edges.erase(kept, edges.end());
    }
  }

  for (Layer& l : layers_) {
    const auto kept = std::remove_if(l.nodes.begin(), l.nodes.end(), [&](NodeId id) {
      Node& n = node(id);
      if (!n.markedfordeletion) return false;
      for (const Edge& e : n.edges_) edge_pairs_.erase(pair_key(id, e.target()));
      report.edges_removed += n.edges_.size();
      release_node(id);
      return true;
    });
    report.nodes_removed += static_cast<std::size_t>(l.nodes.end() - kept);
    l.nodes.erase(kept, l.nodes.end());
  }

  const auto first_internal = layers_.begin() + 1;
  const auto output = layers_.end() - 1;
  const auto kept_end = std::remove_if(first_internal, output,
                                       [](const Layer& l) { return l.nodes.empty(); });
  report.layers_removed = static_cast<std::size_t>(output - kept_end);
  layers_.erase(kept_end, output);

  return report;
}

std::size_t Network::prune_edges(double threshold) {
  if (!(threshold >= 0.0)) {
    throw InvalidArgument("prune threshold must be non-negative");
  }
  std::size_t removed = 0;
  for (const Layer& l : layers_) {
    for (NodeId source : l.nodes) {
      auto& edges = node(source).edges_;
      const auto kept = std::remove_if(edges.begin(), edges.end(), [&](const Edge& e) {
        if (!(std::fabs(e.weight) < threshold)) return false;
        edge_pairs_.erase(pair_key(source, e.target()));
        return true;
      });
      removed += static_cast<std::size_t>(edges.end() - kept);
      edges.erase(kept, edges.end());
    }
  }
  return removed;
}

void Network::assign_indices() {
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const auto& nodes = layers_[li].nodes;
    for (std::size_t ni = 0; ni < nodes.size(); ++ni) {
      node(nodes[ni]).address = NodeAddress{li, ni};
    }
  }
}

std::vector<std::string> Network::check_invariants() const {
  std::vector<std::string> problems;
  if (layers_.size() < 2) {
    problems.push_back("fewer than two layers");
    return problems;
  }
  if (layers_.front().nodes.empty()) problems.push_back("input layer is empty");
  if (layers_.back().nodes.empty()) problems.push_back("output layer is empty");

  // Layer of every listed node, by slot.
  constexpr std::size_t kUnlisted = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> layer_of(slots_.size(), kUnlisted);
  std::size_t listed = 0;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    for (NodeId id : layers_[li].nodes) {
      if (!contains(id)) {
        problems.push_back("layer " + std::to_string(li) + " lists a removed node");
        continue;
      }
      if (layer_of[id.value] != kUnlisted) {
        problems.push_back("node " + std::to_string(id.value) + " listed twice");
      }
      layer_of[id.value] = li;
      ++listed;
    }
  }
  if (listed != node_count()) problems.push_back("live nodes missing from layer lists");

  for (NodeId id : layers_.front().nodes) {
    if (!contains(id)) continue;
    const Node& n = node(id);
    if (n.bias != 0.0 || n.actfunction != ActivationKind::Linear) {
      problems.push_back("input node " + std::to_string(id.value) + " is not linear with bias 0");
    }
    if (n.markedfordeletion) problems.push_back("input node marked for deletion");
  }
  for (NodeId id : layers_.back().nodes) {
    if (contains(id) && node(id).markedfordeletion) {
      problems.push_back("output node marked for deletion");
    }
  }

  std::size_t edges_seen = 0;
  std::unordered_set<std::uint64_t> pairs;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    for (NodeId source : layers_[li].nodes) {
      if (!contains(source)) continue;
      for (const Edge& e : node(source).edges_) {
        ++edges_seen;
        const std::string label =
            "edge " + std::to_string(source.value) + "->" + std::to_string(e.target().value);
        if (!contains(e.target()) || layer_of[e.target().value] == kUnlisted) {
          problems.push_back(label + " targets a removed node");
          continue;
        }
        if (layer_of[e.target().value] <= li) {
          problems.push_back(label + " is not forward");
        }
        if (!pairs.insert(pair_key(source, e.target())).second) {
          problems.push_back(label + " is duplicated");
        }
        if (!edge_pairs_.contains(pair_key(source, e.target()))) {
          problems.push_back(label + " missing from the edge index");
        }
      }
    }
  }
  if (edges_seen != edge_pairs_.size()) {
    problems.push_back("edge index holds " + std::to_string(edge_pairs_.size()) +
                       " pairs but " + std::to_string(edges_seen) + " edges exist");
  }
  return problems;
}

}  // namespace dyann
