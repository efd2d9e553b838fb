#include <cmath>
#include <set>
#include <string>

#include <json.hpp>

#include "dyann/cli.hpp"
#include "dyann/error.hpp"
#include "dyann/random.hpp"

namespace dyann::cli {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad_field(const std::string& field, const std::string& problem) {
  throw InvalidArgument("topology spec field '" + field + "': " + problem);
}

std::size_t read_count(const json& v, const std::string& field) {
  if (!v.is_number_unsigned()) bad_field(field, "expected a non-negative integer");
  return v.get<std::size_t>();
}

double read_density(const json& v, const std::string& field) {
  if (!v.is_number()) bad_field(field, "expected a number");
  const double d = v.get<double>();
  if (!(d >= 0.0 && d <= 1.0)) bad_field(field, "density must lie in [0, 1]");
  return d;
}

void reject_unknown(const json& obj, const std::string& field,
                    std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) bad_field(field, "expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (auto k : keys) known = known || item.key() == k;
    if (!known) bad_field(field.empty() ? item.key() : field + "." + item.key(), "unknown key");
  }
  for (auto k : keys) {
    if (!obj.contains(k)) {
      bad_field(field.empty() ? std::string(k) : field + "." + std::string(k), "missing");
    }
  }
}

double glorot_range(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

void wire(Network& net, Rng& rng, std::size_t from, std::size_t to, double density) {
  const std::size_t from_size = net.layer(from).nodes.size();
  const std::size_t to_size = net.layer(to).nodes.size();
  if (from_size == 0 || to_size == 0) return;
  const double r = glorot_range(from_size, to_size);
  for (std::size_t s = 0; s < from_size; ++s) {
    for (std::size_t t = 0; t < to_size; ++t) {
      if (rng.bernoulli(density)) {
        net.add_edge({from, s}, {to, t}, rng.uniform(-r, r));
      }
    }
  }
}

}  // namespace

TopologySpec parse_topology_spec(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("topology spec is not valid JSON: ") + e.what());
  }
  reject_unknown(root, "", {"layer_sizes", "hidden_activations", "head", "wiring", "seed"});

  TopologySpec spec;
  const json& sizes = root["layer_sizes"];
  if (!sizes.is_array() || sizes.size() < 2) {
    bad_field("layer_sizes", "expected an array of at least two counts");
  }
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const std::string field = "layer_sizes[" + std::to_string(i) + "]";
    const std::size_t n = read_count(sizes[i], field);
    if (n == 0) bad_field(field, "layers need at least one node");
    spec.layer_sizes.push_back(n);
  }

  const json& acts = root["hidden_activations"];
  if (!acts.is_array() || acts.size() != spec.layer_sizes.size() - 2) {
    bad_field("hidden_activations",
              "expected one name per internal layer (" +
                  std::to_string(spec.layer_sizes.size() - 2) + ")");
  }
  for (std::size_t i = 0; i < acts.size(); ++i) {
    const std::string field = "hidden_activations[" + std::to_string(i) + "]";
    if (!acts[i].is_string()) bad_field(field, "expected a string");
    const auto kind = parse_activation_kind(acts[i].get<std::string>());
    if (!kind) bad_field(field, "unknown activation '" + acts[i].get<std::string>() + "'");
    spec.hidden_activations.push_back(*kind);
  }

  const json& head = root["head"];
  reject_unknown(head, "head", {"activation", "loss"});
  if (!head["activation"].is_string()) bad_field("head.activation", "expected a string");
  if (!head["loss"].is_string()) bad_field("head.loss", "expected a string");
  const auto activation = parse_output_activation(head["activation"].get<std::string>());
  if (!activation) bad_field("head.activation", "unknown output activation");
  const auto loss = parse_loss_kind(head["loss"].get<std::string>());
  if (!loss) bad_field("head.loss", "unknown loss");
  try {
    spec.head = OutputHead(*activation, *loss);
  } catch (const InvalidArgument& e) {
    bad_field("head", e.what());
  }

  const json& wiring = root["wiring"];
  if (!wiring.is_array()) bad_field("wiring", "expected an array");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t i = 0; i < wiring.size(); ++i) {
    const std::string field = "wiring[" + std::to_string(i) + "]";
    reject_unknown(wiring[i], field, {"from", "to", "density"});
    WiringRule rule;
    rule.from_layer = read_count(wiring[i]["from"], field + ".from");
    rule.to_layer = read_count(wiring[i]["to"], field + ".to");
    rule.density = read_density(wiring[i]["density"], field + ".density");
    if (rule.to_layer >= spec.layer_sizes.size()) bad_field(field + ".to", "no such layer");
    if (rule.from_layer >= rule.to_layer) bad_field(field, "rules must point forward");
    if (!seen.emplace(rule.from_layer, rule.to_layer).second) {
      bad_field(field, "repeats an earlier layer pair");
    }
    spec.wiring.push_back(rule);
  }

  const json& seed = root["seed"];
  if (!seed.is_number_unsigned()) bad_field("seed", "expected a non-negative integer");
  spec.seed = seed.get<std::uint64_t>();
  return spec;
}

Network build_network(const TopologySpec& spec) {
  const auto& sizes = spec.layer_sizes;
  if (sizes.size() < 2 || spec.hidden_activations.size() != sizes.size() - 2) {
    throw InvalidArgument("topology spec needs one activation per internal layer");
  }
  Network net(sizes.front(), sizes.back(), spec.head);
  for (std::size_t li = 1; li + 1 < sizes.size(); ++li) {
    net.insert_layer(li);
    for (std::size_t i = 0; i < sizes[li]; ++i) {
      net.insert_node(li, 0.0, spec.hidden_activations[li - 1]);
    }
  }
  Rng rng(spec.seed);
  for (const WiringRule& rule : spec.wiring) {
    if (rule.from_layer >= rule.to_layer || rule.to_layer >= sizes.size()) {
      throw NonForwardEdge("wiring rule must point forward within the network");
    }
    wire(net, rng, rule.from_layer, rule.to_layer, rule.density);
  }
  net.assign_indices();
  return net;
}

void grow_network(Network& net, const GrowOptions& options) {
  if (options.nodes == 0) throw InvalidArgument("grow needs at least one node");
  for (double d : {options.in_density, options.out_density}) {
    if (!(d >= 0.0 && d <= 1.0)) throw InvalidArgument("densities must lie in [0, 1]");
  }
  const std::size_t at = net.insert_layer(options.position);
  for (std::size_t i = 0; i < options.nodes; ++i) {
    net.insert_node(at, 0.0, options.activation);
  }
  Rng rng(options.seed);
  for (std::size_t li = 0; li < at; ++li) wire(net, rng, li, at, options.in_density);
  for (std::size_t li = at + 1; li < net.layer_count(); ++li) {
    wire(net, rng, at, li, options.out_density);
  }
  net.assign_indices();
}

PruneResult prune_network(Network& net, double threshold, bool sweep_isolated) {
  PruneResult result;
  result.edges_pruned = net.prune_edges(threshold);
  if (sweep_isolated) {
    const auto layers = net.layers();
    for (std::size_t li = 1; li + 1 < layers.size(); ++li) {
      for (std::size_t ni = 0; ni < layers[li].nodes.size(); ++ni) {
        if (net.node(layers[li].nodes[ni]).edges().empty()) net.mark_for_deletion({li, ni});
      }
    }
    result.sweep = net.sweep_deletions();
  }
  net.assign_indices();
  return result;
}

}  // namespace dyann::cli
