#include "dyann/engine.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "dyann/error.hpp"
#include "dyann/random.hpp"

namespace dyann {

namespace {

void require_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw DimensionMismatch(std::string(what) + " has length " + std::to_string(got) +
                            ", network expects " + std::to_string(want));
  }
}

void require_dataset(const Network& net, std::span<const Sample> data) {
  if (data.empty()) throw InvalidArgument("dataset is empty");
  const std::size_t inputs = net.input_layer().nodes.size();
  const std::size_t outputs = net.output_layer().nodes.size();
  for (const Sample& s : data) {
    require_length(s.input.size(), inputs, "sample input");
    require_length(s.target.size(), outputs, "sample target");
  }
}

std::vector<double> output_values(const Network& net) {
  std::vector<double> y;
  y.reserve(net.output_layer().nodes.size());
  for (NodeId id : net.output_layer().nodes) y.push_back(net.node(id).actvalue);
  return y;
}

}  // namespace

void fire_node(Network& net, NodeId id) {
  const Node& n = net.node(id);
  for (const Edge& e : n.edges()) {
    net.node(e.target()).sum += n.actvalue * e.weight;
  }
}

std::vector<double> feed_forward(Network& net, std::span<const double> input) {
  const auto layers = net.layers();
  const auto& inputs = layers.front().nodes;
  require_length(input.size(), inputs.size(), "input");

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Node& n = net.node(inputs[i]);
    n.actvalue = input[i];
    n.sum = 0.0;
    fire_node(net, inputs[i]);
  }

  for (std::size_t li = 1; li + 1 < layers.size(); ++li) {
    for (NodeId id : layers[li].nodes) {
      Node& n = net.node(id);
      n.actvalue = act_value(n.actfunction, n.sum + n.bias);
      n.pastsum = n.sum;
      fire_node(net, id);
      n.sum = 0.0;
    }
  }

  const auto& outputs = layers.back().nodes;
  std::vector<double> z;
  z.reserve(outputs.size());
  for (NodeId id : outputs) {
    Node& n = net.node(id);
    n.pastsum = n.sum;
    n.sum = 0.0;
    z.push_back(n.pastsum + n.bias);
  }
  std::vector<double> y = apply_output_head(net.head(), z);
  for (std::size_t i = 0; i < outputs.size(); ++i) net.node(outputs[i]).actvalue = y[i];
  return y;
}

void update_node(Network& net, NodeId id, double eta) {
  Node& n = net.node(id);
  n.delta = 0.0;
  for (Edge& e : n.edges()) {
    const double target_delta = net.node(e.target()).delta;
    n.delta += target_delta * e.weight;
    e.weight -= eta * target_delta * n.actvalue;
  }
  n.delta *= act_derivative(n.actfunction, n.pastsum + n.bias);
  n.bias -= eta * n.delta;
}

void update_input_node(Network& net, NodeId id, double eta) {
  Node& n = net.node(id);
  for (Edge& e : n.edges()) {
    e.weight -= eta * net.node(e.target()).delta * n.actvalue;
  }
}

double back_propagate(Network& net, std::span<const double> target, double eta) {
  const OutputHead& head = net.head();
  if (!head.trainable()) {
    throw NotTrainable("output head '" + std::string(to_string(head.activation())) +
                       "' cannot be trained");
  }
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw InvalidArgument("learning rate must be finite and non-negative");
  }
  const auto layers = net.layers();
  const auto& outputs = layers.back().nodes;
  require_length(target.size(), outputs.size(), "target");

  std::vector<double> y;
  std::vector<double> z;
  y.reserve(outputs.size());
  z.reserve(outputs.size());
  for (NodeId id : outputs) {
    const Node& n = net.node(id);
    y.push_back(n.actvalue);
    z.push_back(n.pastsum + n.bias);
  }
  const double loss = loss_value(head, y, target);
  const std::vector<double> delta = output_delta(head, y, target, z);
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    Node& n = net.node(outputs[i]);
    n.delta = delta[i];
    n.bias -= eta * n.delta;
  }

  for (std::size_t li = layers.size() - 2; li >= 1; --li) {
    for (NodeId id : layers[li].nodes) update_node(net, id, eta);
  }
  for (NodeId id : layers.front().nodes) update_input_node(net, id, eta);
  return loss;
}

std::vector<double> train_sgd(Network& net, std::span<const Sample> data, const TrainConfig& cfg) {
  if (!(cfg.eta > 0.0) || !std::isfinite(cfg.eta)) {
    throw InvalidArgument("learning rate must be positive");
  }
  if (cfg.epochs == 0) throw InvalidArgument("epochs must be positive");
  if (!net.head().trainable()) {
    throw NotTrainable("output head '" + std::string(to_string(net.head().activation())) +
                       "' cannot be trained");
  }
  require_dataset(net, data);

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<double> history;
  history.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) {
      for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::swap(order[i], order[rng.below(i + 1)]);
      }
    }
    double total = 0.0;
    for (std::size_t index : order) {
      feed_forward(net, data[index].input);
      total += back_propagate(net, data[index].target, cfg.eta);
    }
    history.push_back(total / static_cast<double>(data.size()));
  }
  return history;
}

Evaluation evaluate(Network& net, std::span<const Sample> data) {
  require_dataset(net, data);
  const OutputActivation act = net.head().activation();
  const bool classifies = act == OutputActivation::Softmax || act == OutputActivation::Max;

  double total = 0.0;
  std::size_t hits = 0;
  for (const Sample& s : data) {
    feed_forward(net, s.input);
    const std::vector<double> y = output_values(net);
    total += loss_value(net.head(), y, s.target);
    if (classifies && argmax(y) == argmax(s.target)) ++hits;
  }

  Evaluation result;
  const auto count = static_cast<double>(data.size());
  result.mean_loss = total / count;
  if (classifies) result.accuracy = static_cast<double>(hits) / count;
  return result;
}

}  // namespace dyann
