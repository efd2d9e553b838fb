#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dyann/network.hpp"

namespace dyann {

struct Sample {
  std::vector<double> input;
  std::vector<double> target;
};

struct TrainConfig {
  double eta = 0.1;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  bool shuffle = false;
};

struct Evaluation {
  double mean_loss = 0.0;
  std::optional<double> accuracy;  // softmax and max heads only
};

/// Forward pass. Sets input actvalues, then walks the layers in order:
/// each internal node computes g(sum + bias), keeps the sum as pastsum,
/// fires, and resets its sum; the output layer is finished by the head.
std::vector<double> feed_forward(Network& net, std::span<const double> input);

/// Adds actvalue * weight to the running sum of every target of `id`.
void fire_node(Network& net, NodeId id);

/// One stochastic-gradient step for the target of the most recent
/// feed_forward. Returns the loss before the step.
double back_propagate(Network& net, std::span<const double> target, double eta);

/// Backward step for an internal node. All deltas of later layers must be
/// final. Each edge's weight is read for the delta sum before it is updated.
void update_node(Network& net, NodeId id, double eta);

/// Input nodes only update their outgoing weights.
void update_input_node(Network& net, NodeId id, double eta);

/// Per-sample SGD. Returns the mean pre-step loss of each epoch.
std::vector<double> train_sgd(Network& net, std::span<const Sample> data, const TrainConfig& cfg);

/// Mean loss (and argmax accuracy for softmax/max heads). Parameters are
/// left untouched; node scratch state is overwritten.
Evaluation evaluate(Network& net, std::span<const Sample> data);

}  // namespace dyann
