#pragma once

#include <compare>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dyann/engine.hpp"
#include "dyann/network.hpp"

namespace dyann {

// Reference evaluation used for verification only. It keeps its own copy of
// the parameters keyed by address, evaluates pull-style (each node sums its
// incoming edges) in extended precision, and shares no code with the
// engine's traversal or with the activation module.

struct EdgeKey {
  NodeAddress source;
  NodeAddress target;

  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

std::string to_string(const EdgeKey& key);

struct DenseView {
  std::vector<std::size_t> layer_sizes;
  std::map<NodeAddress, double> biases;
  std::map<NodeAddress, ActivationKind> activations;
  std::map<EdgeKey, double> weights;
  OutputHead head = OutputHead::identity_half_mse();
};

/// Copies parameters and topology, addressing nodes by their current
/// positions.
DenseView snapshot(const Network& net);

std::vector<double> oracle_forward(const DenseView& view, std::span<const double> input);

/// Loss of the sample under the view's parameters, in extended precision.
long double oracle_loss(const DenseView& view, const Sample& sample);

struct GradientEntry {
  double value = 0.0;
  // A relu pre-activation changed sign between the two probes, so the
  // central difference straddles a kink and is not a derivative.
  bool crosses_kink = false;
};

struct GradientTable {
  std::map<EdgeKey, GradientEntry> weights;
  std::map<NodeAddress, GradientEntry> biases;  // non-input nodes only
};

/// Central differences (L(p + s) - L(p - s)) / 2s for every weight and
/// non-input bias, with s = h * max(1, |p|). Throws NotTrainable for the max
/// head.
GradientTable numeric_gradient(const DenseView& view, const Sample& sample, double h = 1e-6);

/// |a - b| / max(|a|, |b|, floor).
double relative_error(double a, double b, double floor);

using ForwardFn = std::function<std::vector<double>(Network&, std::span<const double>)>;
using BackwardFn = std::function<double(Network&, std::span<const double>, double)>;

struct CheckOptions {
  double forward_tolerance = 1e-12;
  double gradient_tolerance = 1e-5;
  // Gradients smaller than this are compared absolutely.
  double gradient_floor = 1e-10;
  double eta = 1.0;
  double step = 1e-6;
  // Engine under test; replaceable so a deliberately broken engine can be
  // checked.
  ForwardFn forward = [](Network& n, std::span<const double> a) { return feed_forward(n, a); };
  BackwardFn backward = [](Network& n, std::span<const double> t, double eta) {
    return back_propagate(n, t, eta);
  };
};

struct CheckReport {
  double max_forward_deviation = 0.0;
  double max_gradient_error = 0.0;
  std::size_t parameters_checked = 0;
  std::vector<std::string> skipped;  // kink-crossing parameters
  std::string worst_parameter;
  bool forward_ok = false;
  bool gradient_ok = false;

  bool passed() const noexcept { return forward_ok && gradient_ok; }
};

/// Runs one forward pass and one backward step on a copy of `net` and
/// compares them with the oracle: outputs against oracle_forward, and each
/// parameter change against -eta times the numeric gradient.
CheckReport check_network(const Network& net, const Sample& sample,
                          const CheckOptions& options = {});

}  // namespace dyann
