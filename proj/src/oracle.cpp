#include "dyann/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "dyann/error.hpp"

namespace dyann {

namespace {

using Real = long double;

Real activate(ActivationKind kind, Real z) {
  switch (kind) {
    case ActivationKind::Linear: return z;
    case ActivationKind::Relu: return std::max(z, Real{0});
    case ActivationKind::Sigmoid: return Real{1} / (Real{1} + std::exp(-z));
    case ActivationKind::Tanh: return std::tanh(z);
  }
  return z;
}

std::vector<Real> head_outputs(OutputActivation act, const std::vector<Real>& z) {
  std::vector<Real> y(z.size(), Real{0});
  switch (act) {
    case OutputActivation::Identity:
      y = z;
      break;
    case OutputActivation::Sigmoid:
      for (std::size_t i = 0; i < z.size(); ++i) y[i] = Real{1} / (Real{1} + std::exp(-z[i]));
      break;
    case OutputActivation::Softmax: {
      Real top = z.front();
      for (Real v : z) top = std::max(top, v);
      Real total = 0;
      for (std::size_t i = 0; i < z.size(); ++i) total += (y[i] = std::exp(z[i] - top));
      for (Real& v : y) v /= total;
      break;
    }
    case OutputActivation::Max: {
      std::size_t best = 0;
      for (std::size_t i = 1; i < z.size(); ++i) {
        if (z[i] > z[best]) best = i;
      }
      y[best] = 1;
      break;
    }
  }
  return y;
}

Real loss_of(LossKind loss, const std::vector<Real>& y, std::span<const double> t) {
  if (y.size() != t.size()) throw DimensionMismatch("oracle: target length mismatch");
  const auto clamp = [](Real p) { return std::clamp(p, Real{1e-12L}, Real{1} - Real{1e-12L}); };
  Real total = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    switch (loss) {
      case LossKind::HalfMse:
        total += (y[i] - t[i]) * (y[i] - t[i]) / 2;
        break;
      case LossKind::CrossEntropy:
        if (t[i] != 0.0) total -= t[i] * std::log(clamp(y[i]));
        break;
      case LossKind::BinaryCrossEntropy:
        total -= t[i] * std::log(clamp(y[i])) + (1 - t[i]) * std::log(1 - clamp(y[i]));
        break;
    }
  }
  return total;
}

struct Trace {
  std::map<NodeAddress, Real> z;
  std::vector<Real> outputs;
};

// Pull-style evaluation: every node gathers its incoming edges.
Trace evaluate_view(const DenseView& view, std::span<const double> input) {
  if (view.layer_sizes.size() < 2) throw InvalidArgument("oracle: view has fewer than 2 layers");
  if (input.size() != view.layer_sizes.front()) {
    throw DimensionMismatch("oracle: input length mismatch");
  }
  std::map<NodeAddress, std::vector<std::pair<NodeAddress, Real>>> incoming;
  for (const auto& [key, w] : view.weights) incoming[key.target].emplace_back(key.source, w);

  Trace eval;
  std::map<NodeAddress, Real> y;
  for (std::size_t i = 0; i < input.size(); ++i) y[{0, i}] = input[i];

  const std::size_t last = view.layer_sizes.size() - 1;
  for (std::size_t layer = 1; layer <= last; ++layer) {
    for (std::size_t index = 0; index < view.layer_sizes[layer]; ++index) {
      const NodeAddress at{layer, index};
      Real z = view.biases.at(at);
      if (auto it = incoming.find(at); it != incoming.end()) {
        for (const auto& [source, w] : it->second) z += w * y.at(source);
      }
      eval.z[at] = z;
      if (layer != last) y[at] = activate(view.activations.at(at), z);
    }
  }

  std::vector<Real> z_out;
  for (std::size_t index = 0; index < view.layer_sizes[last]; ++index) {
    z_out.push_back(eval.z.at({last, index}));
  }
  eval.outputs = head_outputs(view.head.activation(), z_out);
  return eval;
}

// Relu pre-activations keyed by address, for kink detection.
std::map<NodeAddress, Real> relu_inputs(const DenseView& view, const Trace& eval) {
  std::map<NodeAddress, Real> out;
  const std::size_t last = view.layer_sizes.size() - 1;
  for (const auto& [at, z] : eval.z) {
    if (at.layerindex != last && view.activations.at(at) == ActivationKind::Relu) out[at] = z;
  }
  return out;
}

bool sign_changed(const std::map<NodeAddress, Real>& a, const std::map<NodeAddress, Real>& b) {
  for (const auto& [at, za] : a) {
    const Real zb = b.at(at);
    if ((za > 0) != (zb > 0)) return true;
  }
  return false;
}

template <typename Setter>
GradientEntry probe(const DenseView& base, const Sample& sample, double param, double h,
                    Setter set) {
  DenseView view = base;
  const Real step = Real{h} * std::max(Real{1}, std::fabs(Real{param}));
  const Real up = Real{param} + step;
  const Real down = Real{param} - step;

  // Parameters are doubles; the probes land on the nearest representable
  // values and the quotient uses the step actually taken.
  const double up_d = static_cast<double>(up);
  const double down_d = static_cast<double>(down);

  set(view, up_d);
  const Trace plus = evaluate_view(view, sample.input);
  const Real loss_plus = loss_of(view.head.loss(), plus.outputs, sample.target);
  set(view, down_d);
  const Trace minus = evaluate_view(view, sample.input);
  const Real loss_minus = loss_of(view.head.loss(), minus.outputs, sample.target);

  GradientEntry entry;
  entry.value =
      static_cast<double>((loss_plus - loss_minus) / (Real{up_d} - Real{down_d}));
  entry.crosses_kink = sign_changed(relu_inputs(view, plus), relu_inputs(view, minus));
  return entry;
}

}  // namespace

std::string to_string(const EdgeKey& key) {
  return to_string(key.source) + "->" + to_string(key.target);
}

DenseView snapshot(const Network& net) {
  DenseView view;
  view.head = net.head();
  view.layer_sizes = net.layer_sizes();

  std::unordered_map<std::uint32_t, NodeAddress> where;
  const auto layers = net.layers();
  for (std::size_t li = 0; li < layers.size(); ++li) {
    for (std::size_t ni = 0; ni < layers[li].nodes.size(); ++ni) {
      where[layers[li].nodes[ni].value] = NodeAddress{li, ni};
    }
  }
  for (std::size_t li = 0; li < layers.size(); ++li) {
    for (std::size_t ni = 0; ni < layers[li].nodes.size(); ++ni) {
      const NodeAddress at{li, ni};
      const Node& n = net.node(layers[li].nodes[ni]);
      view.biases[at] = n.bias;
      view.activations[at] = n.actfunction;
      for (const Edge& e : n.edges()) {
        view.weights[EdgeKey{at, where.at(e.target().value)}] = e.weight;
      }
    }
  }
  return view;
}

std::vector<double> oracle_forward(const DenseView& view, std::span<const double> input) {
  const Trace eval = evaluate_view(view, input);
  return {eval.outputs.begin(), eval.outputs.end()};
}

long double oracle_loss(const DenseView& view, const Sample& sample) {
  const Trace eval = evaluate_view(view, sample.input);
  return loss_of(view.head.loss(), eval.outputs, sample.target);
}

GradientTable numeric_gradient(const DenseView& view, const Sample& sample, double h) {
  if (!view.head.trainable()) throw NotTrainable("oracle: max head has no gradient");
  if (!(h > 0.0)) throw InvalidArgument("oracle: step must be positive");

  GradientTable table;
  for (const auto& [key, w] : view.weights) {
    table.weights[key] = probe(view, sample, w, h,
                               [&key](DenseView& v, double p) { v.weights.at(key) = p; });
  }
  for (const auto& [at, b] : view.biases) {
    if (at.layerindex == 0) continue;
    table.biases[at] =
        probe(view, sample, b, h, [&at](DenseView& v, double p) { v.biases.at(at) = p; });
  }
  return table;
}

double relative_error(double a, double b, double floor) {
  const double scale = std::max({std::fabs(a), std::fabs(b), floor});
  return scale > 0.0 ? std::fabs(a - b) / scale : 0.0;
}

CheckReport check_network(const Network& net, const Sample& sample, const CheckOptions& options) {
  if (!net.head().trainable()) throw NotTrainable("gradient check needs a trainable head");

  CheckReport report;
  const DenseView before = snapshot(net);

  Network work = net;
  const std::vector<double> y = options.forward(work, sample.input);
  const std::vector<double> expected = oracle_forward(before, sample.input);
  if (y.size() != expected.size()) throw DimensionMismatch("engine output length mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) {
    report.max_forward_deviation =
        std::max(report.max_forward_deviation, std::fabs(y[i] - expected[i]));
  }
  report.forward_ok = report.max_forward_deviation <= options.forward_tolerance;

  options.backward(work, sample.target, options.eta);
  const DenseView after = snapshot(work);
  const GradientTable grad = numeric_gradient(before, sample, options.step);

  const auto compare = [&](const std::string& name, double old_value, double new_value,
                           const GradientEntry& entry) {
    if (entry.crosses_kink) {
      report.skipped.push_back(name);
      return;
    }
    const double observed = (old_value - new_value) / options.eta;
    const double err = relative_error(observed, entry.value, options.gradient_floor);
    ++report.parameters_checked;
    if (report.worst_parameter.empty() || err > report.max_gradient_error) {
      report.max_gradient_error = err;
      report.worst_parameter = name;
    }
  };

  if (after.weights.size() != before.weights.size()) {
    throw InvalidArgument("backward step changed the topology");
  }
  for (const auto& [key, entry] : grad.weights) {
    const auto it = after.weights.find(key);
    if (it == after.weights.end()) throw InvalidArgument("backward step changed the topology");
    compare("w" + to_string(key), before.weights.at(key), it->second, entry);
  }
  for (const auto& [at, entry] : grad.biases) {
    compare("b" + to_string(at), before.biases.at(at), after.biases.at(at), entry);
  }
  report.gradient_ok = report.max_gradient_error <= options.gradient_tolerance;
  return report;
}

}  // namespace dyann
