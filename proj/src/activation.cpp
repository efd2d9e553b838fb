#include "dyann/activation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dyann/error.hpp"

namespace dyann {

namespace {

constexpr double kProbabilityFloor = 1e-12;

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double clamp_probability(double p) {
  return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": length " + std::to_string(a) +
                            " does not match " + std::to_string(b));
  }
}

}  // namespace

OutputHead::OutputHead(OutputActivation activation, LossKind loss)
    : activation_(activation), loss_(loss) {
  const bool supported =
      activation == OutputActivation::Max ||
      (activation == OutputActivation::Identity && loss == LossKind::HalfMse) ||
      (activation == OutputActivation::Sigmoid &&
       (loss == LossKind::HalfMse || loss == LossKind::BinaryCrossEntropy)) ||
      (activation == OutputActivation::Softmax && loss == LossKind::CrossEntropy);
  if (!supported) {
    throw InvalidArgument("unsupported output head: " + std::string(to_string(activation)) +
                          " with " + std::string(to_string(loss)));
  }
}

ActivationKind OutputHead::node_activation() const noexcept {
  return activation_ == OutputActivation::Sigmoid ? ActivationKind::Sigmoid
                                                  : ActivationKind::Linear;
}

double act_value(ActivationKind kind, double z) {
  switch (kind) {
    case ActivationKind::Linear:
      return z;
    case ActivationKind::Relu:
      return z > 0.0 ? z : 0.0;
    case ActivationKind::Sigmoid:
      return sigmoid(z);
    case ActivationKind::Tanh:
      return std::tanh(z);
  }
  return z;
}

double act_derivative(ActivationKind kind, double z) {
  switch (kind) {
    case ActivationKind::Linear:
      return 1.0;
    case ActivationKind::Relu:
      return z > 0.0 ? 1.0 : 0.0;
    case ActivationKind::Sigmoid: {
      const double s = sigmoid(z);
      return s * (1.0 - s);
    }
    case ActivationKind::Tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<double> apply_output_head(const OutputHead& head, std::span<const double> z) {
  std::vector<double> y(z.size());
  switch (head.activation()) {
    case OutputActivation::Identity:
      std::copy(z.begin(), z.end(), y.begin());
      break;
    case OutputActivation::Sigmoid:
      std::transform(z.begin(), z.end(), y.begin(), sigmoid);
      break;
    case OutputActivation::Softmax: {
      const double shift = *std::max_element(z.begin(), z.end());
      double total = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        y[i] = std::exp(z[i] - shift);
        total += y[i];
      }
      for (double& v : y) v /= total;
      break;
    }
    case OutputActivation::Max:
      if (!z.empty()) y[argmax(z)] = 1.0;
      break;
  }
  return y;
}

double loss_value(const OutputHead& head, std::span<const double> y, std::span<const double> t) {
  require_same_length(y.size(), t.size(), "loss_value");
  double loss = 0.0;
  switch (head.loss()) {
    case LossKind::HalfMse:
      for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - t[i];
        loss += d * d;
      }
      return 0.5 * loss;
    case LossKind::CrossEntropy:
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (t[i] != 0.0) loss -= t[i] * std::log(clamp_probability(y[i]));
      }
      return loss;
    case LossKind::BinaryCrossEntropy:
      for (std::size_t i = 0; i < y.size(); ++i) {
        const double p = clamp_probability(y[i]);
        loss -= t[i] * std::log(p) + (1.0 - t[i]) * std::log(1.0 - p);
      }
      return loss;
  }
  return loss;
}

std::vector<double> output_delta(const OutputHead& head, std::span<const double> y,
                                 std::span<const double> t, std::span<const double> z) {
  if (!head.trainable()) {
    throw NotTrainable("output head '" + std::string(to_string(head.activation())) +
                       "' has no gradient");
  }
  require_same_length(y.size(), t.size(), "output_delta targets");
  require_same_length(y.size(), z.size(), "output_delta pre-activations");

  std::vector<double> delta(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) delta[i] = y[i] - t[i];
  if (head.activation() == OutputActivation::Sigmoid && head.loss() == LossKind::HalfMse) {
    for (std::size_t i = 0; i < y.size(); ++i) delta[i] *= y[i] * (1.0 - y[i]);
  }
  return delta;
}

std::string_view to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Linear: return "linear";
    case ActivationKind::Relu: return "relu";
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::Tanh: return "tanh";
  }
  return "?";
}

std::string_view to_string(OutputActivation activation) {
  switch (activation) {
    case OutputActivation::Identity: return "identity";
    case OutputActivation::Sigmoid: return "sigmoid";
    case OutputActivation::Softmax: return "softmax";
    case OutputActivation::Max: return "max";
  }
  return "?";
}

std::string_view to_string(LossKind loss) {
  switch (loss) {
    case LossKind::HalfMse: return "half_mse";
    case LossKind::CrossEntropy: return "cross_entropy";
    case LossKind::BinaryCrossEntropy: return "binary_cross_entropy";
  }
  return "?";
}

std::optional<ActivationKind> parse_activation_kind(std::string_view name) {
  for (auto kind : {ActivationKind::Linear, ActivationKind::Relu, ActivationKind::Sigmoid,
                    ActivationKind::Tanh}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

std::optional<OutputActivation> parse_output_activation(std::string_view name) {
  for (auto a : {OutputActivation::Identity, OutputActivation::Sigmoid,
                 OutputActivation::Softmax, OutputActivation::Max}) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

std::optional<LossKind> parse_loss_kind(std::string_view name) {
  for (auto l : {LossKind::HalfMse, LossKind::CrossEntropy, LossKind::BinaryCrossEntropy}) {
    if (to_string(l) == name) return l;
  }
  return std::nullopt;
}

}  // namespace dyann
