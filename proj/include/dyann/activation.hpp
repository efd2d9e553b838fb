#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace dyann {

/// Per-node scalar activation g(z).
enum class ActivationKind { Linear, Relu, Sigmoid, Tanh };

/// Output-layer activation, applied jointly over all output nodes.
enum class OutputActivation { Identity, Sigmoid, Softmax, Max };

enum class LossKind { HalfMse, CrossEntropy, BinaryCrossEntropy };

/// Paired output activation and loss. Only pairs with a closed-form
/// dL/dz rule are trainable; the max head is accepted with any loss but
/// only for forward evaluation.
class OutputHead {
 public:
  /// Throws InvalidArgument for an unsupported non-max pair.
  OutputHead(OutputActivation activation, LossKind loss);

  static OutputHead identity_half_mse() {
    return {OutputActivation::Identity, LossKind::HalfMse};
  }
  static OutputHead softmax_cross_entropy() {
    return {OutputActivation::Softmax, LossKind::CrossEntropy};
  }

  OutputActivation activation() const noexcept { return activation_; }
  LossKind loss() const noexcept { return loss_; }
  bool trainable() const noexcept { return activation_ != OutputActivation::Max; }

  /// Per-node activation recorded on output nodes for this head. Purely
  /// descriptive: the head, not the node, computes output values.
  ActivationKind node_activation() const noexcept;

  friend bool operator==(const OutputHead&, const OutputHead&) = default;

 private:
  OutputActivation activation_;
  LossKind loss_;
};

double act_value(ActivationKind kind, double z);

/// g'(z). The relu derivative at 0 is taken as 0.
double act_derivative(ActivationKind kind, double z);

std::vector<double> apply_output_head(const OutputHead& head, std::span<const double> z);

/// Loss of outputs y against targets t. Probabilities fed to a logarithm
/// are clamped to [1e-12, 1 - 1e-12].
double loss_value(const OutputHead& head, std::span<const double> y, std::span<const double> t);

/// dL/dz for each output node, given outputs y, targets t and
/// pre-activations z. Throws NotTrainable for the max head.
std::vector<double> output_delta(const OutputHead& head, std::span<const double> y,
                                 std::span<const double> t, std::span<const double> z);

/// Index of the largest element; the lowest index wins ties.
std::size_t argmax(std::span<const double> values);

std::string_view to_string(ActivationKind kind);
std::string_view to_string(OutputActivation activation);
std::string_view to_string(LossKind loss);

std::optional<ActivationKind> parse_activation_kind(std::string_view name);
std::optional<OutputActivation> parse_output_activation(std::string_view name);
std::optional<LossKind> parse_loss_kind(std::string_view name);

}  // namespace dyann
