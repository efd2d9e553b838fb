#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dyann/engine.hpp"
#include "dyann/error.hpp"
#include "dyann/oracle.hpp"
#include "random_network.hpp"

namespace dyann {
namespace {

// Gradient implied by one backward step with eta = 1, keyed like the
// oracle's tables.
GradientTable backprop_gradient(const Network& net, const Sample& s) {
  Network work = net;
  const DenseView before = snapshot(work);
  feed_forward(work, s.input);
  back_propagate(work, s.target, 1.0);
  const DenseView after = snapshot(work);
  GradientTable g;
  for (const auto& [key, w] : before.weights) g.weights[key].value = w - after.weights.at(key);
  for (const auto& [at, b] : before.biases) {
    if (at.layerindex > 0) g.biases[at].value = b - after.biases.at(at);
  }
  return g;
}

double total_error(const GradientTable& a, const GradientTable& b) {
  double total = 0.0;
  for (const auto& [key, e] : a.weights) total += std::fabs(e.value - b.weights.at(key).value);
  for (const auto& [at, e] : a.biases) total += std::fabs(e.value - b.biases.at(at).value);
  return total;
}

TEST(Snapshot, IsACopy) {
  Network net(1, 1, OutputHead::identity_half_mse());
  EXPECT_TRUE(snapshot(net).weights.empty());

  net.add_edge({0, 0}, {1, 0}, 0.5);
  const DenseView view = snapshot(net);
  EXPECT_EQ(view.weights.size(), net.edge_count());
  net.node(net.node_at({0, 0})).edges()[0].weight = -4.0;
  net.node(net.node_at({1, 0})).bias = 9.0;
  EXPECT_EQ(view.weights.at(EdgeKey{{0, 0}, {1, 0}}), 0.5);
  EXPECT_EQ(view.biases.at({1, 0}), 0.0);
}

TEST(Snapshot, EntryCountMatchesEdges) {
  Rng rng(6);
  for (int i = 0; i < 20; ++i) {
    const Network net = testing::random_network(rng);
    const DenseView view = snapshot(net);
    EXPECT_EQ(view.weights.size(), net.edge_count());
    EXPECT_EQ(view.biases.size(), net.node_count());
  }
}

TEST(OracleForward, SingleEdge) {
  Network net(1, 1, OutputHead::identity_half_mse());
  net.add_edge({0, 0}, {1, 0}, 2.0);
  net.node(net.node_at({1, 0})).bias = 0.5;
  EXPECT_EQ(oracle_forward(snapshot(net), std::vector<double>{1.0}), std::vector<double>{2.5});
}

TEST(OracleForward, UnreachableHiddenNodeEmitsActivatedBias) {
  Network net(1, 1, OutputHead::identity_half_mse());
  net.insert_layer(1);
  net.insert_node(1, 0.8, ActivationKind::Tanh);
  net.add_edge({1, 0}, {2, 0}, 1.0);
  const std::vector<double> x = {5.0};
  const auto expected = oracle_forward(snapshot(net), x);
  EXPECT_NEAR(expected[0], std::tanh(0.8), 1e-15);
  EXPECT_NEAR(feed_forward(net, x)[0], expected[0], 1e-15);
}

TEST(OracleForward, DeterministicAndSideEffectFree) {
  Rng rng(12);
  const Network net = testing::random_network(rng);
  const DenseView view = snapshot(net);
  const DenseView copy = view;
  const auto x = testing::random_vector(rng, view.layer_sizes.front(), -1.0, 1.0);
  EXPECT_EQ(oracle_forward(view, x), oracle_forward(view, x));
  EXPECT_EQ(view.weights, copy.weights);
  EXPECT_EQ(view.biases, copy.biases);
}

TEST(OracleForward, LengthMismatch) {
  Network net(2, 1, OutputHead::identity_half_mse());
  EXPECT_THROW(oracle_forward(snapshot(net), std::vector<double>{1.0}), DimensionMismatch);
}

TEST(NumericGradient, ChainByHand) {
  Network net(1, 1, OutputHead::identity_half_mse());
  net.insert_layer(1);
  net.insert_node(1, 0.0, ActivationKind::Linear);
  net.add_edge({0, 0}, {1, 0}, 2.0);
  net.add_edge({1, 0}, {2, 0}, 3.0);
  const GradientTable g = numeric_gradient(snapshot(net), {{1.0}, {0.0}});
  // dL/dw2 = delta_out * y_hidden = 6 * 2.
  EXPECT_NEAR(g.weights.at(EdgeKey{{1, 0}, {2, 0}}).value, 12.0, 1e-7);
  EXPECT_EQ(g.biases.count({0, 0}), 0u);
}

TEST(NumericGradient, ZeroAtPerfectPrediction) {
  Network net(2, 1, OutputHead::identity_half_mse());
  net.add_edge({0, 0}, {1, 0}, 0.7);
  net.add_edge({0, 1}, {1, 0}, -0.2);
  const std::vector<double> x = {1.0, 2.0};
  const Sample s{x, feed_forward(net, x)};
  const GradientTable g = numeric_gradient(snapshot(net), s);
  for (const auto& [key, e] : g.weights) EXPECT_NEAR(e.value, 0.0, 1e-9) << to_string(key);
  for (const auto& [at, e] : g.biases) EXPECT_NEAR(e.value, 0.0, 1e-9);
}

TEST(NumericGradient, DeadReluBlocksUpstreamGradient) {
  Network net(1, 1, OutputHead::identity_half_mse());
  net.insert_layer(1);
  net.insert_node(1, -1.0, ActivationKind::Relu);
  net.add_edge({0, 0}, {1, 0}, 0.5);
  net.add_edge({1, 0}, {2, 0}, 2.0);
  const GradientTable g = numeric_gradient(snapshot(net), {{1.0}, {3.0}});
  EXPECT_NEAR(g.weights.at(EdgeKey{{0, 0}, {1, 0}}).value, 0.0, 1e-9);
  EXPECT_NEAR(g.biases.at({1, 0}).value, 0.0, 1e-9);
  EXPECT_FALSE(g.weights.at(EdgeKey{{0, 0}, {1, 0}}).crosses_kink);
}

TEST(NumericGradient, FlagsKinkCrossings) {
  Network net(1, 1, OutputHead::identity_half_mse());
  net.insert_layer(1);
  net.insert_node(1, 0.0, ActivationKind::Relu);
  net.add_edge({0, 0}, {1, 0}, 1e-9);
  net.add_edge({1, 0}, {2, 0}, 2.0);
  const GradientTable g = numeric_gradient(snapshot(net), {{1.0}, {3.0}});
  EXPECT_TRUE(g.weights.at(EdgeKey{{0, 0}, {1, 0}}).crosses_kink);
  EXPECT_TRUE(g.biases.at({1, 0}).crosses_kink);
}

TEST(NumericGradient, MaxHeadRejected) {
  Network net(1, 2, {OutputActivation::Max, LossKind::HalfMse});
  EXPECT_THROW(numeric_gradient(snapshot(net), {{1.0}, {1.0, 0.0}}), NotTrainable);
}

// Halving the step should cut the truncation error about fourfold.
TEST(NumericGradient, ConvergesQuadratically) {
  Rng rng(555);
  testing::RandomNetworkOptions opts;
  opts.allow_relu = false;
  opts.min_layers = 3;
  int cases = 0;
  while (cases < 10) {
    const Network net = testing::random_network(rng, opts);
    const Sample s = testing::random_sample(rng, net);
    const GradientTable exact = backprop_gradient(net, s);
    const DenseView view = snapshot(net);
    const double coarse = total_error(numeric_gradient(view, s, 1e-2), exact);
    const double fine = total_error(numeric_gradient(view, s, 5e-3), exact);
    if (coarse < 1e-9) continue;  // no curvature to measure (e.g. all-linear paths)
    const double ratio = coarse / fine;
    EXPECT_GE(ratio, 2.5) << "case " << cases;
    EXPECT_LE(ratio, 6.0) << "case " << cases;
    ++cases;
  }
}

TEST(RelativeError, Floor) {
  EXPECT_EQ(relative_error(0.0, 0.0, 0.0), 0.0);
  EXPECT_NEAR(relative_error(1.0, 1.1, 1e-10), 1.0 / 11.0, 1e-15);
  EXPECT_NEAR(relative_error(1e-12, 2e-12, 1e-10), 1e-2, 1e-15);
}

TEST(CheckNetwork, HealthyEnginePasses) {
  Rng rng(77);
  for (int i = 0; i < 5; ++i) {
    const Network net = testing::random_network(rng);
    const CheckReport report = check_network(net, testing::random_sample(rng, net));
    EXPECT_TRUE(report.passed()) << report.worst_parameter << " " << report.max_gradient_error;
  }
}

TEST(CheckNetwork, CorruptedBackwardIsCaught) {
  Rng rng(78);
  testing::RandomNetworkOptions opts;
  opts.density = 1.0;
  const Network net = testing::random_network(rng, opts);
  CheckOptions options;
  options.backward = [](Network& n, std::span<const double> t, double eta) {
    const double loss = back_propagate(n, t, eta);
    for (NodeId id : n.output_layer().nodes) n.node(id).bias += 1e-4;
    return loss;
  };
  const CheckReport report = check_network(net, testing::random_sample(rng, net), options);
  EXPECT_TRUE(report.forward_ok);
  EXPECT_FALSE(report.gradient_ok);
  EXPECT_FALSE(report.passed());
}

TEST(CheckNetwork, CorruptedForwardIsCaught) {
  Rng rng(79);
  const Network net = testing::random_network(rng);
  CheckOptions options;
  options.forward = [](Network& n, std::span<const double> a) {
    auto y = feed_forward(n, a);
    y[0] += 1e-9;
    return y;
  };
  const CheckReport report = check_network(net, testing::random_sample(rng, net), options);
  EXPECT_FALSE(report.forward_ok);
  EXPECT_FALSE(report.passed());
}

TEST(CheckNetwork, KinkCrossingsAreSkippedNotFailed) {
  Network net(1, 1, OutputHead::identity_half_mse());
  net.insert_layer(1);
  net.insert_node(1, 0.0, ActivationKind::Relu);
  net.add_edge({0, 0}, {1, 0}, 1e-9);
  net.add_edge({1, 0}, {2, 0}, 2.0);
  const CheckReport report = check_network(net, {{1.0}, {3.0}});
  EXPECT_TRUE(report.passed());
  EXPECT_EQ(report.skipped.size(), 2u);
}

}  // namespace
}  // namespace dyann
