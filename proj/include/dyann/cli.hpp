#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dyann/engine.hpp"
#include "dyann/network.hpp"
#include "dyann/persist.hpp"

namespace dyann::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 2,
  kIoError = 3,
  kCheckFailed = 4,
};

struct WiringRule {
  std::size_t from_layer = 0;
  std::size_t to_layer = 0;
  double density = 0.0;
};

/// Network description consumed by `create`. Same JSON text style as the
/// network files:
///
///   {"layer_sizes": [2, 2, 1],
///    "hidden_activations": ["sigmoid"],
///    "head": {"activation": "sigmoid", "loss": "binary_cross_entropy"},
///    "wiring": [{"from": 0, "to": 1, "density": 1.0}, ...],
///    "seed": 7}
struct TopologySpec {
  std::vector<std::size_t> layer_sizes;
  std::vector<ActivationKind> hidden_activations;
  OutputHead head = OutputHead::identity_half_mse();
  std::vector<WiringRule> wiring;
  std::uint64_t seed = 0;
};

/// Throws InvalidArgument naming the offending field.
TopologySpec parse_topology_spec(std::string_view text);

/// Builds the layers, then wires each rule in order: every (source, target)
/// pair gets an edge with probability `density` and a weight uniform on
/// (-r, r), r = sqrt(6 / (|from layer| + |to layer|)).
Network build_network(const TopologySpec& spec);

struct GrowOptions {
  std::size_t position = 1;
  std::size_t nodes = 1;
  ActivationKind activation = ActivationKind::Sigmoid;
  double in_density = 0.0;
  double out_density = 0.0;
  std::uint64_t seed = 0;
};

/// Inserts a layer of new nodes, wired from all earlier layers with
/// in_density and to all later layers with out_density.
void grow_network(Network& net, const GrowOptions& options);

struct PruneResult {
  std::size_t edges_pruned = 0;
  SweepReport sweep;
};

/// Prunes small weights; with sweep_isolated, also deletes hidden nodes left
/// without outgoing edges (one round, no cascade).
PruneResult prune_network(Network& net, double threshold, bool sweep_isolated);

/// Comma-separated rows, inputs first then targets. Blank lines are skipped.
std::vector<Sample> parse_csv(std::string_view text, std::size_t inputs, std::size_t outputs,
                              bool has_header);

/// Graphviz digraph with one cluster per layer, in canonical order.
std::string export_dot(const NetworkDocument& doc);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it into place, so a
/// failure never leaves a partial file at `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

Network load_network_file(const std::filesystem::path& path);
void save_network_file(Network& net, const std::filesystem::path& path);

/// Entry point. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dyann::cli
