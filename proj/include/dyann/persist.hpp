#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dyann/network.hpp"

namespace dyann {

inline constexpr std::int64_t kFormatVersion = 1;
inline constexpr std::string_view kNetworkFileExtension = ".dyann.json";

struct EdgeRecord {
  std::size_t layerindex = 0;  // of the target
  std::size_t nodeindex = 0;
  double weight = 0.0;

  friend bool operator==(const EdgeRecord&, const EdgeRecord&) = default;
};

struct NodeRecord {
  std::size_t layerindex = 0;
  std::size_t nodeindex = 0;
  double bias = 0.0;
  double actvalue = 0.0;
  std::string actfunction;
  std::vector<EdgeRecord> edges;

  friend bool operator==(const NodeRecord&, const NodeRecord&) = default;
};

struct HeadRecord {
  std::string activation;
  std::string loss;

  friend bool operator==(const HeadRecord&, const HeadRecord&) = default;
};

/// Saved form of a network. Node records are in (layerindex, nodeindex)
/// order and every edge list is in target order; load() accepts nothing
/// else.
struct NetworkDocument {
  std::int64_t format_version = kFormatVersion;
  HeadRecord head;
  std::vector<std::size_t> layer_sizes;
  std::vector<NodeRecord> nodes;

  friend bool operator==(const NetworkDocument&, const NetworkDocument&) = default;
};

/// Assigns indices, then records every node and its edges. sum, pastsum
/// and delta are scratch state and are not saved.
NetworkDocument save(Network& net);

/// Rebuilds a network from a document. Throws BadVersion,
/// UnknownActivation, DanglingTarget, NonForwardEdge, DuplicateEdge,
/// UnsortedDocument or InvalidDocument; never returns a partial network.
Network load(const NetworkDocument& doc);

/// JSON text with a fixed key order and shortest round-trip numbers, so
/// equal documents serialize to identical bytes.
std::string write_text(const NetworkDocument& doc);

/// Strict parse: unknown keys raise UnknownKey, malformed text raises
/// SyntaxError with the line and column.
NetworkDocument read_text(std::string_view text);

/// Shortest decimal that reads back to the same double; always carries a
/// '.' or exponent so it parses as a real. Throws InvalidDocument for
/// non-finite values.
std::string format_real(double value);

}  // namespace dyann
