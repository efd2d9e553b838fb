#include <cstdio>
#include <string>

#include "dyann/cli.hpp"

namespace dyann::cli {

namespace {

std::string dot_id(std::size_t layerindex, std::size_t nodeindex) {
  return "n" + std::to_string(layerindex) + "_" + std::to_string(nodeindex);
}

std::string four_significant(double w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", w);
  return buf;
}

}  // namespace

std::string export_dot(const NetworkDocument& doc) {
  std::string out = "digraph dyann {\n  rankdir=LR;\n  node [shape=circle];\n";

  for (std::size_t li = 0; li < doc.layer_sizes.size(); ++li) {
    out += "  subgraph cluster_" + std::to_string(li) + " {\n";
    out += "    label=\"layer " + std::to_string(li) + "\";\n";
    for (std::size_t ni = 0; ni < doc.layer_sizes[li]; ++ni) {
      out += "    " + dot_id(li, ni) + " [label=\"(" + std::to_string(li) + "," +
             std::to_string(ni) + ")\"];\n";
    }
    out += "  }\n";
  }

  for (const NodeRecord& n : doc.nodes) {
    for (const EdgeRecord& e : n.edges) {
      out += "  " + dot_id(n.layerindex, n.nodeindex) + " -> " +
             dot_id(e.layerindex, e.nodeindex) + " [label=\"" + four_significant(e.weight) +
             "\"];\n";
    }
  }
  out += "}\n";
  return out;
}

}  // namespace dyann::cli
