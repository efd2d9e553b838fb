#include "dyann/persist.hpp"

#include <charconv>
#include <cmath>
#include <unordered_map>

#include <json.hpp>

#include "dyann/error.hpp"

namespace dyann {

namespace {

using json = nlohmann::json;

std::string quoted(const std::string& s) { return json(s).dump(); }

std::string describe(std::size_t layerindex, std::size_t nodeindex) {
  return to_string(NodeAddress{layerindex, nodeindex});
}

void require_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw InvalidDocument(what + " is not finite");
}

ActivationKind parse_node_activation(const std::string& name, const std::string& where) {
  if (auto kind = parse_activation_kind(name)) return *kind;
  throw UnknownActivation("unknown activation '" + name + "' at node " + where);
}

OutputHead parse_head(const HeadRecord& head) {
  const auto activation = parse_output_activation(head.activation);
  if (!activation) throw UnknownActivation("unknown output activation '" + head.activation + "'");
  const auto loss = parse_loss_kind(head.loss);
  if (!loss) throw UnknownActivation("unknown loss '" + head.loss + "'");
  try {
    return OutputHead(*activation, *loss);
  } catch (const InvalidArgument& e) {
    throw InvalidDocument(e.what());
  }
}

// Checks every document invariant before anything is built.
void validate(const NetworkDocument& doc) {
  if (doc.format_version != kFormatVersion) {
    throw BadVersion("unsupported format_version " + std::to_string(doc.format_version) +
                     " (this reader understands " + std::to_string(kFormatVersion) + ")");
  }
  const auto& sizes = doc.layer_sizes;
  if (sizes.size() < 2) throw InvalidDocument("a network needs at least two layers");
  if (sizes.front() == 0 || sizes.back() == 0) {
    throw InvalidDocument("input and output layers must not be empty");
  }
  std::size_t total = 0;
  for (std::size_t s : sizes) total += s;
  if (doc.nodes.size() != total) {
    throw InvalidDocument("layer_sizes describe " + std::to_string(total) + " nodes but " +
                          std::to_string(doc.nodes.size()) + " are recorded");
  }

  const auto in_bounds = [&](std::size_t l, std::size_t n) {
    return l < sizes.size() && n < sizes[l];
  };

  for (std::size_t k = 0; k < doc.nodes.size(); ++k) {
    const NodeRecord& rec = doc.nodes[k];
    const std::string where = describe(rec.layerindex, rec.nodeindex);
    if (k > 0) {
      const NodeRecord& prev = doc.nodes[k - 1];
      if (NodeAddress{rec.layerindex, rec.nodeindex} <=
          NodeAddress{prev.layerindex, prev.nodeindex}) {
        throw UnsortedDocument("node " + where + " is out of order or repeated");
      }
    }
    if (!in_bounds(rec.layerindex, rec.nodeindex)) {
      throw InvalidDocument("node " + where + " lies outside layer_sizes");
    }
    const ActivationKind act = parse_node_activation(rec.actfunction, where);
    require_finite(rec.bias, "bias of " + where);
    require_finite(rec.actvalue, "actvalue of " + where);
    if (rec.layerindex == 0 && (rec.bias != 0.0 || act != ActivationKind::Linear)) {
      throw InvalidDocument("input node " + where + " must be linear with zero bias");
    }

    for (std::size_t j = 0; j < rec.edges.size(); ++j) {
      const EdgeRecord& e = rec.edges[j];
      const std::string edge = where + " -> " + describe(e.layerindex, e.nodeindex);
      if (!in_bounds(e.layerindex, e.nodeindex)) {
        throw DanglingTarget("edge " + edge + " targets a node that does not exist");
      }
      if (e.layerindex <= rec.layerindex) {
        throw NonForwardEdge("edge " + edge + " does not point to a later layer");
      }
      if (j > 0) {
        const EdgeRecord& prev = rec.edges[j - 1];
        const NodeAddress here{e.layerindex, e.nodeindex};
        const NodeAddress before{prev.layerindex, prev.nodeindex};
        if (here == before) throw DuplicateEdge("edge " + edge + " is repeated");
        if (here < before) throw UnsortedDocument("edges of " + where + " are out of order");
      }
      require_finite(e.weight, "weight of " + edge);
    }
  }
}

// --- reading -------------------------------------------------------------

[[noreturn]] void type_error(const std::string& path, const char* expected) {
  throw InvalidDocument(path + ": expected " + expected);
}

void require_keys(const json& obj, const std::string& path,
                  std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) type_error(path, "an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (auto k : keys) known = known || item.key() == k;
    if (!known) throw UnknownKey(path + ": unknown key '" + item.key() + "'");
  }
  for (auto k : keys) {
    if (!obj.contains(k)) {
      throw InvalidDocument(path + ": missing key '" + std::string(k) + "'");
    }
  }
}

std::size_t read_index(const json& v, const std::string& path) {
  if (!v.is_number_unsigned()) type_error(path, "a non-negative integer");
  return v.get<std::size_t>();
}

double read_real(const json& v, const std::string& path) {
  if (!v.is_number()) type_error(path, "a number");
  return v.get<double>();
}

std::string read_string(const json& v, const std::string& path) {
  if (!v.is_string()) type_error(path, "a string");
  return v.get<std::string>();
}

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
  // nlohmann reports the 1-based position of the offending character.
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

std::string format_real(double value) {
  if (!std::isfinite(value)) {
    throw InvalidDocument("cannot serialize non-finite value");
  }
  char buf[64];
  const auto [end, ec] = std::to_chars(std::begin(buf), std::end(buf), value);
  std::string out(buf, end);
  if (out.find_first_of(".e") == std::string::npos) out += ".0";
  return out;
}

NetworkDocument save(Network& net) {
  net.assign_indices();

  NetworkDocument doc;
  doc.head.activation = to_string(net.head().activation());
  doc.head.loss = to_string(net.head().loss());
  doc.layer_sizes = net.layer_sizes();

  for (const Layer& layer : net.layers()) {
    for (NodeId id : layer.nodes) {
      const Node& n = net.node(id);
      NodeRecord rec;
      rec.layerindex = n.address.layerindex;
      rec.nodeindex = n.address.nodeindex;
      rec.bias = n.bias;
      rec.actvalue = n.actvalue;
      rec.actfunction = to_string(n.actfunction);
      rec.edges.reserve(n.edges().size());
      for (const Edge& e : n.edges()) {
        const NodeAddress& t = net.node(e.target()).address;
        rec.edges.push_back(EdgeRecord{t.layerindex, t.nodeindex, e.weight});
      }
      std::sort(rec.edges.begin(), rec.edges.end(), [](const EdgeRecord& a, const EdgeRecord& b) {
        return NodeAddress{a.layerindex, a.nodeindex} < NodeAddress{b.layerindex, b.nodeindex};
      });
      doc.nodes.push_back(std::move(rec));
    }
  }
  return doc;
}

Network load(const NetworkDocument& doc) {
  validate(doc);

  const auto& sizes = doc.layer_sizes;
  Network net(sizes.front(), sizes.back(), parse_head(doc.head));
  for (std::size_t li = 1; li + 1 < sizes.size(); ++li) {
    net.insert_layer(li);
    for (std::size_t i = 0; i < sizes[li]; ++i) {
      net.insert_node(li, 0.0, ActivationKind::Linear);
    }
  }

  // Records arrive in (layerindex, nodeindex) order, as do the network's
  // own lists, so matching is a single ordered pass and each edge list a
  // nested one.
  for (const NodeRecord& rec : doc.nodes) {
    const NodeAddress at{rec.layerindex, rec.nodeindex};
    Node& n = net.node(net.node_at(at));
    n.bias = rec.bias;
    n.actvalue = rec.actvalue;
    n.actfunction = parse_node_activation(rec.actfunction, to_string(at));
    for (const EdgeRecord& e : rec.edges) {
      net.add_edge(at, NodeAddress{e.layerindex, e.nodeindex}, e.weight);
    }
  }
  net.assign_indices();
  return net;
}

std::string write_text(const NetworkDocument& doc) {
  std::string out;
  out += "{\n";
  out += "  \"format_version\": " + std::to_string(doc.format_version) + ",\n";
  out += "  \"head\": {\"activation\": " + quoted(doc.head.activation) +
         ", \"loss\": " + quoted(doc.head.loss) + "},\n";
  out += "  \"layer_sizes\": [";
  for (std::size_t i = 0; i < doc.layer_sizes.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(doc.layer_sizes[i]);
  }
  out += "],\n";
  out += "  \"nodes\": [";
  for (std::size_t k = 0; k < doc.nodes.size(); ++k) {
    const NodeRecord& n = doc.nodes[k];
    out += k == 0 ? "\n" : ",\n";
    out += "    {\"layerindex\": " + std::to_string(n.layerindex) +
           ", \"nodeindex\": " + std::to_string(n.nodeindex) +
           ", \"bias\": " + format_real(n.bias) + ", \"actvalue\": " + format_real(n.actvalue) +
           ", \"actfunction\": " + quoted(n.actfunction) + ", \"edges\": [";
    for (std::size_t j = 0; j < n.edges.size(); ++j) {
      const EdgeRecord& e = n.edges[j];
      out += j == 0 ? "\n" : ",\n";
      out += "      {\"layerindex\": " + std::to_string(e.layerindex) +
             ", \"nodeindex\": " + std::to_string(e.nodeindex) +
             ", \"weight\": " + format_real(e.weight) + "}";
    }
    out += n.edges.empty() ? "]}" : "\n    ]}";
  }
  out += doc.nodes.empty() ? "]\n" : "\n  ]\n";
  out += "}\n";
  return out;
}

NetworkDocument read_text(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_and_column(text, e.byte);
    throw SyntaxError("syntax error at line " + std::to_string(line) + ", column " +
                          std::to_string(column) + ": " + e.what(),
                      line, column);
  }

  require_keys(root, "document", {"format_version", "head", "layer_sizes", "nodes"});

  NetworkDocument doc;
  const json& version = root["format_version"];
  if (!version.is_number_integer()) type_error("format_version", "an integer");
  doc.format_version = version.get<std::int64_t>();

  const json& head = root["head"];
  require_keys(head, "head", {"activation", "loss"});
  doc.head.activation = read_string(head["activation"], "head.activation");
  doc.head.loss = read_string(head["loss"], "head.loss");

  const json& sizes = root["layer_sizes"];
  if (!sizes.is_array()) type_error("layer_sizes", "an array");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    doc.layer_sizes.push_back(read_index(sizes[i], "layer_sizes[" + std::to_string(i) + "]"));
  }

  const json& nodes = root["nodes"];
  if (!nodes.is_array()) type_error("nodes", "an array");
  doc.nodes.reserve(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::string path = "nodes[" + std::to_string(k) + "]";
    const json& n = nodes[k];
    require_keys(n, path,
                 {"layerindex", "nodeindex", "bias", "actvalue", "actfunction", "edges"});
    NodeRecord rec;
    rec.layerindex = read_index(n["layerindex"], path + ".layerindex");
    rec.nodeindex = read_index(n["nodeindex"], path + ".nodeindex");
    rec.bias = read_real(n["bias"], path + ".bias");
    rec.actvalue = read_real(n["actvalue"], path + ".actvalue");
    rec.actfunction = read_string(n["actfunction"], path + ".actfunction");
    const json& edges = n["edges"];
    if (!edges.is_array()) type_error(path + ".edges", "an array");
    rec.edges.reserve(edges.size());
    for (std::size_t j = 0; j < edges.size(); ++j) {
      const std::string epath = path + ".edges[" + std::to_string(j) + "]";
      const json& e = edges[j];
      require_keys(e, epath, {"layerindex", "nodeindex", "weight"});
      rec.edges.push_back(EdgeRecord{read_index(e["layerindex"], epath + ".layerindex"),
                                     read_index(e["nodeindex"], epath + ".nodeindex"),
                                     read_real(e["weight"], epath + ".weight")});
    }
    doc.nodes.push_back(std::move(rec));
  }
  return doc;
}

}  // namespace dyann
