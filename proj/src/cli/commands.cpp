#include <fstream>
#include <ostream>
#include <sstream>
#include <system_error>

#include <CLI11.hpp>

#include "dyann/cli.hpp"
#include "dyann/error.hpp"
#include "dyann/oracle.hpp"

namespace dyann::cli {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return buf.str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw IoError("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

Network load_network_file(const fs::path& path) { return load(read_text(read_file(path))); }

void save_network_file(Network& net, const fs::path& path) {
  write_file_atomic(path, write_text(save(net)));
}

namespace {

std::vector<Sample> load_samples(const Network& net, const fs::path& path, bool has_header) {
  return parse_csv(read_file(path), net.input_layer().nodes.size(),
                   net.output_layer().nodes.size(), has_header);
}

ActivationKind activation_by_name(const std::string& name) {
  if (auto kind = parse_activation_kind(name)) return *kind;
  throw InvalidArgument("unknown activation '" + name + "'");
}

struct Options {
  std::string net;
  std::string data;
  std::string spec;
  std::string out;
  std::string history;
  bool has_header = false;
  double eta = 0.1;
  std::int64_t epochs = 1;
  std::uint64_t seed = 0;
  bool shuffle = false;
  double threshold = 0.0;
  bool sweep_isolated = false;
  std::size_t position = 1;
  std::size_t nodes = 1;
  std::string activation = "sigmoid";
  double in_density = 0.0;
  double out_density = 0.0;
};

int cmd_create(const Options& o, std::ostream& out) {
  Network net = build_network(parse_topology_spec(read_file(o.spec)));
  save_network_file(net, o.out);
  out << "created network with " << net.node_count() << " nodes and " << net.edge_count()
      << " edges\n";
  return kSuccess;
}

int cmd_train(const Options& o, std::ostream& out) {
  if (o.epochs <= 0) throw InvalidArgument("--epochs must be positive");
  Network net = load_network_file(o.net);
  if (!net.head().trainable()) {
    throw NotTrainable("network head '" + std::string(to_string(net.head().activation())) +
                       "' cannot be trained");
  }
  const std::vector<Sample> data = load_samples(net, o.data, o.has_header);

  TrainConfig cfg;
  cfg.eta = o.eta;
  cfg.epochs = static_cast<std::size_t>(o.epochs);
  cfg.seed = o.seed;
  cfg.shuffle = o.shuffle;
  const std::vector<double> history = train_sgd(net, data, cfg);

  if (!o.history.empty()) {
    std::string csv = "epoch,mean_loss\n";
    for (std::size_t i = 0; i < history.size(); ++i) {
      csv += std::to_string(i + 1) + "," + format_real(history[i]) + "\n";
    }
    write_file_atomic(o.history, csv);
  }
  save_network_file(net, o.out);
  out << "final mean_loss " << format_real(history.back()) << "\n";
  return kSuccess;
}

int cmd_eval(const Options& o, std::ostream& out) {
  Network net = load_network_file(o.net);
  const Evaluation result = evaluate(net, load_samples(net, o.data, o.has_header));
  out << "mean_loss " << format_real(result.mean_loss) << "\n";
  if (result.accuracy) out << "accuracy " << format_real(*result.accuracy) << "\n";
  return kSuccess;
}

int cmd_grow(const Options& o, std::ostream& out) {
  Network net = load_network_file(o.net);
  GrowOptions grow;
  grow.position = o.position;
  grow.nodes = o.nodes;
  grow.activation = activation_by_name(o.activation);
  grow.in_density = o.in_density;
  grow.out_density = o.out_density;
  grow.seed = o.seed;
  const std::size_t edges_before = net.edge_count();
  grow_network(net, grow);
  save_network_file(net, o.out);
  out << "inserted layer " << o.position << " with " << o.nodes << " nodes and "
      << net.edge_count() - edges_before << " edges\n";
  return kSuccess;
}

int cmd_prune(const Options& o, std::ostream& out) {
  if (!(o.threshold >= 0.0)) throw InvalidArgument("--threshold must be non-negative");
  Network net = load_network_file(o.net);
  const PruneResult result = prune_network(net, o.threshold, o.sweep_isolated);
  save_network_file(net, o.out);
  out << result.edges_pruned << " edges removed\n";
  if (o.sweep_isolated) {
    out << result.sweep.nodes_removed << " isolated nodes removed (" << result.sweep.edges_removed
        << " incoming edges, " << result.sweep.layers_removed << " empty layers)\n";
  }
  return kSuccess;
}

int cmd_check(const Options& o, std::ostream& out) {
  Network net = load_network_file(o.net);
  const std::vector<Sample> data = load_samples(net, o.data, o.has_header);
  if (data.empty()) throw InvalidArgument("check needs at least one sample");

  const CheckOptions options;
  const CheckReport report = check_network(net, data.front(), options);
  out << "forward max deviation " << format_real(report.max_forward_deviation) << " (tolerance "
      << format_real(options.forward_tolerance) << ") " << (report.forward_ok ? "ok" : "FAIL")
      << "\n";
  out << "gradient max relative error " << format_real(report.max_gradient_error) << " over "
      << report.parameters_checked << " parameters (tolerance "
      << format_real(options.gradient_tolerance) << ") " << (report.gradient_ok ? "ok" : "FAIL");
  if (!report.gradient_ok) out << " worst " << report.worst_parameter;
  out << "\n";
  for (const std::string& name : report.skipped) out << "skipped (relu kink) " << name << "\n";
  return report.passed() ? kSuccess : kCheckFailed;
}

int cmd_export_dot(const Options& o, std::ostream& out) {
  Network net = load_network_file(o.net);
  write_file_atomic(o.out, export_dot(save(net)));
  out << "wrote " << o.out << "\n";
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamic neural networks: create, grow, prune, train and inspect"};
  app.name("dyann");
  app.require_subcommand(1);

  Options o;
  auto* create = app.add_subcommand("create", "Build a network from a topology spec");
  create->add_option("spec", o.spec, "Topology spec (JSON)")->required();
  create->add_option("out", o.out, "Output network file")->required();

  auto* train = app.add_subcommand("train", "Train with per-sample SGD");
  train->add_option("net", o.net, "Network file")->required();
  train->add_option("data", o.data, "CSV dataset")->required();
  train->add_option("-o,--out", o.out, "Trained network file")->required();
  train->add_option("--eta", o.eta, "Learning rate");
  train->add_option("--epochs", o.epochs, "Number of epochs");
  train->add_option("--seed", o.seed, "Shuffle seed");
  train->add_flag("--shuffle", o.shuffle, "Shuffle samples each epoch");
  train->add_option("--history", o.history, "Write per-epoch mean loss CSV");
  train->add_flag("--has-header", o.has_header, "Dataset has a header row");

  auto* eval = app.add_subcommand("eval", "Report mean loss (and accuracy)");
  eval->add_option("net", o.net, "Network file")->required();
  eval->add_option("data", o.data, "CSV dataset")->required();
  eval->add_flag("--has-header", o.has_header, "Dataset has a header row");

  auto* grow = app.add_subcommand("grow", "Insert a new layer of nodes");
  grow->add_option("net", o.net, "Network file")->required();
  grow->add_option("-o,--out", o.out, "Output network file")->required();
  grow->add_option("--position", o.position, "Index the new layer will occupy")->required();
  grow->add_option("--nodes", o.nodes, "Nodes in the new layer")->required();
  grow->add_option("--activation", o.activation, "Activation of the new nodes");
  grow->add_option("--in-density", o.in_density, "Edge density from earlier layers");
  grow->add_option("--out-density", o.out_density, "Edge density to later layers");
  grow->add_option("--seed", o.seed, "Wiring seed");

  auto* prune = app.add_subcommand("prune", "Remove near-zero edges");
  prune->add_option("net", o.net, "Network file")->required();
  prune->add_option("-o,--out", o.out, "Output network file")->required();
  prune->add_option("--threshold", o.threshold, "Remove edges with |w| below this");
  prune->add_flag("--sweep-isolated", o.sweep_isolated,
                  "Delete hidden nodes left without outgoing edges");

  auto* check = app.add_subcommand("check", "Compare the engine against the oracle");
  check->add_option("net", o.net, "Network file")->required();
  check->add_option("data", o.data, "CSV dataset (first row is used)")->required();
  check->add_flag("--has-header", o.has_header, "Dataset has a header row");

  auto* dot = app.add_subcommand("export-dot", "Write a Graphviz rendering");
  dot->add_option("net", o.net, "Network file")->required();
  dot->add_option("out", o.out, ".dot output file")->required();

  std::vector<const char*> argv{"dyann"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*create) return cmd_create(o, out);
    if (*train) return cmd_train(o, out);
    if (*eval) return cmd_eval(o, out);
    if (*grow) return cmd_grow(o, out);
    if (*prune) return cmd_prune(o, out);
    if (*check) return cmd_check(o, out);
    if (*dot) return cmd_export_dot(o, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace dyann::cli
