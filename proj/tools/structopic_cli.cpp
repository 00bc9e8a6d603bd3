// structopic: staged structural-topic pipeline.
//
//   structopic synth  --workdir w --n 10
//   structopic walks  --workdir w
//   structopic topics --workdir w --topics 3
//   structopic train  --workdir w --nf
//   structopic eval   --workdir w

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <optional>

#include "structopic/error.hpp"
#include "structopic/pipeline.hpp"

using namespace structopic;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::string> workdir, edges, features, labels, unit, ablation, nmf_input;
  std::optional<int> walks_per_node, walk_length, topics, epochs, n, eval_runs, nmf_iters;
  std::optional<double> fraction, learning_rate;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool nf = false;
  bool no_anchors = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_path, "JSON config file; flags override its keys");
  cmd->add_option("-w,--workdir", o.workdir, "artifact directory");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--threads", o.threads, "worker threads");
}

void add_graph(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--edges", o.edges, "edge list (default: <workdir>/graph.edges.tsv)");
}

void add_walks(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-N,--walks-per-node", o.walks_per_node);
  cmd->add_option("-l,--walk-length", o.walk_length, "walk length in steps");
  cmd->add_option("--unit", o.unit, "anonymous | node | degree | raw");
}

void add_topics(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-K,--topics", o.topics, "topic count (= anchor count)");
  cmd->add_flag("--no-anchors", o.no_anchors, "collapsed Gibbs LDA instead of anchor recovery");
  cmd->add_option("--nmf-iters", o.nmf_iters);
  cmd->add_option("--nmf-input", o.nmf_input, "raw | row_normalized");
}

void add_train(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--features", o.features, "node feature CSV");
  cmd->add_option("--ablation", o.ablation, "full | nf | concat");
  cmd->add_flag("--nf", o.nf, "structural view only, no raw features (same as --ablation nf)");
  cmd->add_option("--epochs", o.epochs);
  cmd->add_option("--lr", o.learning_rate);
}

PipelineConfig resolve(const Overrides& o) {
  PipelineConfig c;
  if (!o.config_path.empty()) c = load_config(o.config_path, c);
  if (o.workdir) c.workdir = *o.workdir;
  if (o.edges) c.edges = *o.edges;
  if (o.features) c.features = *o.features;
  if (o.labels) c.labels = *o.labels;
  if (o.unit) c.unit = parse_walk_unit(*o.unit);
  if (o.ablation) c.ablation = parse_ablation(*o.ablation);
  if (o.nf) {
    if (o.ablation && c.ablation != Ablation::kNoFeatures) throw ConfigError("--nf conflicts with --ablation " + *o.ablation);
    c.ablation = Ablation::kNoFeatures;
  }
  if (o.nmf_input) {
    c = config_from_json(nlohmann::json({{"nmf_input", *o.nmf_input}}).dump(), c);
  }
  if (o.no_anchors) c.no_anchors = true;
  if (o.walks_per_node) c.walks_per_node = *o.walks_per_node;
  if (o.walk_length) c.walk_length = *o.walk_length;
  if (o.topics) c.topics = *o.topics;
  if (o.nmf_iters) c.nmf_iters = *o.nmf_iters;
  if (o.epochs) c.train.epochs = *o.epochs;
  if (o.learning_rate) c.train.learning_rate = *o.learning_rate;
  if (o.n) c.synthetic.n = *o.n;
  if (o.eval_runs) c.eval_runs = *o.eval_runs;
  if (o.fraction) c.link_fraction = *o.fraction;
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  return c;
}

void report(const char* stage, const StageResult& r) {
  nlohmann::json out = {{"stage", stage}, {"config_hash", r.config_hash}, {"reused", r.reused}};
  out["outputs"] = nlohmann::json::array();
  for (const auto& p : r.outputs) out["outputs"].push_back(p.string());
  for (const auto& n : r.notices) std::cerr << "note: " << n << '\n';
  std::cout << out.dump() << '\n';
}

int fail(std::string_view kind, std::string_view message) {
  std::cerr << nlohmann::json({{"error", kind}, {"message", message}}).dump() << '\n';
  return kind == "usage_error" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structural-topic graph embedding pipeline"};
  app.require_subcommand(1);
  Overrides o;

  auto* synth = app.add_subcommand("synth", "write the synthetic ring G(n) and its structure labels");
  add_common(synth, o);
  synth->add_option("-n", o.n, "number of cluster/T/star triples");

  auto* walks = app.add_subcommand("walks", "sample walks, build Y, M and the vocabulary");
  add_common(walks, o);
  add_graph(walks, o);
  add_walks(walks, o);
  add_topics(walks, o);
  add_train(walks, o);

  auto* topics = app.add_subcommand("topics", "recover anchors, walk-topic U and node-topic R");
  add_common(topics, o);
  add_graph(topics, o);
  add_walks(topics, o);
  add_topics(topics, o);
  add_train(topics, o);

  auto* train = app.add_subcommand("train", "train the topic-guided multi-view GCN");
  add_common(train, o);
  add_graph(train, o);
  add_walks(train, o);
  add_topics(train, o);
  add_train(train, o);

  auto* eval = app.add_subcommand("eval", "link reconstruction, classification and 2D projection");
  add_common(eval, o);
  add_graph(eval, o);
  add_walks(eval, o);
  add_topics(eval, o);
  add_train(eval, o);
  eval->add_option("--labels", o.labels, "node_id<TAB>label file");
  eval->add_option("--fraction", o.fraction, "fraction of edges sampled as positives");
  eval->add_option("--runs", o.eval_runs, "classification splits to average");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage_error", e.what());
  }

  try {
    const auto config = resolve(o);
    if (synth->parsed()) report("synth", cmd_synth(config));
    if (walks->parsed()) report("walks", cmd_walks(config));
    if (topics->parsed()) report("topics", cmd_topics(config));
    if (train->parsed()) report("train", cmd_train(config));
    if (eval->parsed()) report("eval", cmd_eval(config));
  } catch (const Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail("internal_error", e.what());
  }
  return 0;
}
