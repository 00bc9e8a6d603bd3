#include "structopic/pipeline.hpp"

#include <nlohmann/json.hpp>

#include "structopic/error.hpp"
#include "structopic/eval.hpp"
#include "structopic/io.hpp"
#include "text.hpp"

namespace structopic {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view to_string(NmfInput input) {
  return input == NmfInput::kRowNormalized ? "row_normalized" : "raw";
}

NmfInput parse_nmf_input(std::string_view name) {
  if (name == "raw") return NmfInput::kRaw;
  if (name == "row_normalized") return NmfInput::kRowNormalized;
  throw ConfigError("unknown nmf_input '" + std::string(name) + "' (expected raw or row_normalized)");
}

json train_to_json(const TrainConfig& t) {
  return {{"output_dim", t.output_dim},
          {"hidden_dim", t.hidden_dim},
          {"layers", t.layers},
          {"learning_rate", t.learning_rate},
          {"neighbor_sample", t.neighbor_sample},
          {"window", t.window},
          {"negatives", t.negatives},
          {"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"batches_per_epoch", t.batches_per_epoch},
          {"early_stop", t.early_stop}};
}

template <typename T>
void read_key(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::string hash_json(const json& j) { return io::hex64(io::fnv1a(j.dump())); }

fs::path edges_path(const PipelineConfig& c) {
  return c.edges.empty() ? c.workdir / artifact::kSyntheticEdges : c.edges;
}

std::optional<fs::path> labels_path(const PipelineConfig& c) {
  if (!c.labels.empty()) return c.labels;
  const auto fallback = c.workdir / artifact::kSyntheticLabels;
  if (c.edges.empty() && fs::exists(fallback)) return fallback;
  return std::nullopt;
}

struct LoadedGraph {
  Graph graph;
  std::string hash;
};

LoadedGraph load_graph(const PipelineConfig& c, bool with_features, bool with_labels) {
  const auto path = edges_path(c);
  if (!fs::exists(path)) {
    throw IoError("edge list not found: " + path.string() +
                  (c.edges.empty() ? " (pass --edges or run `structopic synth` first)" : ""));
  }
  LoadedGraph out{load_edge_list(path), io::hex64(io::hash_file(path))};
  if (with_features && !c.features.empty()) load_features(c.features, out.graph);
  if (with_labels) {
    if (auto labels = labels_path(c)) load_labels(*labels, out.graph);
  }
  return out;
}

json read_sidecar(const fs::path& path) {
  try {
    return json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

bool sidecar_matches(const fs::path& sidecar, const std::string& hash, const std::vector<fs::path>& outputs) {
  if (!fs::exists(sidecar)) return false;
  const auto j = read_sidecar(sidecar);
  if (j.value("config_hash", std::string()) != hash) return false;
  for (const auto& p : outputs) {
    if (!fs::exists(p)) return false;
  }
  return true;
}

void ensure_workdir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create workdir " + dir.string() + ": " + ec.message());
}

std::string walks_hash(const PipelineConfig& c, const std::string& graph_hash) {
  return hash_json({{"stage", "walks"},
                    {"graph", graph_hash},
                    {"walks_per_node", c.walks_per_node},
                    {"walk_length", c.walk_length},
                    {"unit", to_string(c.unit)},
                    {"seed", c.seed}});
}

std::string topics_hash(const PipelineConfig& c, const std::string& walks) {
  return hash_json({{"stage", "topics"},
                    {"walks", walks},
                    {"topics", c.topics},
                    {"no_anchors", c.no_anchors},
                    {"nmf_iters", c.nmf_iters},
                    {"nmf_tolerance", c.nmf_tolerance},
                    {"nmf_input", to_string(c.nmf_input)},
                    {"lda_sweeps", c.lda_sweeps},
                    {"seed", c.seed}});
}

std::string train_hash(const PipelineConfig& c, const std::string& topics, const std::string& features) {
  return hash_json({{"stage", "train"},
                    {"topics", topics},
                    {"train", train_to_json(c.train)},
                    {"ablation", to_string(c.ablation)},
                    {"features", features},
                    {"seed", c.seed}});
}

// Hash of the upstream stage as recorded in its sidecar, after checking it
// agrees with the current configuration.
std::string require_stage(const fs::path& sidecar, const std::string& expected, const char* stage) {
  if (!fs::exists(sidecar)) {
    throw ConfigError(std::string("missing ") + stage + " artifacts: " + sidecar.string() +
                      " not found; run `structopic " + stage + "` with the same workdir first");
  }
  const auto j = read_sidecar(sidecar);
  const auto found = j.value("config_hash", std::string());
  if (found != expected) {
    throw ConfigError(std::string("stale ") + stage + " artifacts in " + sidecar.parent_path().string() +
                      " (config hash " + found + ", current configuration expects " + expected +
                      "); rerun `structopic " + stage + "`");
  }
  return found;
}

std::string features_hash(const PipelineConfig& c) {
  if (c.ablation == Ablation::kNoFeatures || c.features.empty()) return "none";
  return io::hex64(io::hash_file(c.features));
}

WalkCorpus load_walk_corpus(const PipelineConfig& c, NodeId num_nodes) {
  WalkCorpus shape;
  shape.walks_per_node = c.walks_per_node;
  shape.steps = c.walk_length;
  shape.unit = c.unit;
  shape.seed = c.seed;
  return load_corpus(c.workdir / artifact::kWalks, shape, num_nodes);
}

TopicModel load_topic_model(const PipelineConfig& c) {
  TopicModel model;
  model.u = io::read_dense_tsv(c.workdir / artifact::kWalkTopic, false);
  model.r = io::read_dense_tsv(c.workdir / artifact::kNodeTopic, true);
  const auto anchors = read_sidecar(c.workdir / artifact::kAnchorsJson);
  for (const auto& a : anchors.at("anchors")) model.anchors.ids.push_back(a.at("walk_id").get<int>());
  return model;
}

}  // namespace

void PipelineConfig::validate() const {
  if (topics < 1) throw ConfigError("topic count K must be >= 1");
  if (walks_per_node < 1) throw ConfigError("walks per node N must be >= 1");
  if (walk_length < 1) throw ConfigError("walk length l must be >= 1");
  if (nmf_iters < 1 || lda_sweeps < 1) throw ConfigError("iteration counts must be >= 1");
  if (!(link_fraction > 0.0 && link_fraction <= 1.0)) throw ConfigError("link fraction must lie in (0, 1]");
  for (double f : train_fractions) {
    if (!(f > 0.0 && f < 1.0)) throw ConfigError("train fractions must lie in (0, 1)");
  }
  if (eval_runs < 1) throw ConfigError("eval_runs must be >= 1");
  try {
    train.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
}

PipelineConfig config_from_json(const std::string& json_text, PipelineConfig c) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  std::string s;
  if (j.contains("workdir")) c.workdir = j.at("workdir").get<std::string>();
  if (j.contains("edges")) c.edges = j.at("edges").get<std::string>();
  if (j.contains("features")) c.features = j.at("features").get<std::string>();
  if (j.contains("labels")) c.labels = j.at("labels").get<std::string>();
  read_key(j, "walks_per_node", c.walks_per_node);
  read_key(j, "walk_length", c.walk_length);
  if (j.contains("unit")) c.unit = parse_walk_unit(j.at("unit").get<std::string>());
  read_key(j, "topics", c.topics);
  read_key(j, "no_anchors", c.no_anchors);
  read_key(j, "nmf_iters", c.nmf_iters);
  read_key(j, "nmf_tolerance", c.nmf_tolerance);
  if (j.contains("nmf_input")) c.nmf_input = parse_nmf_input(j.at("nmf_input").get<std::string>());
  read_key(j, "lda_sweeps", c.lda_sweeps);
  if (j.contains("ablation")) c.ablation = parse_ablation(j.at("ablation").get<std::string>());
  read_key(j, "link_fraction", c.link_fraction);
  read_key(j, "train_fractions", c.train_fractions);
  read_key(j, "eval_runs", c.eval_runs);
  read_key(j, "seed", c.seed);
  read_key(j, "threads", c.threads);
  if (j.contains("train")) {
    const auto& t = j.at("train");
    read_key(t, "output_dim", c.train.output_dim);
    read_key(t, "hidden_dim", c.train.hidden_dim);
    read_key(t, "layers", c.train.layers);
    read_key(t, "learning_rate", c.train.learning_rate);
    read_key(t, "neighbor_sample", c.train.neighbor_sample);
    read_key(t, "window", c.train.window);
    read_key(t, "negatives", c.train.negatives);
    read_key(t, "epochs", c.train.epochs);
    read_key(t, "batch_size", c.train.batch_size);
    read_key(t, "batches_per_epoch", c.train.batches_per_epoch);
    read_key(t, "early_stop", c.train.early_stop);
  }
  if (j.contains("synthetic")) {
    const auto& g = j.at("synthetic");
    read_key(g, "n", c.synthetic.n);
    read_key(g, "cluster_size", c.synthetic.cluster_size);
    read_key(g, "t_arm_len", c.synthetic.t_arm_len);
    read_key(g, "star_leaves", c.synthetic.star_leaves);
  }
  return c;
}

PipelineConfig load_config(const fs::path& path, PipelineConfig base) {
  return config_from_json(io::read_text(path), std::move(base));
}

std::string config_to_json(const PipelineConfig& c) {
  json j = {{"workdir", c.workdir.string()},
            {"edges", c.edges.string()},
            {"features", c.features.string()},
            {"labels", c.labels.string()},
            {"walks_per_node", c.walks_per_node},
            {"walk_length", c.walk_length},
            {"unit", to_string(c.unit)},
            {"topics", c.topics},
            {"no_anchors", c.no_anchors},
            {"nmf_iters", c.nmf_iters},
            {"nmf_tolerance", c.nmf_tolerance},
            {"nmf_input", to_string(c.nmf_input)},
            {"lda_sweeps", c.lda_sweeps},
            {"train", train_to_json(c.train)},
            {"ablation", to_string(c.ablation)},
            {"link_fraction", c.link_fraction},
            {"train_fractions", c.train_fractions},
            {"eval_runs", c.eval_runs},
            {"synthetic",
             {{"n", c.synthetic.n},
              {"cluster_size", c.synthetic.cluster_size},
              {"t_arm_len", c.synthetic.t_arm_len},
              {"star_leaves", c.synthetic.star_leaves}}},
            {"seed", c.seed},
            {"threads", c.threads}};
  return j.dump(2);
}

StageResult cmd_synth(const PipelineConfig& config) {
  ensure_workdir(config.workdir);
  SyntheticSpec spec = config.synthetic;
  spec.seed = config.seed;
  const Graph graph = generate_synthetic(spec);
  StageResult result;
  const auto edges = config.workdir / artifact::kSyntheticEdges;
  const auto labels = config.workdir / artifact::kSyntheticLabels;
  write_edge_list(edges, graph);
  write_labels(labels, graph);
  result.outputs = {edges, labels};
  result.config_hash = hash_json({{"stage", "synth"},
                                  {"n", spec.n},
                                  {"cluster_size", spec.cluster_size},
                                  {"t_arm_len", spec.t_arm_len},
                                  {"star_leaves", spec.star_leaves},
                                  {"seed", spec.seed}});
  result.notices.push_back("G(" + std::to_string(spec.n) + "): " + std::to_string(graph.num_nodes()) +
                           " nodes, " + std::to_string(graph.num_edges()) + " edges");
  return result;
}

StageResult cmd_walks(const PipelineConfig& config) {
  config.validate();
  ensure_workdir(config.workdir);
  const auto loaded = load_graph(config, false, false);
  StageResult result;
  result.config_hash = walks_hash(config, loaded.hash);
  const auto dir = config.workdir;
  result.outputs = {dir / artifact::kVocabulary, dir / artifact::kWalks, dir / artifact::kNodeWalk,
                    dir / artifact::kCooccurrence, dir / artifact::kWalksSidecar};
  if (sidecar_matches(dir / artifact::kWalksSidecar, result.config_hash, result.outputs)) {
    result.reused = true;
    return result;
  }

  CorpusOptions options;
  options.walks_per_node = config.walks_per_node;
  options.steps = config.walk_length;
  options.unit = config.unit;
  options.seed = config.seed;
  options.threads = config.threads;
  const auto built = build_corpus(loaded.graph, options);
  const auto m = build_cooccurrence(built.corpus, built.vocab);

  const std::string header = "config_hash=" + result.config_hash;
  save_vocabulary(dir / artifact::kVocabulary, built.vocab, header);
  save_corpus(dir / artifact::kWalks, built.corpus, header);
  io::write_sparse_tsv(dir / artifact::kNodeWalk, built.node_walk, header);
  io::write_sparse_tsv(dir / artifact::kCooccurrence, m, header);

  std::size_t isolated = 0;
  for (bool b : built.corpus.isolated) isolated += b;
  const json sidecar = {{"config_hash", result.config_hash},
                        {"graph_hash", loaded.hash},
                        {"seed", config.seed},
                        {"walks_per_node", config.walks_per_node},
                        {"walk_length", config.walk_length},
                        {"unit", to_string(config.unit)},
                        {"num_nodes", loaded.graph.num_nodes()},
                        {"isolated_nodes", isolated},
                        {"vocab_size", built.vocab.size()},
                        {"cooccurrence_nnz", m.nonZeros()}};
  io::write_text(dir / artifact::kWalksSidecar, sidecar.dump(2) + "\n");
  if (isolated) result.notices.push_back(std::to_string(isolated) + " isolated nodes have empty walk sets");
  result.notices.push_back("vocabulary size " + std::to_string(built.vocab.size()));
  return result;
}

StageResult cmd_topics(const PipelineConfig& config) {
  config.validate();
  const auto loaded = load_graph(config, false, false);
  const auto dir = config.workdir;
  const auto walks = require_stage(dir / artifact::kWalksSidecar, walks_hash(config, loaded.hash), "walks");
  StageResult result;
  result.config_hash = topics_hash(config, walks);
  result.outputs = {dir / artifact::kAnchorsTsv, dir / artifact::kAnchorsJson, dir / artifact::kWalkTopic,
                    dir / artifact::kNodeTopic, dir / artifact::kTopicsSidecar};
  if (sidecar_matches(dir / artifact::kTopicsSidecar, result.config_hash, result.outputs)) {
    result.reused = true;
    return result;
  }

  const auto vocab = load_vocabulary(dir / artifact::kVocabulary);
  const SparseMatrix y = io::read_sparse_tsv(dir / artifact::kNodeWalk);
  json sidecar = {{"config_hash", result.config_hash},
                  {"topics", config.topics},
                  {"no_anchors", config.no_anchors},
                  {"seed", config.seed}};
  TopicModel model;
  if (config.no_anchors) {
    LdaOptions lda;
    lda.sweeps = config.lda_sweeps;
    model = recover_no_anchor(y, config.topics, config.seed, lda);
  } else {
    const SparseMatrix m = io::read_sparse_tsv(dir / artifact::kCooccurrence);
    if (static_cast<std::size_t>(config.topics) > vocab.size()) {
      throw ConfigError("K=" + std::to_string(config.topics) + " exceeds the vocabulary size " +
                        std::to_string(vocab.size()));
    }
    AnchorModelOptions options;
    options.k = config.topics;
    options.nmf_iters = config.nmf_iters;
    options.nmf_tolerance = config.nmf_tolerance;
    options.nmf_input = config.nmf_input;
    options.seed = config.seed;
    options.kl.threads = config.threads;
    auto fit = fit_anchor_model(y, m, options);
    model = std::move(fit.model);
    sidecar["nmf_iterations"] = fit.nmf.objective_trace.size() - 1;
    sidecar["nmf_objective"] = fit.nmf.objective_trace.back();
    sidecar["nmf_converged"] = fit.nmf.converged;
    sidecar["uniform_walk_rows"] = fit.uniform_rows.size();
    if (!fit.uniform_rows.empty()) {
      result.notices.push_back(std::to_string(fit.uniform_rows.size()) +
                               " walks had empty co-occurrence rows and got uniform topic coefficients");
    }
  }
  sidecar["walk_topic_mean_entropy"] = mean_row_entropy(model.u);

  const std::string header = "config_hash=" + result.config_hash;
  std::string anchors_tsv = "# " + header + "\n";
  json anchors = json::array();
  for (std::size_t k = 0; k < model.anchors.size(); ++k) {
    const int id = model.anchors.ids[k];
    anchors_tsv += std::to_string(k) + '\t' + std::to_string(id) + '\t' + vocab.decode(static_cast<std::size_t>(id)) + '\n';
    anchors.push_back({{"topic", k}, {"walk_id", id}, {"walk", vocab.decode(static_cast<std::size_t>(id))}});
  }
  io::write_text(dir / artifact::kAnchorsTsv, anchors_tsv);
  io::write_text(dir / artifact::kAnchorsJson,
                 json({{"config_hash", result.config_hash}, {"unit", to_string(vocab.unit())}, {"anchors", anchors}})
                         .dump(2) + "\n");
  io::write_dense_tsv(dir / artifact::kWalkTopic, model.u, header);
  io::write_dense_tsv(dir / artifact::kNodeTopic, model.r, header, loaded.graph.original_ids());
  io::write_text(dir / artifact::kTopicsSidecar, sidecar.dump(2) + "\n");
  return result;
}

StageResult cmd_train(const PipelineConfig& config) {
  config.validate();
  const bool needs_features = config.ablation != Ablation::kNoFeatures;
  if (needs_features && config.features.empty()) {
    throw ConfigError("ablation '" + std::string(to_string(config.ablation)) +
                      "' needs --features; use --nf to train on structural topics only");
  }
  const auto loaded = load_graph(config, needs_features, false);
  const auto dir = config.workdir;
  const auto walks = require_stage(dir / artifact::kWalksSidecar, walks_hash(config, loaded.hash), "walks");
  const auto topics = require_stage(dir / artifact::kTopicsSidecar, topics_hash(config, walks), "topics");
  StageResult result;
  result.config_hash = train_hash(config, topics, features_hash(config));
  result.outputs = {dir / artifact::kEmbeddings, dir / artifact::kTrainLog, dir / artifact::kTrainSidecar};
  if (sidecar_matches(dir / artifact::kTrainSidecar, result.config_hash, result.outputs)) {
    result.reused = true;
    return result;
  }

  const auto corpus = load_walk_corpus(config, loaded.graph.num_nodes());
  const auto model = load_topic_model(config);
  TrainConfig train_config = config.train;
  train_config.seed = config.seed;
  const auto table = train(loaded.graph, model, corpus, train_config, config.ablation);

  const std::string header = "config_hash=" + result.config_hash;
  save_embeddings(dir / artifact::kEmbeddings, loaded.graph, table.embeddings, header);
  std::string log;
  for (const auto& e : table.log) log += json({{"epoch", e.epoch}, {"loss", e.loss}}).dump() + "\n";
  io::write_text(dir / artifact::kTrainLog, log);
  const json sidecar = {{"config_hash", result.config_hash},
                        {"ablation", to_string(config.ablation)},
                        {"epochs_run", table.log.size()},
                        {"final_loss", table.log.empty() ? 0.0 : table.log.back().loss},
                        {"parameters", table.params.parameter_count()},
                        {"seed", config.seed}};
  io::write_text(dir / artifact::kTrainSidecar, sidecar.dump(2) + "\n");
  return result;
}

StageResult cmd_eval(const PipelineConfig& config) {
  config.validate();
  const auto loaded = load_graph(config, false, true);
  const auto dir = config.workdir;
  const auto walks = require_stage(dir / artifact::kWalksSidecar, walks_hash(config, loaded.hash), "walks");
  const auto topics = require_stage(dir / artifact::kTopicsSidecar, topics_hash(config, walks), "topics");
  const auto trained = require_stage(dir / artifact::kTrainSidecar,
                                     train_hash(config, topics, features_hash(config)), "train");
  StageResult result;
  result.config_hash = hash_json({{"stage", "eval"},
                                  {"train", trained},
                                  {"link_fraction", config.link_fraction},
                                  {"train_fractions", config.train_fractions},
                                  {"eval_runs", config.eval_runs},
                                  {"labels", loaded.graph.has_labels() ? "yes" : "no"},
                                  {"seed", config.seed}});

  const NodeMatrix emb = load_embeddings(dir / artifact::kEmbeddings);
  if (emb.rows() != loaded.graph.num_nodes()) throw DimensionError("embeddings do not match the graph");

  const auto link = eval_links(loaded.graph, emb, config.link_fraction, config.seed);
  const json link_json = {{"config_hash", result.config_hash},
                          {"auc", link.auc},
                          {"recall_at_half", link.recall_at_half},
                          {"num_pos", link.num_pos},
                          {"num_neg", link.num_neg},
                          {"fraction", config.link_fraction}};
  io::write_text(dir / artifact::kLinkReport, link_json.dump(2) + "\n");
  result.outputs.push_back(dir / artifact::kLinkReport);

  if (loaded.graph.has_labels()) {
    json runs = json::array();
    for (double f : config.train_fractions) {
      const auto r = eval_classify(emb, loaded.graph.labels(), f, config.seed, config.eval_runs);
      runs.push_back({{"train_fraction", f}, {"macro_f1", r.macro_f1}, {"micro_f1", r.micro_f1}, {"runs", r.runs}});
    }
    io::write_text(dir / artifact::kClassReport,
                   json({{"config_hash", result.config_hash}, {"results", runs}}).dump(2) + "\n");
    result.outputs.push_back(dir / artifact::kClassReport);
  } else {
    result.notices.push_back("classification skipped: no labels configured");
  }

  const auto projection = project_2d(emb);
  if (projection.rank_deficient) result.notices.push_back("embeddings have rank < 2; projection axes zeroed");
  std::string tsv = "# config_hash=" + result.config_hash + "\n";
  const auto& ids = loaded.graph.original_ids();
  for (Eigen::Index i = 0; i < emb.rows(); ++i) {
    tsv += std::to_string(ids[static_cast<std::size_t>(i)]) + '\t' + detail::format_double(projection.coords(i, 0)) +
           '\t' + detail::format_double(projection.coords(i, 1)) + '\t' +
           (loaded.graph.has_labels() ? std::to_string(loaded.graph.labels()[static_cast<std::size_t>(i)]) : "") + '\n';
  }
  io::write_text(dir / artifact::kProjection, tsv);
  result.outputs.push_back(dir / artifact::kProjection);
  return result;
}

}  // namespace structopic
