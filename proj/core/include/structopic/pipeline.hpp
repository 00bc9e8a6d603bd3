#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "structopic/gcn.hpp"
#include "structopic/graph.hpp"
#include "structopic/topics.hpp"
#include "structopic/walks.hpp"

namespace structopic {

// Everything the staged pipeline needs. Stages read their inputs from and
// write their artifacts to `workdir`; each artifact carries the hash of the
// configuration that produced it, and a stage whose hash matches the
// existing sidecar is skipped.
struct PipelineConfig {
  std::filesystem::path workdir = "work";
  std::filesystem::path edges;     // defaults to <workdir>/graph.edges.tsv
  std::filesystem::path features;  // optional
  std::filesystem::path labels;    // defaults to <workdir>/graph.labels.tsv when present

  int walks_per_node = 100;  // N
  int walk_length = 10;      // l, in steps
  WalkUnit unit = WalkUnit::kAnonymous;

  int topics = 5;  // K, also the anchor count
  bool no_anchors = false;
  int nmf_iters = 500;
  double nmf_tolerance = 1e-6;
  NmfInput nmf_input = NmfInput::kRaw;
  int lda_sweeps = 200;

  TrainConfig train;
  Ablation ablation = Ablation::kFull;

  double link_fraction = 1.0;
  std::vector<double> train_fractions{0.3, 0.7};
  int eval_runs = 10;

  SyntheticSpec synthetic;

  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const;
};

// Applies the keys present in a JSON object (snake_case field names, nested
// "train" and "synthetic" objects) on top of `base`.
PipelineConfig config_from_json(const std::string& json_text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});
std::string config_to_json(const PipelineConfig& config);

struct StageResult {
  bool reused = false;
  std::string config_hash;
  std::vector<std::filesystem::path> outputs;
  std::vector<std::string> notices;
};

StageResult cmd_synth(const PipelineConfig& config);
StageResult cmd_walks(const PipelineConfig& config);
StageResult cmd_topics(const PipelineConfig& config);
StageResult cmd_train(const PipelineConfig& config);
StageResult cmd_eval(const PipelineConfig& config);

// Stage artifact names inside the workdir.
namespace artifact {
inline constexpr const char* kSyntheticEdges = "graph.edges.tsv";
inline constexpr const char* kSyntheticLabels = "graph.labels.tsv";
inline constexpr const char* kWalksSidecar = "walks.json";
inline constexpr const char* kVocabulary = "vocab.tsv";
inline constexpr const char* kWalks = "walks.tsv";
inline constexpr const char* kNodeWalk = "Y.tsv";
inline constexpr const char* kCooccurrence = "M.tsv";
inline constexpr const char* kTopicsSidecar = "topics.json";
inline constexpr const char* kAnchorsTsv = "anchors.tsv";
inline constexpr const char* kAnchorsJson = "anchors.json";
inline constexpr const char* kWalkTopic = "U.tsv";
inline constexpr const char* kNodeTopic = "R.tsv";
inline constexpr const char* kTrainSidecar = "train.json";
inline constexpr const char* kEmbeddings = "embeddings.tsv";
inline constexpr const char* kTrainLog = "train_log.jsonl";
inline constexpr const char* kLinkReport = "link_report.json";
inline constexpr const char* kClassReport = "class_report.json";
inline constexpr const char* kProjection = "projection.tsv";
}  // namespace artifact

}  // namespace structopic
