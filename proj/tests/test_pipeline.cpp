#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "oracles.hpp"
#include "structopic/error.hpp"
#include "structopic/pipeline.hpp"

using namespace structopic;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::filesystem::path& p) { return json::parse(slurp(p)); }

PipelineConfig quick_config(const std::string& name, int n = 1) {
  PipelineConfig c;
  c.workdir = oracle::temp_dir(name);
  c.synthetic.n = n;
  c.walks_per_node = 20;
  c.walk_length = 4;
  c.topics = 2;
  c.nmf_iters = 100;
  c.ablation = Ablation::kNoFeatures;
  c.train.output_dim = 8;
  c.train.hidden_dim = 8;
  c.train.epochs = 2;
  c.train.batch_size = 32;
  c.train.batches_per_epoch = 4;
  c.eval_runs = 2;
  c.seed = 5;
  return c;
}

void run_all(const PipelineConfig& c) {
  cmd_synth(c);
  cmd_walks(c);
  cmd_topics(c);
  cmd_train(c);
  cmd_eval(c);
}

int run_cli(const std::string& args, const std::filesystem::path& err) {
  const std::string cmd = std::string(STRUCTOPIC_CLI) + " " + args + " >/dev/null 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, JsonRoundTripAndOverrides) {
  PipelineConfig c = quick_config("cfg");
  c.unit = WalkUnit::kDegree;
  c.nmf_input = NmfInput::kRowNormalized;
  c.train_fractions = {0.5};
  const auto back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));

  const auto partial = config_from_json(R"({"topics": 7, "train": {"epochs": 3}})", c);
  EXPECT_EQ(partial.topics, 7);
  EXPECT_EQ(partial.train.epochs, 3);
  EXPECT_EQ(partial.walks_per_node, c.walks_per_node);
}

TEST(Config, Errors) {
  EXPECT_THROW(config_from_json("{"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"topics": "five"})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"unit": "edges"})"), Error);
  PipelineConfig c;
  c.topics = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = PipelineConfig{};
  c.walks_per_node = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = PipelineConfig{};
  c.train.epochs = 0;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_THROW(load_config("/nonexistent/config.json"), IoError);
}

TEST(Walks, SidecarRecordsSeedAndCacheIsReused) {
  const auto c = quick_config("walks_cache");
  cmd_synth(c);
  const auto first = cmd_walks(c);
  EXPECT_FALSE(first.reused);
  const auto sidecar = read_json(c.workdir / artifact::kWalksSidecar);
  EXPECT_EQ(sidecar.at("seed").get<std::uint64_t>(), 5u);
  EXPECT_EQ(sidecar.at("config_hash").get<std::string>(), first.config_hash);
  EXPECT_EQ(sidecar.at("num_nodes").get<int>(), 18);

  std::vector<std::string> before;
  for (const auto& p : first.outputs) before.push_back(slurp(p));
  const auto second = cmd_walks(c);
  EXPECT_TRUE(second.reused);
  EXPECT_EQ(second.config_hash, first.config_hash);
  for (std::size_t i = 0; i < first.outputs.size(); ++i) EXPECT_EQ(slurp(first.outputs[i]), before[i]);

  auto other = c;
  other.seed = 6;
  const auto third = cmd_walks(other);
  EXPECT_FALSE(third.reused);
  EXPECT_NE(third.config_hash, first.config_hash);
}

TEST(Walks, ArtifactsNameTheirConfigHash) {
  const auto c = quick_config("walks_hash");
  cmd_synth(c);
  const auto r = cmd_walks(c);
  for (const char* name : {artifact::kVocabulary, artifact::kWalks, artifact::kNodeWalk, artifact::kCooccurrence}) {
    EXPECT_EQ(slurp(c.workdir / name).rfind("# config_hash=" + r.config_hash + "\n", 0), 0u) << name;
  }
}

TEST(Walks, DegreeUnitFlag) {
  auto c = quick_config("walks_degree");
  c.unit = WalkUnit::kDegree;
  cmd_synth(c);
  cmd_walks(c);
  EXPECT_EQ(read_json(c.workdir / artifact::kWalksSidecar).at("unit"), "degree");
  EXPECT_NE(slurp(c.workdir / artifact::kVocabulary).find("# unit\tdegree\n"), std::string::npos);
  // G(1) degrees are 1..8 plus the ring hubs; the vocabulary is small.
  EXPECT_LE(read_json(c.workdir / artifact::kWalksSidecar).at("vocab_size").get<int>(), 18);
}

TEST(Walks, MissingGraphIsIoErrorWithHint) {
  const auto c = quick_config("walks_nograph");
  try {
    cmd_walks(c);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("structopic synth"), std::string::npos) << e.what();
  }
}

TEST(Topics, MissingWalkCacheIsInstructive) {
  const auto c = quick_config("topics_nocache");
  cmd_synth(c);
  try {
    cmd_topics(c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("structopic walks"), std::string::npos) << e.what();
  }
}

TEST(Topics, StaleWalkCacheIsRejected) {
  auto c = quick_config("topics_stale");
  cmd_synth(c);
  cmd_walks(c);
  c.walk_length = 5;
  EXPECT_THROW(cmd_topics(c), ConfigError);
}

TEST(Topics, SingleTopicGivesSingleRowU) {
  auto c = quick_config("topics_k1");
  c.topics = 1;
  cmd_synth(c);
  cmd_walks(c);
  cmd_topics(c);
  std::ifstream in(c.workdir / artifact::kWalkTopic);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) rows += !line.empty() && line[0] != '#';
  EXPECT_EQ(rows, 1);
}

TEST(Topics, AnchorsJsonListsDecodedWalks) {
  const auto c = quick_config("topics_anchors");
  cmd_synth(c);
  cmd_walks(c);
  const auto r = cmd_topics(c);
  const auto j = read_json(c.workdir / artifact::kAnchorsJson);
  EXPECT_EQ(j.at("config_hash"), r.config_hash);
  ASSERT_EQ(j.at("anchors").size(), 2u);
  for (const auto& a : j.at("anchors")) {
    const auto walk = a.at("walk").get<std::string>();
    // Anonymous codes of 4 steps: five dash-separated labels starting at 0.
    EXPECT_EQ(std::count(walk.begin(), walk.end(), '-'), 4) << walk;
    EXPECT_EQ(walk[0], '0');
  }
  const auto t = read_json(c.workdir / artifact::kTopicsSidecar);
  EXPECT_TRUE(t.contains("nmf_objective"));
}

TEST(Topics, NoAnchorsAndTooManyTopics) {
  auto c = quick_config("topics_lda");
  c.no_anchors = true;
  c.lda_sweeps = 20;
  cmd_synth(c);
  cmd_walks(c);
  EXPECT_NO_THROW(cmd_topics(c));
  c.no_anchors = false;
  c.topics = 100000;
  EXPECT_THROW(cmd_topics(c), ConfigError);
}

TEST(Train, NfRunsWithoutFeaturesAndIsDeterministic) {
  auto c = quick_config("train_nf", 3);
  cmd_synth(c);
  cmd_walks(c);
  cmd_topics(c);
  const auto r = cmd_train(c);
  const auto first = slurp(c.workdir / artifact::kEmbeddings);
  EXPECT_NE(slurp(c.workdir / artifact::kTrainLog).find("\"loss\""), std::string::npos);
  std::filesystem::remove(c.workdir / artifact::kTrainSidecar);
  const auto again = cmd_train(c);
  EXPECT_FALSE(again.reused);
  EXPECT_EQ(again.config_hash, r.config_hash);
  EXPECT_EQ(slurp(c.workdir / artifact::kEmbeddings), first);

  c.ablation = Ablation::kFull;
  try {
    cmd_train(c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("--nf"), std::string::npos) << e.what();
  }
}

TEST(Eval, ReportsAreValidAndInRange) {
  const auto c = quick_config("eval_reports", 2);
  run_all(c);
  const auto link = read_json(c.workdir / artifact::kLinkReport);
  EXPECT_GE(link.at("auc").get<double>(), 0.0);
  EXPECT_LE(link.at("auc").get<double>(), 1.0);
  EXPECT_EQ(link.at("num_pos"), link.at("num_neg"));
  const auto cls = read_json(c.workdir / artifact::kClassReport);
  ASSERT_EQ(cls.at("results").size(), 2u);
  for (const auto& r : cls.at("results")) {
    EXPECT_GE(r.at("macro_f1").get<double>(), 0.0);
    EXPECT_LE(r.at("micro_f1").get<double>(), 1.0);
  }
  const auto proj = slurp(c.workdir / artifact::kProjection);
  EXPECT_NE(proj.find("\n0\t"), std::string::npos);
}

TEST(Eval, FractionHalvesPositives) {
  auto c = quick_config("eval_fraction", 2);
  run_all(c);
  const auto full = read_json(c.workdir / artifact::kLinkReport).at("num_pos").get<int>();
  c.link_fraction = 0.5;
  cmd_eval(c);
  EXPECT_EQ(read_json(c.workdir / artifact::kLinkReport).at("num_pos").get<int>(), (full + 1) / 2);
}

TEST(Eval, MissingLabelsSkipsClassification) {
  auto c = quick_config("eval_nolabels");
  run_all(c);
  std::filesystem::remove(c.workdir / artifact::kClassReport);
  std::filesystem::remove(c.workdir / artifact::kSyntheticLabels);
  const auto r = cmd_eval(c);
  EXPECT_FALSE(std::filesystem::exists(c.workdir / artifact::kClassReport));
  ASSERT_FALSE(r.notices.empty());
  EXPECT_NE(r.notices.back().find("classification skipped"), std::string::npos);
}

TEST(Eval, MissingEmbeddingsIsInstructive) {
  const auto c = quick_config("eval_noemb");
  cmd_synth(c);
  cmd_walks(c);
  cmd_topics(c);
  EXPECT_THROW(cmd_eval(c), ConfigError);
}

TEST(Cli, SuccessAndErrorJson) {
  const auto dir = oracle::temp_dir("cli");
  const auto err = dir / "stderr.txt";
  EXPECT_EQ(run_cli("synth -w " + dir.string(), err), 0);
  EXPECT_EQ(run_cli("topics -w " + dir.string(), err), 1);
  const auto j = json::parse(slurp(err));
  EXPECT_EQ(j.at("error"), "config_error");
  EXPECT_NE(j.at("message").get<std::string>().find("structopic walks"), std::string::npos);

  EXPECT_EQ(run_cli("walks -w " + dir.string() + " -N 0", err), 1);
  EXPECT_EQ(json::parse(slurp(err)).at("error"), "config_error");
  EXPECT_EQ(run_cli("frobnicate", err), 2);
  EXPECT_EQ(run_cli("train -w " + dir.string() + " --nf --ablation full", err), 1);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto dir = oracle::temp_dir("cli_config");
  const auto err = dir / "stderr.txt";
  std::ofstream(dir / "config.json") << R"({"walks_per_node": 5, "walk_length": 3, "seed": 11})";
  ASSERT_EQ(run_cli("synth -w " + dir.string(), err), 0);
  ASSERT_EQ(run_cli("walks -w " + dir.string() + " -c " + (dir / "config.json").string() + " -l 2", err), 0);
  const auto s = read_json(dir / artifact::kWalksSidecar);
  EXPECT_EQ(s.at("walks_per_node"), 5);
  EXPECT_EQ(s.at("walk_length"), 2);
  EXPECT_EQ(s.at("seed"), 11);
}
