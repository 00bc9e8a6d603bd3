// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "gcn_fixture.hpp"
#include "oracles.hpp"
#include "structopic/error.hpp"
#include "structopic/eval.hpp"
#include "structopic/gcn.hpp"
#include "structopic/topics.hpp"
#include "structopic/walks.hpp"

using namespace structopic;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

SparseMatrix sparse(const Eigen::MatrixXd& m) { return m.sparseView(0.0, 0.0); }

Eigen::MatrixXd random_positive(std::mt19937_64& gen, int rows, int cols) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(gen);
  return m;
}

Outcome anonymous_walk_counts() {
  const auto start = Clock::now();
  const std::size_t expected[] = {1, 2, 5, 15, 52};
  bool ok = true;
  std::string counts;
  for (int l = 1; l <= 5; ++l) {
    const auto walks = enumerate_anonymous_walks(l);
    std::set<std::vector<int>> got;
    for (const auto& w : walks) got.insert(w.code);
    const auto brute = oracle::anonymous_walks(l);
    ok = ok && got == brute && walks.size() == brute.size() && brute.size() == expected[l - 1];
    counts += (l > 1 ? "," : "") + std::to_string(walks.size());
  }
  const double t = seconds_since(start);
  return {ok && t < 1.0, fmt("counts %s, %.3fs", counts.c_str(), t)};
}

Outcome nmf_criterion() {
  const auto start = Clock::now();
  std::mt19937_64 gen(2024);
  int monotone = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 8 + trial % 13;
    Eigen::MatrixXd m = 10.0 * random_positive(gen, n, n);
    // Knock out about a third of the entries so the sparse path is exercised.
    const Eigen::MatrixXd mask = random_positive(gen, n, n);
    m = (mask.array() < 0.33).select(0.0, m);
    const auto f = nmf_factorize(sparse(m), {.rank = 1 + trial % 5, .max_iters = 300,
                                              .seed = static_cast<std::uint64_t>(trial)});
    bool ok = true;
    for (std::size_t t = 1; t < f.objective_trace.size(); ++t) {
      ok = ok && f.objective_trace[t] <= f.objective_trace[t - 1] * (1.0 + 1e-12);
    }
    monotone += ok;
  }
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const int rank = 1 + trial % 3;
    const Eigen::MatrixXd m = random_positive(gen, 8, rank) * random_positive(gen, rank, 8);
    const auto f = nmf_factorize(m, {.rank = rank, .max_iters = 20000, .tolerance = 0.0,
                                     .seed = static_cast<std::uint64_t>(trial)});
    worst = std::max(worst, (m - f.h * f.z).squaredNorm());
  }
  const double t = seconds_since(start);
  return {monotone == 50 && worst < 1e-6 && t < 30.0,
          fmt("monotone %d/50, worst rank-alpha residual %.2e, %.1fs", monotone, worst, t)};
}

Outcome anchor_recovery() {
  int exact = 0;
  double worst_l1 = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = oracle::planted(1000 + seed);
    const Eigen::MatrixXd y = oracle::sample_counts(p, 100, 2000 + seed);
    const auto fit = fit_anchor_model(sparse(y), sparse(p.m), {.k = 3, .kl = {}, .seed = seed});
    auto ids = fit.model.anchors.ids;
    std::sort(ids.begin(), ids.end());
    if (ids != p.anchors) continue;
    ++exact;
    // Topic k is the one anchored at planted walk ids[k].
    for (int k = 0; k < 3; ++k) {
      const int planted_topic = fit.model.anchors.ids[static_cast<std::size_t>(k)];
      worst_l1 = std::max(worst_l1, (fit.model.u.row(k) - p.u.row(planted_topic)).cwiseAbs().sum());
    }
  }
  return {exact >= 9 && worst_l1 <= 0.1, fmt("exact anchors %d/10, worst topic L1 %.4f", exact, worst_l1)};
}

Outcome node_topic_recovery() {
  std::mt19937_64 gen(7);
  double worst_exact = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int k = 2 + trial % 4;
    Eigen::MatrixXd u(k, k);
    for (int t = 0; t < k; ++t) {
      const auto row = oracle::dirichlet(gen, k, 1.0);
      for (int j = 0; j < k; ++j) u(t, j) = 0.5 * row[static_cast<std::size_t>(j)] + (t == j ? 0.5 : 0.0);
    }
    Eigen::MatrixXd r(50, k);
    for (int i = 0; i < 50; ++i) {
      const auto row = oracle::dirichlet(gen, k, 1.0);
      for (int t = 0; t < k; ++t) r(i, t) = row[static_cast<std::size_t>(t)];
    }
    worst_exact = std::max(worst_exact, (recover_node_topics(sparse(r * u), u) - r).cwiseAbs().maxCoeff());
  }
  double worst_sampled = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = oracle::planted(3000 + seed);
    const Eigen::MatrixXd y = oracle::sample_counts(p, 100, 4000 + seed);
    const auto r = recover_node_topics(sparse(y), p.u);
    worst_sampled = std::max(worst_sampled, (r - p.r).cwiseAbs().rowwise().sum().mean());
  }
  return {worst_exact <= 1e-8 && worst_sampled <= 0.15,
          fmt("noiseless max error %.2e, sampled mean row L1 %.4f (worst of 10)", worst_exact, worst_sampled)};
}

Outcome sharpness() {
  int sharper = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = oracle::planted(5000 + seed);
    const Eigen::MatrixXd y = oracle::sample_counts(p, 100, 6000 + seed);
    const auto anchor = fit_anchor_model(sparse(y), sparse(p.m), {.k = 3, .kl = {}, .seed = seed});
    const auto lda = recover_no_anchor(sparse(y), 3, seed);
    sharper += oracle::entropy(anchor.model.u) <= oracle::entropy(lda.u);
  }
  return {sharper >= 8, fmt("anchor model sharper in %d/10 seeds", sharper)};
}

Outcome gradients() {
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto m = fixture::small_model(seed);
    std::size_t n = 0;
    worst = std::max(worst, fixture::max_gradient_error(m, &n));
    checked += n;
  }
  return {worst < 1e-4, fmt("%zu entries over 3 models, worst relative error %.2e", checked, worst)};
}

Outcome uniform_reduction() {
  bool ok = true;
  for (std::uint64_t seed : {4u, 5u, 6u}) {
    auto m = fixture::small_model(seed);
    const Eigen::MatrixXd same = Eigen::MatrixXd::Constant(m.graph.num_nodes(), 3, 1.0 / 3.0);
    Rng a(seed);
    Rng b(seed);
    std::vector<NeighborSample> topic;
    std::vector<NeighborSample> uniform;
    for (int k = 0; k < 2; ++k) {
      topic.push_back(sample_neighbors(m.graph, same, Weighting::kTopic, 4, a));
      uniform.push_back(sample_neighbors(m.graph, same, Weighting::kUniform, 4, b));
    }
    const NodeMatrix x = forward(m.params, m.inputs, topic);
    const NodeMatrix y = forward(m.params, m.inputs, uniform);
    ok = ok && std::equal(x.data(), x.data() + x.size(), y.data(), y.data() + y.size());
  }
  return {ok, ok ? "identical outputs on 3 models" : "outputs differ"};
}

Outcome separation() {
  const auto start = Clock::now();
  const Graph g = generate_synthetic({.n = 10});
  const auto walks = build_corpus(g, {.walks_per_node = 100, .steps = 10});
  const auto m = build_cooccurrence(walks.corpus, walks.vocab);
  const auto topics = fit_anchor_model(walks.node_walk, m, {.k = 3, .kl = {}}).model;
  const double purity = cluster_purity(argmax_rows(topics.r), g.labels());
  const auto table = train(g, topics, walks.corpus, TrainConfig{}, Ablation::kNoFeatures);
  const auto f1 = eval_classify(table.embeddings, g.labels(), 0.3, 0);
  const double t = seconds_since(start);
  return {purity >= 0.9 && f1.macro_f1 >= 0.9 && t < 120.0,
          fmt("argmax-R purity %.3f, macro-F1@30%% %.3f, %.1fs", purity, f1.macro_f1, t)};
}

Outcome link_reconstruction() {
  const auto start = Clock::now();
  const Graph g = generate_synthetic({.n = 28});
  double trained = 0.0;
  double random = 0.0;
  double lo = 1.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto walks = build_corpus(g, {.seed = seed});
    const auto m = build_cooccurrence(walks.corpus, walks.vocab);
    const auto topics = fit_anchor_model(walks.node_walk, m, {.k = 3, .kl = {}, .seed = seed}).model;
    TrainConfig config;
    config.seed = seed;
    const auto table = train(g, topics, walks.corpus, config, Ablation::kNoFeatures);
    const double auc = eval_links(g, table.embeddings, 1.0, seed).auc;
    trained += auc;
    lo = std::min(lo, auc);

    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    NodeMatrix e(g.num_nodes(), config.output_dim);
    for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = normal(gen);
    random += eval_links(g, e, 1.0, seed).auc;
  }
  trained /= 10.0;
  random /= 10.0;
  return {trained >= 0.7 && std::abs(random - 0.5) <= 0.05,
          fmt("%d nodes, mean AUC trained %.3f (min %.3f) vs random %.3f, %.0fs", static_cast<int>(g.num_nodes()),
              trained, lo, random, seconds_since(start))};
}

int run(const std::string& args) {
  const std::string cmd = std::string(STRUCTOPIC_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const std::filesystem::path dirs[] = {oracle::temp_dir("acceptance_a"), oracle::temp_dir("acceptance_b")};
  for (const auto& d : dirs) {
    const std::string w = " -w " + d.string() + " --seed 13";
    if (run("synth -n 3" + w) != 0) return {false, "synth failed"};
    for (const char* stage : {"walks", "topics", "train", "eval"}) {
      if (run(std::string(stage) + w + " -K 3 --nf") != 0) return {false, std::string("stage failed: ") + stage};
    }
  }
  for (const char* name : {"link_report.json", "class_report.json", "projection.tsv"}) {
    const auto a = slurp(dirs[0] / name);
    if (a.empty() || a != slurp(dirs[1] / name)) return {false, std::string(name) + " differs"};
  }
  return {true, "link, class and projection reports byte-identical"};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"anonymous walk enumeration matches brute force", anonymous_walk_counts},
      {"NMF objective monotone and rank-alpha exact", nmf_criterion},
      {"planted anchors and walk-topic recovery", anchor_recovery},
      {"node-topic recovery through the pseudo-inverse", node_topic_recovery},
      {"anchor model sharper than no-anchor LDA", sharpness},
      {"analytic gradients match finite differences", gradients},
      {"identical topic rows reduce to uniform aggregation", uniform_reduction},
      {"structure-type separation on G(10)", separation},
      {"link reconstruction beats random embeddings", link_reconstruction},
      {"CLI pipeline is deterministic", determinism},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << index << ": " << name << " (" << o.detail << ")" << std::endl;
  }
  std::cout << (10 - failed) << "/10 criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
