// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance            run every criterion
//   acceptance <name>...  run the named ones
// Exit status is non-zero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "layer_gradcheck.hpp"
#include "milscreen/cli.hpp"
#include "milscreen/corpus.hpp"
#include "milscreen/features.hpp"
#include "milscreen/heads.hpp"
#include "milscreen/image.hpp"
#include "milscreen/metrics.hpp"
#include "milscreen/nn.hpp"
#include "milscreen/pipeline.hpp"
#include "milscreen/splitgen.hpp"
#include "milscreen/synth.hpp"
#include "milscreen/text.hpp"

using namespace milscreen;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

// --- F1 oracle over the best-results table ---
Outcome f1_oracle() {
  Outcome o;
  struct Row {
    const char* name;
    double p, r, f1;
  };
  const Row rows[] = {{"multimodal", 0.69, 0.92, 0.79},
                      {"text", 0.68, 0.85, 0.75},
                      {"image", 0.77, 0.67, 0.72},
                      {"feature-eng", 0.65, 0.90, 0.75}};
  for (const auto& row : rows) {
    const double f = eval::f1_score(row.p, row.r);
    const bool ok = std::abs(f - row.f1) <= 0.005 + 1e-12;
    o.pass = o.pass && ok;
    o.note(std::string(row.name) + " " + fmt("%.4f", f) + (ok ? " ok" : " vs table " + fmt("%.2f", row.f1)));
  }
  return o;
}

// --- BDI banding ---
Outcome bdi_banding() {
  Outcome o;
  for (int s = 0; s <= 63; ++s) {
    const auto band = corpus::band_of(corpus::BdiScore(s));
    const auto expected = s <= 13   ? corpus::SeverityBand::Minimal
                          : s <= 19 ? corpus::SeverityBand::Mild
                          : s <= 28 ? corpus::SeverityBand::Moderate
                                    : corpus::SeverityBand::Severe;
    o.require(band == expected, "band of " + std::to_string(s));
    const bool pos = corpus::binary_label(corpus::BdiScore(s)) == corpus::BinaryLabel::Positive;
    o.require(pos == (s >= 20), "label of " + std::to_string(s));
    o.require(pos == (band == corpus::SeverityBand::Moderate || band == corpus::SeverityBand::Severe),
              "band/label agreement at " + std::to_string(s));
  }
  corpus::Corpus c;
  const std::pair<int, int> groups[] = {{40, 82}, {24, 50}, {16, 32}, {6, 57}};
  for (const auto& [score, n] : groups)
    for (int i = 0; i < n; ++i) {
      corpus::StudentBag b;
      b.student_id = "s" + std::to_string(c.size());
      b.bdi = corpus::BdiScore(score);
      c.push_back(b);
    }
  const auto r = corpus::corpus_stats(c, corpus::ObservationWindow(212));
  o.require(r.students == 221, "student total " + std::to_string(r.students));
  o.require(round2(r.negative_student_pct) == 40.27, "negative share " + fmt("%.4f", r.negative_student_pct));
  o.require(round2(r.positive_student_pct) == 59.73, "positive share " + fmt("%.4f", r.positive_student_pct));
  o.note("64 scores, 221 students, " + fmt("%.2f", r.negative_student_pct) + "/" + fmt("%.2f", r.positive_student_pct));
  return o;
}

// --- Splitter ---
double brute_force(const corpus::Corpus& c, const split::SplitTargets& t) {
  const auto m = split::BagMasses::of(c, t.basis);
  std::size_t total = 1;
  for (std::size_t i = 0; i < c.size(); ++i) total *= 3;
  double best = INFINITY;
  std::vector<split::Subset> a(c.size());
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t x = code;
    int seen[3] = {0, 0, 0};
    for (auto& s : a) {
      s = static_cast<split::Subset>(x % 3);
      ++seen[x % 3];
      x /= 3;
    }
    if (seen[0] && seen[1] && seen[2]) best = std::min(best, split::objective(a, t, m));
  }
  return best;
}

Outcome splitter() {
  Outcome o;
  std::mt19937_64 gen(77);
  int hits = 0;
  for (int run = 0; run < 100; ++run) {
    corpus::Corpus c;
    const std::size_t n = 3 + gen() % 6;
    for (std::size_t i = 0; i < n; ++i) {
      corpus::StudentBag b;
      b.student_id = "b" + std::to_string(i);
      b.bdi = corpus::BdiScore(static_cast<int>(gen() % 64));
      const int posts = 1 + static_cast<int>(gen() % 6);
      for (int k = 0; k < posts; ++k) b.posts.push_back({b.student_id + "_" + std::to_string(k), {}, "", {}, {}});
      c.push_back(b);
    }
    const auto t = split::SplitTargets::from_corpus(c);
    split::SearchBudget budget;
    budget.wall_clock_seconds.reset();
    budget.max_iterations = 3000;
    budget.tolerance = 0.0;
    std::mt19937_64 rng(static_cast<std::uint64_t>(run));
    hits += std::abs(split::local_search(c, t, budget, rng).objective - brute_force(c, t)) < 1e-12;
  }
  o.require(hits >= 95, "exhaustive optimum matched in " + std::to_string(hits) + "/100");
  o.note("optimum matched " + std::to_string(hits) + "/100");

  corpus::SynthConfig cfg;
  cfg.bags = 200;
  const auto c = corpus::synth_corpus(cfg, 2024);
  const auto t = split::SplitTargets::from_corpus(c);
  split::SearchBudget budget;
  budget.wall_clock_seconds.reset();
  budget.max_iterations = 20000;
  const auto suite = split::generate_suite(c, 10, t, budget, 5, 1);
  o.require(suite.size() == 10, "suite size " + std::to_string(suite.size()));
  double worst = 0.0;
  for (const auto& e : suite)
    for (double d : e.result.deviations) worst = std::max(worst, d);
  o.require(worst <= 0.01, "largest component deviation " + fmt("%.4f", worst));
  o.note("10 partitions on 200 bags, largest deviation " + fmt("%.4f", worst));
  return o;
}

// --- Gradient checks ---
Outcome gradients() {
  Outcome o;
  double worst = 0.0;
  for (const auto& [name, err] : gradcheck::all_layer_errors(3)) {
    o.require(err <= 1e-4, name + " layer error " + fmt("%.2e", err));
    worst = std::max(worst, err);
  }
  const nn::Matrix x = gradcheck::random_matrix(10, 8, 4);
  const std::vector<int> y{0, 1, 1, 0, 1, 0, 0, 1, 1, 0};
  const std::pair<const char*, std::vector<nn::LayerSpec>> heads_[] = {
      {"image head", heads::build_head(heads::HeadKind::Image, 8)},
      {"text head", heads::build_head(heads::HeadKind::Text, 8)},
      {"fusion head", heads::build_fusion_head(5, 3)}};
  for (const auto& [name, specs] : heads_) {
    nn::MlpModel m(specs, 6);
    const auto g = nn::check_gradients(m, x, y, 8);
    o.require(g.max_rel_error <= 1e-4, std::string(name) + " error " + fmt("%.2e", g.max_rel_error) + " in " + g.worst);
    worst = std::max(worst, g.max_rel_error);
  }
  o.note("5 layer types and 3 heads, worst relative error " + fmt("%.2e", worst));
  return o;
}

// --- End-to-end separable run ---
Outcome end_to_end() {
  Outcome o;
  corpus::SynthConfig cfg;
  cfg.bags = 200;
  cfg.signal = 1.0;
  const auto c = corpus::filter_window(corpus::synth_corpus(cfg, 11), corpus::ObservationWindow(365));
  const auto targets = split::SplitTargets::from_corpus(c);
  split::SearchBudget budget;
  budget.wall_clock_seconds.reset();
  budget.max_iterations = 20000;
  std::vector<split::Partition> suite;
  for (const auto& e : split::generate_suite(c, 10, targets, budget, 11, 1)) suite.push_back(e.result.partition);

  const auto images = synth::synth_image_source(c, cfg.signal, cfg.image_size, 11);
  const auto text = synth::text_embeddings(c, 32, 11);
  const auto image = synth::image_embeddings(c, images, 32, 11);
  eval::PipelineInputs in;
  in.text_embeddings = &text;
  in.image_embeddings = &image;
  in.images = images;

  std::map<std::string, double> f1;
  for (auto kind : {eval::ModelKind::TextEmb, eval::ModelKind::ImageEmb, eval::ModelKind::Fusion}) {
    eval::PipelineConfig pc;
    pc.kind = kind;
    pc.train.seed = 11;
    const auto r = eval::cross_validate(c, suite, in, pc, 365);
    f1[eval::to_string(kind)] = r.f1.mean;
    o.require(r.f1.mean >= 0.95, eval::to_string(kind) + " mean F1 " + fmt("%.4f", r.f1.mean));
  }
  const double best_single = std::max(f1["text-emb"], f1["image-emb"]);
  o.require(f1["fusion"] >= best_single - 0.02,
            "fusion " + fmt("%.4f", f1["fusion"]) + " below max(text, image) - 0.02 = " + fmt("%.4f", best_single - 0.02));
  o.note("mean F1 text " + fmt("%.3f", f1["text-emb"]) + ", image " + fmt("%.3f", f1["image-emb"]) + ", fusion " +
         fmt("%.3f", f1["fusion"]));
  return o;
}

// --- Metric oracles ---
Outcome metric_oracles() {
  Outcome o;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u;
  int auc_sets = 0;
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + rng() % 99;
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = u(rng);
      y[i] = static_cast<int>(rng() % 2);
    }
    y[0] = 0;
    y[1] = 1;
    std::size_t wins = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (y[i] == 1 && y[j] == 0) {
          ++pairs;
          wins += s[i] > s[j];
        }
    const double expected = static_cast<double>(wins) / static_cast<double>(pairs);
    const double auc = eval::roc_curve(s, y).auc;
    o.require(std::abs(auc - expected) <= 1e-12, "AUC " + fmt("%.15f", auc) + " vs pairs " + fmt("%.15f", expected));
    ++auc_sets;
  }
  int recounts = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng() % 50;
    std::vector<int> p(n), y(n);
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<int>(rng() % 2);
      y[i] = static_cast<int>(rng() % 2);
      tp += p[i] && y[i];
      fp += p[i] && !y[i];
      fn += !p[i] && y[i];
    }
    const auto m = eval::prf1(eval::confusion(p, y));
    const double P = tp + fp > 0 ? tp / (tp + fp) : 0.0, R = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    const double F = P + R > 0 ? 2 * P * R / (P + R) : 0.0;
    const bool ok = m.precision == P && m.recall == R && std::abs(m.f1 - F) <= 1e-15;
    o.require(ok, "recount mismatch in set " + std::to_string(t));
    recounts += ok;
  }
  o.note(std::to_string(auc_sets) + " AUC sets, " + std::to_string(recounts) + " P/R/F1 recounts");
  return o;
}

// --- Feature oracles ---
Outcome feature_oracles() {
  Outcome o;
  featex::TfidfVectorizer v;
  v.fit({{"a", "b"}, {"b", "c"}});
  const double ia = std::log(1.5) + 1.0, norm = std::sqrt(ia * ia + 1.0);
  const auto x = v.transform({"a", "b"});
  o.require(std::abs(v.idf(1) - 1.0) <= 1e-9 && std::abs(v.idf(0) - ia) <= 1e-9, "idf values");
  o.require(std::abs(x[0] - ia / norm) <= 1e-9 && std::abs(x[1] - 1.0 / norm) <= 1e-9 && x[2] == 0.0,
            "tf-idf vector (" + fmt("%.9f", x[0]) + ", " + fmt("%.9f", x[1]) + ")");

  featex::Image img{2, 1, {255, 0, 0, 255, 255, 0}};
  const auto m = featex::hsv_mean(img);
  o.require(std::abs(m.h - 1.0 / 12) <= 1e-12 && m.s == 1.0 && m.v == 1.0, "red/yellow HSV mean");

  const auto names = featex::aggregate_names({"hue", "saturation", "value", "faces"});
  const auto agg = featex::aggregate_user({{0.1, 0.2, 0.3, 1}, {0.4, 0.5, 0.6, 1}, {0.7, 0.8, 0.9, 4}}, 4);
  o.require(names.size() == 12 && agg.values.size() == 12, "visual aggregate width");

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10, 10);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng() % 12, d = 1 + rng() % 6;
    std::vector<std::vector<double>> posts(n, std::vector<double>(d));
    for (auto& p : posts)
      for (auto& e : p) e = u(rng);
    const auto a = featex::aggregate_user(posts, d);
    for (std::size_t j = 0; j < d; ++j) worst = std::max(worst, std::abs(a.values[2 * d + j] - a.values[j] * double(n)));
  }
  o.require(worst <= 1e-9, "sum vs mean x n error " + fmt("%.2e", worst));
  o.note("tf-idf (" + fmt("%.3f", x[0]) + ", " + fmt("%.3f", x[1]) + ", 0), hue " + fmt("%.4f", m.h) +
         ", 12 visual features, sum error " + fmt("%.1e", worst));
  return o;
}

// --- CLI determinism ---
int run(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int rc = cli::dispatch(args, o, e);
  if (out) *out = o.str() + e.str();
  return rc;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) {
      std::ifstream in(e.path(), std::ios::binary);
      files[fs::relative(e.path(), root).generic_string()] = std::string(std::istreambuf_iterator<char>(in), {});
    }
  return files;
}

Outcome determinism() {
  Outcome o;
  const fs::path base = fs::temp_directory_path() / "milscreen_acceptance_determinism";
  fs::remove_all(base);
  std::vector<std::map<std::string, std::string>> runs;
  for (const char* name : {"a", "b"}) {
    const fs::path d = base / name;
    const std::string corpus = (d / "data" / "corpus.jsonl").string();
    const std::vector<std::vector<std::string>> steps = {
        {"synth", "--bags", "40", "--seed", "7", "--out", corpus},
        {"split", "--corpus", corpus, "--window", "365", "--n", "10", "--seed", "7", "--max-iterations", "5000",
         "--out-dir", (d / "splits").string()},
        {"featurize", "--corpus", corpus, "--window", "365", "--lexicon", MILSCREEN_DATA_DIR "/demo_lexicon.dic",
         "--faces", (d / "data" / "faces.csv").string(), "--out-dir", (d / "features").string()},
        {"--workers", name[0] == 'a' ? "1" : "3", "eval", "--corpus", corpus, "--window", "365", "--suite",
         (d / "splits").string(), "--model-kind", "fusion",
         "--embeddings", (d / "data" / "text.milemb").string(), "--embeddings", (d / "data" / "image.milemb").string(),
         "--seed", "7", "--epochs", "5", "--out-dir", (d / "report").string()},
        {"eval", "--corpus", corpus, "--window", "365", "--suite", (d / "splits").string(), "--model-kind", "svm",
         "--lexicon", MILSCREEN_DATA_DIR "/demo_lexicon.dic", "--faces", (d / "data" / "faces.csv").string(), "--seed",
         "7", "--out-dir", (d / "report_svm").string()},
        {"analyze", "--corpus", corpus, "--window", "365", "--lexicon", MILSCREEN_DATA_DIR "/demo_lexicon.dic",
         "--faces", (d / "data" / "faces.csv").string(), "--seed", "7", "--out-dir", (d / "analysis").string()},
    };
    for (const auto& s : steps) {
      std::string log;
      const int rc = run(s, &log);
      o.require(rc == 0, s[0] + " exited " + std::to_string(rc) + ": " + log);
    }
    runs.push_back(snapshot(d));
  }
  o.require(runs[0].size() == runs[1].size(), "file sets differ");
  std::size_t same = 0, reports = 0;
  for (const auto& [path, bytes] : runs[0]) {
    const auto it = runs[1].find(path);
    const bool eq = it != runs[1].end() && it->second == bytes;
    o.require(eq, path + " differs");
    same += eq;
    reports += path.ends_with(".csv") || path.ends_with(".json");
  }
  o.note(std::to_string(same) + " files identical across reruns, " + std::to_string(reports) + " CSV/JSON");
  fs::remove_all(base);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"f1_oracle", f1_oracle},           {"bdi_banding", bdi_banding},         {"splitter_oracle", splitter},
      {"gradient_checks", gradients},     {"end_to_end", end_to_end},           {"metric_oracles", metric_oracles},
      {"feature_oracles", feature_oracles}, {"determinism", determinism},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failures = 0, ran = 0;
  for (const auto& [name, fn] : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " (" << fmt("%.1f", secs) << "s): " << o.detail << std::endl;
    failures += !o.pass;
  }
  if (ran == 0) {
    std::cerr << "no such criterion\n";
    return 2;
  }
  return failures ? 1 : 0;
}
