#include "milscreen/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "milscreen/corpus.hpp"
#include "milscreen/embedstore.hpp"
#include "milscreen/faces.hpp"
#include "milscreen/features.hpp"
#include "milscreen/hashtags.hpp"
#include "milscreen/heads.hpp"
#include "milscreen/lexicon.hpp"
#include "milscreen/manifest.hpp"
#include "milscreen/pipeline.hpp"
#include "milscreen/splitgen.hpp"
#include "milscreen/synth.hpp"

namespace milscreen::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// Options shared by commands that read a corpus and build model inputs.
struct DataOpts {
  std::string corpus;
  int window = 212;
  std::string lexicon;
  std::vector<std::string> embeddings;
  std::string faces = "stub";
  std::string images_root;
  std::string on_missing = "error";
};

struct TrainOpts {
  std::string model_kind = "fusion";
  std::uint64_t seed = 0;
  nn::TrainConfig train;
  std::string threshold_mode = "fixed";
  double threshold = heads::kDefaultThreshold;
  double svm_lambda = 0.01;
  int svm_epochs = 50;
};

void add_corpus(CLI::App* cmd, DataOpts& d) {
  cmd->add_option("--corpus", d.corpus, "corpus file (one JSON record per line)")->required();
  cmd->add_option("--window", d.window, "observation window in days (60, 212, 365)")->capture_default_str();
}

void add_inputs(CLI::App* cmd, DataOpts& d) {
  cmd->add_option("--lexicon", d.lexicon, "category lexicon (.dic)");
  cmd->add_option("--embeddings", d.embeddings, "embedding file; repeat for text and image");
  cmd->add_option("--faces", d.faces, "face counts: stub, field, or a post_id,count CSV")->capture_default_str();
  cmd->add_option("--images-root", d.images_root, "directory image_ref paths are relative to (default: corpus dir)");
  cmd->add_option("--on-missing", d.on_missing, "missing embedding rows: error or zero")
      ->check(CLI::IsMember({"error", "zero"}))
      ->capture_default_str();
}

void add_training(CLI::App* cmd, TrainOpts& t) {
  cmd->add_option("--model-kind", t.model_kind, "text-bow, text-emb, text-feat, image-feat, image-emb, fusion, feat-concat, svm")
      ->capture_default_str();
  cmd->add_option("--seed", t.seed, "training seed")->capture_default_str();
  cmd->add_option("--epochs", t.train.epochs)->capture_default_str();
  cmd->add_option("--lr", t.train.lr)->capture_default_str();
  cmd->add_option("--lr-gamma", t.train.lr_decay_gamma)->capture_default_str();
  cmd->add_option("--lr-decay-epochs", t.train.lr_decay_epochs)->capture_default_str();
  cmd->add_option("--batch-size", t.train.batch_size)->capture_default_str();
  cmd->add_option("--momentum", t.train.momentum)->capture_default_str();
  cmd->add_option("--weight-decay", t.train.weight_decay)->capture_default_str();
  cmd->add_option("--threshold-mode", t.threshold_mode, "fixed or val-f1")->capture_default_str();
  cmd->add_option("--threshold", t.threshold)->capture_default_str();
  cmd->add_option("--svm-lambda", t.svm_lambda)->capture_default_str();
  cmd->add_option("--svm-epochs", t.svm_epochs)->capture_default_str();
}

json training_json(const TrainOpts& t) {
  return {{"model_kind", t.model_kind},
          {"seed", t.seed},
          {"epochs", t.train.epochs},
          {"lr", t.train.lr},
          {"lr_gamma", t.train.lr_decay_gamma},
          {"lr_decay_epochs", t.train.lr_decay_epochs},
          {"batch_size", t.train.batch_size},
          {"momentum", t.train.momentum},
          {"weight_decay", t.train.weight_decay},
          {"threshold_mode", t.threshold_mode},
          {"threshold", t.threshold},
          {"svm_lambda", t.svm_lambda},
          {"svm_epochs", t.svm_epochs}};
}

json data_json(const DataOpts& d) {
  return {{"window", d.window}, {"faces", fs::path(d.faces).filename().string()}, {"on_missing", d.on_missing}};
}

corpus::Corpus load_windowed(const DataOpts& d) {
  if (!fs::exists(d.corpus)) throw UsageError("corpus not found: " + d.corpus);
  return corpus::filter_window(corpus::load_corpus(d.corpus), corpus::ObservationWindow(d.window));
}

// Loaded model inputs; owns what PipelineInputs borrows.
struct LoadedInputs {
  std::optional<embed::EmbeddingTable> text, image;
  std::optional<featex::Lexicon> lexicon;
  std::unique_ptr<featex::FaceDetector> faces;
  eval::PipelineInputs view;
};

std::unique_ptr<featex::FaceDetector> face_detector(const std::string& spec) {
  if (spec == "stub" || spec == "field") return featex::make_face_detector(spec);
  if (!fs::exists(spec)) throw UsageError("face sidecar not found: " + spec);
  return featex::make_face_detector("sidecar", spec);
}

void load_inputs(const DataOpts& d, LoadedInputs& in, manifest::RunManifest& m) {
  for (const auto& path : d.embeddings) {
    if (!fs::exists(path)) throw UsageError("embedding file not found: " + path);
    auto table = embed::load_embeddings(path);
    auto& slot = table.modality() == embed::Modality::Text ? in.text : in.image;
    if (slot) throw UsageError("more than one " + embed::to_string(table.modality()) + " embedding file");
    slot.emplace(std::move(table));
    m.add_input(path);
  }
  if (!d.lexicon.empty()) {
    if (!fs::exists(d.lexicon)) throw UsageError("lexicon not found: " + d.lexicon);
    in.lexicon = featex::load_lexicon(d.lexicon);
    m.add_input(d.lexicon);
  }
  in.faces = face_detector(d.faces);
  if (d.faces != "stub" && d.faces != "field") m.add_input(d.faces);
  const fs::path root = d.images_root.empty() ? fs::path(d.corpus).parent_path() : fs::path(d.images_root);
  in.view.text_embeddings = in.text ? &*in.text : nullptr;
  in.view.image_embeddings = in.image ? &*in.image : nullptr;
  in.view.lexicon = in.lexicon ? &*in.lexicon : nullptr;
  in.view.images = featex::disk_image_source(root);
  in.view.faces = in.faces.get();
}

eval::PipelineConfig pipeline_config(const TrainOpts& t, const DataOpts& d, unsigned workers) {
  eval::PipelineConfig c;
  c.kind = eval::parse_model_kind(t.model_kind);
  c.train = t.train;
  c.train.seed = t.seed;
  c.threshold_mode = eval::parse_threshold_mode(t.threshold_mode);
  c.threshold = t.threshold;
  c.svm_lambda = t.svm_lambda;
  c.svm_epochs = t.svm_epochs;
  c.on_missing = d.on_missing == "zero" ? embed::OnMissing::Zero : embed::OnMissing::Error;
  c.workers = workers;
  try {
    c.train.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return c;
}

// Finalizes a run: digests the artifacts and writes manifest.json next to them.
void finish(manifest::RunManifest& m, const fs::path& dir, const std::vector<fs::path>& artifacts) {
  for (const auto& a : artifacts) m.add_artifact(dir, a);
  m.write(dir);
}

std::vector<fs::path> files_under(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// --- commands ---

struct SynthOpts {
  corpus::SynthConfig config;
  std::uint64_t seed = 0;
  std::string out = "corpus.jsonl";
  std::size_t embed_dim = 32;
  bool assets = true;
};

void run_synth(const SynthOpts& o, std::ostream& out) {
  const fs::path corpus_path = o.out;
  const fs::path dir = corpus_path.parent_path().empty() ? fs::path(".") : corpus_path.parent_path();
  fs::create_directories(dir);

  manifest::RunManifest m;
  m.command = "synth";
  m.config = {{"bags", o.config.bags},
              {"positive_fraction", o.config.positive_fraction},
              {"min_posts", o.config.min_posts},
              {"max_posts", o.config.max_posts},
              {"signal", o.config.signal},
              {"embed_dim", o.embed_dim},
              {"assets", o.assets}};
  m.seeds["synth"] = o.seed;

  const auto c = corpus::synth_corpus(o.config, o.seed);
  corpus::save_corpus(corpus_path.string(), c);
  std::vector<fs::path> artifacts{corpus_path};
  if (o.assets) {
    synth::write_synth_images(dir, c, o.config.signal, o.config.image_size, o.seed);
    const auto images = featex::disk_image_source(dir);
    embed::save_embeddings(dir / "text.milemb", synth::text_embeddings(c, o.embed_dim, o.seed));
    embed::save_embeddings(dir / "image.milemb", synth::image_embeddings(c, images, o.embed_dim, o.seed));
    featex::write_face_sidecar(dir / "faces.csv", c);
    artifacts.push_back(dir / "text.milemb");
    artifacts.push_back(dir / "image.milemb");
    artifacts.push_back(dir / "faces.csv");
    for (const auto& b : c)
      for (const auto& p : b.posts)
        if (p.image_ref) artifacts.push_back(dir / *p.image_ref);
  }
  finish(m, dir, artifacts);
  out << "wrote " << c.size() << " students, " << corpus::total_posts(c) << " posts to " << corpus_path.string()
      << '\n';
}

void run_stats(const DataOpts& d, const std::string& out_dir, std::ostream& out) {
  if (!fs::exists(d.corpus)) throw UsageError("corpus not found: " + d.corpus);
  const auto c = corpus::load_corpus(d.corpus);
  const auto r = corpus::corpus_stats(c, corpus::ObservationWindow(d.window));
  json j = {{"window_days", r.window_days},
            {"students", r.students},
            {"posts", r.posts},
            {"mean_posts", r.mean_posts},
            {"std_posts", r.std_posts},
            {"negative_student_pct", r.negative_student_pct},
            {"positive_student_pct", r.positive_student_pct}};
  out << "window " << r.window_days << " days: " << r.students << " students, " << r.posts << " posts, "
      << fmt("%.2f", r.mean_posts) << " +- " << fmt("%.2f", r.std_posts) << " posts per student\n";
  out << "band       students  posts  post%   mean   std\n";
  for (const auto band : corpus::kAllBands) {
    const auto& s = r.bands.at(band);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-9s %9zu %6zu %6.2f %6.2f %5.2f\n", corpus::to_string(band).c_str(), s.students,
                  s.posts, s.post_percentage, s.mean_posts, s.std_posts);
    out << buf;
    j["bands"][corpus::to_string(band)] = {{"students", s.students},
                                           {"posts", s.posts},
                                           {"post_percentage", s.post_percentage},
                                           {"mean_posts", s.mean_posts},
                                           {"std_posts", s.std_posts}};
  }
  out << "students negative " << fmt("%.2f", r.negative_student_pct) << "%, positive "
      << fmt("%.2f", r.positive_student_pct) << "%\n";
  if (out_dir.empty()) return;

  fs::create_directories(out_dir);
  manifest::RunManifest m;
  m.command = "stats";
  m.config = data_json(d);
  m.add_input(d.corpus);
  j["manifest"] = m.hash();
  const fs::path file = fs::path(out_dir) / "stats.json";
  std::ofstream(file, std::ios::binary) << j.dump(2) << '\n';
  finish(m, out_dir, {file});
}

struct SplitOpts {
  std::size_t n = 10;
  std::uint64_t seed = 0;
  std::string out_dir = "splits";
  std::string basis = "posts";
  double tolerance = 0.01;
  double time_budget = 300.0;
  std::size_t max_iterations = 0;
  std::size_t candidates = 10;
};

void run_split(const DataOpts& d, const SplitOpts& o, unsigned workers, std::ostream& out) {
  const auto c = load_windowed(d);
  const auto targets = split::SplitTargets::from_corpus(c, split::parse_basis(o.basis));
  split::SearchBudget budget;
  budget.tolerance = o.tolerance;
  budget.candidates = o.candidates;
  if (o.max_iterations > 0) budget.max_iterations = o.max_iterations;
  // With an iteration cap the wall clock is disabled so results stay reproducible.
  if (o.max_iterations > 0 || o.time_budget <= 0) budget.wall_clock_seconds.reset();
  else budget.wall_clock_seconds = o.time_budget;

  manifest::RunManifest m;
  m.command = "split";
  m.config = data_json(d);
  m.config["n"] = o.n;
  m.config["basis"] = o.basis;
  m.config["tolerance"] = o.tolerance;
  m.config["time_budget"] = budget.wall_clock_seconds ? json(*budget.wall_clock_seconds) : json(nullptr);
  m.config["max_iterations"] = o.max_iterations;
  m.config["candidates"] = o.candidates;
  m.seeds["split"] = o.seed;
  m.add_input(d.corpus);

  const auto suite = split::generate_suite(c, o.n, targets, budget, o.seed, workers);
  fs::create_directories(o.out_dir);
  split::write_suite(o.out_dir, suite, targets, budget, m.hash());
  std::vector<split::Partition> parts;
  for (const auto& e : suite) {
    parts.push_back(e.result.partition);
    out << "partition " << parts.size() - 1 << ": objective " << fmt("%.4f", e.result.objective) << ", "
        << (e.budget_stopped() ? "budget-stopped" : "within tolerance") << ", " << e.result.iterations
        << " rounds\n";
  }
  if (const auto dup = split::count_duplicates(parts)) out << dup << " duplicate partition(s)\n";
  finish(m, o.out_dir, files_under(o.out_dir));
}

void run_featurize(const DataOpts& d, const std::string& out_dir, std::ostream& out) {
  const auto c = load_windowed(d);
  manifest::RunManifest m;
  m.command = "featurize";
  m.config = data_json(d);
  m.add_input(d.corpus);
  LoadedInputs in;
  load_inputs(d, in, m);
  fs::create_directories(out_dir);
  const auto h = m.hash();
  std::vector<fs::path> files;
  const auto emit = [&](const char* name, const featex::FeatureMatrix& fm) {
    fm.validate();
    files.push_back(fs::path(out_dir) / name);
    featex::write_feature_csv(files.back(), fm, h);
    out << name << ": " << fm.rows() << " x " << fm.cols() << '\n';
  };
  const auto visual = featex::visual_feature_matrix(c, in.view.images, *in.view.faces);
  emit("visual_features.csv", visual);
  if (in.lexicon) {
    const auto text = featex::text_feature_matrix(c, *in.lexicon);
    emit("text_features.csv", text);
    emit("concat_features.csv", featex::concat_features(text, visual));
  }
  emit("demographics.csv", featex::demographics_matrix(c));
  finish(m, out_dir, files);
}

int run_embed_check(const std::string& file, const std::string& corpus_path, std::ostream& out,
                    std::ostream& err) {
  if (!fs::exists(file)) throw UsageError("embedding file not found: " + file);
  try {
    const auto t = embed::load_embeddings(file);
    out << "ok " << file << ": " << embed::to_string(t.modality()) << ' ' << t.encoder() << ", d=" << t.dim()
        << ", " << t.size() << " rows\n";
    if (!corpus_path.empty()) {
      const auto c = corpus::load_corpus(corpus_path);
      const auto pm = embed::posts_to_matrix(c, t, embed::OnMissing::Zero);
      if (!pm.missing_ids.empty()) {
        err << pm.missing_ids.size() << " corpus posts have no row, first: " << pm.missing_ids.front() << '\n';
        return 1;
      }
      out << "covers all " << pm.bag_of_row.size() << " corpus posts\n";
    }
  } catch (const embed::EmbedError& e) {
    err << "invalid " << file << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}

std::vector<split::Partition> load_suite(const std::string& dir) {
  if (dir.empty()) throw UsageError("--suite or --kfold is required");
  if (!fs::is_directory(dir)) throw UsageError("suite directory not found: " + dir);
  return split::read_suite(dir).partitions;
}

void run_train(const DataOpts& d, const TrainOpts& t, const std::string& suite_dir, std::size_t fold,
               const std::string& out_dir, std::ostream& out) {
  const auto partitions = load_suite(suite_dir);
  if (fold >= partitions.size())
    throw UsageError("fold " + std::to_string(fold) + " out of range; suite has " +
                     std::to_string(partitions.size()));
  const auto c = load_windowed(d);
  manifest::RunManifest m;
  m.command = "train";
  m.config = data_json(d);
  m.config.update(training_json(t));
  m.config["fold"] = fold;
  m.seeds["train"] = t.seed;
  m.add_input(d.corpus);
  m.add_input_dir(suite_dir);
  LoadedInputs in;
  load_inputs(d, in, m);
  const auto cfg = pipeline_config(t, d, 1);

  const auto r = eval::run_fold(c, partitions[fold], in.view, cfg, fold);
  fs::create_directories(out_dir);
  const auto h = m.hash();
  const fs::path dir = out_dir;
  std::vector<fs::path> files;
  if (r.trained) {
    files.push_back(dir / "model.ckpt");
    nn::TrainConfig tc = cfg.train;
    tc.seed = split::derive_seed(cfg.train.seed, fold);
    nn::save_checkpoint(files.back(), r.trained->model, tc);
    files.push_back(dir / "history.csv");
    nn::write_history_csv(files.back(), r.trained->history, h);
    out << "best epoch " << r.trained->history.best_epoch << ", validation accuracy "
        << fmt("%.4f", r.trained->history.best_val_accuracy) << '\n';
  }
  if (r.svm) {
    files.push_back(dir / "coefficients.csv");
    heads::write_coefficients_csv(files.back(), heads::top_coefficients(*r.svm, r.svm->weights.size()), h);
  }
  files.push_back(dir / "predictions.csv");
  heads::write_predictions_csv(files.back(), r.predictions, h);
  out << "test precision " << fmt("%.2f", r.metrics.precision) << ", recall " << fmt("%.2f", r.metrics.recall)
      << ", f1 " << fmt("%.2f", r.metrics.f1) << '\n';
  finish(m, dir, files);
}

void run_eval(const DataOpts& d, const TrainOpts& t, const std::string& suite_dir, std::size_t kfold,
              const std::string& out_dir, unsigned workers, std::ostream& out) {
  const auto c = load_windowed(d);
  manifest::RunManifest m;
  m.command = "eval";
  m.config = data_json(d);
  m.config.update(training_json(t));
  m.seeds["train"] = t.seed;
  m.add_input(d.corpus);
  std::vector<split::Partition> suite;
  if (kfold > 0) {
    m.config["kfold"] = kfold;
    suite = eval::kfold_suite(c, kfold, t.seed);
  } else {
    suite = load_suite(suite_dir);
    m.add_input_dir(suite_dir);
  }
  LoadedInputs in;
  load_inputs(d, in, m);
  const auto cfg = pipeline_config(t, d, workers);
  const auto report = eval::cross_validate(c, suite, in.view, cfg, d.window);
  const auto files = eval::write_report(out_dir, report, m.hash());
  out << report.summary_text();
  finish(m, out_dir, files);
}

struct AnalyzeOpts {
  std::string out_dir = "analysis";
  std::size_t top = 5;
  std::size_t hashtags = 10;
  std::uint64_t seed = 0;
  double svm_lambda = 0.01;
  int svm_epochs = 50;
};

void run_analyze(const DataOpts& d, const AnalyzeOpts& o, std::ostream& out) {
  const auto c = load_windowed(d);
  manifest::RunManifest m;
  m.command = "analyze";
  m.config = data_json(d);
  m.config["top"] = o.top;
  m.config["hashtags"] = o.hashtags;
  m.config["svm_lambda"] = o.svm_lambda;
  m.config["svm_epochs"] = o.svm_epochs;
  m.seeds["svm"] = o.seed;
  m.add_input(d.corpus);
  LoadedInputs in;
  load_inputs(d, in, m);
  fs::create_directories(o.out_dir);
  const auto h = m.hash();
  const fs::path dir = o.out_dir;
  std::vector<fs::path> files;

  // Students with posts only; the SVM is fit on all of them for interpretation.
  std::vector<std::size_t> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (!c[i].posts.empty()) {
      rows.push_back(i);
      labels.push_back(corpus::binary_label(c[i].bdi) == corpus::BinaryLabel::Positive ? 1 : 0);
    }
  const auto coefficients = [&](const char* name, const featex::FeatureMatrix& fm) {
    auto sub = fm.select_rows(rows);
    if (sub.cols() == 0) return;
    const auto svm = heads::svm_train(sub, labels, o.svm_lambda, o.svm_epochs, o.seed);
    const auto top = heads::top_coefficients(svm, o.top);
    files.push_back(dir / (std::string("svm_") + name + ".csv"));
    heads::write_coefficients_csv(files.back(), top, h);
    out << name << " features, positive class:";
    for (const auto& k : top.positive) out << ' ' << k.feature << '(' << fmt("%.3f", k.weight) << ')';
    out << "\n" << name << " features, negative class:";
    for (const auto& k : top.negative) out << ' ' << k.feature << '(' << fmt("%.3f", k.weight) << ')';
    out << '\n';
  };
  const auto visual = featex::visual_feature_matrix(c, in.view.images, *in.view.faces);
  coefficients("visual", visual);
  if (in.lexicon) {
    const auto text = featex::text_feature_matrix(c, *in.lexicon);
    coefficients("text", text);
    coefficients("concat", featex::concat_features(text, visual));
  }
  coefficients("demographics", featex::demographics_matrix(c));

  files.push_back(dir / "hashtags.csv");
  std::ofstream tags(files.back(), std::ios::binary);
  tags << "# manifest " << h << "\nband,rank,hashtag,count\n";
  for (const auto band : corpus::kAllBands) {
    const auto ranked = eval::hashtag_ranking(c, band, o.hashtags);
    out << corpus::to_string(band) << " hashtags:";
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      tags << corpus::to_string(band) << ',' << i + 1 << ',' << ranked[i].tag << ',' << ranked[i].count << '\n';
      out << " #" << ranked[i].tag << '(' << ranked[i].count << ')';
    }
    out << '\n';
  }
  tags.close();
  finish(m, dir, files);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Depression-symptom screening from student posts", "mil-screen"};
  app.set_config("--config", "", "TOML/INI file with option defaults; flags override it");
  app.require_subcommand(1);
  unsigned workers = default_workers();
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  SynthOpts so;
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with images, embeddings and face counts");
  synth->add_option("--bags", so.config.bags)->capture_default_str();
  synth->add_option("--seed", so.seed)->capture_default_str();
  synth->add_option("--out", so.out, "corpus file; assets go next to it")->capture_default_str();
  synth->add_option("--positive-fraction", so.config.positive_fraction)->capture_default_str();
  synth->add_option("--min-posts", so.config.min_posts)->capture_default_str();
  synth->add_option("--max-posts", so.config.max_posts)->capture_default_str();
  synth->add_option("--signal", so.config.signal, "class signal strength in [0,1]")->capture_default_str();
  synth->add_option("--embed-dim", so.embed_dim)->capture_default_str();
  synth->add_flag("!--no-assets", so.assets, "write only the corpus file");

  DataOpts stats_d;
  std::string stats_out;
  auto* stats = app.add_subcommand("stats", "corpus statistics per severity band");
  add_corpus(stats, stats_d);
  stats->add_option("--out-dir", stats_out, "also write stats.json here");

  DataOpts split_d;
  SplitOpts split_o;
  auto* splitc = app.add_subcommand("split", "generate a suite of stratified train/val/test partitions");
  add_corpus(splitc, split_d);
  splitc->add_option("--n,--n-splits", split_o.n)->capture_default_str()->check(CLI::PositiveNumber);
  splitc->add_option("--seed", split_o.seed)->capture_default_str();
  splitc->add_option("--out-dir", split_o.out_dir)->capture_default_str();
  splitc->add_option("--basis", split_o.basis)->check(CLI::IsMember({"posts", "bags"}))->capture_default_str();
  splitc->add_option("--tolerance", split_o.tolerance)->capture_default_str();
  splitc->add_option("--time-budget", split_o.time_budget, "seconds per search; 0 disables")->capture_default_str();
  splitc->add_option("--max-iterations", split_o.max_iterations, "round cap; disables the wall clock")
      ->capture_default_str();
  splitc->add_option("--candidates", split_o.candidates)->capture_default_str();

  DataOpts feat_d;
  std::string feat_out = "features";
  auto* featurize = app.add_subcommand("featurize", "write engineered user-level feature matrices");
  add_corpus(featurize, feat_d);
  add_inputs(featurize, feat_d);
  featurize->add_option("--out-dir", feat_out)->capture_default_str();

  std::string check_file, check_corpus;
  auto* embedc = app.add_subcommand("embed", "embedding file tools");
  embedc->require_subcommand(1);
  auto* check = embedc->add_subcommand("check", "validate an embedding file");
  check->add_option("file", check_file)->required();
  check->add_option("--corpus", check_corpus, "also require a row for every post of this corpus");

  DataOpts train_d;
  TrainOpts train_t;
  std::string train_suite, train_out = "model";
  std::size_t train_fold = 0;
  auto* trainc = app.add_subcommand("train", "train one model on one partition");
  add_corpus(trainc, train_d);
  add_inputs(trainc, train_d);
  add_training(trainc, train_t);
  trainc->add_option("--suite", train_suite, "split suite directory")->required();
  trainc->add_option("--fold", train_fold, "partition index")->capture_default_str();
  trainc->add_option("--out-dir", train_out)->capture_default_str();

  DataOpts eval_d;
  TrainOpts eval_t;
  std::string eval_suite, eval_out = "report";
  std::size_t kfold = 0;
  auto* evalc = app.add_subcommand("eval", "cross-validate a model kind over a split suite");
  add_corpus(evalc, eval_d);
  add_inputs(evalc, eval_d);
  add_training(evalc, eval_t);
  evalc->add_option("--suite", eval_suite, "split suite directory");
  evalc->add_option("--kfold", kfold, "use conventional k-fold instead of a suite");
  evalc->add_option("--out-dir", eval_out)->capture_default_str();

  DataOpts an_d;
  AnalyzeOpts an_o;
  auto* analyze = app.add_subcommand("analyze", "linear SVM coefficients and hashtag rankings");
  add_corpus(analyze, an_d);
  add_inputs(analyze, an_d);
  analyze->add_option("--out-dir", an_o.out_dir)->capture_default_str();
  analyze->add_option("--top", an_o.top)->capture_default_str();
  analyze->add_option("--hashtags", an_o.hashtags)->capture_default_str();
  analyze->add_option("--seed", an_o.seed)->capture_default_str();
  analyze->add_option("--svm-lambda", an_o.svm_lambda)->capture_default_str();
  analyze->add_option("--svm-epochs", an_o.svm_epochs)->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) run_synth(so, out);
    else if (*stats) run_stats(stats_d, stats_out, out);
    else if (*splitc) run_split(split_d, split_o, workers, out);
    else if (*featurize) run_featurize(feat_d, feat_out, out);
    else if (*check) return run_embed_check(check_file, check_corpus, out, err);
    else if (*trainc) run_train(train_d, train_t, train_suite, train_fold, train_out, out);
    else if (*evalc) run_eval(eval_d, eval_t, eval_suite, kfold, eval_out, workers, out);
    else if (*analyze) run_analyze(an_d, an_o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, out, err);
}

}  // namespace milscreen::cli
