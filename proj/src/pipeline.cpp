#include "milscreen/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "milscreen/text.hpp"

namespace milscreen::eval {

namespace {

struct KindName {
  ModelKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {ModelKind::TextBow, "text-bow"},     {ModelKind::TextEmb, "text-emb"},
    {ModelKind::TextFeat, "text-feat"},   {ModelKind::ImageFeat, "image-feat"},
    {ModelKind::ImageEmb, "image-emb"},   {ModelKind::Fusion, "fusion"},
    {ModelKind::FeatConcat, "feat-concat"}, {ModelKind::Svm, "svm"},
};

}  // namespace

std::string to_string(ModelKind kind) {
  for (const auto& k : kKindNames)
    if (k.kind == kind) return k.name;
  throw Error("unknown model kind");
}

ModelKind parse_model_kind(const std::string& name) {
  for (const auto& k : kKindNames)
    if (name == k.name) return k.kind;
  throw UsageError("unknown model kind '" + name + "'");
}

bool is_post_level(ModelKind kind) {
  return kind == ModelKind::TextBow || kind == ModelKind::TextEmb || kind == ModelKind::ImageEmb ||
         kind == ModelKind::Fusion;
}

std::string to_string(ThresholdMode mode) { return mode == ThresholdMode::Fixed ? "fixed" : "val-f1"; }

ThresholdMode parse_threshold_mode(const std::string& name) {
  if (name == "fixed") return ThresholdMode::Fixed;
  if (name == "val-f1") return ThresholdMode::ValidationF1;
  throw UsageError("unknown threshold mode '" + name + "'");
}

void assert_no_leak(const split::Partition& partition, const corpus::Corpus& corpus) {
  std::set<std::string> seen;
  for (auto s : {split::Subset::Train, split::Subset::Val, split::Subset::Test})
    for (const auto& id : partition.members(s))
      if (!seen.insert(id).second) throw Error("partition leaks student '" + id + "' across subsets");
  std::set<std::string> ids;
  for (const auto& b : corpus) ids.insert(b.student_id);
  if (ids != seen) throw Error("partition does not cover the corpus exactly");
}

namespace {

// Model inputs for one kind, built once and shared by all folds.
struct Prepared {
  bool post_level = false;
  Eigen::MatrixXd x;                        // posts or students as rows
  std::vector<std::size_t> bag_of_row;
  std::vector<std::vector<std::string>> tokens;  // text-bow only; x is filled per fold
  featex::FeatureMatrix user;               // user-level kinds
  std::size_t text_dim = 0, image_dim = 0;  // fusion
};

Eigen::MatrixXd post_embeddings(const corpus::Corpus& corpus, const embed::EmbeddingTable* table,
                                const char* what, embed::OnMissing on_missing,
                                std::vector<std::size_t>& bag_of_row) {
  if (!table) throw UsageError(std::string("model kind needs ") + what + " embeddings");
  auto pm = embed::posts_to_matrix(corpus, *table, on_missing);
  bag_of_row = std::move(pm.bag_of_row);
  return std::move(pm.matrix.values);
}

featex::FeatureMatrix text_features(const corpus::Corpus& corpus, const PipelineInputs& in) {
  if (!in.lexicon) throw UsageError("model kind needs a lexicon");
  return featex::text_feature_matrix(corpus, *in.lexicon);
}

featex::FeatureMatrix visual_features(const corpus::Corpus& corpus, const PipelineInputs& in) {
  if (!in.images) throw UsageError("model kind needs an image source");
  static const featex::StubFaceDetector stub;
  return featex::visual_feature_matrix(corpus, in.images, in.faces ? *in.faces : stub);
}

Prepared prepare(const corpus::Corpus& corpus, const PipelineInputs& in, const PipelineConfig& cfg) {
  Prepared p;
  p.post_level = is_post_level(cfg.kind);
  switch (cfg.kind) {
    case ModelKind::TextBow:
      for (std::size_t b = 0; b < corpus.size(); ++b)
        for (const auto& post : corpus[b].posts) {
          p.tokens.push_back(featex::normalize_caption(post.caption));
          p.bag_of_row.push_back(b);
        }
      break;
    case ModelKind::TextEmb:
      p.x = post_embeddings(corpus, in.text_embeddings, "text", cfg.on_missing, p.bag_of_row);
      break;
    case ModelKind::ImageEmb:
      p.x = post_embeddings(corpus, in.image_embeddings, "image", cfg.on_missing, p.bag_of_row);
      break;
    case ModelKind::Fusion: {
      std::vector<std::size_t> other;
      const auto t = post_embeddings(corpus, in.text_embeddings, "text", cfg.on_missing, p.bag_of_row);
      const auto i = post_embeddings(corpus, in.image_embeddings, "image", cfg.on_missing, other);
      p.text_dim = static_cast<std::size_t>(t.cols());
      p.image_dim = static_cast<std::size_t>(i.cols());
      p.x.resize(t.rows(), t.cols() + i.cols());
      p.x << t, i;
      break;
    }
    case ModelKind::TextFeat:
      p.user = text_features(corpus, in);
      break;
    case ModelKind::ImageFeat:
      p.user = visual_features(corpus, in);
      break;
    case ModelKind::FeatConcat:
    case ModelKind::Svm:
      p.user = featex::concat_features(text_features(corpus, in), visual_features(corpus, in));
      break;
  }
  if (!p.post_level) {
    p.user.validate();
    p.x = p.user.values;
    p.bag_of_row.resize(corpus.size());
    std::iota(p.bag_of_row.begin(), p.bag_of_row.end(), std::size_t{0});
  }
  return p;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

std::vector<nn::LayerSpec> head_for(ModelKind kind, const Prepared& p, std::size_t dim) {
  switch (kind) {
    case ModelKind::ImageEmb: return heads::build_head(heads::HeadKind::Image, dim);
    case ModelKind::Fusion: return heads::build_fusion_head(p.text_dim, p.image_dim);
    default: return heads::build_head(heads::HeadKind::Text, dim);
  }
}

// Mean row probability per bag, for the bags listed, in that order.
std::vector<std::vector<double>> group_by_bag(const std::vector<double>& row_prob,
                                              const std::vector<std::size_t>& row_bag,
                                              const std::vector<std::size_t>& bags) {
  std::map<std::size_t, std::size_t> slot;
  for (std::size_t i = 0; i < bags.size(); ++i) slot[bags[i]] = i;
  std::vector<std::vector<double>> out(bags.size());
  for (std::size_t r = 0; r < row_prob.size(); ++r) out[slot.at(row_bag[r])].push_back(row_prob[r]);
  return out;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Threshold maximizing F1 over candidate cut points (ties: the candidate nearest 0.5).
double best_f1_threshold(const std::vector<double>& probs, const std::vector<int>& truth, double fallback) {
  std::set<double> candidates(probs.begin(), probs.end());
  candidates.insert(fallback);
  double best = fallback, best_f1 = -1.0;
  for (double t : candidates) {
    std::vector<int> pred;
    for (double p : probs) pred.push_back(p >= t ? 1 : 0);
    const double f = prf1(confusion(pred, truth)).f1;
    if (f > best_f1 + 1e-12 || (std::abs(f - best_f1) <= 1e-12 && std::abs(t - 0.5) < std::abs(best - 0.5))) {
      best_f1 = f;
      best = t;
    }
  }
  return best;
}

int label_of(const corpus::StudentBag& b) {
  return corpus::binary_label(b.bdi) == corpus::BinaryLabel::Positive ? 1 : 0;
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  s.folds = values.size();
  if (values.empty()) return s;
  const auto [m, sd] = corpus::mean_and_sample_std(values);
  s.mean = m;
  s.std = sd;
  return s;
}

FoldResult fold_with(const corpus::Corpus& corpus, const Prepared& prep, const split::Partition& partition,
                     const PipelineConfig& cfg, std::size_t fold) {
  const auto aligned = partition.aligned_to(corpus);
  assert_no_leak(aligned, corpus);

  FoldResult res;
  res.fold = fold;
  std::array<std::vector<std::size_t>, split::kSubsets> bags;
  for (std::size_t b = 0; b < corpus.size(); ++b) bags[static_cast<std::size_t>(aligned.at(b))].push_back(b);
  const auto& [train_bags, val_bags, test_bags] = bags;
  res.train_students = train_bags.size();
  res.val_students = val_bags.size();
  res.test_students = test_bags.size();

  std::array<std::vector<std::size_t>, split::kSubsets> rows;
  for (std::size_t r = 0; r < prep.bag_of_row.size(); ++r)
    rows[static_cast<std::size_t>(aligned.at(prep.bag_of_row[r]))].push_back(r);
  auto& [train_rows, val_rows, test_rows] = rows;
  if (!prep.post_level) {
    // Students without posts are not scored; keep them out of training too.
    for (auto& rr : rows)
      std::erase_if(rr, [&](std::size_t r) { return corpus[prep.bag_of_row[r]].posts.empty(); });
  }
  if (train_rows.empty()) throw Error("fold " + std::to_string(fold) + " has no training rows");

  std::vector<int> row_label(prep.bag_of_row.size());
  for (std::size_t r = 0; r < row_label.size(); ++r) row_label[r] = label_of(corpus[prep.bag_of_row[r]]);
  const auto labels_of = [&](const std::vector<std::size_t>& rr) {
    std::vector<int> y;
    for (auto r : rr) y.push_back(row_label[r]);
    return y;
  };
  const auto bags_of = [&](const std::vector<std::size_t>& rr) {
    std::vector<std::size_t> b;
    for (auto r : rr) b.push_back(prep.bag_of_row[r]);
    return b;
  };

  Eigen::MatrixXd x = prep.x;
  if (cfg.kind == ModelKind::TextBow) {
    featex::TfidfVectorizer vec;
    std::vector<std::vector<std::string>> docs;
    for (auto r : train_rows) docs.push_back(prep.tokens[r]);
    vec.fit(docs);
    if (vec.size() == 0) throw Error("fold " + std::to_string(fold) + ": empty training vocabulary");
    x.resize(static_cast<Eigen::Index>(prep.tokens.size()), static_cast<Eigen::Index>(vec.size()));
    for (std::size_t r = 0; r < prep.tokens.size(); ++r) {
      const auto v = vec.transform(prep.tokens[r]);
      x.row(static_cast<Eigen::Index>(r)) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
  }

  const std::uint64_t seed = split::derive_seed(cfg.train.seed, fold);
  std::vector<double> row_prob(prep.bag_of_row.size(), 0.0);
  const std::vector<std::size_t> scored_rows = [&] {
    std::vector<std::size_t> all = val_rows;
    all.insert(all.end(), test_rows.begin(), test_rows.end());
    return all;
  }();

  if (cfg.kind == ModelKind::Svm) {
    featex::FeatureMatrix train_m = prep.user.select_rows(bags_of(train_rows));
    auto svm = heads::svm_train(train_m, labels_of(train_rows), cfg.svm_lambda, cfg.svm_epochs, seed);
    const auto d = svm.decision_values(prep.user.select_rows(bags_of(scored_rows)));
    for (std::size_t i = 0; i < scored_rows.size(); ++i) row_prob[scored_rows[i]] = 1.0 / (1.0 + std::exp(-d[i]));
    res.svm = std::move(svm);
  } else {
    if (!prep.post_level) {
      featex::Standardizer st;
      st.fit(take_rows(x, train_rows));
      x = st.transform(x);
    }
    const Eigen::MatrixXd xtr = take_rows(x, train_rows), xval = take_rows(x, val_rows);
    const auto ytr = labels_of(train_rows), yval = labels_of(val_rows);
    const auto val_bags_rows = bags_of(val_rows);
    const auto val_students = [&] {
      std::vector<std::size_t> u = val_bags_rows;
      u.erase(std::unique(u.begin(), u.end()), u.end());
      return u;
    }();
    // Student-level validation accuracy at the configured threshold.
    const nn::ValidationScorer scorer = [&](const nn::Matrix& probs) {
      std::vector<double> p(static_cast<std::size_t>(probs.rows()));
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = probs(static_cast<Eigen::Index>(i), 1);
      const auto grouped = group_by_bag(p, val_bags_rows, val_students);
      std::size_t correct = 0;
      for (std::size_t s = 0; s < val_students.size(); ++s)
        correct += ((mean_of(grouped[s]) >= cfg.threshold ? 1 : 0) == label_of(corpus[val_students[s]]));
      return static_cast<double>(correct) / static_cast<double>(val_students.size());
    };
    nn::TrainConfig tc = cfg.train;
    tc.seed = seed;
    nn::MlpModel model(head_for(cfg.kind, prep, static_cast<std::size_t>(x.cols())), seed);
    auto trained = nn::train(std::move(model), xtr, ytr, xval, yval, tc, scorer);
    const auto probs = trained.model.predict(take_rows(x, scored_rows));
    for (std::size_t i = 0; i < scored_rows.size(); ++i) row_prob[scored_rows[i]] = probs(static_cast<Eigen::Index>(i), 1);
    res.trained = std::move(trained);
  }

  const auto student_probs = [&](const std::vector<std::size_t>& rr, const std::vector<std::size_t>& students) {
    std::vector<double> p;
    for (auto r : rr) p.push_back(row_prob[r]);
    return group_by_bag(p, bags_of(rr), students);
  };

  res.threshold = cfg.threshold;
  if (cfg.threshold_mode == ThresholdMode::ValidationF1) {
    std::vector<std::size_t> vs;
    for (auto b : val_bags)
      if (!corpus[b].posts.empty()) vs.push_back(b);
    const auto grouped = student_probs(val_rows, vs);
    std::vector<double> p;
    std::vector<int> y;
    for (std::size_t s = 0; s < vs.size(); ++s) {
      p.push_back(mean_of(grouped[s]));
      y.push_back(label_of(corpus[vs[s]]));
    }
    if (!p.empty()) res.threshold = best_f1_threshold(p, y, cfg.threshold);
  }

  const auto grouped = student_probs(test_rows, test_bags);
  std::vector<double> scores;
  std::vector<int> preds;
  for (std::size_t s = 0; s < test_bags.size(); ++s) {
    const auto& bag = corpus[test_bags[s]];
    auto pred = bag.posts.empty() ? heads::predict_student(bag.student_id, {}, res.threshold)
                                  : heads::predict_student(bag.student_id, grouped[s], res.threshold);
    if (pred.no_posts) {
      ++res.no_posts;
    } else {
      scores.push_back(pred.bag_probability);
      preds.push_back(pred.positive ? 1 : 0);
      res.truth.push_back(label_of(bag));
    }
    res.predictions.push_back(std::move(pred));
  }
  // truth covers scored predictions only; pad unscored entries with -1 to stay aligned.
  std::vector<int> aligned_truth;
  for (std::size_t s = 0, k = 0; s < res.predictions.size(); ++s)
    aligned_truth.push_back(res.predictions[s].no_posts ? -1 : res.truth[k++]);

  std::vector<int> scored_truth = res.truth;
  res.truth = std::move(aligned_truth);
  res.confusion = confusion(preds, scored_truth);
  res.metrics = prf1(res.confusion);
  const auto pos = std::count(scored_truth.begin(), scored_truth.end(), 1);
  if (pos > 0 && static_cast<std::size_t>(pos) < scored_truth.size()) {
    auto roc = roc_curve(scores, scored_truth);
    res.auc = roc.auc;
    res.roc = std::move(roc.points);
  }
  res.pr = pr_curve(scores, scored_truth);
  return res;
}

}  // namespace

FoldResult run_fold(const corpus::Corpus& corpus, const split::Partition& partition,
                    const PipelineInputs& inputs, const PipelineConfig& config, std::size_t fold) {
  config.train.validate();
  return fold_with(corpus, prepare(corpus, inputs, config), partition, config, fold);
}

EvalReport cross_validate(const corpus::Corpus& corpus, const std::vector<split::Partition>& suite,
                          const PipelineInputs& inputs, const PipelineConfig& config, int window_days) {
  if (suite.empty()) throw Error("cross_validate needs at least one partition");
  config.train.validate();
  const Prepared prep = prepare(corpus, inputs, config);

  EvalReport report;
  report.kind = config.kind;
  report.window_days = window_days;
  report.seed = config.train.seed;
  report.threshold_mode = config.threshold_mode;
  report.folds.resize(suite.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto work = [&] {
    for (std::size_t i; (i = next++) < suite.size();) {
      try {
        report.folds[i] = fold_with(corpus, prep, suite[i], config, i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(config.workers, static_cast<unsigned>(suite.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<double> p, r, f, a;
  for (const auto& fr : report.folds) {
    p.push_back(fr.metrics.precision);
    r.push_back(fr.metrics.recall);
    f.push_back(fr.metrics.f1);
    if (fr.auc) a.push_back(*fr.auc);
  }
  report.precision = summarize(p);
  report.recall = summarize(r);
  report.f1 = summarize(f);
  report.auc = summarize(a);
  return report;
}

std::vector<split::Partition> kfold_suite(const corpus::Corpus& corpus, std::size_t k, std::uint64_t seed) {
  if (k < 3) throw UsageError("k-fold needs k >= 3");
  if (corpus.size() < k) throw UsageError("k-fold needs at least k students");
  std::vector<std::string> ids;
  for (const auto& b : corpus) ids.push_back(b.student_id);
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> fold_of(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) fold_of[order[i]] = i % k;

  std::vector<split::Partition> out;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<split::Subset> a(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i)
      a[i] = fold_of[i] == f ? split::Subset::Test
             : fold_of[i] == (f + 1) % k ? split::Subset::Val
                                          : split::Subset::Train;
    out.emplace_back(ids, std::move(a));
  }
  return out;
}

namespace {

nlohmann::json summary_json(const MetricSummary& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"folds", s.folds}};
}

}  // namespace

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["model_kind"] = to_string(kind);
  j["window_days"] = window_days;
  j["seed"] = seed;
  j["threshold_mode"] = to_string(threshold_mode);
  j["folds"] = nlohmann::json::array();
  for (const auto& f : folds) {
    nlohmann::json fj = {{"fold", f.fold},
                         {"train_students", f.train_students},
                         {"val_students", f.val_students},
                         {"test_students", f.test_students},
                         {"no_posts", f.no_posts},
                         {"threshold", f.threshold},
                         {"tp", f.confusion.tp},
                         {"fp", f.confusion.fp},
                         {"fn", f.confusion.fn},
                         {"tn", f.confusion.tn},
                         {"precision", f.metrics.precision},
                         {"recall", f.metrics.recall},
                         {"f1", f.metrics.f1},
                         {"zero_division", f.metrics.zero_division}};
    fj["auc"] = f.auc ? nlohmann::json(*f.auc) : nlohmann::json(nullptr);
    if (f.trained) fj["best_epoch"] = f.trained->history.best_epoch;
    j["folds"].push_back(std::move(fj));
  }
  j["summary"] = {{"precision", summary_json(precision)},
                  {"recall", summary_json(recall)},
                  {"f1", summary_json(f1)},
                  {"auc", summary_json(auc)}};
  return j;
}

std::string EvalReport::summary_text() const {
  char buf[160];
  std::string out = "model " + to_string(kind) + ", window " + std::to_string(window_days) + " days, " +
                    std::to_string(folds.size()) + " folds\n";
  const auto line = [&](const char* name, const MetricSummary& s) {
    std::snprintf(buf, sizeof buf, "%-9s %.2f +- %.2f\n", name, s.mean, s.std);
    out += buf;
  };
  line("precision", precision);
  line("recall", recall);
  line("f1", f1);
  if (auc.folds) line("auc", auc);
  return out;
}

std::vector<std::filesystem::path> write_report(const std::filesystem::path& dir, const EvalReport& report,
                                                const std::string& manifest_hash) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> files;
  const auto open = [&](const std::string& name) {
    files.push_back(dir / name);
    std::ofstream out(files.back(), std::ios::binary);
    if (!out) throw Error("cannot write '" + files.back().string() + "'");
    return out;
  };

  {
    auto j = report.to_json();
    if (!manifest_hash.empty()) j["manifest"] = manifest_hash;
    open("report.json") << j.dump(2) << '\n';
  }
  {
    auto out = open("folds.csv");
    if (!manifest_hash.empty()) out << "# manifest " << manifest_hash << '\n';
    out << "fold,tp,fp,fn,tn,no_posts,threshold,precision,recall,f1,auc\n";
    char buf[256];
    for (const auto& f : report.folds) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%zu,%zu,%zu,%.17g,%.17g,%.17g,%.17g,", f.fold, f.confusion.tp,
                    f.confusion.fp, f.confusion.fn, f.confusion.tn, f.no_posts, f.threshold, f.metrics.precision,
                    f.metrics.recall, f.metrics.f1);
      out << buf;
      if (f.auc) {
        std::snprintf(buf, sizeof buf, "%.17g", *f.auc);
        out << buf;
      }
      out << '\n';
    }
  }
  {
    auto out = open("summary.txt");
    if (!manifest_hash.empty()) out << "# manifest " << manifest_hash << '\n';
    out << report.summary_text();
  }
  char name[64];
  for (const auto& f : report.folds) {
    std::snprintf(name, sizeof name, "predictions_fold_%02zu.csv", f.fold);
    files.push_back(dir / name);
    heads::write_predictions_csv(files.back(), f.predictions, manifest_hash);
    std::snprintf(name, sizeof name, "pr_fold_%02zu.csv", f.fold);
    files.push_back(dir / name);
    write_curve_csv(files.back(), f.pr, manifest_hash);
    if (f.auc) {
      std::snprintf(name, sizeof name, "roc_fold_%02zu.csv", f.fold);
      files.push_back(dir / name);
      write_curve_csv(files.back(), f.roc, manifest_hash);
    }
  }
  return files;
}

}  // namespace milscreen::eval
