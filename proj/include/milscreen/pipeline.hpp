#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "milscreen/corpus.hpp"
#include "milscreen/embedstore.hpp"
#include "milscreen/faces.hpp"
#include "milscreen/features.hpp"
#include "milscreen/heads.hpp"
#include "milscreen/image.hpp"
#include "milscreen/lexicon.hpp"
#include "milscreen/metrics.hpp"
#include "milscreen/nn.hpp"
#include "milscreen/splitgen.hpp"

namespace milscreen::eval {

// Post-level kinds train on posts labelled with their bag's label and average
// post probabilities per student. The remaining kinds train on one aggregated
// feature row per student.
enum class ModelKind {
  TextBow,     // tf-idf of normalized captions, text head (post level)
  TextEmb,     // caption embeddings, text head (post level)
  TextFeat,    // lexicon category features, MLP (user level)
  ImageFeat,   // HSV + face features, MLP (user level)
  ImageEmb,    // picture embeddings, image head (post level)
  Fusion,      // caption + picture embeddings, fusion head (post level)
  FeatConcat,  // lexicon + visual features, MLP (user level)
  Svm,         // lexicon + visual features, linear SVM (user level)
};

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);
bool is_post_level(ModelKind kind);

enum class ThresholdMode { Fixed, ValidationF1 };
std::string to_string(ThresholdMode mode);
ThresholdMode parse_threshold_mode(const std::string& name);

// Borrowed inputs; only those the model kind needs must be set.
struct PipelineInputs {
  const embed::EmbeddingTable* text_embeddings = nullptr;
  const embed::EmbeddingTable* image_embeddings = nullptr;
  const featex::Lexicon* lexicon = nullptr;
  featex::ImageSource images;
  const featex::FaceDetector* faces = nullptr;
};

struct PipelineConfig {
  ModelKind kind = ModelKind::Fusion;
  nn::TrainConfig train;
  ThresholdMode threshold_mode = ThresholdMode::Fixed;
  double threshold = heads::kDefaultThreshold;
  double svm_lambda = 0.01;
  int svm_epochs = 50;
  embed::OnMissing on_missing = embed::OnMissing::Error;
  unsigned workers = 1;
};

struct FoldResult {
  std::size_t fold = 0;
  std::size_t train_students = 0, val_students = 0, test_students = 0;
  std::vector<heads::StudentPrediction> predictions;  // test students in corpus order
  std::vector<int> truth;                             // aligned with predictions; -1 for no-posts students
  std::size_t no_posts = 0;                           // test students left unscored
  double threshold = heads::kDefaultThreshold;
  ConfusionCounts confusion;
  Prf1 metrics;
  std::optional<double> auc;  // absent when the scored test set lacks a class
  std::vector<CurvePoint> roc;
  std::vector<CurvePoint> pr;
  std::optional<nn::TrainResult> trained;  // MLP kinds
  std::optional<heads::SvmModel> svm;      // Svm kind
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample std across folds
  std::size_t folds = 0;
};

struct EvalReport {
  ModelKind kind = ModelKind::Fusion;
  int window_days = 0;
  std::uint64_t seed = 0;
  ThresholdMode threshold_mode = ThresholdMode::Fixed;
  std::vector<FoldResult> folds;
  MetricSummary precision, recall, f1, auc;

  nlohmann::json to_json() const;
  // Two-decimal human summary.
  std::string summary_text() const;
};

// Throws unless train/val/test student-id sets are pairwise disjoint and cover the corpus.
void assert_no_leak(const split::Partition& partition, const corpus::Corpus& corpus);

// One partition: train on train, select the epoch on val, score test students.
FoldResult run_fold(const corpus::Corpus& corpus, const split::Partition& partition,
                    const PipelineInputs& inputs, const PipelineConfig& config, std::size_t fold = 0);

EvalReport cross_validate(const corpus::Corpus& corpus, const std::vector<split::Partition>& suite,
                          const PipelineInputs& inputs, const PipelineConfig& config,
                          int window_days = 0);

// Conventional k-fold: fold i is test, fold i+1 (mod k) validation, the rest train.
std::vector<split::Partition> kfold_suite(const corpus::Corpus& corpus, std::size_t k,
                                          std::uint64_t seed);

// report.json, folds.csv, summary.txt, and per fold predictions/ROC/PR CSVs.
// Returns the written files.
std::vector<std::filesystem::path> write_report(const std::filesystem::path& dir,
                                                const EvalReport& report,
                                                const std::string& manifest_hash = {});

}  // namespace milscreen::eval
