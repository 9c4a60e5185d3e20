#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "milscreen/features.hpp"
#include "milscreen/nn.hpp"

namespace milscreen::heads {

enum class HeadKind { Image, Text, Fusion };

// Image:  Dropout(0.5) -> Linear(d,2) -> Softmax
// Text:   Linear(d,d/2) -> BatchNorm(d/2) -> ReLU -> Linear(d/2,2) -> Softmax
// Fusion: Dropout(0.5) -> Linear(d_text + d_image, 2) -> Softmax
// The heads sit on frozen features, so every parameter here is trainable.
std::vector<nn::LayerSpec> build_head(HeadKind kind, std::size_t input_dim);
std::vector<nn::LayerSpec> build_fusion_head(std::size_t text_dim, std::size_t image_dim);

inline constexpr double kDefaultThreshold = 0.5;

struct StudentPrediction {
  std::string student_id;
  std::vector<double> post_probabilities;
  bool no_posts = false;            // no prediction is defined for an empty bag
  double bag_probability = 0.0;     // mean of post_probabilities
  bool positive = false;            // bag_probability >= threshold
  double threshold = kDefaultThreshold;
};

// Averages the positive-class post probabilities; the threshold is inclusive.
StudentPrediction predict_student(std::string student_id, std::vector<double> post_probabilities,
                                  double threshold = kDefaultThreshold);

void write_predictions_csv(const std::filesystem::path& path,
                           const std::vector<StudentPrediction>& predictions,
                           const std::string& manifest_hash = {});

// --- linear SVM ---

struct SvmModel {
  std::vector<std::string> features;
  std::vector<double> weights;
  double bias = 0.0;
  double lambda = 0.0;
  featex::Standardizer standardizer;

  // Raw decision value w.x + b on already standardized features.
  double decision(const Eigen::RowVectorXd& standardized) const;
  // Standardizes with the training statistics, then evaluates each row.
  std::vector<double> decision_values(const featex::FeatureMatrix& m) const;
};

// Pegasos: minimizes lambda/2 |w|^2 + mean hinge loss by stochastic subgradient
// steps 1/(lambda t) over `epochs` shuffled passes. The bias is unregularized.
// Columns are z-scored with statistics from this training matrix. labels in {0,1}.
SvmModel svm_train(const featex::FeatureMatrix& train, const std::vector<int>& labels, double lambda,
                   int epochs, std::uint64_t seed);

struct Coefficient {
  std::string feature;
  double weight = 0.0;
};

struct TopCoefficients {
  std::vector<Coefficient> positive;  // largest positive weights first
  std::vector<Coefficient> negative;  // most negative weights first
};

// k is clamped to the number of features; zero weights appear in neither list.
TopCoefficients top_coefficients(const SvmModel& svm, std::size_t k = 5);

void write_coefficients_csv(const std::filesystem::path& path, const TopCoefficients& top,
                            const std::string& manifest_hash = {});

}  // namespace milscreen::heads
