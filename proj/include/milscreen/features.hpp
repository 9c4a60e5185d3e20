#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "milscreen/corpus.hpp"
#include "milscreen/faces.hpp"
#include "milscreen/image.hpp"
#include "milscreen/lexicon.hpp"

namespace milscreen::featex {

// Named-column dense matrix; one row per post or per user.
struct FeatureMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> columns;
  Eigen::MatrixXd values;

  std::size_t rows() const { return row_ids.size(); }
  std::size_t cols() const { return columns.size(); }
  // Throws on shape mismatch, duplicate column names or non-finite entries.
  void validate() const;
  FeatureMatrix select_rows(const std::vector<std::size_t>& rows) const;
};

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m,
                       const std::string& manifest_hash = {});
FeatureMatrix read_feature_csv(const std::filesystem::path& path);

struct UserAggregate {
  std::vector<double> values;  // means, then sample stds, then sums (3d)
  bool no_posts = false;
};

// Per-post vectors must share one length d (taken from `d` when there are no posts).
UserAggregate aggregate_user(const std::vector<std::vector<double>>& per_post, std::size_t d);
std::vector<std::string> aggregate_names(const std::vector<std::string>& per_post_names);

inline constexpr const char* kNoPostsColumn = "no_posts";

// Stacks per-user aggregates into a matrix. A trailing no_posts flag column is
// appended only when some user has no posts.
FeatureMatrix user_matrix(const std::vector<std::string>& user_ids,
                          const std::vector<std::vector<std::vector<double>>>& per_user_posts,
                          const std::vector<std::string>& per_post_names);

// Per-post lexicon ratios (raw count / caption token count), aggregated per user.
FeatureMatrix text_feature_matrix(const corpus::Corpus& corpus, const Lexicon& lexicon);

// Per-post (hue, saturation, value, faces) aggregated to 12 features per user.
// Posts without an image contribute a zero vector.
FeatureMatrix visual_feature_matrix(const corpus::Corpus& corpus, const ImageSource& images,
                                    const FaceDetector& faces);

FeatureMatrix demographics_matrix(const corpus::Corpus& corpus);

// Horizontal concatenation with "text_"/"image_" column prefixes.
FeatureMatrix concat_features(const FeatureMatrix& text, const FeatureMatrix& image,
                              const std::string& left_prefix = "text_",
                              const std::string& right_prefix = "image_");

// Column-wise z-scoring; statistics come from the rows passed to fit.
class Standardizer {
 public:
  void fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;
  const Eigen::RowVectorXd& mean() const { return mean_; }
  const Eigen::RowVectorXd& scale() const { return scale_; }

 private:
  Eigen::RowVectorXd mean_;
  Eigen::RowVectorXd scale_;
};

}  // namespace milscreen::featex
