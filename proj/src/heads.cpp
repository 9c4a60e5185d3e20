#include "milscreen/heads.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

namespace milscreen::heads {

std::vector<nn::LayerSpec> build_head(HeadKind kind, std::size_t d) {
  if (d == 0) throw Error("head input dimension must be positive");
  switch (kind) {
    case HeadKind::Image:
    case HeadKind::Fusion:
      return {nn::DropoutSpec{0.5}, nn::LinearSpec{d, 2}, nn::SoftmaxSpec{}};
    case HeadKind::Text: {
      const std::size_t h = d / 2;
      if (h < 1) throw Error("text head needs input dimension >= 2 (hidden = d/2)");
      return {nn::LinearSpec{d, h}, nn::BatchNormSpec{h}, nn::ReluSpec{}, nn::LinearSpec{h, 2},
              nn::SoftmaxSpec{}};
    }
  }
  throw Error("unknown head kind");
}

std::vector<nn::LayerSpec> build_fusion_head(std::size_t text_dim, std::size_t image_dim) {
  if (text_dim == 0 || image_dim == 0) throw Error("fusion head needs both modalities");
  return build_head(HeadKind::Fusion, text_dim + image_dim);
}

StudentPrediction predict_student(std::string student_id, std::vector<double> probs,
                                  double threshold) {
  StudentPrediction p;
  p.student_id = std::move(student_id);
  p.threshold = threshold;
  for (double v : probs)
    if (!(v >= 0.0 && v <= 1.0)) throw Error("post probability outside [0,1]");
  p.post_probabilities = std::move(probs);
  if (p.post_probabilities.empty()) {
    p.no_posts = true;
    return p;
  }
  p.bag_probability = std::accumulate(p.post_probabilities.begin(), p.post_probabilities.end(), 0.0) /
                      static_cast<double>(p.post_probabilities.size());
  p.positive = p.bag_probability >= threshold;
  return p;
}

void write_predictions_csv(const std::filesystem::path& path,
                           const std::vector<StudentPrediction>& predictions,
                           const std::string& manifest_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write predictions '" + path.string() + "'");
  if (!manifest_hash.empty()) out << "# manifest " << manifest_hash << '\n';
  out << "student_id,bag_prob,label\n";
  char buf[64];
  for (const auto& p : predictions) {
    if (p.no_posts) {
      out << p.student_id << ",,no-posts\n";
      continue;
    }
    std::snprintf(buf, sizeof buf, "%.17g", p.bag_probability);
    out << p.student_id << ',' << buf << ',' << (p.positive ? 1 : 0) << '\n';
  }
}

double SvmModel::decision(const Eigen::RowVectorXd& x) const {
  double s = bias;
  for (Eigen::Index j = 0; j < x.size(); ++j) s += weights[static_cast<std::size_t>(j)] * x(j);
  return s;
}

std::vector<double> SvmModel::decision_values(const featex::FeatureMatrix& m) const {
  if (m.columns != features) throw Error("SVM: feature columns differ from training columns");
  const Eigen::MatrixXd z = standardizer.transform(m.values);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < z.rows(); ++i) out.push_back(decision(z.row(i)));
  return out;
}

SvmModel svm_train(const featex::FeatureMatrix& train, const std::vector<int>& labels, double lambda,
                   int epochs, std::uint64_t seed) {
  if (train.rows() != labels.size()) throw Error("svm_train: label count differs from rows");
  if (!(lambda > 0.0)) throw Error("svm_train: lambda must be positive");
  if (epochs <= 0) throw Error("svm_train: epochs must be positive");
  const bool has_pos = std::count(labels.begin(), labels.end(), 1) > 0;
  const bool has_neg = std::count(labels.begin(), labels.end(), 0) > 0;
  if (!has_pos || !has_neg) throw Error("svm_train: training set holds a single class");
  for (int y : labels)
    if (y != 0 && y != 1) throw Error("svm_train: labels must be 0 or 1");

  SvmModel m;
  m.features = train.columns;
  m.lambda = lambda;
  m.standardizer.fit(train.values);
  const Eigen::MatrixXd x = m.standardizer.transform(train.values);
  m.weights.assign(train.cols(), 0.0);

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(train.rows());
  std::iota(order.begin(), order.end(), 0);
  std::size_t t = 0;
  for (int e = 0; e < epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double y = labels[i] == 1 ? 1.0 : -1.0;
      const auto row = x.row(static_cast<Eigen::Index>(i));
      const double margin = y * m.decision(row);
      const double shrink = 1.0 - eta * lambda;
      for (double& w : m.weights) w *= shrink;
      if (margin < 1.0) {
        for (std::size_t j = 0; j < m.weights.size(); ++j) m.weights[j] += eta * y * row(static_cast<Eigen::Index>(j));
        m.bias += eta * y;
      }
    }
  }
  for (double w : m.weights)
    if (!std::isfinite(w)) throw Error("svm_train: non-finite weight");
  return m;
}

TopCoefficients top_coefficients(const SvmModel& svm, std::size_t k) {
  std::vector<Coefficient> pos, neg;
  for (std::size_t j = 0; j < svm.weights.size(); ++j) {
    if (svm.weights[j] > 0.0) pos.push_back({svm.features[j], svm.weights[j]});
    if (svm.weights[j] < 0.0) neg.push_back({svm.features[j], svm.weights[j]});
  }
  // Magnitude, then name, so the order does not depend on column order.
  auto by_mag = [](const Coefficient& a, const Coefficient& b) {
    const double ma = std::abs(a.weight), mb = std::abs(b.weight);
    return ma != mb ? ma > mb : a.feature < b.feature;
  };
  std::sort(pos.begin(), pos.end(), by_mag);
  std::sort(neg.begin(), neg.end(), by_mag);
  k = std::min(k, svm.weights.size());
  if (pos.size() > k) pos.resize(k);
  if (neg.size() > k) neg.resize(k);
  return {pos, neg};
}

void write_coefficients_csv(const std::filesystem::path& path, const TopCoefficients& top,
                            const std::string& manifest_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write coefficient report '" + path.string() + "'");
  if (!manifest_hash.empty()) out << "# manifest " << manifest_hash << '\n';
  out << "feature,weight,rank,class\n";
  char buf[64];
  for (std::size_t i = 0; i < top.positive.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", top.positive[i].weight);
    out << top.positive[i].feature << ',' << buf << ',' << (i + 1) << ",positive\n";
  }
  for (std::size_t i = 0; i < top.negative.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", top.negative[i].weight);
    out << top.negative[i].feature << ',' << buf << ',' << (i + 1) << ",negative\n";
  }
}

}  // namespace milscreen::heads
