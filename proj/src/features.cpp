#include "milscreen/features.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "milscreen/text.hpp"

namespace milscreen::featex {

void FeatureMatrix::validate() const {
  if (static_cast<std::size_t>(values.rows()) != row_ids.size() ||
      static_cast<std::size_t>(values.cols()) != columns.size())
    throw Error("feature matrix shape does not match its row ids / column names");
  std::set<std::string> seen;
  for (const auto& c : columns)
    if (!seen.insert(c).second) throw Error("duplicate feature column '" + c + "'");
  if (!values.allFinite()) throw Error("feature matrix contains NaN or infinite values");
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<std::size_t>& rows) const {
  FeatureMatrix out;
  out.columns = columns;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row_ids.push_back(row_ids.at(rows[i]));
    out.values.row(static_cast<Eigen::Index>(i)) = values.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m,
                       const std::string& manifest_hash) {
  m.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write feature file '" + path.string() + "'");
  if (!manifest_hash.empty()) out << "# manifest " << manifest_hash << '\n';
  out << "id";
  for (const auto& c : m.columns) out << ',' << c;
  out << '\n';
  char buf[40];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out << m.row_ids[r];
    for (std::size_t c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g",
                    m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
      out << ',' << buf;
    }
    out << '\n';
  }
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open feature file '" + path.string() + "'");
  FeatureMatrix m;
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    if (!header) {
      while (std::getline(ss, cell, ',')) m.columns.push_back(cell);
      header = true;
      continue;
    }
    m.row_ids.push_back(cell);
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() != m.columns.size())
      throw Error(path.string() + ":" + std::to_string(lineno) + ": wrong number of values");
    rows.push_back(std::move(row));
  }
  m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.columns.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  m.validate();
  return m;
}

UserAggregate aggregate_user(const std::vector<std::vector<double>>& per_post, std::size_t d) {
  UserAggregate out;
  if (!per_post.empty()) d = per_post.front().size();
  out.values.assign(3 * d, 0.0);
  if (per_post.empty()) {
    out.no_posts = true;
    return out;
  }
  const double n = static_cast<double>(per_post.size());
  for (const auto& v : per_post) {
    if (v.size() != d) throw Error("aggregate_user: per-post vectors differ in length");
    for (std::size_t j = 0; j < d; ++j) out.values[2 * d + j] += v[j];
  }
  for (std::size_t j = 0; j < d; ++j) out.values[j] = out.values[2 * d + j] / n;
  if (per_post.size() > 1) {
    for (std::size_t j = 0; j < d; ++j) {
      double ss = 0.0;
      for (const auto& v : per_post) ss += (v[j] - out.values[j]) * (v[j] - out.values[j]);
      out.values[d + j] = std::sqrt(ss / (n - 1.0));
    }
  }
  return out;
}

std::vector<std::string> aggregate_names(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const char* suffix : {"_mean", "_std", "_sum"})
    for (const auto& n : names) out.push_back(n + suffix);
  return out;
}

FeatureMatrix user_matrix(const std::vector<std::string>& user_ids,
                          const std::vector<std::vector<std::vector<double>>>& per_user_posts,
                          const std::vector<std::string>& names) {
  if (user_ids.size() != per_user_posts.size()) throw Error("user_matrix: id/row count mismatch");
  std::vector<UserAggregate> aggs;
  bool any_empty = false;
  for (const auto& posts : per_user_posts) {
    aggs.push_back(aggregate_user(posts, names.size()));
    any_empty = any_empty || aggs.back().no_posts;
  }
  FeatureMatrix m;
  m.row_ids = user_ids;
  m.columns = aggregate_names(names);
  if (any_empty) m.columns.emplace_back(kNoPostsColumn);
  m.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(aggs.size()),
                                   static_cast<Eigen::Index>(m.columns.size()));
  for (std::size_t r = 0; r < aggs.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    for (std::size_t c = 0; c < aggs[r].values.size(); ++c)
      m.values(row, static_cast<Eigen::Index>(c)) = aggs[r].values[c];
    if (any_empty) m.values(row, m.values.cols() - 1) = aggs[r].no_posts ? 1.0 : 0.0;
  }
  m.validate();
  return m;
}

FeatureMatrix text_feature_matrix(const corpus::Corpus& corpus, const Lexicon& lexicon) {
  std::vector<std::string> ids;
  std::vector<std::vector<std::vector<double>>> per_user;
  for (const auto& b : corpus) {
    ids.push_back(b.student_id);
    auto& posts = per_user.emplace_back();
    for (const auto& p : b.posts)
      posts.push_back(lexicon_counts(normalize_caption(p.caption), lexicon).normalized);
  }
  return user_matrix(ids, per_user, lexicon.names());
}

FeatureMatrix visual_feature_matrix(const corpus::Corpus& corpus, const ImageSource& images,
                                    const FaceDetector& faces) {
  std::vector<std::string> ids;
  std::vector<std::vector<std::vector<double>>> per_user;
  for (const auto& b : corpus) {
    ids.push_back(b.student_id);
    auto& posts = per_user.emplace_back();
    for (const auto& p : b.posts) {
      const auto img = images(p);
      if (!img) {
        posts.push_back({0.0, 0.0, 0.0, 0.0});
        continue;
      }
      const Hsv hsv = hsv_mean(*img);
      posts.push_back({hsv.h, hsv.s, hsv.v, static_cast<double>(faces.count(p).count)});
    }
  }
  return user_matrix(ids, per_user, {"hue", "saturation", "value", "faces"});
}

FeatureMatrix demographics_matrix(const corpus::Corpus& corpus) {
  std::set<std::string> keys;
  for (const auto& b : corpus)
    for (const auto& [k, v] : b.demographics) keys.insert(k);
  FeatureMatrix m;
  m.columns.assign(keys.begin(), keys.end());
  m.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(corpus.size()),
                                   static_cast<Eigen::Index>(keys.size()));
  for (std::size_t r = 0; r < corpus.size(); ++r) {
    m.row_ids.push_back(corpus[r].student_id);
    std::size_t c = 0;
    for (const auto& k : keys) {
      auto it = corpus[r].demographics.find(k);
      if (it != corpus[r].demographics.end())
        m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = it->second;
      ++c;
    }
  }
  m.validate();
  return m;
}

FeatureMatrix concat_features(const FeatureMatrix& text, const FeatureMatrix& image,
                              const std::string& left_prefix, const std::string& right_prefix) {
  if (text.row_ids != image.row_ids) throw Error("concat_features: row ids differ");
  FeatureMatrix m;
  m.row_ids = text.row_ids;
  for (const auto& c : text.columns) m.columns.push_back(left_prefix + c);
  for (const auto& c : image.columns) m.columns.push_back(right_prefix + c);
  m.values.resize(static_cast<Eigen::Index>(m.row_ids.size()), static_cast<Eigen::Index>(m.columns.size()));
  if (text.values.cols()) m.values.leftCols(text.values.cols()) = text.values;
  if (image.values.cols()) m.values.rightCols(image.values.cols()) = image.values;
  return m;
}

void Standardizer::fit(const Eigen::MatrixXd& x) {
  if (x.rows() == 0) throw Error("Standardizer: no rows to fit");
  mean_ = x.colwise().mean();
  scale_.resize(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double ss = (x.col(c).array() - mean_(c)).square().sum();
    const double sd = x.rows() > 1 ? std::sqrt(ss / static_cast<double>(x.rows() - 1)) : 0.0;
    scale_(c) = sd > 1e-12 ? sd : 1.0;
  }
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean_.size()) throw Error("Standardizer: column count differs from fit");
  return (x.rowwise() - mean_).array().rowwise() / scale_.array();
}

}  // namespace milscreen::featex
