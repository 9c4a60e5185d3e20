#include "milscreen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

namespace milscreen::eval {

ConfusionCounts confusion(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.size() != labels.size()) throw Error("confusion: length mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predictions[i] != 0, y = labels[i] != 0;
    if (p && y) ++c.tp;
    else if (p) ++c.fp;
    else if (y) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

Prf1 prf1(const ConfusionCounts& c) {
  Prf1 m;
  const auto ratio = [&](std::size_t num, std::size_t den) {
    if (den == 0) {
      m.zero_division = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  if (m.precision + m.recall == 0.0) m.zero_division = true;
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

namespace {

struct Sweep {
  double threshold;
  std::size_t tp, fp;
};

// Cumulative counts at each unique score, highest first.
std::vector<Sweep> sweep(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw Error("curve: scores and labels differ in length");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  std::vector<Sweep> out;
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (!std::isfinite(scores[idx[k]])) throw Error("curve: non-finite score");
    if (labels[idx[k]]) ++tp;
    else ++fp;
    if (k + 1 == idx.size() || scores[idx[k + 1]] != scores[idx[k]])
      out.push_back({scores[idx[k]], tp, fp});
  }
  return out;
}

}  // namespace

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
  const auto pos = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](int y) { return y != 0; }));
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw Error("ROC curve needs both positive and negative examples");
  RocCurve r;
  r.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  for (const auto& s : sweep(scores, labels)) {
    const CurvePoint p{s.threshold, static_cast<double>(s.fp) / static_cast<double>(neg),
                       static_cast<double>(s.tp) / static_cast<double>(pos)};
    const auto& q = r.points.back();
    r.auc += (p.x - q.x) * (p.y + q.y) / 2.0;
    r.points.push_back(p);
  }
  return r;
}

std::vector<CurvePoint> pr_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
  const auto pos = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](int y) { return y != 0; }));
  std::vector<CurvePoint> out;
  for (const auto& s : sweep(scores, labels)) {
    const double recall = pos ? static_cast<double>(s.tp) / static_cast<double>(pos) : 0.0;
    const double precision = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp);
    out.push_back({s.threshold, recall, precision});
  }
  return out;
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& points,
                     const std::string& manifest_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write curve '" + path.string() + "'");
  if (!manifest_hash.empty()) out << "# manifest " << manifest_hash << '\n';
  out << "threshold,x,y\n";
  char buf[96];
  for (const auto& p : points) {
    if (std::isinf(p.threshold)) std::snprintf(buf, sizeof buf, "inf,%.17g,%.17g\n", p.x, p.y);
    else std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.threshold, p.x, p.y);
    out << buf;
  }
}

}  // namespace milscreen::eval
