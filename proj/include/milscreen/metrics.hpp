#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "milscreen/error.hpp"

namespace milscreen::eval {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionCounts&) const = default;
};

// predictions and labels are 0/1 and aligned.
ConfusionCounts confusion(const std::vector<int>& predictions, const std::vector<int>& labels);

struct Prf1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool zero_division = false;  // some denominator was zero and the ratio set to 0
};

Prf1 prf1(const ConfusionCounts& c);
// Harmonic mean of given precision and recall (0 when both are 0).
double f1_score(double precision, double recall);

struct CurvePoint {
  double threshold = 0.0;  // +inf for the ROC origin
  double x = 0.0;
  double y = 0.0;
};

struct RocCurve {
  std::vector<CurvePoint> points;  // (FPR, TPR), threshold decreasing
  double auc = 0.0;                // trapezoid rule
};

// Thresholds sweep the unique scores; a score >= threshold is predicted positive.
// Needs at least one positive and one negative label.
RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels);
// (recall, precision) per unique threshold, decreasing. Recall is 0 without positives.
std::vector<CurvePoint> pr_curve(const std::vector<double>& scores, const std::vector<int>& labels);

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& points,
                     const std::string& manifest_hash = {});

}  // namespace milscreen::eval
