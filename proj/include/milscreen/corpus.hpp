#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "milscreen/error.hpp"

namespace milscreen::corpus {

using Date = std::chrono::sys_days;
using Timestamp = std::chrono::sys_seconds;

// Total Beck Depression Inventory score, 0..63.
class BdiScore {
 public:
  explicit BdiScore(int value);
  int value() const { return value_; }
  auto operator<=>(const BdiScore&) const = default;

 private:
  int value_;
};

enum class SeverityBand { Minimal, Mild, Moderate, Severe };
inline constexpr SeverityBand kAllBands[] = {SeverityBand::Minimal, SeverityBand::Mild,
                                             SeverityBand::Moderate, SeverityBand::Severe};

enum class BinaryLabel { Negative = 0, Positive = 1 };

std::string to_string(SeverityBand band);
SeverityBand parse_band(const std::string& name);

struct Post {
  std::string post_id;
  Timestamp timestamp{};
  std::string caption;
  std::optional<std::string> image_ref;
  std::optional<int> face_count;

  bool operator==(const Post&) const = default;
};

struct StudentBag {
  std::string student_id;
  BdiScore bdi{0};
  Date survey_date{};
  std::vector<Post> posts;
  std::map<std::string, double> demographics;

  bool operator==(const StudentBag&) const = default;
};

using Corpus = std::vector<StudentBag>;

struct ObservationWindow {
  int days = 212;
  explicit ObservationWindow(int d);
};

inline constexpr int kCanonicalWindows[] = {60, 212, 365};

SeverityBand band_of(BdiScore score);
BinaryLabel binary_label(BdiScore score);

// Keeps posts with survey_date - days <= date(timestamp) <= survey_date, in order.
StudentBag filter_window(const StudentBag& bag, ObservationWindow window);
Corpus filter_window(const Corpus& corpus, ObservationWindow window);

std::vector<std::pair<Post, BinaryLabel>> propagate_labels(const StudentBag& bag);

struct BandStats {
  std::size_t students = 0;
  std::size_t posts = 0;
  double post_percentage = 0.0;
  double mean_posts = 0.0;
  double std_posts = 0.0;  // sample (n-1); 0 when fewer than two students
};

struct StatsReport {
  int window_days = 0;
  std::size_t students = 0;
  std::size_t posts = 0;
  double mean_posts = 0.0;
  double std_posts = 0.0;
  std::map<SeverityBand, BandStats> bands;
  // Percent of students in each binary group.
  double negative_student_pct = 0.0;
  double positive_student_pct = 0.0;
};

StatsReport corpus_stats(const Corpus& corpus, ObservationWindow window);

// Mean and sample standard deviation; std is 0 for fewer than two values.
std::pair<double, double> mean_and_sample_std(const std::vector<double>& values);

struct SynthConfig {
  std::size_t bags = 100;
  double positive_fraction = 0.5973;
  int min_posts = 1;
  int max_posts = 12;
  // 0 = labels independent of content, 1 = strongly planted class signal.
  double signal = 1.0;
  Date survey_date = Date{std::chrono::year{2018} / 10 / 15};
  // Posts are spread over this many days before the survey (a few land after it).
  int history_days = 400;
  double empty_caption_rate = 0.05;
  int image_size = 16;
};

// Deterministic in (config, seed). Positive bags come first in id order only by
// chance; labels are shuffled across student ids.
Corpus synth_corpus(const SynthConfig& config, std::uint64_t seed);

// Tokens planted in captions of positive / negative posts when signal > 0.
inline constexpr const char* kPositiveMarker = "cansado";
inline constexpr const char* kNegativeMarker = "animado";

// --- serialization (one JSON record per line, "v":1) ---
std::string to_json_line(const StudentBag& bag);
StudentBag from_json_line(const std::string& line);
void write_corpus(std::ostream& out, const Corpus& corpus);
Corpus read_corpus(std::istream& in);
void save_corpus(const std::string& path, const Corpus& corpus);
Corpus load_corpus(const std::string& path);

std::string format_date(Date d);
Date parse_date(const std::string& text);
std::string format_timestamp(Timestamp t);
Timestamp parse_timestamp(const std::string& text);

std::size_t total_posts(const Corpus& corpus);

}  // namespace milscreen::corpus
