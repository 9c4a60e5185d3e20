#include "milscreen/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace milscreen::corpus {

using json = nlohmann::json;
using namespace std::chrono;

BdiScore::BdiScore(int value) : value_(value) {
  if (value < 0 || value > 63) {
    throw Error("BDI score out of range [0,63]: " + std::to_string(value));
  }
}

ObservationWindow::ObservationWindow(int d) : days(d) {
  if (d <= 0) throw Error("observation window must be positive, got " + std::to_string(d));
}

std::string to_string(SeverityBand band) {
  switch (band) {
    case SeverityBand::Minimal: return "minimal";
    case SeverityBand::Mild: return "mild";
    case SeverityBand::Moderate: return "moderate";
    case SeverityBand::Severe: return "severe";
  }
  return "?";
}

SeverityBand parse_band(const std::string& name) {
  for (auto b : kAllBands) {
    if (to_string(b) == name) return b;
  }
  throw UsageError("unknown severity band '" + name + "'");
}

SeverityBand band_of(BdiScore score) {
  const int s = score.value();
  if (s <= 13) return SeverityBand::Minimal;
  if (s <= 19) return SeverityBand::Mild;
  if (s <= 28) return SeverityBand::Moderate;
  return SeverityBand::Severe;
}

BinaryLabel binary_label(BdiScore score) {
  return score.value() >= 20 ? BinaryLabel::Positive : BinaryLabel::Negative;
}

StudentBag filter_window(const StudentBag& bag, ObservationWindow window) {
  StudentBag out = bag;
  out.posts.clear();
  const Date lower = bag.survey_date - days{window.days};
  for (const auto& p : bag.posts) {
    const Date d = floor<days>(p.timestamp);
    if (d >= lower && d <= bag.survey_date) out.posts.push_back(p);
  }
  return out;
}

Corpus filter_window(const Corpus& corpus, ObservationWindow window) {
  Corpus out;
  out.reserve(corpus.size());
  for (const auto& b : corpus) out.push_back(filter_window(b, window));
  return out;
}

std::vector<std::pair<Post, BinaryLabel>> propagate_labels(const StudentBag& bag) {
  std::vector<std::pair<Post, BinaryLabel>> out;
  out.reserve(bag.posts.size());
  const BinaryLabel y = binary_label(bag.bdi);
  for (const auto& p : bag.posts) out.emplace_back(p, y);
  return out;
}

std::pair<double, double> mean_and_sample_std(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

std::size_t total_posts(const Corpus& corpus) {
  std::size_t n = 0;
  for (const auto& b : corpus) n += b.posts.size();
  return n;
}

StatsReport corpus_stats(const Corpus& corpus, ObservationWindow window) {
  if (corpus.empty()) throw Error("corpus_stats: empty corpus");
  const Corpus filtered = filter_window(corpus, window);

  StatsReport r;
  r.window_days = window.days;
  r.students = filtered.size();
  std::map<SeverityBand, std::vector<double>> per_band;
  std::vector<double> all;
  std::size_t positives = 0;
  for (const auto& b : filtered) {
    const double n = static_cast<double>(b.posts.size());
    per_band[band_of(b.bdi)].push_back(n);
    all.push_back(n);
    r.posts += b.posts.size();
    if (binary_label(b.bdi) == BinaryLabel::Positive) ++positives;
  }
  std::tie(r.mean_posts, r.std_posts) = mean_and_sample_std(all);
  for (auto band : kAllBands) {
    BandStats s;
    const auto& counts = per_band[band];
    s.students = counts.size();
    s.posts = static_cast<std::size_t>(std::accumulate(counts.begin(), counts.end(), 0.0));
    s.post_percentage = r.posts == 0 ? 0.0 : 100.0 * static_cast<double>(s.posts) / static_cast<double>(r.posts);
    std::tie(s.mean_posts, s.std_posts) = mean_and_sample_std(counts);
    r.bands[band] = s;
  }
  if (r.posts == 0) {
    // Percentages are undefined without posts; report an even split so they still sum to 100.
    for (auto& [band, s] : r.bands) s.post_percentage = 25.0;
  }
  r.positive_student_pct = 100.0 * static_cast<double>(positives) / static_cast<double>(r.students);
  r.negative_student_pct = 100.0 - r.positive_student_pct;
  return r;
}

// --- synthetic corpus ---

namespace {

const std::vector<std::string> kNeutralWords = {
    "hoje", "praia", "amigos", "cafe", "aula", "sol", "noite", "cidade", "foto", "dia",
    "casa", "livro", "musica", "festa", "viagem", "mar", "campus", "jantar", "tarde", "rua",
    "gato", "chuva", "semana", "projeto", "prova", "familia", "domingo", "parque", "trem", "arte"};
const std::vector<std::string> kSharedTags = {"tbt", "photooftheday", "rj", "love", "art",
                                              "nature", "friends", "summer"};
const std::vector<std::string> kPositiveTags = {"erasmus", "eurotrip", "smile", "nikiti"};
const std::vector<std::string> kNegativeTags = {"photography", "drawing", "inktober", "vsco"};

template <class Rng>
const std::string& pick(const std::vector<std::string>& v, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

std::string make_caption(bool positive, double signal, double empty_rate, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < empty_rate) return "";
  std::uniform_int_distribution<int> nwords(3, 8);
  std::vector<std::string> words;
  const int n = nwords(rng);
  for (int i = 0; i < n; ++i) words.push_back(pick(kNeutralWords, rng));
  // Both classes draw a marker with the same probability; signal controls
  // whether the marker agrees with the label.
  if (u(rng) < 0.9) {
    const bool agree = u(rng) < 0.5 + 0.5 * signal;
    const bool mark_positive = agree ? positive : !positive;
    std::uniform_int_distribution<std::size_t> at(0, words.size());
    words.insert(words.begin() + static_cast<std::ptrdiff_t>(at(rng)),
                 mark_positive ? kPositiveMarker : kNegativeMarker);
  }
  if (u(rng) < 0.15) words.push_back(std::to_string(std::uniform_int_distribution<int>(1, 2019)(rng)));
  if (u(rng) < 0.10) words.push_back("@" + pick(kNeutralWords, rng) + "_" + std::to_string(rng() % 100));
  if (u(rng) < 0.05) words.push_back("https://insta.example/" + pick(kNeutralWords, rng));
  if (u(rng) < 0.4) {
    const bool band_tag = u(rng) < signal;
    words.push_back("#" + (band_tag ? pick(positive ? kPositiveTags : kNegativeTags, rng)
                                    : pick(kSharedTags, rng)));
  }
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  if (u(rng) < 0.3) out += u(rng) < 0.5 ? "!" : ".";
  return out;
}

}  // namespace

Corpus synth_corpus(const SynthConfig& cfg, std::uint64_t seed) {
  if (cfg.bags == 0) throw Error("synth_corpus: bag count must be positive");
  if (cfg.positive_fraction < 0.0 || cfg.positive_fraction > 1.0)
    throw Error("synth_corpus: positive_fraction must lie in [0,1]");
  if (cfg.min_posts < 0 || cfg.max_posts < cfg.min_posts)
    throw Error("synth_corpus: invalid post-count range");
  if (cfg.signal < 0.0 || cfg.signal > 1.0) throw Error("synth_corpus: signal must lie in [0,1]");
  if (cfg.history_days <= 0) throw Error("synth_corpus: history_days must be positive");

  std::mt19937_64 rng(seed);
  const auto n_pos = static_cast<std::size_t>(
      std::llround(static_cast<double>(cfg.bags) * cfg.positive_fraction));
  std::vector<bool> labels(cfg.bags, false);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_pos), true);
  std::shuffle(labels.begin(), labels.end(), rng);

  std::uniform_real_distribution<double> u(0.0, 1.0);
  Corpus corpus;
  corpus.reserve(cfg.bags);
  for (std::size_t i = 0; i < cfg.bags; ++i) {
    const bool positive = labels[i];
    StudentBag bag;
    char id[32];
    std::snprintf(id, sizeof id, "s%04zu", i);
    bag.student_id = id;
    bag.bdi = BdiScore(positive ? std::uniform_int_distribution<int>(20, 63)(rng)
                                : std::uniform_int_distribution<int>(0, 19)(rng));
    bag.survey_date = cfg.survey_date;
    bag.demographics["sex"] = u(rng) < 0.4 ? 1.0 : 0.0;
    bag.demographics["scholarship"] = u(rng) < (positive ? 0.2 : 0.4) ? 1.0 : 0.0;
    bag.demographics["household_income"] = std::uniform_int_distribution<int>(1, 5)(rng);
    bag.demographics["facebook_hours"] =
        std::round(10.0 * (u(rng) * 4.0 + (positive ? 2.0 * cfg.signal : 0.0))) / 10.0;

    const int n_posts = std::uniform_int_distribution<int>(cfg.min_posts, cfg.max_posts)(rng);
    for (int k = 0; k < n_posts; ++k) {
      Post p;
      char pid[48];
      std::snprintf(pid, sizeof pid, "%s_p%03d", id, k);
      p.post_id = pid;
      // 3% of posts fall after the survey date and are dropped by any window.
      const bool after = u(rng) < 0.03;
      const auto offset_days = after ? -std::uniform_int_distribution<int>(1, 10)(rng)
                                     : std::uniform_int_distribution<int>(0, cfg.history_days - 1)(rng);
      const auto secs = std::uniform_int_distribution<int>(0, 86399)(rng);
      p.timestamp = Timestamp{cfg.survey_date - days{offset_days}} + seconds{secs};
      p.caption = make_caption(positive, cfg.signal, cfg.empty_caption_rate, rng);
      if (u(rng) >= 0.03) p.image_ref = "images/" + p.post_id + ".png";
      const bool crowd = positive && u(rng) < 0.3 * cfg.signal;
      p.face_count = crowd ? std::uniform_int_distribution<int>(3, 6)(rng)
                           : std::uniform_int_distribution<int>(0, 2)(rng);
      bag.posts.push_back(std::move(p));
    }
    std::stable_sort(bag.posts.begin(), bag.posts.end(),
                     [](const Post& a, const Post& b) { return a.timestamp < b.timestamp; });
    corpus.push_back(std::move(bag));
  }
  return corpus;
}

// --- dates ---

std::string format_date(Date d) {
  const year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Date parse_date(const std::string& text) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3)
    throw Error("invalid date '" + text + "' (expected YYYY-MM-DD)");
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) throw Error("invalid calendar date '" + text + "'");
  return Date{ymd};
}

std::string format_timestamp(Timestamp t) {
  const Date d = floor<days>(t);
  const hh_mm_ss hms{t - d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "T%02d:%02d:%02d", static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count()));
  return format_date(d) + buf;
}

Timestamp parse_timestamp(const std::string& text) {
  if (text.size() < 10) throw Error("invalid timestamp '" + text + "'");
  const Date d = parse_date(text.substr(0, 10));
  if (text.size() == 10) return Timestamp{d};
  int hh = 0, mm = 0, ss = 0;
  char sep = 0;
  if (std::sscanf(text.c_str() + 10, "%c%2d:%2d:%2d", &sep, &hh, &mm, &ss) != 4 ||
      (sep != 'T' && sep != ' ') || hh > 23 || mm > 59 || ss > 60 || hh < 0 || mm < 0 || ss < 0)
    throw Error("invalid timestamp '" + text + "' (expected YYYY-MM-DDTHH:MM:SS)");
  const std::string rest = text.substr(std::min<std::size_t>(text.size(), 19));
  if (!rest.empty() && rest != "Z") throw Error("invalid timestamp suffix in '" + text + "'");
  return Timestamp{d} + hours{hh} + minutes{mm} + seconds{ss};
}

// --- JSON lines ---

std::string to_json_line(const StudentBag& bag) {
  json j;
  j["v"] = 1;
  j["student_id"] = bag.student_id;
  j["bdi"] = bag.bdi.value();
  j["survey_date"] = format_date(bag.survey_date);
  j["demographics"] = bag.demographics;
  json posts = json::array();
  for (const auto& p : bag.posts) {
    json jp;
    jp["post_id"] = p.post_id;
    jp["timestamp"] = format_timestamp(p.timestamp);
    jp["caption"] = p.caption;
    jp["image_ref"] = p.image_ref ? json(*p.image_ref) : json(nullptr);
    jp["face_count"] = p.face_count ? json(*p.face_count) : json(nullptr);
    posts.push_back(std::move(jp));
  }
  j["posts"] = std::move(posts);
  return j.dump();
}

StudentBag from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(std::string("malformed corpus record: ") + e.what());
  }
  try {
    if (j.value("v", 0) != 1) throw Error("unsupported corpus record version");
    StudentBag bag;
    bag.student_id = j.at("student_id").get<std::string>();
    if (bag.student_id.empty()) throw Error("empty student_id");
    bag.bdi = BdiScore(j.at("bdi").get<int>());
    bag.survey_date = parse_date(j.at("survey_date").get<std::string>());
    if (j.contains("demographics") && !j["demographics"].is_null()) {
      for (const auto& [k, v] : j["demographics"].items()) {
        if (v.is_boolean()) bag.demographics[k] = v.get<bool>() ? 1.0 : 0.0;
        else bag.demographics[k] = v.get<double>();
      }
    }
    std::map<std::string, int> seen;
    for (const auto& jp : j.at("posts")) {
      Post p;
      p.post_id = jp.at("post_id").get<std::string>();
      if (seen[p.post_id]++) throw Error("duplicate post_id '" + p.post_id + "'");
      p.timestamp = parse_timestamp(jp.at("timestamp").get<std::string>());
      p.caption = jp.value("caption", std::string{});
      if (jp.contains("image_ref") && !jp["image_ref"].is_null())
        p.image_ref = jp["image_ref"].get<std::string>();
      if (jp.contains("face_count") && !jp["face_count"].is_null()) {
        const int fc = jp["face_count"].get<int>();
        if (fc < 0) throw Error("negative face_count for post '" + p.post_id + "'");
        p.face_count = fc;
      }
      bag.posts.push_back(std::move(p));
    }
    return bag;
  } catch (const json::exception& e) {
    throw Error(std::string("invalid corpus record: ") + e.what());
  }
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& b : corpus) out << to_json_line(b) << '\n';
}

Corpus read_corpus(std::istream& in) {
  Corpus corpus;
  std::map<std::string, int> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      corpus.push_back(from_json_line(line));
    } catch (const Error& e) {
      throw Error("corpus line " + std::to_string(lineno) + ": " + e.what());
    }
    if (ids[corpus.back().student_id]++)
      throw Error("corpus line " + std::to_string(lineno) + ": duplicate student_id '" +
                  corpus.back().student_id + "'");
  }
  return corpus;
}

void save_corpus(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write corpus file '" + path + "'");
  write_corpus(out, corpus);
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file '" + path + "'");
  return read_corpus(in);
}

}  // namespace milscreen::corpus
