#include "milscreen/text.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>

namespace milscreen::featex {

namespace {

constexpr char32_t kInvalid = 0xFFFD;

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b = static_cast<unsigned char>(s[i]);
    int len = 0;
    char32_t cp = 0;
    if (b < 0x80) { cp = b; len = 1; }
    else if ((b & 0xE0) == 0xC0) { cp = b & 0x1F; len = 2; }
    else if ((b & 0xF0) == 0xE0) { cp = b & 0x0F; len = 3; }
    else if ((b & 0xF8) == 0xF0) { cp = b & 0x07; len = 4; }
    else { out.push_back(kInvalid); ++i; continue; }
    if (i + static_cast<std::size_t>(len) > s.size()) { out.push_back(kInvalid); ++i; continue; }
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const auto c = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if ((c & 0xC0) != 0x80) { ok = false; break; }
      cp = (cp << 6) | (c & 0x3F);
    }
    if (!ok) { out.push_back(kInvalid); ++i; continue; }
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

char32_t lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if (c < 0x80) return c;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  if ((c >= 0x100 && c <= 0x137) || (c >= 0x14A && c <= 0x177)) return c | 1;
  if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) return (c & 1) ? c + 1 : c;
  if (c == 0x178) return 0xFF;
  if (c >= 0x391 && c <= 0x3A9) return c + 0x20;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

bool is_digit(char32_t c) { return c >= '0' && c <= '9'; }

bool is_letter(char32_t c) {
  if (c < 0x80) return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  if (c == 0xD7 || c == 0xF7) return false;
  if (c >= 0xC0 && c <= 0x2AF) return true;
  if (c >= 0x300 && c <= 0x36F) return true;  // combining marks stay inside words
  if (c >= 0x370 && c <= 0x1FFF) return true;
  if (c >= 0x3040 && c <= 0x9FFF) return true;
  if (c >= 0xAC00 && c <= 0xD7AF) return true;
  return false;
}

bool is_space(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' || c == 0xA0 ||
         c == 0x2028 || c == 0x2029 || (c >= 0x2000 && c <= 0x200A) || c == 0x3000;
}

using U32 = std::u32string;

std::vector<U32> split_whitespace(const std::vector<char32_t>& cps) {
  std::vector<U32> out;
  U32 cur;
  for (char32_t c : cps) {
    if (is_space(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(lower(c));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool word_char(char32_t c) { return is_letter(c) || is_digit(c); }

// Strip separators on both ends, keeping a leading '#' or '@'.
U32 trim(const U32& t) {
  std::size_t b = 0, e = t.size();
  while (b < e && !word_char(t[b]) && t[b] != U'#' && t[b] != U'@') ++b;
  while (e > b && !word_char(t[e - 1])) --e;
  return t.substr(b, e - b);
}

std::string to_utf8(const U32& s) {
  std::string out;
  for (char32_t c : s) append_utf8(out, c);
  return out;
}

bool starts_with(const U32& s, std::u32string_view p) { return s.compare(0, p.size(), p) == 0; }

bool is_email(const std::string& s) {
  static const std::regex re(R"(^[a-z0-9._%+\-]+@[a-z0-9\-]+(\.[a-z0-9\-]+)*\.[a-z]{2,}$)");
  return std::regex_match(s, re);
}

void split_runs(const U32& t, std::vector<std::string>& out) {
  std::size_t i = 0;
  while (i < t.size()) {
    if (is_digit(t[i])) {
      while (i < t.size() && is_digit(t[i])) ++i;
      out.emplace_back("0");
    } else if (is_letter(t[i])) {
      const std::size_t b = i;
      while (i < t.size() && is_letter(t[i])) ++i;
      out.push_back(to_utf8(t.substr(b, i - b)));
    } else {
      ++i;
    }
  }
}

}  // namespace

std::string utf8_lower(std::string_view text) {
  std::string out;
  for (char32_t c : decode_utf8(text)) append_utf8(out, lower(c));
  return out;
}

std::vector<std::string> normalize_caption(std::string_view text) {
  std::vector<std::string> out;
  for (const U32& raw : split_whitespace(decode_utf8(text))) {
    const U32 t = trim(raw);
    if (t.empty()) continue;
    if (starts_with(t, U"http://") || starts_with(t, U"https://") || starts_with(t, U"www.")) {
      out.emplace_back("url");
      continue;
    }
    if (t[0] == U'#') continue;
    if (t[0] == U'@') {
      if (t.size() > 1) out.emplace_back("username");
      continue;
    }
    if (t.find(U'@') != U32::npos && is_email(to_utf8(t))) {
      out.emplace_back("email");
      continue;
    }
    split_runs(t, out);
  }
  return out;
}

std::vector<std::string> extract_hashtags(std::string_view text) {
  std::vector<std::string> out;
  const auto cps = decode_utf8(text);
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i] != U'#') continue;
    std::size_t j = i + 1;
    U32 body;
    while (j < cps.size() && (word_char(cps[j]) || cps[j] == U'_')) body.push_back(lower(cps[j++]));
    if (!body.empty()) out.push_back(to_utf8(body));
    i = j - 1;
  }
  return out;
}

void TfidfVectorizer::fit(const std::vector<std::vector<std::string>>& docs) {
  std::map<std::string, std::size_t, std::less<>> df;
  for (const auto& d : docs) {
    std::set<std::string_view> uniq(d.begin(), d.end());
    for (auto t : uniq) ++df[std::string(t)];
  }
  tokens_.clear();
  index_.clear();
  df_.clear();
  idf_.clear();
  n_docs_ = docs.size();
  const double n = static_cast<double>(n_docs_);
  for (const auto& [tok, count] : df) {
    index_.emplace(tok, tokens_.size());
    tokens_.push_back(tok);
    df_.push_back(count);
    idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  fitted_ = true;
}

long TfidfVectorizer::column_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

std::vector<double> TfidfVectorizer::transform(const std::vector<std::string>& doc) const {
  if (!fitted_) throw Error("tf-idf transform called before fit");
  std::vector<double> v(tokens_.size(), 0.0);
  for (const auto& t : doc) {
    auto it = index_.find(t);
    if (it != index_.end()) v[it->second] += 1.0;
  }
  double norm = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] *= idf_[i];
    norm += v[i] * v[i];
  }
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

}  // namespace milscreen::featex
