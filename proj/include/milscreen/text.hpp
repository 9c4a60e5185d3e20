#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "milscreen/error.hpp"

namespace milscreen::featex {

// Caption normalization:
//   - lowercase (ASCII, Latin-1, Latin Extended-A, Greek, Cyrillic)
//   - URLs -> "url", @mentions -> "username", e-mail addresses -> "email"
//   - hashtags are dropped together with their body
//   - punctuation, symbols and emoji act as separators and are dropped
//   - every digit run becomes the token "0"; letter/digit boundaries split tokens
std::vector<std::string> normalize_caption(std::string_view text);

// Hashtag bodies (lowercased, without '#') in order of appearance.
std::vector<std::string> extract_hashtags(std::string_view text);

std::string utf8_lower(std::string_view text);

// Smoothed-idf tf-idf with L2 row normalization. Columns are the sorted
// training vocabulary.
class TfidfVectorizer {
 public:
  void fit(const std::vector<std::vector<std::string>>& docs);
  std::vector<double> transform(const std::vector<std::string>& doc) const;

  bool fitted() const { return fitted_; }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::size_t>& document_frequencies() const { return df_; }
  std::size_t documents() const { return n_docs_; }
  double idf(std::size_t column) const { return idf_.at(column); }
  // Column of a token, or -1 when out of vocabulary.
  long column_of(const std::string& token) const;

 private:
  bool fitted_ = false;
  std::size_t n_docs_ = 0;
  std::vector<std::string> tokens_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<std::size_t> df_;
  std::vector<double> idf_;
};

}  // namespace milscreen::featex
