#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "milscreen/error.hpp"

namespace milscreen::featex {

// Category lexicon in the LIWC .dic layout:
//
//   %
//   1<TAB>posemo
//   2<TAB>negemo
//   %
//   amor*<TAB>1
//   triste<TAB>2
//   feliz<TAB>1<TAB>2
//
// The first block declares categories (numeric id, name) and fixes column order.
// Each following line holds one pattern and the ids of the categories it belongs
// to, separated by tabs or spaces. A trailing '*' marks a prefix pattern.
// Patterns are lowercased at load. Blank lines are ignored.
class Lexicon {
 public:
  struct Category {
    std::string name;
    std::vector<std::string> patterns;
  };

  Lexicon() = default;
  explicit Lexicon(std::vector<Category> categories);

  const std::vector<Category>& categories() const { return categories_; }
  std::size_t size() const { return categories_.size(); }
  std::vector<std::string> names() const;

  // Indices of categories the token falls in.
  std::vector<std::size_t> match(const std::string& token) const;

 private:
  std::vector<Category> categories_;
};

bool pattern_matches(const std::string& pattern, const std::string& token);

Lexicon parse_lexicon(std::istream& in);
Lexicon load_lexicon(const std::string& path);
void write_lexicon(std::ostream& out, const Lexicon& lexicon);

struct LexiconCounts {
  std::vector<double> raw;
  std::vector<double> normalized;  // raw / token count; zeros for an empty token list
};

LexiconCounts lexicon_counts(const std::vector<std::string>& tokens, const Lexicon& lexicon);

}  // namespace milscreen::featex
