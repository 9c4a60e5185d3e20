#include "milscreen/lexicon.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "milscreen/text.hpp"

namespace milscreen::featex {

Lexicon::Lexicon(std::vector<Category> categories) : categories_(std::move(categories)) {
  std::set<std::string> names;
  for (const auto& c : categories_) {
    if (c.name.empty()) throw Error("lexicon: empty category name");
    if (!names.insert(c.name).second) throw Error("lexicon: duplicate category '" + c.name + "'");
    for (const auto& p : c.patterns)
      if (p.empty() || p == "*") throw Error("lexicon: empty pattern in category '" + c.name + "'");
  }
}

std::vector<std::string> Lexicon::names() const {
  std::vector<std::string> out;
  for (const auto& c : categories_) out.push_back(c.name);
  return out;
}

bool pattern_matches(const std::string& pattern, const std::string& token) {
  if (!pattern.empty() && pattern.back() == '*')
    return token.compare(0, pattern.size() - 1, pattern, 0, pattern.size() - 1) == 0 &&
           token.size() >= pattern.size() - 1;
  return pattern == token;
}

std::vector<std::size_t> Lexicon::match(const std::string& token) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    for (const auto& p : categories_[i].patterns) {
      if (pattern_matches(p, token)) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

Lexicon parse_lexicon(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  int section = 0;  // 0 before first '%', 1 category block, 2 patterns
  std::vector<std::pair<std::string, std::string>> decl;  // (id, name)
  std::map<std::string, std::size_t> id_to_index;
  std::vector<Lexicon::Category> cats;
  auto fail = [&](const std::string& msg) {
    throw Error("lexicon line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto b = line.find_first_not_of(" \t");
    const auto e = line.find_last_not_of(" \t");
    if (line.substr(b, e - b + 1) == "%") {
      if (section >= 2) fail("unexpected '%' after pattern block");
      ++section;
      continue;
    }
    std::istringstream fields(line);
    if (section == 1) {
      std::string id, name;
      fields >> id >> name;
      if (name.empty()) fail("category declaration needs '<id> <name>'");
      if (id_to_index.count(id)) fail("duplicate category id " + id);
      id_to_index[id] = cats.size();
      cats.push_back({name, {}});
    } else if (section == 2) {
      std::string pattern, id;
      fields >> pattern;
      pattern = utf8_lower(pattern);
      bool any = false;
      while (fields >> id) {
        auto it = id_to_index.find(id);
        if (it == id_to_index.end()) fail("unknown category id " + id);
        cats[it->second].patterns.push_back(pattern);
        any = true;
      }
      if (!any) fail("pattern '" + pattern + "' lists no category");
    } else {
      fail("expected '%' to open the category block");
    }
  }
  if (section < 2) throw Error("lexicon: missing category block delimiters");
  return Lexicon(std::move(cats));
}

Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open lexicon file '" + path + "'");
  try {
    return parse_lexicon(in);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_lexicon(std::ostream& out, const Lexicon& lexicon) {
  out << "%\n";
  const auto& cats = lexicon.categories();
  for (std::size_t i = 0; i < cats.size(); ++i) out << (i + 1) << '\t' << cats[i].name << '\n';
  out << "%\n";
  // Patterns in first-seen order, each with every category that lists it.
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> ids;
  for (std::size_t i = 0; i < cats.size(); ++i) {
    for (const auto& p : cats[i].patterns) {
      auto& v = ids[p];
      if (v.empty()) order.push_back(p);
      v.push_back(i + 1);
    }
  }
  for (const auto& p : order) {
    out << p;
    for (auto id : ids[p]) out << '\t' << id;
    out << '\n';
  }
}

LexiconCounts lexicon_counts(const std::vector<std::string>& tokens, const Lexicon& lexicon) {
  LexiconCounts c;
  c.raw.assign(lexicon.size(), 0.0);
  for (const auto& t : tokens)
    for (auto i : lexicon.match(t)) c.raw[i] += 1.0;
  c.normalized = c.raw;
  if (!tokens.empty())
    for (double& v : c.normalized) v /= static_cast<double>(tokens.size());
  return c;
}

}  // namespace milscreen::featex
