#include "milscreen/hashtags.hpp"

#include <algorithm>
#include <map>

#include "milscreen/text.hpp"

namespace milscreen::eval {

std::vector<HashtagCount> rank_hashtags(const std::vector<std::string>& captions, std::size_t k) {
  std::map<std::string, std::size_t> counts;
  for (const auto& c : captions)
    for (auto& t : featex::extract_hashtags(c)) ++counts[t];
  std::vector<HashtagCount> out;
  for (auto& [t, n] : counts) out.push_back({t, n});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.count > b.count; });
  if (out.size() > k) out.resize(k);
  return out;
}

std::vector<HashtagCount> hashtag_ranking(const corpus::Corpus& corpus, corpus::SeverityBand band,
                                          std::size_t k) {
  std::vector<std::string> captions;
  for (const auto& b : corpus)
    if (corpus::band_of(b.bdi) == band)
      for (const auto& p : b.posts) captions.push_back(p.caption);
  return rank_hashtags(captions, k);
}

}  // namespace milscreen::eval
