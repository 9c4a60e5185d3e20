#pragma once

#include <string>
#include <vector>

#include "milscreen/corpus.hpp"

namespace milscreen::eval {

struct HashtagCount {
  std::string tag;
  std::size_t count = 0;
  bool operator==(const HashtagCount&) const = default;
};

// Case-insensitive hashtag frequencies over raw captions of the band's students,
// most frequent first, ties broken lexicographically; at most k entries.
std::vector<HashtagCount> hashtag_ranking(const corpus::Corpus& corpus, corpus::SeverityBand band,
                                          std::size_t k = 10);

std::vector<HashtagCount> rank_hashtags(const std::vector<std::string>& captions, std::size_t k = 10);

}  // namespace milscreen::eval
