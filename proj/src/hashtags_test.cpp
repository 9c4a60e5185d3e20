#include "milscreen/hashtags.hpp"

#include "doctest.h"

using namespace milscreen;
using namespace milscreen::eval;

TEST_CASE("hashtag ranking") {
  CHECK(rank_hashtags({"#a #b", "#a"}) == std::vector<HashtagCount>{{"a", 2}, {"b", 1}});
  CHECK(rank_hashtags({"sem nada", ""}).empty());
  CHECK(rank_hashtags({"#Zeta #alpha #ALPHA #zeta #beta"}) ==
        std::vector<HashtagCount>{{"alpha", 2}, {"zeta", 2}, {"beta", 1}});
  CHECK(rank_hashtags({"#a #b #c"}, 2).size() == 2);
  CHECK(rank_hashtags({"#a #b #c"}, 100).size() == 3);
}

TEST_CASE("ranking by band") {
  corpus::Corpus c(2);
  c[0].student_id = "low";
  c[0].bdi = corpus::BdiScore(3);
  c[0].posts = {{"p", {}, "#praia #sol", {}, {}}};
  c[1].student_id = "high";
  c[1].bdi = corpus::BdiScore(40);
  c[1].posts = {{"q", {}, "#noite", {}, {}}, {"r", {}, "#noite #sol", {}, {}}};
  CHECK(hashtag_ranking(c, corpus::SeverityBand::Severe) == std::vector<HashtagCount>{{"noite", 2}, {"sol", 1}});
  CHECK(hashtag_ranking(c, corpus::SeverityBand::Minimal).size() == 2);
  CHECK(hashtag_ranking(c, corpus::SeverityBand::Mild).empty());
}
