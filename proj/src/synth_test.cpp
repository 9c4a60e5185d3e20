#include "milscreen/synth.hpp"

#include "doctest.h"
#include "milscreen/text.hpp"

using namespace milscreen;

TEST_CASE("synthetic pictures are darker for positive bags") {
  double pos = 0, neg = 0;
  for (int i = 0; i < 50; ++i) {
    pos += featex::hsv_mean(synth::synth_image("p" + std::to_string(i), true, 1.0, 16, 1)).v;
    neg += featex::hsv_mean(synth::synth_image("p" + std::to_string(i), false, 1.0, 16, 1)).v;
  }
  CHECK(pos / 50 < neg / 50 - 0.3);
  const auto a = synth::synth_image("x", true, 0.5, 8, 3), b = synth::synth_image("x", true, 0.5, 8, 3);
  CHECK(a.rgb == b.rgb);
  CHECK(a.width == 8);
}

TEST_CASE("synthetic embeddings") {
  corpus::SynthConfig cfg;
  cfg.bags = 10;
  const auto c = corpus::synth_corpus(cfg, 2);
  const auto text = synth::text_embeddings(c, 16, 4);
  CHECK(text.size() == corpus::total_posts(c));
  CHECK(text == synth::text_embeddings(c, 16, 4));
  for (const auto& b : c)
    for (const auto& p : b.posts)
      if (featex::normalize_caption(p.caption).empty())
        for (float x : text.at(p.post_id)) CHECK(x == 0.0f);

  const auto img = synth::image_embeddings(c, synth::synth_image_source(c, 1.0, 8, 4), 12, 4);
  CHECK(img.dim() == 12);
  CHECK(img.modality() == embed::Modality::Image);
  for (const auto& b : c)
    for (const auto& p : b.posts)
      if (!p.image_ref)
        for (float x : img.at(p.post_id)) CHECK(x == 0.0f);

  // one-word caption pools to that word's vector
  corpus::Corpus one(1);
  one[0].student_id = "s";
  one[0].posts = {{"p", {}, "Praia!", {}, {}}};
  const auto w = synth::word_vector("praia", 5, 9);
  const auto t = synth::text_embeddings(one, 5, 9);
  for (std::size_t k = 0; k < 5; ++k) CHECK(t.at("p")[k] == static_cast<float>(w[k]));
}
