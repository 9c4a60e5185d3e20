#pragma once

#include <cstdint>
#include <filesystem>

#include "milscreen/corpus.hpp"
#include "milscreen/embedstore.hpp"
#include "milscreen/image.hpp"

// Synthetic pictures and embeddings that carry the same planted class signal as
// corpus::synth_corpus captions.
namespace milscreen::synth {

// Stable 64-bit hash (FNV-1a) used to seed per-token and per-post generators.
std::uint64_t fnv1a(std::string_view text);

// Square picture with a random base hue. Value is drawn from U(0.55, 0.95) and
// lowered by 0.45 * signal for positive bags.
featex::Image synth_image(const std::string& post_id, bool positive, double signal, int size,
                          std::uint64_t seed);

// Pictures for every post with an image_ref, generated on the fly.
featex::ImageSource synth_image_source(const corpus::Corpus& corpus, double signal, int size,
                                       std::uint64_t seed);

// Writes each post's picture as PNG to root / image_ref.
void write_synth_images(const std::filesystem::path& root, const corpus::Corpus& corpus,
                        double signal, int size, std::uint64_t seed);

// Deterministic N(0,1) vector of a word.
std::vector<double> word_vector(const std::string& token, std::size_t dim, std::uint64_t seed);

// Mean-pooled word vectors over normalized caption tokens. Empty captions give zeros.
embed::EmbeddingTable text_embeddings(const corpus::Corpus& corpus, std::size_t dim,
                                      std::uint64_t seed);

// Fixed random projection of (h, s, v, std v, 1) picture statistics plus small
// per-post noise. Posts without a picture get the zero vector.
embed::EmbeddingTable image_embeddings(const corpus::Corpus& corpus, const featex::ImageSource& images,
                                       std::size_t dim, std::uint64_t seed);

}  // namespace milscreen::synth
