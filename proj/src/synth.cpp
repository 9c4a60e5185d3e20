#include "milscreen/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>

#include "milscreen/text.hpp"

namespace milscreen::synth {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

featex::Image synth_image(const std::string& post_id, bool positive, double signal, int size,
                          std::uint64_t seed) {
  if (size <= 0) throw Error("synth_image: size must be positive");
  std::mt19937_64 rng(fnv1a(post_id) ^ seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double hue = u(rng);
  const double sat = 0.3 + 0.5 * u(rng);
  double value = 0.55 + 0.4 * u(rng);
  if (positive) value -= 0.45 * signal;
  std::normal_distribution<double> jitter(0.0, 0.03);
  featex::Image img;
  img.width = img.height = size;
  img.rgb.reserve(img.pixels() * 3);
  for (std::size_t i = 0; i < img.pixels(); ++i) {
    const double v = std::clamp(value + jitter(rng), 0.0, 1.0);
    const double s = std::clamp(sat + jitter(rng), 0.0, 1.0);
    const auto px = featex::hsv_to_rgb(hue, s, v);
    img.rgb.insert(img.rgb.end(), px.begin(), px.end());
  }
  return img;
}

featex::ImageSource synth_image_source(const corpus::Corpus& corpus, double signal, int size,
                                       std::uint64_t seed) {
  auto positive = std::make_shared<std::map<std::string, bool>>();
  for (const auto& b : corpus)
    for (const auto& p : b.posts)
      (*positive)[p.post_id] = corpus::binary_label(b.bdi) == corpus::BinaryLabel::Positive;
  return [positive, signal, size, seed](const corpus::Post& p) -> std::optional<featex::Image> {
    if (!p.image_ref) return std::nullopt;
    const auto it = positive->find(p.post_id);
    if (it == positive->end()) throw Error("synthetic image source has no post '" + p.post_id + "'");
    return synth_image(p.post_id, it->second, signal, size, seed);
  };
}

void write_synth_images(const std::filesystem::path& root, const corpus::Corpus& corpus,
                        double signal, int size, std::uint64_t seed) {
  const auto source = synth_image_source(corpus, signal, size, seed);
  for (const auto& b : corpus)
    for (const auto& p : b.posts) {
      if (!p.image_ref) continue;
      const auto path = root / *p.image_ref;
      std::filesystem::create_directories(path.parent_path());
      featex::encode_png(path, *source(p));
    }
}

std::vector<double> word_vector(const std::string& token, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(fnv1a(token) ^ (seed * 0x9e3779b97f4a7c15ULL));
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = n(rng);
  return v;
}

embed::EmbeddingTable text_embeddings(const corpus::Corpus& corpus, std::size_t dim,
                                      std::uint64_t seed) {
  embed::EmbeddingTable table(embed::Modality::Text, "synth-words", dim);
  for (const auto& b : corpus)
    for (const auto& p : b.posts) {
      std::vector<std::vector<double>> words;
      for (const auto& t : featex::normalize_caption(p.caption)) words.push_back(word_vector(t, dim, seed));
      const auto pooled = embed::mean_pool(words, dim);
      table.add(p.post_id, std::vector<float>(pooled.begin(), pooled.end()));
    }
  return table;
}

embed::EmbeddingTable image_embeddings(const corpus::Corpus& corpus, const featex::ImageSource& images,
                                       std::size_t dim, std::uint64_t seed) {
  constexpr int kStats = 5;
  std::mt19937_64 proj_rng(seed ^ 0x5851f42d4c957f2dULL);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd proj(dim, kStats);
  for (Eigen::Index i = 0; i < proj.size(); ++i) proj(i) = n(proj_rng);

  embed::EmbeddingTable table(embed::Modality::Image, "synth-pixels", dim);
  for (const auto& b : corpus)
    for (const auto& p : b.posts) {
      const auto img = images(p);
      std::vector<float> out(dim, 0.0f);
      if (img) {
        const auto m = featex::hsv_mean(*img);
        double var = 0.0;
        for (std::size_t i = 0; i < img->pixels(); ++i) {
          const auto* px = &img->rgb[3 * i];
          const double d = featex::rgb_to_hsv(px[0], px[1], px[2]).v - m.v;
          var += d * d;
        }
        Eigen::VectorXd stats(kStats);
        stats << m.h, m.s, m.v, std::sqrt(var / static_cast<double>(img->pixels())), 1.0;
        const Eigen::VectorXd e = proj * stats;
        std::mt19937_64 noise(fnv1a(p.post_id) ^ seed);
        std::normal_distribution<double> eps(0.0, 0.05);
        for (std::size_t k = 0; k < dim; ++k) out[k] = static_cast<float>(e(static_cast<Eigen::Index>(k)) + eps(noise));
      }
      table.add(p.post_id, std::move(out));
    }
  return table;
}

}  // namespace milscreen::synth
