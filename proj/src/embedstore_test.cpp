#include "milscreen/embedstore.hpp"

#include <fstream>
#include <random>

#include "doctest.h"

using namespace milscreen;
using namespace milscreen::embed;
namespace fs = std::filesystem;

namespace {

fs::path tmp(const std::string& name) { return fs::temp_directory_path() / ("milscreen_" + name); }

EmbeddingTable sample(std::size_t rows, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(0.0f, 1.0f);
  EmbeddingTable t(Modality::Text, "enc", d);
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<float> v(d);
    for (auto& x : v) x = n(rng);
    t.add("p" + std::to_string(r), v);
  }
  return t;
}

}  // namespace

TEST_CASE("binary and csv round-trips") {
  const auto t = sample(3, 4, 1);
  save_embeddings(tmp("a.milemb"), t);
  const auto back = load_embeddings(tmp("a.milemb"));
  CHECK(back.size() == 3);
  CHECK(back == t);

  save_embeddings(tmp("a.csv"), t);
  CHECK(format_for(tmp("a.csv")) == WireFormat::Csv);
  CHECK(load_embeddings(tmp("a.csv")) == t);

  // saving the loaded table reproduces the same bytes
  save_embeddings(tmp("b.milemb"), back);
  std::ifstream a(tmp("a.milemb"), std::ios::binary), b(tmp("b.milemb"), std::ios::binary);
  CHECK(std::string(std::istreambuf_iterator<char>(a), {}) == std::string(std::istreambuf_iterator<char>(b), {}));
}

TEST_CASE("load errors name the row") {
  std::ofstream(tmp("short.csv")) << "MILEMB v1 text enc 4 2\np0,1,2,3,4\np1,1,2,3\n";
  try {
    load_embeddings(tmp("short.csv"));
    FAIL("expected failure");
  } catch (const EmbedError& e) {
    CHECK(e.row() == 2);
  }
  std::ofstream(tmp("dup.csv")) << "MILEMB v1 text enc 1 2\np0,1\np0,2\n";
  CHECK_THROWS_AS(load_embeddings(tmp("dup.csv")), EmbedError);
  std::ofstream(tmp("nan.csv")) << "MILEMB v1 image enc 2 1\np0,1,nan\n";
  CHECK_THROWS_AS(load_embeddings(tmp("nan.csv")), EmbedError);
  std::ofstream(tmp("count.csv")) << "MILEMB v1 image enc 1 3\np0,1\n";
  CHECK_THROWS_AS(load_embeddings(tmp("count.csv")), EmbedError);
  std::ofstream(tmp("header.csv")) << "EMB v2\n";
  CHECK_THROWS_AS(load_embeddings(tmp("header.csv")), EmbedError);

  EmbeddingTable t(Modality::Image, "enc", 2);
  CHECK_THROWS(t.add("a", {1.0f}));
  CHECK_THROWS(t.add("a", {1.0f, INFINITY}));
}

TEST_CASE("mean pooling") {
  CHECK(mean_pool({{1, 2}, {1, 2}, {1, 2}}, 2) == std::vector<double>{1, 2});
  CHECK(mean_pool({{1, 0}, {0, 1}}, 2) == std::vector<double>{0.5, 0.5});
  CHECK(mean_pool({}, 3) == std::vector<double>{0, 0, 0});
  CHECK_THROWS(mean_pool({{1, 0}, {1}}, 2));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  std::vector<std::vector<double>> a(5, std::vector<double>(3)), b = a;
  for (auto& v : a)
    for (auto& x : v) x = n(rng);
  for (auto& v : b)
    for (auto& x : v) x = n(rng);
  std::vector<std::vector<double>> sum = a, rev(a.rbegin(), a.rend());
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) sum[i][j] = 2 * a[i][j] + b[i][j];
  const auto pa = mean_pool(a, 3), pb = mean_pool(b, 3), ps = mean_pool(sum, 3), pr = mean_pool(rev, 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(ps[j] == doctest::Approx(2 * pa[j] + pb[j]));
    CHECK(pr[j] == doctest::Approx(pa[j]));
  }
}

TEST_CASE("posts to matrix") {
  corpus::Corpus c(2);
  c[0].student_id = "a";
  c[0].posts = {{"p0", {}, "", {}, {}}, {"p1", {}, "", {}, {}}};
  c[1].student_id = "b";
  c[1].posts = {{"p2", {}, "", {}, {}}};
  const auto t = sample(3, 2, 4);
  const auto m = posts_to_matrix(c, t, OnMissing::Error);
  CHECK(m.matrix.rows() == 3);
  CHECK(m.bag_of_row == std::vector<std::size_t>{0, 0, 1});
  CHECK(m.matrix.values(2, 1) == doctest::Approx(t.at("p2")[1]));

  c[1].posts.push_back({"q", {}, "", {}, {}});
  c[1].posts.push_back({"r", {}, "", {}, {}});
  CHECK_THROWS(posts_to_matrix(c, t, OnMissing::Error));
  const auto z = posts_to_matrix(c, t, OnMissing::Zero);
  CHECK(z.missing_ids.size() == 2);
  CHECK(z.matrix.values.row(4).isZero());
}
