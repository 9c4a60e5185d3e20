#include "milscreen/features.hpp"

#include <cmath>
#include <random>

#include "doctest.h"

using namespace milscreen;
using namespace milscreen::featex;

TEST_CASE("user aggregation") {
  const auto one = aggregate_user({{2.0, 5.0}}, 2);
  CHECK(one.values == std::vector<double>{2, 5, 0, 0, 2, 5});

  const auto two = aggregate_user({{1.0}, {3.0}}, 1);
  CHECK(two.values[0] == doctest::Approx(2.0));
  CHECK(two.values[1] == doctest::Approx(std::sqrt(2.0)));
  CHECK(two.values[2] == doctest::Approx(4.0));

  // face counts {1, 1, 4}
  const auto faces = aggregate_user({{1.0}, {1.0}, {4.0}}, 1);
  CHECK(faces.values[0] == doctest::Approx(2.0));
  CHECK(faces.values[1] == doctest::Approx(std::sqrt(3.0)));
  CHECK(faces.values[2] == doctest::Approx(6.0));

  const auto none = aggregate_user({}, 3);
  CHECK(none.no_posts);
  CHECK(none.values == std::vector<double>(9, 0.0));

  CHECK_THROWS_AS(aggregate_user({{1.0}, {1.0, 2.0}}, 1), Error);
}

TEST_CASE("aggregation properties") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng() % 10, d = 1 + rng() % 5;
    std::vector<std::vector<double>> posts(n, std::vector<double>(d));
    for (auto& p : posts)
      for (auto& x : p) x = u(rng);
    const auto a = aggregate_user(posts, d);
    for (std::size_t j = 0; j < d; ++j)
      CHECK(std::abs(a.values[2 * d + j] - a.values[j] * static_cast<double>(n)) <= 1e-9);
  }
  const auto constant = aggregate_user({{3.0, 1.0}, {3.0, 1.0}, {3.0, 1.0}}, 2);
  CHECK(constant.values[2] == 0.0);
  CHECK(constant.values[3] == 0.0);
}

TEST_CASE("visual block has 12 named features") {
  const auto names = aggregate_names({"hue", "saturation", "value", "faces"});
  REQUIRE(names.size() == 12);
  CHECK(names[0] == "hue_mean");
  CHECK(names[5] == "saturation_std");
  CHECK(names[11] == "faces_sum");

  corpus::SynthConfig cfg;
  cfg.bags = 6;
  const auto c = corpus::synth_corpus(cfg, 4);
  const ImageSource solid = [](const corpus::Post& p) -> std::optional<Image> {
    if (!p.image_ref) return std::nullopt;
    return Image{1, 1, {255, 0, 0}};
  };
  const auto m = visual_feature_matrix(c, solid, PostFieldFaceDetector());
  CHECK(m.cols() == 12);
  CHECK(m.rows() == 6);
  m.validate();
}

TEST_CASE("no-posts users get a flag column") {
  corpus::Corpus c(2);
  c[0].student_id = "a";
  c[1].student_id = "b";
  c[1].posts.push_back({"b_0", {}, "amor", {}, {}});
  const Lexicon lex(std::vector<Lexicon::Category>{{"posemo", {"amor*"}}});
  const auto m = text_feature_matrix(c, lex);
  REQUIRE(m.cols() == 4);
  CHECK(m.columns.back() == kNoPostsColumn);
  CHECK(m.values(0, 3) == 1.0);
  CHECK(m.values(1, 3) == 0.0);
  CHECK(m.values(1, 0) == 1.0);
}

TEST_CASE("concatenation") {
  FeatureMatrix t{{"u1", "u2"}, {"x", "y"}, Eigen::MatrixXd{{1, 2}, {3, 4}}};
  FeatureMatrix i{{"u1", "u2"}, {"x"}, Eigen::MatrixXd{{5}, {6}}};
  const auto f = concat_features(t, i);
  CHECK(f.columns == std::vector<std::string>{"text_x", "text_y", "image_x"});
  CHECK(f.values.row(1) == Eigen::RowVector3d(3, 4, 6));

  FeatureMatrix empty{{"u1", "u2"}, {}, Eigen::MatrixXd(2, 0)};
  const auto same = concat_features(t, empty, "", "");
  CHECK(same.columns == t.columns);
  CHECK(same.values == t.values);

  FeatureMatrix other{{"u2", "u1"}, {"x"}, Eigen::MatrixXd{{5}, {6}}};
  CHECK_THROWS_AS(concat_features(t, other), Error);

  // 64 + 12 columns give 76
  FeatureMatrix wide{{"u"}, {}, Eigen::MatrixXd::Zero(1, 64)};
  FeatureMatrix vis{{"u"}, {}, Eigen::MatrixXd::Zero(1, 12)};
  for (int k = 0; k < 64; ++k) wide.columns.push_back("c" + std::to_string(k));
  for (int k = 0; k < 12; ++k) vis.columns.push_back("v" + std::to_string(k));
  CHECK(concat_features(wide, vis).cols() == 76);
}

TEST_CASE("validation and csv round-trip") {
  FeatureMatrix m{{"a", "b"}, {"x", "y"}, Eigen::MatrixXd{{0.1, 1e-300}, {-2.5, 1.0 / 3}}};
  m.validate();
  const auto path = std::filesystem::temp_directory_path() / "milscreen_features.csv";
  write_feature_csv(path, m, "deadbeef");
  const auto back = read_feature_csv(path);
  CHECK(back.row_ids == m.row_ids);
  CHECK(back.columns == m.columns);
  CHECK(back.values == m.values);
  std::filesystem::remove(path);

  FeatureMatrix bad = m;
  bad.values(0, 0) = std::nan("");
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = m;
  bad.columns = {"x", "x"};
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("standardizer") {
  Eigen::MatrixXd x{{1, 5}, {3, 5}, {5, 5}};
  Standardizer s;
  s.fit(x);
  const auto z = s.transform(x);
  CHECK(z(0, 0) == doctest::Approx(-1.0));
  CHECK(z(2, 0) == doctest::Approx(1.0));
  CHECK(z(1, 1) == 0.0);
}
