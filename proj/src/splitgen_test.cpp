#include "milscreen/splitgen.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"

using namespace milscreen;
using namespace milscreen::split;

namespace {

corpus::Corpus toy(const std::vector<std::pair<int, int>>& bdi_posts) {
  corpus::Corpus c;
  for (const auto& [bdi, n] : bdi_posts) {
    corpus::StudentBag b;
    b.student_id = "b" + std::to_string(c.size());
    b.bdi = corpus::BdiScore(bdi);
    for (int i = 0; i < n; ++i) b.posts.push_back({b.student_id + "_" + std::to_string(i), {}, "", {}, {}});
    c.push_back(b);
  }
  return c;
}

std::vector<std::string> ids_of(const corpus::Corpus& c) {
  std::vector<std::string> ids;
  for (const auto& b : c) ids.push_back(b.student_id);
  return ids;
}

// Exhaustive minimum over all assignments with non-empty subsets.
double brute_force(const corpus::Corpus& c, const SplitTargets& t) {
  const auto m = BagMasses::of(c, t.basis);
  std::size_t total = 1;
  for (std::size_t i = 0; i < c.size(); ++i) total *= 3;
  double best = INFINITY;
  std::vector<Subset> a(c.size());
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t x = code;
    std::array<int, 3> seen{};
    for (auto& s : a) {
      s = static_cast<Subset>(x % 3);
      ++seen[x % 3];
      x /= 3;
    }
    if (!seen[0] || !seen[1] || !seen[2]) continue;
    best = std::min(best, objective(a, t, m));
  }
  return best;
}

}  // namespace

TEST_CASE("objective is zero on an exact match") {
  // 10 single-post bags, half positive; 6/2/2 with one of each class in val and test.
  const auto c = toy({{5, 1}, {5, 1}, {5, 1}, {30, 1}, {30, 1}, {30, 1}, {5, 1}, {30, 1}, {5, 1}, {30, 1}});
  SplitTargets t;
  t.class_props = {0.5, 0.5};
  using S = Subset;
  const Partition p(ids_of(c), {S::Train, S::Train, S::Train, S::Train, S::Train, S::Train, S::Val, S::Val, S::Test, S::Test});
  CHECK(objective(p, t, c) == doctest::Approx(0.0));
  t.basis = Basis::Bags;
  CHECK(objective(p, t, c) == doctest::Approx(0.0));
}

TEST_CASE("all bags in train: hand-computed objective") {
  // 5 bags: 2 negative, 3 positive, one post each.
  const auto c = toy({{5, 1}, {10, 1}, {25, 1}, {30, 1}, {40, 1}});
  SplitTargets t;
  t.class_props = {0.4, 0.6};
  const Partition p(ids_of(c), std::vector<Subset>(5, Subset::Train));
  // train: class (0.4,0.6) matches, size 1.0 vs 0.6 -> 0.4
  // val, test empty: class vector (0,0) -> 0.4 + 0.6 = 1, size 0.2 each
  CHECK(objective(p, t, c) == doctest::Approx(0.4 + 2 * (1.0 + 0.2)));
  const auto d = deviations(p.assignment(), t, BagMasses::of(c, t.basis));
  CHECK(d[2] == doctest::Approx(0.4));
  CHECK(d[3] == doctest::Approx(0.4));
  CHECK(d[4] == doctest::Approx(0.6));
}

TEST_CASE("swapping equivalent bags leaves the objective unchanged") {
  const auto c = toy({{5, 2}, {5, 2}, {30, 3}, {31, 1}, {12, 2}, {40, 4}});
  const auto t = SplitTargets::from_corpus(c);
  using S = Subset;
  const Partition a(ids_of(c), {S::Train, S::Val, S::Test, S::Train, S::Train, S::Val});
  const Partition b(ids_of(c), {S::Val, S::Train, S::Test, S::Train, S::Train, S::Val});
  CHECK(objective(a, t, c) == doctest::Approx(objective(b, t, c)));
}

TEST_CASE("targets validation and corpus class shares") {
  SplitTargets t;
  t.size_props = {0.5, 0.2, 0.2};
  CHECK_THROWS(t.validate());
  const auto c = toy({{5, 1}, {30, 3}});
  const auto posts = SplitTargets::from_corpus(c, Basis::Posts);
  CHECK(posts.class_props[1] == doctest::Approx(0.75));
  const auto bags = SplitTargets::from_corpus(c, Basis::Bags);
  CHECK(bags.class_props[1] == doctest::Approx(0.5));
}

TEST_CASE("neighbour generation") {
  const auto c = toy({{5, 1}, {5, 2}, {30, 1}, {30, 2}, {25, 3}, {10, 1}, {45, 2}, {3, 1}});
  const auto t = SplitTargets::from_corpus(c);
  std::mt19937_64 rng(1);
  const auto parent = random_partition(ids_of(c), t, rng);
  const auto n = neighbors(parent, t, 10, rng);
  REQUIRE(n.size() == 10);
  for (std::size_t i = 5; i < 10; ++i) {
    std::size_t diff = 0;
    for (std::size_t j = 0; j < parent.size(); ++j) diff += n[i].at(j) != parent.at(j);
    CHECK(diff == 2);
    CHECK(n[i].counts() == parent.counts());
  }
  for (const auto& p : n) {
    const auto k = p.counts();
    CHECK(k[0] > 0);
    CHECK(k[1] > 0);
    CHECK(k[2] > 0);
  }
  CHECK(neighbors(parent, t, 7, rng).size() == 7);
  CHECK_THROWS(neighbors(parent, t, 1, rng));

  std::mt19937_64 r1(42), r2(42);
  CHECK(neighbors(parent, t, 10, r1) == neighbors(parent, t, 10, r2));
}

TEST_CASE("local search matches exhaustive optimum on small corpora") {
  std::mt19937_64 gen(2024);
  int hits = 0;
  const int runs = 100;
  for (int r = 0; r < runs; ++r) {
    const std::size_t n = 3 + gen() % 6;
    std::vector<std::pair<int, int>> spec;
    for (std::size_t i = 0; i < n; ++i) spec.push_back({static_cast<int>(gen() % 64), 1 + static_cast<int>(gen() % 5)});
    const auto c = toy(spec);
    const auto t = SplitTargets::from_corpus(c);
    SearchBudget b;
    b.wall_clock_seconds.reset();
    b.max_iterations = 3000;
    b.tolerance = 0.0;
    std::mt19937_64 rng(static_cast<std::uint64_t>(r));
    const auto res = local_search(c, t, b, rng);
    hits += std::abs(res.objective - brute_force(c, t)) < 1e-12;
  }
  CHECK(hits >= 95);
}

TEST_CASE("search trace never increases and result beats the start") {
  const auto c = toy({{5, 3}, {5, 2}, {30, 1}, {30, 6}, {25, 3}, {10, 1}, {45, 2}, {3, 1}, {22, 2}, {14, 4}, {50, 1}});
  const auto t = SplitTargets::from_corpus(c);
  SearchBudget b;
  b.wall_clock_seconds.reset();
  b.max_iterations = 200;
  std::mt19937_64 rng(3);
  const auto res = local_search(c, t, b, rng);
  CHECK(std::is_sorted(res.trace.rbegin(), res.trace.rend()));
  CHECK(res.objective <= res.initial_objective);
  CHECK(res.objective == doctest::Approx(objective(res.partition, t, c)));
}

TEST_CASE("zero budget and optimal start") {
  const auto c = toy({{5, 1}, {10, 1}, {30, 1}, {30, 1}, {40, 1}});
  const auto t = SplitTargets::from_corpus(c);
  SearchBudget b;
  b.wall_clock_seconds.reset();
  b.max_iterations = 0;
  std::mt19937_64 rng(5);
  using S = Subset;
  const Partition start(ids_of(c), {S::Train, S::Val, S::Test, S::Train, S::Train});
  const auto res = local_search(c, t, b, rng, start);
  CHECK(res.partition == start);
  CHECK(res.iterations == 0);

  // A start within tolerance is returned as is even with budget left.
  SearchBudget loose;
  loose.wall_clock_seconds.reset();
  loose.max_iterations = 100;
  loose.tolerance = 10.0;
  const auto kept = local_search(c, t, loose, rng, start);
  CHECK(kept.partition == start);
  CHECK(kept.met_tolerance);

  const auto tiny = toy({{5, 1}, {30, 1}});
  CHECK_THROWS(local_search(tiny, SplitTargets::from_corpus(tiny), b, rng));
}

TEST_CASE("search is deterministic for a seed") {
  corpus::SynthConfig cfg;
  cfg.bags = 40;
  const auto c = corpus::synth_corpus(cfg, 1);
  const auto t = SplitTargets::from_corpus(c);
  SearchBudget b;
  b.wall_clock_seconds.reset();
  b.max_iterations = 300;
  std::mt19937_64 r1(9), r2(9);
  CHECK(local_search(c, t, b, r1).partition == local_search(c, t, b, r2).partition);
}

TEST_CASE("suite of 10 on 200 bags meets tolerance") {
  corpus::SynthConfig cfg;
  cfg.bags = 200;
  const auto c = corpus::synth_corpus(cfg, 17);
  const auto t = SplitTargets::from_corpus(c);
  SearchBudget b;
  b.wall_clock_seconds.reset();
  b.max_iterations = 20000;
  const auto suite = generate_suite(c, 10, t, b, 99, 2);
  REQUIRE(suite.size() == 10);
  std::set<std::uint64_t> seeds;
  std::vector<Partition> parts;
  for (const auto& e : suite) {
    seeds.insert(e.seed);
    parts.push_back(e.result.partition);
    CHECK(e.result.met_tolerance);
    CHECK_FALSE(e.budget_stopped());
    CHECK(e.result.objective <= 9 * b.tolerance + 1e-12);
    // total and disjoint
    const auto aligned = e.result.partition.aligned_to(c);
    std::size_t covered = 0;
    for (auto s : {Subset::Train, Subset::Val, Subset::Test}) covered += aligned.members(s).size();
    CHECK(covered == c.size());
  }
  CHECK(seeds.size() == 10);
  CHECK(count_duplicates(parts) == 0);

  const auto again = generate_suite(c, 10, t, b, 99, 1);
  for (std::size_t i = 0; i < 10; ++i) CHECK(again[i].result.partition == suite[i].result.partition);
}

TEST_CASE("partition files round-trip") {
  const auto c = toy({{5, 1}, {10, 1}, {30, 1}, {30, 1}, {40, 1}});
  const auto t = SplitTargets::from_corpus(c);
  SearchBudget b;
  b.wall_clock_seconds.reset();
  b.max_iterations = 50;
  const auto suite = generate_suite(c, 3, t, b, 1);
  const auto dir = std::filesystem::temp_directory_path() / "milscreen_split_test";
  std::filesystem::remove_all(dir);
  write_suite(dir, suite, t, b, "abc");
  const auto back = read_suite(dir);
  REQUIRE(back.partitions.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.partitions[i] == suite[i].result.partition);
    CHECK(back.seeds[i] == suite[i].seed);
  }
  CHECK_THROWS_AS(read_suite(dir / "missing"), UsageError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("partition construction checks") {
  CHECK_THROWS(Partition({"a", "a"}, {Subset::Train, Subset::Val}));
  CHECK_THROWS(Partition({"a"}, {Subset::Train, Subset::Val}));
  const auto c = toy({{5, 1}, {10, 1}, {30, 1}});
  const Partition p({"b2", "b0", "b1"}, {Subset::Test, Subset::Train, Subset::Val});
  const auto a = p.aligned_to(c);
  CHECK(a.ids() == std::vector<std::string>{"b0", "b1", "b2"});
  CHECK(a.at(2) == Subset::Test);
  CHECK_THROWS(Partition({"b0", "x", "b1"}, {Subset::Test, Subset::Train, Subset::Val}).aligned_to(c));
  CHECK(parse_subset(to_string(Subset::Val)) == Subset::Val);
}
