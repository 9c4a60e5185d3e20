#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "milscreen/cli.hpp"

namespace fs = std::filesystem;
using milscreen::cli::dispatch;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream o, e;
  const int code = dispatch(args, o, e);
  return {code, o.str(), e.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("milscreen_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

const std::string kLexicon = MILSCREEN_DATA_DIR "/demo_lexicon.dic";
const std::string kDemo = MILSCREEN_DATA_DIR "/demo";

}  // namespace

TEST_CASE("full pipeline on a synthesized corpus") {
  const auto d = scratch("pipeline");
  const std::string corpus = (d / "data" / "corpus.jsonl").string();
  auto r = run({"synth", "--bags", "30", "--seed", "3", "--out", corpus});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  for (const char* f : {"corpus.jsonl", "text.milemb", "image.milemb", "faces.csv", "manifest.json"})
    CHECK(fs::exists(d / "data" / f));

  r = run({"stats", "--corpus", corpus, "--window", "212", "--out-dir", (d / "stats").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("severe") != std::string::npos);
  CHECK(fs::exists(d / "stats" / "stats.json"));

  r = run({"split", "--corpus", corpus, "--window", "365", "--n", "3", "--seed", "3", "--max-iterations", "2000",
           "--out-dir", (d / "splits").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(d / "splits" / "suite.json"));
  CHECK(fs::exists(d / "splits" / "partition_00.csv"));

  r = run({"featurize", "--corpus", corpus, "--window", "365", "--lexicon", kLexicon, "--faces",
           (d / "data" / "faces.csv").string(), "--out-dir", (d / "features").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(d / "features" / "manifest.json"));

  r = run({"embed", "check", (d / "data" / "text.milemb").string(), "--corpus", corpus});
  CHECK_MESSAGE(r.code == 0, r.err);

  r = run({"train", "--corpus", corpus, "--window", "365", "--suite", (d / "splits").string(), "--fold", "1",
           "--model-kind", "text-emb", "--embeddings", (d / "data" / "text.milemb").string(), "--epochs", "3",
           "--out-dir", (d / "train").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(d / "train" / "model.ckpt"));
  CHECK(fs::exists(d / "train" / "predictions.csv"));

  r = run({"eval", "--corpus", corpus, "--window", "365", "--suite", (d / "splits").string(), "--model-kind",
           "fusion", "--embeddings", (d / "data" / "text.milemb").string(), "--embeddings",
           (d / "data" / "image.milemb").string(), "--epochs", "3", "--out-dir", (d / "report").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto report = nlohmann::json::parse(slurp(d / "report" / "report.json"));
  CHECK(report["folds"].size() == 3);
  CHECK(fs::exists(d / "report" / "folds.csv"));
  CHECK(fs::exists(d / "report" / "manifest.json"));

  r = run({"eval", "--corpus", corpus, "--window", "365", "--kfold", "3", "--model-kind", "svm", "--lexicon", kLexicon,
           "--faces", (d / "data" / "faces.csv").string(), "--out-dir", (d / "kfold").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);

  r = run({"analyze", "--corpus", corpus, "--window", "365", "--lexicon", kLexicon, "--faces",
           (d / "data" / "faces.csv").string(), "--out-dir", (d / "analysis").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  for (const char* f : {"svm_visual.csv", "svm_text.csv", "svm_concat.csv", "hashtags.csv"})
    CHECK(fs::exists(d / "analysis" / f));
  fs::remove_all(d);
}

TEST_CASE("shipped demo corpus evaluates") {
  REQUIRE(fs::exists(kDemo + "/corpus.jsonl"));
  const auto d = scratch("demo");
  auto r = run({"split", "--corpus", kDemo + "/corpus.jsonl", "--window", "212", "--n", "3", "--seed", "1",
                "--max-iterations", "2000", "--out-dir", (d / "splits").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  r = run({"eval", "--corpus", kDemo + "/corpus.jsonl", "--window", "212", "--suite", (d / "splits").string(),
           "--model-kind", "text-bow", "--epochs", "3", "--out-dir", (d / "report").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(d / "report" / "summary.txt"));
  r = run({"embed", "check", kDemo + "/image.milemb", "--corpus", kDemo + "/corpus.jsonl"});
  CHECK_MESSAGE(r.code == 0, r.err);
  fs::remove_all(d);
}

TEST_CASE("usage errors exit with status 2") {
  const auto d = scratch("usage");
  const std::string missing = (d / "no_such_suite").string();
  const std::string corpus = (d / "corpus.jsonl").string();
  REQUIRE(run({"synth", "--bags", "5", "--seed", "1", "--out", corpus, "--no-assets"}).code == 0);

  auto r = run({"eval", "--corpus", corpus, "--suite", missing, "--model-kind", "text-bow"});
  CHECK(r.code == 2);
  CHECK(r.err.find(missing) != std::string::npos);

  CHECK(run({"eval", "--corpus", corpus, "--bogus-flag"}).code == 2);
  CHECK(run({"no-such-command"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"stats", "--corpus", (d / "absent.jsonl").string()}).code == 2);
  CHECK(run({"eval", "--corpus", corpus, "--kfold", "3", "--model-kind", "nonsense"}).code != 0);
  fs::remove_all(d);
}

TEST_CASE("same seed gives byte-identical reports") {
  const auto d = scratch("repeat");
  const std::string corpus = (d / "corpus.jsonl").string();
  REQUIRE(run({"synth", "--bags", "24", "--seed", "7", "--out", corpus}).code == 0);
  std::vector<std::string> reports;
  for (const char* name : {"r1", "r2"}) {
    const auto out = (d / name).string();
    const auto r = run({"eval", "--corpus", corpus, "--window", "365", "--kfold", "3", "--model-kind", "text-emb",
                        "--embeddings", (d / "text.milemb").string(), "--seed", "7", "--epochs", "4", "--out-dir", out});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    std::string all;
    for (const char* f : {"report.json", "folds.csv", "summary.txt", "predictions_fold_00.csv", "manifest.json"})
      all += slurp(fs::path(out) / f);
    reports.push_back(all);
  }
  CHECK(reports[0] == reports[1]);
  fs::remove_all(d);
}

TEST_CASE("embed check accepts valid files and rejects broken ones") {
  const auto d = scratch("embed");
  const std::string corpus = (d / "corpus.jsonl").string();
  REQUIRE(run({"synth", "--bags", "6", "--seed", "2", "--out", corpus, "--embed-dim", "4"}).code == 0);
  const auto good = d / "text.milemb";
  auto r = run({"embed", "check", good.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("d=4") != std::string::npos);

  std::string bytes = slurp(good);
  {
    std::ofstream f(d / "truncated.milemb", std::ios::binary);
    f << bytes.substr(0, bytes.size() - 3);
  }
  CHECK(run({"embed", "check", (d / "truncated.milemb").string()}).code == 1);
  {
    std::ofstream f(d / "garbage.milemb", std::ios::binary);
    f << "not an embedding file";
  }
  CHECK(run({"embed", "check", (d / "garbage.milemb").string()}).code == 1);
  CHECK(run({"embed", "check", (d / "absent.milemb").string()}).code == 2);

  // A corpus with posts the table lacks.
  const std::string other = (d / "other.jsonl").string();
  REQUIRE(run({"synth", "--bags", "6", "--seed", "99", "--out", other, "--no-assets"}).code == 0);
  CHECK(run({"embed", "check", good.string(), "--corpus", other}).code == 1);
  fs::remove_all(d);
}
