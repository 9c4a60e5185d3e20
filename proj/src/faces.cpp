#include "milscreen/faces.hpp"

#include <fstream>

namespace milscreen::featex {

SidecarFaceDetector::SidecarFaceDetector(std::map<std::string, int> counts, std::string source)
    : counts_(std::move(counts)), source_(std::move(source)) {}

SidecarFaceDetector SidecarFaceDetector::load(const std::filesystem::path& csv) {
  std::ifstream in(csv, std::ios::binary);
  if (!in) throw UsageError("cannot open face-count sidecar '" + csv.string() + "'");
  std::map<std::string, int> counts;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      if (line == "post_id,count") continue;
    }
    const auto comma = line.rfind(',');
    const auto where = csv.string() + ":" + std::to_string(lineno);
    if (comma == std::string::npos) throw Error(where + ": expected 'post_id,count'");
    int n = 0;
    try {
      std::size_t used = 0;
      n = std::stoi(line.substr(comma + 1), &used);
      if (used != line.size() - comma - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(where + ": invalid count");
    }
    if (n < 0) throw Error(where + ": negative face count");
    if (!counts.emplace(line.substr(0, comma), n).second)
      throw Error(where + ": duplicate post id");
  }
  return SidecarFaceDetector(std::move(counts), "sidecar:" + csv.filename().string());
}

FaceCount SidecarFaceDetector::count(const corpus::Post& post) const {
  auto it = counts_.find(post.post_id);
  if (it == counts_.end())
    throw Error("face-count sidecar has no entry for post '" + post.post_id + "'");
  return {it->second, source_};
}

FaceCount PostFieldFaceDetector::count(const corpus::Post& post) const {
  if (!post.face_count) throw Error("post '" + post.post_id + "' carries no face_count");
  return {*post.face_count, "field"};
}

void write_face_sidecar(const std::filesystem::path& csv, const corpus::Corpus& corpus) {
  std::ofstream out(csv, std::ios::binary);
  if (!out) throw Error("cannot write face-count sidecar '" + csv.string() + "'");
  out << "post_id,count\n";
  for (const auto& b : corpus)
    for (const auto& p : b.posts)
      if (p.face_count) out << p.post_id << ',' << *p.face_count << '\n';
}

std::unique_ptr<FaceDetector> make_face_detector(const std::string& kind,
                                                 const std::filesystem::path& sidecar) {
  if (kind == "stub") return std::make_unique<StubFaceDetector>();
  if (kind == "field") return std::make_unique<PostFieldFaceDetector>();
  if (kind == "sidecar") return std::make_unique<SidecarFaceDetector>(SidecarFaceDetector::load(sidecar));
  throw UsageError("unknown face detector '" + kind + "' (expected stub|field|sidecar)");
}

}  // namespace milscreen::featex
