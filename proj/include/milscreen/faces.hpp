#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "milscreen/corpus.hpp"

namespace milscreen::featex {

struct FaceCount {
  int count = 0;
  std::string provenance;
};

// Pluggable face counter. Implementations must be safe for concurrent calls.
class FaceDetector {
 public:
  virtual ~FaceDetector() = default;
  virtual FaceCount count(const corpus::Post& post) const = 0;
  virtual std::string name() const = 0;
};

// Always reports zero faces.
class StubFaceDetector final : public FaceDetector {
 public:
  FaceCount count(const corpus::Post&) const override { return {0, "stub"}; }
  std::string name() const override { return "stub"; }
};

// Precomputed counts from a `post_id,count` CSV. Missing ids are an error.
class SidecarFaceDetector final : public FaceDetector {
 public:
  explicit SidecarFaceDetector(std::map<std::string, int> counts, std::string source = "sidecar");
  static SidecarFaceDetector load(const std::filesystem::path& csv);

  FaceCount count(const corpus::Post& post) const override;
  std::string name() const override { return "sidecar"; }
  std::size_t size() const { return counts_.size(); }

 private:
  std::map<std::string, int> counts_;
  std::string source_;
};

// Uses the face_count stored on each post; posts without one are an error.
class PostFieldFaceDetector final : public FaceDetector {
 public:
  FaceCount count(const corpus::Post& post) const override;
  std::string name() const override { return "field"; }
};

void write_face_sidecar(const std::filesystem::path& csv, const corpus::Corpus& corpus);

std::unique_ptr<FaceDetector> make_face_detector(const std::string& kind,
                                                 const std::filesystem::path& sidecar = {});

}  // namespace milscreen::featex
