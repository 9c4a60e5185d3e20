#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace milscreen::manifest {

inline constexpr const char* kToolName = "mil-screen";
inline constexpr const char* kToolVersion = "0.1.0";

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Provenance of one CLI run. The hash covers everything that determines the
// outputs (command, config, input digests, seeds) and nothing time-dependent.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
  std::map<std::string, std::uint64_t> seeds;
  std::vector<std::pair<std::string, std::string>> artifacts;  // relative path, sha256

  void add_input(const std::filesystem::path& path);
  // Digests every regular file under dir (recursively) as one input.
  void add_input_dir(const std::filesystem::path& dir);
  void add_artifact(const std::filesystem::path& root, const std::filesystem::path& file);

  std::string hash() const;
  nlohmann::json to_json() const;
  // Writes manifest.json into dir.
  void write(const std::filesystem::path& dir) const;
};

}  // namespace milscreen::manifest
