#include "milscreen/manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <memory>

#include "milscreen/error.hpp"

namespace milscreen::manifest {

namespace {

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw Error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_all(path)); }

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs.emplace_back(path.filename().string(), sha256_file(path));
}

void RunManifest::add_input_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string joined;
  for (const auto& f : files)
    joined += std::filesystem::relative(f, dir).generic_string() + ' ' + sha256_file(f) + '\n';
  inputs.emplace_back(dir.filename().string() + "/", sha256_hex(joined));
}

void RunManifest::add_artifact(const std::filesystem::path& root, const std::filesystem::path& file) {
  artifacts.emplace_back(std::filesystem::relative(file, root).generic_string(), sha256_file(file));
}

std::string RunManifest::hash() const {
  nlohmann::json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = command;
  j["config"] = config;
  j["inputs"] = inputs;
  j["seeds"] = seeds;
  return sha256_hex(j.dump());
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = command;
  j["hash"] = hash();
  j["config"] = config;
  j["seeds"] = seeds;
  j["inputs"] = nlohmann::json::array();
  for (const auto& [p, d] : inputs) j["inputs"].push_back({{"path", p}, {"sha256", d}});
  j["artifacts"] = nlohmann::json::array();
  for (const auto& [p, d] : artifacts) j["artifacts"].push_back({{"path", p}, {"sha256", d}});
  return j;
}

void RunManifest::write(const std::filesystem::path& dir) const {
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw Error("cannot write manifest in '" + dir.string() + "'");
  out << to_json().dump(2) << '\n';
}

}  // namespace milscreen::manifest
