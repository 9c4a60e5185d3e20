#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "milscreen/corpus.hpp"
#include "milscreen/features.hpp"

namespace milscreen::embed {

enum class Modality { Text, Image };
std::string to_string(Modality m);
Modality parse_modality(const std::string& name);

// Load failure carrying the 1-based data row (0 for header problems).
class EmbedError : public Error {
 public:
  EmbedError(const std::string& what, std::size_t row) : Error(what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

// Precomputed per-post vectors of one encoder. Row order is insertion order.
class EmbeddingTable {
 public:
  EmbeddingTable(Modality modality, std::string encoder, std::size_t dim);

  Modality modality() const { return modality_; }
  const std::string& encoder() const { return encoder_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

  void add(const std::string& post_id, std::vector<float> vec);
  const std::vector<float>* find(const std::string& post_id) const;
  const std::vector<float>& at(const std::string& post_id) const;

  bool operator==(const EmbeddingTable&) const = default;

 private:
  Modality modality_;
  std::string encoder_;
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<std::vector<float>> rows_;
  std::map<std::string, std::size_t> index_;
};

enum class WireFormat { Binary, Csv };

// Header: `MILEMB v1 <modality> <encoder> <d> <count>\n`.
// Binary rows: `<post_id>\n` followed by d little-endian float32.
// CSV rows:    `<post_id>,<v1>,...,<vd>\n` with 9 significant digits.
// Files ending in .csv use the CSV twin; anything else is binary.
WireFormat format_for(const std::filesystem::path& path);
void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);
void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table, WireFormat fmt);
EmbeddingTable load_embeddings(const std::filesystem::path& path);
EmbeddingTable load_embeddings(const std::filesystem::path& path, WireFormat fmt);

// Component-wise mean; an empty list gives the zero vector of length dim.
std::vector<double> mean_pool(const std::vector<std::vector<double>>& vectors, std::size_t dim);

enum class OnMissing { Error, Zero };

struct PostMatrix {
  featex::FeatureMatrix matrix;  // one row per post, corpus order
  std::vector<std::size_t> bag_of_row;
  std::vector<std::string> missing_ids;
};

PostMatrix posts_to_matrix(const corpus::Corpus& corpus, const EmbeddingTable& table,
                           OnMissing on_missing);

}  // namespace milscreen::embed
