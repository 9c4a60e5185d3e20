#include "milscreen/embedstore.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace milscreen::embed {

std::string to_string(Modality m) { return m == Modality::Text ? "text" : "image"; }

Modality parse_modality(const std::string& name) {
  if (name == "text") return Modality::Text;
  if (name == "image") return Modality::Image;
  throw Error("unknown modality '" + name + "'");
}

EmbeddingTable::EmbeddingTable(Modality modality, std::string encoder, std::size_t dim)
    : modality_(modality), encoder_(std::move(encoder)), dim_(dim) {
  if (dim_ == 0) throw Error("embedding dimension must be positive");
  if (encoder_.empty() || encoder_.find_first_of(" \t\n") != std::string::npos)
    throw Error("encoder name must be a non-empty token");
}

void EmbeddingTable::add(const std::string& post_id, std::vector<float> vec) {
  const std::size_t row = ids_.size() + 1;
  if (post_id.empty() || post_id.find_first_of(",\n\r") != std::string::npos)
    throw EmbedError("row " + std::to_string(row) + ": invalid post id '" + post_id + "'", row);
  if (vec.size() != dim_)
    throw EmbedError("row " + std::to_string(row) + " (" + post_id + "): expected " +
                         std::to_string(dim_) + " values, got " + std::to_string(vec.size()),
                     row);
  for (float v : vec)
    if (!std::isfinite(v))
      throw EmbedError("row " + std::to_string(row) + " (" + post_id + "): non-finite value", row);
  if (!index_.emplace(post_id, ids_.size()).second)
    throw EmbedError("row " + std::to_string(row) + ": duplicate post id '" + post_id + "'", row);
  ids_.push_back(post_id);
  rows_.push_back(std::move(vec));
}

const std::vector<float>* EmbeddingTable::find(const std::string& post_id) const {
  auto it = index_.find(post_id);
  return it == index_.end() ? nullptr : &rows_[it->second];
}

const std::vector<float>& EmbeddingTable::at(const std::string& post_id) const {
  const auto* v = find(post_id);
  if (!v) throw Error("no embedding for post '" + post_id + "'");
  return *v;
}

WireFormat format_for(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? WireFormat::Csv : WireFormat::Binary;
}

namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

void put_le32(std::ostream& out, float f) {
  auto u = std::bit_cast<std::uint32_t>(f);
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xFF);
  out.write(b, 4);
}

float get_le32(const unsigned char* b) {
  std::uint32_t u = 0;
  for (int i = 0; i < 4; ++i) u |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return std::bit_cast<float>(u);
}

}  // namespace

void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& t) {
  save_embeddings(path, t, format_for(path));
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& t, WireFormat fmt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write embedding file '" + path.string() + "'");
  out << "MILEMB v1 " << to_string(t.modality()) << ' ' << t.encoder() << ' ' << t.dim() << ' '
      << t.size() << '\n';
  char buf[32];
  for (const auto& id : t.ids()) {
    const auto& v = t.at(id);
    if (fmt == WireFormat::Binary) {
      out << id << '\n';
      for (float f : v) put_le32(out, f);
    } else {
      out << id;
      for (float f : v) {
        std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(f));
        out << ',' << buf;
      }
      out << '\n';
    }
  }
  if (!out) throw Error("write failed for embedding file '" + path.string() + "'");
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  return load_embeddings(path, format_for(path));
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, WireFormat fmt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EmbedError("cannot open embedding file '" + path.string() + "'", 0);
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic, version, modality, encoder;
  long long dim = -1, count = -1;
  hs >> magic >> version >> modality >> encoder >> dim >> count;
  std::string extra;
  if (magic != "MILEMB" || version != "v1" || dim <= 0 || count < 0 || (hs >> extra))
    throw EmbedError(path.string() + ": malformed header '" + header + "'", 0);
  Modality mod;
  try {
    mod = parse_modality(modality);
  } catch (const Error&) {
    throw EmbedError(path.string() + ": unknown modality '" + modality + "'", 0);
  }
  EmbeddingTable t(mod, encoder, static_cast<std::size_t>(dim));
  const auto d = static_cast<std::size_t>(dim);
  std::vector<unsigned char> raw(4 * d);
  for (long long r = 1; r <= count; ++r) {
    const auto row = static_cast<std::size_t>(r);
    auto fail = [&](const std::string& msg) {
      throw EmbedError(path.string() + ": row " + std::to_string(row) + ": " + msg, row);
    };
    std::string line;
    if (!std::getline(in, line)) fail("unexpected end of file");
    std::vector<float> v;
    std::string id;
    if (fmt == WireFormat::Binary) {
      id = line;
      if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
        fail("truncated vector");
      v.reserve(d);
      for (std::size_t k = 0; k < d; ++k) v.push_back(get_le32(raw.data() + 4 * k));
    } else {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::stringstream ss(line);
      std::getline(ss, id, ',');
      std::string cell;
      while (std::getline(ss, cell, ',')) {
        char* end = nullptr;
        const float f = std::strtof(cell.c_str(), &end);
        if (cell.empty() || *end != '\0') fail("unparsable value '" + cell + "'");
        v.push_back(f);
      }
    }
    try {
      t.add(id, std::move(v));
    } catch (const EmbedError& e) {
      throw EmbedError(path.string() + ": " + e.what(), row);
    }
  }
  std::string trailing;
  if (fmt == WireFormat::Csv) {
    while (std::getline(in, trailing))
      if (!trailing.empty() && trailing != "\r")
        throw EmbedError(path.string() + ": more rows than the header count", static_cast<std::size_t>(count) + 1);
  } else if (in.peek() != std::char_traits<char>::eof()) {
    throw EmbedError(path.string() + ": trailing bytes after the declared rows", static_cast<std::size_t>(count) + 1);
  }
  return t;
}

std::vector<double> mean_pool(const std::vector<std::vector<double>>& vectors, std::size_t dim) {
  std::vector<double> out(dim, 0.0);
  if (vectors.empty()) return out;
  for (const auto& v : vectors) {
    if (v.size() != dim) throw Error("mean_pool: mixed vector dimensions");
    for (std::size_t i = 0; i < dim; ++i) out[i] += v[i];
  }
  for (double& x : out) x /= static_cast<double>(vectors.size());
  return out;
}

PostMatrix posts_to_matrix(const corpus::Corpus& corpus, const EmbeddingTable& table,
                           OnMissing on_missing) {
  PostMatrix pm;
  const std::size_t n = corpus::total_posts(corpus);
  pm.matrix.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(table.dim()));
  for (std::size_t c = 0; c < table.dim(); ++c)
    pm.matrix.columns.push_back(to_string(table.modality()) + "_" + table.encoder() + "_" + std::to_string(c));
  std::size_t r = 0;
  for (std::size_t b = 0; b < corpus.size(); ++b) {
    for (const auto& p : corpus[b].posts) {
      pm.matrix.row_ids.push_back(p.post_id);
      pm.bag_of_row.push_back(b);
      if (const auto* v = table.find(p.post_id)) {
        for (std::size_t c = 0; c < v->size(); ++c)
          pm.matrix.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = (*v)[c];
      } else {
        pm.missing_ids.push_back(p.post_id);
      }
      ++r;
    }
  }
  if (on_missing == OnMissing::Error && !pm.missing_ids.empty()) {
    std::string list;
    for (std::size_t i = 0; i < pm.missing_ids.size() && i < 10; ++i)
      list += (i ? ", " : "") + pm.missing_ids[i];
    if (pm.missing_ids.size() > 10) list += ", ...";
    throw Error("embedding table '" + table.encoder() + "' lacks " +
                std::to_string(pm.missing_ids.size()) + " post ids: " + list);
  }
  return pm;
}

}  // namespace milscreen::embed
