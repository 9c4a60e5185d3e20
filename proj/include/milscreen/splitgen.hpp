#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "milscreen/corpus.hpp"

namespace milscreen::split {

enum class Subset : std::uint8_t { Train = 0, Val = 1, Test = 2 };
inline constexpr std::size_t kSubsets = 3;

std::string to_string(Subset s);
Subset parse_subset(const std::string& name);

// Whether class and size shares are measured in bags or in posts.
enum class Basis { Bags, Posts };
std::string to_string(Basis b);
Basis parse_basis(const std::string& name);

// Assignment of every bag of a corpus (in corpus order) to one subset.
class Partition {
 public:
  Partition() = default;
  Partition(std::vector<std::string> ids, std::vector<Subset> assignment);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<Subset>& assignment() const { return assignment_; }
  Subset at(std::size_t i) const { return assignment_[i]; }
  std::array<std::size_t, kSubsets> counts() const;
  std::vector<std::string> members(Subset s) const;

  // Reorders to the corpus's bag order; throws unless the id sets coincide exactly.
  Partition aligned_to(const corpus::Corpus& corpus) const;

  bool operator==(const Partition&) const = default;

 private:
  std::vector<std::string> ids_;
  std::vector<Subset> assignment_;
};

struct SplitTargets {
  std::array<double, kSubsets> size_props{0.60, 0.20, 0.20};
  std::array<double, 2> class_props{0.4027, 0.5973};  // (negative, positive)
  Basis basis = Basis::Posts;

  // Class proportions taken from the corpus itself on the given basis.
  static SplitTargets from_corpus(const corpus::Corpus& corpus, Basis basis = Basis::Posts);
  void validate() const;
};

struct SearchBudget {
  std::optional<double> wall_clock_seconds = 300.0;  // checked between rounds
  double tolerance = 0.01;                           // per component
  std::optional<std::size_t> max_iterations;
  std::size_t candidates = 10;
};

// Per-bag masses on a basis; shared by objective evaluations.
struct BagMasses {
  std::vector<double> mass;
  std::vector<bool> positive;
  static BagMasses of(const corpus::Corpus& corpus, Basis basis);
};

// The nine per-subset deviations: for each subset (negative-class, positive-class, size).
using Deviations = std::array<double, 3 * kSubsets>;

Deviations deviations(const std::vector<Subset>& assignment, const SplitTargets& targets,
                      const BagMasses& masses);
double objective(const std::vector<Subset>& assignment, const SplitTargets& targets,
                 const BagMasses& masses);
double objective(const Partition& partition, const SplitTargets& targets,
                 const corpus::Corpus& corpus);
bool within_tolerance(const Deviations& d, double tolerance);

// ceil(k/2) fresh random partitions followed by floor(k/2) swap neighbours.
// Random partitions draw each bag's subset from targets.size_props and keep every
// subset non-empty when there are at least three bags.
std::vector<Partition> neighbors(const Partition& parent, const SplitTargets& targets,
                                 std::size_t k, std::mt19937_64& rng);

Partition random_partition(const std::vector<std::string>& ids, const SplitTargets& targets,
                           std::mt19937_64& rng);

struct SearchResult {
  Partition partition;
  double objective = 0.0;
  double initial_objective = 0.0;
  Deviations deviations{};
  bool met_tolerance = false;
  std::size_t iterations = 0;
  std::vector<double> trace;  // incumbent objective after each round, starting with the initial one
};

SearchResult local_search(const corpus::Corpus& corpus, const SplitTargets& targets,
                          const SearchBudget& budget, std::mt19937_64& rng);
SearchResult local_search(const corpus::Corpus& corpus, const SplitTargets& targets,
                          const SearchBudget& budget, std::mt19937_64& rng, Partition initial);

struct SuiteEntry {
  SearchResult result;
  std::uint64_t seed = 0;
  bool budget_stopped() const { return !result.met_tolerance; }
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

std::vector<SuiteEntry> generate_suite(const corpus::Corpus& corpus, std::size_t n,
                                       const SplitTargets& targets, const SearchBudget& budget,
                                       std::uint64_t seed, unsigned workers = 1);

// Number of suite entries whose partition equals an earlier one.
std::size_t count_duplicates(const std::vector<Partition>& partitions);

// --- files ---
void write_partition_csv(const std::filesystem::path& path, const Partition& p,
                         const std::string& manifest_hash = {});
Partition read_partition_csv(const std::filesystem::path& path);

struct SuiteFile {
  std::vector<Partition> partitions;
  std::vector<double> objectives;
  std::vector<std::uint64_t> seeds;
  std::vector<bool> met_tolerance;
};

// Writes partition_XX.csv files plus suite.json into dir.
void write_suite(const std::filesystem::path& dir, const std::vector<SuiteEntry>& suite,
                 const SplitTargets& targets, const SearchBudget& budget,
                 const std::string& manifest_hash = {});
SuiteFile read_suite(const std::filesystem::path& dir);

}  // namespace milscreen::split
