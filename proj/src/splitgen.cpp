#include "milscreen/splitgen.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace milscreen::split {

using corpus::Corpus;

std::string to_string(Subset s) {
  switch (s) {
    case Subset::Train: return "train";
    case Subset::Val: return "val";
    case Subset::Test: return "test";
  }
  return "?";
}

Subset parse_subset(const std::string& name) {
  if (name == "train") return Subset::Train;
  if (name == "val" || name == "validation") return Subset::Val;
  if (name == "test") return Subset::Test;
  throw Error("unknown subset '" + name + "'");
}

std::string to_string(Basis b) { return b == Basis::Bags ? "bags" : "posts"; }

Basis parse_basis(const std::string& name) {
  if (name == "bags") return Basis::Bags;
  if (name == "posts") return Basis::Posts;
  throw UsageError("unknown split basis '" + name + "' (expected bags|posts)");
}

Partition::Partition(std::vector<std::string> ids, std::vector<Subset> assignment)
    : ids_(std::move(ids)), assignment_(std::move(assignment)) {
  if (ids_.size() != assignment_.size()) throw Error("partition: id/assignment length mismatch");
  std::set<std::string> seen;
  for (const auto& id : ids_) {
    if (!seen.insert(id).second) throw Error("partition: bag '" + id + "' assigned twice");
  }
}

std::array<std::size_t, kSubsets> Partition::counts() const {
  std::array<std::size_t, kSubsets> c{};
  for (auto s : assignment_) ++c[static_cast<std::size_t>(s)];
  return c;
}

std::vector<std::string> Partition::members(Subset s) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (assignment_[i] == s) out.push_back(ids_[i]);
  return out;
}

Partition Partition::aligned_to(const Corpus& corpus) const {
  std::map<std::string, Subset> by_id;
  for (std::size_t i = 0; i < ids_.size(); ++i) by_id.emplace(ids_[i], assignment_[i]);
  std::vector<std::string> ids;
  std::vector<Subset> assign;
  for (const auto& b : corpus) {
    auto it = by_id.find(b.student_id);
    if (it == by_id.end()) throw Error("partition does not assign bag '" + b.student_id + "'");
    ids.push_back(b.student_id);
    assign.push_back(it->second);
    by_id.erase(it);
  }
  if (!by_id.empty()) throw Error("partition assigns unknown bag '" + by_id.begin()->first + "'");
  return Partition(std::move(ids), std::move(assign));
}

BagMasses BagMasses::of(const Corpus& corpus, Basis basis) {
  BagMasses m;
  for (const auto& b : corpus) {
    m.mass.push_back(basis == Basis::Bags ? 1.0 : static_cast<double>(b.posts.size()));
    m.positive.push_back(corpus::binary_label(b.bdi) == corpus::BinaryLabel::Positive);
  }
  return m;
}

SplitTargets SplitTargets::from_corpus(const Corpus& corpus, Basis basis) {
  const auto m = BagMasses::of(corpus, basis);
  double total = 0.0, pos = 0.0;
  for (std::size_t i = 0; i < m.mass.size(); ++i) {
    total += m.mass[i];
    if (m.positive[i]) pos += m.mass[i];
  }
  if (total <= 0.0) throw Error("split targets: corpus has no mass on basis " + to_string(basis));
  SplitTargets t;
  t.basis = basis;
  t.class_props = {1.0 - pos / total, pos / total};
  return t;
}

void SplitTargets::validate() const {
  const double s = size_props[0] + size_props[1] + size_props[2];
  const double c = class_props[0] + class_props[1];
  if (std::abs(s - 1.0) > 1e-9) throw Error("split size proportions must sum to 1");
  if (std::abs(c - 1.0) > 1e-9) throw Error("split class proportions must sum to 1");
  for (double v : size_props)
    if (v < 0.0) throw Error("negative size proportion");
  for (double v : class_props)
    if (v < 0.0) throw Error("negative class proportion");
}

Deviations deviations(const std::vector<Subset>& assignment, const SplitTargets& t,
                      const BagMasses& masses) {
  std::array<double, kSubsets> mass{}, pos{};
  double total = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const auto s = static_cast<std::size_t>(assignment[i]);
    mass[s] += masses.mass[i];
    if (masses.positive[i]) pos[s] += masses.mass[i];
    total += masses.mass[i];
  }
  if (total <= 0.0) throw Error("split objective: corpus has zero total mass");
  Deviations d{};
  for (std::size_t s = 0; s < kSubsets; ++s) {
    // An empty subset has a zero class vector, so it contributes the full target mass.
    const double pos_share = mass[s] > 0.0 ? pos[s] / mass[s] : 0.0;
    const double neg_share = mass[s] > 0.0 ? 1.0 - pos_share : 0.0;
    d[3 * s + 0] = std::abs(neg_share - t.class_props[0]);
    d[3 * s + 1] = std::abs(pos_share - t.class_props[1]);
    d[3 * s + 2] = std::abs(mass[s] / total - t.size_props[s]);
  }
  return d;
}

double objective(const std::vector<Subset>& assignment, const SplitTargets& t,
                 const BagMasses& masses) {
  const auto d = deviations(assignment, t, masses);
  double sum = 0.0;
  for (double v : d) sum += v;
  return sum;
}

double objective(const Partition& p, const SplitTargets& t, const Corpus& corpus) {
  if (p.size() != corpus.size()) throw Error("split objective: partition is not total over the corpus");
  const Partition aligned = p.aligned_to(corpus);
  return objective(aligned.assignment(), t, BagMasses::of(corpus, t.basis));
}

bool within_tolerance(const Deviations& d, double tolerance) {
  return std::all_of(d.begin(), d.end(), [&](double v) { return v <= tolerance; });
}

namespace {

std::vector<Subset> random_assignment(std::size_t n, const SplitTargets& t, std::mt19937_64& rng) {
  std::discrete_distribution<int> pick({t.size_props[0], t.size_props[1], t.size_props[2]});
  std::vector<Subset> a(n);
  for (;;) {
    std::array<std::size_t, kSubsets> c{};
    for (auto& s : a) {
      s = static_cast<Subset>(pick(rng));
      ++c[static_cast<std::size_t>(s)];
    }
    if (n < kSubsets || (c[0] && c[1] && c[2])) return a;
  }
}

// Exchanges the subsets of two bags lying in distinct subsets; false if impossible.
bool swap_neighbor(std::vector<Subset>& a, std::mt19937_64& rng) {
  if (a.size() < 2) return false;
  std::uniform_int_distribution<std::size_t> any(0, a.size() - 1);
  const std::size_t i = any(rng);
  std::vector<std::size_t> others;
  for (std::size_t j = 0; j < a.size(); ++j)
    if (a[j] != a[i]) others.push_back(j);
  if (others.empty()) return false;
  const std::size_t j = others[std::uniform_int_distribution<std::size_t>(0, others.size() - 1)(rng)];
  std::swap(a[i], a[j]);
  return true;
}

std::vector<std::vector<Subset>> candidate_assignments(const std::vector<Subset>& parent,
                                                       const SplitTargets& t, std::size_t k,
                                                       std::mt19937_64& rng) {
  if (k < 2) throw Error("neighbors: candidate count must be at least 2");
  std::vector<std::vector<Subset>> out;
  const std::size_t n_random = (k + 1) / 2;
  for (std::size_t i = 0; i < n_random; ++i) out.push_back(random_assignment(parent.size(), t, rng));
  for (std::size_t i = n_random; i < k; ++i) {
    auto a = parent;
    if (!swap_neighbor(a, rng)) a = random_assignment(parent.size(), t, rng);
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace

Partition random_partition(const std::vector<std::string>& ids, const SplitTargets& t,
                           std::mt19937_64& rng) {
  return Partition(ids, random_assignment(ids.size(), t, rng));
}

std::vector<Partition> neighbors(const Partition& parent, const SplitTargets& t, std::size_t k,
                                 std::mt19937_64& rng) {
  std::vector<Partition> out;
  for (auto& a : candidate_assignments(parent.assignment(), t, k, rng))
    out.emplace_back(parent.ids(), std::move(a));
  return out;
}

SearchResult local_search(const Corpus& corpus, const SplitTargets& targets,
                          const SearchBudget& budget, std::mt19937_64& rng) {
  if (corpus.size() < kSubsets) throw Error("local_search: corpus needs at least 3 bags");
  std::vector<std::string> ids;
  for (const auto& b : corpus) ids.push_back(b.student_id);
  targets.validate();
  auto initial = random_partition(ids, targets, rng);
  return local_search(corpus, targets, budget, rng, std::move(initial));
}

SearchResult local_search(const Corpus& corpus, const SplitTargets& targets,
                          const SearchBudget& budget, std::mt19937_64& rng, Partition initial) {
  if (corpus.size() < kSubsets) throw Error("local_search: corpus needs at least 3 bags");
  targets.validate();
  if (budget.tolerance < 0.0) throw Error("local_search: negative tolerance");
  const auto start = std::chrono::steady_clock::now();
  const auto masses = BagMasses::of(corpus, targets.basis);
  const Partition aligned = initial.aligned_to(corpus);

  std::vector<Subset> best = aligned.assignment();
  Deviations best_dev = deviations(best, targets, masses);
  double best_obj = objective(best, targets, masses);

  SearchResult r;
  r.initial_objective = best_obj;
  r.trace.push_back(best_obj);
  for (;;) {
    if (within_tolerance(best_dev, budget.tolerance)) {
      r.met_tolerance = true;
      break;
    }
    if (budget.max_iterations && r.iterations >= *budget.max_iterations) break;
    if (budget.wall_clock_seconds) {
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      if (elapsed.count() >= *budget.wall_clock_seconds) break;
    }
    ++r.iterations;
    auto cands = candidate_assignments(best, targets, budget.candidates, rng);
    std::size_t pick = cands.size();
    double pick_obj = best_obj;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      const double o = objective(cands[c], targets, masses);
      if (o < pick_obj) {
        pick_obj = o;
        pick = c;
      }
    }
    if (pick < cands.size()) {
      best = std::move(cands[pick]);
      best_obj = pick_obj;
      best_dev = deviations(best, targets, masses);
    }
    r.trace.push_back(best_obj);
  }
  r.partition = Partition(aligned.ids(), std::move(best));
  r.objective = best_obj;
  r.deviations = best_dev;
  return r;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over (seed, index)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<SuiteEntry> generate_suite(const Corpus& corpus, std::size_t n,
                                       const SplitTargets& targets, const SearchBudget& budget,
                                       std::uint64_t seed, unsigned workers) {
  if (n < 1) throw Error("generate_suite: n must be at least 1");
  std::vector<SuiteEntry> out(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        out[i].seed = derive_seed(seed, i);
        std::mt19937_64 rng(out[i].seed);
        out[i].result = local_search(corpus, targets, budget, rng);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::size_t count_duplicates(const std::vector<Partition>& partitions) {
  std::size_t dups = 0;
  for (std::size_t i = 0; i < partitions.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (partitions[i] == partitions[j]) {
        ++dups;
        break;
      }
  return dups;
}

void write_partition_csv(const std::filesystem::path& path, const Partition& p,
                         const std::string& manifest_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write partition file '" + path.string() + "'");
  if (!manifest_hash.empty()) out << "# manifest " << manifest_hash << '\n';
  out << "bag_id,subset\n";
  for (std::size_t i = 0; i < p.size(); ++i) out << p.ids()[i] << ',' << to_string(p.at(i)) << '\n';
}

Partition read_partition_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open partition file '" + path.string() + "'");
  std::string line;
  std::vector<std::string> ids;
  std::vector<Subset> assign;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "bag_id,subset") throw Error(path.string() + ": expected header 'bag_id,subset'");
      header = true;
      continue;
    }
    const auto comma = line.rfind(',');
    if (comma == std::string::npos)
      throw Error(path.string() + ":" + std::to_string(lineno) + ": malformed row");
    ids.push_back(line.substr(0, comma));
    assign.push_back(parse_subset(line.substr(comma + 1)));
  }
  if (!header) throw Error(path.string() + ": missing header");
  return Partition(std::move(ids), std::move(assign));
}

void write_suite(const std::filesystem::path& dir, const std::vector<SuiteEntry>& suite,
                 const SplitTargets& targets, const SearchBudget& budget,
                 const std::string& manifest_hash) {
  std::filesystem::create_directories(dir);
  nlohmann::json j;
  j["n"] = suite.size();
  j["basis"] = to_string(targets.basis);
  j["size_props"] = targets.size_props;
  j["class_props"] = targets.class_props;
  j["tolerance"] = budget.tolerance;
  if (!manifest_hash.empty()) j["manifest"] = manifest_hash;
  auto& parts = j["partitions"] = nlohmann::json::array();
  for (std::size_t i = 0; i < suite.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "partition_%02zu.csv", i);
    write_partition_csv(dir / name, suite[i].result.partition, manifest_hash);
    parts.push_back({{"file", name},
                     {"objective", suite[i].result.objective},
                     {"seed", suite[i].seed},
                     {"iterations", suite[i].result.iterations},
                     {"met_tolerance", suite[i].result.met_tolerance},
                     {"budget_stopped", suite[i].budget_stopped()}});
  }
  std::ofstream out(dir / "suite.json", std::ios::binary);
  if (!out) throw Error("cannot write suite manifest in '" + dir.string() + "'");
  out << j.dump(2) << '\n';
}

SuiteFile read_suite(const std::filesystem::path& dir) {
  const auto manifest = dir / "suite.json";
  std::ifstream in(manifest, std::ios::binary);
  if (!in) throw UsageError("suite manifest not found: " + manifest.string());
  SuiteFile s;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& e : j.at("partitions")) {
      s.partitions.push_back(read_partition_csv(dir / e.at("file").get<std::string>()));
      s.objectives.push_back(e.value("objective", 0.0));
      s.seeds.push_back(e.value("seed", std::uint64_t{0}));
      s.met_tolerance.push_back(e.value("met_tolerance", false));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid suite manifest " + manifest.string() + ": " + e.what());
  }
  if (s.partitions.empty()) throw Error("suite manifest lists no partitions: " + manifest.string());
  return s;
}

}  // namespace milscreen::split
