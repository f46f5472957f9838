#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "logcurves/templates.hpp"

namespace logcurves::distance {

struct EditWeights {
  double insert = 1.0;
  double remove = 1.0;
  double substitute = 1.0;

  bool unit() const { return insert == 1.0 && remove == 1.0 && substitute == 1.0; }
  bool symmetric() const { return insert == remove; }
  double max() const;
};

enum class StringMetric : std::uint8_t { kLevenshtein, kQGram };

struct DistanceConfig {
  EditWeights weights;
  StringMetric metric = StringMetric::kLevenshtein;
  std::size_t qgram = 2;
  std::size_t threads = 1;

  void validate() const;
};

// Weighted edit distance between byte strings. Unit weights use a
// bit-parallel (Myers/Hyyrö) evaluation; other weights a two-row DP.
double levenshtein(std::string_view a, std::string_view b, const EditWeights& weights = {});

// levenshtein / (max weight * longer length), in [0, 1]; 0 for two empty strings.
double norm_template_distance(std::string_view a, std::string_view b, const EditWeights& weights = {});

// Normalized q-gram profile distance: sum |G_a(v) - G_b(v)| / (|G_a| + |G_b|).
// Strings shorter than q fall back to 0/1 equality.
double qgram_distance(std::string_view a, std::string_view b, std::size_t q = 2);

// Template-level distance selected by the config.
double template_distance(std::string_view a, std::string_view b, const DistanceConfig& config = {});

// Mean over x of the distance to the closest template of y.
double directed_distance(std::span<const std::string> x, std::span<const std::string> y,
                         const DistanceConfig& config = {});

// Log-cardinality symmetrization of both directed distances. Singleton sets
// reduce to the directed term of the larger set (or the template distance).
double checkpoint_distance(std::span<const std::string> x, std::span<const std::string> y,
                           const DistanceConfig& config = {});

// Combines directed terms for sets of sizes nx, ny. Exposed so that the
// optimized matrix and the string-set path share one formula.
double symmetrize(std::size_t nx, std::size_t ny, double x_to_y, double y_to_x);

// Sum with pairwise (cascade) accumulation.
double pairwise_sum(std::span<const double> values);

class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }
  std::span<const double> values() const { return values_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

// Thread-safe memo of template-pair distances keyed by id pair (unordered
// when the metric is symmetric). Dense for small universes, sharded hash maps
// otherwise.
class TemplatePairCache {
 public:
  TemplatePairCache(std::size_t universe_size, bool symmetric);
  ~TemplatePairCache();

  std::optional<double> find(templates::TemplateId a, templates::TemplateId b) const;
  // Stores value unless an entry exists; returns the stored entry.
  double insert_if_absent(templates::TemplateId a, templates::TemplateId b, double value);
  std::size_t size() const { return entries_.load(std::memory_order_relaxed); }

 private:
  struct Shard {
    mutable std::shared_mutex mutex;
    std::unordered_map<std::uint64_t, double> values;
  };
  static constexpr std::size_t kShards = 64;
  static constexpr std::size_t kDenseLimit = 2048;

  std::uint64_t key(templates::TemplateId a, templates::TemplateId b) const;
  std::size_t dense_index(templates::TemplateId a, templates::TemplateId b) const;

  std::size_t universe_size_;
  bool symmetric_;
  std::unique_ptr<std::atomic<double>[]> dense_;
  std::unique_ptr<Shard[]> shards_;
  std::atomic<std::size_t> entries_{0};
};

struct MatrixStats {
  std::size_t template_pairs_computed = 0;
  std::size_t pruned = 0;
};

// All-pairs checkpoint distances over universe ids. Uses pair memoization,
// a length lower bound to skip hopeless pairs, and an exact-id shortcut.
DistanceMatrix distance_matrix(std::span<const templates::Checkpoint> checkpoints,
                               std::span<const std::string> universe_texts, const DistanceConfig& config = {},
                               MatrixStats* stats = nullptr);

// Row-major CSV with a header row of checkpoint indices, 17 significant digits.
void write_matrix_csv(std::ostream& out, const DistanceMatrix& matrix);

}  // namespace logcurves::distance
