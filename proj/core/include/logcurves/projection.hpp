#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "logcurves/distance.hpp"
#include "logcurves/ingest.hpp"
#include "logcurves/templates.hpp"

namespace logcurves::projection {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double euclidean(const Point& a, const Point& b);

struct SmacofOptions {
  std::size_t max_iter = 300;
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

struct ProjectionConfig {
  std::vector<double> alphas = {0.0, 0.25, 0.5};
  SmacofOptions smacof;

  void validate() const;
};

struct Embedding {
  double alpha = 0.0;
  std::vector<Point> points;  // centered
  double stress = 0.0;        // Kruskal stress-1 against the embedded dissimilarities
  std::optional<double> r_squared;  // absent when the fit is undefined
  std::vector<double> stress_history;  // stress-1 at init and after every accepted iteration
  std::size_t iterations = 0;
};

// (1 - alpha) * semantic + alpha * |t_i - t_j| / (t_max - t_min).
distance::DistanceMatrix blend_distances(const distance::DistanceMatrix& semantic,
                                         std::span<const ingest::EpochMillis> timestamps, double alpha);

// Torgerson scaling: top-2 eigenpairs of the double-centered squared
// dissimilarities, negative eigenvalues clamped to zero.
std::vector<Point> classical_mds(const distance::DistanceMatrix& d);

// Stress majorization (Guttman transform) from `init`. Stress never
// increases between recorded iterations. Throws DegenerateInput for negative
// or non-finite dissimilarities.
Embedding smacof(const distance::DistanceMatrix& d, std::vector<Point> init, const SmacofOptions& options = {});

// Raw stress: sum over i<j of (d_ij - e_ij)^2.
double raw_stress(const distance::DistanceMatrix& d, std::span<const Point> points);
// sqrt(raw_stress / sum d_ij^2); 0 for an all-zero matrix.
double kruskal_stress(const distance::DistanceMatrix& d, std::span<const Point> points);

// 1 - SS_res / SS_tot over i<j pairs. Throws UndefinedFit when the
// dissimilarities have no variance but the embedding does not reproduce them.
double r_squared(const distance::DistanceMatrix& d, std::span<const Point> points);

// blend -> classical init -> SMACOF -> R².
Embedding embed(const distance::DistanceMatrix& semantic, std::span<const ingest::EpochMillis> timestamps,
                double alpha, const SmacofOptions& options = {});

struct JointEmbedding {
  std::vector<templates::Checkpoint> checkpoints;  // all series, concatenated
  std::vector<std::string> series_tags;             // one per checkpoint
  distance::DistanceMatrix semantic;
  std::vector<Embedding> embeddings;  // one per alpha
};

// One matrix and one coordinate frame for all series. Checkpoint template
// ids must already refer to the shared universe.
JointEmbedding joint_embed(std::span<const std::vector<templates::Checkpoint>> series,
                           std::span<const std::string> universe_texts, const ProjectionConfig& config = {},
                           const distance::DistanceConfig& distance_config = {});

}  // namespace logcurves::projection
