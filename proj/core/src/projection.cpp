#include "logcurves/projection.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "logcurves/error.hpp"

namespace logcurves::projection {

namespace {

// Below this stress-1 the embedding counts as an exact reproduction.
constexpr double kExactFit = 1e-9;
constexpr double kCoincident = 1e-12;

void check_dissimilarities(const distance::DistanceMatrix& d) {
  for (const double v : d.values()) {
    if (!std::isfinite(v) || v < 0.0) {
      throw DegenerateInput(fmt::format("dissimilarity {} is negative or not finite", v));
    }
  }
}

double sum_squares(const distance::DistanceMatrix& d) {
  double total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = i + 1; j < d.size(); ++j) total += d(i, j) * d(i, j);
  }
  return total;
}

void center(std::vector<Point>& points) {
  if (points.empty()) return;
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  for (auto& p : points) {
    p.x -= mx;
    p.y -= my;
  }
}

double spread(std::span<const Point> points) {
  double extent = 0.0;
  for (const auto& p : points) extent = std::max({extent, std::abs(p.x), std::abs(p.y)});
  return extent;
}

// Uniform in [-1, 1) from raw engine output; std distributions are not
// portable across standard libraries.
double unit_uniform(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-52 - 1.0;
}

std::vector<Point> guttman_transform(const distance::DistanceMatrix& d, std::span<const Point> x) {
  const std::size_t n = x.size();
  std::vector<Point> next(n);
  for (std::size_t i = 0; i < n; ++i) {
    double bx = 0.0, by = 0.0, diagonal = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double e = euclidean(x[i], x[j]);
      if (e < kCoincident) continue;
      const double b = -d(i, j) / e;
      bx += b * x[j].x;
      by += b * x[j].y;
      diagonal -= b;
    }
    next[i] = {(bx + diagonal * x[i].x) / static_cast<double>(n), (by + diagonal * x[i].y) / static_cast<double>(n)};
  }
  return next;
}

}  // namespace

double euclidean(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

void ProjectionConfig::validate() const {
  if (alphas.empty()) throw ConfigError("at least one alpha preset is required");
  for (const double alpha : alphas) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError(fmt::format("alpha must lie in [0, 1], got {}", alpha));
  }
  if (smacof.max_iter < 1) throw ConfigError("max-iter must be at least 1");
  if (!(smacof.tol > 0.0)) throw ConfigError("tol must be positive");
}

distance::DistanceMatrix blend_distances(const distance::DistanceMatrix& semantic,
                                         std::span<const ingest::EpochMillis> timestamps, double alpha) {
  const auto n = semantic.size();
  if (timestamps.size() != n) {
    throw Error(fmt::format("{} timestamps for a {}x{} matrix", timestamps.size(), n, n));
  }
  if (alpha == 0.0) return semantic;
  distance::DistanceMatrix blended(n);
  if (n == 0) return blended;
  const auto [lo, hi] = std::minmax_element(timestamps.begin(), timestamps.end());
  const double range = static_cast<double>(*hi - *lo);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double time = range > 0.0 ? std::abs(static_cast<double>(timestamps[i] - timestamps[j])) / range : 0.0;
      blended(i, j) = alpha == 1.0 ? time : (1.0 - alpha) * semantic(i, j) + alpha * time;
    }
  }
  return blended;
}

std::vector<Point> classical_mds(const distance::DistanceMatrix& d) {
  const auto n = d.size();
  if (n == 0) return {};
  if (n == 1) return {Point{}};
  if (n == 2) return {Point{-d(0, 1) / 2.0, 0.0}, Point{d(0, 1) / 2.0, 0.0}};

  Eigen::MatrixXd squared(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) squared(i, j) = d(i, j) * d(i, j);
  }
  const Eigen::VectorXd row_means = squared.rowwise().mean();
  const Eigen::VectorXd col_means = squared.colwise().mean();
  const double grand_mean = squared.mean();
  Eigen::MatrixXd b(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      b(i, j) = -0.5 * (squared(i, j) - row_means(i) - col_means(j) + grand_mean);
    }
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  const auto& values = solver.eigenvalues();  // ascending
  const auto& vectors = solver.eigenvectors();

  std::vector<Point> points(n);
  for (int axis = 0; axis < 2; ++axis) {
    const Eigen::Index column = static_cast<Eigen::Index>(n) - 1 - axis;
    const double scale = std::sqrt(std::max(values(column), 0.0));
    Eigen::VectorXd v = vectors.col(column);
    // Canonical sign: the largest-magnitude component is positive.
    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    if (v(pivot) < 0.0) v = -v;
    for (std::size_t i = 0; i < n; ++i) {
      (axis == 0 ? points[i].x : points[i].y) = v(static_cast<Eigen::Index>(i)) * scale;
    }
  }
  center(points);
  return points;
}

double raw_stress(const distance::DistanceMatrix& d, std::span<const Point> points) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double r = d(i, j) - euclidean(points[i], points[j]);
      total += r * r;
    }
  }
  return total;
}

double kruskal_stress(const distance::DistanceMatrix& d, std::span<const Point> points) {
  const double denominator = sum_squares(d);
  const double raw = raw_stress(d, points);
  if (denominator == 0.0) return std::sqrt(raw);
  return std::sqrt(raw / denominator);
}

Embedding smacof(const distance::DistanceMatrix& d, std::vector<Point> init, const SmacofOptions& options) {
  check_dissimilarities(d);
  const auto n = d.size();
  if (init.size() != n) throw Error(fmt::format("{} initial points for {} objects", init.size(), n));

  Embedding result;
  const double denominator = sum_squares(d);
  const auto normalized = [&](double raw) { return denominator > 0.0 ? std::sqrt(raw / denominator) : std::sqrt(raw); };

  if (denominator > 0.0 && spread(init) < kCoincident) {
    std::mt19937_64 engine(options.seed);
    for (auto& p : init) p = {unit_uniform(engine), unit_uniform(engine)};
  }
  center(init);

  std::vector<Point> current = std::move(init);
  double sigma = raw_stress(d, current);
  result.stress_history.push_back(normalized(sigma));

  for (std::size_t iter = 0; iter < options.max_iter && sigma > 0.0; ++iter) {
    auto candidate = guttman_transform(d, current);
    const double next_sigma = raw_stress(d, candidate);
    if (next_sigma > sigma) break;  // rounding at convergence
    const double previous = sigma;
    current = std::move(candidate);
    sigma = next_sigma;
    result.stress_history.push_back(normalized(sigma));
    ++result.iterations;
    if (previous - sigma <= options.tol * previous) break;
  }

  center(current);
  result.points = std::move(current);
  result.stress = kruskal_stress(d, result.points);
  return result;
}

double r_squared(const distance::DistanceMatrix& d, std::span<const Point> points) {
  const auto n = points.size();
  if (d.size() != n) throw Error("matrix and point count disagree");
  const std::size_t pairs = n * (n - (n > 0 ? 1 : 0)) / 2;
  if (pairs == 0) return 1.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) mean += d(i, j);
  }
  mean /= static_cast<double>(pairs);
  double ss_tot = 0.0, ss_res = 0.0, ss_d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double residual = d(i, j) - euclidean(points[i], points[j]);
      ss_res += residual * residual;
      ss_tot += (d(i, j) - mean) * (d(i, j) - mean);
      ss_d += d(i, j) * d(i, j);
    }
  }
  const bool exact = ss_res <= kExactFit * kExactFit * std::max(ss_d, 1e-300) || ss_res == 0.0;
  if (ss_tot <= 1e-24 * std::max(ss_d, 1.0)) {
    if (exact) return 1.0;
    throw UndefinedFit("dissimilarities have zero variance but the embedding does not reproduce them");
  }
  if (exact) return 1.0;
  return 1.0 - ss_res / ss_tot;
}

Embedding embed(const distance::DistanceMatrix& semantic, std::span<const ingest::EpochMillis> timestamps,
                double alpha, const SmacofOptions& options) {
  const auto blended = blend_distances(semantic, timestamps, alpha);
  auto result = smacof(blended, classical_mds(blended), options);
  result.alpha = alpha;
  try {
    result.r_squared = r_squared(blended, result.points);
  } catch (const UndefinedFit&) {
    result.r_squared.reset();
  }
  return result;
}

JointEmbedding joint_embed(std::span<const std::vector<templates::Checkpoint>> series,
                           std::span<const std::string> universe_texts, const ProjectionConfig& config,
                           const distance::DistanceConfig& distance_config) {
  config.validate();
  if (series.empty()) throw Error("joint embedding needs at least one series");
  JointEmbedding joint;
  for (const auto& s : series) {
    for (const auto& checkpoint : s) {
      joint.checkpoints.push_back(checkpoint);
      joint.series_tags.push_back(checkpoint.series_id);
    }
  }
  joint.semantic = distance::distance_matrix(joint.checkpoints, universe_texts, distance_config);
  std::vector<ingest::EpochMillis> timestamps;
  timestamps.reserve(joint.checkpoints.size());
  for (const auto& checkpoint : joint.checkpoints) timestamps.push_back(checkpoint.timestamp);
  for (const double alpha : config.alphas) {
    joint.embeddings.push_back(embed(joint.semantic, timestamps, alpha, config.smacof));
  }
  return joint;
}

}  // namespace logcurves::projection
