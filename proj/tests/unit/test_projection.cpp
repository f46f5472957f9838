#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "logcurves/error.hpp"
#include "logcurves/projection.hpp"

namespace projection = logcurves::projection;
using logcurves::distance::DistanceMatrix;
using projection::Point;

namespace {

DistanceMatrix from_points(const std::vector<Point>& p) {
  DistanceMatrix d(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) d(i, j) = std::hypot(p[i].x - p[j].x, p[i].y - p[j].y);
  }
  return d;
}

DistanceMatrix random_semimetric(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  DistanceMatrix d(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d(i, j) = d(j, i) = u(rng);
  }
  return d;
}

void expect_reproduces(const DistanceMatrix& d, const std::vector<Point>& p, double tol) {
  ASSERT_EQ(p.size(), d.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) EXPECT_NEAR(projection::euclidean(p[i], p[j]), d(i, j), tol);
  }
}

void expect_centered(const std::vector<Point>& p) {
  double x = 0, y = 0;
  for (const auto& q : p) {
    x += q.x;
    y += q.y;
  }
  EXPECT_NEAR(x / static_cast<double>(p.size()), 0.0, 1e-9);
  EXPECT_NEAR(y / static_cast<double>(p.size()), 0.0, 1e-9);
}

}  // namespace

TEST(Blend, Examples) {
  DistanceMatrix sem(3);
  sem(0, 1) = sem(1, 0) = 0.4;
  sem(0, 2) = sem(2, 0) = 1.0;
  sem(1, 2) = sem(2, 1) = 0.7;
  const std::vector<logcurves::ingest::EpochMillis> t{0, 200, 1000};
  const auto zero = projection::blend_distances(sem, t, 0.0);
  EXPECT_TRUE(std::equal(zero.values().begin(), zero.values().end(), sem.values().begin()));
  const auto one = projection::blend_distances(sem, t, 1.0);
  EXPECT_EQ(one(0, 1), 0.2);
  EXPECT_EQ(one(0, 2), 1.0);
  EXPECT_DOUBLE_EQ(projection::blend_distances(sem, t, 0.5)(0, 1), 0.3);
  // Equal timestamps: the time term vanishes.
  const std::vector<logcurves::ingest::EpochMillis> flat{5, 5, 5};
  EXPECT_DOUBLE_EQ(projection::blend_distances(sem, flat, 0.5)(0, 2), 0.5);
  const std::vector<logcurves::ingest::EpochMillis> short_t{1, 2};
  EXPECT_THROW(projection::blend_distances(sem, short_t, 0.5), logcurves::Error);
}

TEST(ClassicalMds, SmallCases) {
  EXPECT_EQ(projection::classical_mds(DistanceMatrix(1)), (std::vector<Point>{{0, 0}}));
  DistanceMatrix two(2);
  two(0, 1) = two(1, 0) = 3.0;
  EXPECT_EQ(projection::classical_mds(two), (std::vector<Point>{{-1.5, 0}, {1.5, 0}}));
}

TEST(ClassicalMds, Equilateral) {
  DistanceMatrix d(3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) d(i, j) = i == j ? 0.0 : 1.0;
  }
  const auto p = projection::classical_mds(d);
  expect_reproduces(d, p, 1e-9);
  expect_centered(p);
}

TEST(ClassicalMds, UnitSquare) {
  const auto d = from_points({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  expect_reproduces(d, projection::classical_mds(d), 1e-6);
}

TEST(ClassicalMds, RandomPlanarConfigurations) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point> p(12);
    for (auto& q : p) q = {g(rng), g(rng)};
    const auto d = from_points(p);
    expect_reproduces(d, projection::classical_mds(d), 1e-8);
  }
}

TEST(Smacof, RealizableInputStaysExact) {
  const auto d = from_points({{0, 0}, {2, 0}, {2, 1}, {0, 1}, {1, 3}});
  const auto e = projection::smacof(d, projection::classical_mds(d));
  ASSERT_FALSE(e.stress_history.empty());
  EXPECT_LE(e.stress, e.stress_history.front() + 1e-12);
  EXPECT_LT(e.stress, 1e-6);
  expect_reproduces(d, e.points, 1e-6);
}

TEST(Smacof, ZeroMatrix) {
  const auto e = projection::smacof(DistanceMatrix(4), std::vector<Point>(4));
  EXPECT_EQ(e.stress, 0.0);
  for (const auto& p : e.points) EXPECT_EQ(p, (Point{0, 0}));
}

TEST(Smacof, StressNeverIncreases) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = random_semimetric(rng, 10);
    const auto e = projection::smacof(d, std::vector<Point>(10), {300, 1e-9, static_cast<std::uint64_t>(trial)});
    ASSERT_EQ(e.stress_history.size(), e.iterations + 1);
    for (std::size_t k = 1; k < e.stress_history.size(); ++k) {
      ASSERT_LE(e.stress_history[k], e.stress_history[k - 1]) << "trial " << trial << " iteration " << k;
    }
    EXPECT_DOUBLE_EQ(e.stress, e.stress_history.back());
    expect_centered(e.points);
  }
}

TEST(Smacof, Deterministic) {
  std::mt19937_64 rng(3);
  const auto d = random_semimetric(rng, 15);
  const auto a = projection::smacof(d, std::vector<Point>(15), {100, 1e-6, 42});
  const auto b = projection::smacof(d, std::vector<Point>(15), {100, 1e-6, 42});
  EXPECT_EQ(a.points, b.points);
  EXPECT_EQ(a.stress_history, b.stress_history);
}

TEST(Smacof, RejectsInvalidDissimilarities) {
  DistanceMatrix d(2);
  d(0, 1) = d(1, 0) = -1.0;
  EXPECT_THROW(projection::smacof(d, std::vector<Point>(2)), logcurves::DegenerateInput);
  d(0, 1) = d(1, 0) = std::nan("");
  EXPECT_THROW(projection::smacof(d, std::vector<Point>(2)), logcurves::DegenerateInput);
  d(0, 1) = d(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(projection::smacof(d, std::vector<Point>(2)), logcurves::DegenerateInput);
}

TEST(Stress, KruskalNormalization) {
  DistanceMatrix d(2);
  d(0, 1) = d(1, 0) = 2.0;
  const std::vector<Point> p{{0, 0}, {1, 0}};
  EXPECT_EQ(projection::raw_stress(d, p), 1.0);
  EXPECT_EQ(projection::kruskal_stress(d, p), 0.5);  // sqrt(1 / 4)
}

TEST(RSquared, Examples) {
  const auto d = from_points({{0, 0}, {3, 0}, {0, 4}});
  EXPECT_EQ(projection::r_squared(d, std::vector<Point>{{0, 0}, {3, 0}, {0, 4}}), 1.0);

  DistanceMatrix tri(3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) tri(i, j) = i == j ? 0.0 : 1.0;
  }
  const std::vector<Point> exact{{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}};
  EXPECT_NEAR(projection::r_squared(tri, exact), 1.0, 1e-9);
  // All-equal dissimilarities with a spread that does not reproduce them.
  EXPECT_THROW(projection::r_squared(tri, std::vector<Point>{{0, 0}, {1, 0}, {5, 5}}), logcurves::UndefinedFit);

  // d = (3, 4, 5), e = (3, 5, 4): SS_res = 2, SS_tot = 2.
  const std::vector<Point> swapped{{0, 0}, {3, 0}, {3, 4}};
  EXPECT_NEAR(projection::r_squared(d, swapped), 0.0, 1e-12);
}

TEST(Quality, RigidMotionInvariance) {
  std::mt19937_64 rng(4);
  const auto d = random_semimetric(rng, 12);
  const auto e = projection::smacof(d, projection::classical_mds(d));
  const double r2 = projection::r_squared(d, e.points);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int trial = 0; trial < 10; ++trial) {
    const double theta = u(rng);
    const double flip = trial % 2 ? -1.0 : 1.0;
    const double tx = u(rng), ty = u(rng);
    std::vector<Point> moved;
    for (const auto& p : e.points) {
      moved.push_back({std::cos(theta) * p.x - std::sin(theta) * p.y * flip + tx,
                       std::sin(theta) * p.x + std::cos(theta) * p.y * flip + ty});
    }
    EXPECT_NEAR(projection::kruskal_stress(d, moved), e.stress, 1e-9);
    EXPECT_NEAR(projection::r_squared(d, moved), r2, 1e-9);
  }
}

TEST(Embed, ReportsFitAndAlpha) {
  std::mt19937_64 rng(5);
  const auto d = random_semimetric(rng, 8);
  const std::vector<logcurves::ingest::EpochMillis> t{0, 1, 2, 3, 4, 5, 6, 7};
  const auto e = projection::embed(d, t, 0.25);
  EXPECT_EQ(e.alpha, 0.25);
  ASSERT_TRUE(e.r_squared);
  EXPECT_LE(*e.r_squared, 1.0);
  const auto blended = projection::blend_distances(d, t, 0.25);
  EXPECT_NEAR(e.stress, projection::kruskal_stress(blended, e.points), 1e-12);
  expect_centered(e.points);
}

TEST(Embed, EqualCheckpointsCoincide) {
  // Points 0 and 2 have zero distance: they must land together.
  DistanceMatrix d(4);
  const double v[4][4] = {{0, 0.6, 0, 0.9}, {0.6, 0, 0.6, 0.5}, {0, 0.6, 0, 0.9}, {0.9, 0.5, 0.9, 0}};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) d(i, j) = v[i][j];
  }
  const std::vector<logcurves::ingest::EpochMillis> t{0, 0, 0, 0};
  const auto e = projection::embed(d, t, 0.0);
  EXPECT_LT(projection::euclidean(e.points[0], e.points[2]), 1e-6);
}

namespace {
using logcurves::templates::Checkpoint;
Checkpoint checkpoint(std::size_t index, std::string series, logcurves::ingest::EpochMillis t,
                      std::vector<logcurves::templates::TemplateId> ids) {
  Checkpoint c;
  c.index = index;
  c.series_id = std::move(series);
  c.timestamp = t;
  c.template_ids = std::move(ids);
  c.record_count = 1;
  return c;
}
}  // namespace

TEST(JointEmbed, DuplicatedSeriesCoincide) {
  const std::vector<std::string> universe{"boot ok", "load <NUM>", "serve get", "serve put", "error disk", "bye"};
  std::vector<Checkpoint> a = {checkpoint(0, "a", 0, {0}), checkpoint(1, "a", 10, {1, 2}),
                               checkpoint(2, "a", 20, {2, 3}), checkpoint(3, "a", 30, {4}),
                               checkpoint(4, "a", 40, {5})};
  auto b = a;
  for (auto& c : b) c.series_id = "b";
  const std::vector<std::vector<Checkpoint>> series{a, b};
  const auto joint = projection::joint_embed(series, universe);
  ASSERT_EQ(joint.checkpoints.size(), 10u);
  EXPECT_EQ(joint.series_tags[0], "a");
  EXPECT_EQ(joint.series_tags[9], "b");
  ASSERT_EQ(joint.embeddings.size(), 3u);
  for (const auto& e : joint.embeddings) {
    for (std::size_t i = 0; i < 5; ++i) EXPECT_LT(projection::euclidean(e.points[i], e.points[i + 5]), 1e-6);
  }
}

TEST(JointEmbed, SingleSeriesMatchesDirectPath) {
  const std::vector<std::string> universe{"x one", "x two", "y three", "z four"};
  std::vector<Checkpoint> a = {checkpoint(0, "a", 0, {0}), checkpoint(1, "a", 5, {1, 2}),
                               checkpoint(2, "a", 9, {3}), checkpoint(3, "a", 12, {0, 3})};
  const std::vector<std::vector<Checkpoint>> series{a};
  const auto joint = projection::joint_embed(series, universe);
  const auto semantic = logcurves::distance::distance_matrix(a, universe);
  const std::vector<logcurves::ingest::EpochMillis> t{0, 5, 9, 12};
  for (std::size_t k = 0; k < 3; ++k) {
    const auto direct = projection::embed(semantic, t, joint.embeddings[k].alpha);
    EXPECT_EQ(direct.points, joint.embeddings[k].points);
  }
}

TEST(ProjectionConfig, Validation) {
  projection::ProjectionConfig c;
  c.alphas = {};
  EXPECT_THROW(c.validate(), logcurves::ConfigError);
  c.alphas = {1.5};
  EXPECT_THROW(c.validate(), logcurves::ConfigError);
  c.alphas = {0.5};
  c.smacof.tol = 0;
  EXPECT_THROW(c.validate(), logcurves::ConfigError);
}
