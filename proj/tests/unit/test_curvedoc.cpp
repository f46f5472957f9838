#include <cmath>
#include <filesystem>
#include <regex>
#include <stack>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "logcurves/curvedoc.hpp"
#include "logcurves/error.hpp"

namespace curvedoc = logcurves::curvedoc;
using logcurves::projection::Point;

namespace {

curvedoc::CurveDocument sample(std::size_t series_count = 1, std::size_t per_series = 3) {
  curvedoc::CurveDocument doc;
  for (std::size_t s = 0; s < series_count; ++s) {
    const auto id = "s" + std::to_string(s);
    doc.series.push_back({id, "Service " + std::to_string(s), curvedoc::series_color(s)});
    for (std::size_t i = 0; i < per_series; ++i) {
      curvedoc::CheckpointEntry c;
      c.index = i;
      c.series_id = id;
      c.timestamp = 1709596800000 + static_cast<long long>(i) * 60000;
      c.record_count = 10 * (i + 1);
      c.template_texts = {"INFO start <*>", "Größe \"überschritten\" <NUM> \\ \t ✓"};
      doc.checkpoints.push_back(std::move(c));
    }
  }
  const auto n = doc.checkpoints.size();
  for (const double alpha : {0.0, 0.5}) {
    curvedoc::EmbeddingEntry e{alpha, 0.125, 0.9, {}};
    for (std::size_t i = 0; i < n; ++i) {
      e.points.push_back({std::cos(static_cast<double>(i)) / 3.0, std::sin(static_cast<double>(i) * 0.7) * 1e-7});
    }
    doc.embeddings.push_back(std::move(e));
  }
  doc.embeddings[1].r_squared.reset();
  doc.meta.created_at = "2024-03-05T00:00:00.000Z";
  doc.meta.config = {{"alpha", "0,0.5"}, {"tree-depth", "4"}};
  doc.meta.sources = {"app.log"};
  doc.meta.synthetic_leading_records = 2;
  return doc;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

// Tag balance check; enough to catch malformed output from a template writer.
bool balanced_xml(const std::string& svg) {
  std::stack<std::string> open;
  const std::regex tag(R"(<(/?)([a-zA-Z]+)[^<>]*?(/?)>)");
  for (std::sregex_iterator it(svg.begin(), svg.end(), tag), end; it != end; ++it) {
    const auto& m = *it;
    if (m[1] == "/") {
      if (open.empty() || open.top() != m[2]) return false;
      open.pop();
    } else if (m[3] != "/") {
      open.push(m[2]);
    }
  }
  return open.empty();
}

}  // namespace

TEST(Document, RoundTrip) {
  const auto doc = sample(2, 4);
  const auto json = curvedoc::serialize(doc);
  const auto back = curvedoc::deserialize(json);
  EXPECT_EQ(back, doc);
  EXPECT_EQ(curvedoc::serialize(back), json);
}

TEST(Document, CanonicalKeyOrder) {
  const auto json = curvedoc::serialize(sample());
  const auto pos = [&](const char* key) { return json.find(std::string("\"") + key + "\""); };
  EXPECT_LT(pos("version"), pos("series"));
  EXPECT_LT(pos("series"), pos("checkpoints"));
  EXPECT_LT(pos("checkpoints"), pos("embeddings"));
  EXPECT_LT(pos("embeddings"), pos("meta"));
  EXPECT_LT(pos("index"), pos("series_id\": \"s0\",\n      \"timestamp"));
  EXPECT_NE(json.find("\"r_squared\": null"), std::string::npos);
  EXPECT_NE(json.find("0.125"), std::string::npos);
  // Non-ASCII passes through unescaped.
  EXPECT_NE(json.find("Größe"), std::string::npos);
  EXPECT_TRUE(nlohmann::json::accept(json));
}

TEST(Document, DoublesSurviveExactly) {
  auto doc = sample();
  doc.embeddings[0].points[0] = {0.1 + 0.2, -1.0 / 3.0};
  doc.embeddings[0].stress = 5e-324;
  const auto back = curvedoc::deserialize(curvedoc::serialize(doc));
  EXPECT_EQ(back.embeddings[0].points[0], doc.embeddings[0].points[0]);
  EXPECT_EQ(back.embeddings[0].stress, 5e-324);
}

TEST(Document, SchemaErrors) {
  auto json = nlohmann::json::parse(curvedoc::serialize(sample()));
  auto v2 = json;
  v2["version"] = 2;
  EXPECT_THROW(curvedoc::deserialize(v2.dump()), logcurves::SchemaError);
  auto empty = json;
  empty["checkpoints"] = nlohmann::json::array();
  for (auto& e : empty["embeddings"]) e["points"] = nlohmann::json::array();
  EXPECT_THROW(curvedoc::deserialize(empty.dump()), logcurves::SchemaError);
  auto missing = json;
  missing.erase("meta");
  EXPECT_THROW(curvedoc::deserialize(missing.dump()), logcurves::SchemaError);
  auto wrong_type = json;
  wrong_type["checkpoints"][0]["timestamp"] = "yesterday";
  EXPECT_THROW(curvedoc::deserialize(wrong_type.dump()), logcurves::SchemaError);
  auto short_points = json;
  short_points["embeddings"][0]["points"].erase(0);
  EXPECT_THROW(curvedoc::deserialize(short_points.dump()), logcurves::SchemaError);
  EXPECT_THROW(curvedoc::deserialize("{not json"), logcurves::SchemaError);
  EXPECT_THROW(curvedoc::deserialize("[]"), logcurves::SchemaError);
}

TEST(Document, ValidateInvariants) {
  auto doc = sample(1, 3);
  doc.checkpoints[2].timestamp = doc.checkpoints[0].timestamp - 1;
  EXPECT_THROW(doc.validate(), logcurves::SchemaError);
  doc = sample(1, 3);
  doc.checkpoints[1].index = 5;
  EXPECT_THROW(doc.validate(), logcurves::SchemaError);
  doc = sample(1, 3);
  doc.checkpoints[1].series_id = "ghost";
  EXPECT_THROW(doc.validate(), logcurves::SchemaError);
  doc = sample(1, 3);
  doc.embeddings[0].alpha = 1.5;
  EXPECT_THROW(doc.validate(), logcurves::SchemaError);
  doc = sample(1, 3);
  doc.embeddings[0].points[0].x = NAN;
  EXPECT_THROW(doc.validate(), logcurves::SchemaError);
  doc = sample(1, 3);
  doc.meta.config = {{"b", "1"}, {"a", "2"}};
  EXPECT_THROW(doc.validate(), logcurves::SchemaError);
  doc = sample(2, 1);
  doc.series[1].series_id = "s0";
  EXPECT_THROW(doc.validate(), logcurves::SchemaError);
}

TEST(Document, FileIo) {
  const auto path = (std::filesystem::temp_directory_path() / "logcurves_doc_test.json").string();
  const auto doc = sample();
  curvedoc::write_document(path, doc);
  EXPECT_EQ(curvedoc::read_document(path), doc);
  std::filesystem::remove(path);
  EXPECT_THROW(curvedoc::read_document(path), logcurves::ConfigError);
}

TEST(SmoothPath, TwoPointsGiveOneStraightSegment) {
  const std::vector<Point> p{{0, 0}, {3, 6}};
  const auto segs = curvedoc::smooth_path(p);
  ASSERT_EQ(segs.size(), 1u);
  for (const auto& c : {segs[0].control1, segs[0].control2}) EXPECT_NEAR(c.y, 2.0 * c.x, 1e-12);
  EXPECT_EQ(segs[0].start, p[0]);
  EXPECT_EQ(segs[0].end, p[1]);
  EXPECT_TRUE(curvedoc::smooth_path(std::vector<Point>{{1, 1}}).empty());
}

TEST(SmoothPath, CollinearStaysOnLine) {
  const std::vector<Point> p{{0, 1}, {1, 3}, {4, 9}, {4.5, 10}, {7, 15}};
  for (const double tension : {0.0, 0.5, 1.0}) {
    const auto segs = curvedoc::smooth_path(p, tension);
    ASSERT_EQ(segs.size(), 4u);
    for (const auto& s : segs) {
      for (const auto& c : {s.control1, s.control2}) EXPECT_NEAR(c.y, 2.0 * c.x + 1.0, 1e-9);
    }
  }
}

TEST(SmoothPath, TensionZeroIsControlPolygon) {
  const std::vector<Point> p{{0, 0}, {1, 2}, {3, -1}, {5, 5}};
  const auto segs = curvedoc::smooth_path(p, 0.0);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    EXPECT_EQ(segs[i].control1, p[i]);
    EXPECT_EQ(segs[i].control2, p[i + 1]);
  }
}

TEST(SmoothPath, InteriorTangents) {
  const std::vector<Point> p{{0, 0}, {1, 1}, {3, 0}};
  const auto segs = curvedoc::smooth_path(p, 0.5);
  // m_1 = 0.5 * (p2 - p0) = (1.5, 0); c2 of the first segment = p1 - m_1 / 3.
  EXPECT_DOUBLE_EQ(segs[0].control2.x, 0.5);
  EXPECT_DOUBLE_EQ(segs[0].control2.y, 1.0);
  EXPECT_DOUBLE_EQ(segs[1].control1.x, 1.5);
  // End tangent clamps: m_2 = 0.5 * (p2 - p1).
  EXPECT_DOUBLE_EQ(segs[1].control2.x, 3.0 - 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(segs[1].control2.y, 1.0 / 6.0);
}

TEST(TimeColor, GradientEnds) {
  EXPECT_EQ(curvedoc::time_color(0.0), "#440154");
  EXPECT_EQ(curvedoc::time_color(1.0), "#5ec962");
  EXPECT_EQ(curvedoc::time_color(0.5), "#21918c");
  EXPECT_EQ(curvedoc::time_color(-3.0), "#440154");
}

TEST(TimeColor, FractionStrictlyIncreasing) {
  double last = -1.0;
  for (long long t = 0; t <= 1000; t += 7) {
    const double f = curvedoc::time_fraction(t, 0, 1000);
    EXPECT_GT(f, last);
    last = f;
  }
  EXPECT_EQ(curvedoc::time_fraction(5, 5, 5), 0.0);
}

TEST(Svg, ElementCountsSingleSeries) {
  const auto svg = curvedoc::render_svg(sample(1, 3), 0.0);
  EXPECT_EQ(count(svg, "<circle"), 3u);
  EXPECT_EQ(count(svg, "<path"), 1u);
  EXPECT_EQ(count(svg, "<text"), 3u);
  EXPECT_TRUE(balanced_xml(svg));
  EXPECT_NE(svg.find("fill=\"#440154\""), std::string::npos);  // first checkpoint: start colour
  EXPECT_NE(svg.find("fill=\"#5ec962\""), std::string::npos);
  EXPECT_EQ(svg.find("href"), std::string::npos);  // no external resources
}

TEST(Svg, OverlayPathsHaveDistinctStyles) {
  const auto svg = curvedoc::render_svg(sample(2, 3), 0.5);
  EXPECT_EQ(count(svg, "<path"), 2u);
  EXPECT_EQ(count(svg, "<circle"), 6u);
  const std::regex path(R"re(<path [^>]*stroke="([^"]+)"[^>]*>)re");
  std::vector<std::string> styles;
  for (std::sregex_iterator it(svg.begin(), svg.end(), path), end; it != end; ++it) styles.push_back((*it)[0]);
  ASSERT_EQ(styles.size(), 2u);
  EXPECT_NE(styles[0].substr(styles[0].find("stroke=")), styles[1].substr(styles[1].find("stroke=")));
  EXPECT_TRUE(balanced_xml(svg));
}

TEST(Svg, DeterministicAndOptions) {
  const auto doc = sample(2, 5);
  EXPECT_EQ(curvedoc::render_svg(doc, 0.0), curvedoc::render_svg(doc, 0.0));
  curvedoc::CurveStyle style;
  style.labels = false;
  EXPECT_EQ(count(curvedoc::render_svg(doc, 0.0, style), "<text"), 0u);
  EXPECT_THROW(curvedoc::render_svg(doc, 0.25), logcurves::ConfigError);
  style.curve_tension = 1.5;
  EXPECT_THROW(curvedoc::render_svg(doc, 0.0, style), logcurves::ConfigError);
}

TEST(Svg, EscapesMarkup) {
  auto doc = sample();
  doc.series[0].label = "a<b & \"c\"";
  const auto svg = curvedoc::render_svg(doc, 0.0);
  EXPECT_NE(svg.find("a&lt;b &amp; &quot;c&quot;"), std::string::npos);
  EXPECT_TRUE(balanced_xml(svg));
}

TEST(Svg, SinglePointDocument) {
  const auto svg = curvedoc::render_svg(sample(1, 1), 0.0);
  EXPECT_EQ(count(svg, "<circle"), 1u);
  EXPECT_EQ(count(svg, "<path"), 1u);
}
