#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "logcurves/ingest.hpp"
#include "logcurves/projection.hpp"

namespace logcurves::curvedoc {

inline constexpr int kDocumentVersion = 1;

struct SeriesInfo {
  std::string series_id;
  std::string label;
  std::string color_hint;  // "#rrggbb"

  friend bool operator==(const SeriesInfo&, const SeriesInfo&) = default;
};

struct CheckpointEntry {
  std::size_t index = 0;  // position within its series
  std::string series_id;
  ingest::EpochMillis timestamp = 0;
  std::size_t record_count = 0;
  std::vector<std::string> template_texts;
  std::vector<std::string> annotations;

  friend bool operator==(const CheckpointEntry&, const CheckpointEntry&) = default;
};

struct EmbeddingEntry {
  double alpha = 0.0;
  double stress = 0.0;
  std::optional<double> r_squared;
  std::vector<projection::Point> points;  // one per checkpoint, document order

  friend bool operator==(const EmbeddingEntry&, const EmbeddingEntry&) = default;
};

struct Meta {
  std::string created_at;
  std::vector<std::pair<std::string, std::string>> config;  // sorted by key
  std::vector<std::string> sources;
  std::size_t synthetic_leading_records = 0;

  friend bool operator==(const Meta&, const Meta&) = default;
};

struct CurveDocument {
  int version = kDocumentVersion;
  std::vector<SeriesInfo> series;
  std::vector<CheckpointEntry> checkpoints;  // grouped by series, chronological within each
  std::vector<EmbeddingEntry> embeddings;
  Meta meta;

  // Throws SchemaError when an invariant of the version 1 schema is broken.
  void validate() const;
  const EmbeddingEntry* find_embedding(double alpha) const;

  friend bool operator==(const CurveDocument&, const CurveDocument&) = default;
};

// Canonical JSON: fixed key order, two-space indentation, doubles with 17
// significant digits, UTF-8 passed through.
std::string serialize(const CurveDocument& doc);
CurveDocument deserialize(std::string_view json);

CurveDocument read_document(const std::string& path);
void write_document(const std::string& path, const CurveDocument& doc);

struct BezierSegment {
  projection::Point start;
  projection::Point control1;
  projection::Point control2;
  projection::Point end;
};

// Catmull-Rom spline through the points in Bézier form. Tangents are
// tension * (next - previous), clamped at the ends; tension 0 gives the
// straight control polygon. Two points give one straight segment.
std::vector<BezierSegment> smooth_path(std::span<const projection::Point> points, double tension = 0.5);

// Position in [0, 1] of t within [t_min, t_max].
double time_fraction(ingest::EpochMillis t, ingest::EpochMillis t_min, ingest::EpochMillis t_max);

// Purple (start of observation) to green (end), "#rrggbb".
std::string time_color(double fraction);

// Default series colors for overlays.
std::string series_color(std::size_t series_index);

struct CurveStyle {
  double width = 900.0;
  double height = 700.0;
  double point_radius = 7.0;
  double curve_tension = 0.5;
  bool labels = true;

  void validate() const;
};

// Static SVG 1.1 rendering of one embedding: one path per series, one circle
// per checkpoint. Single-series documents color points by time; overlays by
// series. Deterministic for identical inputs.
std::string render_svg(const CurveDocument& doc, double alpha, const CurveStyle& style = {});

}  // namespace logcurves::curvedoc
