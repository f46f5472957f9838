#include "logcurves/curvedoc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "logcurves/error.hpp"

namespace logcurves::curvedoc {

namespace {

using projection::Point;
using nlohmann::json;

// ---- writing -------------------------------------------------------------

void put_string(std::string& out, std::string_view s) {
  out.push_back('"');
  for (const char c : s) {
    const auto u = static_cast<unsigned char>(c);
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      default:
        if (u < 0x20) {
          out += fmt::format("\\u{:04x}", u);
        } else {
          out.push_back(c);
        }
    }
  }
  out.push_back('"');
}

void put_double(std::string& out, double v) { out += fmt::format("{:.17g}", v); }

void put_string_list(std::string& out, const std::vector<std::string>& items, std::string_view indent) {
  if (items.empty()) {
    out += "[]";
    return;
  }
  out += "[\n";
  for (std::size_t i = 0; i < items.size(); ++i) {
    out += indent;
    out += "  ";
    put_string(out, items[i]);
    if (i + 1 < items.size()) out.push_back(',');
    out.push_back('\n');
  }
  out += indent;
  out.push_back(']');
}

void put_key(std::string& out, std::string_view indent, std::string_view key) {
  out += indent;
  put_string(out, key);
  out += ": ";
}

// ---- reading -------------------------------------------------------------

const json& field(const json& object, const char* key, std::string_view where) {
  if (!object.is_object()) throw SchemaError(fmt::format("{} must be an object", where));
  const auto it = object.find(key);
  if (it == object.end()) throw SchemaError(fmt::format("{} is missing field \"{}\"", where, key));
  return *it;
}

std::string get_string(const json& object, const char* key, std::string_view where) {
  const auto& v = field(object, key, where);
  if (!v.is_string()) throw SchemaError(fmt::format("{}.{} must be a string", where, key));
  return v.get<std::string>();
}

double get_number(const json& v, std::string_view where) {
  if (!v.is_number()) throw SchemaError(fmt::format("{} must be a number", where));
  return v.get<double>();
}

std::size_t get_count(const json& object, const char* key, std::string_view where) {
  const auto& v = field(object, key, where);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw SchemaError(fmt::format("{}.{} must be a non-negative integer", where, key));
  }
  return v.get<std::size_t>();
}

const json& get_array(const json& object, const char* key, std::string_view where) {
  const auto& v = field(object, key, where);
  if (!v.is_array()) throw SchemaError(fmt::format("{}.{} must be an array", where, key));
  return v;
}

std::vector<std::string> get_string_list(const json& object, const char* key, std::string_view where) {
  std::vector<std::string> items;
  for (const auto& item : get_array(object, key, where)) {
    if (!item.is_string()) throw SchemaError(fmt::format("{}.{} must contain only strings", where, key));
    items.push_back(item.get<std::string>());
  }
  return items;
}

// ---- rendering -----------------------------------------------------------

struct Rgb {
  double r, g, b;
};

constexpr std::array<Rgb, 3> kTimeStops = {{{0x44, 0x01, 0x54}, {0x21, 0x91, 0x8c}, {0x5e, 0xc9, 0x62}}};

constexpr std::array<const char*, 8> kSeriesColors = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                      "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
constexpr std::array<const char*, 5> kDashes = {"", "10 5", "3 4", "12 4 3 4", "1 3"};

std::string escape_xml(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default:
        // XML 1.0 forbids most control characters even when escaped.
        if (static_cast<unsigned char>(c) < 0x20 && c != '\t' && c != '\n' && c != '\r') {
          out.push_back(' ');
        } else {
          out.push_back(c);
        }
    }
  }
  return out;
}

std::string num(double v) {
  auto s = fmt::format("{:.3f}", v);
  if (s == "-0.000") s = "0.000";
  return s;
}

}  // namespace

// ---- document ------------------------------------------------------------

void CurveDocument::validate() const {
  if (version != kDocumentVersion) throw SchemaError(fmt::format("unsupported document version {}", version));
  if (checkpoints.empty()) throw SchemaError("a document must contain at least one checkpoint");
  if (series.empty()) throw SchemaError("a document must declare at least one series");

  std::set<std::string> series_ids;
  for (const auto& s : series) {
    if (!series_ids.insert(s.series_id).second) throw SchemaError(fmt::format("duplicate series id {}", s.series_id));
  }
  std::map<std::string, std::pair<std::size_t, ingest::EpochMillis>> last;  // next index, last timestamp
  for (const auto& c : checkpoints) {
    if (!series_ids.contains(c.series_id)) {
      throw SchemaError(fmt::format("checkpoint refers to unknown series {}", c.series_id));
    }
    auto [it, fresh] = last.try_emplace(c.series_id, 0, c.timestamp);
    if (c.index != it->second.first) {
      throw SchemaError(fmt::format("series {}: checkpoint index {} out of sequence", c.series_id, c.index));
    }
    if (!fresh && c.timestamp < it->second.second) {
      throw SchemaError(fmt::format("series {}: checkpoint {} is not chronological", c.series_id, c.index));
    }
    it->second = {c.index + 1, c.timestamp};
  }
  for (const auto& e : embeddings) {
    if (!(e.alpha >= 0.0 && e.alpha <= 1.0)) throw SchemaError(fmt::format("alpha {} outside [0, 1]", e.alpha));
    if (e.points.size() != checkpoints.size()) {
      throw SchemaError(fmt::format("embedding for alpha {} has {} points for {} checkpoints", e.alpha,
                                    e.points.size(), checkpoints.size()));
    }
    const bool finite = std::isfinite(e.stress) && (!e.r_squared || std::isfinite(*e.r_squared)) &&
                        std::all_of(e.points.begin(), e.points.end(),
                                    [](const Point& p) { return std::isfinite(p.x) && std::isfinite(p.y); });
    if (!finite) throw SchemaError(fmt::format("embedding for alpha {} has non-finite values", e.alpha));
  }
  for (std::size_t i = 1; i < meta.config.size(); ++i) {
    if (!(meta.config[i - 1].first < meta.config[i].first)) {
      throw SchemaError("meta.config keys must be unique and sorted");
    }
  }
}

const EmbeddingEntry* CurveDocument::find_embedding(double alpha) const {
  for (const auto& e : embeddings) {
    if (std::abs(e.alpha - alpha) <= 1e-12) return &e;
  }
  return nullptr;
}

std::string serialize(const CurveDocument& doc) {
  doc.validate();
  std::string out;
  out += "{\n";
  put_key(out, "  ", "version");
  out += fmt::format("{},\n", doc.version);

  put_key(out, "  ", "series");
  out += "[\n";
  for (std::size_t i = 0; i < doc.series.size(); ++i) {
    const auto& s = doc.series[i];
    out += "    {";
    put_string(out, "series_id");
    out += ": ";
    put_string(out, s.series_id);
    out += ", ";
    put_string(out, "label");
    out += ": ";
    put_string(out, s.label);
    out += ", ";
    put_string(out, "color_hint");
    out += ": ";
    put_string(out, s.color_hint);
    out += i + 1 < doc.series.size() ? "},\n" : "}\n";
  }
  out += "  ],\n";

  put_key(out, "  ", "checkpoints");
  out += "[\n";
  for (std::size_t i = 0; i < doc.checkpoints.size(); ++i) {
    const auto& c = doc.checkpoints[i];
    out += "    {\n";
    put_key(out, "      ", "index");
    out += fmt::format("{},\n", c.index);
    put_key(out, "      ", "series_id");
    put_string(out, c.series_id);
    out += ",\n";
    put_key(out, "      ", "timestamp");
    out += fmt::format("{},\n", c.timestamp);
    put_key(out, "      ", "record_count");
    out += fmt::format("{},\n", c.record_count);
    put_key(out, "      ", "template_texts");
    put_string_list(out, c.template_texts, "      ");
    out += ",\n";
    put_key(out, "      ", "annotations");
    put_string_list(out, c.annotations, "      ");
    out += i + 1 < doc.checkpoints.size() ? "\n    },\n" : "\n    }\n";
  }
  out += "  ],\n";

  put_key(out, "  ", "embeddings");
  out += doc.embeddings.empty() ? "[" : "[\n";
  for (std::size_t i = 0; i < doc.embeddings.size(); ++i) {
    const auto& e = doc.embeddings[i];
    out += "    {\n";
    put_key(out, "      ", "alpha");
    put_double(out, e.alpha);
    out += ",\n";
    put_key(out, "      ", "stress");
    put_double(out, e.stress);
    out += ",\n";
    put_key(out, "      ", "r_squared");
    if (e.r_squared) {
      put_double(out, *e.r_squared);
    } else {
      out += "null";
    }
    out += ",\n";
    put_key(out, "      ", "points");
    out += "[\n";
    for (std::size_t p = 0; p < e.points.size(); ++p) {
      out += "        [";
      put_double(out, e.points[p].x);
      out += ", ";
      put_double(out, e.points[p].y);
      out += p + 1 < e.points.size() ? "],\n" : "]\n";
    }
    out += "      ]\n";
    out += i + 1 < doc.embeddings.size() ? "    },\n" : "    }\n";
  }
  out += doc.embeddings.empty() ? "],\n" : "  ],\n";

  put_key(out, "  ", "meta");
  out += "{\n";
  put_key(out, "    ", "created_at");
  put_string(out, doc.meta.created_at);
  out += ",\n";
  put_key(out, "    ", "config");
  if (doc.meta.config.empty()) {
    out += "{}";
  } else {
    out += "{\n";
    for (std::size_t i = 0; i < doc.meta.config.size(); ++i) {
      put_key(out, "      ", doc.meta.config[i].first);
      put_string(out, doc.meta.config[i].second);
      out += i + 1 < doc.meta.config.size() ? ",\n" : "\n";
    }
    out += "    }";
  }
  out += ",\n";
  put_key(out, "    ", "sources");
  put_string_list(out, doc.meta.sources, "    ");
  out += ",\n";
  put_key(out, "    ", "synthetic_leading_records");
  out += fmt::format("{}\n", doc.meta.synthetic_leading_records);
  out += "  }\n}\n";
  return out;
}

CurveDocument deserialize(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw SchemaError(fmt::format("not valid JSON: {}", e.what()));
  }

  CurveDocument doc;
  try {
    const auto& version = field(root, "version", "document");
    if (!version.is_number_integer()) throw SchemaError("document.version must be an integer");
    doc.version = version.get<int>();
    if (doc.version != kDocumentVersion) throw SchemaError(fmt::format("unsupported document version {}", doc.version));

    for (const auto& s : get_array(root, "series", "document")) {
      doc.series.push_back({get_string(s, "series_id", "series"), get_string(s, "label", "series"),
                            get_string(s, "color_hint", "series")});
    }
    for (const auto& c : get_array(root, "checkpoints", "document")) {
      CheckpointEntry entry;
      entry.index = get_count(c, "index", "checkpoint");
      entry.series_id = get_string(c, "series_id", "checkpoint");
      const auto& ts = field(c, "timestamp", "checkpoint");
      if (!ts.is_number_integer()) throw SchemaError("checkpoint.timestamp must be an integer");
      entry.timestamp = ts.get<ingest::EpochMillis>();
      entry.record_count = get_count(c, "record_count", "checkpoint");
      entry.template_texts = get_string_list(c, "template_texts", "checkpoint");
      entry.annotations = get_string_list(c, "annotations", "checkpoint");
      doc.checkpoints.push_back(std::move(entry));
    }
    for (const auto& e : get_array(root, "embeddings", "document")) {
      EmbeddingEntry entry;
      entry.alpha = get_number(field(e, "alpha", "embedding"), "embedding.alpha");
      entry.stress = get_number(field(e, "stress", "embedding"), "embedding.stress");
      const auto& r2 = field(e, "r_squared", "embedding");
      if (!r2.is_null()) entry.r_squared = get_number(r2, "embedding.r_squared");
      for (const auto& p : get_array(e, "points", "embedding")) {
        if (!p.is_array() || p.size() != 2) throw SchemaError("embedding points must be [x, y] pairs");
        entry.points.push_back({get_number(p[0], "point.x"), get_number(p[1], "point.y")});
      }
      doc.embeddings.push_back(std::move(entry));
    }
    const auto& meta = field(root, "meta", "document");
    doc.meta.created_at = get_string(meta, "created_at", "meta");
    const auto& config = field(meta, "config", "meta");
    if (!config.is_object()) throw SchemaError("meta.config must be an object");
    for (const auto& [key, value] : config.items()) {
      if (!value.is_string()) throw SchemaError(fmt::format("meta.config.{} must be a string", key));
      doc.meta.config.emplace_back(key, value.get<std::string>());
    }
    std::sort(doc.meta.config.begin(), doc.meta.config.end());
    doc.meta.sources = get_string_list(meta, "sources", "meta");
    doc.meta.synthetic_leading_records = get_count(meta, "synthetic_leading_records", "meta");
  } catch (const json::exception& e) {
    throw SchemaError(fmt::format("malformed document: {}", e.what()));
  }
  doc.validate();
  return doc;
}

CurveDocument read_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read {}", path));
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(text);
}

void write_document(const std::string& path, const CurveDocument& doc) {
  const auto text = serialize(doc);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path));
  out << text;
  if (!out) throw ConfigError(fmt::format("failed writing {}", path));
}

// ---- geometry ------------------------------------------------------------

std::vector<BezierSegment> smooth_path(std::span<const Point> points, double tension) {
  std::vector<BezierSegment> segments;
  if (points.size() < 2) return segments;
  const auto n = points.size();
  const auto tangent = [&](std::size_t i) {
    const Point& prev = points[i == 0 ? 0 : i - 1];
    const Point& next = points[i + 1 == n ? n - 1 : i + 1];
    return Point{tension * (next.x - prev.x), tension * (next.y - prev.y)};
  };
  segments.reserve(n - 1);
  Point m0 = tangent(0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Point m1 = tangent(i + 1);
    const Point& p0 = points[i];
    const Point& p1 = points[i + 1];
    segments.push_back({p0, {p0.x + m0.x / 3.0, p0.y + m0.y / 3.0}, {p1.x - m1.x / 3.0, p1.y - m1.y / 3.0}, p1});
    m0 = m1;
  }
  return segments;
}

double time_fraction(ingest::EpochMillis t, ingest::EpochMillis t_min, ingest::EpochMillis t_max) {
  if (t_max <= t_min) return 0.0;
  const double f = static_cast<double>(t - t_min) / static_cast<double>(t_max - t_min);
  return std::clamp(f, 0.0, 1.0);
}

std::string time_color(double fraction) {
  const double f = std::clamp(fraction, 0.0, 1.0) * static_cast<double>(kTimeStops.size() - 1);
  const auto lo = std::min(static_cast<std::size_t>(f), kTimeStops.size() - 2);
  const double w = f - static_cast<double>(lo);
  const auto mix = [&](double a, double b) { return static_cast<int>(std::lround(a + (b - a) * w)); };
  const auto& a = kTimeStops[lo];
  const auto& b = kTimeStops[lo + 1];
  return fmt::format("#{:02x}{:02x}{:02x}", mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b));
}

std::string series_color(std::size_t series_index) { return kSeriesColors[series_index % kSeriesColors.size()]; }

void CurveStyle::validate() const {
  if (!(curve_tension >= 0.0 && curve_tension <= 1.0)) {
    throw ConfigError(fmt::format("curve tension must lie in [0, 1], got {}", curve_tension));
  }
  if (!(width > 0.0 && height > 0.0)) throw ConfigError("SVG width and height must be positive");
  if (!(point_radius > 0.0)) throw ConfigError("point radius must be positive");
}

std::string render_svg(const CurveDocument& doc, double alpha, const CurveStyle& style) {
  style.validate();
  doc.validate();
  const auto* embedding = doc.find_embedding(alpha);
  if (embedding == nullptr) throw ConfigError(fmt::format("document has no embedding for alpha {}", alpha));
  const auto& points = embedding->points;

  double min_x = points[0].x, max_x = points[0].x, min_y = points[0].y, max_y = points[0].y;
  for (const auto& p : points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double span_x = max_x - min_x, span_y = max_y - min_y;
  const double inner_w = style.width * 0.9, inner_h = style.height * 0.9;
  double scale = 1.0;
  if (span_x > 0.0 || span_y > 0.0) {
    scale = std::min(span_x > 0.0 ? inner_w / span_x : INFINITY, span_y > 0.0 ? inner_h / span_y : INFINITY);
  }
  const double cx = (min_x + max_x) / 2.0, cy = (min_y + max_y) / 2.0;
  const auto screen = [&](const Point& p) {
    return Point{style.width / 2.0 + (p.x - cx) * scale, style.height / 2.0 - (p.y - cy) * scale};
  };

  ingest::EpochMillis t_min = doc.checkpoints[0].timestamp, t_max = t_min;
  std::size_t max_count = 0;
  for (const auto& c : doc.checkpoints) {
    t_min = std::min(t_min, c.timestamp);
    t_max = std::max(t_max, c.timestamp);
    max_count = std::max(max_count, c.record_count);
  }
  const double log_max = std::log1p(static_cast<double>(max_count));
  const auto radius = [&](std::size_t count) {
    const double share = log_max > 0.0 ? std::log1p(static_cast<double>(count)) / log_max : 1.0;
    return style.point_radius * (0.4 + 0.6 * share);
  };
  const bool overlay = doc.series.size() > 1;

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\">\n",
      num(style.width), num(style.height));
  const std::string fit = embedding->r_squared ? fmt::format("{:.4f}", *embedding->r_squared) : "undefined";
  out += fmt::format("<title>Time Curve, alpha={}, stress={:.4f}, R2={}</title>\n", fmt::format("{:g}", alpha),
                     embedding->stress, fit);
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", num(style.width),
                     num(style.height));

  for (std::size_t s = 0; s < doc.series.size(); ++s) {
    const auto& series = doc.series[s];
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < doc.checkpoints.size(); ++i) {
      if (doc.checkpoints[i].series_id == series.series_id) members.push_back(i);
    }
    if (members.empty()) continue;
    std::vector<Point> screen_points;
    for (const auto i : members) screen_points.push_back(screen(points[i]));

    const std::string stroke = overlay ? (series.color_hint.empty() ? series_color(s) : series.color_hint) : "#606060";
    out += fmt::format("<g class=\"series\" data-series=\"{}\">\n", escape_xml(series.series_id));
    out += fmt::format("<title>{}</title>\n", escape_xml(series.label.empty() ? series.series_id : series.label));

    std::string d = fmt::format("M {} {}", num(screen_points[0].x), num(screen_points[0].y));
    for (const auto& seg : smooth_path(screen_points, style.curve_tension)) {
      d += fmt::format(" C {} {} {} {} {} {}", num(seg.control1.x), num(seg.control1.y), num(seg.control2.x),
                       num(seg.control2.y), num(seg.end.x), num(seg.end.y));
    }
    const char* dash = kDashes[s % kDashes.size()];
    out += fmt::format("<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{} stroke-linecap=\"round\"/>\n", d,
                       stroke, *dash ? fmt::format(" stroke-dasharray=\"{}\"", dash) : std::string());

    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto& c = doc.checkpoints[members[k]];
      const std::string fill = overlay ? stroke : time_color(time_fraction(c.timestamp, t_min, t_max));
      out += fmt::format(
          "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\" fill-opacity=\"0.85\" stroke=\"#202020\" "
          "stroke-width=\"0.5\"><title>{} #{} {} ({} records)</title></circle>\n",
          num(screen_points[k].x), num(screen_points[k].y), num(radius(c.record_count)), fill,
          escape_xml(c.series_id), c.index, ingest::format_iso8601(c.timestamp), c.record_count);
      if (style.labels) {
        out += fmt::format(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#303030\">{}</text>\n",
            num(screen_points[k].x + radius(c.record_count) + 2.0), num(screen_points[k].y - 2.0), c.index);
      }
    }
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace logcurves::curvedoc
