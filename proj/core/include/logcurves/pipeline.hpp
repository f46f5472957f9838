#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "logcurves/curvedoc.hpp"
#include "logcurves/distance.hpp"
#include "logcurves/events.hpp"
#include "logcurves/ingest.hpp"
#include "logcurves/projection.hpp"
#include "logcurves/templates.hpp"

namespace logcurves::pipeline {

struct PipelineConfig {
  ingest::IngestConfig ingest;
  events::EventConfig events;
  templates::ClusterConfig cluster;
  distance::DistanceConfig distance;
  projection::ProjectionConfig projection;

  void validate() const;
};

// Wall-clock seconds per stage.
struct StageTimings {
  double ingest = 0.0;
  double events = 0.0;
  double templates = 0.0;
  double distance = 0.0;
  double projection = 0.0;
  double document = 0.0;

  double total() const { return ingest + events + templates + distance + projection + document; }
  StageTimings& operator+=(const StageTimings& other);
};

struct SeriesInput {
  std::string series_id;
  std::string label;
  std::vector<ingest::RawLine> lines;
  std::vector<std::string> sources;  // file names recorded in the document
};

// Reads every path as one file of the series (file ids in argument order).
// Throws ConfigError for unreadable paths.
SeriesInput load_series(std::string series_id, std::string label, const std::vector<std::filesystem::path>& paths);

struct SeriesSummary {
  std::string series_id;
  std::size_t records = 0;
  std::size_t events = 0;
  std::size_t templates = 0;
  std::size_t synthetic_leading_records = 0;
};

struct Analysis {
  curvedoc::CurveDocument document;
  StageTimings timings;
  std::vector<SeriesSummary> summaries;
  std::vector<templates::TemplateMiner> miners;  // one per series
  distance::DistanceMatrix semantic;
  distance::MatrixStats matrix_stats;
};

struct DocumentInfo {
  // Empty: SOURCE_DATE_EPOCH if set, otherwise the latest record timestamp,
  // so that identical inputs give identical documents.
  std::string created_at;
  std::vector<std::pair<std::string, std::string>> config;  // any order
};

// ingest -> events -> templates -> distance -> projection -> document for
// one or more series embedded jointly.
Analysis analyze(std::vector<SeriesInput> series, const PipelineConfig& config, const DocumentInfo& info = {});

}  // namespace logcurves::pipeline
