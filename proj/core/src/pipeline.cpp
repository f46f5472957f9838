#include "logcurves/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <limits>

#include <fmt/format.h>

#include "logcurves/error.hpp"

namespace logcurves::pipeline {

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double seconds = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return seconds;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string default_created_at(ingest::EpochMillis latest) {
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde != nullptr && *sde != '\0') {
    char* end = nullptr;
    const long long seconds = std::strtoll(sde, &end, 10);
    if (end != nullptr && *end == '\0' && seconds >= 0) return ingest::format_iso8601(seconds * 1000);
  }
  return ingest::format_iso8601(latest);
}

}  // namespace

void PipelineConfig::validate() const {
  events.validate();
  cluster.validate();
  distance.validate();
  projection.validate();
}

StageTimings& StageTimings::operator+=(const StageTimings& other) {
  ingest += other.ingest;
  events += other.events;
  templates += other.templates;
  distance += other.distance;
  projection += other.projection;
  document += other.document;
  return *this;
}

SeriesInput load_series(std::string series_id, std::string label, const std::vector<std::filesystem::path>& paths) {
  SeriesInput input{std::move(series_id), std::move(label), {}, {}};
  for (std::size_t f = 0; f < paths.size(); ++f) {
    auto lines = ingest::read_log_file(paths[f], static_cast<ingest::FileId>(f));
    input.lines.insert(input.lines.end(), std::make_move_iterator(lines.begin()), std::make_move_iterator(lines.end()));
    input.sources.push_back(paths[f].filename().string());
  }
  return input;
}

Analysis analyze(std::vector<SeriesInput> series, const PipelineConfig& config, const DocumentInfo& info) {
  config.validate();
  if (series.empty()) throw ConfigError("no input series");

  Analysis analysis;
  auto& timings = analysis.timings;
  templates::TemplateUniverse universe;
  std::vector<std::vector<templates::Checkpoint>> checkpoints;
  ingest::EpochMillis latest = std::numeric_limits<ingest::EpochMillis>::min();
  std::size_t synthetic = 0;

  for (auto& input : series) {
    Stopwatch clock;
    auto records = ingest::assemble_records(input.lines, config.ingest);
    input.lines = {};
    timings.ingest += clock.lap();

    const auto events = events::segment(records, config.events);
    timings.events += clock.lap();

    templates::TemplateMiner miner(config.cluster);
    auto series_checkpoints = templates::checkpoints_from_events(events, records, miner, input.series_id);
    templates::remap_to_universe(series_checkpoints, miner, universe);
    timings.templates += clock.lap();

    SeriesSummary summary;
    summary.series_id = input.series_id;
    summary.records = records.size();
    summary.events = events.size();
    summary.templates = miner.size();
    summary.synthetic_leading_records = ingest::count_synthetic(records);
    synthetic += summary.synthetic_leading_records;
    latest = std::max(latest, records.back().timestamp);
    analysis.summaries.push_back(std::move(summary));
    analysis.miners.push_back(std::move(miner));
    checkpoints.push_back(std::move(series_checkpoints));
  }

  Stopwatch clock;
  std::vector<templates::Checkpoint> all;
  for (const auto& s : checkpoints) all.insert(all.end(), s.begin(), s.end());
  analysis.semantic = distance::distance_matrix(all, universe.texts(), config.distance, &analysis.matrix_stats);
  timings.distance += clock.lap();

  std::vector<ingest::EpochMillis> timestamps;
  timestamps.reserve(all.size());
  for (const auto& c : all) timestamps.push_back(c.timestamp);
  std::vector<projection::Embedding> embeddings;
  for (const double alpha : config.projection.alphas) {
    embeddings.push_back(projection::embed(analysis.semantic, timestamps, alpha, config.projection.smacof));
  }
  timings.projection += clock.lap();

  auto& doc = analysis.document;
  for (std::size_t s = 0; s < series.size(); ++s) {
    doc.series.push_back({series[s].series_id, series[s].label, curvedoc::series_color(s)});
    doc.meta.sources.insert(doc.meta.sources.end(), series[s].sources.begin(), series[s].sources.end());
  }
  for (const auto& c : all) {
    curvedoc::CheckpointEntry entry;
    entry.index = c.index;
    entry.series_id = c.series_id;
    entry.timestamp = c.timestamp;
    entry.record_count = c.record_count;
    entry.template_texts.reserve(c.template_ids.size());
    for (const auto id : c.template_ids) entry.template_texts.push_back(universe.text(id));
    doc.checkpoints.push_back(std::move(entry));
  }
  for (auto& e : embeddings) {
    doc.embeddings.push_back({e.alpha, e.stress, e.r_squared, std::move(e.points)});
  }
  doc.meta.created_at = info.created_at.empty() ? default_created_at(latest) : info.created_at;
  doc.meta.config = info.config;
  std::sort(doc.meta.config.begin(), doc.meta.config.end());
  doc.meta.config.erase(std::unique(doc.meta.config.begin(), doc.meta.config.end(),
                                    [](const auto& a, const auto& b) { return a.first == b.first; }),
                        doc.meta.config.end());
  doc.meta.synthetic_leading_records = synthetic;
  doc.validate();
  timings.document += clock.lap();
  return analysis;
}

}  // namespace logcurves::pipeline
