#include "logcurves/events.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include <fmt/format.h>

#include "logcurves/error.hpp"

namespace logcurves::events {

void EventConfig::validate() const {
  if (target_points < 1) throw ConfigError("target-points must be at least 1");
  if (window_length < 1) throw ConfigError("window-length must be at least 1");
  if (!(window_decay > 0.0) || window_decay > 1.0) {
    throw ConfigError(fmt::format("window-decay must lie in (0, 1], got {}", window_decay));
  }
  if (!(severity_threshold > ingest::severity::kDefault)) {
    throw ConfigError(fmt::format("severity-threshold must exceed the default level {}, got {}",
                                  ingest::severity::kDefault, severity_threshold));
  }
}

std::vector<double> EventConfig::window() const {
  std::vector<double> weights(window_length);
  double total = 0.0;
  double w = 1.0;
  for (auto& weight : weights) {
    weight = w;
    total += w;
    w *= window_decay;
  }
  for (auto& weight : weights) weight /= total;
  return weights;
}

std::string_view to_string(Trigger trigger) {
  switch (trigger) {
    case Trigger::kStreamStart:
      return "stream_start";
    case Trigger::kSizeLimit:
      return "size_limit";
    case Trigger::kTimeGap:
      return "time_gap";
    case Trigger::kSeverityRise:
      return "severity_rise";
    case Trigger::kSeverityFall:
      return "severity_fall";
  }
  return "unknown";
}

std::size_t max_event_size(std::size_t record_count, std::size_t target_points) {
  if (target_points == 0) return std::max<std::size_t>(1, record_count);
  return std::max<std::size_t>(1, (record_count + target_points - 1) / target_points);
}

std::vector<std::size_t> k_largest_gap_positions(std::span<const ingest::EpochMillis> timestamps,
                                                 std::size_t k) {
  if (timestamps.size() < 2 || k == 0) return {};
  std::vector<ingest::EpochMillis> gaps(timestamps.size() - 1);
  for (std::size_t i = 0; i + 1 < timestamps.size(); ++i) gaps[i] = timestamps[i + 1] - timestamps[i];

  k = std::min(k, gaps.size());
  // Only the top k+1 values matter; a partial sort keeps this O(n log k).
  auto ranked = gaps;
  const auto keep = std::min(k + 1, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(),
                    std::greater<>());
  while (k > 0 && k < ranked.size() && ranked[k] == ranked[k - 1]) --k;
  if (k == 0) return {};

  const auto cutoff = ranked[k - 1];
  std::vector<std::size_t> positions;
  positions.reserve(k);
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (gaps[i] >= cutoff) positions.push_back(i + 1);
  }
  return positions;
}

std::vector<double> smooth_severity(std::span<const int> levels, std::span<const double> window) {
  std::vector<double> smoothed(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const std::size_t taps = std::min(window.size(), i + 1);
    double sum = 0.0;
    double weight = 0.0;
    for (std::size_t j = 0; j < taps; ++j) {
      sum += window[j] * levels[i - j];
      weight += window[j];
    }
    smoothed[i] = sum / weight;
  }
  return smoothed;
}

std::vector<ChangePoint> severity_change_points(std::span<const double> smoothed, double threshold) {
  std::vector<ChangePoint> points;
  for (std::size_t i = 1; i < smoothed.size(); ++i) {
    const double before = smoothed[i - 1];
    const double now = smoothed[i];
    if (before <= threshold && now > threshold) {
      points.push_back({i, ChangeKind::kRise});
    } else if (before > threshold && now <= threshold) {
      points.push_back({i, ChangeKind::kFall});
    }
  }
  return points;
}

std::vector<Event> segment(std::span<const ingest::LogRecord> records, const EventConfig& config) {
  config.validate();
  const std::size_t n = records.size();
  if (n == 0) return {};

  const auto limit = max_event_size(n, config.target_points);

  std::vector<ingest::EpochMillis> timestamps(n);
  std::vector<int> levels(n);
  for (std::size_t i = 0; i < n; ++i) {
    timestamps[i] = records[i].timestamp;
    levels[i] = records[i].severity;
  }

  // Per-index trigger flags; precedence gap > severity > size.
  std::vector<std::uint8_t> gap_boundary(n, 0);
  for (const auto position : k_largest_gap_positions(timestamps, config.k_gaps)) gap_boundary[position] = 1;

  std::vector<Trigger> severity_boundary(n, Trigger::kStreamStart);
  std::vector<std::uint8_t> has_severity(n, 0);
  const auto window = config.window();
  const auto smoothed = smooth_severity(levels, window);
  for (const auto& point : severity_change_points(smoothed, config.severity_threshold)) {
    has_severity[point.index] = 1;
    severity_boundary[point.index] = point.kind == ChangeKind::kRise ? Trigger::kSeverityRise
                                                                      : Trigger::kSeverityFall;
  }

  std::vector<Event> events;
  events.push_back({0, 1, timestamps[0], Trigger::kStreamStart});
  for (std::size_t i = 1; i < n; ++i) {
    auto& current = events.back();
    std::optional<Trigger> trigger;
    if (gap_boundary[i]) {
      trigger = Trigger::kTimeGap;
    } else if (has_severity[i]) {
      trigger = severity_boundary[i];
    } else if (current.size() == limit) {
      trigger = Trigger::kSizeLimit;
    }
    if (trigger) {
      events.push_back({i, i + 1, timestamps[i], *trigger});
    } else {
      current.end = i + 1;
    }
  }
  return events;
}

}  // namespace logcurves::events
