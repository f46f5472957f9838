#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "logcurves/ingest.hpp"

namespace logcurves::events {

struct EventConfig {
  std::size_t target_points = 60;
  std::size_t k_gaps = 10;
  std::size_t window_length = 8;
  double window_decay = 0.5;  // w_j proportional to decay^j
  double severity_threshold = 32.0;

  // Throws ConfigError on invalid combinations.
  void validate() const;
  std::vector<double> window() const;
};

enum class Trigger : std::uint8_t { kStreamStart, kSizeLimit, kTimeGap, kSeverityRise, kSeverityFall };

std::string_view to_string(Trigger trigger);

struct Event {
  std::size_t begin = 0;  // record range [begin, end)
  std::size_t end = 0;
  ingest::EpochMillis start_timestamp = 0;
  Trigger trigger = Trigger::kStreamStart;

  std::size_t size() const { return end - begin; }
};

enum class ChangeKind : std::uint8_t { kRise, kFall };

struct ChangePoint {
  std::size_t index = 0;
  ChangeKind kind = ChangeKind::kRise;

  friend bool operator==(const ChangePoint&, const ChangePoint&) = default;
};

// max(1, ceil(n / target_points)).
std::size_t max_event_size(std::size_t record_count, std::size_t target_points);

// Indices i (sorted ascending) such that the gap t[i] - t[i-1] is one of the k
// largest. While the (k+1)-th largest gap equals the k-th, k is decremented;
// all-equal gaps therefore yield an empty result.
std::vector<std::size_t> k_largest_gap_positions(std::span<const ingest::EpochMillis> timestamps,
                                                 std::size_t k);

// Causal convolution f_i = sum_j w_j * s_{i-j}, renormalized over the valid
// taps near the start of the sequence.
std::vector<double> smooth_severity(std::span<const int> levels, std::span<const double> window);

// Threshold crossings of f. Index 0 is never a change point.
std::vector<ChangePoint> severity_change_points(std::span<const double> smoothed, double threshold);

std::vector<Event> segment(std::span<const ingest::LogRecord> records, const EventConfig& config);

}  // namespace logcurves::events
