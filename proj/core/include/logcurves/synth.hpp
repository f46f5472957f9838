#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "logcurves/ingest.hpp"

// Seeded log generators with ground truth, used by tests, benchmarks and the
// `generate` command. Every line carries an ISO-8601 timestamp, so line i is
// record i after ingestion.
namespace logcurves::synth {

struct SyntheticLog {
  std::vector<std::string> lines;
  std::vector<std::string> labels;  // ground-truth phase per line
};

std::vector<ingest::RawLine> to_raw_lines(const SyntheticLog& log, ingest::FileId file_id = 0);
void write_log(std::ostream& out, const SyntheticLog& log);

// Application log with `templates` distinct message shapes, mean line length
// close to `line_length`.
struct ThroughputSpec {
  std::size_t lines = 1'000'000;
  std::size_t templates = 100;
  std::size_t line_length = 120;
  std::uint64_t seed = 1;
};
SyntheticLog throughput_log(const ThroughputSpec& spec);

// INFO/DEBUG background with ERROR bursts at a fixed period and a few
// planted pauses much longer than any background gap.
struct BurstSpec {
  std::size_t records = 10'000;
  std::size_t bursts = 5;
  ingest::EpochMillis burst_period_ms = 12 * 60 * 1000;
  std::size_t burst_length = 25;
  std::size_t long_gaps = 5;
  std::uint64_t seed = 1;
};
struct BurstLog {
  SyntheticLog log;
  std::vector<std::size_t> burst_starts;  // line of the first ERROR of each burst
  std::vector<std::size_t> gap_starts;    // line right after each planted pause
};
BurstLog burst_log(const BurstSpec& spec);

// Alternating recovery (INFO) and failure (ERROR/WARN) phases separated by
// pauses; labels are "recovery" and "failure".
struct CycleSpec {
  std::size_t cycles = 5;
  std::size_t failure_records = 180;
  std::size_t recovery_records = 220;
  std::uint64_t seed = 1;
};
SyntheticLog failure_recovery_log(const CycleSpec& spec);

// Several runs of the same application server. All instances have the same
// phase layout and record counts; in `divergent` one phase is replaced by the
// JVM "An illegal reflective access operation has occurred" block (label
// "reflective-access").
struct OverlaySpec {
  std::size_t instances = 3;
  std::size_t divergent = 1;
  std::uint64_t seed = 1;
};
std::vector<SyntheticLog> overlay_instances(const OverlaySpec& spec);
inline constexpr const char* kReflectiveAccessLabel = "reflective-access";

}  // namespace logcurves::synth
