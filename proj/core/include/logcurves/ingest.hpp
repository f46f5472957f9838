#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace logcurves::ingest {

using EpochMillis = std::int64_t;
using FileId = std::uint32_t;
using PatternId = int;

// Severity scale. Monotone; gaps leave room for custom levels.
namespace severity {
inline constexpr int kTrace = 10;
inline constexpr int kDebug = 20;
inline constexpr int kInfo = 30;
inline constexpr int kWarn = 40;
inline constexpr int kError = 50;
inline constexpr int kFatal = 60;
inline constexpr int kDefault = kInfo;
}  // namespace severity

// Built-in timestamp patterns, tried in this order. User patterns follow with
// ids starting at kBuiltinPatternCount.
enum BuiltinPattern : PatternId {
  kIso8601 = 0,       // 2024-01-02T03:04:05.678Z, 2024-01-02 03:04:05,678+01:00, ...
  kShortDateTime = 1,  // 23-09-12 13:01[:05]
  kSyslog = 2,         // Sep 12 13:01:05 (year from config)
  kMonthDayMillis = 3,  // 09-12 13:01:05.123 (year from config)
  kEpoch = 4,          // 10 or 13 digits at line start
  kBuiltinPatternCount = 5,
};

// Only the first kTimestampSearchWindow characters of a line are searched.
inline constexpr std::size_t kTimestampSearchWindow = 48;
// Severity keywords are looked up within this prefix of the body.
inline constexpr std::size_t kSeveritySearchWindow = 64;

struct IngestConfig {
  int base_year = 0;  // 0 means "current UTC year"
  // strftime-style formats, e.g. "%Y/%m/%d %H:%M:%S". Supported directives:
  // %Y %y %m %d %H %M %S %f %b %z %s %%; anything else matches literally.
  std::vector<std::string> extra_timestamp_patterns;
  std::vector<std::pair<std::string, int>> extra_severity_keywords;
};

struct RawLine {
  FileId file_id = 0;
  std::uint64_t line_number = 0;  // 1-based
  std::string text;
};

struct SourcePosition {
  FileId file_id = 0;
  std::uint64_t line_number = 0;

  friend bool operator==(const SourcePosition&, const SourcePosition&) = default;
  friend auto operator<=>(const SourcePosition&, const SourcePosition&) = default;
};

struct LogRecord {
  EpochMillis timestamp = 0;
  int severity = severity::kDefault;
  // Payload after the timestamp; continuation lines appended with '\n'.
  std::string body;
  // Text of the first line that precedes `body`, so prefix + body reproduces
  // the original lines exactly.
  std::string prefix;
  SourcePosition source;
  // Set for the record collecting timestamp-less lines at the start of a file.
  bool synthetic = false;
};

struct TimestampMatch {
  EpochMillis epoch_ms = 0;
  std::size_t begin = 0;  // matched span [begin, end) within the line
  std::size_t end = 0;
  PatternId pattern = kIso8601;
};

class TimestampParser {
 public:
  explicit TimestampParser(IngestConfig config = {});

  // First pattern (hint first, then the ordered list) that matches within the
  // search window. std::nullopt marks a continuation line.
  std::optional<TimestampMatch> parse(std::string_view line,
                                      std::optional<PatternId> hint = std::nullopt) const;

  std::size_t pattern_count() const { return kBuiltinPatternCount + extra_formats_.size(); }
  static std::string_view pattern_name(PatternId id);

 private:
  std::optional<TimestampMatch> try_pattern(std::string_view line, PatternId id) const;

  int base_year_;
  std::vector<std::string> extra_formats_;
};

class SeverityTable {
 public:
  explicit SeverityTable(const std::vector<std::pair<std::string, int>>& extra = {});

  // Level of the first whole-token keyword in the first 64 characters,
  // written in upper case or title case; severity::kDefault when none matches.
  int parse(std::string_view body) const;

  // Span of the keyword that determined parse(), if any.
  std::optional<std::pair<std::size_t, std::size_t>> find_keyword(std::string_view body) const;

 private:
  std::vector<std::pair<std::string, int>> keywords_;  // upper-cased
};

std::optional<TimestampMatch> parse_timestamp(std::string_view line,
                                              std::optional<PatternId> hint = std::nullopt);
int parse_severity(std::string_view body);

// Parses one file's lines into records (file order, not yet sorted). Lines
// without a timestamp are appended to the preceding record; leading ones form
// a synthetic record stamped with the file's first parsed timestamp. Returns
// an empty vector if no line of the file has a timestamp.
std::vector<LogRecord> parse_file_records(std::span<const RawLine> lines,
                                          const TimestampParser& parser,
                                          const SeverityTable& severities);

// Full assembly across files: per-file parsing followed by a stable sort on
// (timestamp, file_id, line_number). Throws EmptyInput if nothing parsed.
std::vector<LogRecord> assemble_records(std::span<const RawLine> lines,
                                        const IngestConfig& config = {});

// Reads a log file as UTF-8 (invalid bytes replaced by U+FFFD), one RawLine
// per line. Throws ConfigError if the file cannot be read.
std::vector<RawLine> read_log_file(const std::filesystem::path& path, FileId file_id);
std::vector<RawLine> split_lines(std::string_view text, FileId file_id);

std::string sanitize_utf8(std::string_view bytes);

// Calendar conversion used by all patterns (proleptic Gregorian, UTC).
EpochMillis to_epoch_ms(int year, int month, int day, int hour, int minute, int second,
                        int millis);

// "2024-01-02T03:04:05.678Z"
std::string format_iso8601(EpochMillis ms);

// One record per entry as "<ISO-8601 timestamp> <body>"; ingesting this text
// again reproduces the same timestamps, severities and bodies.
void write_records(std::ostream& out, std::span<const LogRecord> records);

std::size_t count_synthetic(std::span<const LogRecord> records);

}  // namespace logcurves::ingest
