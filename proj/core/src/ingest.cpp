#include "logcurves/ingest.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "logcurves/error.hpp"

namespace logcurves::ingest {

namespace {

constexpr std::array<std::string_view, 12> kMonthNames = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                          "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_alnum(char c) { return is_digit(c) || is_alpha(c); }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// Reads exactly `count` digits at `pos`.
std::optional<int> digits(std::string_view s, std::size_t pos, std::size_t count) {
  if (pos + count > s.size()) return std::nullopt;
  int value = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const char c = s[pos + i];
    if (!is_digit(c)) return std::nullopt;
    value = value * 10 + (c - '0');
  }
  return value;
}

bool literal(std::string_view s, std::size_t pos, char c) { return pos < s.size() && s[pos] == c; }

bool ends_cleanly(std::string_view s, std::size_t end) { return end >= s.size() || !is_digit(s[end]); }

bool valid_date(int year, int month, int day) {
  if (month < 1 || month > 12 || day < 1 || day > 31) return false;
  return std::chrono::year_month_day{std::chrono::year{year} / static_cast<unsigned>(month) /
                                     static_cast<unsigned>(day)}
      .ok();
}
bool valid_time(int hour, int minute, int second) {
  return hour >= 0 && hour <= 23 && minute >= 0 && minute <= 59 && second >= 0 && second <= 60;
}

std::optional<int> month_from_name(std::string_view s, std::size_t pos) {
  if (pos + 3 > s.size()) return std::nullopt;
  const auto name = s.substr(pos, 3);
  for (std::size_t i = 0; i < kMonthNames.size(); ++i) {
    if (name == kMonthNames[i]) return static_cast<int>(i) + 1;
  }
  return std::nullopt;
}

// Fractional seconds: 1..9 digits, returned as milliseconds (truncated).
std::optional<std::pair<int, std::size_t>> fraction_millis(std::string_view s, std::size_t pos) {
  std::size_t end = pos;
  while (end < s.size() && is_digit(s[end]) && end - pos < 9) ++end;
  if (end == pos) return std::nullopt;
  int millis = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    millis *= 10;
    if (pos + i < end) millis += s[pos + i] - '0';
  }
  return std::pair{millis, end};
}

// "Z", "+hh:mm", "+hhmm", "+hh". Returns the offset in minutes and the end.
std::optional<std::pair<int, std::size_t>> zone_offset(std::string_view s, std::size_t pos) {
  if (literal(s, pos, 'Z')) return std::pair{0, pos + 1};
  if (!literal(s, pos, '+') && !literal(s, pos, '-')) return std::nullopt;
  const int sign = s[pos] == '-' ? -1 : 1;
  const auto hours = digits(s, pos + 1, 2);
  if (!hours || *hours > 23) return std::nullopt;
  std::size_t end = pos + 3;
  int minutes = 0;
  if (literal(s, end, ':')) {
    const auto m = digits(s, end + 1, 2);
    if (!m || *m > 59) return std::nullopt;
    minutes = *m;
    end += 3;
  } else if (const auto m = digits(s, end, 2)) {
    if (*m > 59) return std::nullopt;
    minutes = *m;
    end += 2;
  }
  return std::pair{sign * (*hours * 60 + minutes), end};
}

struct Parsed {
  EpochMillis ms;
  std::size_t end;
};

std::optional<Parsed> match_iso(std::string_view s, std::size_t p) {
  const auto year = digits(s, p, 4);
  if (!year || !literal(s, p + 4, '-')) return std::nullopt;
  const auto month = digits(s, p + 5, 2);
  if (!month || !literal(s, p + 7, '-')) return std::nullopt;
  const auto day = digits(s, p + 8, 2);
  if (!day || !(literal(s, p + 10, 'T') || literal(s, p + 10, ' '))) return std::nullopt;
  const auto hour = digits(s, p + 11, 2);
  if (!hour || !literal(s, p + 13, ':')) return std::nullopt;
  const auto minute = digits(s, p + 14, 2);
  if (!minute || !literal(s, p + 16, ':')) return std::nullopt;
  const auto second = digits(s, p + 17, 2);
  if (!second || !valid_date(*year, *month, *day) || !valid_time(*hour, *minute, *second)) return std::nullopt;
  std::size_t end = p + 19;
  int millis = 0;
  if (literal(s, end, '.') || literal(s, end, ',')) {
    if (const auto frac = fraction_millis(s, end + 1)) {
      millis = frac->first;
      end = frac->second;
    }
  }
  int offset_minutes = 0;
  if (const auto zone = zone_offset(s, end)) {
    offset_minutes = zone->first;
    end = zone->second;
  }
  if (!ends_cleanly(s, end)) return std::nullopt;
  return Parsed{to_epoch_ms(*year, *month, *day, *hour, *minute, *second, millis) -
                    static_cast<EpochMillis>(offset_minutes) * 60'000,
                end};
}

std::optional<Parsed> match_short(std::string_view s, std::size_t p) {
  const auto yy = digits(s, p, 2);
  if (!yy || !literal(s, p + 2, '-')) return std::nullopt;
  const auto month = digits(s, p + 3, 2);
  if (!month || !literal(s, p + 5, '-')) return std::nullopt;
  const auto day = digits(s, p + 6, 2);
  if (!day || !literal(s, p + 8, ' ')) return std::nullopt;
  const auto hour = digits(s, p + 9, 2);
  if (!hour || !literal(s, p + 11, ':')) return std::nullopt;
  const auto minute = digits(s, p + 12, 2);
  if (!minute) return std::nullopt;
  std::size_t end = p + 14;
  int second = 0;
  if (literal(s, end, ':')) {
    if (const auto sec = digits(s, end + 1, 2)) {
      second = *sec;
      end += 3;
    }
  }
  const int year = *yy < 70 ? 2000 + *yy : 1900 + *yy;
  if (!valid_date(year, *month, *day) || !valid_time(*hour, *minute, second) || !ends_cleanly(s, end)) {
    return std::nullopt;
  }
  return Parsed{to_epoch_ms(year, *month, *day, *hour, *minute, second, 0), end};
}

std::optional<Parsed> match_syslog(std::string_view s, std::size_t p, int base_year) {
  const auto month = month_from_name(s, p);
  if (!month || !literal(s, p + 3, ' ')) return std::nullopt;
  std::size_t q = p + 4;
  std::optional<int> day;
  if (literal(s, q, ' ')) {
    day = digits(s, q + 1, 1);
    q += 2;
  } else if ((day = digits(s, q, 2))) {
    q += 2;
  } else if ((day = digits(s, q, 1))) {
    q += 1;
  }
  if (!day) return std::nullopt;
  if (!literal(s, q, ' ')) return std::nullopt;
  const auto hour = digits(s, q + 1, 2);
  if (!hour || !literal(s, q + 3, ':')) return std::nullopt;
  const auto minute = digits(s, q + 4, 2);
  if (!minute || !literal(s, q + 6, ':')) return std::nullopt;
  const auto second = digits(s, q + 7, 2);
  std::size_t end = q + 9;
  if (!second || !valid_date(base_year, *month, *day) || !valid_time(*hour, *minute, *second) ||
      !ends_cleanly(s, end)) {
    return std::nullopt;
  }
  return Parsed{to_epoch_ms(base_year, *month, *day, *hour, *minute, *second, 0), end};
}

std::optional<Parsed> match_month_day_millis(std::string_view s, std::size_t p, int base_year) {
  const auto month = digits(s, p, 2);
  if (!month || !literal(s, p + 2, '-')) return std::nullopt;
  const auto day = digits(s, p + 3, 2);
  if (!day || !literal(s, p + 5, ' ')) return std::nullopt;
  const auto hour = digits(s, p + 6, 2);
  if (!hour || !literal(s, p + 8, ':')) return std::nullopt;
  const auto minute = digits(s, p + 9, 2);
  if (!minute || !literal(s, p + 11, ':')) return std::nullopt;
  const auto second = digits(s, p + 12, 2);
  if (!second || !literal(s, p + 14, '.')) return std::nullopt;
  const auto millis = digits(s, p + 15, 3);
  const std::size_t end = p + 18;
  if (!millis || !valid_date(base_year, *month, *day) || !valid_time(*hour, *minute, *second) ||
      !ends_cleanly(s, end)) {
    return std::nullopt;
  }
  return Parsed{to_epoch_ms(base_year, *month, *day, *hour, *minute, *second, *millis), end};
}

std::optional<Parsed> match_epoch(std::string_view s, std::size_t p) {
  if (p != 0) return std::nullopt;
  std::size_t end = 0;
  while (end < s.size() && is_digit(s[end])) ++end;
  EpochMillis value = 0;
  for (std::size_t i = 0; i < end && i < 13; ++i) value = value * 10 + (s[i] - '0');
  if (end == 13) return Parsed{value, end};
  if (end != 10) return std::nullopt;
  value *= 1000;
  if (literal(s, end, '.')) {
    if (const auto frac = fraction_millis(s, end + 1)) {
      value += frac->first;
      end = frac->second;
    }
  }
  return Parsed{value, end};
}

// strftime-style format matcher for user-supplied patterns.
std::optional<Parsed> match_format(std::string_view s, std::size_t p, std::string_view format,
                                   int base_year) {
  int year = base_year, month = 1, day = 1, hour = 0, minute = 0, second = 0, millis = 0;
  int offset_minutes = 0;
  std::optional<EpochMillis> epoch;
  std::size_t pos = p;
  auto read_number = [&](std::size_t min_digits, std::size_t max_digits) -> std::optional<int> {
    std::size_t end = pos;
    while (end < s.size() && is_digit(s[end]) && end - pos < max_digits) ++end;
    if (end - pos < min_digits) return std::nullopt;
    const auto v = digits(s, pos, end - pos);
    pos = end;
    return v;
  };
  for (std::size_t i = 0; i < format.size(); ++i) {
    if (format[i] != '%' || i + 1 == format.size()) {
      if (!literal(s, pos, format[i])) return std::nullopt;
      ++pos;
      continue;
    }
    const char directive = format[++i];
    std::optional<int> v;
    switch (directive) {
      case 'Y':
        if (!(v = read_number(4, 4))) return std::nullopt;
        year = *v;
        break;
      case 'y':
        if (!(v = read_number(2, 2))) return std::nullopt;
        year = *v < 70 ? 2000 + *v : 1900 + *v;
        break;
      case 'm':
        if (!(v = read_number(1, 2))) return std::nullopt;
        month = *v;
        break;
      case 'd':
        if (!(v = read_number(1, 2))) return std::nullopt;
        day = *v;
        break;
      case 'H':
        if (!(v = read_number(1, 2))) return std::nullopt;
        hour = *v;
        break;
      case 'M':
        if (!(v = read_number(1, 2))) return std::nullopt;
        minute = *v;
        break;
      case 'S':
        if (!(v = read_number(1, 2))) return std::nullopt;
        second = *v;
        break;
      case 'f': {
        const auto frac = fraction_millis(s, pos);
        if (!frac) return std::nullopt;
        millis = frac->first;
        pos = frac->second;
        break;
      }
      case 'b': {
        const auto m = month_from_name(s, pos);
        if (!m) return std::nullopt;
        month = *m;
        pos += 3;
        break;
      }
      case 'z': {
        const auto zone = zone_offset(s, pos);
        if (!zone) return std::nullopt;
        offset_minutes = zone->first;
        pos = zone->second;
        break;
      }
      case 's': {
        std::size_t end = pos;
        while (end < s.size() && is_digit(s[end]) && end - pos < 12) ++end;
        if (end == pos) return std::nullopt;
        EpochMillis secs = 0;
        for (std::size_t k = pos; k < end; ++k) secs = secs * 10 + (s[k] - '0');
        epoch = secs * 1000;
        pos = end;
        break;
      }
      case '%':
        if (!literal(s, pos, '%')) return std::nullopt;
        ++pos;
        break;
      default:
        if (!literal(s, pos, directive)) return std::nullopt;
        ++pos;
    }
  }
  if (pos == p || !ends_cleanly(s, pos)) return std::nullopt;
  if (epoch) return Parsed{*epoch + millis, pos};
  if (!valid_date(year, month, day) || !valid_time(hour, minute, second)) return std::nullopt;
  return Parsed{to_epoch_ms(year, month, day, hour, minute, second, millis) -
                    static_cast<EpochMillis>(offset_minutes) * 60'000,
                pos};
}

int current_utc_year() {
  const auto today = std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now());
  return static_cast<int>(std::chrono::year_month_day{today}.year());
}

bool is_keyword_char(char c) { return is_alpha(c); }

std::string to_upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return out;
}

// Accepts "ERROR" and "Error", rejects "eRRor".
bool keyword_case_ok(std::string_view token) {
  bool all_upper = true;
  bool title = is_alpha(token.front()) && token.front() >= 'A' && token.front() <= 'Z';
  for (std::size_t i = 0; i < token.size(); ++i) {
    const bool upper = token[i] >= 'A' && token[i] <= 'Z';
    all_upper = all_upper && upper;
    if (i > 0) title = title && !upper;
  }
  return all_upper || title;
}

}  // namespace

EpochMillis to_epoch_ms(int year, int month, int day, int hour, int minute, int second, int millis) {
  using namespace std::chrono;
  const sys_days date{std::chrono::year{year} / static_cast<unsigned>(month) / static_cast<unsigned>(day)};
  const auto tp = date + hours{hour} + minutes{minute} + seconds{second} + milliseconds{millis};
  return duration_cast<milliseconds>(tp.time_since_epoch()).count();
}

std::string format_iso8601(EpochMillis ms) {
  using namespace std::chrono;
  const sys_time<milliseconds> tp{milliseconds{ms}};
  const auto day = floor<days>(tp);
  const year_month_day ymd{day};
  const hh_mm_ss hms{tp - day};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}.{:03d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     hms.hours().count(), hms.minutes().count(), hms.seconds().count(),
                     hms.subseconds().count());
}

TimestampParser::TimestampParser(IngestConfig config)
    : base_year_(config.base_year != 0 ? config.base_year : current_utc_year()),
      extra_formats_(std::move(config.extra_timestamp_patterns)) {}

std::string_view TimestampParser::pattern_name(PatternId id) {
  switch (id) {
    case kIso8601:
      return "iso8601";
    case kShortDateTime:
      return "yy-MM-dd HH:mm[:ss]";
    case kSyslog:
      return "MMM dd HH:mm:ss";
    case kMonthDayMillis:
      return "MM-dd HH:mm:ss.SSS";
    case kEpoch:
      return "epoch";
    default:
      return "custom";
  }
}

std::optional<TimestampMatch> TimestampParser::try_pattern(std::string_view line, PatternId id) const {
  const std::size_t window = std::min(line.size(), kTimestampSearchWindow);
  for (std::size_t p = 0; p < window; ++p) {
    if (p > 0 && is_alnum(line[p - 1])) continue;
    std::optional<Parsed> parsed;
    switch (id) {
      case kIso8601:
        parsed = match_iso(line, p);
        break;
      case kShortDateTime:
        parsed = match_short(line, p);
        break;
      case kSyslog:
        parsed = match_syslog(line, p, base_year_);
        break;
      case kMonthDayMillis:
        parsed = match_month_day_millis(line, p, base_year_);
        break;
      case kEpoch:
        parsed = match_epoch(line, p);
        break;
      default:
        parsed = match_format(line, p, extra_formats_[static_cast<std::size_t>(id - kBuiltinPatternCount)],
                              base_year_);
    }
    if (parsed) return TimestampMatch{parsed->ms, p, parsed->end, id};
    if (id == kEpoch) break;
  }
  return std::nullopt;
}

std::optional<TimestampMatch> TimestampParser::parse(std::string_view line,
                                                     std::optional<PatternId> hint) const {
  // Cheap rejection: every pattern needs a digit inside the window.
  const auto window = line.substr(0, std::min(line.size(), kTimestampSearchWindow + 20));
  if (std::none_of(window.begin(), window.end(), is_digit)) return std::nullopt;

  const auto count = static_cast<PatternId>(pattern_count());
  if (hint && *hint >= 0 && *hint < count) {
    if (auto m = try_pattern(line, *hint)) return m;
  }
  for (PatternId id = 0; id < count; ++id) {
    if (hint && id == *hint) continue;
    if (auto m = try_pattern(line, id)) return m;
  }
  return std::nullopt;
}

SeverityTable::SeverityTable(const std::vector<std::pair<std::string, int>>& extra) {
  for (const auto& [keyword, level] : extra) keywords_.emplace_back(to_upper(keyword), level);
  const std::pair<const char*, int> defaults[] = {
      {"TRACE", severity::kTrace},   {"DEBUG", severity::kDebug},    {"INFO", severity::kInfo},
      {"WARN", severity::kWarn},     {"WARNING", severity::kWarn},   {"ERROR", severity::kError},
      {"ERR", severity::kError},     {"FATAL", severity::kFatal},    {"CRITICAL", severity::kFatal},
      {"SEVERE", severity::kFatal},
  };
  for (const auto& [keyword, level] : defaults) keywords_.emplace_back(keyword, level);
}

std::optional<std::pair<std::size_t, std::size_t>> SeverityTable::find_keyword(
    std::string_view body) const {
  const std::size_t window = std::min(body.size(), kSeveritySearchWindow);
  std::size_t i = 0;
  while (i < window) {
    if (!is_keyword_char(body[i])) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    while (i < body.size() && is_keyword_char(body[i])) ++i;
    const bool bounded = (begin == 0 || !is_alnum(body[begin - 1])) && (i >= body.size() || !is_alnum(body[i]));
    if (!bounded || i > window) continue;
    const auto token = body.substr(begin, i - begin);
    if (!keyword_case_ok(token)) continue;
    const auto upper = to_upper(token);
    for (const auto& entry : keywords_) {
      if (entry.first == upper) return std::pair{begin, i};
    }
  }
  return std::nullopt;
}

int SeverityTable::parse(std::string_view body) const {
  const auto span = find_keyword(body);
  if (!span) return severity::kDefault;
  const auto upper = to_upper(body.substr(span->first, span->second - span->first));
  for (const auto& [keyword, level] : keywords_) {
    if (keyword == upper) return level;
  }
  return severity::kDefault;
}

std::optional<TimestampMatch> parse_timestamp(std::string_view line, std::optional<PatternId> hint) {
  static const TimestampParser parser{};
  return parser.parse(line, hint);
}

int parse_severity(std::string_view body) {
  static const SeverityTable table{};
  return table.parse(body);
}

std::vector<LogRecord> parse_file_records(std::span<const RawLine> lines, const TimestampParser& parser,
                                          const SeverityTable& severities) {
  std::vector<LogRecord> records;
  std::vector<const RawLine*> leading;
  std::optional<PatternId> hint;

  for (const auto& line : lines) {
    const std::string_view text = line.text;
    const auto match = parser.parse(text, hint);
    if (!match) {
      if (records.empty()) {
        leading.push_back(&line);
      } else {
        auto& body = records.back().body;
        body.reserve(body.size() + text.size() + 1);
        body += '\n';
        body += text;
      }
      continue;
    }
    hint = match->pattern;

    std::size_t body_begin = match->end;
    while (body_begin < text.size() && (text[body_begin] == ' ' || text[body_begin] == '\t')) ++body_begin;
    if (body_begin < text.size() &&
        (text[body_begin] == ']' || text[body_begin] == ')' || text[body_begin] == '|' ||
         text[body_begin] == ',')) {
      ++body_begin;
      while (body_begin < text.size() && (text[body_begin] == ' ' || text[body_begin] == '\t')) ++body_begin;
    }
    if (body_begin >= text.size()) {
      // Nothing but a timestamp: keep the whole line as the payload.
      body_begin = 0;
      while (is_space(text[body_begin])) ++body_begin;
    }

    LogRecord record;
    record.timestamp = match->epoch_ms;
    record.prefix.assign(text.substr(0, body_begin));
    record.body.assign(text.substr(body_begin));
    record.source = {line.file_id, line.line_number};
    records.push_back(std::move(record));
  }

  if (records.empty()) return records;

  if (!leading.empty()) {
    std::string joined;
    for (const auto* line : leading) {
      if (!joined.empty() || line != leading.front()) joined += '\n';
      joined += line->text;
    }
    std::size_t first_visible = 0;
    while (first_visible < joined.size() && is_space(joined[first_visible])) ++first_visible;
    if (first_visible == joined.size()) {
      records.front().prefix = joined + '\n' + records.front().prefix;
    } else {
      LogRecord synthetic;
      synthetic.timestamp = records.front().timestamp;
      synthetic.prefix = joined.substr(0, first_visible);
      synthetic.body = joined.substr(first_visible);
      synthetic.source = {leading.front()->file_id, leading.front()->line_number};
      synthetic.synthetic = true;
      records.insert(records.begin(), std::move(synthetic));
    }
  }

  for (auto& record : records) record.severity = severities.parse(record.body);
  return records;
}

std::vector<LogRecord> assemble_records(std::span<const RawLine> lines, const IngestConfig& config) {
  const TimestampParser parser{config};
  const SeverityTable severities{config.extra_severity_keywords};

  std::vector<LogRecord> records;
  std::size_t begin = 0;
  while (begin < lines.size()) {
    std::size_t end = begin;
    while (end < lines.size() && lines[end].file_id == lines[begin].file_id) ++end;
    auto file_records = parse_file_records(lines.subspan(begin, end - begin), parser, severities);
    if (records.empty()) {
      records = std::move(file_records);
    } else {
      records.insert(records.end(), std::make_move_iterator(file_records.begin()),
                     std::make_move_iterator(file_records.end()));
    }
    begin = end;
  }
  if (records.empty()) throw EmptyInput("no line in any input yields a timestamp");

  const auto before = [](const LogRecord& a, const LogRecord& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.source < b.source;
  };
  if (!std::is_sorted(records.begin(), records.end(), before)) {
    std::sort(records.begin(), records.end(), before);
  }
  return records;
}

std::string sanitize_utf8(std::string_view bytes) {
  const auto ascii = std::all_of(bytes.begin(), bytes.end(),
                                 [](char c) { return static_cast<unsigned char>(c) < 0x80; });
  if (ascii) return std::string(bytes);

  static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
  std::string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    const auto c = static_cast<unsigned char>(bytes[i]);
    std::size_t length = 0;
    std::uint32_t min_code = 0;
    if (c < 0x80) {
      out += static_cast<char>(c);
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      length = 2;
      min_code = 0x80;
    } else if ((c & 0xF0) == 0xE0) {
      length = 3;
      min_code = 0x800;
    } else if ((c & 0xF8) == 0xF0) {
      length = 4;
      min_code = 0x10000;
    }
    bool valid = length > 0 && i + length <= bytes.size();
    std::uint32_t code = length > 0 ? c & (0xFF >> (length + 1)) : 0;
    for (std::size_t k = 1; valid && k < length; ++k) {
      const auto cont = static_cast<unsigned char>(bytes[i + k]);
      valid = (cont & 0xC0) == 0x80;
      code = (code << 6) | (cont & 0x3F);
    }
    valid = valid && code >= min_code && code <= 0x10FFFF && !(code >= 0xD800 && code <= 0xDFFF);
    if (valid) {
      out.append(bytes.substr(i, length));
      i += length;
    } else {
      out += kReplacement;
      ++i;
    }
  }
  return out;
}

std::vector<RawLine> split_lines(std::string_view text, FileId file_id) {
  std::vector<RawLine> lines;
  std::uint64_t number = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(RawLine{file_id, ++number, std::string(line)});
    pos = end + 1;
  }
  return lines;
}

std::vector<RawLine> read_log_file(const std::filesystem::path& path, FileId file_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read log file '{}'", path.string()));
  std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw ConfigError(fmt::format("error while reading '{}'", path.string()));
  return split_lines(sanitize_utf8(bytes), file_id);
}

void write_records(std::ostream& out, std::span<const LogRecord> records) {
  for (const auto& record : records) out << format_iso8601(record.timestamp) << ' ' << record.body << '\n';
}

std::size_t count_synthetic(std::span<const LogRecord> records) {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const LogRecord& r) { return r.synthetic; }));
}

}  // namespace logcurves::ingest
