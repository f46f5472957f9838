#include "logcurves/synth.hpp"

#include <algorithm>
#include <array>
#include <ostream>
#include <random>
#include <set>
#include <string_view>

#include <fmt/format.h>

#include "logcurves/error.hpp"

namespace logcurves::synth {

namespace {

// 2024-03-05T00:00:00Z
constexpr ingest::EpochMillis kEpochStart = 1'709'596'800'000;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Uniform in [0, n); modulo bias is irrelevant here and the result is
  // identical on every standard library.
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::size_t>(hi - lo + 1)));
  }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

// A shape is a level, a thread and a message whose "{n}", "{ip}", "{hex}"
// and "{uuid}" placeholders are filled per line.
struct Shape {
  const char* level;
  std::string thread;
  std::string message;
};

void fill_slot(Rng& rng, std::string_view slot, std::string& out) {
  if (slot == "n") {
    out += fmt::format("{}", rng.between(10, 99'999));
  } else if (slot == "ip") {
    out += fmt::format("10.{}.{}.{}", rng.between(0, 255), rng.between(0, 255), rng.between(1, 254));
  } else if (slot == "hex") {
    out += fmt::format("0x{:08x}", rng.between(0x1000'0000, 0x7fff'ffff));
  } else if (slot == "uuid") {
    out += fmt::format("{:08x}-{:04x}-4{:03x}-a{:03x}-{:012x}", rng.between(0, 0x7fff'ffff), rng.between(0, 0xffff),
                       rng.between(0, 0xfff), rng.between(0, 0xfff), rng.between(0, 0xffff'ffff'ffffLL));
  } else {
    out += fmt::format("{{{}}}", slot);
  }
}

std::string render(Rng& rng, ingest::EpochMillis t, const Shape& shape) {
  std::string line = fmt::format("{} {} [{}] ", ingest::format_iso8601(t), shape.level, shape.thread);
  const std::string_view message = shape.message;
  std::size_t pos = 0;
  while (pos < message.size()) {
    const auto open = message.find('{', pos);
    const auto close = open == std::string_view::npos ? open : message.find('}', open);
    if (close == std::string_view::npos) {
      line += message.substr(pos);
      break;
    }
    line += message.substr(pos, open - pos);
    fill_slot(rng, message.substr(open + 1, close - open - 1), line);
    pos = close + 1;
  }
  return line;
}

Shape parse_shape(const char* level, std::string thread, std::string_view message) {
  return {level, std::move(thread), std::string(message)};
}

std::vector<std::string> make_vocabulary(Rng& rng, std::size_t count) {
  static constexpr std::string_view kOnsets = "bcdfghjklmnprstvwz";
  static constexpr std::string_view kVowels = "aeiou";
  std::set<std::string> seen;
  std::vector<std::string> words;
  while (words.size() < count) {
    std::string word;
    const auto syllables = 2 + rng.below(3);
    for (std::size_t s = 0; s < syllables; ++s) {
      word.push_back(kOnsets[rng.below(kOnsets.size())]);
      word.push_back(kVowels[rng.below(kVowels.size())]);
    }
    if (rng.below(2) == 0) word.push_back(kOnsets[rng.below(kOnsets.size())]);
    if (seen.insert(word).second) words.push_back(std::move(word));
  }
  return words;
}

// Draws from a pool so that every run of `pool` consecutive draws is a
// permutation: each window of a phase sees its whole vocabulary.
class Bag {
 public:
  Bag(Rng& rng, std::size_t size) : rng_(rng), order_(size), next_(size) {
    for (std::size_t i = 0; i < size; ++i) order_[i] = i;
  }
  std::size_t draw() {
    if (next_ == order_.size()) {
      for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng_.below(i)]);
      next_ = 0;
    }
    return order_[next_++];
  }

 private:
  Rng& rng_;
  std::vector<std::size_t> order_;
  std::size_t next_;
};

std::string worker(Rng& rng) { return fmt::format("worker-{}", rng.between(10, 40)); }

}  // namespace

std::vector<ingest::RawLine> to_raw_lines(const SyntheticLog& log, ingest::FileId file_id) {
  std::vector<ingest::RawLine> lines;
  lines.reserve(log.lines.size());
  for (std::size_t i = 0; i < log.lines.size(); ++i) lines.push_back({file_id, i + 1, log.lines[i]});
  return lines;
}

void write_log(std::ostream& out, const SyntheticLog& log) {
  for (const auto& line : log.lines) out << line << '\n';
}

SyntheticLog throughput_log(const ThroughputSpec& spec) {
  if (spec.templates == 0) throw ConfigError("at least one template is required");
  Rng rng(spec.seed);
  const auto vocabulary = make_vocabulary(rng, std::max<std::size_t>(600, spec.templates * 3));

  // ISO timestamp, level and thread take about 42 characters; the last token
  // overshoots by about 5.
  const std::size_t body_target = spec.line_length > 60 ? spec.line_length - 47 : 13;
  std::vector<Shape> shapes;
  std::set<std::string> messages;
  while (shapes.size() < spec.templates) {
    // No WARN or ERROR: every isolated one would open two severity events.
    static constexpr std::array<const char*, 5> kLevels = {"INFO", "INFO", "INFO", "INFO", "DEBUG"};
    const auto target = body_target - body_target / 4 + rng.below(body_target / 2 + 1);
    std::string message;
    std::size_t expanded = 0;  // rendered length estimate
    while (expanded < target) {
      if (!message.empty()) {
        message.push_back(' ');
        ++expanded;
      }
      const auto roll = rng.below(10);
      if (message.empty()) {
        // Distinct leading words keep shapes apart in the parse tree.
        const auto& word = vocabulary[shapes.size() % vocabulary.size()];
        message += word;
        expanded += word.size();
      } else if (roll < 7) {
        const auto& word = vocabulary[rng.below(vocabulary.size())];
        message += word;
        expanded += word.size();
      } else if (roll == 7) {
        const auto& word = vocabulary[rng.below(vocabulary.size())];
        message += word + "={n}";
        expanded += word.size() + 6;
      } else if (roll == 8) {
        const bool ip = rng.below(4) == 0;
        message += ip ? "{ip}" : "{n}";
        expanded += ip ? 12 : 5;
      } else {
        const bool uuid = rng.below(3) == 0;
        message += uuid ? "{uuid}" : "{hex}";
        expanded += uuid ? 36 : 10;
      }
    }
    if (messages.insert(message).second) shapes.push_back({kLevels[rng.below(kLevels.size())], "", message});
  }

  SyntheticLog log;
  log.lines.reserve(spec.lines);
  ingest::EpochMillis t = kEpochStart;
  for (std::size_t i = 0; i < spec.lines; ++i) {
    t += rng.between(0, 9);
    auto& shape = shapes[rng.below(shapes.size())];
    shape.thread = worker(rng);
    log.lines.push_back(render(rng, t, shape));
  }
  return log;
}

BurstLog burst_log(const BurstSpec& spec) {
  if (spec.bursts * spec.burst_length >= spec.records) throw ConfigError("bursts leave no room for background records");
  Rng rng(spec.seed);
  const std::vector<Shape> background = {
      parse_shape("INFO", "http-1", "GET /api/orders/{n} completed status=200 bytes={n}"),
      parse_shape("INFO", "http-2", "POST /api/cart user={n} items={n} accepted"),
      parse_shape("INFO", "scheduler", "job refresh-prices started run={n}"),
      parse_shape("INFO", "scheduler", "job refresh-prices finished run={n} took={n}"),
      parse_shape("INFO", "db", "query plan cache hit ratio={n} entries={n}"),
      parse_shape("INFO", "session", "session {uuid} opened from {ip}"),
      parse_shape("INFO", "session", "session {uuid} closed after={n}"),
      parse_shape("DEBUG", "pool", "connection {hex} returned to pool size={n}"),
      parse_shape("DEBUG", "pool", "connection {hex} validated in={n}"),
      parse_shape("DEBUG", "cache", "evicted key segment={n} reason expired"),
  };
  const std::vector<Shape> failures = {
      parse_shape("ERROR", "db", "connection to {ip} refused retry={n}"),
      parse_shape("ERROR", "http-1", "GET /api/orders/{n} failed with upstream timeout"),
      parse_shape("ERROR", "pool", "pool exhausted waiting threads={n}"),
      parse_shape("ERROR", "session", "session {uuid} aborted by transaction rollback"),
  };

  const std::size_t background_count = spec.records - spec.bursts * spec.burst_length;
  const auto period = spec.burst_period_ms;
  const double mean_spacing = static_cast<double>(period * static_cast<ingest::EpochMillis>(spec.bursts)) /
                              static_cast<double>(background_count);
  const auto lo = static_cast<std::int64_t>(mean_spacing * 0.5);
  const auto hi = static_cast<std::int64_t>(mean_spacing * 1.5);

  BurstLog out;
  auto& log = out.log;
  ingest::EpochMillis t = kEpochStart;
  std::size_t next_burst = 0, next_gap = 0;
  Bag bag(rng, background.size());
  for (std::size_t i = 0; i < background_count; ++i) {
    ingest::EpochMillis step = rng.between(lo, hi);
    // Pauses a quarter period after each burst slot boundary, bursts mid-period.
    if (next_gap < spec.long_gaps &&
        t + step >= kEpochStart + period * static_cast<ingest::EpochMillis>(next_gap) + period / 4) {
      step = 60'000 + 20'000 * static_cast<ingest::EpochMillis>(next_gap);
      out.gap_starts.push_back(log.lines.size());
      ++next_gap;
    } else if (next_burst < spec.bursts) {
      const auto burst_at = kEpochStart + period * static_cast<ingest::EpochMillis>(next_burst) + period / 2;
      if (t + step >= burst_at) {
        out.burst_starts.push_back(log.lines.size());
        for (std::size_t b = 0; b < spec.burst_length; ++b) {
          log.lines.push_back(render(rng, burst_at + 20 * static_cast<ingest::EpochMillis>(b),
                                     failures[rng.below(failures.size())]));
          log.labels.emplace_back("burst");
        }
        t = burst_at + 20 * static_cast<ingest::EpochMillis>(spec.burst_length);
        ++next_burst;
      }
    }
    t += step;
    log.lines.push_back(render(rng, t, background[bag.draw()]));
    log.labels.emplace_back("background");
  }
  if (out.burst_starts.size() != spec.bursts || out.gap_starts.size() != spec.long_gaps) {
    throw ConfigError("burst schedule does not fit into the requested record count");
  }
  return out;
}

SyntheticLog failure_recovery_log(const CycleSpec& spec) {
  Rng rng(spec.seed);
  const std::vector<Shape> recovery = {
      parse_shape("INFO", "health", "health check passed for service inventory latency={n}"),
      parse_shape("INFO", "http-1", "GET /api/items/{n} completed status=200"),
      parse_shape("INFO", "replicator", "replica {ip} in sync lag={n}"),
      parse_shape("INFO", "scheduler", "compaction finished segments={n}"),
      parse_shape("INFO", "session", "user session {uuid} authenticated"),
      parse_shape("INFO", "cache", "cache warm entries={n} hit ratio={n}"),
  };
  const std::vector<Shape> failure = {
      parse_shape("ERROR", "health", "health check failed for service inventory: connection reset"),
      parse_shape("ERROR", "http-1", "GET /api/items/{n} failed status=503"),
      parse_shape("ERROR", "replicator", "replica {ip} unreachable, marking as down"),
      parse_shape("WARN", "scheduler", "compaction postponed, disk pressure={n}"),
      parse_shape("ERROR", "session", "token validation for {uuid} timed out"),
      parse_shape("WARN", "circuit", "circuit breaker opened for backend {ip}"),
  };

  SyntheticLog log;
  ingest::EpochMillis t = kEpochStart;
  std::size_t phase = 0;
  const auto emit_phase = [&](const std::vector<Shape>& shapes, std::size_t count, const char* label) {
    if (phase > 0) t += 30'000 + 5'000 * static_cast<ingest::EpochMillis>(phase);
    Bag bag(rng, shapes.size());
    for (std::size_t i = 0; i < count; ++i) {
      t += rng.between(50, 250);
      log.lines.push_back(render(rng, t, shapes[bag.draw()]));
      log.labels.emplace_back(label);
    }
    ++phase;
  };
  for (std::size_t c = 0; c < spec.cycles; ++c) {
    emit_phase(failure, spec.failure_records, "failure");
    emit_phase(recovery, spec.recovery_records, "recovery");
  }
  return log;
}

std::vector<SyntheticLog> overlay_instances(const OverlaySpec& spec) {
  if (spec.instances < 2) throw ConfigError("an overlay needs at least two instances");
  if (spec.divergent >= spec.instances) throw ConfigError("divergent instance index out of range");

  struct Phase {
    const char* label;
    std::size_t records;
    std::vector<Shape> shapes;
  };
  const std::vector<Shape> serving = {
      parse_shape("INFO", "http-nio-8080", "GET /portal/dashboard/{n} rendered in={n}"),
      parse_shape("INFO", "http-nio-8080", "POST /portal/api/search query={n} results={n}"),
      parse_shape("INFO", "http-nio-8080", "session {uuid} refreshed for user={n}"),
      parse_shape("DEBUG", "jdbc", "statement {hex} executed rows={n}"),
      parse_shape("INFO", "audit", "document {uuid} viewed by user={n}"),
  };
  const std::vector<Phase> phases = {
      {"boot", 120,
       {parse_shape("INFO", "main", "Starting application server version={n} pid={n}"),
        parse_shape("INFO", "main", "JVM heap configured max={n} initial={n}"),
        parse_shape("INFO", "main", "Listening on {ip} port={n}"),
        parse_shape("INFO", "main", "Loaded system properties count={n}")}},
      {"config", 150,
       {parse_shape("INFO", "config", "Reading configuration file /etc/portal/app-{n}.properties"),
        parse_shape("INFO", "config", "Datasource jdbc/portal pool min={n} max={n}"),
        parse_shape("INFO", "config", "Mail relay set to {ip} port={n}"),
        parse_shape("DEBUG", "config", "Property override applied key={n}")}},
      {"plugins", 200,
       {parse_shape("INFO", "osgi", "Installing bundle com.portal.plugin.search version={n}"),
        parse_shape("INFO", "osgi", "Bundle {hex} resolved with imports={n}"),
        parse_shape("INFO", "osgi", "Started bundle com.portal.plugin.workflow in={n}"),
        parse_shape("INFO", "osgi", "Registered service component {uuid}"),
        parse_shape("DEBUG", "osgi", "Wiring bundle {hex} to package exports={n}")}},
      {"cache-warmup", 180,
       {parse_shape("INFO", "cache", "Warming region layouts entries={n}"),
        parse_shape("INFO", "cache", "Warming region permissions entries={n}"),
        parse_shape("INFO", "cache", "Cache cluster peer {ip} joined")}},
      {"serving", 300, serving},
      {"batch", 220,
       {parse_shape("INFO", "quartz", "Job index-rebuild started batch={n}"),
        parse_shape("INFO", "quartz", "Indexed documents count={n} elapsed={n}"),
        parse_shape("INFO", "quartz", "Job index-rebuild committed segment={n}"),
        parse_shape("DEBUG", "quartz", "Trigger {uuid} fired on schedule")}},
      {"serving", 300, serving},
      {"maintenance", 150,
       {parse_shape("INFO", "gc", "Concurrent mark cycle finished pause={n}"),
        parse_shape("INFO", "maintenance", "Purged expired sessions count={n}"),
        parse_shape("INFO", "maintenance", "Temporary directory cleaned files={n}")}},
      {"serving", 300, serving},
      {"report", 160,
       {parse_shape("INFO", "report", "Generating usage report period={n}"),
        parse_shape("INFO", "report", "Report {uuid} written size={n}"),
        parse_shape("INFO", "report", "Report mailed to {ip}")}},
      {"shutdown", 120,
       {parse_shape("INFO", "main", "Shutdown requested signal={n}"),
        parse_shape("INFO", "osgi", "Stopping bundle com.portal.plugin.search"),
        parse_shape("INFO", "main", "Connection pool closed active={n}"),
        parse_shape("INFO", "main", "Application server stopped uptime={n}")}},
  };
  // JVM warnings arrive through the captured stderr stream, logged at INFO.
  const std::vector<Shape> reflective = {
      parse_shape("INFO", "stderr", "WARNING: An illegal reflective access operation has occurred"),
      parse_shape("INFO", "stderr",
                  "WARNING: Illegal reflective access by org.codehaus.groovy.vmplugin.v7.Java7 "
                  "(file:/opt/portal/lib/groovy-2.4.{n}.jar) to constructor java.lang.invoke.MethodHandles$Lookup(java.lang.Class,int)"),
      parse_shape("INFO", "stderr",
                  "WARNING: Please consider reporting this to the maintainers of org.codehaus.groovy.vmplugin.v7.Java7"),
      parse_shape("INFO", "stderr",
                  "WARNING: Use --illegal-access=warn to enable warnings of further illegal reflective access operations"),
      parse_shape("INFO", "stderr", "WARNING: All illegal access operations will be denied in a future release"),
  };
  constexpr std::size_t kDivergentPhase = 2;

  std::vector<SyntheticLog> instances;
  for (std::size_t k = 0; k < spec.instances; ++k) {
    Rng rng(spec.seed * 1'000'003 + k);
    SyntheticLog log;
    ingest::EpochMillis t = kEpochStart + static_cast<ingest::EpochMillis>(k) * 7 * 60'000;
    for (std::size_t p = 0; p < phases.size(); ++p) {
      const auto& phase = phases[p];
      const bool replaced = k == spec.divergent && p == kDivergentPhase;
      const auto& shapes = replaced ? reflective : phase.shapes;
      if (p > 0) t += 20'000 + 3'000 * static_cast<ingest::EpochMillis>(p);
      for (std::size_t i = 0; i < phase.records; ++i) {
        t += rng.between(40, 240);
        // The warning block prints in order; other phases interleave.
        const auto& shape = replaced ? shapes[i % shapes.size()] : shapes[rng.below(shapes.size())];
        log.lines.push_back(render(rng, t, shape));
        log.labels.emplace_back(replaced ? kReflectiveAccessLabel : phase.label);
      }
    }
    instances.push_back(std::move(log));
  }
  return instances;
}

}  // namespace logcurves::synth
