#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "logcurves/curvedoc.hpp"
#include "logcurves/enrich.hpp"
#include "logcurves/error.hpp"
#include "logcurves/pipeline.hpp"
#include "logcurves/synth.hpp"

namespace logcurves::cli {

namespace fs = std::filesystem;

namespace {

struct Settings {
  pipeline::PipelineConfig pipeline;
  std::vector<std::string> timestamp_formats;
  std::vector<std::string> severity_keywords;  // NAME=LEVEL
  std::vector<std::string> mask_rules;         // REGEX=>PLACEHOLDER
  std::string metric = "levenshtein";
  std::string output;
  std::string format = "json";
  std::string dump_templates;
  std::string dump_matrix;
  curvedoc::CurveStyle style;
  bool quiet = false;
};

struct KeyDoc {
  const char* key;
  const char* text;
};

// Every key accepted on the command line and in --config files.
constexpr KeyDoc kKeys[] = {
    {"config", "flat key=value file; keys are the flag names below, flags win over the file"},
    {"output", "output path (-o)"},
    {"format", "json, svg or both"},
    {"base-year", "year for timestamps without one (0: current UTC year)"},
    {"timestamp-format", "extra strftime-style timestamp format (repeatable)"},
    {"severity-keyword", "extra severity keyword NAME=LEVEL (repeatable)"},
    {"target-points", "desired number of checkpoints per series"},
    {"k-gaps", "number of largest time gaps that force a boundary"},
    {"window-length", "severity smoothing window length"},
    {"window-decay", "geometric decay of the smoothing window"},
    {"severity-threshold", "smoothed severity level that opens an event"},
    {"tree-depth", "template parse tree depth"},
    {"similarity-threshold", "template similarity threshold in (0, 1]"},
    {"max-children", "maximum children per parse tree node"},
    {"max-template-len", "bytes of masked text kept per record"},
    {"mask-rule", "extra masking rule REGEX=>PLACEHOLDER (repeatable)"},
    {"w-ins", "edit distance insertion weight"},
    {"w-del", "edit distance deletion weight"},
    {"w-sub", "edit distance substitution weight"},
    {"string-metric", "levenshtein or qgram"},
    {"qgram", "q for the q-gram metric"},
    {"threads", "worker threads for the distance matrix"},
    {"alpha", "time weight of an embedding preset (repeatable)"},
    {"max-iter", "SMACOF iteration cap"},
    {"tol", "SMACOF relative stress tolerance"},
    {"seed", "random SMACOF start when the classical layout collapses; generate: seed"},
    {"dump-templates", "write id<TAB>count<TAB>template to this path"},
    {"dump-matrix", "write the distance matrix as CSV to this path"},
    {"width", "SVG width"},
    {"height", "SVG height"},
    {"point-radius", "SVG maximum point radius"},
    {"curve-tension", "SVG curve tension in [0, 1]"},
    {"labels", "SVG checkpoint labels (--no-labels to disable)"},
    {"endpoint", "enrich: chat-completion URL"},
    {"model", "enrich: model name"},
    {"token-env", "enrich: environment variable holding the bearer token"},
    {"timeout", "enrich: request timeout in seconds"},
    {"max-retries", "enrich: retries after the first attempt"},
    {"backoff", "enrich: first retry delay in seconds, doubled per retry"},
    {"max-templates", "enrich: templates per checkpoint in a prompt"},
    {"offline", "enrich: refuse all network access"},
    {"sizes", "bench: comma separated line counts"},
    {"repeats", "bench: runs per size"},
    {"csv", "bench: CSV output path"},
};

std::string keys_footer() {
  std::string text = "Configuration keys (flags and --config file):\n";
  for (const auto& k : kKeys) text += fmt::format("  {:<22}{}\n", k.key, k.text);
  text +=
      "\nExit codes: 0 success, 1 empty input, 2 invalid configuration or input path, 3 provider failure, "
      "4 other failure.";
  return text;
}

void add_pipeline_options(CLI::App& app, Settings& s) {
  auto& p = s.pipeline;
  app.add_option("--base-year", p.ingest.base_year, "Year for timestamps without one (0: current UTC year)")
      ->capture_default_str();
  app.add_option("--timestamp-format", s.timestamp_formats, "Extra strftime-style timestamp format")
      ->take_all();
  app.add_option("--severity-keyword", s.severity_keywords, "Extra severity keyword NAME=LEVEL")->take_all();
  app.add_option("--target-points", p.events.target_points, "Desired checkpoints per series")->capture_default_str();
  app.add_option("--k-gaps", p.events.k_gaps, "Largest time gaps that force a boundary")->capture_default_str();
  app.add_option("--window-length", p.events.window_length, "Severity smoothing window length")
      ->capture_default_str();
  app.add_option("--window-decay", p.events.window_decay, "Geometric decay of the window")->capture_default_str();
  app.add_option("--severity-threshold", p.events.severity_threshold, "Smoothed severity that opens an event")
      ->capture_default_str();
  app.add_option("--tree-depth", p.cluster.tree_depth, "Template parse tree depth")->capture_default_str();
  app.add_option("--similarity-threshold", p.cluster.similarity_threshold, "Template similarity threshold")
      ->capture_default_str();
  app.add_option("--max-children", p.cluster.max_children, "Maximum children per tree node")->capture_default_str();
  app.add_option("--max-template-len", p.cluster.max_template_len, "Bytes of masked text kept per record")
      ->capture_default_str();
  app.add_option("--mask-rule", s.mask_rules, "Extra masking rule REGEX=>PLACEHOLDER")->take_all();
  app.add_option("--w-ins", p.distance.weights.insert, "Insertion weight")->capture_default_str();
  app.add_option("--w-del", p.distance.weights.remove, "Deletion weight")->capture_default_str();
  app.add_option("--w-sub", p.distance.weights.substitute, "Substitution weight")->capture_default_str();
  app.add_option("--string-metric", s.metric, "levenshtein or qgram")
      ->check(CLI::IsMember({"levenshtein", "qgram"}))
      ->capture_default_str();
  app.add_option("--qgram", p.distance.qgram, "q for the q-gram metric")->capture_default_str();
  app.add_option("--threads", p.distance.threads, "Worker threads for the distance matrix")->capture_default_str();
  app.add_option("--alpha", p.projection.alphas, "Time weight of an embedding preset (repeatable)")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--max-iter", p.projection.smacof.max_iter, "SMACOF iteration cap")->capture_default_str();
  app.add_option("--tol", p.projection.smacof.tol, "SMACOF relative stress tolerance")->capture_default_str();
  app.add_option("--seed", p.projection.smacof.seed, "Seed for the random start used when the classical layout collapses")
      ->capture_default_str();
  app.add_flag("-q,--quiet", s.quiet, "Suppress the summary");
}

void add_style_options(CLI::App& app, curvedoc::CurveStyle& style) {
  app.add_option("--width", style.width, "SVG width")->capture_default_str();
  app.add_option("--height", style.height, "SVG height")->capture_default_str();
  app.add_option("--point-radius", style.point_radius, "Maximum point radius")->capture_default_str();
  app.add_option("--curve-tension", style.curve_tension, "Curve tension in [0, 1]")->capture_default_str();
  app.add_flag("--labels,!--no-labels", style.labels, "Checkpoint labels");
}

void add_output_options(CLI::App& app, Settings& s) {
  app.add_option("-o,--output", s.output, "Output path")->capture_default_str();
  app.add_option("--format", s.format, "json, svg or both")
      ->check(CLI::IsMember({"json", "svg", "both"}))
      ->capture_default_str();
  app.add_option("--dump-templates", s.dump_templates, "Write id<TAB>count<TAB>template to this path");
  app.add_option("--dump-matrix", s.dump_matrix, "Write the distance matrix as CSV to this path");
}

// Applies string-valued settings to the typed config; throws ConfigError.
void finish(Settings& s) {
  auto& p = s.pipeline;
  p.ingest.extra_timestamp_patterns = s.timestamp_formats;
  p.ingest.extra_severity_keywords.clear();
  for (const auto& entry : s.severity_keywords) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError(fmt::format("severity keyword '{}' is not NAME=LEVEL", entry));
    }
    int level = 0;
    try {
      std::size_t used = 0;
      level = std::stoi(entry.substr(eq + 1), &used);
      if (used != entry.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("severity keyword '{}' has no integer level", entry));
    }
    p.ingest.extra_severity_keywords.emplace_back(entry.substr(0, eq), level);
  }
  p.cluster.extra_mask_rules.clear();
  for (const auto& rule : s.mask_rules) {
    const auto arrow = rule.rfind("=>");
    if (arrow == std::string::npos || arrow == 0) {
      throw ConfigError(fmt::format("mask rule '{}' is not REGEX=>PLACEHOLDER", rule));
    }
    p.cluster.extra_mask_rules.push_back({rule.substr(0, arrow), rule.substr(arrow + 2)});
  }
  p.distance.metric = s.metric == "qgram" ? distance::StringMetric::kQGram : distance::StringMetric::kLevenshtein;
  p.validate();
  s.style.validate();
}

std::string num(double v) { return fmt::format("{:g}", v); }

template <typename T>
std::string join(const std::vector<T>& values, std::string_view sep = ",") {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += sep;
    if constexpr (std::is_arithmetic_v<T>) {
      out += num(static_cast<double>(v));
    } else {
      out += v;
    }
  }
  return out;
}

// Effective configuration recorded in the document.
std::vector<std::pair<std::string, std::string>> snapshot(const Settings& s) {
  const auto& p = s.pipeline;
  std::vector<std::pair<std::string, std::string>> c = {
      {"alpha", join(p.projection.alphas)},
      {"base-year", std::to_string(p.ingest.base_year)},
      {"k-gaps", std::to_string(p.events.k_gaps)},
      {"mask-rule", join(s.mask_rules, " ; ")},
      {"max-children", std::to_string(p.cluster.max_children)},
      {"max-iter", std::to_string(p.projection.smacof.max_iter)},
      {"max-template-len", std::to_string(p.cluster.max_template_len)},
      {"qgram", std::to_string(p.distance.qgram)},
      {"seed", std::to_string(p.projection.smacof.seed)},
      {"severity-keyword", join(s.severity_keywords)},
      {"severity-threshold", num(p.events.severity_threshold)},
      {"similarity-threshold", num(p.cluster.similarity_threshold)},
      {"string-metric", s.metric},
      {"target-points", std::to_string(p.events.target_points)},
      {"timestamp-format", join(s.timestamp_formats, " ; ")},
      {"tol", num(p.projection.smacof.tol)},
      {"tree-depth", std::to_string(p.cluster.tree_depth)},
      {"w-del", num(p.distance.weights.remove)},
      {"w-ins", num(p.distance.weights.insert)},
      {"w-sub", num(p.distance.weights.substitute)},
      {"window-decay", num(p.events.window_decay)},
      {"window-length", std::to_string(p.events.window_length)},
  };
  std::sort(c.begin(), c.end());
  return c;
}

fs::path with_suffix(const fs::path& path, const std::string& suffix, const std::string& extension) {
  auto stem = path.parent_path() / path.stem();
  return fs::path(stem.string() + suffix + extension);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw ConfigError(fmt::format("failed writing {}", path.string()));
}

void print_summary(std::ostream& out, const pipeline::Analysis& a) {
  for (const auto& s : a.summaries) {
    fmt::print(out, "series {}: {} records, {} events, {} templates", s.series_id, s.records, s.events, s.templates);
    if (s.synthetic_leading_records > 0) fmt::print(out, ", {} lines before the first timestamp", s.synthetic_leading_records);
    fmt::print(out, "\n");
  }
  fmt::print(out, "checkpoints: {}\n", a.document.checkpoints.size());
  for (const auto& e : a.document.embeddings) {
    fmt::print(out, "alpha {:<5} stress {:.4f}  R2 {}\n", num(e.alpha), e.stress,
               e.r_squared ? fmt::format("{:.4f}", *e.r_squared) : std::string("undefined"));
  }
  const auto& t = a.timings;
  fmt::print(out,
             "time (s): ingest {:.3f}  events {:.3f}  templates {:.3f}  distance {:.3f}  projection {:.3f}  "
             "document {:.3f}  total {:.3f}\n",
             t.ingest, t.events, t.templates, t.distance, t.projection, t.document, t.total());
}

void write_outputs(const Settings& s, const pipeline::Analysis& a, std::ostream& out) {
  const fs::path output = s.output;
  if (s.format == "json" || s.format == "both") {
    curvedoc::write_document(output.string(), a.document);
    if (!s.quiet) fmt::print(out, "wrote {}\n", output.string());
  }
  if (s.format == "svg" || s.format == "both") {
    for (const auto& e : a.document.embeddings) {
      const auto path = a.document.embeddings.size() == 1 ? with_suffix(output, "", ".svg")
                                                          : with_suffix(output, "-alpha" + num(e.alpha), ".svg");
      write_text(path, curvedoc::render_svg(a.document, e.alpha, s.style));
      if (!s.quiet) fmt::print(out, "wrote {}\n", path.string());
    }
  }
  if (!s.dump_templates.empty()) {
    std::ostringstream dump;
    for (std::size_t i = 0; i < a.miners.size(); ++i) {
      if (a.miners.size() > 1) dump << "# " << a.summaries[i].series_id << '\n';
      templates::write_template_dump(dump, a.miners[i].templates());
    }
    write_text(s.dump_templates, dump.str());
  }
  if (!s.dump_matrix.empty()) {
    std::ostringstream csv;
    distance::write_matrix_csv(csv, a.semantic);
    write_text(s.dump_matrix, csv.str());
  }
}

// "label=path1,path2" or "path1,path2".
pipeline::SeriesInput load_group(const std::string& spec, std::size_t index) {
  std::string label;
  std::string paths = spec;
  if (const auto eq = spec.find('='); eq != std::string::npos && !fs::exists(spec)) {
    label = spec.substr(0, eq);
    paths = spec.substr(eq + 1);
  }
  std::vector<fs::path> files;
  std::stringstream list(paths);
  for (std::string item; std::getline(list, item, ',');) {
    if (!item.empty()) files.emplace_back(item);
  }
  if (files.empty()) throw ConfigError(fmt::format("group '{}' names no files", spec));
  if (label.empty()) label = files.front().stem().string();
  return pipeline::load_series(fmt::format("s{}", index), label, files);
}

int cmd_analyze(const std::vector<std::string>& inputs, Settings& s, std::ostream& out) {
  finish(s);
  std::vector<pipeline::SeriesInput> series;
  std::vector<fs::path> paths(inputs.begin(), inputs.end());
  auto input = pipeline::load_series("s0", fs::path(inputs.front()).stem().string(), paths);
  series.push_back(std::move(input));
  const auto analysis = pipeline::analyze(std::move(series), s.pipeline, {"", snapshot(s)});
  write_outputs(s, analysis, out);
  if (!s.quiet) print_summary(out, analysis);
  return kExitOk;
}

int cmd_overlay(const std::vector<std::string>& groups, Settings& s, std::ostream& out) {
  finish(s);
  if (groups.size() < 2) throw ConfigError("overlay needs at least two groups (use analyze for one)");
  std::vector<pipeline::SeriesInput> series;
  for (std::size_t i = 0; i < groups.size(); ++i) series.push_back(load_group(groups[i], i));
  const auto analysis = pipeline::analyze(std::move(series), s.pipeline, {"", snapshot(s)});
  write_outputs(s, analysis, out);
  if (!s.quiet) print_summary(out, analysis);
  return kExitOk;
}

int cmd_render(const std::string& input, std::optional<double> alpha, const Settings& s, std::ostream& out) {
  s.style.validate();
  const auto doc = curvedoc::read_document(input);
  if (doc.embeddings.empty()) throw ConfigError(fmt::format("{} contains no embeddings", input));
  const double a = alpha.value_or(doc.embeddings.front().alpha);
  const fs::path output = s.output.empty() ? with_suffix(input, "", ".svg") : fs::path(s.output);
  write_text(output, curvedoc::render_svg(doc, a, s.style));
  if (!s.quiet) fmt::print(out, "wrote {}\n", output.string());
  return kExitOk;
}

struct EnrichOptions {
  enrich::ProviderConfig provider;
  std::vector<std::size_t> single;
  std::vector<std::string> pairs;  // "i,j"
  std::size_t max_templates = 200;
  std::size_t concurrency = 4;
  bool print_prompt = false;
};

int cmd_enrich(const std::string& input, EnrichOptions& o, const Settings& s, std::ostream& out) {
  auto doc = curvedoc::read_document(input);
  std::vector<enrich::EnrichRequest> requests;
  for (const auto i : o.single) requests.push_back({enrich::RequestKind::kSingle, {i}, "v1", o.max_templates});
  for (const auto& pair : o.pairs) {
    const auto comma = pair.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("no comma");
      requests.push_back({enrich::RequestKind::kPairwise,
                          {std::stoul(pair.substr(0, comma)), std::stoul(pair.substr(comma + 1))},
                          "v1",
                          o.max_templates});
    } catch (const std::logic_error&) {
      throw ConfigError(fmt::format("--compare expects I,J, got '{}'", pair));
    }
  }
  if (requests.empty()) throw ConfigError("nothing to do: pass --checkpoint and/or --compare");
  for (const auto& r : requests) r.validate(doc);

  if (o.print_prompt) {
    for (const auto& r : requests) {
      const auto prompt = enrich::build_prompt(r, doc);
      fmt::print(out, "--- system\n{}\n--- user\n{}\n", prompt.system, prompt.user);
    }
    return kExitOk;
  }
  auto provider = enrich::make_provider(o.provider);
  enrich::enrich_document(doc, requests, *provider, o.concurrency);
  const auto output = s.output.empty() ? input : s.output;
  curvedoc::write_document(output, doc);
  if (!s.quiet) fmt::print(out, "annotated {} request(s), wrote {}\n", requests.size(), output);
  return kExitOk;
}

struct BenchOptions {
  std::string input;
  std::vector<std::size_t> sizes;
  std::size_t repeats = 10;
  std::string csv;
};

int cmd_bench(BenchOptions& o, Settings& s, std::ostream& out) {
  finish(s);
  if (o.sizes.empty()) throw ConfigError("--sizes is required");
  if (o.repeats == 0) throw ConfigError("--repeats must be at least 1");
  std::ifstream file(o.input, std::ios::binary);
  if (!file) throw ConfigError(fmt::format("cannot read {}", o.input));
  const std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

  // Byte offset just past line `n`, for every requested size.
  std::vector<std::size_t> line_ends;
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (bytes[i] == '\n') line_ends.push_back(i + 1);
  }
  if (!bytes.empty() && bytes.back() != '\n') line_ends.push_back(bytes.size());

  for (const auto size : o.sizes) {
    if (size == 0 || size > line_ends.size()) {
      throw ConfigError(fmt::format("{} has {} lines, fewer than the requested {}", o.input, line_ends.size(), size));
    }
  }

  std::string csv = "size,repeats,ingest_s,events_s,templates_s,distance_s,projection_s,document_s,total_s,records_per_s\n";
  fmt::print(out, "{:>10} {:>9} {:>9} {:>9} {:>9} {:>10} {:>9} {:>9} {:>12}\n", "size", "ingest", "events",
             "templates", "distance", "projection", "document", "total", "records/s");
  for (const auto size : o.sizes) {
    const std::string_view prefix(bytes.data(), line_ends[size - 1]);
    pipeline::StageTimings sum;
    for (std::size_t r = 0; r < o.repeats; ++r) {
      const auto start = std::chrono::steady_clock::now();
      std::vector<pipeline::SeriesInput> series;
      series.push_back({"s0", "bench", ingest::split_lines(ingest::sanitize_utf8(prefix), 0), {}});
      const double split = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      auto analysis = pipeline::analyze(std::move(series), s.pipeline, {"", {}});
      analysis.timings.ingest += split;
      sum += analysis.timings;
    }
    const double n = static_cast<double>(o.repeats);
    const pipeline::StageTimings mean{sum.ingest / n,   sum.events / n,     sum.templates / n,
                                      sum.distance / n, sum.projection / n, sum.document / n};
    const double throughput = static_cast<double>(size) / mean.total();
    fmt::print(out, "{:>10} {:>9.4f} {:>9.4f} {:>9.4f} {:>9.4f} {:>10.4f} {:>9.4f} {:>9.4f} {:>12.0f}\n", size,
               mean.ingest, mean.events, mean.templates, mean.distance, mean.projection, mean.document, mean.total(),
               throughput);
    csv += fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.1f}\n", size, o.repeats, mean.ingest,
                       mean.events, mean.templates, mean.distance, mean.projection, mean.document, mean.total(),
                       throughput);
  }
  if (!o.csv.empty()) {
    write_text(o.csv, csv);
    fmt::print(out, "wrote {}\n", o.csv);
  }
  return kExitOk;
}

struct GenerateOptions {
  std::string kind;
  std::size_t lines = 100000;
  std::size_t templates = 100;
  std::size_t line_length = 120;
  std::size_t cycles = 5;
  std::size_t instances = 3;
  std::uint64_t seed = 1;
};

int cmd_generate(const GenerateOptions& o, const Settings& s, std::ostream& out) {
  if (s.output.empty()) throw ConfigError("generate needs -o/--output");
  std::vector<std::pair<fs::path, synth::SyntheticLog>> logs;
  if (o.kind == "throughput") {
    logs.emplace_back(s.output, synth::throughput_log({o.lines, o.templates, o.line_length, o.seed}));
  } else if (o.kind == "bursts") {
    synth::BurstSpec spec;
    spec.records = o.lines;
    spec.seed = o.seed;
    logs.emplace_back(s.output, synth::burst_log(spec).log);
  } else if (o.kind == "cycles") {
    synth::CycleSpec spec;
    spec.cycles = o.cycles;
    spec.seed = o.seed;
    logs.emplace_back(s.output, synth::failure_recovery_log(spec));
  } else {
    auto instances = synth::overlay_instances({o.instances, 1, o.seed});
    for (std::size_t i = 0; i < instances.size(); ++i) {
      logs.emplace_back(with_suffix(s.output, fmt::format("-{}", i), fs::path(s.output).extension().string()),
                        std::move(instances[i]));
    }
  }
  for (const auto& [path, log] : logs) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ConfigError(fmt::format("cannot write {}", path.string()));
    synth::write_log(file, log);
    if (!s.quiet) fmt::print(out, "wrote {} ({} lines)\n", path.string(), log.lines.size());
  }
  return kExitOk;
}

// Fills options that were not given on the command line from a flat
// key=value file. CLI11 only reads config files for the top-level app.
void apply_config_file(CLI::App& command, const std::string& path) {
  if (!fs::is_regular_file(path)) throw ConfigError(fmt::format("cannot read config file '{}'", path));
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::ParseError& e) {
    throw ConfigError(fmt::format("config file '{}': {}", path, e.what()));
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty()) {
      throw ConfigError(fmt::format("config file '{}': sections are not supported ({})", path, item.fullname()));
    }
    auto* option = command.get_option_no_throw("--" + item.name);
    if (option == nullptr || item.name == "config") {
      throw ConfigError(fmt::format("config file '{}': unknown key '{}' for {}", path, item.name, command.get_name()));
    }
    if (option->count() > 0) continue;  // the command line wins
    try {
      option->add_result(item.inputs);
      option->run_callback();
    } catch (const CLI::ParseError& e) {
      throw ConfigError(fmt::format("config file '{}': {}: {}", path, item.name, e.what()));
    }
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"logcurves: turn software logs into Time Curves", "logcurves"};
  app.footer(keys_footer());
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Settings s;
  std::string config_path;
  std::vector<std::string> inputs;

  auto* analyze = app.add_subcommand("analyze", "Analyze one log collection into a curve document");
  analyze->add_option("inputs", inputs, "Log files of one collection")->required();
  add_pipeline_options(*analyze, s);
  add_output_options(*analyze, s);
  add_style_options(*analyze, s.style);
  analyze->add_option("--config", config_path, "Flat key=value configuration file");

  std::vector<std::string> groups;
  auto* overlay = app.add_subcommand("overlay", "Embed several collections in one frame");
  overlay->add_option("groups", groups, "Groups as [label=]file[,file...]")->required();
  add_pipeline_options(*overlay, s);
  add_output_options(*overlay, s);
  add_style_options(*overlay, s.style);
  overlay->add_option("--config", config_path, "Flat key=value configuration file");

  std::string document;
  std::optional<double> render_alpha;
  auto* render = app.add_subcommand("render", "Render a curve document as SVG");
  render->add_option("document", document, "Curve document (JSON)")->required();
  render->add_option("--alpha", render_alpha, "Embedding to render (default: first)");
  render->add_option("-o,--output", s.output, "SVG path (default: document path with .svg)");
  render->add_flag("-q,--quiet", s.quiet, "Suppress messages");
  add_style_options(*render, s.style);
  render->add_option("--config", config_path, "Flat key=value configuration file");

  EnrichOptions eo;
  auto* enrich_cmd = app.add_subcommand("enrich", "Annotate checkpoints with LLM summaries");
  enrich_cmd->add_option("document", document, "Curve document (JSON)")->required();
  enrich_cmd->add_option("--checkpoint", eo.single, "Summarize this checkpoint (document position)")->take_all();
  enrich_cmd->add_option("--compare", eo.pairs, "Compare two checkpoints I,J")->take_all();
  enrich_cmd->add_option("--endpoint", eo.provider.endpoint, "Chat-completion URL");
  enrich_cmd->add_option("--model", eo.provider.model, "Model name")->capture_default_str();
  enrich_cmd->add_option("--token-env", eo.provider.token_env, "Variable holding the bearer token")
      ->capture_default_str();
  enrich_cmd->add_option("--timeout", eo.provider.timeout_seconds, "Request timeout (s)")->capture_default_str();
  enrich_cmd->add_option("--max-retries", eo.provider.max_retries, "Retries after the first attempt")
      ->capture_default_str();
  enrich_cmd->add_option("--backoff", eo.provider.backoff_seconds, "First retry delay (s)")->capture_default_str();
  enrich_cmd->add_option("--max-templates", eo.max_templates, "Templates per checkpoint in a prompt")
      ->capture_default_str();
  enrich_cmd->add_option("--concurrency", eo.concurrency, "Requests in flight")->capture_default_str();
  enrich_cmd->add_flag("--offline", eo.provider.offline, "Refuse all network access");
  enrich_cmd->add_flag("--print-prompt", eo.print_prompt, "Print the prompts instead of sending them");
  enrich_cmd->add_option("-o,--output", s.output, "Output document (default: in place)");
  enrich_cmd->add_flag("-q,--quiet", s.quiet, "Suppress messages");
  enrich_cmd->add_option("--config", config_path, "Flat key=value configuration file");

  BenchOptions bo;
  auto* bench = app.add_subcommand("bench", "Measure per-stage runtime and throughput");
  bench->add_option("input", bo.input, "Log file with at least max(sizes) lines")->required();
  bench->add_option("--sizes", bo.sizes, "Line counts")->delimiter(',')->required();
  bench->add_option("--repeats", bo.repeats, "Runs per size")->capture_default_str();
  bench->add_option("--csv", bo.csv, "CSV output path");
  add_pipeline_options(*bench, s);
  bench->add_option("--config", config_path, "Flat key=value configuration file");

  GenerateOptions go;
  auto* generate = app.add_subcommand("generate", "Write a synthetic log");
  generate->add_option("kind", go.kind, "throughput, bursts, cycles or overlay")
      ->required()
      ->check(CLI::IsMember({"throughput", "bursts", "cycles", "overlay"}));
  generate->add_option("-o,--output", s.output, "Output path (overlay: one file per instance)")->required();
  generate->add_option("--lines", go.lines, "Lines (throughput, bursts)")->capture_default_str();
  generate->add_option("--templates", go.templates, "Distinct message shapes (throughput)")->capture_default_str();
  generate->add_option("--line-length", go.line_length, "Mean line length (throughput)")->capture_default_str();
  generate->add_option("--cycles", go.cycles, "Failure/recovery cycles")->capture_default_str();
  generate->add_option("--instances", go.instances, "Instances (overlay)")->capture_default_str();
  generate->add_option("--seed", go.seed, "Generator seed")->capture_default_str();
  generate->add_flag("-q,--quiet", s.quiet, "Suppress messages");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "error: {}\n", e.what());
    fmt::print(err, "run with --help for usage\n");
    return kExitConfig;
  }

  try {
    if (!config_path.empty()) apply_config_file(*app.get_subcommands().front(), config_path);
    if (analyze->parsed()) {
      if (s.output.empty()) s.output = "curve.json";
      return cmd_analyze(inputs, s, out);
    }
    if (overlay->parsed()) {
      if (s.output.empty()) s.output = "overlay.json";
      return cmd_overlay(groups, s, out);
    }
    if (render->parsed()) return cmd_render(document, render_alpha, s, out);
    if (enrich_cmd->parsed()) return cmd_enrich(document, eo, s, out);
    if (bench->parsed()) return cmd_bench(bo, s, out);
    if (generate->parsed()) return cmd_generate(go, s, out);
  } catch (const EmptyInput& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitEmptyInput;
  } catch (const ConfigError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitConfig;
  } catch (const SchemaError& e) {
    fmt::print(err, "error: invalid curve document: {}\n", e.what());
    return kExitConfig;
  } catch (const ProviderError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitProvider;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace logcurves::cli
