#include "logcurves/enrich.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <future>
#include <optional>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#ifdef LOGCURVES_WITH_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "logcurves/error.hpp"
#include "logcurves/ingest.hpp"

namespace logcurves::enrich {

namespace {

constexpr const char* kSystemContext =
    "You are helping a performance engineer analyze a software system. The lines below are masked log "
    "templates from one time window of a software system: variable parts were replaced by placeholders "
    "such as <*>, <NUM>, <IP>, <HEX> and <UUID>.";

struct Group {
  const char* title;
  int min_level;
};
constexpr Group kGroups[] = {{"ERROR and above", ingest::severity::kError},
                             {"WARN", ingest::severity::kWarn},
                             {"INFO and below", 0}};

void append_checkpoint(std::string& out, const curvedoc::CheckpointEntry& c, std::string_view heading,
                       std::size_t max_templates) {
  const auto total = c.template_texts.size();
  const auto shown = std::min(total, max_templates);
  out += fmt::format("{}: series {}, checkpoint #{}, starting {}, {} log records, {} templates", heading,
                     c.series_id, c.index, ingest::format_iso8601(c.timestamp), c.record_count, total);
  if (shown < total) out += fmt::format(" ({} of {} shown)", shown, total);
  out += "\n";

  const ingest::SeverityTable severities;
  std::vector<int> levels(shown);
  for (std::size_t i = 0; i < shown; ++i) levels[i] = severities.parse(c.template_texts[i]);
  int ceiling = 1000;
  for (const auto& group : kGroups) {
    std::string lines;
    for (std::size_t i = 0; i < shown; ++i) {
      if (levels[i] >= group.min_level && levels[i] < ceiling) lines += fmt::format("- {}\n", c.template_texts[i]);
    }
    ceiling = group.min_level;
    if (!lines.empty()) out += fmt::format("[{}]\n{}", group.title, lines);
  }
}

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError(fmt::format("endpoint {} lacks a scheme", url));
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError(fmt::format("unsupported endpoint scheme {}", scheme));
  const auto path_begin = url.find('/', scheme_end + 3);
  if (path_begin == std::string::npos) return {url, "/"};
  return {url.substr(0, path_begin), url.substr(path_begin)};
}

std::optional<std::string> extract_text(const nlohmann::json& body) {
  if (!body.is_object()) return std::nullopt;
  const auto choices = body.find("choices");
  if (choices != body.end() && choices->is_array() && !choices->empty()) {
    const auto& first = (*choices)[0];
    if (first.contains("message") && first["message"].contains("content") &&
        first["message"]["content"].is_string()) {
      return first["message"]["content"].get<std::string>();
    }
    if (first.contains("text") && first["text"].is_string()) return first["text"].get<std::string>();
  }
  return std::nullopt;
}

}  // namespace

void EnrichRequest::validate(const curvedoc::CurveDocument& doc) const {
  const std::size_t expected = kind == RequestKind::kSingle ? 1 : 2;
  if (checkpoints.size() != expected) {
    throw ConfigError(fmt::format("{} request needs {} checkpoint index(es), got {}",
                                  kind == RequestKind::kSingle ? "single" : "pairwise", expected,
                                  checkpoints.size()));
  }
  for (const auto i : checkpoints) {
    if (i >= doc.checkpoints.size()) {
      throw ConfigError(fmt::format("checkpoint {} out of range (document has {})", i, doc.checkpoints.size()));
    }
  }
  if (kind == RequestKind::kPairwise && checkpoints[0] == checkpoints[1]) {
    throw ConfigError("pairwise request needs two distinct checkpoints");
  }
  if (prompt_template_id != "v1") throw ConfigError(fmt::format("unknown prompt template {}", prompt_template_id));
  if (max_templates == 0) throw ConfigError("max templates must be at least 1");
}

Prompt build_prompt(const EnrichRequest& request, const curvedoc::CurveDocument& doc) {
  request.validate(doc);
  Prompt prompt;
  prompt.system = kSystemContext;
  if (request.kind == RequestKind::kSingle) {
    prompt.user =
        "Summarize what the system was doing during this time window. Explain the templates and group "
        "your findings by severity (errors first, then warnings, then routine activity).\n\n";
    append_checkpoint(prompt.user, doc.checkpoints[request.checkpoints[0]], "Checkpoint", request.max_templates);
  } else {
    prompt.user =
        "Compare the two time windows below. Describe their similarities and their differences, grouped by "
        "severity (errors first, then warnings, then routine activity).\n\n";
    append_checkpoint(prompt.user, doc.checkpoints[request.checkpoints[0]], "Checkpoint A", request.max_templates);
    prompt.user += "\n";
    append_checkpoint(prompt.user, doc.checkpoints[request.checkpoints[1]], "Checkpoint B", request.max_templates);
  }
  return prompt;
}

void ProviderConfig::validate() const {
  if (!(timeout_seconds > 0.0)) throw ConfigError("provider timeout must be positive");
  if (!(backoff_seconds >= 0.0)) throw ConfigError("provider backoff must be non-negative");
  if (endpoint.empty()) throw ConfigError("no provider endpoint configured");
  split_endpoint(endpoint);
}

HttpProvider::HttpProvider(ProviderConfig config) : config_(std::move(config)) { config_.validate(); }

std::string HttpProvider::complete(const Prompt& prompt) {
  if (config_.offline) throw ConfigError("offline mode: refusing to contact the completion endpoint");
  const auto [origin, path] = split_endpoint(config_.endpoint);

  const nlohmann::json body = {{"model", config_.model},
                               {"messages",
                                {{{"role", "system"}, {"content", prompt.system}},
                                 {{"role", "user"}, {"content", prompt.user}}}}};
  const auto payload = body.dump();

  httplib::Headers headers;
  if (!config_.token_env.empty()) {
    if (const char* token = std::getenv(config_.token_env.c_str()); token != nullptr && *token != '\0') {
      headers.emplace("Authorization", fmt::format("Bearer {}", token));
    }
  }

  httplib::Client client(origin);
  const auto seconds = static_cast<time_t>(config_.timeout_seconds);
  const auto micros = static_cast<time_t>((config_.timeout_seconds - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  std::string last_error;
  for (std::size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0 && config_.backoff_seconds > 0.0) {
      const double delay = config_.backoff_seconds * std::ldexp(1.0, static_cast<int>(attempt - 1));
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
    const auto response = client.Post(path, headers, payload, "application/json");
    if (!response) {
      last_error = fmt::format("transport error: {}", httplib::to_string(response.error()));
      continue;
    }
    if (response->status >= 500 || response->status == 429) {
      last_error = fmt::format("HTTP {}", response->status);
      continue;
    }
    if (response->status < 200 || response->status >= 300) {
      throw ProviderError(fmt::format("{} answered HTTP {}: {}", config_.endpoint, response->status,
                                      response->body.substr(0, 200)));
    }
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(response->body);
    } catch (const nlohmann::json::exception&) {
      throw ProviderError(fmt::format("{} returned a body that is not JSON", config_.endpoint));
    }
    if (auto text = extract_text(parsed)) return *std::move(text);
    throw ProviderError(fmt::format("{} returned no choices[0].message.content", config_.endpoint));
  }
  throw ProviderError(
      fmt::format("{} failed after {} attempt(s): {}", config_.endpoint, config_.max_retries + 1, last_error));
}

std::unique_ptr<Provider> make_provider(const ProviderConfig& config) {
  if (config.offline) throw ConfigError("offline mode: enrichment needs network access");
  return std::make_unique<HttpProvider>(config);
}

std::string enrich(const EnrichRequest& request, const curvedoc::CurveDocument& doc, Provider& provider) {
  return provider.complete(build_prompt(request, doc));
}

void annotate(curvedoc::CurveDocument& doc, const EnrichRequest& request, const std::string& annotation) {
  request.validate(doc);
  for (const auto i : request.checkpoints) doc.checkpoints[i].annotations.push_back(annotation);
}

void enrich_document(curvedoc::CurveDocument& doc, std::span<const EnrichRequest> requests, Provider& provider,
                     std::size_t max_concurrency) {
  for (const auto& r : requests) r.validate(doc);
  max_concurrency = std::max<std::size_t>(max_concurrency, 1);
  std::vector<std::string> answers(requests.size());
  for (std::size_t begin = 0; begin < requests.size(); begin += max_concurrency) {
    const auto end = std::min(requests.size(), begin + max_concurrency);
    std::vector<std::future<std::string>> pending;
    for (auto i = begin; i < end; ++i) {
      pending.push_back(std::async(std::launch::async, [&, i] { return enrich(requests[i], doc, provider); }));
    }
    std::exception_ptr failure;
    for (std::size_t k = 0; k < pending.size(); ++k) {
      try {
        answers[begin + k] = pending[k].get();
      } catch (...) {
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  for (std::size_t i = 0; i < requests.size(); ++i) annotate(doc, requests[i], answers[i]);
}

}  // namespace logcurves::enrich
