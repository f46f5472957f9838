#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "logcurves/curvedoc.hpp"

namespace logcurves::enrich {

enum class RequestKind { kSingle, kPairwise };

struct EnrichRequest {
  RequestKind kind = RequestKind::kSingle;
  std::vector<std::size_t> checkpoints;  // document positions: 1 for single, 2 for pairwise
  std::string prompt_template_id = "v1";
  std::size_t max_templates = 200;

  // Throws ConfigError when indices do not fit the document or the kind.
  void validate(const curvedoc::CurveDocument& doc) const;
};

struct Prompt {
  std::string system;
  std::string user;
};

// Deterministic for (doc, request).
Prompt build_prompt(const EnrichRequest& request, const curvedoc::CurveDocument& doc);

struct ProviderConfig {
  std::string endpoint;  // http(s)://host[:port]/path of a chat-completion endpoint
  std::string token_env = "LOGCURVES_API_TOKEN";
  std::string model = "gpt-4o";
  double timeout_seconds = 60.0;
  std::size_t max_retries = 2;  // attempts = 1 + max_retries
  double backoff_seconds = 1.0;  // doubles after every failed attempt
  bool offline = false;

  void validate() const;
};

class Provider {
 public:
  virtual ~Provider() = default;
  // Returns the completion text. Throws ProviderError.
  virtual std::string complete(const Prompt& prompt) = 0;
};

// POSTs {"model", "messages": [system, user]} and reads
// choices[0].message.content. Bearer token from the configured env var.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(ProviderConfig config);
  std::string complete(const Prompt& prompt) override;

 private:
  ProviderConfig config_;
};

// Refuses before any network activity when the config is offline.
std::unique_ptr<Provider> make_provider(const ProviderConfig& config);

// Builds the prompt and asks the provider. Does not touch the document.
std::string enrich(const EnrichRequest& request, const curvedoc::CurveDocument& doc, Provider& provider);

// Appends the annotation to every checkpoint named by the request.
void annotate(curvedoc::CurveDocument& doc, const EnrichRequest& request, const std::string& annotation);

// Runs requests concurrently, then appends annotations in request order.
// On any failure nothing is appended and the first error is rethrown.
void enrich_document(curvedoc::CurveDocument& doc, std::span<const EnrichRequest> requests, Provider& provider,
                     std::size_t max_concurrency = 4);

}  // namespace logcurves::enrich
