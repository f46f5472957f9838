#include <cstdlib>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "logcurves/enrich.hpp"
#include "logcurves/error.hpp"
#include "stub_server.hpp"

namespace enrich = logcurves::enrich;
namespace curvedoc = logcurves::curvedoc;

namespace {

curvedoc::CurveDocument doc_with(std::vector<std::vector<std::string>> checkpoint_templates) {
  curvedoc::CurveDocument doc;
  doc.series.push_back({"s0", "svc", "#1f77b4"});
  curvedoc::EmbeddingEntry e{0.0, 0.0, 1.0, {}};
  for (std::size_t i = 0; i < checkpoint_templates.size(); ++i) {
    curvedoc::CheckpointEntry c;
    c.index = i;
    c.series_id = "s0";
    c.timestamp = 1709596800000 + static_cast<long long>(i) * 1000;
    c.record_count = 5;
    c.template_texts = std::move(checkpoint_templates[i]);
    doc.checkpoints.push_back(std::move(c));
    e.points.push_back({static_cast<double>(i), 0.0});
  }
  doc.embeddings.push_back(e);
  doc.meta.created_at = "2024-03-05T00:00:00.000Z";
  return doc;
}

enrich::ProviderConfig stub_config(const logcurves::testing::StubServer& server) {
  enrich::ProviderConfig config;
  config.endpoint = server.endpoint();
  config.timeout_seconds = 5;
  config.backoff_seconds = 0.0;
  config.token_env = "LOGCURVES_TEST_TOKEN";
  return config;
}

}  // namespace

TEST(Prompt, SingleContainsEveryTemplate) {
  const auto doc = doc_with({{"ERROR disk <NUM> failed", "WARN retry <*>", "INFO request served in <NUM> ms"}});
  const auto prompt = enrich::build_prompt({enrich::RequestKind::kSingle, {0}}, doc);
  for (const auto& t : doc.checkpoints[0].template_texts) {
    EXPECT_NE(prompt.user.find(t), std::string::npos) << t;
  }
  EXPECT_NE(prompt.system.find("masked log templates from one time window of a software system"), std::string::npos);
  // Grouped by severity, errors first.
  const auto err = prompt.user.find("[ERROR and above]");
  const auto warn = prompt.user.find("[WARN]");
  const auto info = prompt.user.find("[INFO and below]");
  ASSERT_NE(err, std::string::npos);
  EXPECT_LT(err, warn);
  EXPECT_LT(warn, info);
  EXPECT_EQ(prompt.user.find("shown)"), std::string::npos);
}

TEST(Prompt, Deterministic) {
  const auto doc = doc_with({{"a <*>", "b"}, {"c"}});
  const enrich::EnrichRequest r{enrich::RequestKind::kPairwise, {0, 1}};
  const auto a = enrich::build_prompt(r, doc);
  const auto b = enrich::build_prompt(r, doc);
  EXPECT_EQ(a.system, b.system);
  EXPECT_EQ(a.user, b.user);
}

TEST(Prompt, PairwiseIncludesBothSets) {
  const auto doc = doc_with({{"INFO alpha"}, {"INFO alpha"}});
  const auto prompt = enrich::build_prompt({enrich::RequestKind::kPairwise, {0, 1}}, doc);
  EXPECT_NE(prompt.user.find("Checkpoint A"), std::string::npos);
  EXPECT_NE(prompt.user.find("Checkpoint B"), std::string::npos);
  const auto first = prompt.user.find("- INFO alpha");
  ASSERT_NE(first, std::string::npos);
  EXPECT_NE(prompt.user.find("- INFO alpha", first + 1), std::string::npos);
  EXPECT_NE(prompt.user.find("similarities"), std::string::npos);
}

TEST(Prompt, TruncationIsNoted) {
  std::vector<std::string> many;
  for (int i = 0; i < 500; ++i) many.push_back("INFO template number " + std::to_string(i));
  const auto doc = doc_with({many});
  const auto prompt = enrich::build_prompt({enrich::RequestKind::kSingle, {0}}, doc);
  EXPECT_NE(prompt.user.find("200 of 500 shown"), std::string::npos);
  EXPECT_NE(prompt.user.find("template number 199\n"), std::string::npos);
  EXPECT_EQ(prompt.user.find("template number 200\n"), std::string::npos);
}

TEST(Prompt, RequestValidation) {
  const auto doc = doc_with({{"a"}, {"b"}});
  EXPECT_THROW(enrich::build_prompt({enrich::RequestKind::kSingle, {5}}, doc), logcurves::ConfigError);
  EXPECT_THROW(enrich::build_prompt({enrich::RequestKind::kSingle, {0, 1}}, doc), logcurves::ConfigError);
  EXPECT_THROW(enrich::build_prompt({enrich::RequestKind::kPairwise, {1, 1}}, doc), logcurves::ConfigError);
  EXPECT_THROW(enrich::build_prompt({enrich::RequestKind::kSingle, {0}, "v9"}, doc), logcurves::ConfigError);
}

TEST(Provider, EchoBecomesAnnotation) {
  logcurves::testing::StubServer server;
  ::setenv("LOGCURVES_TEST_TOKEN", "secret-token", 1);
  auto doc = doc_with({{"INFO a"}, {"WARN b"}});
  auto provider = enrich::make_provider(stub_config(server));
  const enrich::EnrichRequest request{enrich::RequestKind::kSingle, {1}};
  const auto expected = "echo: " + enrich::build_prompt(request, doc).user;
  const std::vector<enrich::EnrichRequest> requests{request};
  enrich::enrich_document(doc, requests, *provider);
  ASSERT_EQ(doc.checkpoints[1].annotations.size(), 1u);
  EXPECT_EQ(doc.checkpoints[1].annotations[0], expected);
  EXPECT_TRUE(doc.checkpoints[0].annotations.empty());
  EXPECT_EQ(server.last_authorization(), "Bearer secret-token");
  const auto body = nlohmann::json::parse(server.last_body());
  EXPECT_EQ(body["model"], "gpt-4o");
  EXPECT_EQ(body["messages"].size(), 2u);
  ::unsetenv("LOGCURVES_TEST_TOKEN");
}

TEST(Provider, ServerErrorsExhaustRetriesAndLeaveDocument) {
  logcurves::testing::StubServer server;
  server.fail_next(3, 500);
  auto doc = doc_with({{"INFO a"}, {"WARN b"}});
  const auto before = doc;
  auto provider = enrich::make_provider(stub_config(server));
  const std::vector<enrich::EnrichRequest> requests{{enrich::RequestKind::kSingle, {0}}};
  EXPECT_THROW(enrich::enrich_document(doc, requests, *provider), logcurves::ProviderError);
  EXPECT_EQ(server.requests(), 3);
  EXPECT_EQ(doc, before);
}

TEST(Provider, RecoversWithinRetryBudget) {
  logcurves::testing::StubServer server;
  server.fail_next(2, 503);
  auto provider = enrich::make_provider(stub_config(server));
  const auto text = provider->complete({"sys", "hello"});
  EXPECT_EQ(text, "echo: hello");
  EXPECT_EQ(server.requests(), 3);
}

TEST(Provider, ClientErrorsAreNotRetried) {
  logcurves::testing::StubServer server;
  server.fail_next(1, 401);
  auto provider = enrich::make_provider(stub_config(server));
  EXPECT_THROW(provider->complete({"sys", "hello"}), logcurves::ProviderError);
  EXPECT_EQ(server.requests(), 1);
}

TEST(Provider, PartialFailureAppendsNothing) {
  logcurves::testing::StubServer server;
  auto doc = doc_with({{"INFO a"}, {"WARN b"}, {"ERROR c"}});
  const auto before = doc;
  auto config = stub_config(server);
  config.max_retries = 0;
  auto provider = enrich::make_provider(config);
  server.fail_next(1, 500);
  const std::vector<enrich::EnrichRequest> requests{{enrich::RequestKind::kSingle, {0}},
                                                    {enrich::RequestKind::kPairwise, {1, 2}}};
  EXPECT_THROW(enrich::enrich_document(doc, requests, *provider, 1), logcurves::ProviderError);
  EXPECT_EQ(doc, before);
}

TEST(Provider, OfflineRefusesBeforeNetwork) {
  logcurves::testing::StubServer server;
  auto config = stub_config(server);
  config.offline = true;
  EXPECT_THROW(enrich::make_provider(config), logcurves::ConfigError);
  enrich::HttpProvider direct(config);
  EXPECT_THROW(direct.complete({"s", "u"}), logcurves::ConfigError);
  EXPECT_EQ(server.requests(), 0);
}

TEST(Provider, UnreachableEndpointIsProviderError) {
  enrich::ProviderConfig config;
  config.endpoint = "http://127.0.0.1:1/v1/chat/completions";
  config.timeout_seconds = 1;
  config.max_retries = 1;
  config.backoff_seconds = 0.0;
  enrich::HttpProvider provider(config);
  EXPECT_THROW(provider.complete({"s", "u"}), logcurves::ProviderError);
}

TEST(ProviderConfig, Validation) {
  enrich::ProviderConfig c;
  EXPECT_THROW(c.validate(), logcurves::ConfigError);  // no endpoint
  c.endpoint = "ftp://example.org/x";
  EXPECT_THROW(c.validate(), logcurves::ConfigError);
  c.endpoint = "http://example.org/x";
  c.timeout_seconds = 0;
  EXPECT_THROW(c.validate(), logcurves::ConfigError);
}
