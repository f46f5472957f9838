#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "logcurves/events.hpp"
#include "logcurves/ingest.hpp"

namespace logcurves::templates {

using TemplateId = std::uint32_t;

inline constexpr std::string_view kWildcard = "<*>";

struct MaskRule {
  std::string pattern;  // ECMAScript regex
  std::string placeholder;
};

struct ClusterConfig {
  std::size_t tree_depth = 4;
  double similarity_threshold = 0.4;
  std::size_t max_children = 100;
  std::size_t max_template_len = 500;  // bytes of masked text kept before tokenizing
  // Applied after the built-in rules (UUID, IPv4, hex, integers).
  std::vector<MaskRule> extra_mask_rules;

  void validate() const;
};

struct Template {
  TemplateId id = 0;
  std::vector<std::string> tokens;
  std::size_t match_count = 0;

  std::string text() const;
};

// Masks variable parts and splits on whitespace. Built-in placeholders:
// <UUID>, <IP>, <HEX> (>= 8 hex digits with at least one digit), <NUM>
// (integers of two or more digits).
std::vector<std::string> mask(std::string_view body, const ClusterConfig& config = {});

// Reusable form of mask() with the extra rules compiled once. Tokens are views
// into `buffer`.
class Masker {
 public:
  explicit Masker(const ClusterConfig& config = {});

  void apply(std::string_view body, std::string& buffer, std::vector<std::string_view>& tokens) const;
  std::vector<std::string> operator()(std::string_view body) const;

 private:
  std::size_t max_len_;
  std::vector<std::pair<std::regex, std::string>> extra_;
};

// Drain-style fixed-depth parse tree. Records are routed by token count,
// then by their leading tokens; the leaf holds candidate templates.
class TemplateMiner {
 public:
  explicit TemplateMiner(ClusterConfig config = {});
  ~TemplateMiner();
  TemplateMiner(TemplateMiner&&) noexcept;
  TemplateMiner& operator=(TemplateMiner&&) noexcept;

  // mask() followed by assign().
  TemplateId add(std::string_view body);
  TemplateId assign(std::span<const std::string_view> tokens);
  TemplateId assign(std::span<const std::string> tokens);

  const std::vector<Template>& templates() const { return templates_; }
  const Template& at(TemplateId id) const { return templates_.at(id); }
  std::size_t size() const { return templates_.size(); }
  const ClusterConfig& config() const { return config_; }

 private:
  struct Node;

  Node* search(Node& root, std::span<const std::string_view> tokens) const;
  Node& insert_path(Node& root, std::span<const std::string_view> tokens);
  std::size_t token_layers(std::size_t token_count) const;

  ClusterConfig config_;
  Masker masker_;
  std::vector<Template> templates_;
  std::unordered_map<std::size_t, std::unique_ptr<Node>> by_length_;
  std::string scratch_;
  std::vector<std::string_view> scratch_tokens_;
  std::string key_;
};

struct Checkpoint {
  std::size_t index = 0;  // position within its series
  ingest::EpochMillis timestamp = 0;
  std::vector<TemplateId> template_ids;  // sorted, unique
  std::size_t record_count = 0;
  std::string series_id;
};

// Assigns every record of every event a template and reduces each event to a
// checkpoint. Records are fed to the miner in order, so calling this once per
// series yields one global template space per series.
std::vector<Checkpoint> checkpoints_from_events(std::span<const events::Event> events,
                                                std::span<const ingest::LogRecord> records,
                                                TemplateMiner& miner, std::string_view series_id = "s0");

// Canonical template texts shared by several series. Identical texts map to
// one id, in order of first appearance.
class TemplateUniverse {
 public:
  TemplateId intern(std::string_view text);
  const std::string& text(TemplateId id) const { return texts_.at(id); }
  std::size_t size() const { return texts_.size(); }
  const std::vector<std::string>& texts() const { return texts_; }

 private:
  std::vector<std::string> texts_;
  std::unordered_map<std::string, TemplateId> ids_;
};

// Rewrites miner-local ids to universe ids (re-sorting and deduplicating).
void remap_to_universe(std::span<Checkpoint> checkpoints, const TemplateMiner& miner,
                       TemplateUniverse& universe);

// id<TAB>match_count<TAB>text, one template per line.
void write_template_dump(std::ostream& out, std::span<const Template> templates);

}  // namespace logcurves::templates
