#include "logcurves/templates.hpp"

#include <algorithm>
#include <optional>
#include <ostream>

#include <fmt/format.h>

#include "logcurves/error.hpp"

namespace logcurves::templates {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_alnum(char c) { return is_digit(c) || is_alpha(c); }
bool is_hex(char c) { return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F'); }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool word_ends(std::string_view s, std::size_t end) { return end >= s.size() || !is_alnum(s[end]); }

std::size_t hex_run(std::string_view s, std::size_t pos) {
  std::size_t end = pos;
  while (end < s.size() && is_hex(s[end])) ++end;
  return end - pos;
}

std::optional<std::size_t> match_uuid(std::string_view s, std::size_t p) {
  static constexpr std::size_t kGroups[] = {8, 4, 4, 4, 12};
  std::size_t pos = p;
  for (std::size_t g = 0; g < 5; ++g) {
    if (g > 0) {
      if (pos >= s.size() || s[pos] != '-') return std::nullopt;
      ++pos;
    }
    if (hex_run(s, pos) < kGroups[g]) return std::nullopt;
    pos += kGroups[g];
  }
  if (!word_ends(s, pos)) return std::nullopt;
  return pos;
}

std::optional<std::size_t> match_ipv4(std::string_view s, std::size_t p) {
  // Not the tail of a longer dotted number such as a version string.
  if (p >= 2 && s[p - 1] == '.' && is_digit(s[p - 2])) return std::nullopt;
  std::size_t pos = p;
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (pos >= s.size() || s[pos] != '.') return std::nullopt;
      ++pos;
    }
    std::size_t len = 0;
    while (pos + len < s.size() && is_digit(s[pos + len]) && len < 4) ++len;
    if (len == 0 || len > 3) return std::nullopt;
    pos += len;
  }
  if (!word_ends(s, pos)) return std::nullopt;
  if (pos + 1 < s.size() && s[pos] == '.' && is_digit(s[pos + 1])) return std::nullopt;
  return pos;
}

std::optional<std::size_t> match_hex(std::string_view s, std::size_t p) {
  std::size_t pos = p;
  if (pos + 1 < s.size() && s[pos] == '0' && (s[pos + 1] == 'x' || s[pos + 1] == 'X')) pos += 2;
  const auto run = hex_run(s, pos);
  if (run < 8) return std::nullopt;
  const auto digits_in_run = std::count_if(s.begin() + static_cast<std::ptrdiff_t>(pos),
                                           s.begin() + static_cast<std::ptrdiff_t>(pos + run), is_digit);
  if (digits_in_run == 0 || !word_ends(s, pos + run)) return std::nullopt;
  return pos + run;
}

std::optional<std::size_t> match_number(std::string_view s, std::size_t p) {
  std::size_t end = p;
  while (end < s.size() && is_digit(s[end])) ++end;
  if (end - p < 2 || !word_ends(s, end)) return std::nullopt;
  return end;
}

void mask_builtin(std::string_view s, std::string& out) {
  out.clear();
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    const bool boundary = i == 0 || !is_alnum(s[i - 1]);
    if (boundary && is_hex(c)) {
      if (auto end = match_uuid(s, i)) {
        out += "<UUID>";
        i = *end;
        continue;
      }
      if (is_digit(c)) {
        if (auto end = match_ipv4(s, i)) {
          out += "<IP>";
          i = *end;
          continue;
        }
      }
      if (auto end = match_hex(s, i)) {
        out += "<HEX>";
        i = *end;
        continue;
      }
      if (is_digit(c)) {
        if (auto end = match_number(s, i)) {
          out += "<NUM>";
          i = *end;
          continue;
        }
      }
    }
    out += c;
    ++i;
  }
}

void split_whitespace(std::string_view s, std::vector<std::string_view>& tokens) {
  tokens.clear();
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t begin = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > begin) tokens.push_back(s.substr(begin, i - begin));
  }
}

bool has_digit(std::string_view token) { return std::any_of(token.begin(), token.end(), is_digit); }

std::string_view utf8_prefix(std::string_view s, std::size_t max_bytes) {
  if (s.size() <= max_bytes) return s;
  std::size_t cut = max_bytes;
  while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
  return s.substr(0, cut);
}

constexpr std::string_view kEmptyToken = "<EMPTY>";

}  // namespace

void ClusterConfig::validate() const {
  if (tree_depth < 3) throw ConfigError(fmt::format("tree-depth must be at least 3, got {}", tree_depth));
  if (!(similarity_threshold > 0.0) || similarity_threshold > 1.0) {
    throw ConfigError(fmt::format("similarity-threshold must lie in (0, 1], got {}", similarity_threshold));
  }
  if (max_children < 2) throw ConfigError("max-children must be at least 2");
  if (max_template_len < 1) throw ConfigError("max-template-len must be at least 1");
}

std::string Template::text() const {
  std::string out;
  for (const auto& token : tokens) {
    if (!out.empty()) out += ' ';
    out += token;
  }
  return out;
}

Masker::Masker(const ClusterConfig& config) : max_len_(config.max_template_len) {
  for (const auto& rule : config.extra_mask_rules) {
    try {
      extra_.emplace_back(std::regex(rule.pattern, std::regex::ECMAScript | std::regex::optimize),
                          rule.placeholder);
    } catch (const std::regex_error& e) {
      throw ConfigError(fmt::format("invalid mask rule '{}': {}", rule.pattern, e.what()));
    }
  }
}

void Masker::apply(std::string_view body, std::string& buffer, std::vector<std::string_view>& tokens) const {
  mask_builtin(body, buffer);
  for (const auto& [pattern, placeholder] : extra_) buffer = std::regex_replace(buffer, pattern, placeholder);
  buffer.resize(utf8_prefix(buffer, max_len_).size());
  split_whitespace(buffer, tokens);
}

std::vector<std::string> Masker::operator()(std::string_view body) const {
  std::string buffer;
  std::vector<std::string_view> views;
  apply(body, buffer, views);
  return {views.begin(), views.end()};
}

std::vector<std::string> mask(std::string_view body, const ClusterConfig& config) {
  return Masker{config}(body);
}

struct TemplateMiner::Node {
  std::map<std::string, std::unique_ptr<Node>, std::less<>> children;
  std::vector<TemplateId> clusters;
  // Token sequence -> cluster it matched. Valid while no cluster of this leaf
  // changes; cleared whenever one does, so hits equal a full scan.
  std::unordered_map<std::string, TemplateId> memo;
};

namespace {
constexpr std::size_t kMemoLimit = 1 << 14;

void memo_key(std::span<const std::string_view> tokens, std::string& key) {
  key.clear();
  for (const auto token : tokens) {
    key += token;
    key.push_back('\x1f');
  }
}
}  // namespace

TemplateMiner::TemplateMiner(ClusterConfig config) : config_(std::move(config)), masker_(config_) {
  config_.validate();
}

TemplateMiner::~TemplateMiner() = default;
TemplateMiner::TemplateMiner(TemplateMiner&&) noexcept = default;
TemplateMiner& TemplateMiner::operator=(TemplateMiner&&) noexcept = default;

std::size_t TemplateMiner::token_layers(std::size_t token_count) const {
  return std::min(config_.tree_depth - 2, token_count);
}

TemplateMiner::Node* TemplateMiner::search(Node& root, std::span<const std::string_view> tokens) const {
  Node* node = &root;
  for (std::size_t layer = 0; layer < token_layers(tokens.size()); ++layer) {
    auto it = node->children.find(tokens[layer]);
    if (it == node->children.end()) it = node->children.find(kWildcard);
    if (it == node->children.end()) return nullptr;
    node = it->second.get();
  }
  return node;
}

TemplateMiner::Node& TemplateMiner::insert_path(Node& root, std::span<const std::string_view> tokens) {
  Node* node = &root;
  auto descend = [](Node& parent, std::string_view key) -> Node& {
    auto it = parent.children.find(key);
    if (it == parent.children.end()) {
      it = parent.children.emplace(std::string(key), std::make_unique<Node>()).first;
    }
    return *it->second;
  };
  for (std::size_t layer = 0; layer < token_layers(tokens.size()); ++layer) {
    const auto token = tokens[layer];
    auto& children = node->children;
    if (children.find(token) != children.end()) {
      node = children.find(token)->second.get();
    } else if (has_digit(token) || token == kWildcard) {
      node = &descend(*node, kWildcard);
    } else if (children.find(kWildcard) != children.end()) {
      node = children.size() < config_.max_children ? &descend(*node, token) : &descend(*node, kWildcard);
    } else if (children.size() + 1 < config_.max_children) {
      node = &descend(*node, token);
    } else {
      node = &descend(*node, kWildcard);
    }
  }
  return *node;
}

TemplateId TemplateMiner::assign(std::span<const std::string_view> input) {
  std::span<const std::string_view> tokens = input;
  const std::string_view empty[] = {kEmptyToken};
  if (tokens.empty()) tokens = empty;

  auto& root_slot = by_length_[tokens.size()];
  if (!root_slot) root_slot = std::make_unique<Node>();
  Node& root = *root_slot;
  Node* leaf = search(root, tokens);
  if (leaf != nullptr) {
    memo_key(tokens, key_);
    if (const auto it = leaf->memo.find(key_); it != leaf->memo.end()) {
      ++templates_[it->second].match_count;
      return it->second;
    }
  }

  std::optional<TemplateId> best;
  double best_similarity = -1.0;
  std::size_t best_params = 0;
  if (leaf != nullptr) {
    for (const auto id : leaf->clusters) {
      const auto& candidate = templates_[id].tokens;
      std::size_t equal = 0;
      std::size_t params = 0;
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (candidate[i] == kWildcard) {
          ++params;
        } else if (candidate[i] == tokens[i]) {
          ++equal;
        }
      }
      const double similarity = static_cast<double>(equal) / static_cast<double>(tokens.size());
      if (similarity > best_similarity || (similarity == best_similarity && params > best_params)) {
        best = id;
        best_similarity = similarity;
        best_params = params;
      }
    }
  }

  if (best && best_similarity >= config_.similarity_threshold) {
    auto& matched = templates_[*best];
    bool changed = false;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (matched.tokens[i] != tokens[i] && matched.tokens[i] != kWildcard) {
        matched.tokens[i] = kWildcard;
        changed = true;
      }
    }
    ++matched.match_count;
    if (changed || leaf->memo.size() >= kMemoLimit) leaf->memo.clear();
    leaf->memo.emplace(key_, matched.id);
    return matched.id;
  }

  const auto id = static_cast<TemplateId>(templates_.size());
  templates_.push_back(Template{id, {tokens.begin(), tokens.end()}, 1});
  auto& target = insert_path(root, tokens);
  target.clusters.push_back(id);
  target.memo.clear();
  return id;
}

TemplateId TemplateMiner::assign(std::span<const std::string> tokens) {
  std::vector<std::string_view> views(tokens.begin(), tokens.end());
  return assign(std::span<const std::string_view>(views));
}

TemplateId TemplateMiner::add(std::string_view body) {
  masker_.apply(body, scratch_, scratch_tokens_);
  return assign(std::span<const std::string_view>(scratch_tokens_));
}

std::vector<Checkpoint> checkpoints_from_events(std::span<const events::Event> events,
                                                std::span<const ingest::LogRecord> records,
                                                TemplateMiner& miner, std::string_view series_id) {
  std::vector<Checkpoint> checkpoints;
  checkpoints.reserve(events.size());
  for (std::size_t k = 0; k < events.size(); ++k) {
    const auto& event = events[k];
    Checkpoint checkpoint;
    checkpoint.index = k;
    checkpoint.timestamp = event.start_timestamp;
    checkpoint.record_count = event.size();
    checkpoint.series_id = std::string(series_id);
    checkpoint.template_ids.reserve(std::min<std::size_t>(event.size(), 64));
    for (std::size_t r = event.begin; r < event.end; ++r) {
      checkpoint.template_ids.push_back(miner.add(records[r].body));
    }
    std::sort(checkpoint.template_ids.begin(), checkpoint.template_ids.end());
    checkpoint.template_ids.erase(std::unique(checkpoint.template_ids.begin(), checkpoint.template_ids.end()),
                                  checkpoint.template_ids.end());
    checkpoints.push_back(std::move(checkpoint));
  }
  return checkpoints;
}

TemplateId TemplateUniverse::intern(std::string_view text) {
  const std::string key(text);
  if (const auto it = ids_.find(key); it != ids_.end()) return it->second;
  const auto id = static_cast<TemplateId>(texts_.size());
  texts_.push_back(key);
  ids_.emplace(key, id);
  return id;
}

void remap_to_universe(std::span<Checkpoint> checkpoints, const TemplateMiner& miner,
                       TemplateUniverse& universe) {
  std::vector<std::optional<TemplateId>> mapping(miner.size());
  for (auto& checkpoint : checkpoints) {
    for (auto& id : checkpoint.template_ids) {
      auto& slot = mapping.at(id);
      if (!slot) slot = universe.intern(miner.at(id).text());
      id = *slot;
    }
    auto& ids = checkpoint.template_ids;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  }
}

void write_template_dump(std::ostream& out, std::span<const Template> templates) {
  for (const auto& t : templates) out << t.id << '\t' << t.match_count << '\t' << t.text() << '\n';
}

}  // namespace logcurves::templates
