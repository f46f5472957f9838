#include "logcurves/distance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "logcurves/error.hpp"

namespace logcurves::distance {

namespace {

constexpr double kAbsent = -1.0;

// Global edit distance, bit-parallel over 64-bit blocks of the pattern.
std::size_t myers_distance(std::string_view pattern, std::string_view text) {
  const std::size_t m = pattern.size();
  if (m == 0) return text.size();
  if (text.empty()) return m;
  const std::size_t words = (m + 63) / 64;

  thread_local std::vector<std::uint64_t> peq;
  if (peq.size() < words * 256) peq.assign(words * 256, 0);
  for (std::size_t i = 0; i < m; ++i) {
    peq[(i / 64) * 256 + static_cast<unsigned char>(pattern[i])] |= std::uint64_t{1} << (i % 64);
  }

  std::size_t distance = m;
  const std::uint64_t last = std::uint64_t{1} << ((m - 1) % 64);

  if (words == 1) {
    std::uint64_t vp = ~std::uint64_t{0};
    std::uint64_t vn = 0;
    for (const char ch : text) {
      const std::uint64_t eq = peq[static_cast<unsigned char>(ch)];
      const std::uint64_t d0 = (((eq & vp) + vp) ^ vp) | eq | vn;
      std::uint64_t hp = vn | ~(d0 | vp);
      std::uint64_t hn = vp & d0;
      if (hp & last) ++distance;
      if (hn & last) --distance;
      hp = (hp << 1) | 1;
      hn <<= 1;
      vp = hn | ~(d0 | hp);
      vn = hp & d0;
    }
  } else {
    thread_local std::vector<std::uint64_t> vp_blocks;
    thread_local std::vector<std::uint64_t> vn_blocks;
    vp_blocks.assign(words, ~std::uint64_t{0});
    vn_blocks.assign(words, 0);
    for (const char ch : text) {
      std::uint64_t hp_carry = 1;
      std::uint64_t hn_carry = 0;
      for (std::size_t w = 0; w < words; ++w) {
        const std::uint64_t eq = peq[w * 256 + static_cast<unsigned char>(ch)];
        const std::uint64_t vp = vp_blocks[w];
        const std::uint64_t vn = vn_blocks[w];
        const std::uint64_t x = eq | hn_carry;
        const std::uint64_t d0 = (((x & vp) + vp) ^ vp) | x | vn;
        std::uint64_t hp = vn | ~(d0 | vp);
        std::uint64_t hn = d0 & vp;
        const std::uint64_t hp_in = hp_carry;
        const std::uint64_t hn_in = hn_carry;
        if (w + 1 < words) {
          hp_carry = hp >> 63;
          hn_carry = hn >> 63;
        } else {
          hp_carry = (hp & last) ? 1 : 0;
          hn_carry = (hn & last) ? 1 : 0;
        }
        hp = (hp << 1) | hp_in;
        hn = (hn << 1) | hn_in;
        vp_blocks[w] = hn | ~(d0 | hp);
        vn_blocks[w] = hp & d0;
      }
      distance += hp_carry;
      distance -= hn_carry;
    }
  }

  for (std::size_t i = 0; i < m; ++i) peq[(i / 64) * 256 + static_cast<unsigned char>(pattern[i])] = 0;
  return distance;
}

double weighted_dp(std::string_view a, std::string_view b, const EditWeights& w) {
  std::vector<double> prev(b.size() + 1);
  std::vector<double> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<double>(j) * w.insert;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<double>(i) * w.remove;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const double substitution = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0.0 : w.substitute);
      cur[j] = std::min({prev[j] + w.remove, cur[j - 1] + w.insert, substitution});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t gram_count(std::size_t length, std::size_t q) { return length >= q ? length - q + 1 : 0; }

std::uint64_t gram_key(std::string_view s, std::size_t pos, std::size_t q) {
  std::uint64_t key = 0;
  for (std::size_t k = 0; k < q; ++k) key = (key << 8) | static_cast<unsigned char>(s[pos + k]);
  return key;
}

// Lower bound of the normalized template distance from lengths alone.
double length_bound(std::size_t la, std::size_t lb, const DistanceConfig& config) {
  if (config.metric == StringMetric::kQGram) {
    const auto ga = gram_count(la, config.qgram);
    const auto gb = gram_count(lb, config.qgram);
    if (ga + gb == 0) return 0.0;
    return static_cast<double>(ga > gb ? ga - gb : gb - ga) / static_cast<double>(ga + gb);
  }
  const auto longer = std::max(la, lb);
  if (longer == 0) return 0.0;
  const auto diff = static_cast<double>(la > lb ? la - lb : lb - la);
  const auto& w = config.weights;
  return diff * std::min(w.insert, w.remove) / (w.max() * static_cast<double>(longer));
}

}  // namespace

double EditWeights::max() const { return std::max({insert, remove, substitute}); }

void DistanceConfig::validate() const {
  const auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(weights.insert) || !positive(weights.remove) || !positive(weights.substitute)) {
    throw ConfigError("edit weights must be positive and finite");
  }
  if (metric == StringMetric::kQGram && (qgram < 1 || qgram > 8)) {
    throw ConfigError(fmt::format("q-gram size must lie in [1, 8], got {}", qgram));
  }
  if (threads < 1) throw ConfigError("threads must be at least 1");
}

double levenshtein(std::string_view a, std::string_view b, const EditWeights& weights) {
  if (weights.unit()) {
    const auto& shorter = a.size() <= b.size() ? a : b;
    const auto& longer = a.size() <= b.size() ? b : a;
    return static_cast<double>(myers_distance(shorter, longer));
  }
  return weighted_dp(a, b, weights);
}

double norm_template_distance(std::string_view a, std::string_view b, const EditWeights& weights) {
  const auto longer = std::max(a.size(), b.size());
  if (longer == 0) return 0.0;
  if (a == b) return 0.0;
  const double d = levenshtein(a, b, weights) / (weights.max() * static_cast<double>(longer));
  return std::min(d, 1.0);
}

double qgram_distance(std::string_view a, std::string_view b, std::size_t q) {
  const auto ga = gram_count(a.size(), q);
  const auto gb = gram_count(b.size(), q);
  if (ga + gb == 0) return a == b ? 0.0 : 1.0;
  std::vector<std::uint64_t> pa(ga);
  std::vector<std::uint64_t> pb(gb);
  for (std::size_t i = 0; i < ga; ++i) pa[i] = gram_key(a, i, q);
  for (std::size_t i = 0; i < gb; ++i) pb[i] = gram_key(b, i, q);
  std::sort(pa.begin(), pa.end());
  std::sort(pb.begin(), pb.end());
  std::size_t i = 0, j = 0, shared = 0;
  while (i < ga && j < gb) {
    if (pa[i] == pb[j]) {
      ++shared;
      ++i;
      ++j;
    } else if (pa[i] < pb[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  // sum |G_a - G_b| = |G_a| + |G_b| - 2 * shared
  return static_cast<double>(ga + gb - 2 * shared) / static_cast<double>(ga + gb);
}

double template_distance(std::string_view a, std::string_view b, const DistanceConfig& config) {
  if (config.metric == StringMetric::kQGram) return qgram_distance(a, b, config.qgram);
  return norm_template_distance(a, b, config.weights);
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double sum = 0.0;
    for (const double v : values) sum += v;
    return sum;
  }
  const auto half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double symmetrize(std::size_t nx, std::size_t ny, double x_to_y, double y_to_x) {
  if (nx == 1 && ny == 1) return (x_to_y + y_to_x) / 2.0;
  if (ny == 1) return x_to_y;
  if (nx == 1) return y_to_x;
  const double lx = std::log2(static_cast<double>(nx));
  const double ly = std::log2(static_cast<double>(ny));
  return std::min((lx * x_to_y + ly * y_to_x) / (lx + ly), 1.0);
}

double directed_distance(std::span<const std::string> x, std::span<const std::string> y,
                         const DistanceConfig& config) {
  if (x.empty() || y.empty()) throw Error("directed_distance needs non-empty template sets");
  std::vector<double> minima;
  minima.reserve(x.size());
  for (const auto& a : x) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : y) {
      best = std::min(best, template_distance(a, b, config));
      if (best == 0.0) break;
    }
    minima.push_back(best);
  }
  return pairwise_sum(minima) / static_cast<double>(x.size());
}

double checkpoint_distance(std::span<const std::string> x, std::span<const std::string> y,
                           const DistanceConfig& config) {
  return symmetrize(x.size(), y.size(), directed_distance(x, y, config), directed_distance(y, x, config));
}

TemplatePairCache::TemplatePairCache(std::size_t universe_size, bool symmetric)
    : universe_size_(universe_size), symmetric_(symmetric) {
  if (universe_size_ <= kDenseLimit) {
    const auto cells = symmetric_ ? universe_size_ * (universe_size_ + 1) / 2 : universe_size_ * universe_size_;
    dense_ = std::make_unique<std::atomic<double>[]>(std::max<std::size_t>(cells, 1));
    for (std::size_t i = 0; i < cells; ++i) dense_[i].store(kAbsent, std::memory_order_relaxed);
  } else {
    shards_ = std::make_unique<Shard[]>(kShards);
  }
}

TemplatePairCache::~TemplatePairCache() = default;

std::uint64_t TemplatePairCache::key(templates::TemplateId a, templates::TemplateId b) const {
  if (symmetric_ && b < a) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

std::size_t TemplatePairCache::dense_index(templates::TemplateId a, templates::TemplateId b) const {
  if (!symmetric_) return static_cast<std::size_t>(a) * universe_size_ + b;
  if (b < a) std::swap(a, b);
  return static_cast<std::size_t>(b) * (b + 1) / 2 + a;
}

std::optional<double> TemplatePairCache::find(templates::TemplateId a, templates::TemplateId b) const {
  if (dense_) {
    const double v = dense_[dense_index(a, b)].load(std::memory_order_relaxed);
    if (v == kAbsent) return std::nullopt;
    return v;
  }
  const auto k = key(a, b);
  const auto& shard = shards_[k % kShards];
  std::shared_lock lock(shard.mutex);
  if (const auto it = shard.values.find(k); it != shard.values.end()) return it->second;
  return std::nullopt;
}

double TemplatePairCache::insert_if_absent(templates::TemplateId a, templates::TemplateId b, double value) {
  if (dense_) {
    double expected = kAbsent;
    if (dense_[dense_index(a, b)].compare_exchange_strong(expected, value, std::memory_order_relaxed)) {
      entries_.fetch_add(1, std::memory_order_relaxed);
      return value;
    }
    return expected;
  }
  const auto k = key(a, b);
  auto& shard = shards_[k % kShards];
  std::unique_lock lock(shard.mutex);
  const auto [it, inserted] = shard.values.emplace(k, value);
  if (inserted) entries_.fetch_add(1, std::memory_order_relaxed);
  return it->second;
}

namespace {

struct Prepared {
  std::vector<std::pair<std::size_t, templates::TemplateId>> by_length;  // (length, id) sorted
  std::vector<std::uint64_t> members;                                    // bitset over the universe

  bool contains(templates::TemplateId id) const { return (members[id / 64] >> (id % 64)) & 1U; }
};

// The closest templates of one template over the whole universe, ascending.
// When a target set holds most of the universe, its nearest member is usually
// one of these, which avoids scanning the set.
struct Neighbors {
  static constexpr std::size_t kKeep = 8;
  std::array<std::pair<double, templates::TemplateId>, kKeep> items{};
  std::size_t count = 0;
};

class MatrixBuilder {
 public:
  MatrixBuilder(std::span<const templates::Checkpoint> checkpoints, std::span<const std::string> texts,
                const DistanceConfig& config)
      : checkpoints_(checkpoints),
        texts_(texts),
        config_(config),
        cache_(texts.size(), config.metric == StringMetric::kQGram || config.weights.symmetric()),
        neighbors_(texts.size()),
        neighbors_once_(std::make_unique<std::once_flag[]>(texts.size())) {
    const auto words = (texts.size() + 63) / 64;
    prepared_.resize(checkpoints.size());
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      const auto& ids = checkpoints[c].template_ids;
      if (ids.empty()) throw Error(fmt::format("checkpoint {} has no templates", c));
      auto& p = prepared_[c];
      p.members.assign(words, 0);
      for (const auto id : ids) {
        if (id >= texts.size()) throw Error(fmt::format("template id {} outside the universe", id));
        p.by_length.emplace_back(texts[id].size(), id);
        p.members[id / 64] |= std::uint64_t{1} << (id % 64);
      }
      std::sort(p.by_length.begin(), p.by_length.end());
    }
  }

  double distance(std::size_t i, std::size_t j) {
    const auto& x = checkpoints_[i].template_ids;
    const auto& y = checkpoints_[j].template_ids;
    if (x == y) return 0.0;
    return symmetrize(x.size(), y.size(), directed(i, j), directed(j, i));
  }

  MatrixStats stats() const { return {computed_.load(), pruned_.load()}; }

 private:
  double pair_distance(templates::TemplateId a, templates::TemplateId b) {
    if (a == b) return 0.0;
    if (const auto cached = cache_.find(a, b)) return *cached;
    computed_.fetch_add(1, std::memory_order_relaxed);
    return cache_.insert_if_absent(a, b, template_distance(texts_[a], texts_[b], config_));
  }

  double directed(std::size_t from, std::size_t to) {
    const auto& source = checkpoints_[from].template_ids;
    const auto& target = prepared_[to];
    const bool monotone_bound = config_.metric == StringMetric::kLevenshtein;
    thread_local std::vector<double> minima;
    minima.clear();
    std::size_t pruned = 0;

    // Building a neighbor list costs one scan of the universe, so it only
    // pays off for targets covering a large part of it.
    const bool dense_target = 2 * target.by_length.size() >= texts_.size();

    for (const auto a : source) {
      if (target.contains(a)) {
        minima.push_back(0.0);
        continue;
      }
      if (dense_target) {
        if (const auto d = nearest_listed(a, target)) {
          minima.push_back(*d);
          continue;
        }
      }
      const auto la = texts_[a].size();
      double best = std::numeric_limits<double>::infinity();
      const auto& candidates = target.by_length;
      // Expand outwards from the closest length; the bound grows with the
      // length difference on either side.
      auto upper = std::lower_bound(candidates.begin(), candidates.end(),
                                    std::pair<std::size_t, templates::TemplateId>{la, 0});
      auto lower = upper;
      bool up_open = upper != candidates.end();
      bool down_open = lower != candidates.begin();
      while ((up_open || down_open) && best > 0.0) {
        bool take_up = up_open;
        if (up_open && down_open) take_up = (upper->first - la) <= (la - std::prev(lower)->first);
        const auto& entry = take_up ? *upper : *std::prev(lower);
        const double bound = length_bound(la, entry.first, config_);
        if (bound >= best) {
          ++pruned;
          if (monotone_bound) {
            (take_up ? up_open : down_open) = false;
          }
        } else {
          best = std::min(best, pair_distance(a, entry.second));
        }
        if (take_up) {
          ++upper;
          up_open = up_open && upper != candidates.end();
        } else {
          --lower;
          down_open = down_open && lower != candidates.begin();
        }
      }
      minima.push_back(best);
    }
    pruned_.fetch_add(pruned, std::memory_order_relaxed);
    return pairwise_sum(minima) / static_cast<double>(source.size());
  }

  // Distance to the nearest member of target if it is among a's listed
  // neighbors. Exact: every closer universe template is not in the target.
  std::optional<double> nearest_listed(templates::TemplateId a, const Prepared& target) {
    std::call_once(neighbors_once_[a], [&] {
      auto& list = neighbors_[a];
      for (templates::TemplateId b = 0; b < texts_.size(); ++b) {
        if (b == a) continue;
        const std::pair<double, templates::TemplateId> entry{pair_distance(a, b), b};
        if (list.count == Neighbors::kKeep && !(entry < list.items[list.count - 1])) continue;
        auto pos = std::upper_bound(list.items.begin(), list.items.begin() + list.count, entry);
        if (list.count < Neighbors::kKeep) ++list.count;
        std::move_backward(pos, list.items.begin() + list.count - 1, list.items.begin() + list.count);
        *pos = entry;
      }
    });
    const auto& list = neighbors_[a];
    for (std::size_t k = 0; k < list.count; ++k) {
      if (target.contains(list.items[k].second)) return list.items[k].first;
    }
    return std::nullopt;
  }

  std::span<const templates::Checkpoint> checkpoints_;
  std::span<const std::string> texts_;
  const DistanceConfig& config_;
  TemplatePairCache cache_;
  std::vector<Neighbors> neighbors_;
  std::unique_ptr<std::once_flag[]> neighbors_once_;
  std::vector<Prepared> prepared_;
  std::atomic<std::size_t> computed_{0};
  std::atomic<std::size_t> pruned_{0};
};

}  // namespace

DistanceMatrix distance_matrix(std::span<const templates::Checkpoint> checkpoints,
                               std::span<const std::string> universe_texts, const DistanceConfig& config,
                               MatrixStats* stats) {
  config.validate();
  const std::size_t n = checkpoints.size();
  DistanceMatrix matrix(n);
  if (n == 0) return matrix;
  MatrixBuilder builder(checkpoints, universe_texts, config);

  std::atomic<std::size_t> next_row{0};
  auto work = [&] {
    for (std::size_t i = next_row.fetch_add(1); i < n; i = next_row.fetch_add(1)) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = builder.distance(i, j);
        matrix(i, j) = d;
        matrix(j, i) = d;
      }
    }
  };
  const auto threads = std::min(config.threads, n);
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& thread : pool) thread.join();
  }
  if (stats) *stats = builder.stats();
  return matrix;
}

void write_matrix_csv(std::ostream& out, const DistanceMatrix& matrix) {
  const auto n = matrix.size();
  for (std::size_t j = 0; j < n; ++j) out << (j ? "," : "") << j;
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out << (j ? "," : "") << fmt::format("{:.17g}", matrix(i, j));
    out << '\n';
  }
}

}  // namespace logcurves::distance
