#include <random>
#include <set>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "logcurves/distance.hpp"
#include "logcurves/ingest.hpp"
#include "logcurves/projection.hpp"
#include "logcurves/synth.hpp"
#include "logcurves/templates.hpp"

namespace lc = logcurves;

namespace {

std::string random_text(std::mt19937_64& rng, std::size_t length) {
  std::string s(length, 'a');
  for (auto& c : s) c = static_cast<char>('a' + rng() % 26);
  return s;
}

void BM_Levenshtein(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto a = random_text(rng, static_cast<std::size_t>(state.range(0)));
  const auto b = random_text(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lc::distance::levenshtein(a, b));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Levenshtein)->Arg(16)->Arg(64)->Arg(120)->Arg(500);

void BM_LevenshteinWeighted(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto a = random_text(rng, static_cast<std::size_t>(state.range(0)));
  const auto b = random_text(rng, static_cast<std::size_t>(state.range(0)));
  const lc::distance::EditWeights w{1.0, 1.0, 2.0};
  for (auto _ : state) benchmark::DoNotOptimize(lc::distance::levenshtein(a, b, w));
}
BENCHMARK(BM_LevenshteinWeighted)->Arg(16)->Arg(120);

void BM_QGram(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto a = random_text(rng, 120);
  const auto b = random_text(rng, 120);
  for (auto _ : state) benchmark::DoNotOptimize(lc::distance::qgram_distance(a, b, 2));
}
BENCHMARK(BM_QGram);

// n checkpoints drawing `per` templates each from a universe of `universe`.
void BM_DistanceMatrix(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto per = static_cast<std::size_t>(state.range(1));
  const auto universe_size = static_cast<std::size_t>(state.range(2));
  std::mt19937_64 rng(4);
  std::vector<std::string> universe;
  for (std::size_t i = 0; i < universe_size; ++i) universe.push_back(random_text(rng, 40 + rng() % 80));
  std::vector<lc::templates::Checkpoint> checkpoints(n);
  for (auto& c : checkpoints) {
    std::set<lc::templates::TemplateId> ids;
    while (ids.size() < per) ids.insert(static_cast<lc::templates::TemplateId>(rng() % universe_size));
    c.template_ids.assign(ids.begin(), ids.end());
  }
  for (auto _ : state) benchmark::DoNotOptimize(lc::distance::distance_matrix(checkpoints, universe));
}
BENCHMARK(BM_DistanceMatrix)->Args({60, 10, 100})->Args({60, 60, 100})->Args({60, 200, 1200})->Unit(benchmark::kMillisecond);

void BM_Mask(benchmark::State& state) {
  const lc::templates::Masker masker;
  const std::string body =
      "INFO [worker-12] request 4f1c2a9e-1b2c-4d5e-8f90-123456789abc from 10.0.3.17 took 1234 ms, 0xdeadbeef";
  std::string buffer;
  std::vector<std::string_view> tokens;
  for (auto _ : state) {
    masker.apply(body, buffer, tokens);
    benchmark::DoNotOptimize(tokens.data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * body.size()));
}
BENCHMARK(BM_Mask);

void BM_TemplateMiner(benchmark::State& state) {
  const auto log = lc::synth::throughput_log({20000, static_cast<std::size_t>(state.range(0)), 120, 5});
  const auto records = lc::ingest::assemble_records(lc::synth::to_raw_lines(log));
  for (auto _ : state) {
    lc::templates::TemplateMiner miner;
    for (const auto& r : records) miner.add(r.body);
    benchmark::DoNotOptimize(miner.size());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * records.size()));
}
BENCHMARK(BM_TemplateMiner)->Arg(100)->Arg(1200)->Unit(benchmark::kMillisecond);

void BM_AssembleRecords(benchmark::State& state) {
  const auto lines = lc::synth::to_raw_lines(lc::synth::throughput_log({20000, 100, 120, 6}));
  for (auto _ : state) benchmark::DoNotOptimize(lc::ingest::assemble_records(lines));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * lines.size()));
}
BENCHMARK(BM_AssembleRecords)->Unit(benchmark::kMillisecond);

void BM_Embed(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  lc::distance::DistanceMatrix d(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d(i, j) = d(j, i) = u(rng);
  }
  std::vector<lc::ingest::EpochMillis> timestamps(n);
  for (std::size_t i = 0; i < n; ++i) timestamps[i] = static_cast<lc::ingest::EpochMillis>(i * 1000);
  for (auto _ : state) benchmark::DoNotOptimize(lc::projection::embed(d, timestamps, 0.25));
}
BENCHMARK(BM_Embed)->Arg(60)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
