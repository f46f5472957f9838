#include <sstream>
#include <string>

#include <benchmark/benchmark.h>

#include "logcurves/pipeline.hpp"
#include "logcurves/synth.hpp"

namespace lc = logcurves;

namespace {

// End to end from log text, so line splitting and UTF-8 checks are included.
// Reading the file from disk is not.
void BM_Analyze(benchmark::State& state) {
  const auto lines = static_cast<std::size_t>(state.range(0));
  const auto templates = static_cast<std::size_t>(state.range(1));
  std::ostringstream out;
  lc::synth::write_log(out, lc::synth::throughput_log({lines, templates, 120, 1}));
  const std::string text = out.str();
  lc::pipeline::PipelineConfig config;
  config.distance.threads = 1;
  for (auto _ : state) {
    std::vector<lc::pipeline::SeriesInput> input;
    input.push_back({"s0", "bench", lc::ingest::split_lines(lc::ingest::sanitize_utf8(text), 0), {}});
    benchmark::DoNotOptimize(lc::pipeline::analyze(std::move(input), config));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * lines));
}
BENCHMARK(BM_Analyze)
    ->Args({125'000, 100})
    ->Args({250'000, 100})
    ->Args({500'000, 100})
    ->Args({250'000, 1200})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
