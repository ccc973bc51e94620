#include <benchmark/benchmark.h>

#include <map>

#include "rpeak/adaptive_pipeline.hpp"
#include "rpeak/bayeslope.hpp"
#include "rpeak/energy_model.hpp"
#include "rpeak/hysteresis_detector.hpp"
#include "rpeak/preprocess.hpp"

using namespace rpeak;

namespace {

const SyntheticEcg& record(int seconds) {
  static std::map<int, SyntheticEcg> cache;
  auto it = cache.find(seconds);
  if (it == cache.end()) {
    SynthesisSpec spec;
    spec.duration_s = seconds;
    spec.hr_bpm = PiecewiseLinear({{0.0, 80.0}, {static_cast<double>(seconds), 160.0}});
    spec.beat_pattern = {1.0, 1.0, 0.6};
    spec.noise_sd_uv = 20;
    spec.baseline_wander_uv = 150;
    spec.seed = 11;
    it = cache.emplace(seconds, synthesize_ecg(spec)).first;
  }
  return it->second;
}

const RrThresholds kThr{0.7, 1.4, 1000, std::nullopt};

}  // namespace

static void BM_Erode(benchmark::State& state) {
  const auto& x = record(60).record.samples;
  const int len = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(erode(x, len));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_Erode)->Arg(35)->Arg(115)->Arg(400);

static void BM_Enhance(benchmark::State& state) {
  const auto& rec = record(static_cast<int>(state.range(0))).record;
  const PreprocessConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(enhance(rec, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rec.size()));
}
BENCHMARK(BM_Enhance)->Arg(25)->Arg(300)->Unit(benchmark::kMillisecond);

static void BM_Hysteresis(benchmark::State& state) {
  const auto cfg = PipelineConfig::for_rate(250);
  const auto s = enhance(record(300).record, cfg.preprocess);
  for (auto _ : state) benchmark::DoNotOptimize(detect_lightweight(s, cfg.geometry, cfg.hysteresis));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.size()));
}
BENCHMARK(BM_Hysteresis)->Unit(benchmark::kMicrosecond);

static void BM_BayeSlope(benchmark::State& state) {
  const auto cfg = PipelineConfig::for_rate(250);
  const auto s = enhance(record(300).record, cfg.preprocess);
  for (auto _ : state) benchmark::DoNotOptimize(detect_bayeslope(s, cfg.geometry, cfg.bayeslope));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.size()));
}
BENCHMARK(BM_BayeSlope)->Unit(benchmark::kMicrosecond);

static void BM_Pipeline(benchmark::State& state) {
  const auto bench = static_cast<Bench>(state.range(0));
  const auto cfg = PipelineConfig::for_rate(250);
  const auto& rec = record(300).record;
  for (auto _ : state) benchmark::DoNotOptimize(process_record(rec, bench, kThr, cfg));
  state.SetLabel(to_string(bench));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rec.size()));
}
BENCHMARK(BM_Pipeline)
    ->Arg(static_cast<int>(Bench::lightweight))
    ->Arg(static_cast<int>(Bench::bayeslope))
    ->Arg(static_cast<int>(Bench::adaptive))
    ->Unit(benchmark::kMillisecond);

static void BM_EnergySimulate(benchmark::State& state) {
  const auto cal = calibrate(CostModel{}, PowerProfile{});
  const auto rep = process_record(record(300).record, Bench::adaptive, kThr, PipelineConfig::for_rate(250));
  for (auto _ : state) {
    const auto t = trace_from_decisions(rep, cal.cost, cal.profile);
    benchmark::DoNotOptimize(simulate(t, cal.profile));
  }
}
BENCHMARK(BM_EnergySimulate);

BENCHMARK_MAIN();
