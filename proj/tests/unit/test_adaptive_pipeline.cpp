#include <doctest.h>

#include "helpers.hpp"
#include "rpeak/adaptive_pipeline.hpp"
#include "rpeak/error.hpp"
#include "rpeak/evaluation.hpp"

using namespace rpeak;

namespace {

PeakList tagged(std::initializer_list<std::int64_t> idx, PeakSource src) {
  PeakList p;
  for (auto i : idx) p.push(i, src);
  return p;
}

WindowDecision win(std::int64_t k, std::int64_t start, std::int64_t end, bool bs) {
  WindowDecision d;
  d.window_index = k;
  d.start = start;
  d.end = end;
  d.bs_invoked = bs;
  d.bs_window_count = bs ? 1 : 0;
  return d;
}

const RrThresholds kThr{0.7, 1.4, 1000, std::nullopt};

SyntheticEcg synth(double hr, std::vector<double> pattern = {1.0}) {
  SynthesisSpec spec;
  spec.duration_s = 30;
  spec.hr_bpm = PiecewiseLinear::constant(hr);
  spec.beat_pattern = std::move(pattern);
  return synthesize_ecg(spec);
}

}  // namespace

TEST_CASE("bench names") {
  for (auto b : {Bench::lightweight, Bench::bayeslope, Bench::adaptive}) CHECK(parse_bench(to_string(b)) == b);
  CHECK_THROWS_AS(parse_bench("reward"), ConfigError);
}

TEST_CASE("merge takes each window's source") {
  const auto lw = tagged({50, 150, 250, 350}, PeakSource::lightweight);
  const auto bs = tagged({52, 148, 200, 252, 352}, PeakSource::bayeslope);
  const std::vector<WindowDecision> d{win(0, 0, 100, false), win(1, 100, 300, true), win(2, 300, 400, false)};
  const auto m = merge_peaks(lw, bs, d, 60);
  CHECK(m.indices == std::vector<std::int64_t>{50, 148, 252, 350});
  CHECK(m.sources ==
        std::vector<PeakSource>{PeakSource::lightweight, PeakSource::bayeslope, PeakSource::bayeslope,
                                PeakSource::lightweight});
}

TEST_CASE("merge collapses near-duplicates at window seams") {
  // the same beat reported by both sides of a boundary
  const auto lw = tagged({95}, PeakSource::lightweight);
  const auto bs = tagged({103}, PeakSource::bayeslope);
  const std::vector<WindowDecision> d{win(0, 0, 100, false), win(1, 100, 200, true)};
  const auto m = merge_peaks(lw, bs, d, 60);
  CHECK(m.indices == std::vector<std::int64_t>{103});
  CHECK(m.sources[0] == PeakSource::bayeslope);

  // a lightweight peak never displaces a BayeSlope one
  PeakList out;
  append_merged(out, 100, PeakSource::bayeslope, 60);
  append_merged(out, 110, PeakSource::lightweight, 60);
  CHECK(out.indices == std::vector<std::int64_t>{100});
  append_merged(out, 160, PeakSource::lightweight, 60);
  CHECK(out.indices == std::vector<std::int64_t>{100, 160});
}

TEST_CASE("merge of all-lightweight or all-BayeSlope decisions returns that bench") {
  const auto lw = tagged({50, 150, 250, 350}, PeakSource::lightweight);
  const auto bs = tagged({60, 160, 260}, PeakSource::bayeslope);
  const std::vector<WindowDecision> none{win(0, 0, 200, false), win(1, 200, 400, false)};
  const std::vector<WindowDecision> all{win(0, 0, 200, true), win(1, 200, 400, true)};
  CHECK(merge_peaks(lw, bs, none, 60).indices == lw.indices);
  CHECK(merge_peaks(lw, bs, all, 60).indices == bs.indices);
}

TEST_CASE("every bench is perfect on a clean stationary record") {
  const auto syn = synth(90);
  const auto cfg = PipelineConfig::for_rate(250);
  for (auto b : {Bench::lightweight, Bench::bayeslope, Bench::adaptive}) {
    const auto rep = process_record(syn.record, b, kThr, cfg);
    CHECK(rep.peaks.well_formed(rep.record_len));
    const auto m = match_peaks_in_range(rep.peaks, syn.truth, 150, 250, rep.scored_begin, rep.scored_end);
    CHECK(f1(m).f1 == 1.0);
    if (b == Bench::adaptive) CHECK(rep.trigger_fraction == 0.0);
    if (b == Bench::bayeslope) CHECK(rep.trigger_fraction == 1.0);
  }
}

TEST_CASE("adaptive bench hands flagged windows to BayeSlope") {
  // every third beat tiny: the lightweight output skips beats
  const auto syn = synth(110, {1.0, 1.0, 0.15});
  const auto cfg = PipelineConfig::for_rate(250);
  const auto rep = process_record(syn.record, Bench::adaptive, kThr, cfg);
  CHECK(rep.trigger_fraction > 0.0);
  bool prev = false;
  for (const auto& d : rep.decisions) {
    CHECK(d.bs_invoked == d.error_flag);
    if (d.bs_invoked) CHECK(d.bs_window_count == (prev ? 1 : 2));
    if (d.window_index == 0 || d.partial) CHECK_FALSE(d.bs_invoked);
    prev = d.bs_invoked;
  }
  const auto lw = process_record(syn.record, Bench::lightweight, kThr, cfg);
  auto score = [&](const DetectionReport& r) {
    return f1(match_peaks_in_range(r.peaks, syn.truth, 150, 250, r.scored_begin, r.scored_end)).f1;
  };
  CHECK(score(rep) >= score(lw));
}

TEST_CASE("process_record input checks") {
  const auto cfg = PipelineConfig::for_rate(250);
  auto syn = synth(80);
  auto wrong = syn.record;
  wrong.fs = 500;
  CHECK_THROWS_AS(process_record(wrong, Bench::lightweight, kThr, cfg), UnitError);
  EcgRecord shortrec;
  shortrec.samples.assign(1500, 0.0);
  CHECK_THROWS_AS(process_record(shortrec, Bench::lightweight, kThr, cfg), InsufficientDataError);
  CHECK_THROWS_AS(process_record(syn.record, Bench::adaptive, RrThresholds{1.4, 0.7, 0, std::nullopt}, cfg),
                  ConfigError);
  // flat record: BayeSlope cannot initialise
  EcgRecord flat;
  flat.samples.assign(5000, 0.0);
  CHECK_THROWS_AS(process_record(flat, Bench::bayeslope, kThr, cfg), InitError);
  const auto ad = process_record(flat, Bench::adaptive, kThr, cfg);
  CHECK(ad.peaks.empty());
  CHECK_FALSE(ad.notes.empty());
}

TEST_CASE("report JSON round trip") {
  TempDir dir("report");
  const auto syn = synth(120, {1.0, 0.2});
  const auto rep = process_record(syn.record, Bench::adaptive, kThr, PipelineConfig::for_rate(250));
  write_file_atomic(dir / "r.json", report_to_json(rep, "x"));
  const auto back = load_report(dir / "r.json");
  CHECK(back.bench == rep.bench);
  CHECK(back.record_len == rep.record_len);
  CHECK(back.scored_begin == rep.scored_begin);
  CHECK(back.trigger_fraction == rep.trigger_fraction);
  CHECK(back.peaks.indices == rep.peaks.indices);
  CHECK(back.peaks.sources == rep.peaks.sources);
  REQUIRE(back.decisions.size() == rep.decisions.size());
  for (std::size_t i = 0; i < rep.decisions.size(); ++i) {
    CHECK(back.decisions[i].bs_window_count == rep.decisions[i].bs_window_count);
    CHECK(back.decisions[i].end == rep.decisions[i].end);
  }
  write_text(dir / "bad.json", R"({"bench": "adaptive"})");
  CHECK_THROWS_AS(load_report(dir / "bad.json"), FormatError);
}
