#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "rpeak/error.hpp"
#include "rpeak/signal_io.hpp"

using namespace rpeak;

TEST_CASE("geometry at the canonical rate") {
  const auto g = WindowGeometry::for_rate(250);
  CHECK(g.window_len == 437);
  CHECK(g.mf_delay == 150);
  CHECK(g.relen_delay == 237);
  CHECK(g.total_delay() == 387);
  CHECK(WindowGeometry::for_rate(500).window_len == 875);
  CHECK_THROWS_AS(WindowGeometry::for_rate(0), ConfigError);
}

TEST_CASE("csv round trip keeps every bit") {
  TempDir dir("io");
  EcgRecord rec;
  rec.fs = 250;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 300);
  for (int i = 0; i < 2000; ++i) rec.samples.push_back(n(rng));
  rec.samples.push_back(0.1);
  rec.samples.push_back(-1e-300);
  save_ecg(dir / "r.csv", rec);
  const auto back = load_ecg(dir / "r.csv");
  CHECK(back.fs == 250);
  REQUIRE(back.samples.size() == rec.samples.size());
  for (std::size_t i = 0; i < rec.samples.size(); ++i) CHECK(back.samples[i] == rec.samples[i]);
}

TEST_CASE("csv accepts index,value rows") {
  TempDir dir("io");
  write_text(dir / "a.csv", "fs=360\n0,1.5\n1,-2\n\n2,3e2\n");
  const auto rec = load_ecg(dir / "a.csv");
  CHECK(rec.fs == 360);
  CHECK(rec.samples == std::vector<double>{1.5, -2.0, 300.0});
}

TEST_CASE("csv errors") {
  TempDir dir("io");
  write_text(dir / "nohdr.csv", "1\n2\n");
  CHECK_THROWS_AS(load_ecg(dir / "nohdr.csv"), FormatError);
  write_text(dir / "badfs.csv", "fs=abc\n1\n");
  CHECK_THROWS_AS(load_ecg(dir / "badfs.csv"), FormatError);
  write_text(dir / "empty.csv", "");
  CHECK_THROWS_AS(load_ecg(dir / "empty.csv"), FormatError);
  write_text(dir / "word.csv", "fs=250\n1\nhello\n");
  CHECK_THROWS_AS(load_ecg(dir / "word.csv"), FormatError);
  write_text(dir / "nan.csv", "fs=250\n1\n2\nnan\n");
  try {
    load_ecg(dir / "nan.csv");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.row() == 3);
  }
  CHECK_THROWS_AS(load_ecg(dir / "missing.csv"), Error);
}

TEST_CASE("wfdb text export with header") {
  TempDir dir("io");
  write_text(dir / "100.hea", "# comment\n100 2 360 650000\n100.dat 212 200 11 1024 995 -22131 0 MLII\n");
  write_text(dir / "100.txt", "'sample #'  'MLII'\n'' '(mV)'\n0 -0.145\n1 -0.145\n2 0.5\n");
  const auto rec = load_ecg(dir / "100.txt", EcgFormat::wfdb_text);
  CHECK(rec.fs == 360);
  REQUIRE(rec.samples.size() == 3);
  CHECK(rec.samples[0] == doctest::Approx(-145.0));
  CHECK(rec.samples[2] == doctest::Approx(500.0));
  write_text(dir / "200.txt", "0 1\n");
  CHECK_THROWS_AS(load_ecg(dir / "200.txt", EcgFormat::wfdb_text), FormatError);
  CHECK_THROWS_AS(parse_ecg_format("edf"), ConfigError);
}

TEST_CASE("annotations round trip") {
  TempDir dir("io");
  PeakList p;
  for (std::int64_t i : {10, 250, 501, 777}) p.push(i);
  save_annotations(dir / "a.ann", p, 250);
  auto back = load_annotations(dir / "a.ann");
  CHECK(back.fs == 250);
  CHECK(back.peaks.indices == p.indices);
  save_annotations(dir / "b.ann", p);
  back = load_annotations(dir / "b.ann");
  CHECK(back.fs == 0);
  CHECK(back.peaks.indices == p.indices);
}

TEST_CASE("write_file_atomic leaves no temporary behind") {
  TempDir dir("io");
  write_file_atomic(dir / "x.txt", "hello\n");
  write_file_atomic(dir / "x.txt", "again\n");
  std::ifstream in(dir / "x.txt");
  std::string s;
  std::getline(in, s);
  CHECK(s == "again");
  int files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path)) ++files;
  CHECK(files == 1);
}

TEST_CASE("PeakList well_formed") {
  PeakList p;
  CHECK(p.well_formed());
  p.push(1);
  p.push(5);
  CHECK(p.well_formed(6));
  CHECK_FALSE(p.well_formed(5));
  p.push(5);
  CHECK_FALSE(p.well_formed());
  PeakList t;
  t.push(1, PeakSource::bayeslope);
  t.indices.push_back(3);
  CHECK_FALSE(t.well_formed());
}

namespace {

EcgRecord tone(int fs, double hz, double seconds) {
  EcgRecord r;
  r.fs = fs;
  const auto n = static_cast<std::size_t>(seconds * fs);
  for (std::size_t i = 0; i < n; ++i) r.samples.push_back(1000.0 * std::sin(2 * std::numbers::pi * hz * i / fs));
  return r;
}

}  // namespace

TEST_CASE("downsample keeps an in-band sine and removes an aliasing one") {
  const auto in = tone(500, 10.0, 4.0);
  const auto out = downsample(in, 250);
  CHECK(out.fs == 250);
  REQUIRE(out.samples.size() == in.samples.size() / 2);
  double worst = 0;
  for (std::size_t j = 100; j + 100 < out.samples.size(); ++j) {
    worst = std::max(worst, std::abs(out.samples[j] - 1000.0 * std::sin(2 * std::numbers::pi * 10.0 * j / 250)));
  }
  CHECK(worst < 10.0);  // 1 % of the amplitude

  // 200 Hz at 500 Hz would fold onto 50 Hz at 250 Hz
  const auto hi = downsample(tone(500, 200.0, 4.0), 250);
  double peak = 0;
  for (std::size_t j = 100; j + 100 < hi.samples.size(); ++j) peak = std::max(peak, std::abs(hi.samples[j]));
  CHECK(peak < 10.0);

  CHECK_THROWS_AS(downsample(in, 300), UnsupportedRateError);
  CHECK(downsample(in, 500).samples == in.samples);
  CHECK_FALSE(downsample_filter_description(500, 250).empty());
}

TEST_CASE("piecewise linear") {
  const PiecewiseLinear f({{0.0, 80.0}, {10.0, 180.0}});
  CHECK(f(-1) == 80.0);
  CHECK(f(5) == doctest::Approx(130.0));
  CHECK(f(20) == 180.0);
  CHECK(f.min_value() == 80.0);
  CHECK(f.max_value() == 180.0);
}

TEST_CASE("synthesis: beat count and spacing follow the heart rate") {
  SynthesisSpec spec;
  spec.duration_s = 60;
  spec.hr_bpm = PiecewiseLinear::constant(120);
  const auto syn = synthesize_ecg(spec);
  CHECK(syn.record.size() == 15000);
  CHECK(syn.truth.well_formed(syn.record.size()));
  CHECK(std::abs(static_cast<double>(syn.truth.size()) - 120.0) <= 1.0);
  for (std::size_t k = 1; k < syn.beat_times_s.size(); ++k) {
    CHECK(syn.beat_times_s[k] - syn.beat_times_s[k - 1] == doctest::Approx(0.5).epsilon(1e-9));
  }
  // the truth sits within a sample of the R maximum of the clean signal
  for (auto p : syn.truth.indices) {
    if (p < 5 || p + 5 >= syn.record.size()) continue;
    std::int64_t best = p;
    for (std::int64_t d = -5; d <= 5; ++d) {
      if (syn.record.samples[static_cast<std::size_t>(p + d)] > syn.record.samples[static_cast<std::size_t>(best)]) best = p + d;
    }
    CHECK(std::abs(best - p) <= 1);
  }
}

TEST_CASE("synthesis is deterministic and the jitter stream is separate") {
  SynthesisSpec a;
  a.duration_s = 20;
  a.noise_sd_uv = 10;
  a.rr_jitter_s = 0.01;
  a.seed = 7;
  const auto x = synthesize_ecg(a);
  const auto y = synthesize_ecg(a);
  CHECK(x.record.samples == y.record.samples);
  CHECK(x.truth.indices == y.truth.indices);

  auto b = a;
  b.beat_pattern = {1.0, 0.5};
  b.noise_sd_uv = 0;
  CHECK(synthesize_ecg(b).truth.indices == x.truth.indices);

  auto c = a;
  c.rr_jitter_s = 0;
  CHECK(synthesize_ecg(c).truth.indices != x.truth.indices);
}

TEST_CASE("synthesis: beat pattern scales the R wave") {
  SynthesisSpec spec;
  spec.duration_s = 20;
  spec.hr_bpm = PiecewiseLinear::constant(100);
  spec.beat_pattern = {1.0, 0.1};
  const auto syn = synthesize_ecg(spec);
  const auto& s = syn.record.samples;
  const auto& t = syn.truth.indices;
  for (std::size_t k = 2; k + 2 < t.size(); k += 2) {
    CHECK(s[static_cast<std::size_t>(t[k])] > 5.0 * s[static_cast<std::size_t>(t[k + 1])]);
  }
}

TEST_CASE("synthesis parameter validation") {
  SynthesisSpec spec;
  spec.duration_s = -1;
  CHECK_THROWS_AS(synthesize_ecg(spec), ConfigError);
  spec = {};
  spec.beat_pattern = {};
  CHECK_THROWS_AS(synthesize_ecg(spec), ConfigError);
  spec = {};
  spec.rr_jitter_s = 0.5;
  CHECK_THROWS_AS(synthesize_ecg(spec), ConfigError);
  spec = {};
  spec.hr_bpm = PiecewiseLinear::constant(0);
  CHECK_THROWS_AS(synthesize_ecg(spec), ConfigError);
}
