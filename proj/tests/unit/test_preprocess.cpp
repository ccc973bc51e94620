#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rpeak/error.hpp"
#include "rpeak/preprocess.hpp"

using namespace rpeak;

namespace {

std::vector<double> brute_extreme(const std::vector<double>& x, int back, int fwd, bool is_min) {
  const auto n = static_cast<int>(x.size());
  std::vector<double> out(x.size());
  for (int i = 0; i < n; ++i) {
    double v = is_min ? INFINITY : -INFINITY;
    for (int k = i - back; k <= i + fwd; ++k) {
      const double s = x[static_cast<std::size_t>(std::clamp(k, 0, n - 1))];
      v = is_min ? std::min(v, s) : std::max(v, s);
    }
    out[static_cast<std::size_t>(i)] = v;
  }
  return out;
}

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0, 100);
  std::vector<double> x(n);
  for (auto& v : x) v = d(rng);
  return x;
}

EcgRecord ecg_like(double seconds, std::uint64_t seed) {
  SynthesisSpec spec;
  spec.duration_s = seconds;
  spec.hr_bpm = PiecewiseLinear::constant(90);
  spec.noise_sd_uv = 15;
  spec.baseline_wander_uv = 200;
  spec.seed = seed;
  return synthesize_ecg(spec).record;
}

}  // namespace

TEST_CASE("erode and dilate match a brute-force sweep") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto x = noise(50 + seed * 7, seed);
    for (int len : {1, 2, 3, 4, 7, 35, 64, 115, 400}) {
      CHECK(erode(x, len) == brute_extreme(x, (len - 1) / 2, len / 2, true));
      CHECK(dilate(x, len) == brute_extreme(x, len / 2, (len - 1) / 2, false));
    }
  }
}

TEST_CASE("opening is anti-extensive and closing extensive") {
  const auto x = noise(500, 3);
  const auto o = opening(x, 35);
  const auto c = closing(x, 35);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(o[i] <= x[i]);
    CHECK(c[i] >= x[i]);
  }
  // idempotence
  CHECK(opening(o, 35) == o);
  CHECK(closing(c, 35) == c);
}

TEST_CASE("default filter delays") {
  const PreprocessConfig cfg;
  CHECK(cfg.mf_delay() == 150);
  CHECK(cfg.relen_delay() == 237);
  CHECK(cfg.total_delay() == 387);
  CHECK_NOTHROW(cfg.validate_against(WindowGeometry::for_rate(250)));

  PreprocessConfig bad;
  bad.relen_long_len = 201;
  CHECK_THROWS_AS(bad.validate_against(WindowGeometry::for_rate(250)), ConfigError);
  bad = {};
  bad.relen_short_len = 600;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.mf_short_len = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("geometry-derived filters keep the delays at other rates") {
  for (int fs : {125, 360, 500}) {
    const auto g = WindowGeometry::for_rate(fs);
    const auto cfg = PreprocessConfig::for_geometry(g);
    CHECK(cfg.mf_delay() == g.mf_delay);
    CHECK(cfg.relen_delay() == g.relen_delay);
  }
}

TEST_CASE("streaming convention: output i + delay holds input i") {
  const auto rec = ecg_like(10, 1);
  const PreprocessConfig cfg;
  const auto mf = morphological_filter(rec, cfg);
  REQUIRE(mf.size() == rec.size());
  for (std::int64_t i = 0; i < cfg.mf_delay(); ++i) CHECK(mf.samples[static_cast<std::size_t>(i)] == 0.0);
  const auto en = enhance(rec, cfg);
  CHECK(static_cast<std::int64_t>(en.size()) == rec.size() - cfg.total_delay());
}

TEST_CASE("enhance is scale equivariant and blind to DC") {
  const auto rec = ecg_like(12, 2);
  const PreprocessConfig cfg;
  const auto base = enhance(rec, cfg);

  auto scaled = rec;
  for (auto& v : scaled.samples) v *= 3.5;
  auto shifted = rec;
  for (auto& v : shifted.samples) v += 12345.0;
  const auto s = enhance(scaled, cfg);
  const auto d = enhance(shifted, cfg);
  double peak = 0;
  for (double v : base) peak = std::max(peak, std::abs(v));
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(s[i] == doctest::Approx(3.5 * base[i]).epsilon(1e-9).scale(peak));
    CHECK(d[i] == doctest::Approx(base[i]).epsilon(1e-9).scale(peak));
  }

  auto ecfg = cfg;
  ecfg.relen_form = RelEnForm::energy;
  const auto e1 = enhance(rec, ecfg);
  const auto e2 = enhance(scaled, ecfg);
  for (std::size_t i = 0; i < e1.size(); ++i) CHECK(e2[i] >= 0.0);
  for (std::size_t i = 0; i < e1.size(); i += 97) CHECK(e2[i] == doctest::Approx(3.5 * 3.5 * e1[i]));
}

TEST_CASE("baseline wander is removed") {
  EcgRecord rec;
  rec.fs = 250;
  for (int i = 0; i < 5000; ++i) rec.samples.push_back(800.0 * std::sin(2 * 3.14159265 * 0.3 * i / 250.0));
  const auto mf = morphological_filter(rec, PreprocessConfig{});
  double worst = 0;
  for (std::size_t i = 400; i < mf.samples.size(); ++i) worst = std::max(worst, std::abs(mf.samples[i]));
  // a flat element cannot follow the crests: the residual there is about
  // A (1 - cos(pi L / T)) with L the 115-sample closing, ~74 uV here
  const double crest = 800.0 * (1.0 - std::cos(3.14159265 * 115.0 / (250.0 / 0.3)));
  CHECK(worst < 1.05 * crest);
  CHECK(worst < 0.1 * 800.0);
}

TEST_CASE("too-short records") {
  EcgRecord rec;
  rec.samples.assign(100, 1.0);
  CHECK_THROWS_AS(enhance(rec, PreprocessConfig{}), InsufficientDataError);
}

TEST_CASE("segment_windows") {
  std::vector<double> x(1000, 0.0);
  const auto g = WindowGeometry::for_rate(250);
  const auto w = segment_windows(x, g);
  REQUIRE(w.size() == 3);
  CHECK(w[0].start == 0);
  CHECK(w[1].start == 437);
  CHECK_FALSE(w[1].partial);
  CHECK(w[2].partial);
  CHECK(w[2].samples.size() == 1000 - 874);
  CHECK(w[2].end() == 1000);
  CHECK(segment_windows(std::span<const double>(x.data(), 874), g).size() == 2);
  CHECK_THROWS_AS(segment_windows(std::span<const double>(x.data(), 436), g), InsufficientDataError);
}
