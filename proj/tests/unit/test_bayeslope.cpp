#include <doctest.h>

#include <cmath>
#include <random>

#include "rpeak/bayeslope.hpp"
#include "rpeak/error.hpp"
#include "rpeak/evaluation.hpp"
#include "rpeak/preprocess.hpp"

using namespace rpeak;

TEST_CASE("rate-scaled defaults") {
  const auto p = BayeSlopeParams::for_rate(250);
  CHECK(p.min_rr_dist == 60);
  CHECK(p.max_qrs_dur == 35);
  CHECK(p.init_mu == doctest::Approx(200.0));
  CHECK(p.init_sd == doctest::Approx(25.0));
  CHECK(p.sd_floor == doctest::Approx(2.5));
  CHECK(BayeSlopeParams::for_rate(500).min_rr_dist == 120);
}

TEST_CASE("gaussian prior") {
  CHECK(gaussian_prior(200, 200, 25) == 1.0);
  CHECK(gaussian_prior(225, 200, 25) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(gaussian_prior(150, 200, 25) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(gaussian_prior(10, 200, 2.5) < 1e-300);
}

TEST_CASE("logistic closed form") {
  const double l = 3.0, h = 40.0;
  const double B = 4.0 / (h - l);
  const double M = 2 * l + std::log((h - l) / (h + l)) / B;
  for (double x : {-10.0, 0.0, 2.5, 6.0, 20.0, 100.0}) {
    CHECK(logistic_normalize(x, l, h, B) == doctest::Approx(h / (1 + std::exp(-B * (x - M)))).epsilon(1e-14));
  }
  CHECK(logistic_normalize(2 * l, l, h, B) == doctest::Approx((l + h) / 2).epsilon(1e-12));
  CHECK(logistic_normalize(1e6, l, h, B) == doctest::Approx(h));
  CHECK(logistic_normalize(-1e6, l, h, B) == doctest::Approx(0.0));
  // monotone
  double prev = -1;
  for (double x = -50; x < 200; x += 0.5) {
    const double v = logistic_normalize(x, l, h, B);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("steepness policies") {
  BayeSlopeParams p;
  CHECK(logistic_steepness(2.0, 10.0, p) == doctest::Approx(0.5));
  p.b_policy = LogisticSlopePolicy::low_centroid;
  CHECK(logistic_steepness(2.0, 10.0, p) == doctest::Approx(2.0));
}

TEST_CASE("normalize_sample never attenuates") {
  CHECK(normalize_sample(5.0, 0.0, 100.0) == 5.0);
  CHECK(normalize_sample(5.0, 0.5, 100.0) == 50.0);
  CHECK(normalize_sample(5.0, 1.0, 2.0) == 5.0);
}

TEST_CASE("two-cluster running means") {
  SlopeClusters c;
  c.hcentr = 10;
  c.lcentr = 1;
  CHECK(c.assign_and_update(9.0) == 1);
  CHECK(c.hcentr == doctest::Approx(9.5));
  CHECK(c.hcount == 2);
  CHECK(c.assign_and_update(2.0) == 0);
  CHECK(c.lcentr == doctest::Approx(1.5));
  // exactly between the centroids goes low
  SlopeClusters t;
  t.hcentr = 4;
  t.lcentr = 2;
  CHECK(t.assign_and_update(3.0) == 0);
}

TEST_CASE("k-means replay from the observed steps") {
  std::mt19937_64 rng(6);
  std::exponential_distribution<double> e(0.2);
  SlopeClusters c;
  c.hcentr = 30;
  const auto start = c;
  std::vector<std::pair<double, int>> steps;
  for (int i = 0; i < 20000; ++i) {
    const double st = e(rng);
    steps.emplace_back(st, c.assign_and_update(st));
    CHECK(c.hcentr > c.lcentr);
  }
  // centroid = mean of its members, the initial value counting as one
  double hs = start.hcentr, ls = start.lcentr;
  std::int64_t hn = 1, ln = 1;
  for (const auto& [st, label] : steps) {
    if (label) {
      hs += st;
      ++hn;
    } else {
      ls += st;
      ++ln;
    }
  }
  CHECK(c.hcentr == doctest::Approx(hs / hn).epsilon(1e-9));
  CHECK(c.lcentr == doctest::Approx(ls / ln).epsilon(1e-9));
  CHECK(c.hcount == hn);
  CHECK(c.lcount == ln);
}

TEST_CASE("expectation update uses the sample standard deviation") {
  const std::vector<std::int64_t> peaks{0, 200, 410, 600, 805};
  const auto [mu, sd] = update_expectation(peaks, 0, 0, 2.5);
  // numpy: mean / std(ddof=1) of [200, 210, 190, 205]
  CHECK(mu == doctest::Approx(201.25));
  CHECK(sd == doctest::Approx(8.539125638299666).epsilon(1e-12));
  const std::vector<std::int64_t> metronome{0, 200, 400, 600};
  CHECK(update_expectation(metronome, 0, 0, 2.5).second == 2.5);
  const std::vector<std::int64_t> one{7};
  CHECK(update_expectation(one, 123, 45, 2.5) == std::pair<double, double>{123, 45});
  const std::vector<std::int64_t> two{0, 180};
  CHECK(update_expectation(two, 0, 0, 2.5) == std::pair<double, double>{180, 2.5});
}

TEST_CASE("init errors") {
  const BayeSlopeParams p;
  const std::vector<double> flat(874, 5.0);
  CHECK_THROWS_AS(init_state(flat, 0, p, 874), InitError);
  std::vector<double> ramp(100);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 10.0 * static_cast<double>(i);
  CHECK_THROWS_AS(init_state(ramp, 0, p, 874), InsufficientDataError);
  const auto st = init_state(ramp, 50, p);
  CHECK(st.clusters.hcentr == doctest::Approx(10.0));
  CHECK(st.last_peak == 50);
  BayeSlopeParams bad;
  bad.history_len = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("detects every beat of a clean stationary record") {
  SynthesisSpec spec;
  spec.duration_s = 30;
  spec.hr_bpm = PiecewiseLinear::constant(100);
  const auto syn = synthesize_ecg(spec);
  const PreprocessConfig pre;
  const auto sig = enhance(syn.record, pre);
  const auto peaks = detect_bayeslope(sig, WindowGeometry::for_rate(250), BayeSlopeParams::for_rate(250));
  CHECK(peaks.well_formed());
  PeakList truth;
  for (auto t : syn.truth.indices) {
    if (t >= 2 * 437 && t < static_cast<std::int64_t>(sig.size()) - 50) truth.push(t);
  }
  const auto m = match_peaks(restrict_range(peaks, 2 * 437, static_cast<std::int64_t>(sig.size()) - 50), truth, 150, 250);
  CHECK(m.fn == 0);
  CHECK(m.fp == 0);
}

TEST_CASE("streaming across calls equals one call") {
  SynthesisSpec spec;
  spec.duration_s = 20;
  spec.hr_bpm = PiecewiseLinear::constant(130);
  spec.noise_sd_uv = 20;
  const auto sig = enhance(synthesize_ecg(spec).record, PreprocessConfig{});
  const std::span<const double> s(sig);
  const BayeSlopeParams p;
  auto a = init_state(s.first(874), 0, p, 874);
  auto b = a;
  const auto whole = detect(s, 0, a, p);
  PeakList pieces;
  for (std::size_t off = 0; off < s.size(); off += 300) {
    const auto part = detect(s.subspan(off, std::min<std::size_t>(300, s.size() - off)), static_cast<std::int64_t>(off), b, p);
    pieces.indices.insert(pieces.indices.end(), part.indices.begin(), part.indices.end());
  }
  CHECK(whole.indices == pieces.indices);
  CHECK(a.clusters.hcentr == b.clusters.hcentr);
}
