#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "rpeak/error.hpp"
#include "rpeak/error_detector.hpp"

using namespace rpeak;

TEST_CASE("rr ratios and anchors") {
  const std::vector<std::int64_t> p{0, 100, 300, 400};
  const auto r = rr_ratios(p);
  REQUIRE(r.size() == 2);
  CHECK(r.ratios[0] == 2.0);
  CHECK(r.ratios[1] == 0.5);
  CHECK(r.anchors[1] == std::array<std::int64_t, 3>{100, 300, 400});
  CHECK(rr_ratios(std::vector<std::int64_t>{1, 2}).size() == 0);
}

TEST_CASE("percentile matches numpy's linear method") {
  std::vector<double> v{0.91, 1.02, 0.97, 1.10, 0.85, 1.33, 0.78};
  std::sort(v.begin(), v.end());
  // reference values from numpy.percentile
  CHECK(percentile_linear(v, 0.5) == doctest::Approx(0.7821).epsilon(1e-12));
  CHECK(percentile_linear(v, 99.5) == doctest::Approx(1.3231).epsilon(1e-12));
  CHECK(percentile_linear(v, 37) == doctest::Approx(0.9232).epsilon(1e-12));
  CHECK(percentile_linear(v, 0) == 0.78);
  CHECK(percentile_linear(v, 100) == 1.33);
  const std::vector<double> ten{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(percentile_linear(ten, 0.5) == doctest::Approx(1.045));
  CHECK(percentile_linear(ten, 99.5) == doctest::Approx(9.955));
  CHECK(percentile_linear(std::vector<double>{4.0}, 50) == 4.0);
  CHECK_THROWS_AS(percentile_linear(std::vector<double>{}, 50), ConfigError);
}

TEST_CASE("leave-one-out pools never read the excluded subject") {
  std::map<std::string, RrRatioSeries> subjects;
  subjects["S1"].ratios = {0.9, 1.0, 1.1};
  subjects["S2"].ratios = {0.8, 1.2};
  subjects["S3"].ratios = {1e-3, 1e3};
  const auto a = build_thresholds(subjects, std::string("S3"));
  CHECK(a.source_count == 5);
  CHECK(a.excluded_subject == std::optional<std::string>("S3"));
  CHECK(a.p_low > 0.8);
  CHECK(a.p_high < 1.2);

  subjects["S3"].ratios.assign(1000, 42.0);
  const auto b = build_thresholds(subjects, std::string("S3"));
  CHECK(a.p_low == b.p_low);
  CHECK(a.p_high == b.p_high);

  const auto all = build_thresholds(subjects, std::nullopt);
  CHECK(all.source_count == 1005);

  std::map<std::string, RrRatioSeries> only;
  only["S1"].ratios = {1.0};
  CHECK_THROWS_AS(build_thresholds(only, std::string("S1")), ConfigError);
}

TEST_CASE("check_window") {
  const RrThresholds thr{0.64, 1.47, 0, std::nullopt};
  const std::vector<std::int64_t> ctx{0, 100};
  CHECK_FALSE(check_window(std::vector<std::int64_t>{200, 300, 400}, ctx, thr));
  // a missed beat: 200 -> 400
  CHECK(check_window(std::vector<std::int64_t>{200, 400}, ctx, thr));
  // an extra beat
  CHECK(check_window(std::vector<std::int64_t>{200, 250, 300}, ctx, thr));
  // the boundary ratio uses the context
  CHECK(check_window(std::vector<std::int64_t>{300, 400}, ctx, thr));
  // too few peaks to judge
  CHECK(check_window(std::vector<std::int64_t>{200}, std::vector<std::int64_t>{100}, thr));
  CHECK(check_window({}, {}, thr));
  // only the last two context peaks count
  CHECK_FALSE(check_window(std::vector<std::int64_t>{1200}, std::vector<std::int64_t>{0, 1000, 1100}, thr));
  // ratios on the thresholds are accepted
  const RrThresholds exact{0.5, 2.0, 0, std::nullopt};
  CHECK_FALSE(check_window(std::vector<std::int64_t>{100, 300, 400}, std::vector<std::int64_t>{0}, exact));
}

TEST_CASE("threshold file round trip and validation") {
  TempDir dir("thr");
  RrThresholds t{0.7, 1.3, 512, std::string("S4")};
  save_thresholds(dir / "t.json", t);
  const auto back = load_thresholds(dir / "t.json");
  CHECK(back.p_low == 0.7);
  CHECK(back.p_high == 1.3);
  CHECK(back.source_count == 512);
  CHECK(back.excluded_subject == std::optional<std::string>("S4"));
  CHECK_FALSE(back.low_count());
  CHECK(RrThresholds{0.7, 1.3, 199, std::nullopt}.low_count());

  write_text(dir / "bad.json", R"({"p_low": 1.5, "p_high": 1.2})");
  CHECK_THROWS_AS(load_thresholds(dir / "bad.json"), ConfigError);
  write_text(dir / "junk.json", "not json");
  CHECK_THROWS_AS(load_thresholds(dir / "junk.json"), ConfigError);
  CHECK_THROWS_AS(load_thresholds(dir / "none.json"), ConfigError);
  CHECK_NOTHROW(RrThresholds({1.0, 1.0, 3, std::nullopt}).validate());
}
