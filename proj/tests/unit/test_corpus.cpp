#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "rpeak/config.hpp"
#include "rpeak/corpus.hpp"
#include "rpeak/error.hpp"

using namespace rpeak;

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_bytes("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_bytes("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  TempDir dir("corpus");
  write_text(dir / "abc.txt", "abc");
  CHECK(sha256_file(dir / "abc.txt") == sha256_bytes("abc"));
}

TEST_CASE("manifest round trip and lookup") {
  TempDir dir("corpus");
  SegmentManifest m;
  m.base_dir = dir.path;
  m.entries.push_back({"S9_x", "recovery", "a.csv", std::string(64, '0'), "a.ann", std::string(64, '1')});
  m.entries.push_back({"S10_y", "VO2max", "b.csv", std::string(64, '2'), "", ""});
  save_manifest(dir / "m.csv", m);
  const auto back = load_manifest(dir / "m.csv");
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[0].subject() == "S9");
  CHECK(back.entries[1].subject() == "S10");
  CHECK(back.entries[0].annotation_path == "a.ann");
  CHECK(back.entries[1].annotation_path.empty());
  CHECK(back.resolve("a.csv") == dir.path / "a.csv");

  write_text(dir / "bad.csv", "S1_x,jogging,a.csv,00\n");
  CHECK_THROWS_AS(load_manifest(dir / "bad.csv"), FormatError);
  write_text(dir / "short.csv", "# header\nS1_x,VO2max\n");
  CHECK_THROWS_AS(load_manifest(dir / "short.csv"), FormatError);
  CHECK(is_intensity_class("before_VO2max"));
  CHECK_FALSE(is_intensity_class("sprint"));
}

TEST_CASE("committed fixtures verify and cover every class") {
  const auto m = load_manifest(std::filesystem::path(RPEAK_FIXTURE_DIR) / "manifest.csv");
  CHECK_NOTHROW(verify_manifest(m));
  CHECK(m.entries.size() == 20);
  std::set<std::string> classes, subjects;
  for (const auto& e : m.entries) {
    classes.insert(e.segment_class);
    subjects.insert(e.subject());
  }
  CHECK(classes.size() == 5);
  CHECK(subjects.size() == 4);
}

TEST_CASE("fixture generation is deterministic and matches the committed files") {
  TempDir dir("corpus");
  const auto fresh = prepare_fixtures(dir.path);
  const auto committed = load_manifest(std::filesystem::path(RPEAK_FIXTURE_DIR) / "manifest.csv");
  REQUIRE(fresh.entries.size() == committed.entries.size());
  for (std::size_t i = 0; i < fresh.entries.size(); ++i) {
    CHECK(fresh.entries[i].id == committed.entries[i].id);
    CHECK(fresh.entries[i].sha256 == committed.entries[i].sha256);
    CHECK(fresh.entries[i].annotation_sha256 == committed.entries[i].annotation_sha256);
  }
}

TEST_CASE("tampering is detected") {
  TempDir dir("corpus");
  auto m = prepare_fixtures(dir.path);
  CHECK_NOTHROW(verify_manifest(m));
  {
    std::ofstream out(dir / m.entries[3].path.string(), std::ios::app);
    out << "1.0\n";
  }
  CHECK_THROWS_AS(verify_manifest(m), IntegrityError);
  std::filesystem::remove(dir / m.entries[3].path.string());
  CHECK_THROWS_AS(verify_manifest(m), IntegrityError);
}

TEST_CASE("pipeline config overrides") {
  TempDir dir("cfg");
  write_text(dir / "ok.json",
             R"({"hyst_high_frac": 0.7, "min_rr_dist_ms": 200, "logistic_B_policy": "low_centroid",
                 "peak_locator": "slope_midpoint", "sd_floor_ms": 20})");
  const auto c = load_pipeline_config(dir / "ok.json", 250);
  CHECK(c.hysteresis.high_frac == 0.7);
  CHECK(c.bayeslope.min_rr_dist == 50);
  CHECK(c.hysteresis.refractory == 50);
  CHECK(c.bayeslope.sd_floor == doctest::Approx(5.0));
  CHECK(c.bayeslope.b_policy == LogisticSlopePolicy::low_centroid);
  CHECK(c.bayeslope.locator == PeakLocator::slope_midpoint);

  write_text(dir / "typo.json", R"({"hyst_hgh_frac": 0.7})");
  CHECK_THROWS_AS(load_pipeline_config(dir / "typo.json", 250), ConfigError);
  write_text(dir / "delay.json", R"({"relen_long_len": 301})");
  CHECK_THROWS_AS(load_pipeline_config(dir / "delay.json", 250), ConfigError);
  write_text(dir / "enum.json", R"({"relen_form": "cubic"})");
  CHECK_THROWS_AS(load_pipeline_config(dir / "enum.json", 250), ConfigError);
}
