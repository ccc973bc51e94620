#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rpeak/signal_io.hpp"

namespace rpeak {

// Exercise-intensity labels used to stratify results.
inline constexpr const char* kIntensityClasses[] = {"before_VT2", "after_VT2", "before_VO2max", "VO2max",
                                                    "recovery"};

bool is_intensity_class(const std::string& name);

struct ManifestEntry {
  std::string id;             // "<subject>_<scenario>", e.g. S2_amp_step
  std::string segment_class;  // one of kIntensityClasses
  std::filesystem::path path;  // ECG file, relative to the manifest directory
  std::string sha256;
  std::filesystem::path annotation_path;  // optional
  std::string annotation_sha256;

  std::string subject() const;  // id up to the first '_'
};

struct SegmentManifest {
  std::filesystem::path base_dir;
  std::vector<ManifestEntry> entries;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

// Line format: id,class,path,sha256[,annotation_path,annotation_sha256].
// '#' starts a comment line.
SegmentManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const SegmentManifest& manifest);

std::string sha256_file(const std::filesystem::path& path);
std::string sha256_bytes(const std::string& bytes);

// Recomputes every checksum; throws IntegrityError naming the first mismatch.
void verify_manifest(const SegmentManifest& manifest);

struct FixtureScenario {
  std::string name;
  std::string segment_class;
  SynthesisSpec spec;
};

// The committed synthetic corpus: four subjects x five scenarios of 25 s at
// 250 Hz (stationary, hr_ramp, amp_step, noisy_burst, dominant_t).
std::vector<std::pair<std::string, FixtureScenario>> fixture_plan();

// Writes every fixture segment (csv + annotations) under `dest` and returns
// the manifest (also saved as dest/manifest.csv). Deterministic.
SegmentManifest prepare_fixtures(const std::filesystem::path& dest);

}  // namespace rpeak
