#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rpeak/bayeslope.hpp"
#include "rpeak/error_detector.hpp"
#include "rpeak/hysteresis_detector.hpp"
#include "rpeak/preprocess.hpp"
#include "rpeak/signal_io.hpp"

namespace rpeak {

enum class Bench { lightweight, bayeslope, adaptive };

const char* to_string(Bench b);
Bench parse_bench(const std::string& name);  // throws ConfigError

struct PipelineConfig {
  WindowGeometry geometry;
  PreprocessConfig preprocess;
  HysteresisParams hysteresis;
  BayeSlopeParams bayeslope;

  static PipelineConfig for_rate(int fs);
  void validate() const;
};

struct WindowDecision {
  std::int64_t window_index = 0;
  std::int64_t start = 0;  // sample range [start, end) of the window
  std::int64_t end = 0;
  bool partial = false;
  bool error_flag = false;
  bool bs_invoked = false;
  int bs_window_count = 0;  // 0, or 1/2 windows handed to BayeSlope
  PeakSource peaks_source = PeakSource::lightweight;
};

struct DetectionReport {
  Bench bench = Bench::adaptive;
  int fs = kCanonicalFs;
  std::int64_t record_len = 0;
  // Scored range: the preprocessing delay plus one init window are skipped
  // at the start and one window at the end, like the annotated 20 s inside
  // a 25 s segment.
  std::int64_t scored_begin = 0;
  std::int64_t scored_end = 0;
  PeakList peaks;
  std::vector<WindowDecision> decisions;
  // BayeSlope windows (init windows included) over full windows.
  double trigger_fraction = 0;
  std::vector<std::string> notes;
};

// Runs one of the three benches over a record. `thr` is only consulted by
// the adaptive bench. Throws InsufficientDataError when the detection signal
// holds fewer than three full windows.
DetectionReport process_record(const EcgRecord& rec, Bench bench, const RrThresholds& thr,
                               const PipelineConfig& cfg);

// Per-window merge: windows with bs_invoked take the BayeSlope peaks inside
// their span, the others the lightweight ones. Peaks closer than
// min_rr_dist collapse to one, keeping the BayeSlope peak.
PeakList merge_peaks(const PeakList& lightweight, const PeakList& bayeslope,
                     const std::vector<WindowDecision>& decisions, std::int64_t min_rr_dist);

// Structured report: bench, geometry, trigger fraction, per-window
// decisions and the tagged peaks.
std::string report_to_json(const DetectionReport& rep, const std::string& label = {});
DetectionReport load_report(const std::filesystem::path& path);

// Appends one peak under the collapse rule used by merge_peaks.
void append_merged(PeakList& out, std::int64_t index, PeakSource src, std::int64_t min_rr_dist);

}  // namespace rpeak
