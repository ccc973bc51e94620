#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rpeak/signal_io.hpp"

namespace rpeak {

inline constexpr double kDefaultToleranceMs = 150.0;

struct MatchResult {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::vector<double> time_diffs_ms;  // detected - annotated, per true positive

  MatchResult& operator+=(const MatchResult& other);
};

// Greedy in-order nearest matching: annotations are visited in time order
// and each takes the nearest not-yet-passed detection within tolerance.
// Detections are consumed in order, so matched pairs never cross.
MatchResult match_peaks(std::span<const std::int64_t> detected, std::span<const std::int64_t> annotated,
                        double tol_ms, int fs);
inline MatchResult match_peaks(const PeakList& detected, const PeakList& annotated, double tol_ms, int fs) {
  return match_peaks(detected.indices, annotated.indices, tol_ms, fs);
}

// Scoring over [lo, hi) without edge artifacts: the matching runs on the
// full lists, then a pair counts when its annotation is inside the range,
// unmatched annotations inside are misses and unmatched detections inside
// are false positives. A detection paired with an annotation outside the
// range is not counted at all.
MatchResult match_peaks_in_range(std::span<const std::int64_t> detected, std::span<const std::int64_t> annotated,
                                 double tol_ms, int fs, std::int64_t lo, std::int64_t hi);
inline MatchResult match_peaks_in_range(const PeakList& detected, const PeakList& annotated, double tol_ms, int fs,
                                        std::int64_t lo, std::int64_t hi) {
  return match_peaks_in_range(detected.indices, annotated.indices, tol_ms, fs, lo, hi);
}

struct Scores {
  double f1 = 0;
  double ppv = 0;
  double sensitivity = 0;
};

// F1 = TP / (TP + (FP + FN) / 2). Throws UndefinedScoreError when
// tp + fp + fn == 0. PPV / Se are 0 when their denominator is 0.
Scores f1(const MatchResult& m);

struct TimingStats {
  double mean_ms = 0;
  double sd_ms = 0;  // sample standard deviation; 0 for a single pair
};

TimingStats timing_stats(const MatchResult& m);

// Keeps the indices in [lo, hi).
PeakList restrict_range(const PeakList& peaks, std::int64_t lo, std::int64_t hi);

// ---- tables ---------------------------------------------------------------

struct SegmentScore {
  std::string detector;
  std::string segment_class;
  std::string segment_id;
  MatchResult match;
};

struct TableRow {
  std::string detector;
  std::string segment_class;  // "Total" for the all-class row
  std::size_t segments = 0;
  MatchResult pooled;
  Scores pooled_scores;
  Scores mean_scores;  // per-segment scores averaged
  TimingStats timing;
};

// One row per (detector, class) plus a per-detector "Total" row. Pooled
// rows sum counts before scoring.
std::vector<TableRow> summarize(const std::vector<SegmentScore>& segments);

// Plain-text rendering in the detector x class layout.
std::string render_table(const std::vector<TableRow>& rows);

}  // namespace rpeak
