#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rpeak/signal_io.hpp"

namespace rpeak {

// Tail cutoffs of the pooled RR(n)/RR(n-1) distribution.
struct RrThresholds {
  double p_low = 0.65;
  double p_high = 1.46;
  std::size_t source_count = 0;
  std::optional<std::string> excluded_subject;

  // 0 < p_low <= p_high. (A degenerate pool legitimately gives p_low == p_high.)
  void validate() const;
  // Fewer than 200 pooled ratios make the 0.5/99.5 tails unreliable.
  bool low_count() const { return source_count < 200; }
};

struct RrRatioSeries {
  std::vector<double> ratios;
  std::vector<std::array<std::int64_t, 3>> anchors;  // peak triple behind each ratio

  std::size_t size() const { return ratios.size(); }
};

// ratios[k] = (p[k+2] - p[k+1]) / (p[k+1] - p[k]); fewer than 3 peaks gives
// an empty series.
RrRatioSeries rr_ratios(std::span<const std::int64_t> peaks);
inline RrRatioSeries rr_ratios(const PeakList& peaks) { return rr_ratios(peaks.indices); }

// Percentile by linear interpolation between order statistics (the numpy
// "linear" method): rank h = (n - 1) * pct / 100.
double percentile_linear(std::span<const double> sorted, double pct);

// Pools every subject except `exclude` and takes the 0.5 / 99.5 percentiles.
// The excluded subject's series is never read. Throws ConfigError on an
// empty pool.
RrThresholds build_thresholds(const std::map<std::string, RrRatioSeries>& subjects,
                              const std::optional<std::string>& exclude, double low_pct = 0.5,
                              double high_pct = 99.5);

// True when the window's RR ratios leave [p_low, p_high]. `context` holds up
// to two peaks preceding the window so boundary ratios are covered. Fewer
// than three peaks in total counts as an error.
bool check_window(std::span<const std::int64_t> window_peaks, std::span<const std::int64_t> context,
                  const RrThresholds& thr);

// Threshold file: JSON object with p_low, p_high, source_count,
// excluded_subject (string or null).
RrThresholds load_thresholds(const std::filesystem::path& path);
void save_thresholds(const std::filesystem::path& path, const RrThresholds& thr);

}  // namespace rpeak
