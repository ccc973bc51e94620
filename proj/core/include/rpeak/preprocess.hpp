#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rpeak/signal_io.hpp"

namespace rpeak {

enum class RelEnForm {
  signed_ratio,  // s[i] * E_short / E_long (keeps polarity, µV)
  energy,        // s[i]^2 * E_short / E_long (non-negative, µV^2)
};

// Filter supports in samples. The defaults are the 250 Hz reconstruction:
// opening(35) -> closing(115) baseline estimate plus a 5-sample moving
// average gives a 150-sample (0.6 s) causal latency; the 475-sample
// long energy window gives 237 samples (0.95 s).
struct PreprocessConfig {
  int mf_short_len = 35;
  int mf_long_len = 115;
  int mf_smooth_len = 5;
  int relen_short_len = 35;
  int relen_long_len = 475;
  RelEnForm relen_form = RelEnForm::signed_ratio;

  static PreprocessConfig for_geometry(const WindowGeometry& geom);

  std::int64_t mf_delay() const;
  std::int64_t relen_delay() const;
  std::int64_t total_delay() const { return mf_delay() + relen_delay(); }

  void validate() const;  // throws ConfigError
  // validate() plus delays matching the geometry.
  void validate_against(const WindowGeometry& geom) const;
};

// Flat-structuring-element grey morphology (van Herk / Gil-Werman, O(n)).
// Window for sample i covers [i - (len-1)/2, i + len/2], clamped to the
// signal; dilate uses the reflected element so open/close are proper.
std::vector<double> erode(std::span<const double> x, int len);
std::vector<double> dilate(std::span<const double> x, int len);
std::vector<double> opening(std::span<const double> x, int len);
std::vector<double> closing(std::span<const double> x, int len);

// Baseline and HF removal. The output is the causal stream: input sample i
// shows up at index i + mf_delay; the first mf_delay samples are warm-up
// zeros and the last mf_delay input samples fall off the end.
EcgRecord morphological_filter(const EcgRecord& rec, const PreprocessConfig& cfg);

// Relative-energy enhancement, same streaming convention with relen_delay.
EcgRecord relative_energy(const EcgRecord& rec, const PreprocessConfig& cfg);

// morphological_filter -> relative_energy, then shifted back by the total
// delay so index i lines up with raw sample i. Samples past
// n - total_delay are not produced (the stream has not reached them).
std::vector<double> enhance(const EcgRecord& rec, const PreprocessConfig& cfg);

struct WindowView {
  std::int64_t index = 0;
  std::int64_t start = 0;  // first sample, in the coordinates of the input span
  std::span<const double> samples;
  bool partial = false;

  std::int64_t end() const { return start + static_cast<std::int64_t>(samples.size()); }
};

// Consecutive non-overlapping windows; a trailing remainder is returned
// flagged as partial. Throws InsufficientDataError below one window.
std::vector<WindowView> segment_windows(std::span<const double> signal, const WindowGeometry& geom);

}  // namespace rpeak
