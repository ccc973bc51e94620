#pragma once

#include <cstdint>
#include <span>

#include "rpeak/signal_io.hpp"

namespace rpeak {

struct HysteresisParams {
  double high_frac = 0.6;  // of the (mean + max) / 2 magnitude blend; of max at init
  double low_frac = 0.5;   // low threshold as a fraction of the high one
  double floor_uv = 50.0;
  std::int64_t refractory = 60;  // samples, 240 ms at 250 Hz

  static HysteresisParams for_rate(int fs);
  void validate() const;
};

enum class Polarity : std::uint8_t { positive, negative };

struct HysteresisState {
  double high_thr = 0;
  double low_thr = 0;
  Polarity polarity = Polarity::positive;
  std::int64_t last_peak = -1;  // absolute sample index, -1 before the first peak
  bool armed = true;            // signal has been below low_thr since the last excursion
};

// Thresholds from the first full window: high = high_frac * max|w|,
// low = low_frac * high, both floored; polarity follows the extreme sample.
HysteresisState init_state(std::span<const double> first_window, const HysteresisParams& params);

// Detects peaks in one window whose first sample has absolute index `start`.
// An excursion starts when the (polarity-corrected) signal rises above
// high_thr and ends when it drops below low_thr; the peak is the excursion
// maximum. An excursion still open at the window end is closed there.
// Returns the window's peaks and updates `state` for the next window.
PeakList detect_window(std::span<const double> window, std::int64_t start, HysteresisState& state,
                       const HysteresisParams& params);

// Runs init_state on the first full window and detect_window over every
// window (the trailing partial one included).
PeakList detect_lightweight(std::span<const double> signal, const WindowGeometry& geom,
                            const HysteresisParams& params);

}  // namespace rpeak
