#include "rpeak/hysteresis_detector.hpp"

#include <algorithm>
#include <cmath>

#include "rpeak/error.hpp"
#include "rpeak/preprocess.hpp"

namespace rpeak {

namespace {

struct WindowStats {
  double mean_mag = 0;
  double max_mag = 0;
  Polarity polarity = Polarity::positive;
};

WindowStats window_stats(std::span<const double> w) {
  WindowStats st;
  double extreme = 0;
  double sum = 0;
  for (double v : w) {
    sum += std::abs(v);
    if (std::abs(v) > std::abs(extreme)) extreme = v;
  }
  st.mean_mag = w.empty() ? 0.0 : sum / static_cast<double>(w.size());
  st.max_mag = std::abs(extreme);
  st.polarity = extreme < 0 ? Polarity::negative : Polarity::positive;
  return st;
}

void set_thresholds(HysteresisState& st, double high, const HysteresisParams& p) {
  st.high_thr = std::max(high, p.floor_uv);
  st.low_thr = std::max(p.low_frac * st.high_thr, p.floor_uv);
}

}  // namespace

HysteresisParams HysteresisParams::for_rate(int fs) {
  HysteresisParams p;
  p.refractory = (static_cast<std::int64_t>(fs) * 240) / 1000;
  return p;
}

void HysteresisParams::validate() const {
  if (!(high_frac > 0) || !(low_frac > 0) || low_frac > 1 || !(floor_uv >= 0) || refractory < 0) {
    throw ConfigError("invalid hysteresis parameters");
  }
}

HysteresisState init_state(std::span<const double> first_window, const HysteresisParams& params) {
  params.validate();
  const auto st = window_stats(first_window);
  HysteresisState state;
  state.polarity = st.polarity;
  set_thresholds(state, params.high_frac * st.max_mag, params);
  return state;
}

PeakList detect_window(std::span<const double> window, std::int64_t start, HysteresisState& state,
                       const HysteresisParams& params) {
  PeakList peaks;
  const double sign = state.polarity == Polarity::negative ? -1.0 : 1.0;
  bool in_excursion = false;
  double exc_max = 0;
  std::int64_t exc_idx = 0;

  auto emit = [&](std::int64_t idx) {
    if (state.last_peak < 0 || idx - state.last_peak >= params.refractory) {
      peaks.push(idx, PeakSource::lightweight);
      state.last_peak = idx;
    }
  };

  for (std::size_t k = 0; k < window.size(); ++k) {
    const double v = sign * window[k];
    const std::int64_t i = start + static_cast<std::int64_t>(k);
    if (in_excursion) {
      if (v > exc_max) {
        exc_max = v;
        exc_idx = i;
      }
      if (v < state.low_thr) {
        emit(exc_idx);
        in_excursion = false;
        state.armed = true;
      }
    } else if (state.armed) {
      if (v > state.high_thr) {
        in_excursion = true;
        state.armed = false;
        exc_max = v;
        exc_idx = i;
      }
    } else if (v < state.low_thr) {
      state.armed = true;
    }
  }
  if (in_excursion) emit(exc_idx);

  const auto st = window_stats(window);
  state.polarity = st.polarity;
  set_thresholds(state, params.high_frac * 0.5 * (st.mean_mag + st.max_mag), params);
  return peaks;
}

PeakList detect_lightweight(std::span<const double> signal, const WindowGeometry& geom,
                            const HysteresisParams& params) {
  const auto windows = segment_windows(signal, geom);
  auto state = init_state(windows.front().samples, params);
  PeakList all;
  for (const auto& w : windows) {
    auto p = detect_window(w.samples, w.start, state, params);
    all.indices.insert(all.indices.end(), p.indices.begin(), p.indices.end());
    all.sources.insert(all.sources.end(), p.sources.begin(), p.sources.end());
  }
  return all;
}

}  // namespace rpeak
