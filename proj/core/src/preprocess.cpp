#include "rpeak/preprocess.hpp"

#include <algorithm>
#include <functional>

#include "rpeak/error.hpp"

namespace rpeak {

namespace {

// Running min/max over the window [i - back, i + fwd] with edge clamping.
// Gil-Werman block decomposition: prefix/suffix extrema over blocks of
// size back + fwd + 1.
template <typename Cmp>
std::vector<double> running_extreme(std::span<const double> x, int back, int fwd, Cmp better) {
  const auto n = static_cast<std::int64_t>(x.size());
  std::vector<double> out(x.size());
  if (n == 0) return out;
  const std::int64_t len = back + fwd + 1;
  if (len == 1) {
    std::copy(x.begin(), x.end(), out.begin());
    return out;
  }

  // Pad with the edge values so every window is full; padding with the
  // edge sample is equivalent to clamping for min/max.
  const std::int64_t padded_n = n + back + fwd;
  std::vector<double> padded(static_cast<std::size_t>(padded_n));
  for (std::int64_t i = 0; i < padded_n; ++i) {
    padded[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(std::clamp<std::int64_t>(i - back, 0, n - 1))];
  }
  std::vector<double> prefix(padded.size()), suffix(padded.size());
  for (std::int64_t i = 0; i < padded_n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    prefix[u] = (i % len == 0) ? padded[u] : (better(padded[u], prefix[u - 1]) ? padded[u] : prefix[u - 1]);
  }
  for (std::int64_t i = padded_n - 1; i >= 0; --i) {
    const auto u = static_cast<std::size_t>(i);
    const bool block_end = (i % len == len - 1) || i == padded_n - 1;
    suffix[u] = block_end ? padded[u] : (better(padded[u], suffix[u + 1]) ? padded[u] : suffix[u + 1]);
  }
  for (std::int64_t i = 0; i < n; ++i) {
    // window in padded coordinates: [i, i + len - 1]
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(i + len - 1);
    const double a = suffix[lo];
    const double b = prefix[hi];
    out[static_cast<std::size_t>(i)] = better(a, b) ? a : b;
  }
  return out;
}

std::vector<double> moving_average(std::span<const double> x, int len) {
  const auto n = static_cast<std::int64_t>(x.size());
  std::vector<double> out(x.size());
  const int back = (len - 1) / 2;
  const int fwd = len / 2;
  for (std::int64_t i = 0; i < n; ++i) {
    double acc = 0;
    for (std::int64_t k = i - back; k <= i + fwd; ++k) {
      acc += x[static_cast<std::size_t>(std::clamp<std::int64_t>(k, 0, n - 1))];
    }
    out[static_cast<std::size_t>(i)] = acc / len;
  }
  return out;
}

// Mean of squares over [i - back, i + fwd], averaging only in-range samples.
std::vector<double> windowed_energy(std::span<const double> x, int len) {
  const auto n = static_cast<std::int64_t>(x.size());
  std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const double v = x[static_cast<std::size_t>(i)];
    prefix[static_cast<std::size_t>(i) + 1] = prefix[static_cast<std::size_t>(i)] + v * v;
  }
  const int back = (len - 1) / 2;
  const int fwd = len / 2;
  std::vector<double> out(x.size());
  for (std::int64_t i = 0; i < n; ++i) {
    const auto lo = std::max<std::int64_t>(0, i - back);
    const auto hi = std::min<std::int64_t>(n - 1, i + fwd);
    const double sum = prefix[static_cast<std::size_t>(hi) + 1] - prefix[static_cast<std::size_t>(lo)];
    out[static_cast<std::size_t>(i)] = std::max(0.0, sum) / static_cast<double>(hi - lo + 1);
  }
  return out;
}

// Centered result -> causal stream delayed by `delay`.
EcgRecord to_stream(std::vector<double> centered, std::int64_t delay, const EcgRecord& like) {
  EcgRecord out;
  out.fs = like.fs;
  out.label = like.label;
  const auto n = static_cast<std::int64_t>(centered.size());
  out.samples.assign(centered.size(), 0.0);
  for (std::int64_t j = delay; j < n; ++j) {
    out.samples[static_cast<std::size_t>(j)] = centered[static_cast<std::size_t>(j - delay)];
  }
  return out;
}

std::vector<double> morph_centered(std::span<const double> x, const PreprocessConfig& cfg) {
  const auto baseline = closing(opening(x, cfg.mf_short_len), cfg.mf_long_len);
  std::vector<double> detrended(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) detrended[i] = x[i] - baseline[i];
  return moving_average(detrended, cfg.mf_smooth_len);
}

std::vector<double> relen_centered(std::span<const double> s, const PreprocessConfig& cfg) {
  const auto e_short = windowed_energy(s, cfg.relen_short_len);
  const auto e_long = windowed_energy(s, cfg.relen_long_len);
  std::vector<double> out(s.size(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (e_long[i] <= 0.0) continue;
    const double ratio = e_short[i] / e_long[i];
    out[i] = cfg.relen_form == RelEnForm::energy ? s[i] * s[i] * ratio : s[i] * ratio;
  }
  return out;
}

}  // namespace

std::vector<double> erode(std::span<const double> x, int len) {
  return running_extreme(x, (len - 1) / 2, len / 2, std::less<>{});
}

std::vector<double> dilate(std::span<const double> x, int len) {
  return running_extreme(x, len / 2, (len - 1) / 2, std::greater<>{});
}

std::vector<double> opening(std::span<const double> x, int len) { return dilate(erode(x, len), len); }

std::vector<double> closing(std::span<const double> x, int len) { return erode(dilate(x, len), len); }

PreprocessConfig PreprocessConfig::for_geometry(const WindowGeometry& geom) {
  PreprocessConfig cfg;
  if (geom.fs == kCanonicalFs) return cfg;
  auto odd = [](std::int64_t v) { return static_cast<int>(std::max<std::int64_t>(1, v | 1)); };
  cfg.mf_short_len = odd((geom.fs * 14) / 100);
  cfg.mf_smooth_len = odd((geom.fs * 2) / 100);
  cfg.mf_long_len = static_cast<int>(geom.mf_delay - (cfg.mf_short_len - 1) - (cfg.mf_smooth_len - 1) / 2 + 1);
  cfg.relen_short_len = cfg.mf_short_len;
  cfg.relen_long_len = static_cast<int>(2 * geom.relen_delay + 1);
  return cfg;
}

std::int64_t PreprocessConfig::mf_delay() const {
  // erosion + dilation each look ahead by their half support
  return static_cast<std::int64_t>(mf_short_len - 1) + (mf_long_len - 1) + mf_smooth_len / 2;
}

std::int64_t PreprocessConfig::relen_delay() const {
  return std::max(relen_short_len, relen_long_len) / 2;
}

void PreprocessConfig::validate() const {
  if (mf_short_len < 1 || mf_long_len < 1 || mf_smooth_len < 1 || relen_short_len < 1 ||
      relen_long_len < 1) {
    throw ConfigError("preprocess window lengths must be >= 1");
  }
  if (relen_short_len > relen_long_len) {
    throw ConfigError("relen_short_len must not exceed relen_long_len");
  }
}

void PreprocessConfig::validate_against(const WindowGeometry& geom) const {
  validate();
  if (mf_delay() != geom.mf_delay) {
    throw ConfigError("morphological filter delay " + std::to_string(mf_delay()) +
                      " does not match geometry mf_delay " + std::to_string(geom.mf_delay));
  }
  if (relen_delay() != geom.relen_delay) {
    throw ConfigError("relative-energy delay " + std::to_string(relen_delay()) +
                      " does not match geometry relen_delay " + std::to_string(geom.relen_delay));
  }
}

EcgRecord morphological_filter(const EcgRecord& rec, const PreprocessConfig& cfg) {
  cfg.validate();
  if (rec.size() <= cfg.mf_long_len) {
    throw InsufficientDataError("record of " + std::to_string(rec.size()) +
                                " samples is shorter than the morphological filter support");
  }
  return to_stream(morph_centered(rec.samples, cfg), cfg.mf_delay(), rec);
}

EcgRecord relative_energy(const EcgRecord& rec, const PreprocessConfig& cfg) {
  cfg.validate();
  if (rec.size() <= cfg.relen_long_len) {
    throw InsufficientDataError("record of " + std::to_string(rec.size()) +
                                " samples is shorter than the relative-energy window");
  }
  return to_stream(relen_centered(rec.samples, cfg), cfg.relen_delay(), rec);
}

std::vector<double> enhance(const EcgRecord& rec, const PreprocessConfig& cfg) {
  const auto stream = relative_energy(morphological_filter(rec, cfg), cfg);
  const std::int64_t delay = cfg.total_delay();
  const std::int64_t n = stream.size();
  if (n <= delay) throw InsufficientDataError("record shorter than the preprocessing delay");
  return {stream.samples.begin() + delay, stream.samples.end()};
}

std::vector<WindowView> segment_windows(std::span<const double> signal, const WindowGeometry& geom) {
  const auto n = static_cast<std::int64_t>(signal.size());
  const std::int64_t len = geom.window_len;
  if (len <= 0) throw ConfigError("window length must be positive");
  if (n < len) {
    throw InsufficientDataError("signal of " + std::to_string(n) + " samples is shorter than one " +
                                std::to_string(len) + "-sample window");
  }
  std::vector<WindowView> out;
  std::int64_t start = 0;
  std::int64_t k = 0;
  for (; start + len <= n; start += len, ++k) {
    out.push_back({k, start, signal.subspan(static_cast<std::size_t>(start), static_cast<std::size_t>(len)), false});
  }
  if (start < n) {
    out.push_back({k, start, signal.subspan(static_cast<std::size_t>(start)), true});
  }
  return out;
}

}  // namespace rpeak
