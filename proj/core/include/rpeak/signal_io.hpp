#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace rpeak {

inline constexpr int kCanonicalFs = 250;

// Uniformly sampled single-lead ECG. Amplitudes are microvolts.
struct EcgRecord {
  std::vector<double> samples;
  int fs = kCanonicalFs;
  std::string label;

  std::int64_t size() const { return static_cast<std::int64_t>(samples.size()); }
  double duration_s() const { return static_cast<double>(samples.size()) / fs; }

  // Throws DataError on non-finite samples, ConfigError on fs <= 0.
  void validate() const;
};

enum class PeakSource : std::uint8_t { lightweight, bayeslope };

const char* to_string(PeakSource s);

// Ordered R-peak sample indices. `sources` is either empty (untagged) or
// parallel to `indices`.
struct PeakList {
  std::vector<std::int64_t> indices;
  std::vector<PeakSource> sources;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
  bool tagged() const { return !sources.empty(); }

  void push(std::int64_t index) { indices.push_back(index); }
  void push(std::int64_t index, PeakSource src) {
    indices.push_back(index);
    sources.push_back(src);
  }

  // Strictly increasing; all indices in [0, record_len) when record_len >= 0.
  bool well_formed(std::int64_t record_len = -1) const;
};

// Windowing geometry shared by every stage. Everything is in samples.
struct WindowGeometry {
  int fs = kCanonicalFs;
  std::int64_t window_len = 437;
  std::int64_t mf_delay = 150;
  std::int64_t relen_delay = 237;

  static WindowGeometry for_rate(int fs);
  std::int64_t total_delay() const { return mf_delay + relen_delay; }
};

// ---- file formats --------------------------------------------------------

enum class EcgFormat { csv, wfdb_text };

EcgFormat parse_ecg_format(const std::string& name);

// csv: first line `fs=<int>`, then one µV value per line or `index,value`.
// wfdb_text: whitespace separated `sample value_mV` rows (rdsamp -p style,
// '#' comments allowed) with the rate taken from the sibling `.hea` file.
EcgRecord load_ecg(const std::filesystem::path& path, EcgFormat fmt = EcgFormat::csv);

// Writes the csv flavour (one value per line). Values use the shortest
// round-trip decimal representation.
void save_ecg(const std::filesystem::path& path, const EcgRecord& rec);

// One ascending sample index per line; an optional `fs=<int>` first line.
struct Annotations {
  PeakList peaks;
  int fs = 0;  // 0 when the file carries no header
};

Annotations load_annotations(const std::filesystem::path& path);
void save_annotations(const std::filesystem::path& path, const PeakList& peaks, int fs = 0);

// Writes `content` to `path` through a temporary sibling and a rename, so a
// failed run never leaves a half-written file behind.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// ---- resampling ----------------------------------------------------------

// Integer-ratio decimation with a zero-phase windowed-sinc anti-alias
// low-pass (Hamming, cutoff 0.8 x target Nyquist). Output length is
// floor(n / ratio).
EcgRecord downsample(const EcgRecord& rec, int target_fs);

// Description of the anti-alias filter used by downsample(), for report metadata.
std::string downsample_filter_description(int source_fs, int target_fs);

// ---- synthesis -----------------------------------------------------------

// Piecewise-linear function of time (seconds), held constant outside the
// breakpoints.
class PiecewiseLinear {
 public:
  struct Point {
    double t;
    double value;
  };

  PiecewiseLinear() = default;
  explicit PiecewiseLinear(std::vector<Point> points);
  static PiecewiseLinear constant(double v) { return PiecewiseLinear({{0.0, v}}); }

  double operator()(double t) const;
  const std::vector<Point>& points() const { return points_; }
  double min_value() const;
  double max_value() const;

 private:
  std::vector<Point> points_;
};

struct NoiseBurst {
  double start_s = 0;
  double duration_s = 0;
  double sd_uv = 0;
};

// What the amplitude profile and beat pattern multiply.
enum class AmplitudeScope : std::uint8_t {
  r_wave,      // R deflection only; P, Q, S, T keep their template size
  whole_beat,  // every wave of the beat
};

struct SynthesisSpec {
  double duration_s = 10.0;
  int fs = kCanonicalFs;
  PiecewiseLinear hr_bpm = PiecewiseLinear::constant(75.0);
  // R amplitude multiplier sampled at each beat instant.
  PiecewiseLinear amplitude = PiecewiseLinear::constant(1.0);
  // Cyclic per-beat multiplier on top of `amplitude`; {1.0, 0.1} gives a
  // 10:1 alternating pattern.
  std::vector<double> beat_pattern{1.0};
  AmplitudeScope amplitude_scope = AmplitudeScope::r_wave;
  double t_wave_gain = 1.0;
  // Per-beat Gaussian displacement of the R instant (seconds), drawn from a
  // stream of its own so amplitude settings never move the beats.
  double rr_jitter_s = 0.0;
  double noise_sd_uv = 0.0;
  double baseline_wander_uv = 0.0;  // 0.3 Hz sinusoidal drift amplitude
  std::vector<NoiseBurst> bursts;
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
};

struct SyntheticEcg {
  EcgRecord record;
  PeakList truth;
  std::vector<double> beat_times_s;  // exact (unrounded) R instants
};

SyntheticEcg synthesize_ecg(const SynthesisSpec& spec);

// One Gaussian wave of the beat template, expressed relative to the R instant.
struct TemplateWave {
  const char* name;
  double amplitude_uv;
  double center_s;  // at RR = 0.8 s
  double width_s;   // Gaussian sigma at RR = 0.8 s
  bool scales_with_rr;
};

std::span<const TemplateWave> beat_template();

}  // namespace rpeak
