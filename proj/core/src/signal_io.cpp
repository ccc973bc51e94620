#include "rpeak/signal_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <system_error>

#include "rpeak/error.hpp"

namespace rpeak {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && !text.empty();
}

bool parse_int(std::string_view text, std::int64_t& out) {
  text = trim(text);
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && !text.empty();
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

// Parses `fs=<int>`; returns 0 when the line is not such a header.
int parse_fs_header(std::string_view line) {
  line = trim(line);
  if (line.substr(0, 3) != "fs=") return 0;
  std::int64_t v = 0;
  if (!parse_int(line.substr(3), v) || v <= 0 || v > 1'000'000) return -1;
  return static_cast<int>(v);
}

void append_double(std::string& out, double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), ptr);
}

EcgRecord load_csv(const fs::path& path) {
  const std::string text = read_all(path);
  const auto lines = split_lines(text);
  std::size_t li = 0;
  while (li < lines.size() && trim(lines[li]).empty()) ++li;
  if (li == lines.size()) throw FormatError(path.string() + ": empty file, missing fs=<int> header");
  const int rate = parse_fs_header(lines[li]);
  if (rate == 0) throw FormatError(path.string() + ": first line must be fs=<int>");
  if (rate < 0) throw FormatError(path.string() + ": garbled sampling-rate header");

  EcgRecord rec;
  rec.fs = rate;
  rec.label = path.filename().string();
  std::int64_t row = 0;
  for (++li; li < lines.size(); ++li) {
    const auto line = trim(lines[li]);
    if (line.empty()) continue;
    ++row;
    std::string_view value_text = line;
    if (const auto comma = line.find(','); comma != std::string_view::npos) {
      std::int64_t idx = 0;
      if (!parse_int(line.substr(0, comma), idx)) {
        throw FormatError(path.string() + ": row " + std::to_string(row) + ": bad index column");
      }
      value_text = line.substr(comma + 1);
    }
    double v = 0;
    if (!parse_double(value_text, v)) {
      throw FormatError(path.string() + ": row " + std::to_string(row) + ": not a number");
    }
    if (!std::isfinite(v)) {
      throw DataError(path.string() + ": non-finite sample at row " + std::to_string(row), row);
    }
    rec.samples.push_back(v);
  }
  return rec;
}

int read_hea_rate(const fs::path& hea) {
  std::ifstream in(hea);
  if (!in) throw FormatError("missing WFDB header " + hea.string());
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream ss{std::string(t)};
    std::string name, nsig, rate;
    ss >> name >> nsig >> rate;
    if (rate.empty()) break;
    // `500`, `500/1000` or `500(0)` are all valid frequency fields
    const auto stop = rate.find_first_of("/(");
    double v = 0;
    if (!parse_double(std::string_view(rate).substr(0, stop), v) || v <= 0) break;
    return static_cast<int>(std::lround(v));
  }
  throw FormatError(hea.string() + ": no sampling frequency in record line");
}

EcgRecord load_wfdb_text(const fs::path& path) {
  fs::path hea = path;
  hea.replace_extension(".hea");
  EcgRecord rec;
  rec.fs = read_hea_rate(hea);
  rec.label = path.stem().string();

  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  std::int64_t row = 0;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#' || t.front() == '\'' || t.front() == '"') continue;
    std::istringstream ss{std::string(t)};
    std::vector<std::string> cols;
    for (std::string c; ss >> c;) cols.push_back(c);
    ++row;
    const std::string& vtext = cols.size() >= 2 ? cols[1] : cols[0];
    double v = 0;
    if (!parse_double(vtext, v)) {
      throw FormatError(path.string() + ": row " + std::to_string(row) + ": not a number");
    }
    if (!std::isfinite(v)) {
      throw DataError(path.string() + ": non-finite sample at row " + std::to_string(row), row);
    }
    rec.samples.push_back(v * 1000.0);  // mV -> µV
  }
  return rec;
}

}  // namespace

void EcgRecord::validate() const {
  if (fs <= 0) throw ConfigError("sampling rate must be positive");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      throw DataError("non-finite sample at index " + std::to_string(i),
                      static_cast<std::int64_t>(i) + 1);
    }
  }
}

const char* to_string(PeakSource s) {
  return s == PeakSource::bayeslope ? "bayeslope" : "lightweight";
}

bool PeakList::well_formed(std::int64_t record_len) const {
  if (!sources.empty() && sources.size() != indices.size()) return false;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0) return false;
    if (record_len >= 0 && indices[i] >= record_len) return false;
    if (i > 0 && indices[i] <= indices[i - 1]) return false;
  }
  return true;
}

WindowGeometry WindowGeometry::for_rate(int rate) {
  if (rate <= 0) throw ConfigError("sampling rate must be positive");
  WindowGeometry g;
  g.fs = rate;
  // floor policy everywhere: 437.5 -> 437, 237.5 -> 237
  g.window_len = (rate * 175) / 100;
  g.mf_delay = (rate * 60) / 100;
  g.relen_delay = (rate * 95) / 100;
  return g;
}

EcgFormat parse_ecg_format(const std::string& name) {
  if (name == "csv") return EcgFormat::csv;
  if (name == "wfdb_text" || name == "wfdb") return EcgFormat::wfdb_text;
  throw ConfigError("unknown ECG format '" + name + "' (expected csv or wfdb_text)");
}

EcgRecord load_ecg(const fs::path& path, EcgFormat fmt) {
  if (!fs::exists(path)) throw FormatError("no such file: " + path.string());
  return fmt == EcgFormat::csv ? load_csv(path) : load_wfdb_text(path);
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write on " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename into " + path.string() + ": " + ec.message());
  }
}

void save_ecg(const fs::path& path, const EcgRecord& rec) {
  rec.validate();
  std::string out = "fs=" + std::to_string(rec.fs) + "\n";
  out.reserve(out.size() + rec.samples.size() * 10);
  for (double v : rec.samples) {
    append_double(out, v);
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

Annotations load_annotations(const fs::path& path) {
  if (!fs::exists(path)) throw FormatError("no such file: " + path.string());
  const std::string text = read_all(path);
  Annotations ann;
  std::int64_t row = 0;
  bool first = true;
  for (auto line : split_lines(text)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (first) {
      first = false;
      const int rate = parse_fs_header(line);
      if (rate < 0) throw FormatError(path.string() + ": garbled fs header");
      if (rate > 0) {
        ann.fs = rate;
        continue;
      }
    }
    ++row;
    std::int64_t idx = 0;
    if (!parse_int(line, idx) || idx < 0) {
      throw FormatError(path.string() + ": row " + std::to_string(row) + ": not a sample index");
    }
    if (!ann.peaks.indices.empty() && idx <= ann.peaks.indices.back()) {
      throw DataError(path.string() + ": indices not ascending at row " + std::to_string(row), row);
    }
    ann.peaks.push(idx);
  }
  return ann;
}

void save_annotations(const fs::path& path, const PeakList& peaks, int rate) {
  std::string out;
  if (rate > 0) out = "fs=" + std::to_string(rate) + "\n";
  for (auto idx : peaks.indices) {
    out += std::to_string(idx);
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

// ---- resampling ----------------------------------------------------------

namespace {

std::vector<double> antialias_taps(int ratio) {
  const int half = 20 * ratio;
  const double cutoff = 0.4 / ratio;  // cycles/sample at the source rate
  std::vector<double> h(2 * half + 1);
  double sum = 0;
  for (int k = -half; k <= half; ++k) {
    const double sinc = k == 0 ? 2 * cutoff
                               : std::sin(2 * std::numbers::pi * cutoff * k) / (std::numbers::pi * k);
    const double w = 0.54 + 0.46 * std::cos(std::numbers::pi * k / half);
    h[k + half] = sinc * w;
    sum += h[k + half];
  }
  for (double& v : h) v /= sum;
  return h;
}

}  // namespace

std::string downsample_filter_description(int source_fs, int target_fs) {
  if (source_fs == target_fs) return "identity (no resampling)";
  const int ratio = source_fs / target_fs;
  std::ostringstream ss;
  ss << "zero-phase windowed-sinc FIR, Hamming, " << (40 * ratio + 1) << " taps, cutoff "
     << 0.4 * target_fs << " Hz, decimation " << ratio << ":1";
  return ss.str();
}

EcgRecord downsample(const EcgRecord& rec, int target_fs) {
  if (target_fs <= 0 || rec.fs <= 0) throw UnsupportedRateError("sampling rates must be positive");
  if (rec.fs % target_fs != 0) {
    throw UnsupportedRateError("cannot decimate " + std::to_string(rec.fs) + " Hz to " +
                               std::to_string(target_fs) + " Hz: non-integer ratio");
  }
  if (rec.fs == target_fs) return rec;

  const int ratio = rec.fs / target_fs;
  const auto taps = antialias_taps(ratio);
  const auto half = static_cast<std::int64_t>(taps.size() / 2);
  const std::int64_t n = rec.size();
  const std::int64_t out_n = n / ratio;

  EcgRecord out;
  out.fs = target_fs;
  out.label = rec.label;
  out.samples.resize(static_cast<std::size_t>(out_n));
  for (std::int64_t j = 0; j < out_n; ++j) {
    const std::int64_t center = j * ratio;
    double acc = 0;
    for (std::int64_t k = -half; k <= half; ++k) {
      const std::int64_t idx = std::clamp<std::int64_t>(center + k, 0, n - 1);
      acc += taps[static_cast<std::size_t>(k + half)] * rec.samples[static_cast<std::size_t>(idx)];
    }
    out.samples[static_cast<std::size_t>(j)] = acc;
  }
  return out;
}

// ---- synthesis -----------------------------------------------------------

PiecewiseLinear::PiecewiseLinear(std::vector<Point> points) : points_(std::move(points)) {
  if (points_.empty()) throw ConfigError("piecewise-linear profile needs at least one point");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i].t > points_[i - 1].t)) {
      throw ConfigError("piecewise-linear breakpoints must be strictly increasing in time");
    }
  }
}

double PiecewiseLinear::operator()(double t) const {
  if (points_.empty()) return 0.0;
  if (t <= points_.front().t) return points_.front().value;
  if (t >= points_.back().t) return points_.back().value;
  const auto it = std::upper_bound(points_.begin(), points_.end(), t,
                                   [](double x, const Point& p) { return x < p.t; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double u = (t - a.t) / (b.t - a.t);
  return a.value + u * (b.value - a.value);
}

double PiecewiseLinear::min_value() const {
  double m = points_.empty() ? 0.0 : points_.front().value;
  for (const auto& p : points_) m = std::min(m, p.value);
  return m;
}

double PiecewiseLinear::max_value() const {
  double m = points_.empty() ? 0.0 : points_.front().value;
  for (const auto& p : points_) m = std::max(m, p.value);
  return m;
}

void SynthesisSpec::validate() const {
  if (!(duration_s > 0)) throw ConfigError("synthesis duration must be positive");
  if (fs <= 0) throw ConfigError("synthesis fs must be positive");
  if (hr_bpm.points().empty()) throw ConfigError("heart-rate profile is empty");
  if (hr_bpm.min_value() < 30.0 || hr_bpm.max_value() > 240.0) {
    throw ConfigError("heart rate must stay within [30, 240] bpm");
  }
  if (amplitude.points().empty() || amplitude.min_value() < 0.0) {
    throw ConfigError("amplitude profile must be non-negative");
  }
  if (beat_pattern.empty()) throw ConfigError("beat pattern must not be empty");
  for (double m : beat_pattern) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw ConfigError("beat pattern entries must be >= 0");
  }
  if (!(t_wave_gain >= 0.0)) throw ConfigError("t_wave_gain must be >= 0");
  if (!(rr_jitter_s >= 0.0) || rr_jitter_s > 0.05) throw ConfigError("rr_jitter_s must be within [0, 0.05] s");
  if (!(noise_sd_uv >= 0.0) || !(baseline_wander_uv >= 0.0)) {
    throw ConfigError("noise and wander amplitudes must be >= 0");
  }
  for (const auto& b : bursts) {
    if (b.duration_s < 0 || b.sd_uv < 0) throw ConfigError("noise bursts need non-negative fields");
  }
}

namespace {

// Gaussian P-QRS-T components. Timings are for RR = 0.8 s; waves flagged
// `scales_with_rr` stretch with sqrt(RR / 0.8) (Bazett-like), the QRS does not.
constexpr std::array<TemplateWave, 5> kTemplate{{
    {"P", 120.0, -0.160, 0.025, true},
    {"Q", -90.0, -0.028, 0.008, false},
    {"R", 1000.0, 0.000, 0.010, false},
    {"S", -220.0, 0.030, 0.010, false},
    {"T", 280.0, 0.260, 0.045, true},
}};

}  // namespace

std::span<const TemplateWave> beat_template() { return kTemplate; }

SyntheticEcg synthesize_ecg(const SynthesisSpec& spec) {
  spec.validate();
  const int rate = spec.fs;
  const auto n = static_cast<std::int64_t>(std::floor(spec.duration_s * rate));

  // Beat instants: integrate phase = ∫ hr/60 dt and fire at phase k + 0.5.
  std::vector<double> beats;
  {
    const double dt = 1.0 / (rate * 16.0);
    double phase = 0.0;
    double next = 0.5;
    double t = 0.0;
    double hr_prev = spec.hr_bpm(0.0);
    while (t < spec.duration_s) {
      const double t_next = t + dt;
      const double hr_next = spec.hr_bpm(t_next);
      const double dphase = 0.5 * (hr_prev + hr_next) / 60.0 * dt;
      while (phase + dphase >= next) {
        const double u = (next - phase) / dphase;
        const double tb = t + u * dt;
        if (tb < spec.duration_s) beats.push_back(tb);
        next += 1.0;
      }
      phase += dphase;
      t = t_next;
      hr_prev = hr_next;
    }
  }

  if (spec.rr_jitter_s > 0) {
    std::mt19937_64 jrng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> jit(0.0, spec.rr_jitter_s);
    for (auto& tb : beats) tb += jit(jrng);
    // keep the order and a physiologic minimum spacing
    for (std::size_t k = 1; k < beats.size(); ++k) beats[k] = std::max(beats[k], beats[k - 1] + 0.2);
    while (!beats.empty() && beats.back() >= spec.duration_s) beats.pop_back();
    while (!beats.empty() && beats.front() < 0) beats.erase(beats.begin());
  }

  SyntheticEcg out;
  out.record.fs = rate;
  out.record.label = "synthetic(seed=" + std::to_string(spec.seed) + ")";
  out.record.samples.assign(static_cast<std::size_t>(n), 0.0);
  auto& x = out.record.samples;

  for (std::size_t k = 0; k < beats.size(); ++k) {
    const double tb = beats[k];
    const double rr = k + 1 < beats.size() ? beats[k + 1] - tb
                      : k > 0              ? tb - beats[k - 1]
                                           : 60.0 / spec.hr_bpm(tb);
    const double stretch = std::sqrt(rr / 0.8);
    const double amp = spec.amplitude(tb) * spec.beat_pattern[k % spec.beat_pattern.size()];
    for (const auto& w : kTemplate) {
      const double center = tb + w.center_s * (w.scales_with_rr ? stretch : 1.0);
      const double width = w.width_s * (w.scales_with_rr ? stretch : 1.0);
      const bool scaled = spec.amplitude_scope == AmplitudeScope::whole_beat || w.name[0] == 'R';
      double a = w.amplitude_uv * (scaled ? amp : 1.0);
      if (w.name[0] == 'T') a *= spec.t_wave_gain;
      const auto lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor((center - 5 * width) * rate)));
      const auto hi = std::min<std::int64_t>(n - 1, static_cast<std::int64_t>(std::ceil((center + 5 * width) * rate)));
      for (std::int64_t i = lo; i <= hi; ++i) {
        const double d = (static_cast<double>(i) / rate - center) / width;
        x[static_cast<std::size_t>(i)] += a * std::exp(-0.5 * d * d);
      }
    }
    const auto idx = static_cast<std::int64_t>(std::llround(tb * rate));
    if (idx >= 0 && idx < n && (out.truth.empty() || idx > out.truth.indices.back())) {
      out.truth.push(idx);
      out.beat_times_s.push_back(tb);
    }
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> phase_dist(0.0, 2 * std::numbers::pi);
  const double wander_phase = phase_dist(rng);
  for (std::int64_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    double sd = spec.noise_sd_uv;
    for (const auto& b : spec.bursts) {
      if (t >= b.start_s && t < b.start_s + b.duration_s) sd = std::hypot(sd, b.sd_uv);
    }
    double v = sd > 0 ? sd * unit(rng) : 0.0;
    if (spec.baseline_wander_uv > 0) {
      v += spec.baseline_wander_uv * std::sin(2 * std::numbers::pi * 0.3 * t + wander_phase);
    }
    x[static_cast<std::size_t>(i)] += v;
  }
  return out;
}

}  // namespace rpeak
