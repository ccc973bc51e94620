#include "rpeak/adaptive_pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <optional>

#include <nlohmann/json.hpp>

#include "rpeak/error.hpp"

namespace rpeak {

const char* to_string(Bench b) {
  switch (b) {
    case Bench::lightweight: return "lightweight";
    case Bench::bayeslope: return "bayeslope";
    case Bench::adaptive: return "adaptive";
  }
  return "?";
}

Bench parse_bench(const std::string& name) {
  if (name == "lightweight") return Bench::lightweight;
  if (name == "bayeslope") return Bench::bayeslope;
  if (name == "adaptive") return Bench::adaptive;
  throw ConfigError("unknown bench '" + name + "' (lightweight, bayeslope, adaptive)");
}

PipelineConfig PipelineConfig::for_rate(int fs) {
  PipelineConfig c;
  c.geometry = WindowGeometry::for_rate(fs);
  c.preprocess = PreprocessConfig::for_geometry(c.geometry);
  c.hysteresis = HysteresisParams::for_rate(fs);
  c.bayeslope = BayeSlopeParams::for_rate(fs);
  return c;
}

void PipelineConfig::validate() const {
  preprocess.validate_against(geometry);
  hysteresis.validate();
  bayeslope.validate();
}

void append_merged(PeakList& out, std::int64_t index, PeakSource src, std::int64_t min_rr_dist) {
  if (!out.empty() && index - out.indices.back() < min_rr_dist) {
    if (src == PeakSource::bayeslope && out.sources.back() == PeakSource::lightweight) {
      out.indices.back() = index;
      out.sources.back() = src;
    }
    return;
  }
  out.push(index, src);
}

PeakList merge_peaks(const PeakList& lightweight, const PeakList& bayeslope,
                     const std::vector<WindowDecision>& decisions, std::int64_t min_rr_dist) {
  PeakList out;
  for (const auto& d : decisions) {
    const auto& src = d.bs_invoked ? bayeslope : lightweight;
    const auto tag = d.bs_invoked ? PeakSource::bayeslope : PeakSource::lightweight;
    const auto lo = std::lower_bound(src.indices.begin(), src.indices.end(), d.start);
    const auto hi = std::lower_bound(lo, src.indices.end(), d.end);
    for (auto it = lo; it != hi; ++it) append_merged(out, *it, tag, min_rr_dist);
  }
  return out;
}

namespace {

double full_window_fraction(const std::vector<WindowDecision>& decisions) {
  std::int64_t full = 0;
  std::int64_t triggered = 0;
  for (const auto& d : decisions) {
    if (d.partial) continue;
    ++full;
    triggered += d.bs_window_count;
  }
  return full > 0 ? static_cast<double>(triggered) / static_cast<double>(full) : 0.0;
}

}  // namespace

DetectionReport process_record(const EcgRecord& rec, Bench bench, const RrThresholds& thr,
                               const PipelineConfig& cfg) {
  rec.validate();
  cfg.validate();
  if (rec.fs != cfg.geometry.fs) {
    throw UnitError("record sampled at " + std::to_string(rec.fs) + " Hz, configuration expects " +
                    std::to_string(cfg.geometry.fs) + " Hz");
  }
  if (bench == Bench::adaptive) thr.validate();

  const auto& geom = cfg.geometry;
  const auto signal = enhance(rec, cfg.preprocess);
  if (static_cast<std::int64_t>(signal.size()) < 3 * geom.window_len) {
    throw InsufficientDataError("record of " + std::to_string(rec.size()) + " samples leaves " +
                                std::to_string(signal.size()) + " after the preprocessing delay; need " +
                                std::to_string(3 * geom.window_len));
  }
  const auto windows = segment_windows(signal, geom);
  const std::span<const double> sig(signal);

  DetectionReport rep;
  rep.bench = bench;
  rep.fs = rec.fs;
  rep.record_len = rec.size();
  rep.scored_begin = geom.total_delay() + geom.window_len;
  rep.scored_end = rec.size() - geom.window_len;

  auto decision_for = [](const WindowView& w) {
    WindowDecision d;
    d.window_index = w.index;
    d.start = w.start;
    d.end = w.end();
    d.partial = w.partial;
    return d;
  };

  if (bench == Bench::lightweight) {
    rep.peaks = detect_lightweight(sig, geom, cfg.hysteresis);
    for (const auto& w : windows) rep.decisions.push_back(decision_for(w));
    return rep;
  }
  if (bench == Bench::bayeslope) {
    rep.peaks = detect_bayeslope(sig, geom, cfg.bayeslope);
    for (const auto& w : windows) {
      auto d = decision_for(w);
      d.bs_invoked = true;
      d.bs_window_count = 1;
      d.peaks_source = PeakSource::bayeslope;
      rep.decisions.push_back(d);
    }
    rep.trigger_fraction = 1.0;
    return rep;
  }

  // Adaptive: the hysteresis detector runs on every window; its output is
  // checked from window 1 on (window 0 only seeds the thresholds).
  auto hyst = init_state(windows.front().samples, cfg.hysteresis);
  std::optional<BayeSlopeState> bs_state;
  bool prev_bs = false;
  const auto min_rr = cfg.bayeslope.min_rr_dist;

  for (const auto& w : windows) {
    auto d = decision_for(w);
    const auto lw = detect_window(w.samples, w.start, hyst, cfg.hysteresis);

    if (w.index == 0 || w.partial) {
      for (auto p : lw.indices) append_merged(rep.peaks, p, PeakSource::lightweight, min_rr);
      rep.decisions.push_back(d);
      prev_bs = false;
      continue;
    }

    const std::span<const std::int64_t> merged(rep.peaks.indices);
    const auto before = static_cast<std::size_t>(
        std::lower_bound(merged.begin(), merged.end(), w.start) - merged.begin());
    const auto ctx_len = std::min<std::size_t>(2, before);
    d.error_flag = check_window(lw.indices, merged.subspan(before - ctx_len, ctx_len), thr);

    if (!d.error_flag) {
      for (auto p : lw.indices) append_merged(rep.peaks, p, PeakSource::lightweight, min_rr);
      rep.decisions.push_back(d);
      prev_bs = false;
      continue;
    }

    PeakList bs;
    if (prev_bs && bs_state) {
      bs = detect(w.samples, w.start, *bs_state, cfg.bayeslope);
      d.bs_window_count = 1;
    } else {
      const auto& prev = windows[static_cast<std::size_t>(w.index - 1)];
      const auto span = sig.subspan(static_cast<std::size_t>(prev.start), static_cast<std::size_t>(w.end() - prev.start));
      try {
        bs_state = init_state(span, prev.start, cfg.bayeslope, 2 * geom.window_len);
      } catch (const InitError& e) {
        // flat span: nothing for BayeSlope to cluster, keep the lightweight output
        rep.notes.push_back("window " + std::to_string(w.index) + ": " + e.what());
        bs_state.reset();
        for (auto p : lw.indices) append_merged(rep.peaks, p, PeakSource::lightweight, min_rr);
        rep.decisions.push_back(d);
        prev_bs = false;
        continue;
      }
      bs = detect(span, prev.start, *bs_state, cfg.bayeslope);
      d.bs_window_count = 2;
    }
    d.bs_invoked = true;
    d.peaks_source = PeakSource::bayeslope;
    // a fresh two-window run only replaces window k; a carried run may also
    // close a QRS that opened at the end of the previous BayeSlope window
    const auto keep_from = d.bs_window_count == 2 ? w.start : 0;
    for (auto p : bs.indices) {
      if (p >= keep_from) append_merged(rep.peaks, p, PeakSource::bayeslope, min_rr);
    }
    rep.decisions.push_back(d);
    prev_bs = true;
  }
  rep.trigger_fraction = full_window_fraction(rep.decisions);
  return rep;
}

std::string report_to_json(const DetectionReport& rep, const std::string& label) {
  nlohmann::json decisions = nlohmann::json::array();
  for (const auto& d : rep.decisions) {
    decisions.push_back({{"window_index", d.window_index},
                         {"start", d.start},
                         {"end", d.end},
                         {"partial", d.partial},
                         {"error_flag", d.error_flag},
                         {"bs_invoked", d.bs_invoked},
                         {"bs_window_count", d.bs_window_count},
                         {"peaks_source", to_string(d.peaks_source)}});
  }
  nlohmann::json sources = nlohmann::json::array();
  for (auto s : rep.peaks.sources) sources.push_back(to_string(s));
  nlohmann::json j{{"label", label},
                   {"bench", to_string(rep.bench)},
                   {"fs", rep.fs},
                   {"record_len", rep.record_len},
                   {"scored_begin", rep.scored_begin},
                   {"scored_end", rep.scored_end},
                   {"trigger_fraction", rep.trigger_fraction},
                   {"peak_count", rep.peaks.size()},
                   {"peaks", rep.peaks.indices},
                   {"peak_sources", sources},
                   {"decisions", decisions},
                   {"notes", rep.notes}};
  return j.dump(2) + "\n";
}

DetectionReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open report " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    DetectionReport rep;
    rep.bench = parse_bench(j.at("bench").get<std::string>());
    rep.fs = j.at("fs").get<int>();
    rep.record_len = j.at("record_len").get<std::int64_t>();
    rep.scored_begin = j.value("scored_begin", std::int64_t{0});
    rep.scored_end = j.value("scored_end", rep.record_len);
    rep.trigger_fraction = j.value("trigger_fraction", 0.0);
    const auto peaks = j.at("peaks").get<std::vector<std::int64_t>>();
    const auto sources = j.value("peak_sources", std::vector<std::string>{});
    for (std::size_t k = 0; k < peaks.size(); ++k) {
      if (k < sources.size()) {
        rep.peaks.push(peaks[k], sources[k] == "bayeslope" ? PeakSource::bayeslope : PeakSource::lightweight);
      } else {
        rep.peaks.push(peaks[k]);
      }
    }
    for (const auto& d : j.at("decisions")) {
      WindowDecision w;
      w.window_index = d.at("window_index").get<std::int64_t>();
      w.start = d.at("start").get<std::int64_t>();
      w.end = d.at("end").get<std::int64_t>();
      w.partial = d.value("partial", false);
      w.error_flag = d.value("error_flag", false);
      w.bs_invoked = d.value("bs_invoked", false);
      w.bs_window_count = d.value("bs_window_count", 0);
      w.peaks_source = d.value("peaks_source", std::string("lightweight")) == "bayeslope" ? PeakSource::bayeslope
                                                                                        : PeakSource::lightweight;
      rep.decisions.push_back(w);
    }
    return rep;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": malformed report: " + e.what());
  }
}

}  // namespace rpeak
