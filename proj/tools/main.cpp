#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rpeak/adaptive_pipeline.hpp"
#include "rpeak/config.hpp"
#include "rpeak/corpus.hpp"
#include "rpeak/energy_model.hpp"
#include "rpeak/error.hpp"
#include "rpeak/evaluation.hpp"

namespace fs = std::filesystem;
using namespace rpeak;

namespace {

fs::path default_out_dir() {
  if (const char* env = std::getenv("RPEAK_OUT_DIR"); env && *env) return env;
  return ".";
}

// Loads a record and brings it to the canonical rate.
EcgRecord load_input(const fs::path& path, const std::string& format, std::vector<std::string>& notes) {
  auto rec = load_ecg(path, parse_ecg_format(format));
  if (rec.label.empty()) rec.label = path.stem().string();
  if (rec.fs != kCanonicalFs) {
    notes.push_back("resampled " + std::to_string(rec.fs) + " Hz -> " + std::to_string(kCanonicalFs) +
                    " Hz: " + downsample_filter_description(rec.fs, kCanonicalFs));
    rec = downsample(rec, kCanonicalFs);
  }
  return rec;
}

PipelineConfig pipeline_config(const std::string& config_path) {
  return config_path.empty() ? PipelineConfig::for_rate(kCanonicalFs) : load_pipeline_config(config_path, kCanonicalFs);
}

RrThresholds thresholds_for(Bench bench, const std::string& thr_path) {
  if (bench != Bench::adaptive) return {};
  if (thr_path.empty()) throw ConfigError("the adaptive bench needs a threshold file (--thr)");
  if (!fs::exists(thr_path)) throw ConfigError("threshold file not found: " + thr_path);
  return load_thresholds(thr_path);
}

// Runs `jobs` tasks at a time; rethrows the first failure.
template <typename Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn fn) {
  jobs = std::max(1u, jobs);
  for (std::size_t base = 0; base < count; base += jobs) {
    std::vector<std::future<void>> batch;
    for (std::size_t i = base; i < std::min(count, base + jobs); ++i) {
      batch.push_back(std::async(std::launch::async, fn, i));
    }
    for (auto& f : batch) f.get();
  }
}

// ---- detect -------------------------------------------------------------

struct DetectArgs {
  std::string bench = "adaptive";
  std::vector<std::string> inputs;
  std::string format = "csv";
  std::string thr;
  std::string config;
  std::string out;
  unsigned jobs = 1;
};

void cmd_detect(const DetectArgs& a) {
  const auto bench = parse_bench(a.bench);
  const auto cfg = pipeline_config(a.config);
  const auto thr = thresholds_for(bench, a.thr);
  const fs::path out = a.out.empty() ? default_out_dir() : fs::path(a.out);
  fs::create_directories(out);

  std::vector<std::string> lines(a.inputs.size());
  parallel_for(a.inputs.size(), a.jobs, [&](std::size_t i) {
    const fs::path in = a.inputs[i];
    try {
      std::vector<std::string> notes;
      const auto rec = load_input(in, a.format, notes);
      auto rep = process_record(rec, bench, thr, cfg);
      rep.notes.insert(rep.notes.begin(), notes.begin(), notes.end());
      const auto stem = out / (in.stem().string() + "." + a.bench);
      save_annotations(stem.string() + ".peaks", rep.peaks, rep.fs);
      write_file_atomic(stem.string() + ".report.json", report_to_json(rep, in.filename().string()));
      std::ostringstream os;
      os << in.string() << ": " << rep.peaks.size() << " peaks, trigger_fraction " << rep.trigger_fraction
         << " -> " << stem.string() << ".{peaks,report.json}";
      lines[i] = os.str();
    } catch (const Error& e) {
      throw Error(in.string() + ": " + e.what());
    }
  });
  for (const auto& l : lines) std::cout << l << '\n';
}

// ---- eval ---------------------------------------------------------------

struct EvalArgs {
  std::string det;
  std::string ann;
  double tol = kDefaultToleranceMs;
  std::string manifest;
  std::string config;
  std::string out;
  std::vector<std::string> benches{"lightweight", "bayeslope", "adaptive"};
  unsigned jobs = 1;
};

void print_scores(const std::string& name, const MatchResult& m) {
  const auto s = f1(m);
  std::printf("%s: TP=%lld FP=%lld FN=%lld F1=%.4f PPV=%.4f Se=%.4f", name.c_str(), static_cast<long long>(m.tp),
              static_cast<long long>(m.fp), static_cast<long long>(m.fn), s.f1, s.ppv, s.sensitivity);
  if (m.tp > 0) {
    const auto t = timing_stats(m);
    std::printf(" time %.1f +- %.1f ms", t.mean_ms, t.sd_ms);
  }
  std::printf("\n");
}

nlohmann::json rows_json(const std::vector<TableRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"detector", r.detector},
                   {"class", r.segment_class},
                   {"segments", r.segments},
                   {"tp", r.pooled.tp},
                   {"fp", r.pooled.fp},
                   {"fn", r.pooled.fn},
                   {"f1", r.pooled_scores.f1},
                   {"ppv", r.pooled_scores.ppv},
                   {"se", r.pooled_scores.sensitivity},
                   {"mean_segment_f1", r.mean_scores.f1},
                   {"time_mean_ms", r.timing.mean_ms},
                   {"time_sd_ms", r.timing.sd_ms}});
  }
  return out;
}

void cmd_eval_pair(const EvalArgs& a) {
  const auto det = load_annotations(a.det);
  const auto ann = load_annotations(a.ann);
  if (det.fs != 0 && ann.fs != 0 && det.fs != ann.fs) {
    throw UnitError("detections at " + std::to_string(det.fs) + " Hz vs annotations at " + std::to_string(ann.fs) +
                    " Hz");
  }
  const int rate = det.fs ? det.fs : (ann.fs ? ann.fs : kCanonicalFs);
  print_scores(fs::path(a.det).filename().string(), match_peaks(det.peaks, ann.peaks, a.tol, rate));
}

// Ratios of every subject's annotations, for leave-one-out thresholds.
std::map<std::string, RrRatioSeries> subject_ratios(const SegmentManifest& m) {
  std::map<std::string, RrRatioSeries> pools;
  for (const auto& e : m.entries) {
    if (e.annotation_path.empty()) continue;
    const auto r = rr_ratios(load_annotations(m.resolve(e.annotation_path)).peaks);
    auto& p = pools[e.subject()];
    p.ratios.insert(p.ratios.end(), r.ratios.begin(), r.ratios.end());
    p.anchors.insert(p.anchors.end(), r.anchors.begin(), r.anchors.end());
  }
  return pools;
}

void cmd_eval_manifest(const EvalArgs& a) {
  const auto m = load_manifest(a.manifest);
  verify_manifest(m);
  const auto cfg = pipeline_config(a.config);
  const auto pools = subject_ratios(m);

  std::vector<Bench> benches;
  for (const auto& b : a.benches) benches.push_back(parse_bench(b));

  std::vector<std::vector<SegmentScore>> per_entry(m.entries.size());
  std::vector<double> trigger(m.entries.size(), 0.0);
  parallel_for(m.entries.size(), a.jobs, [&](std::size_t i) {
    const auto& e = m.entries[i];
    if (e.annotation_path.empty()) throw ConfigError(e.id + ": manifest entry has no annotations");
    std::vector<std::string> notes;
    const auto rec = load_input(m.resolve(e.path), "csv", notes);
    const auto ann = load_annotations(m.resolve(e.annotation_path));
    if (ann.fs != 0 && ann.fs != rec.fs) throw UnitError(e.id + ": annotation rate differs from the record rate");
    const auto thr = build_thresholds(pools, e.subject());
    for (const auto b : benches) {
      const auto rep = process_record(rec, b, thr, cfg);
      const auto mr = match_peaks_in_range(rep.peaks, ann.peaks, a.tol, rec.fs, rep.scored_begin, rep.scored_end);
      per_entry[i].push_back({to_string(b), e.segment_class, e.id, mr});
      if (b == Bench::adaptive) trigger[i] = rep.trigger_fraction;
    }
  });
  std::vector<SegmentScore> all;
  for (auto& v : per_entry) all.insert(all.end(), v.begin(), v.end());
  const auto rows = summarize(all);
  std::cout << render_table(rows);

  if (!a.out.empty()) {
    nlohmann::json segs = nlohmann::json::array();
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
      for (const auto& s : per_entry[i]) {
        const auto sc = f1(s.match);
        segs.push_back({{"id", s.segment_id}, {"class", s.segment_class}, {"detector", s.detector},
                        {"tp", s.match.tp}, {"fp", s.match.fp}, {"fn", s.match.fn}, {"f1", sc.f1},
                        {"trigger_fraction", trigger[i]}});
      }
    }
    nlohmann::json j{{"tolerance_ms", a.tol}, {"rows", rows_json(rows)}, {"segments", segs}};
    fs::create_directories(fs::path(a.out).parent_path().empty() ? "." : fs::path(a.out).parent_path());
    write_file_atomic(a.out, j.dump(2) + "\n");
  }
}

// ---- energy -------------------------------------------------------------

struct EnergyArgs {
  std::string report;
  std::string power;
  std::string cost;
  bool bench_compare = false;
  bool do_calibrate = false;
  std::string input;
  std::string thr;
  std::string config;
  std::string out;
};

void cmd_energy(const EnergyArgs& a) {
  auto prof = a.power.empty() ? PowerProfile{} : load_power_profile(a.power);
  auto cost = a.cost.empty() ? CostModel{} : load_cost_model(a.cost);
  const fs::path out = a.out.empty() ? default_out_dir() : fs::path(a.out);

  if (a.do_calibrate || !cost.calibrated) {
    const auto cal = calibrate(cost, prof);
    cost = cal.cost;
    prof = cal.profile;
    std::printf("calibrated: lightweight %.4f mJ (err %.2e), bayeslope %.4f mJ (err %.2e)\n", cal.lightweight_j * 1e3,
                cal.lightweight_rel_error, cal.bayeslope_j * 1e3, cal.bayeslope_rel_error);
    std::printf("  fc active %.2f ms / 25 s, cl active %.2f ms / 25 s, p_cl_active_1 %.3f mW\n",
                cal.fc_active_s_lightweight * 1e3, cal.cl_active_s_bayeslope * 1e3, prof.p_cl_active_1() * 1e3);
    if (a.do_calibrate) {
      fs::create_directories(out);
      save_cost_model(out / "cost_model.json", cost);
      save_power_profile(out / "power_profile.json", prof);
      std::printf("  wrote %s, %s\n", (out / "cost_model.json").string().c_str(),
                  (out / "power_profile.json").string().c_str());
    }
  }

  if (!a.report.empty()) {
    const auto rep = load_report(a.report);
    const auto e = simulate(trace_from_decisions(rep, cost, prof), prof);
    const auto label = fs::path(a.report).filename().string();
    std::cout << energy_report_json(e, label);
  }

  if (a.bench_compare) {
    std::map<Bench, DetectionReport> reps;
    if (a.input.empty()) {
      // reference 25 s segment; adaptive with every third window in error
      for (auto b : {Bench::lightweight, Bench::bayeslope, Bench::adaptive}) {
        reps[b] = geometry_report(b, 25 * kCanonicalFs, WindowGeometry{});
      }
      std::vector<bool> err(reps[Bench::adaptive].decisions.size());
      for (std::size_t k = 0; k < err.size(); ++k) err[k] = k % 3 == 1;
      set_triggers(reps[Bench::adaptive], err);
    } else {
      std::vector<std::string> notes;
      const auto rec = load_input(a.input, "csv", notes);
      const auto cfg = pipeline_config(a.config);
      const auto thr = thresholds_for(Bench::adaptive, a.thr);
      for (auto b : {Bench::lightweight, Bench::bayeslope, Bench::adaptive}) reps[b] = process_record(rec, b, thr, cfg);
    }
    std::map<Bench, double> e;
    for (auto& [b, rep] : reps) e[b] = simulate(trace_from_decisions(rep, cost, prof), prof).total_j;
    for (auto b : {Bench::lightweight, Bench::adaptive, Bench::bayeslope}) {
      std::printf("%-12s %.4f mJ%s\n", to_string(b), e[b] * 1e3,
                  b == Bench::adaptive ? (" (trigger_fraction " + std::to_string(reps[b].trigger_fraction) + ")").c_str()
                                       : "");
    }
    const bool ordered = e[Bench::lightweight] < e[Bench::adaptive] && e[Bench::adaptive] < e[Bench::bayeslope];
    std::printf("ordering lightweight < adaptive < bayeslope: %s\n", ordered ? "yes" : "no");
    std::printf("adaptive saving vs bayeslope: %.1f %%\n", 100.0 * (1.0 - e[Bench::adaptive] / e[Bench::bayeslope]));
  }
}

// ---- dist ---------------------------------------------------------------

struct DistArgs {
  std::string manifest;
  std::vector<std::string> subjects;  // id=file[,file...]
  std::string exclude;
  std::string out;
};

void cmd_dist_build(const DistArgs& a) {
  std::map<std::string, RrRatioSeries> pools;
  if (!a.manifest.empty()) pools = subject_ratios(load_manifest(a.manifest));
  for (const auto& spec : a.subjects) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw ConfigError("--subject expects id=file[,file...]: " + spec);
    const auto id = spec.substr(0, eq);
    std::stringstream files(spec.substr(eq + 1));
    std::string f;
    while (std::getline(files, f, ',')) {
      const auto r = rr_ratios(load_annotations(f).peaks);
      auto& p = pools[id];
      p.ratios.insert(p.ratios.end(), r.ratios.begin(), r.ratios.end());
    }
  }
  const std::optional<std::string> excl = a.exclude.empty() ? std::nullopt : std::optional<std::string>(a.exclude);
  if (excl && !pools.count(*excl)) std::fprintf(stderr, "warning: excluded subject %s not in the pool\n", excl->c_str());
  const auto thr = build_thresholds(pools, excl);
  if (thr.low_count()) {
    std::fprintf(stderr, "warning: only %zu pooled ratios; tail percentiles are unreliable below 200\n",
                 thr.source_count);
  }
  const fs::path out = a.out.empty() ? default_out_dir() / "thresholds.json" : fs::path(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_thresholds(out, thr);
  std::printf("p_low %.4f p_high %.4f from %zu ratios%s -> %s\n", thr.p_low, thr.p_high, thr.source_count,
              excl ? (" (excluding " + *excl + ")").c_str() : "", out.string().c_str());
}

// ---- synth --------------------------------------------------------------

struct SynthArgs {
  double duration = 25.0;
  double hr = 75.0;
  std::string hr_ramp;
  std::string amp_step;
  std::vector<double> pattern;
  std::string scope = "r_wave";
  double t_gain = 1.0;
  double noise = 0.0;
  double wander = 0.0;
  double jitter_ms = 0.0;
  std::uint64_t seed = 1;
  std::string out;
};

std::pair<double, double> split_pair(const std::string& s, char sep, const char* what) {
  const auto pos = s.find(sep);
  try {
    if (pos == std::string::npos) throw std::invalid_argument(s);
    std::string rhs = s.substr(pos + 1);
    if (!rhs.empty() && rhs.back() == 's') rhs.pop_back();
    return {std::stod(s.substr(0, pos)), std::stod(rhs)};
  } catch (const std::exception&) {
    throw ConfigError(std::string("malformed ") + what + ": '" + s + "'");
  }
}

void cmd_synth(const SynthArgs& a) {
  SynthesisSpec spec;
  spec.duration_s = a.duration;
  spec.hr_bpm = PiecewiseLinear::constant(a.hr);
  if (!a.hr_ramp.empty()) {
    const auto [lo, hi] = split_pair(a.hr_ramp, ':', "--hr-ramp (from:to)");
    spec.hr_bpm = PiecewiseLinear({{0.0, lo}, {a.duration, hi}});
  }
  if (!a.amp_step.empty()) {
    const auto [level, at] = split_pair(a.amp_step, '@', "--amp-step (level@time)");
    spec.amplitude = PiecewiseLinear({{at, 1.0}, {at + 1e-3, level}});
  }
  if (!a.pattern.empty()) spec.beat_pattern = a.pattern;
  if (a.scope == "whole_beat") spec.amplitude_scope = AmplitudeScope::whole_beat;
  else if (a.scope != "r_wave") throw ConfigError("--scope must be r_wave or whole_beat");
  spec.t_wave_gain = a.t_gain;
  spec.noise_sd_uv = a.noise;
  spec.baseline_wander_uv = a.wander;
  spec.rr_jitter_s = a.jitter_ms / 1000.0;
  spec.seed = a.seed;
  const auto syn = synthesize_ecg(spec);

  const fs::path stem = a.out.empty() ? default_out_dir() / "synthetic" : fs::path(a.out);
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  save_ecg(stem.string() + ".csv", syn.record);
  save_annotations(stem.string() + ".ann", syn.truth, syn.record.fs);
  std::printf("%lld samples, %zu beats -> %s.{csv,ann}\n", static_cast<long long>(syn.record.size()),
              syn.truth.size(), stem.string().c_str());
}

// ---- plotdata -----------------------------------------------------------

struct PlotArgs {
  std::string input;
  std::string bench = "adaptive";
  std::string thr;
  std::string config;
  std::string out;
};

void cmd_plotdata(const PlotArgs& a) {
  const auto bench = parse_bench(a.bench);
  const auto cfg = pipeline_config(a.config);
  const auto thr = thresholds_for(bench, a.thr);
  std::vector<std::string> notes;
  const auto rec = load_input(a.input, "csv", notes);
  const auto rep = process_record(rec, bench, thr, cfg);
  const auto enhanced = enhance(rec, cfg.preprocess);

  const fs::path out = a.out.empty() ? default_out_dir() : fs::path(a.out);
  fs::create_directories(out);
  const auto stem = out / (fs::path(a.input).stem().string() + "." + a.bench);

  std::vector<char> is_peak(static_cast<std::size_t>(rec.size()), 0);
  for (auto p : rep.peaks.indices) is_peak[static_cast<std::size_t>(p)] = 1;
  std::ostringstream series;
  series << "index,time_s,raw_uv,enhanced,peak\n";
  for (std::int64_t i = 0; i < rec.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    series << i << ',' << static_cast<double>(i) / rec.fs << ',' << rec.samples[k] << ','
           << (k < enhanced.size() ? enhanced[k] : 0.0) << ',' << int(is_peak[k]) << '\n';
  }
  write_file_atomic(stem.string() + ".series.csv", series.str());

  std::ostringstream rr;
  rr << "peak_index,time_s,rr_ratio,p_low,p_high,source\n";
  const auto ratios = rr_ratios(rep.peaks);
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    const auto idx = ratios.anchors[k][2];
    const auto pos = static_cast<std::size_t>(
        std::lower_bound(rep.peaks.indices.begin(), rep.peaks.indices.end(), idx) - rep.peaks.indices.begin());
    rr << idx << ',' << static_cast<double>(idx) / rec.fs << ',' << ratios.ratios[k] << ',' << thr.p_low << ','
       << thr.p_high << ',' << to_string(rep.peaks.sources.at(pos)) << '\n';
  }
  write_file_atomic(stem.string() + ".rr.csv", rr.str());

  std::ostringstream win;
  win << "window_index,start,end,partial,error_flag,bs_invoked,bs_window_count\n";
  for (const auto& d : rep.decisions) {
    win << d.window_index << ',' << d.start << ',' << d.end << ',' << d.partial << ',' << d.error_flag << ','
        << d.bs_invoked << ',' << d.bs_window_count << '\n';
  }
  write_file_atomic(stem.string() + ".windows.csv", win.str());
  std::printf("-> %s.{series,rr,windows}.csv\n", stem.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive ECG R-peak detection: lightweight hysteresis, RR-ratio error detection, BayeSlope"};
  app.require_subcommand(1);

  DetectArgs da;
  auto* detect = app.add_subcommand("detect", "run a bench on one or more records");
  detect->add_option("--bench", da.bench, "lightweight | bayeslope | adaptive")->capture_default_str();
  detect->add_option("--in", da.inputs, "ECG record(s)")->required()->check(CLI::ExistingFile);
  detect->add_option("--format", da.format, "csv | wfdb_text")->capture_default_str();
  detect->add_option("--thr", da.thr, "RR-ratio threshold file (adaptive bench)");
  detect->add_option("--config", da.config, "pipeline config overrides (JSON)");
  detect->add_option("--out", da.out, "output directory (default $RPEAK_OUT_DIR or .)");
  detect->add_option("--jobs", da.jobs, "records processed in parallel")->capture_default_str();

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "score detections against annotations");
  eval->add_option("--det", ea.det, "detected peaks file")->check(CLI::ExistingFile);
  eval->add_option("--ann", ea.ann, "annotation file")->check(CLI::ExistingFile);
  eval->add_option("--tol", ea.tol, "matching tolerance in ms")->capture_default_str();
  eval->add_option("--manifest", ea.manifest, "run every bench on a segment manifest (leave-one-out thresholds)")
      ->check(CLI::ExistingFile);
  eval->add_option("--benches", ea.benches, "benches for --manifest");
  eval->add_option("--config", ea.config, "pipeline config overrides (JSON)");
  eval->add_option("--out", ea.out, "JSON table output for --manifest");
  eval->add_option("--jobs", ea.jobs, "segments processed in parallel")->capture_default_str();

  EnergyArgs ga;
  auto* energy = app.add_subcommand("energy", "duty-cycle energy of detection reports");
  energy->add_option("--report", ga.report, "detection report (JSON)")->check(CLI::ExistingFile);
  energy->add_option("--power", ga.power, "power profile (JSON)")->check(CLI::ExistingFile);
  energy->add_option("--cost", ga.cost, "cost model (JSON)")->check(CLI::ExistingFile);
  energy->add_flag("--bench-compare", ga.bench_compare, "energy of the three benches");
  energy->add_flag("--calibrate", ga.do_calibrate, "fit the cost model to the reference bench energies and save it");
  energy->add_option("--in", ga.input, "record for --bench-compare (default: reference 25 s geometry)")
      ->check(CLI::ExistingFile);
  energy->add_option("--thr", ga.thr, "threshold file for --bench-compare --in");
  energy->add_option("--config", ga.config, "pipeline config overrides (JSON)");
  energy->add_option("--out", ga.out, "output directory for --calibrate");

  DistArgs ra;
  auto* dist = app.add_subcommand("dist", "RR-ratio distributions");
  dist->require_subcommand(1);
  auto* build = dist->add_subcommand("build", "leave-one-out percentile thresholds");
  build->add_option("--manifest", ra.manifest, "take annotations from a segment manifest")->check(CLI::ExistingFile);
  build->add_option("--subject", ra.subjects, "id=annotations[,annotations...]");
  build->add_option("--exclude", ra.exclude, "subject left out of the pool");
  build->add_option("--out", ra.out, "threshold file to write");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "synthetic ECG with exact ground truth");
  synth->add_option("--duration", sa.duration, "seconds")->capture_default_str();
  synth->add_option("--hr", sa.hr, "constant heart rate (bpm)")->capture_default_str();
  synth->add_option("--hr-ramp", sa.hr_ramp, "linear heart-rate ramp from:to (bpm)");
  synth->add_option("--amp-step", sa.amp_step, "R amplitude step level@time, e.g. 0.4@5s");
  synth->add_option("--pattern", sa.pattern, "cyclic per-beat amplitude multipliers")->delimiter(',');
  synth->add_option("--scope", sa.scope, "r_wave | whole_beat")->capture_default_str();
  synth->add_option("--t-gain", sa.t_gain, "T-wave gain")->capture_default_str();
  synth->add_option("--noise", sa.noise, "white noise sd (uV)")->capture_default_str();
  synth->add_option("--wander", sa.wander, "0.3 Hz baseline wander amplitude (uV)")->capture_default_str();
  synth->add_option("--jitter-ms", sa.jitter_ms, "per-beat timing jitter sd (ms)")->capture_default_str();
  synth->add_option("--seed", sa.seed)->capture_default_str();
  synth->add_option("--out", sa.out, "output stem (writes <stem>.csv and <stem>.ann)");

  PlotArgs pa;
  auto* plot = app.add_subcommand("plotdata", "columnar series for external plotting");
  plot->add_option("--in", pa.input)->required()->check(CLI::ExistingFile);
  plot->add_option("--bench", pa.bench)->capture_default_str();
  plot->add_option("--thr", pa.thr);
  plot->add_option("--config", pa.config);
  plot->add_option("--out", pa.out);

  std::string corpus_dest = "fixtures";
  std::string corpus_manifest = "fixtures/manifest.csv";
  auto* corpus = app.add_subcommand("corpus", "fixture corpus");
  corpus->require_subcommand(1);
  auto* prepare = corpus->add_subcommand("prepare", "regenerate the synthetic fixtures and manifest");
  prepare->add_option("--dest", corpus_dest)->capture_default_str();
  auto* verify = corpus->add_subcommand("verify", "check manifest checksums");
  verify->add_option("--manifest", corpus_manifest)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*detect) {
      cmd_detect(da);
    } else if (*eval) {
      if (!ea.manifest.empty()) {
        cmd_eval_manifest(ea);
      } else if (!ea.det.empty() && !ea.ann.empty()) {
        cmd_eval_pair(ea);
      } else {
        throw ConfigError("eval needs --det and --ann, or --manifest");
      }
    } else if (*energy) {
      cmd_energy(ga);
    } else if (*build) {
      cmd_dist_build(ra);
    } else if (*synth) {
      cmd_synth(sa);
    } else if (*plot) {
      cmd_plotdata(pa);
    } else if (*prepare) {
      const auto m = prepare_fixtures(corpus_dest);
      std::printf("%zu segments -> %s\n", m.entries.size(), (fs::path(corpus_dest) / "manifest.csv").string().c_str());
    } else if (*verify) {
      const auto m = load_manifest(corpus_manifest);
      verify_manifest(m);
      std::printf("%zu segments verified\n", m.entries.size());
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "rpeak: error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "rpeak: error: %s\n", e.what());
    return 2;
  }
  return 0;
}
