#include "rpeak/energy_model.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rpeak/error.hpp"

namespace rpeak {

namespace {

constexpr std::array<const char*, kPowerStateCount> kStateNames{"deep_sleep", "retention", "fc_active",
                                                                "cl_active", "transfer"};

std::size_t idx(PowerState s) { return static_cast<std::size_t>(s); }

}  // namespace

const char* to_string(PowerState s) { return kStateNames[idx(s)]; }

PowerState parse_power_state(const std::string& name) {
  for (std::size_t i = 0; i < kStateNames.size(); ++i) {
    if (name == kStateNames[i]) return static_cast<PowerState>(i);
  }
  throw TraceError("unknown power state '" + name + "'");
}

double PowerProfile::retention_power() const {
  return p_deep_sleep + (p_l2_retention - p_deep_sleep) * static_cast<double>(l2_banks) / l2_banks_total;
}

double PowerProfile::state_power(PowerState s) const {
  switch (s) {
    case PowerState::deep_sleep: return p_deep_sleep;
    case PowerState::retention: return retention_power();
    case PowerState::fc_active: return p_fc_active + (fc_adds_cl_idle ? p_cl_idle : 0.0);
    case PowerState::cl_active: return p_soc_clockgated + p_cl_active_1();
    case PowerState::transfer: return retention_power();
  }
  throw TraceError("unknown power state");
}

void PowerProfile::validate() const {
  for (double p : {p_deep_sleep, p_l2_retention, p_soc_clockgated, p_fc_active, p_cl_idle, p_cl_active_8}) {
    if (!(p > 0) || !std::isfinite(p)) throw ConfigError("power constants must be positive and finite");
  }
  if (!(p_fc_active > p_soc_clockgated)) throw ConfigError("p_fc_active must exceed p_soc_clockgated");
  if (!(p_l2_retention >= p_deep_sleep)) throw ConfigError("p_l2_retention must be at least p_deep_sleep");
  if (!(cl_single_core_factor > 0)) throw ConfigError("cl_single_core_factor must be positive");
  if (!(p_cl_active_1() < p_cl_active_8)) throw ConfigError("single-core cluster power must stay below the 8-core figure");
  if (l2_banks_total <= 0 || l2_banks < 0 || l2_banks > l2_banks_total || l2_bank_kib <= 0) {
    throw ConfigError("invalid L2 bank configuration");
  }
  if (!(f_fc_hz > 0) || !(f_cl_hz > 0)) throw ConfigError("clock frequencies must be positive");
}

void ActivityTrace::push(PowerState state, double duration_s) {
  if (!(duration_s >= 0) || !std::isfinite(duration_s)) {
    throw TraceError(std::string("invalid duration for ") + to_string(state) + ": " + std::to_string(duration_s));
  }
  if (duration_s == 0) return;
  segments.push_back({state, duration_s});
}

void ActivityTrace::append(const ActivityTrace& other) {
  segments.insert(segments.end(), other.segments.begin(), other.segments.end());
}

double ActivityTrace::total_s() const {
  double t = 0;
  for (const auto& s : segments) t += s.duration_s;
  return t;
}

double ActivityTrace::seconds_in(PowerState s) const {
  double t = 0;
  for (const auto& seg : segments) {
    if (seg.state == s) t += seg.duration_s;
  }
  return t;
}

void CostModel::validate() const {
  for (double c : {fc_cycles_per_sample_preproc, fc_cycles_per_sample_reward, fc_cycles_per_window_errdet,
                   cl_cycles_per_sample_bayeslope, transfer_cycles_per_window}) {
    if (!(c >= 0) || !std::isfinite(c)) throw ConfigError("cycle counts must be non-negative and finite");
  }
  if (!(fc_cycles_per_sample_reward > 0)) throw ConfigError("fc_cycles_per_sample_reward must be positive");
  if (bayeslope_overlap < 0) throw ConfigError("bayeslope_overlap must be non-negative");
}

EnergyReport simulate(const ActivityTrace& trace, const PowerProfile& prof) {
  prof.validate();
  EnergyReport rep;
  for (const auto& seg : trace.segments) {
    if (idx(seg.state) >= kPowerStateCount) throw TraceError("unknown power state in trace");
    if (!(seg.duration_s > 0)) throw TraceError("trace segments must have positive duration");
    const double e = prof.state_power(seg.state) * seg.duration_s;
    rep.joules[idx(seg.state)] += e;
    rep.seconds[idx(seg.state)] += seg.duration_s;
    rep.total_j += e;
    rep.total_s += seg.duration_s;
  }
  return rep;
}

ActivityTrace trace_from_decisions(const DetectionReport& report, const CostModel& cost, const PowerProfile& prof) {
  cost.validate();
  prof.validate();
  const double fs = report.fs;
  ActivityTrace trace;

  auto period = [&](std::int64_t samples, double fc_cycles, double transfer_cycles, double cl_cycles,
                    const std::string& what) {
    const double span = static_cast<double>(samples) / fs;
    const double fc = fc_cycles / prof.f_fc_hz;
    const double tr = transfer_cycles / prof.f_fc_hz;
    const double cl = cl_cycles / prof.f_cl_hz;
    const double idle = span - fc - tr - cl;
    if (idle < 0) {
      throw TraceError(what + ": " + std::to_string(fc + tr + cl) + " s of work does not fit in a " +
                       std::to_string(span) + " s acquisition period");
    }
    trace.push(PowerState::retention, idle);
    trace.push(PowerState::fc_active, fc);
    trace.push(PowerState::transfer, tr);
    trace.push(PowerState::cl_active, cl);
  };

  std::int64_t covered = 0;
  for (const auto& d : report.decisions) covered += d.end - d.start;
  const std::int64_t warmup = report.record_len - covered;
  if (warmup < 0) throw TraceError("decisions cover more samples than the record holds");
  period(warmup, static_cast<double>(warmup) * cost.fc_cycles_per_sample_preproc, 0, 0, "warm-up");

  std::int64_t bs_calls = 0;
  for (const auto& d : report.decisions) {
    const auto len = d.end - d.start;
    double fc = static_cast<double>(len) * cost.fc_cycles_per_sample_preproc;
    if (report.bench != Bench::bayeslope) fc += static_cast<double>(len) * cost.fc_cycles_per_sample_reward;
    if (report.bench == Bench::adaptive && d.window_index > 0 && !d.partial) fc += cost.fc_cycles_per_window_errdet;

    double transfer = 0;
    double cl = 0;
    if (d.bs_invoked) {
      std::int64_t bs_samples = 0;
      if (report.bench == Bench::adaptive && d.bs_window_count == 2) {
        // one call over the previous and the current window, no overlap
        const auto& prev = report.decisions[static_cast<std::size_t>(d.window_index - 1)];
        bs_samples = len + (prev.end - prev.start);
      } else {
        bs_samples = len + (bs_calls > 0 ? cost.bayeslope_overlap : 0);
      }
      transfer = cost.transfer_cycles_per_window * d.bs_window_count;
      cl = static_cast<double>(bs_samples) * cost.cl_cycles_per_sample_bayeslope;
      ++bs_calls;
    }
    period(len, fc, transfer, cl, "window " + std::to_string(d.window_index));
  }
  return trace;
}

DetectionReport geometry_report(Bench bench, std::int64_t record_len, const WindowGeometry& geom) {
  const auto usable = record_len - geom.total_delay();
  if (usable < geom.window_len) throw InsufficientDataError("record shorter than the delay plus one window");
  DetectionReport rep;
  rep.bench = bench;
  rep.fs = geom.fs;
  rep.record_len = record_len;
  rep.scored_begin = geom.total_delay() + geom.window_len;
  rep.scored_end = record_len - geom.window_len;
  std::int64_t k = 0;
  for (std::int64_t s = 0; s < usable; s += geom.window_len, ++k) {
    WindowDecision d;
    d.window_index = k;
    d.start = s;
    d.end = std::min(s + geom.window_len, usable);
    d.partial = d.end - d.start < geom.window_len;
    if (bench == Bench::bayeslope) {
      d.bs_invoked = true;
      d.bs_window_count = 1;
      d.peaks_source = PeakSource::bayeslope;
    }
    rep.decisions.push_back(d);
  }
  rep.trigger_fraction = bench == Bench::bayeslope ? 1.0 : 0.0;
  return rep;
}

void set_triggers(DetectionReport& report, const std::vector<bool>& error_by_window) {
  if (report.bench != Bench::adaptive) throw ConfigError("set_triggers applies to the adaptive bench");
  bool prev_bs = false;
  std::int64_t full = 0;
  std::int64_t triggered = 0;
  for (auto& d : report.decisions) {
    const auto k = static_cast<std::size_t>(d.window_index);
    const bool err = d.window_index > 0 && !d.partial && k < error_by_window.size() && error_by_window[k];
    d.error_flag = err;
    d.bs_invoked = err;
    d.bs_window_count = err ? (prev_bs ? 1 : 2) : 0;
    d.peaks_source = err ? PeakSource::bayeslope : PeakSource::lightweight;
    prev_bs = err;
    if (!d.partial) {
      ++full;
      triggered += d.bs_window_count;
    }
  }
  report.trigger_fraction = full > 0 ? static_cast<double>(triggered) / static_cast<double>(full) : 0.0;
}

PlacementRatios reward_on_cluster(const PowerProfile& prof, double cl_cycle_ratio) {
  const double time_ratio = cl_cycle_ratio * prof.f_fc_hz / prof.f_cl_hz;
  return {time_ratio, time_ratio * prof.state_power(PowerState::cl_active) / prof.state_power(PowerState::fc_active)};
}

double cl_cycle_ratio_from_slowdown(const PowerProfile& prof, double time_ratio) {
  return time_ratio * prof.f_cl_hz / prof.f_fc_hz;
}

Calibration calibrate(const CostModel& seed, const PowerProfile& prof, const CalibrationTargets& targets,
                      const WindowGeometry& geom) {
  seed.validate();
  if (!(targets.segment_s > 0) || !(targets.complexity_ratio > 0) || !(targets.reward_on_cl_time_ratio > 0) ||
      !(targets.reward_on_cl_energy_ratio > 0)) {
    throw CalibrationError("calibration targets must be positive");
  }

  // Single-core cluster power from the placement experiment:
  // E_cl / E_fc = (P_cl / P_fc) * (t_cl / t_fc).
  Calibration cal;
  cal.profile = prof;
  {
    const double p_cl_total = prof.state_power(PowerState::fc_active) * targets.reward_on_cl_energy_ratio /
                              targets.reward_on_cl_time_ratio;
    const double share = (prof.p_cl_active_8 - prof.p_cl_idle) / 8.0;
    cal.profile.cl_single_core_factor = (p_cl_total - prof.p_soc_clockgated - prof.p_cl_idle) / share;
    if (!(cal.profile.cl_single_core_factor > 0)) {
      throw CalibrationError("placement ratios imply a non-positive single-core cluster power");
    }
  }
  cal.profile.validate();

  const auto n = static_cast<std::int64_t>(std::llround(targets.segment_s * targets.fs));
  auto g = geom;
  if (g.fs != targets.fs) g = WindowGeometry::for_rate(targets.fs);
  const auto lw_rep = geometry_report(Bench::lightweight, n, g);
  const auto bs_rep = geometry_report(Bench::bayeslope, n, g);

  // Bench energy is affine in (c_pre, c_rw) once c_bs = ratio * c_rw.
  auto energy = [&](const DetectionReport& rep, double c_pre, double c_rw) {
    CostModel c = seed;
    c.fc_cycles_per_sample_preproc = c_pre;
    c.fc_cycles_per_sample_reward = c_rw;
    c.cl_cycles_per_sample_bayeslope = targets.complexity_ratio * c_rw;
    return simulate(trace_from_decisions(rep, c, cal.profile), cal.profile).total_j;
  };
  constexpr double kUnit = 1.0;
  const double lw0 = energy(lw_rep, 0, 1e-12);
  const double bs0 = energy(bs_rep, 0, 1e-12);
  const double a1 = energy(lw_rep, kUnit, 1e-12) - lw0;
  const double b1 = energy(lw_rep, 0, kUnit) - lw0;
  const double a2 = energy(bs_rep, kUnit, 1e-12) - bs0;
  const double b2 = energy(bs_rep, 0, kUnit) - bs0;
  const double r1 = targets.lightweight_j - lw0;
  const double r2 = targets.bayeslope_j - bs0;
  const double det = a1 * b2 - a2 * b1;
  if (std::abs(det) < 1e-30) throw CalibrationError("calibration system is singular");
  const double c_pre = (r1 * b2 - r2 * b1) / det;
  const double c_rw = (a1 * r2 - a2 * r1) / det;
  if (!(c_pre >= 0) || !(c_rw > 0)) {
    throw CalibrationError("no non-negative cycle counts reproduce the targets: c_pre=" + std::to_string(c_pre) +
                           " c_rw=" + std::to_string(c_rw) + " (retention floor " +
                           std::to_string(lw0 * 1e3) + " mJ, targets " + std::to_string(targets.lightweight_j * 1e3) +
                           " / " + std::to_string(targets.bayeslope_j * 1e3) + " mJ)");
  }

  cal.cost = seed;
  cal.cost.fc_cycles_per_sample_preproc = c_pre;
  cal.cost.fc_cycles_per_sample_reward = c_rw;
  cal.cost.cl_cycles_per_sample_bayeslope = targets.complexity_ratio * c_rw;
  cal.cost.calibrated = true;

  const auto lw_trace = trace_from_decisions(lw_rep, cal.cost, cal.profile);
  const auto bs_trace = trace_from_decisions(bs_rep, cal.cost, cal.profile);
  cal.lightweight_j = simulate(lw_trace, cal.profile).total_j;
  cal.bayeslope_j = simulate(bs_trace, cal.profile).total_j;
  cal.lightweight_rel_error = std::abs(cal.lightweight_j - targets.lightweight_j) / targets.lightweight_j;
  cal.bayeslope_rel_error = std::abs(cal.bayeslope_j - targets.bayeslope_j) / targets.bayeslope_j;
  cal.fc_active_s_lightweight = lw_trace.seconds_in(PowerState::fc_active);
  cal.cl_active_s_bayeslope = bs_trace.seconds_in(PowerState::cl_active);
  if (cal.lightweight_rel_error > 0.01 || cal.bayeslope_rel_error > 0.01) {
    throw CalibrationError("calibrated model misses the targets: " + std::to_string(cal.lightweight_rel_error) +
                           ", " + std::to_string(cal.bayeslope_rel_error));
  }
  return cal;
}

// ---- files --------------------------------------------------------------

namespace {

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// Rejects keys outside `known`; derived keys written by the savers are
// listed there too so saved files load back.
void check_keys(const nlohmann::json& j, std::initializer_list<const char*> known, const std::filesystem::path& path) {
  if (!j.is_object()) throw ConfigError(path.string() + ": expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end()) {
      throw ConfigError(path.string() + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out, const std::filesystem::path& path) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": key '" + key + "': " + e.what());
  }
}

}  // namespace

PowerProfile load_power_profile(const std::filesystem::path& path) {
  const auto j = read_json(path);
  check_keys(j,
             {"units", "p_deep_sleep", "p_l2_retention", "p_soc_clockgated", "p_fc_active", "p_cl_idle",
              "p_cl_active_8", "p_cl_active_1", "cl_single_core_factor", "fc_adds_cl_idle", "l2_banks",
              "l2_banks_total", "l2_bank_kib", "f_fc_hz", "f_cl_hz"},
             path);
  PowerProfile p;
  read_opt(j, "p_deep_sleep", p.p_deep_sleep, path);
  read_opt(j, "p_l2_retention", p.p_l2_retention, path);
  read_opt(j, "p_soc_clockgated", p.p_soc_clockgated, path);
  read_opt(j, "p_fc_active", p.p_fc_active, path);
  read_opt(j, "p_cl_idle", p.p_cl_idle, path);
  read_opt(j, "p_cl_active_8", p.p_cl_active_8, path);
  read_opt(j, "cl_single_core_factor", p.cl_single_core_factor, path);
  read_opt(j, "fc_adds_cl_idle", p.fc_adds_cl_idle, path);
  read_opt(j, "l2_banks", p.l2_banks, path);
  read_opt(j, "l2_banks_total", p.l2_banks_total, path);
  read_opt(j, "l2_bank_kib", p.l2_bank_kib, path);
  read_opt(j, "f_fc_hz", p.f_fc_hz, path);
  read_opt(j, "f_cl_hz", p.f_cl_hz, path);
  p.validate();
  return p;
}

void save_power_profile(const std::filesystem::path& path, const PowerProfile& p) {
  nlohmann::json j{{"units", "W, Hz"},
                   {"p_deep_sleep", p.p_deep_sleep},
                   {"p_l2_retention", p.p_l2_retention},
                   {"p_soc_clockgated", p.p_soc_clockgated},
                   {"p_fc_active", p.p_fc_active},
                   {"p_cl_idle", p.p_cl_idle},
                   {"p_cl_active_8", p.p_cl_active_8},
                   {"p_cl_active_1", p.p_cl_active_1()},
                   {"cl_single_core_factor", p.cl_single_core_factor},
                   {"fc_adds_cl_idle", p.fc_adds_cl_idle},
                   {"l2_banks", p.l2_banks},
                   {"l2_banks_total", p.l2_banks_total},
                   {"l2_bank_kib", p.l2_bank_kib},
                   {"f_fc_hz", p.f_fc_hz},
                   {"f_cl_hz", p.f_cl_hz}};
  write_file_atomic(path, j.dump(2) + "\n");
}

CostModel load_cost_model(const std::filesystem::path& path) {
  const auto j = read_json(path);
  check_keys(j,
             {"fc_cycles_per_sample_preproc", "fc_cycles_per_sample_reward", "fc_cycles_per_window_errdet",
              "cl_cycles_per_sample_bayeslope", "transfer_cycles_per_window", "bayeslope_overlap", "calibrated",
              "complexity_ratio", "note"},
             path);
  CostModel c;
  read_opt(j, "fc_cycles_per_sample_preproc", c.fc_cycles_per_sample_preproc, path);
  read_opt(j, "fc_cycles_per_sample_reward", c.fc_cycles_per_sample_reward, path);
  read_opt(j, "fc_cycles_per_window_errdet", c.fc_cycles_per_window_errdet, path);
  read_opt(j, "cl_cycles_per_sample_bayeslope", c.cl_cycles_per_sample_bayeslope, path);
  read_opt(j, "transfer_cycles_per_window", c.transfer_cycles_per_window, path);
  read_opt(j, "bayeslope_overlap", c.bayeslope_overlap, path);
  read_opt(j, "calibrated", c.calibrated, path);
  c.validate();
  return c;
}

void save_cost_model(const std::filesystem::path& path, const CostModel& c) {
  nlohmann::json j{{"fc_cycles_per_sample_preproc", c.fc_cycles_per_sample_preproc},
                   {"fc_cycles_per_sample_reward", c.fc_cycles_per_sample_reward},
                   {"fc_cycles_per_window_errdet", c.fc_cycles_per_window_errdet},
                   {"cl_cycles_per_sample_bayeslope", c.cl_cycles_per_sample_bayeslope},
                   {"transfer_cycles_per_window", c.transfer_cycles_per_window},
                   {"bayeslope_overlap", c.bayeslope_overlap},
                   {"calibrated", c.calibrated},
                   {"complexity_ratio", c.complexity_ratio()},
                   {"note", c.calibrated ? "cycle counts are calibration artifacts fitted to the reference bench energies"
                                         : "uncalibrated defaults"}};
  write_file_atomic(path, j.dump(2) + "\n");
}

std::string energy_report_json(const EnergyReport& rep, const std::string& label) {
  nlohmann::json states = nlohmann::json::object();
  for (std::size_t i = 0; i < kPowerStateCount; ++i) {
    states[kStateNames[i]] = {{"joules", rep.joules[i]},
                              {"seconds", rep.seconds[i]},
                              {"percent", rep.total_j > 0 ? 100.0 * rep.joules[i] / rep.total_j : 0.0}};
  }
  nlohmann::json j{{"label", label}, {"total_j", rep.total_j}, {"total_mj", rep.total_j * 1e3},
                   {"total_s", rep.total_s}, {"states", states}};
  return j.dump(2) + "\n";
}

}  // namespace rpeak
