#include "rpeak/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "rpeak/error.hpp"

namespace rpeak {

namespace {

std::int64_t ms_to_samples(double ms, int fs) { return static_cast<std::int64_t>(ms * fs / 1000.0); }

}  // namespace

PipelineConfig load_pipeline_config(const std::filesystem::path& path, int fs) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(path.string() + ": expected a JSON object");

  static const std::set<std::string> known{
      "mf_short_len",   "mf_long_len",    "relen_short_len", "relen_long_len", "relen_form",
      "hyst_high_frac", "hyst_low_frac",  "hyst_floor_uv",   "min_rr_dist_ms", "max_qrs_dur_ms",
      "zero_run_len",   "history_len",    "sd_floor_ms",     "logistic_B_policy", "peak_locator"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError(path.string() + ": unknown key '" + key + "'");
  }

  auto cfg = PipelineConfig::for_rate(fs);
  try {
    auto& pp = cfg.preprocess;
    pp.mf_short_len = j.value("mf_short_len", pp.mf_short_len);
    pp.mf_long_len = j.value("mf_long_len", pp.mf_long_len);
    pp.relen_short_len = j.value("relen_short_len", pp.relen_short_len);
    pp.relen_long_len = j.value("relen_long_len", pp.relen_long_len);
    if (j.contains("relen_form")) {
      const auto f = j["relen_form"].get<std::string>();
      if (f == "signed_ratio") pp.relen_form = RelEnForm::signed_ratio;
      else if (f == "energy") pp.relen_form = RelEnForm::energy;
      else throw ConfigError("relen_form must be signed_ratio or energy");
    }

    auto& hp = cfg.hysteresis;
    hp.high_frac = j.value("hyst_high_frac", hp.high_frac);
    hp.low_frac = j.value("hyst_low_frac", hp.low_frac);
    hp.floor_uv = j.value("hyst_floor_uv", hp.floor_uv);

    auto& bp = cfg.bayeslope;
    if (j.contains("min_rr_dist_ms")) {
      bp.min_rr_dist = ms_to_samples(j["min_rr_dist_ms"].get<double>(), fs);
      hp.refractory = bp.min_rr_dist;
    }
    if (j.contains("max_qrs_dur_ms")) bp.max_qrs_dur = ms_to_samples(j["max_qrs_dur_ms"].get<double>(), fs);
    if (j.contains("sd_floor_ms")) bp.sd_floor = j["sd_floor_ms"].get<double>() * fs / 1000.0;
    bp.zero_run_len = j.value("zero_run_len", bp.zero_run_len);
    bp.history_len = j.value("history_len", bp.history_len);
    if (j.contains("logistic_B_policy")) {
      const auto p = j["logistic_B_policy"].get<std::string>();
      if (p == "centroid_span") bp.b_policy = LogisticSlopePolicy::centroid_span;
      else if (p == "low_centroid") bp.b_policy = LogisticSlopePolicy::low_centroid;
      else throw ConfigError("logistic_B_policy must be centroid_span or low_centroid");
    }
    if (j.contains("peak_locator")) {
      const auto p = j["peak_locator"].get<std::string>();
      if (p == "extremum") bp.locator = PeakLocator::extremum;
      else if (p == "slope_midpoint") bp.locator = PeakLocator::slope_midpoint;
      else throw ConfigError("peak_locator must be extremum or slope_midpoint");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

}  // namespace rpeak
