#include "rpeak/error_detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rpeak/error.hpp"

namespace rpeak {

void RrThresholds::validate() const {
  if (!(p_low > 0) || !(p_high >= p_low) || !std::isfinite(p_high)) {
    throw ConfigError("RR thresholds must satisfy 0 < p_low <= p_high");
  }
}

RrRatioSeries rr_ratios(std::span<const std::int64_t> peaks) {
  RrRatioSeries out;
  if (peaks.size() < 3) return out;
  out.ratios.reserve(peaks.size() - 2);
  out.anchors.reserve(peaks.size() - 2);
  for (std::size_t k = 0; k + 2 < peaks.size(); ++k) {
    const auto prev = peaks[k + 1] - peaks[k];
    const auto next = peaks[k + 2] - peaks[k + 1];
    if (prev <= 0 || next <= 0) continue;
    out.ratios.push_back(static_cast<double>(next) / static_cast<double>(prev));
    out.anchors.push_back({peaks[k], peaks[k + 1], peaks[k + 2]});
  }
  return out;
}

double percentile_linear(std::span<const double> sorted, double pct) {
  if (sorted.empty()) throw ConfigError("percentile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * pct / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

RrThresholds build_thresholds(const std::map<std::string, RrRatioSeries>& subjects,
                              const std::optional<std::string>& exclude, double low_pct,
                              double high_pct) {
  std::vector<double> pool;
  for (const auto& [id, series] : subjects) {
    if (exclude && id == *exclude) continue;
    pool.insert(pool.end(), series.ratios.begin(), series.ratios.end());
  }
  if (pool.empty()) throw ConfigError("RR-ratio pool is empty after exclusion");
  std::sort(pool.begin(), pool.end());
  RrThresholds thr;
  thr.p_low = percentile_linear(pool, low_pct);
  thr.p_high = percentile_linear(pool, high_pct);
  thr.source_count = pool.size();
  thr.excluded_subject = exclude;
  return thr;
}

bool check_window(std::span<const std::int64_t> window_peaks, std::span<const std::int64_t> context,
                  const RrThresholds& thr) {
  std::vector<std::int64_t> all;
  const auto ctx = context.size() > 2 ? context.subspan(context.size() - 2) : context;
  all.insert(all.end(), ctx.begin(), ctx.end());
  all.insert(all.end(), window_peaks.begin(), window_peaks.end());
  if (all.size() < 3) return true;
  const auto series = rr_ratios(all);
  return std::any_of(series.ratios.begin(), series.ratios.end(),
                     [&](double r) { return r < thr.p_low || r > thr.p_high; });
}

RrThresholds load_thresholds(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open threshold file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    RrThresholds thr;
    thr.p_low = j.at("p_low").get<double>();
    thr.p_high = j.at("p_high").get<double>();
    thr.source_count = j.value("source_count", std::size_t{0});
    if (j.contains("excluded_subject") && !j["excluded_subject"].is_null()) {
      thr.excluded_subject = j["excluded_subject"].get<std::string>();
    }
    thr.validate();
    return thr;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": malformed threshold file: " + e.what());
  }
}

void save_thresholds(const std::filesystem::path& path, const RrThresholds& thr) {
  nlohmann::json j;
  j["p_low"] = thr.p_low;
  j["p_high"] = thr.p_high;
  j["source_count"] = thr.source_count;
  j["excluded_subject"] = thr.excluded_subject ? nlohmann::json(*thr.excluded_subject) : nlohmann::json();
  write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace rpeak
