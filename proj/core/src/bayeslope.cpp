#include "rpeak/bayeslope.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rpeak/error.hpp"
#include "rpeak/error_detector.hpp"
#include "rpeak/preprocess.hpp"

namespace rpeak {

BayeSlopeParams BayeSlopeParams::for_rate(int fs) {
  BayeSlopeParams p;
  const auto ms = [fs](std::int64_t v) { return (v * fs) / 1000; };
  p.min_rr_dist = ms(240);
  p.max_qrs_dur = ms(140);
  p.init_mu = 60.0 / 75.0 * fs;
  p.init_sd = 0.100 * fs;
  p.sd_floor = 0.010 * fs;
  return p;
}

void BayeSlopeParams::validate() const {
  if (min_rr_dist <= 0 || max_qrs_dur <= 0 || zero_run_len <= 0 || history_len < 2) {
    throw ConfigError("BayeSlope interval parameters must be positive (history_len >= 2)");
  }
  if (!(init_mu > 0) || !(sd_floor > 0) || !(init_sd >= sd_floor)) {
    throw ConfigError("BayeSlope expectation parameters need mu > 0 and sd >= sd_floor > 0");
  }
  if (!(b_gain > 0) || !(lcentr_init > 0) || !(init_percentile > 0 && init_percentile <= 100)) {
    throw ConfigError("invalid BayeSlope logistic / centroid parameters");
  }
}

double gaussian_prior(double offset, double mu, double sd) {
  const double z = (offset - mu) / sd;
  return std::exp(-0.5 * z * z);
}

double logistic_normalize(double x, double lcentr, double hcentr, double B) {
  const double mid = 2.0 * lcentr + std::log((hcentr - lcentr) / (hcentr + lcentr)) / B;
  return hcentr / (1.0 + std::exp(-B * (x - mid)));
}

double logistic_steepness(double lcentr, double hcentr, const BayeSlopeParams& params) {
  return params.b_policy == LogisticSlopePolicy::centroid_span ? params.b_gain / (hcentr - lcentr)
                                                               : params.b_gain / lcentr;
}

int SlopeClusters::assign_and_update(double st) {
  // strictly nearer the high centroid <=> st above the midpoint
  if (st - lcentr > hcentr - st) {
    ++hcount;
    hcentr += (st - hcentr) / static_cast<double>(hcount);
    return 1;
  }
  ++lcount;
  lcentr += (st - lcentr) / static_cast<double>(lcount);
  return 0;
}

std::pair<double, double> update_expectation(std::span<const std::int64_t> last_peaks, double mu,
                                             double sd, double sd_floor) {
  if (last_peaks.size() < 2) return {mu, sd};
  std::vector<double> rr;
  for (std::size_t k = 1; k < last_peaks.size(); ++k) {
    rr.push_back(static_cast<double>(last_peaks[k] - last_peaks[k - 1]));
  }
  const double mean = std::accumulate(rr.begin(), rr.end(), 0.0) / static_cast<double>(rr.size());
  double var = 0;
  if (rr.size() > 1) {
    for (double v : rr) var += (v - mean) * (v - mean);
    var /= static_cast<double>(rr.size() - 1);
  }
  return {mean, std::max(std::sqrt(var), sd_floor)};
}

BayeSlopeState init_state(std::span<const double> init_span, std::int64_t start,
                          const BayeSlopeParams& params, std::int64_t required_len) {
  params.validate();
  if (init_span.size() < 2 || static_cast<std::int64_t>(init_span.size()) < required_len) {
    throw InsufficientDataError("BayeSlope init needs " + std::to_string(std::max<std::int64_t>(required_len, 2)) +
                                " samples, got " + std::to_string(init_span.size()));
  }
  std::vector<double> slopes(init_span.size() - 1);
  for (std::size_t i = 1; i < init_span.size(); ++i) slopes[i - 1] = std::abs(init_span[i] - init_span[i - 1]);
  std::sort(slopes.begin(), slopes.end());

  BayeSlopeState st;
  st.clusters.hcentr = percentile_linear(slopes, params.init_percentile);
  st.clusters.lcentr = params.lcentr_init;
  if (!(st.clusters.hcentr > st.clusters.lcentr)) {
    throw InitError("degenerate BayeSlope init: hcentr " + std::to_string(st.clusters.hcentr) +
                    " <= lcentr " + std::to_string(st.clusters.lcentr));
  }
  st.mu = params.init_mu;
  st.sd = params.init_sd;
  st.last_peak = start;
  return st;
}

namespace {

std::int64_t locate_peak(const BayeSlopeState& st, const BayeSlopeParams& params) {
  const auto& slope = st.qrs_slope;
  const auto& input = st.qrs_input;
  const auto up = static_cast<std::int64_t>(std::max_element(slope.begin(), slope.end()) - slope.begin());
  const auto down = static_cast<std::int64_t>(std::min_element(slope.begin(), slope.end()) - slope.begin());
  std::int64_t rel = 0;
  if (params.locator == PeakLocator::slope_midpoint) {
    rel = (up + down) / 2;
  } else {
    const auto lo = std::min(up, down);
    const auto hi = std::max(up, down);
    const auto first = input.begin() + lo;
    const auto last = input.begin() + hi + 1;
    // upslope before downslope: positive deflection; otherwise inverted
    rel = lo + (up <= down ? std::max_element(first, last) - first : std::min_element(first, last) - first);
  }
  return st.qrs_init + rel;
}

}  // namespace

PeakList detect(std::span<const double> s, std::int64_t start, BayeSlopeState& st,
                const BayeSlopeParams& params, const SampleObserver& observer) {
  PeakList out;
  auto& cl = st.clusters;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const std::int64_t i = start + static_cast<std::int64_t>(k);
    const double sample = s[k];
    if (!st.has_prev) {
      st.has_prev = true;
      st.prev_sample = sample;
      continue;
    }
    const double s2 = sample - st.prev_sample;
    st.prev_sample = sample;
    const double x = std::abs(s2);

    const double prior = gaussian_prior(static_cast<double>(i - st.last_peak), st.mu, st.sd);
    const double sigmoid = logistic_normalize(x, cl.lcentr, cl.hcentr, logistic_steepness(cl.lcentr, cl.hcentr, params));
    const double norm = normalize_sample(x, prior, sigmoid);
    const int label = cl.assign_and_update(norm);
    ++st.processed;
    if (observer.steps) observer.steps->push_back({i, norm, label});
    if (observer.centroids) observer.centroids->emplace_back(cl.lcentr, cl.hcentr);

    const double signed_slope = s2 > 0 ? norm : (s2 < 0 ? -norm : 0.0);
    if (st.in_qrs) {
      st.qrs_input.push_back(sample);
      st.qrs_slope.push_back(signed_slope);
      st.zeroctr = label == 0 ? st.zeroctr + 1 : 0;
      if (st.zeroctr >= params.zero_run_len || i - st.qrs_init > params.max_qrs_dur) {
        const auto peak = locate_peak(st, params);
        out.push(peak, PeakSource::bayeslope);
        st.last_peak = peak;
        st.last_peaks.push_back(peak);
        if (st.last_peaks.size() > params.history_len) st.last_peaks.erase(st.last_peaks.begin());
        std::tie(st.mu, st.sd) = update_expectation(st.last_peaks, st.mu, st.sd, params.sd_floor);
        st.in_qrs = false;
        st.zeroctr = 0;
        st.qrs_input.clear();
        st.qrs_slope.clear();
      }
    } else if (label == 1 && i > st.last_peak + params.min_rr_dist) {
      st.in_qrs = true;
      st.qrs_init = i;
      st.zeroctr = 0;
      st.qrs_input.assign(1, sample);
      st.qrs_slope.assign(1, signed_slope);
    }
  }
  return out;
}

PeakList detect_bayeslope(std::span<const double> signal, const WindowGeometry& geom,
                          const BayeSlopeParams& params, const SampleObserver& observer) {
  const auto init_len = 2 * geom.window_len;
  if (static_cast<std::int64_t>(signal.size()) < init_len) {
    throw InsufficientDataError("BayeSlope needs two full windows for initialization");
  }
  auto state = init_state(signal.first(static_cast<std::size_t>(init_len)), 0, params, init_len);
  PeakList all;
  for (const auto& w : segment_windows(signal, geom)) {
    auto p = detect(w.samples, w.start, state, params, observer);
    all.indices.insert(all.indices.end(), p.indices.begin(), p.indices.end());
    all.sources.insert(all.sources.end(), p.sources.begin(), p.sources.end());
  }
  return all;
}

}  // namespace rpeak
