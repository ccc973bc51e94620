#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rpeak/signal_io.hpp"

namespace rpeak {

// How the steepness B of the generalized logistic is derived from the
// current centroids.
enum class LogisticSlopePolicy {
  centroid_span,  // B = gain / (hcentr - lcentr)
  low_centroid,   // B = gain / lcentr: transition width tracks the baseline cluster
};

// Where the R peak is placed once the max up/down slopes of a QRS are known.
enum class PeakLocator {
  extremum,        // extremum of the input between the two slope positions
  slope_midpoint,  // midpoint of the two slope positions
};

struct BayeSlopeParams {
  std::int64_t min_rr_dist = 60;   // 240 ms
  std::int64_t max_qrs_dur = 35;   // 140 ms
  std::int64_t zero_run_len = 30;  // label-0 run that closes a QRS
  std::size_t history_len = 5;     // peaks feeding (mu, sd)
  double init_mu = 200.0;          // 75 bpm
  double init_sd = 25.0;           // 100 ms
  double sd_floor = 2.5;           // 10 ms
  double init_percentile = 99.0;
  double lcentr_init = 1.0;
  LogisticSlopePolicy b_policy = LogisticSlopePolicy::centroid_span;
  double b_gain = 4.0;
  PeakLocator locator = PeakLocator::extremum;

  static BayeSlopeParams for_rate(int fs);
  void validate() const;
};

// ---- Algorithm 1 building blocks -----------------------------------------

// exp(-(offset - mu)^2 / (2 sd^2)); 1 at offset == mu.
double gaussian_prior(double offset, double mu, double sd);

// Generalized logistic f(x) = hcentr / (1 + exp(-B (x - M))) with
// M = 2 lcentr + ln((hcentr - lcentr) / (hcentr + lcentr)) / B, so that
// sup f = hcentr and f(2 lcentr) = (lcentr + hcentr) / 2.
double logistic_normalize(double x, double lcentr, double hcentr, double B);

double logistic_steepness(double lcentr, double hcentr, const BayeSlopeParams& params);

// max(x, sigmoid * prior): never attenuates the observed slope.
inline double normalize_sample(double x, double prior, double sigmoid) {
  const double boost = sigmoid * prior;
  return x > boost ? x : boost;
}

// Two-cluster streaming k-means over st values. Each centroid is the running
// mean of its members; the initial centroid counts as the first member.
struct SlopeClusters {
  double hcentr = 0;
  double lcentr = 1;
  std::int64_t hcount = 1;
  std::int64_t lcount = 1;

  // 1 when st is strictly nearer hcentr (ties go to the low cluster); the
  // chosen centroid absorbs st.
  int assign_and_update(double st);
};

// (mu, sd) from the RR intervals of the peak history: mean and sample
// standard deviation floored at sd_floor. Fewer than two peaks keeps the
// current values.
std::pair<double, double> update_expectation(std::span<const std::int64_t> last_peaks, double mu,
                                             double sd, double sd_floor);

struct BayeSlopeState {
  SlopeClusters clusters;
  double mu = 200.0;
  double sd = 25.0;
  std::vector<std::int64_t> last_peaks;  // most recent last, at most history_len
  std::int64_t last_peak = 0;
  bool in_qrs = false;
  std::int64_t qrs_init = 0;
  std::int64_t zeroctr = 0;

  // streaming bookkeeping
  bool has_prev = false;
  double prev_sample = 0;
  std::int64_t processed = 0;
  std::vector<double> qrs_input;  // input samples over the open QRS span
  std::vector<double> qrs_slope;  // st * sign(s2) over the open QRS span
};

// Centroid initialization from a span of two consecutive windows starting at
// absolute index `start`: hcentr = P99(|diff|), lcentr = 1, mu/sd defaults.
// Throws InsufficientDataError when the span is shorter than
// `required_len`, InitError when hcentr <= lcentr.
BayeSlopeState init_state(std::span<const double> init_span, std::int64_t start,
                          const BayeSlopeParams& params, std::int64_t required_len = 0);

// One record of the clustering step, for replay checks.
struct ClusterStep {
  std::int64_t index;
  double st;
  int label;
};

struct SampleObserver {
  std::vector<ClusterStep>* steps = nullptr;
  // called after each clustering step with the current centroids
  std::vector<std::pair<double, double>>* centroids = nullptr;
};

// Streams `s` (first sample at absolute index `start`) through the detector,
// continuing from `state`. Returns the peaks emitted during this call.
PeakList detect(std::span<const double> s, std::int64_t start, BayeSlopeState& state,
                const BayeSlopeParams& params, const SampleObserver& observer = {});

// Always-on bench: init from the first two windows, then every window in turn.
PeakList detect_bayeslope(std::span<const double> signal, const WindowGeometry& geom,
                          const BayeSlopeParams& params, const SampleObserver& observer = {});

}  // namespace rpeak
