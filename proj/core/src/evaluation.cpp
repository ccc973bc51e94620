#include "rpeak/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "rpeak/error.hpp"

namespace rpeak {

MatchResult& MatchResult::operator+=(const MatchResult& other) {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  time_diffs_ms.insert(time_diffs_ms.end(), other.time_diffs_ms.begin(), other.time_diffs_ms.end());
  return *this;
}

namespace {

// pair[k] = index of the detection matched to annotation k, or npos.
constexpr std::size_t npos = static_cast<std::size_t>(-1);

std::vector<std::size_t> pair_up(std::span<const std::int64_t> detected, std::span<const std::int64_t> annotated,
                                 double tol_ms, int fs) {
  if (!(tol_ms > 0)) throw ConfigError("matching tolerance must be positive");
  if (fs <= 0) throw ConfigError("sampling rate must be positive");
  const double ms_per_sample = 1000.0 / fs;
  auto within = [&](std::int64_t d) { return std::abs(static_cast<double>(d)) * ms_per_sample <= tol_ms + 1e-9; };

  std::vector<std::size_t> pair(annotated.size(), npos);
  std::size_t i = 0;
  const std::size_t nd = detected.size();
  for (std::size_t k = 0; k < annotated.size(); ++k) {
    const auto a = annotated[k];
    while (i < nd && detected[i] < a && !within(detected[i] - a)) ++i;
    std::size_t best = nd;
    std::int64_t best_dist = 0;
    for (std::size_t j = i; j < nd && (detected[j] <= a || within(detected[j] - a)); ++j) {
      const auto dist = std::abs(detected[j] - a);
      if (best == nd || dist < best_dist) {
        best = j;
        best_dist = dist;
      }
    }
    if (best == nd) continue;
    pair[k] = best;
    i = best + 1;
  }
  return pair;
}

MatchResult count(std::span<const std::int64_t> detected, std::span<const std::int64_t> annotated,
                  const std::vector<std::size_t>& pair, int fs, std::int64_t lo, std::int64_t hi) {
  const double ms_per_sample = 1000.0 / fs;
  auto inside = [&](std::int64_t x) { return x >= lo && x < hi; };
  MatchResult m;
  std::vector<bool> used(detected.size(), false);
  for (std::size_t k = 0; k < annotated.size(); ++k) {
    if (pair[k] != npos) used[pair[k]] = true;
    if (!inside(annotated[k])) continue;
    if (pair[k] == npos) {
      ++m.fn;
    } else {
      ++m.tp;
      m.time_diffs_ms.push_back(static_cast<double>(detected[pair[k]] - annotated[k]) * ms_per_sample);
    }
  }
  for (std::size_t j = 0; j < detected.size(); ++j) {
    if (!used[j] && inside(detected[j])) ++m.fp;
  }
  return m;
}

}  // namespace

MatchResult match_peaks(std::span<const std::int64_t> detected, std::span<const std::int64_t> annotated,
                        double tol_ms, int fs) {
  const auto pair = pair_up(detected, annotated, tol_ms, fs);
  return count(detected, annotated, pair, fs, std::numeric_limits<std::int64_t>::min(),
               std::numeric_limits<std::int64_t>::max());
}

MatchResult match_peaks_in_range(std::span<const std::int64_t> detected, std::span<const std::int64_t> annotated,
                                 double tol_ms, int fs, std::int64_t lo, std::int64_t hi) {
  const auto pair = pair_up(detected, annotated, tol_ms, fs);
  return count(detected, annotated, pair, fs, lo, hi);
}

Scores f1(const MatchResult& m) {
  if (m.tp + m.fp + m.fn == 0) throw UndefinedScoreError("no detections and no annotations to score");
  Scores s;
  const auto tp = static_cast<double>(m.tp);
  s.f1 = tp / (tp + 0.5 * static_cast<double>(m.fp + m.fn));
  s.ppv = m.tp + m.fp > 0 ? tp / static_cast<double>(m.tp + m.fp) : 0.0;
  s.sensitivity = m.tp + m.fn > 0 ? tp / static_cast<double>(m.tp + m.fn) : 0.0;
  return s;
}

TimingStats timing_stats(const MatchResult& m) {
  const auto& d = m.time_diffs_ms;
  if (d.empty()) throw UndefinedScoreError("timing statistics need at least one true positive");
  TimingStats t;
  t.mean_ms = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
  if (d.size() > 1) {
    double acc = 0;
    for (double v : d) acc += (v - t.mean_ms) * (v - t.mean_ms);
    t.sd_ms = std::sqrt(acc / static_cast<double>(d.size() - 1));
  }
  return t;
}

PeakList restrict_range(const PeakList& peaks, std::int64_t lo, std::int64_t hi) {
  PeakList out;
  for (std::size_t k = 0; k < peaks.indices.size(); ++k) {
    const auto idx = peaks.indices[k];
    if (idx < lo || idx >= hi) continue;
    if (peaks.tagged()) {
      out.push(idx, peaks.sources[k]);
    } else {
      out.push(idx);
    }
  }
  return out;
}

std::vector<TableRow> summarize(const std::vector<SegmentScore>& segments) {
  std::vector<std::string> detectors;
  std::vector<std::string> classes;
  for (const auto& s : segments) {
    if (std::find(detectors.begin(), detectors.end(), s.detector) == detectors.end()) detectors.push_back(s.detector);
    if (std::find(classes.begin(), classes.end(), s.segment_class) == classes.end()) classes.push_back(s.segment_class);
  }
  classes.push_back("Total");

  std::vector<TableRow> rows;
  for (const auto& det : detectors) {
    for (const auto& cls : classes) {
      TableRow row;
      row.detector = det;
      row.segment_class = cls;
      Scores sum{};
      std::size_t scored = 0;
      for (const auto& s : segments) {
        if (s.detector != det || (cls != "Total" && s.segment_class != cls)) continue;
        ++row.segments;
        row.pooled += s.match;
        if (s.match.tp + s.match.fp + s.match.fn > 0) {
          const auto sc = f1(s.match);
          sum.f1 += sc.f1;
          sum.ppv += sc.ppv;
          sum.sensitivity += sc.sensitivity;
          ++scored;
        }
      }
      if (row.segments == 0) continue;
      if (row.pooled.tp + row.pooled.fp + row.pooled.fn > 0) row.pooled_scores = f1(row.pooled);
      if (scored > 0) {
        const auto n = static_cast<double>(scored);
        row.mean_scores = {sum.f1 / n, sum.ppv / n, sum.sensitivity / n};
      }
      if (row.pooled.tp > 0) row.timing = timing_stats(row.pooled);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string render_table(const std::vector<TableRow>& rows) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-12s %-16s %5s %8s %8s %8s %18s\n", "detector", "class", "segs", "F1(%)",
                "PPV(%)", "Se(%)", "time(ms) mean+-sd");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-12s %-16s %5zu %8.2f %8.2f %8.2f %8.1f +- %6.1f\n", r.detector.c_str(),
                  r.segment_class.c_str(), r.segments, 100 * r.pooled_scores.f1, 100 * r.pooled_scores.ppv,
                  100 * r.pooled_scores.sensitivity, r.timing.mean_ms, r.timing.sd_ms);
    out << buf;
  }
  return out.str();
}

}  // namespace rpeak
