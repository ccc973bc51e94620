#pragma once

#include <filesystem>

#include "rpeak/adaptive_pipeline.hpp"

namespace rpeak {

// Overrides the defaults for `fs` with the keys present in a JSON file:
//   mf_short_len, mf_long_len, relen_short_len, relen_long_len (samples),
//   relen_form ("signed_ratio" | "energy"),
//   hyst_high_frac, hyst_low_frac, hyst_floor_uv,
//   min_rr_dist_ms, max_qrs_dur_ms, zero_run_len, history_len, sd_floor_ms,
//   logistic_B_policy ("centroid_span" | "low_centroid"),
//   peak_locator ("extremum" | "slope_midpoint").
// Unknown keys are rejected so typos do not pass silently.
PipelineConfig load_pipeline_config(const std::filesystem::path& path, int fs);

}  // namespace rpeak
