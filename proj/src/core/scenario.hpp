// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "core/compensation.hpp"
#include "core/config.hpp"

namespace sbr {

/// Accumulated per-port drift relative to the calibrated state.
struct DriftState {
  double gain1_db = 0.0;
  double phase1_deg = 0.0;
  double gain2_db = 0.0;
  double phase2_deg = 0.0;
};

struct DriftRow {
  int repetition = 0;  // 0 is the measurement right after calibration
  DriftState drift;
  SrrSpectrum spectrum;
};

struct DriftSummary {
  double initial_min_db = 0.0;       // worst channel right after calibration
  double min_db = 0.0;               // worst channel over all repetitions
  double worst_degradation_db = 0.0; // max over points of initial - current
  double max_abs_gain_db = 0.0;      // largest realized drift on either port
  double max_abs_phase_deg = 0.0;
};

struct DriftRun {
  CalibrationSet calibration;
  std::vector<DriftRow> rows;
  DriftSummary summary;
};

/// Calibrates once (or uses the supplied calibration), measures, then applies
/// `repetitions` cumulative drift steps and re-measures after each with the
/// frozen constants. Random steps are uniform in [-step, step] per port.
DriftRun run_stability(const ScenarioConfig& cfg, const ReceiverInstance& receiver,
                       const std::optional<CalibrationSet>& calibration = std::nullopt);

/// Same as run_stability, but every reset draws a fresh perturbation of the
/// calibrated state instead of adding to the previous one.
DriftRun run_defluxing(const ScenarioConfig& cfg, const ReceiverInstance& receiver,
                       const std::optional<CalibrationSet>& calibration = std::nullopt);

void write_drift_csv(std::ostream& out, const DriftRun& run);

struct RunOutcome {
  int exit_code = 0;  // 0 ok, 2 config, 3 numerical failure
  std::vector<std::string> outputs;
  std::vector<std::string> diagnostics;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Validates, runs and writes all outputs plus manifest.json into cfg.out_dir.
/// Nothing is written when validation fails. After validation the manifest is
/// always written, with status "failed" if the experiment threw.
RunOutcome run_experiment(const ScenarioConfig& cfg);

/// Loads the config file and runs it; config errors come back as exit code 2.
RunOutcome run_experiment_file(const std::filesystem::path& config, const ScenarioOverrides& overrides);

/// Converts a contour or error-bar CSV into whitespace-separated columns with
/// blank-line separated blocks.
void plot_data_from_csv(std::istream& in, std::ostream& out);

const char* version_string();

}  // namespace sbr
