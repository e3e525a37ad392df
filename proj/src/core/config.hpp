// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "core/receiver.hpp"

namespace sbr {

/// Receiver description: sections [topology], [profile], [plan], [noise].
struct ReceiverConfig {
  Topology topology = Topology::NoIfHybrid;
  double nominal_analog_rejection_db = 20.0;
  ImbalanceProfile profile;
  FrequencyPlan plan;
  double noise_sigma = 0.0;
  std::uint64_t rng_seed = 1;

  ReceiverInstance build() const;
};

ReceiverConfig receiver_config_from_string(const std::string& text, const std::string& origin = "<string>");
ReceiverConfig load_receiver_config(const std::filesystem::path& path);

enum class ExperimentKind { Calibrate, SrrSweep, Stability, Defluxing, Contours, ErrorBars, MonteCarlo };

/// Subcommand spelling: calibrate, sweep, stability, defluxing, contours,
/// errorbars, montecarlo.
const char* to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(const std::string& name);
bool needs_receiver(ExperimentKind kind);

/// Stability runs accumulate per-step drifts (random walk); defluxing runs draw
/// an independent perturbation per reset. Random steps are uniform in
/// [-step, +step] for each port separately. An explicit event list replaces the
/// random draws: event k is applied at repetition k.
struct DriftSchedule {
  double gain_step_db = 0.0;
  double phase_step_deg = 0.0;
  std::vector<DriftEvent> events;
};

struct ScenarioConfig {
  std::filesystem::path source_path;
  std::string source_text;
  std::string receiver_text;  // verbatim receiver file when referenced

  ExperimentKind kind = ExperimentKind::Calibrate;
  std::optional<ReceiverConfig> receiver;

  std::uint64_t seed = 1;
  double tone_amplitude = 1.0;
  int averages = 1;          // per calibration tone
  int measure_averages = 1;  // power averages per SRR readout
  int repetitions = 1;
  std::optional<std::filesystem::path> calibration_file;

  std::vector<double> targets_db{30.0, 40.0};
  std::vector<double> analog_rejection_grid_db{3.0, 7.0, 10.0, 15.0, 20.0, 30.0};
  std::size_t dphi_points = 721;
  double dv_over_v = 1e-3;
  double reference_analog_rejection_db = 20.0;

  std::size_t samples = 100000;
  std::optional<double> target_db;  // Monte Carlo working point at dphi = 0
  std::optional<double> x;          // ... or an explicit one
  double dphi_deg = 0.0;
  std::optional<double> analog_rejection_db;

  DriftSchedule drift;
  std::filesystem::path out_dir = "out";
};

struct ScenarioOverrides {
  std::optional<ExperimentKind> kind;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
};

/// Parses and validates a scenario file ([receiver], [experiment], [drift],
/// [output]). Every problem is reported as ErrorCode::Config, one line per
/// failure, before anything is written.
ScenarioConfig load_scenario(const std::filesystem::path& path, const ScenarioOverrides& overrides = {});
ScenarioConfig scenario_from_string(const std::string& text, const std::filesystem::path& base_dir,
                                    const ScenarioOverrides& overrides = {});

}  // namespace sbr
