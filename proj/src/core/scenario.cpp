// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

#include "core/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "core/csv.hpp"
#include "core/error_analysis.hpp"

#ifndef SBRCAL_VERSION
#define SBRCAL_VERSION "0.0.0"
#endif

namespace sbr {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::uint64_t kDriftTag = 0xd71f7;

struct Artifact {
  std::string name;
  std::string content;
};

struct Outcome {
  std::vector<Artifact> files;
  Json summary = Json::object();
};

std::string db_tag(double db) {
  std::string s = csv::number(db);
  std::replace(s.begin(), s.end(), '-', 'm');
  return s + "db";
}

template <class F>
std::string render(F&& f) {
  std::ostringstream out;
  f(out);
  return out.str();
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Json spectrum_summary(const SrrSpectrum& s) {
  std::vector<double> raw, comp;
  for (const auto& p : s.points) {
    raw.push_back(p.raw.db());
    comp.push_back(p.compensated.db());
  }
  return {{"median_raw_db", median(raw)},
          {"median_comp_db", median(comp)},
          {"min_raw_db", *std::min_element(raw.begin(), raw.end())},
          {"min_comp_db", *std::min_element(comp.begin(), comp.end())}};
}

DriftState add(const DriftState& a, const DriftState& b) {
  return {a.gain1_db + b.gain1_db, a.phase1_deg + b.phase1_deg, a.gain2_db + b.gain2_db, a.phase2_deg + b.phase2_deg};
}

DriftState step_from_event(const DriftEvent& e) {
  DriftState s;
  if (e.target != DriftTarget::Port2) {
    s.gain1_db = e.dgain_db;
    s.phase1_deg = e.dphase_deg;
  }
  if (e.target != DriftTarget::Port1) {
    s.gain2_db = e.dgain_db;
    s.phase2_deg = e.dphase_deg;
  }
  return s;
}

DriftRun run_drift(const ScenarioConfig& cfg, const ReceiverInstance& receiver,
                   const std::optional<CalibrationSet>& calibration, bool cumulative) {
  require(cfg.repetitions >= 1, "repetitions must be >= 1");
  DriftRun run;
  run.calibration =
      calibration ? *calibration : sweep_calibrate(receiver, cfg.tone_amplitude, cfg.averages, cfg.seed);

  NoiseSource steps(derive_seed(cfg.seed, kDriftTag));
  const DriftSchedule& sched = cfg.drift;
  auto measure = [&](int rep, const DriftState& s) {
    const ReceiverInstance drifted = receiver.apply_drift({s.gain1_db, s.phase1_deg, DriftTarget::Port1})
                                         .apply_drift({s.gain2_db, s.phase2_deg, DriftTarget::Port2});
    run.rows.push_back({rep, s,
                        srr_sweep(drifted, run.calibration, cfg.tone_amplitude,
                                  derive_seed(cfg.seed, static_cast<std::uint64_t>(rep) + 1), cfg.measure_averages)});
  };

  DriftState state;
  measure(0, state);
  for (int rep = 1; rep <= cfg.repetitions; ++rep) {
    DriftState step;
    if (!sched.events.empty()) {
      step = step_from_event(sched.events[static_cast<std::size_t>(rep - 1)]);
    } else {
      // Fixed draw order keeps runs comparable when only one bound changes.
      step.gain1_db = sched.gain_step_db * steps.uniform(-1.0, 1.0);
      step.phase1_deg = sched.phase_step_deg * steps.uniform(-1.0, 1.0);
      step.gain2_db = sched.gain_step_db * steps.uniform(-1.0, 1.0);
      step.phase2_deg = sched.phase_step_deg * steps.uniform(-1.0, 1.0);
    }
    state = cumulative ? add(state, step) : step;
    measure(rep, state);
  }

  DriftSummary& sum = run.summary;
  const auto& initial = run.rows.front().spectrum.points;
  sum.initial_min_db = initial.front().compensated.db();
  for (const auto& p : initial) sum.initial_min_db = std::min(sum.initial_min_db, p.compensated.db());
  sum.min_db = sum.initial_min_db;
  for (const auto& row : run.rows) {
    sum.max_abs_gain_db = std::max({sum.max_abs_gain_db, std::abs(row.drift.gain1_db), std::abs(row.drift.gain2_db)});
    sum.max_abs_phase_deg =
        std::max({sum.max_abs_phase_deg, std::abs(row.drift.phase1_deg), std::abs(row.drift.phase2_deg)});
    for (std::size_t i = 0; i < row.spectrum.points.size(); ++i) {
      const double db = row.spectrum.points[i].compensated.db();
      sum.min_db = std::min(sum.min_db, db);
      sum.worst_degradation_db = std::max(sum.worst_degradation_db, initial[i].compensated.db() - db);
    }
  }
  return run;
}

CalibrationSet read_calibration_file(const std::filesystem::path& path, const FrequencyPlan& plan) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Config, "cannot open calibration file '" + path.string() + "'");
  try {
    return read_calibration_csv(in, plan);
  } catch (const Error& e) {
    fail(ErrorCode::Config, path.string() + ": " + e.what());
  }
}

Json drift_summary(const ScenarioConfig& cfg, const DriftRun& run, bool cumulative) {
  const DriftSummary& s = run.summary;
  return {{"mode", cumulative ? "random_walk" : "independent"},
          {"repetitions", cfg.repetitions},
          {"drift_bound", {{"gain_step_db", cfg.drift.gain_step_db},
                           {"phase_step_deg", cfg.drift.phase_step_deg},
                           {"explicit_events", cfg.drift.events.size()}}},
          {"max_abs_drift_gain_db", s.max_abs_gain_db},
          {"max_abs_drift_phase_deg", s.max_abs_phase_deg},
          {"initial_min_comp_db", s.initial_min_db},
          {"min_comp_db", s.min_db},
          {"worst_degradation_db", s.worst_degradation_db}};
}

Outcome run_calibrate(const ScenarioConfig& cfg, const ReceiverInstance& r) {
  const CalibrationSet cal = sweep_calibrate(r, cfg.tone_amplitude, cfg.averages, cfg.seed);
  return {{{"calibration.csv", render([&](std::ostream& o) { write_calibration_csv(o, cal); })}},
          {{"channels", cal.channels.size()}}};
}

Outcome run_sweep(const ScenarioConfig& cfg, const ReceiverInstance& r, const std::optional<CalibrationSet>& given) {
  Outcome out;
  CalibrationSet cal;
  if (given) {
    cal = *given;
  } else {
    cal = sweep_calibrate(r, cfg.tone_amplitude, cfg.averages, cfg.seed);
    out.files.push_back({"calibration.csv", render([&](std::ostream& o) { write_calibration_csv(o, cal); })});
  }
  const SrrSpectrum spectrum = srr_sweep(r, cal, cfg.tone_amplitude, cfg.seed, cfg.measure_averages);
  out.files.push_back({"srr_spectrum.csv", render([&](std::ostream& o) { write_srr_csv(o, spectrum); })});
  out.summary = spectrum_summary(spectrum);
  out.summary["calibration"] = given ? "file" : "fresh";
  return out;
}

Outcome run_drift_experiment(const ScenarioConfig& cfg, const ReceiverInstance& r,
                             const std::optional<CalibrationSet>& given, bool cumulative) {
  const DriftRun run = cumulative ? run_stability(cfg, r, given) : run_defluxing(cfg, r, given);
  Outcome out;
  if (!given)
    out.files.push_back({"calibration.csv", render([&](std::ostream& o) { write_calibration_csv(o, run.calibration); })});
  out.files.push_back({std::string(cumulative ? "stability" : "defluxing") + ".csv",
                       render([&](std::ostream& o) { write_drift_csv(o, run); })});
  out.summary = drift_summary(cfg, run, cumulative);
  return out;
}

std::vector<std::optional<double>> curves(const ScenarioConfig& cfg) {
  std::vector<std::optional<double>> out{std::nullopt};
  for (double ma : cfg.analog_rejection_grid_db) out.emplace_back(ma);
  return out;
}

Outcome run_contours(const ScenarioConfig& cfg) {
  Outcome out;
  out.summary = Json::array();
  for (double target : cfg.targets_db) {
    for (const auto& ma : curves(cfg)) {
      const ContourResult c = systematic_contour(target, ma, cfg.dphi_points);
      const std::string stem = "contour_" + db_tag(target) + "_" + (ma ? "ma" + db_tag(*ma) : "nohybrid");
      out.files.push_back({stem + ".csv", render([&](std::ostream& o) { write_contour_csv(o, c); })});
      out.files.push_back({stem + ".dat", render([&](std::ostream& o) { write_contour_plot_data(o, c); })});
      Json entry = {{"target_db", target}, {"M_A_db", ma ? Json(*ma) : Json(nullptr)}, {"rows", c.rows.size()}};
      if (const auto row = solve_contour_row(target, ma, 0.0))
        entry["x_interval_at_0deg"] = {row->x_lo, std::isfinite(row->x_hi) ? Json(row->x_hi) : Json("inf")};
      out.summary.push_back(entry);
    }
  }
  return out;
}

Outcome run_error_bars(const ScenarioConfig& cfg) {
  Outcome out;
  out.summary = Json::array();
  for (double target : cfg.targets_db) {
    for (ErrorSources src : {ErrorSources::CalibrationAndMeasurement, ErrorSources::MeasurementOnly}) {
      const ErrorBarCurve curve = error_bar_curve(target, cfg.analog_rejection_grid_db, cfg.dv_over_v,
                                                  cfg.reference_analog_rejection_db, src);
      const std::string stem = "errorbars_" + db_tag(target) + "_" + to_string(src);
      out.files.push_back({stem + ".csv", render([&](std::ostream& o) { write_error_bar_csv(o, curve); })});
      out.files.push_back({stem + ".dat", render([&](std::ostream& o) { write_error_bar_plot_data(o, curve); })});
      Json points = Json::array();
      for (const auto& p : curve.points)
        points.push_back({{"M_A_db", p.analog_rejection_db ? Json(*p.analog_rejection_db) : Json(nullptr)},
                          {"x", p.wp.x},
                          {"dv_over_v", p.budget.dv_over_v_meas},
                          {"length_db", p.budget.length_db()}});
      out.summary.push_back({{"target_db", target}, {"sources", to_string(src)}, {"points", points}});
    }
  }
  return out;
}

Outcome run_monte_carlo(const ScenarioConfig& cfg) {
  WorkingPoint wp;
  if (cfg.target_db) {
    const auto row = solve_contour_row(*cfg.target_db, cfg.analog_rejection_db, cfg.dphi_deg);
    if (!row)
      fail(ErrorCode::Unreachable, "target " + csv::number(*cfg.target_db) + " dB unreachable at dphi = " +
                                       csv::number(cfg.dphi_deg) + " deg");
    wp.x = std::isfinite(row->x_hi) ? row->x_hi : row->x_lo;
  } else {
    wp.x = *cfg.x;
  }
  wp.dphi_deg = cfg.dphi_deg;
  if (cfg.analog_rejection_db) wp.analog_rejection = db_to_power(*cfg.analog_rejection_db);
  const double dvv = scaled_dv_over_v(cfg.dv_over_v, cfg.reference_analog_rejection_db, cfg.analog_rejection_db);

  Outcome out;
  out.summary = Json::array();
  std::ostringstream table;
  csv::write_row(table, {"sources", "x", "dphi_deg", "M_A_db", "dv_over_v_cal", "dv_over_v_meas", "samples",
                         "capped", "nominal_db", "mean_db", "median_db", "q16_db", "q84_db", "mc_err_lo_db",
                         "mc_err_hi_db", "analytic_err_lo_db", "analytic_err_hi_db"});
  std::uint64_t tag = 0;
  for (ErrorSources src : {ErrorSources::CalibrationAndMeasurement, ErrorSources::MeasurementOnly}) {
    const ErrorBudget b = propagate_m_uc(wp, dvv, src);
    const MonteCarloSummary mc =
        monte_carlo_m_uc(wp, b.dv_over_v_cal, b.dv_over_v_meas, cfg.samples, derive_seed(cfg.seed, tag++));
    csv::write_row(table, {to_string(src), csv::number(wp.x), csv::number(wp.dphi_deg),
                           csv::number(cfg.analog_rejection_db.value_or(0.0)), csv::number(b.dv_over_v_cal),
                           csv::number(b.dv_over_v_meas), std::to_string(mc.samples), std::to_string(mc.capped),
                           csv::number(mc.nominal_db), csv::number(mc.mean_db), csv::number(mc.median_db),
                           csv::number(mc.q16_db), csv::number(mc.q84_db), csv::number(mc.err_lo_db),
                           csv::number(mc.err_hi_db), csv::number(b.err_lo_db), csv::number(b.err_hi_db)});
    out.summary.push_back({{"sources", to_string(src)},
                           {"analytic_length_db", b.length_db()},
                           {"monte_carlo_length_db", mc.length_db()},
                           {"relative_difference", std::abs(mc.length_db() - b.length_db()) / b.length_db()}});
  }
  out.files.push_back({"montecarlo.csv", table.str()});
  return out;
}

Json config_echo(const ScenarioConfig& cfg) {
  Json j = {{"path", cfg.source_path.filename().string()}, {"text", cfg.source_text}};
  if (!cfg.receiver_text.empty()) j["receiver_text"] = cfg.receiver_text;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(line);
  return out;
}

}  // namespace

DriftRun run_stability(const ScenarioConfig& cfg, const ReceiverInstance& receiver,
                       const std::optional<CalibrationSet>& calibration) {
  return run_drift(cfg, receiver, calibration, true);
}

DriftRun run_defluxing(const ScenarioConfig& cfg, const ReceiverInstance& receiver,
                       const std::optional<CalibrationSet>& calibration) {
  return run_drift(cfg, receiver, calibration, false);
}

void write_drift_csv(std::ostream& out, const DriftRun& run) {
  csv::write_row(out, {"repetition", "gain1_db", "phase1_deg", "gain2_db", "phase2_deg", "channel_index",
                       "if_freq_mhz", "sideband", "raw_srr_db", "comp_srr_db", "above_cap"});
  for (const auto& row : run.rows) {
    for (const auto& p : row.spectrum.points) {
      csv::write_row(out, {std::to_string(row.repetition), csv::number(row.drift.gain1_db),
                           csv::number(row.drift.phase1_deg), csv::number(row.drift.gain2_db),
                           csv::number(row.drift.phase2_deg), std::to_string(p.channel), csv::number(p.if_mhz),
                           to_string(p.sideband), csv::number(p.raw.db()), csv::number(p.compensated.db()),
                           p.compensated.above_cap ? "1" : "0"});
    }
  }
}

const char* version_string() { return SBRCAL_VERSION; }

RunOutcome run_experiment(const ScenarioConfig& cfg) {
  RunOutcome result;

  // Validation: everything that can be rejected as a config problem happens
  // before the output directory is touched.
  std::optional<ReceiverInstance> receiver;
  std::optional<CalibrationSet> calibration;
  try {
    if (needs_receiver(cfg.kind)) {
      if (!cfg.receiver) fail(ErrorCode::Config, "experiment '" + std::string(to_string(cfg.kind)) +
                                                     "' needs a [receiver] section");
      receiver = cfg.receiver->build();
      if (cfg.calibration_file) calibration = read_calibration_file(*cfg.calibration_file, receiver->plan());
    }
    if (cfg.repetitions < 1) fail(ErrorCode::Config, "repetitions must be >= 1");
    if (std::filesystem::exists(cfg.out_dir) && !std::filesystem::is_directory(cfg.out_dir))
      fail(ErrorCode::Config, "output path '" + cfg.out_dir.string() + "' is not a directory");
  } catch (const Error& e) {
    result.exit_code = kExitConfig;
    result.diagnostics = lines_of(e.what());
    return result;
  }

  Json manifest;
  manifest["artifact"] = "sbrcal";
  manifest["version"] = version_string();
  manifest["experiment"] = to_string(cfg.kind);
  manifest["seed"] = cfg.seed;
  manifest["config"] = config_echo(cfg);

  Outcome outcome;
  std::string error;
  try {
    switch (cfg.kind) {
      case ExperimentKind::Calibrate: outcome = run_calibrate(cfg, *receiver); break;
      case ExperimentKind::SrrSweep: outcome = run_sweep(cfg, *receiver, calibration); break;
      case ExperimentKind::Stability: outcome = run_drift_experiment(cfg, *receiver, calibration, true); break;
      case ExperimentKind::Defluxing: outcome = run_drift_experiment(cfg, *receiver, calibration, false); break;
      case ExperimentKind::Contours: outcome = run_contours(cfg); break;
      case ExperimentKind::ErrorBars: outcome = run_error_bars(cfg); break;
      case ExperimentKind::MonteCarlo: outcome = run_monte_carlo(cfg); break;
    }
  } catch (const std::exception& e) {
    error = e.what();
    outcome = {};
  }

  try {
    std::filesystem::create_directories(cfg.out_dir);
    Json outputs = Json::array();
    for (const auto& f : outcome.files) {
      write_text(cfg.out_dir / f.name, f.content);
      outputs.push_back(f.name);
      result.outputs.push_back((cfg.out_dir / f.name).string());
    }
    manifest["outputs"] = outputs;
    manifest["status"] = error.empty() ? "ok" : "failed";
    if (!error.empty()) manifest["error"] = error;
    manifest["summary"] = outcome.summary;
    write_text(cfg.out_dir / "manifest.json", manifest.dump(2) + "\n");
    result.outputs.push_back((cfg.out_dir / "manifest.json").string());
  } catch (const std::exception& e) {
    result.exit_code = kExitNumerical;
    result.diagnostics.push_back(e.what());
    return result;
  }

  if (!error.empty()) {
    result.exit_code = kExitNumerical;
    result.diagnostics = lines_of(error);
  }
  return result;
}

RunOutcome run_experiment_file(const std::filesystem::path& config, const ScenarioOverrides& overrides) {
  ScenarioConfig cfg;
  try {
    cfg = load_scenario(config, overrides);
  } catch (const Error& e) {
    RunOutcome r;
    r.exit_code = kExitConfig;
    r.diagnostics = lines_of(e.what());
    return r;
  }
  return run_experiment(cfg);
}

void plot_data_from_csv(std::istream& in, std::ostream& out) {
  const csv::Table t = csv::read_table(in);
  auto has = [&](const char* name) { return std::find(t.header.begin(), t.header.end(), name) != t.header.end(); };
  if (has("dphi_deg") && has("x_lo") && has("x_hi")) {
    ContourResult c;
    const std::size_t cp = t.column("dphi_deg"), cl = t.column("x_lo"), ch = t.column("x_hi");
    for (const auto& row : t.rows)
      c.rows.push_back({csv::parse_double(row[cp]), csv::parse_double(row[cl]), csv::parse_double(row[ch])});
    out << "# dphi_deg x\n";
    for (const auto& [dphi, x] : c.points()) out << csv::number(dphi) << ' ' << csv::number(x) << '\n';
    return;
  }
  if (has("M_A_db") && has("m_uc_db") && has("err_lo_db") && has("err_hi_db")) {
    const std::size_t ca = t.column("M_A_db"), cm = t.column("m_uc_db"), cl = t.column("err_lo_db"),
                      ch = t.column("err_hi_db");
    const char* names[] = {"lower", "upper"};
    for (int arm = 0; arm < 2; ++arm) {
      if (arm) out << "\n\n";
      out << "# M_A_db m_uc_db_" << names[arm] << '\n';
      for (const auto& row : t.rows) {
        const double m = csv::parse_double(row[cm]);
        const double y = arm == 0 ? m - csv::parse_double(row[cl]) : m + csv::parse_double(row[ch]);
        out << csv::number(csv::parse_double(row[ca])) << ' ' << csv::number(y) << '\n';
      }
    }
    return;
  }
  fail(ErrorCode::Io, "unrecognized CSV layout: expected contour or error-bar columns");
}

}  // namespace sbr
