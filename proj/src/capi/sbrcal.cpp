// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

#include "sbrcal/sbrcal.h"

#include <fstream>
#include <new>
#include <string>

#include "core/config.hpp"
#include "core/error_analysis.hpp"
#include "core/scenario.hpp"

struct sbr_receiver {
  sbr::ReceiverInstance impl;
};

struct sbr_calibration {
  sbr::CalibrationSet impl;
};

namespace {

thread_local std::string g_last_error;

sbr_status status_of(sbr::ErrorCode code) {
  switch (code) {
    case sbr::ErrorCode::InvalidArgument: return SBR_INVALID_ARGUMENT;
    case sbr::ErrorCode::DivisionFloor: return SBR_DIVISION_FLOOR;
    case sbr::ErrorCode::NotApplicable: return SBR_NOT_APPLICABLE;
    case sbr::ErrorCode::Unreachable: return SBR_UNREACHABLE;
    case sbr::ErrorCode::Config: return SBR_CONFIG;
    case sbr::ErrorCode::Io: return SBR_IO;
  }
  return SBR_INTERNAL;
}

template <class F>
sbr_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return SBR_OK;
  } catch (const sbr::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return SBR_INTERNAL;
}

void need(const void* p, const char* name) {
  if (!p) sbr::fail(sbr::ErrorCode::InvalidArgument, std::string(name) + " must not be NULL");
}

sbr::Complex to_cpp(sbr_complex z) { return {z.re, z.im}; }
sbr_complex to_c(sbr::Complex z) { return {z.real(), z.imag()}; }
sbr_ratio to_c(sbr::Ratio r) { return {r.linear, r.db(), r.above_cap ? 1 : 0}; }

sbr::Topology topology_of(sbr_topology t) {
  if (t == SBR_NO_IF_HYBRID) return sbr::Topology::NoIfHybrid;
  if (t == SBR_WITH_IF_HYBRID) return sbr::Topology::WithIfHybrid;
  sbr::fail(sbr::ErrorCode::InvalidArgument, "unknown topology");
}

std::optional<double> analog_rejection_of(double db) {
  if (db < 0.0) return std::nullopt;
  return db;
}

sbr::FrequencyPlan plan_of(const double* grid, size_t channels) {
  need(grid, "if_grid_mhz");
  sbr::FrequencyPlan plan;
  plan.if_grid_mhz.assign(grid, grid + channels);
  return plan;
}

sbr::WorkingPoint working_point_of(sbr_working_point wp) {
  sbr::WorkingPoint out;
  out.x = wp.x;
  out.dphi_deg = wp.dphi_deg;
  if (const auto ma = analog_rejection_of(wp.analog_rejection_db)) out.analog_rejection = sbr::db_to_power(*ma);
  return out;
}

}  // namespace

extern "C" {

const char* sbr_version(void) { return sbr::version_string(); }

const char* sbr_last_error(void) { return g_last_error.c_str(); }

sbr_status sbr_receiver_load(const char* toml_path, sbr_receiver** out) {
  return guarded([&] {
    need(toml_path, "toml_path");
    need(out, "out");
    *out = new sbr_receiver{sbr::load_receiver_config(toml_path).build()};
  });
}

sbr_status sbr_receiver_from_toml(const char* toml_text, sbr_receiver** out) {
  return guarded([&] {
    need(toml_text, "toml_text");
    need(out, "out");
    *out = new sbr_receiver{sbr::receiver_config_from_string(toml_text).build()};
  });
}

sbr_status sbr_receiver_create(sbr_topology topology, const sbr_imbalance_profile* profile,
                               double nominal_analog_rejection_db, const double* if_grid_mhz, size_t channels,
                               double noise_sigma, uint64_t rng_seed, sbr_receiver** out) {
  return guarded([&] {
    need(out, "out");
    sbr::ImbalanceProfile p;
    if (profile) {
      p.amp_imbalance_db = profile->amp_imbalance_db;
      p.amp_slope_db_per_ghz = profile->amp_slope_db_per_ghz;
      p.phase_imbalance_deg = profile->phase_imbalance_deg;
      p.phase_slope_deg_per_ghz = profile->phase_slope_deg_per_ghz;
      p.ripple_amp_db = profile->ripple_amp_db;
      p.ripple_period_mhz = profile->ripple_period_mhz;
      p.ripple_phase_deg = profile->ripple_phase_deg;
    }
    *out = new sbr_receiver{sbr::build_receiver(topology_of(topology), p, nominal_analog_rejection_db,
                                                plan_of(if_grid_mhz, channels), noise_sigma, rng_seed)};
  });
}

sbr_status sbr_receiver_from_gains(sbr_topology topology, const sbr_gain_matrix* gains, const double* if_grid_mhz,
                                   size_t channels, double noise_sigma, uint64_t rng_seed, sbr_receiver** out) {
  return guarded([&] {
    need(gains, "gains");
    need(out, "out");
    std::vector<sbr::GainMatrix> g(channels);
    for (size_t i = 0; i < channels; ++i)
      g[i] = {to_cpp(gains[i].g1u), to_cpp(gains[i].g1l), to_cpp(gains[i].g2u), to_cpp(gains[i].g2l)};
    *out = new sbr_receiver{
        sbr::ReceiverInstance(topology_of(topology), plan_of(if_grid_mhz, channels), std::move(g), noise_sigma, rng_seed)};
  });
}

void sbr_receiver_free(sbr_receiver* r) { delete r; }

sbr_status sbr_receiver_channels(const sbr_receiver* r, size_t* out) {
  return guarded([&] {
    need(r, "receiver");
    need(out, "out");
    *out = r->impl.channel_count();
  });
}

sbr_status sbr_receiver_gains(const sbr_receiver* r, size_t channel, sbr_gain_matrix* out) {
  return guarded([&] {
    need(r, "receiver");
    need(out, "out");
    const sbr::GainMatrix& g = r->impl.gains(channel);
    *out = {to_c(g.g1U), to_c(g.g1L), to_c(g.g2U), to_c(g.g2L)};
  });
}

sbr_status sbr_receiver_analog_outputs(const sbr_receiver* r, size_t channel, sbr_complex v_usb, sbr_complex v_lsb,
                                       sbr_complex* v1, sbr_complex* v2) {
  return guarded([&] {
    need(r, "receiver");
    need(v1, "v1");
    need(v2, "v2");
    const sbr::PortVoltages v = r->impl.analog_outputs(channel, to_cpp(v_usb), to_cpp(v_lsb));
    *v1 = to_c(v.v1);
    *v2 = to_c(v.v2);
  });
}

sbr_status sbr_receiver_analog_rejection(const sbr_receiver* r, size_t channel, sbr_ratio* out) {
  return guarded([&] {
    need(r, "receiver");
    need(out, "out");
    *out = to_c(r->impl.analog_rejection(channel));
  });
}

sbr_status sbr_receiver_apply_drift(const sbr_receiver* r, double dgain_db, double dphase_deg,
                                    sbr_drift_target target, sbr_receiver** out) {
  return guarded([&] {
    need(r, "receiver");
    need(out, "out");
    sbr::DriftTarget t = sbr::DriftTarget::Both;
    if (target == SBR_PORT1)
      t = sbr::DriftTarget::Port1;
    else if (target == SBR_PORT2)
      t = sbr::DriftTarget::Port2;
    else if (target != SBR_BOTH_PORTS)
      sbr::fail(sbr::ErrorCode::InvalidArgument, "unknown drift target");
    *out = new sbr_receiver{r->impl.apply_drift({dgain_db, dphase_deg, t})};
  });
}

sbr_status sbr_calibrate(const sbr_receiver* r, double tone_amplitude, int averages, uint64_t seed,
                         sbr_calibration** out) {
  return guarded([&] {
    need(r, "receiver");
    need(out, "out");
    *out = new sbr_calibration{sbr::sweep_calibrate(r->impl, tone_amplitude, averages, seed)};
  });
}

void sbr_calibration_free(sbr_calibration* c) { delete c; }

sbr_status sbr_calibration_channel(const sbr_calibration* c, size_t channel, sbr_complex* x1, sbr_complex* x2,
                                   sbr_complex* c2, sbr_complex* c3) {
  return guarded([&] {
    need(c, "calibration");
    const sbr::ChannelCalibration& ch = c->impl.at(channel);
    if (x1) *x1 = to_c(ch.X1);
    if (x2) *x2 = to_c(ch.X2);
    if (c2) *c2 = to_c(ch.constants.c2);
    if (c3) *c3 = to_c(ch.constants.c3);
  });
}

sbr_status sbr_calibration_write_csv(const sbr_calibration* c, const char* path) {
  return guarded([&] {
    need(c, "calibration");
    need(path, "path");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    sbr::write_calibration_csv(out, c->impl);
    if (!out) sbr::fail(sbr::ErrorCode::Io, std::string("cannot write '") + path + "'");
  });
}

sbr_status sbr_calibration_read_csv(const sbr_receiver* r, const char* path, sbr_calibration** out) {
  return guarded([&] {
    need(r, "receiver");
    need(path, "path");
    need(out, "out");
    std::ifstream in(path);
    if (!in) sbr::fail(sbr::ErrorCode::Io, std::string("cannot open '") + path + "'");
    *out = new sbr_calibration{sbr::read_calibration_csv(in, r->impl.plan())};
  });
}

sbr_status sbr_compensate(const sbr_calibration* c, size_t channel, sbr_complex v1, sbr_complex v2,
                          sbr_complex* v1c, sbr_complex* v2c) {
  return guarded([&] {
    need(c, "calibration");
    need(v1c, "v1c");
    need(v2c, "v2c");
    const sbr::PortVoltages v = sbr::compensate({to_cpp(v1), to_cpp(v2)}, c->impl, channel);
    *v1c = to_c(v.v1);
    *v2c = to_c(v.v2);
  });
}

sbr_status sbr_srr_from_tone(const sbr_receiver* r, const sbr_calibration* c, size_t channel, sbr_sideband sideband,
                             double tone_amplitude, uint64_t seed, int averages, sbr_ratio* raw,
                             sbr_ratio* compensated) {
  return guarded([&] {
    need(r, "receiver");
    need(c, "calibration");
    const sbr::Sideband sb = sideband == SBR_LSB ? sbr::Sideband::LSB : sbr::Sideband::USB;
    sbr::NoiseSource noise(seed, sbr::measurement_stream(channel, sb));
    const sbr::ToneSrr t = sbr::srr_from_tone(r->impl, c->impl, channel, sb, tone_amplitude, noise, averages);
    if (raw) *raw = to_c(t.raw);
    if (compensated) *compensated = to_c(t.compensated);
  });
}

sbr_status sbr_m_uc_general(sbr_complex x1_cal, sbr_complex x2_cal, sbr_complex x1_m, sbr_ratio* out) {
  return guarded([&] {
    need(out, "out");
    *out = to_c(sbr::m_uc_general(to_cpp(x1_cal), to_cpp(x2_cal), to_cpp(x1_m)));
  });
}

sbr_status sbr_m_uc_closed_form(sbr_working_point wp, sbr_ratio* out) {
  return guarded([&] {
    need(out, "out");
    *out = to_c(sbr::m_uc_closed_form(working_point_of(wp)));
  });
}

sbr_status sbr_delta_x_phi(double dv_over_v, double x, double* dx, double* dphi_rad) {
  return guarded([&] {
    const sbr::XPhiError e = sbr::delta_x_phi(dv_over_v, x);
    if (dx) *dx = e.dX;
    if (dphi_rad) *dphi_rad = e.dphi_rad;
  });
}

sbr_status sbr_coupled_voltage(sbr_topology topology, double power, double analog_rejection_db, double* out) {
  return guarded([&] {
    need(out, "out");
    std::optional<double> ma;
    if (const auto db = analog_rejection_of(analog_rejection_db)) ma = sbr::db_to_power(*db);
    *out = sbr::coupled_voltage(topology_of(topology), power, ma);
  });
}

sbr_status sbr_propagate(sbr_working_point wp, double dv_over_v_cal, double dv_over_v_meas, sbr_error_budget* out) {
  return guarded([&] {
    need(out, "out");
    const sbr::ErrorBudget b = sbr::propagate_m_uc(working_point_of(wp), dv_over_v_cal, dv_over_v_meas);
    *out = {b.m_uc,        sbr::power_db(b.m_uc), b.delta_m,     b.err_lo_db,       b.err_hi_db,
            b.cal.dX,      b.cal.dphi_rad,        b.meas.dX,     b.meas.dphi_rad};
  });
}

sbr_status sbr_contour_row(double target_db, double analog_rejection_db, double dphi_deg, double* x_lo,
                           double* x_hi) {
  return guarded([&] {
    const auto row = sbr::solve_contour_row(target_db, analog_rejection_of(analog_rejection_db), dphi_deg);
    if (!row) sbr::fail(sbr::ErrorCode::Unreachable, "target not reachable at this phase drift");
    if (x_lo) *x_lo = row->x_lo;
    if (x_hi) *x_hi = row->x_hi;
  });
}

sbr_status sbr_run_experiment(const char* config_path, const char* kind, int has_seed, uint64_t seed,
                              const char* out_dir, int* exit_code) {
  std::string diagnostics;
  const sbr_status st = guarded([&] {
    need(config_path, "config_path");
    need(exit_code, "exit_code");
    sbr::ScenarioOverrides ov;
    if (kind) {
      ov.kind = sbr::parse_experiment_kind(kind);
      if (!ov.kind) sbr::fail(sbr::ErrorCode::InvalidArgument, std::string("unknown experiment '") + kind + "'");
    }
    if (has_seed) ov.seed = seed;
    if (out_dir) ov.out_dir = std::filesystem::path(out_dir);
    const sbr::RunOutcome r = sbr::run_experiment_file(config_path, ov);
    *exit_code = r.exit_code;
    for (const auto& d : r.diagnostics) diagnostics += (diagnostics.empty() ? "" : "\n") + d;
  });
  if (st == SBR_OK) g_last_error = diagnostics;
  return st;
}

sbr_status sbr_plot_data(const char* csv_path, const char* out_path) {
  return guarded([&] {
    need(csv_path, "csv_path");
    need(out_path, "out_path");
    std::ifstream in(csv_path);
    if (!in) sbr::fail(sbr::ErrorCode::Io, std::string("cannot open '") + csv_path + "'");
    std::ostringstream buf;
    sbr::plot_data_from_csv(in, buf);
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    out << buf.str();
    if (!out) sbr::fail(sbr::ErrorCode::Io, std::string("cannot write '") + out_path + "'");
  });
}

}  // extern "C"
