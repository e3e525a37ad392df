/* SPDX-License-Identifier: Apache-2.0 */
/* Copyright 2026 The sbrcal Authors */

/*
 * C interface to the sbrcal library: sideband-separating receiver model,
 * digital sideband calibration, compensated rejection and its error analysis.
 *
 * All functions return SBR_OK on success. On failure they return a status
 * code and leave a message retrievable with sbr_last_error() on the same
 * thread. Output pointers are left untouched on failure.
 */

#ifndef SBRCAL_SBRCAL_H
#define SBRCAL_SBRCAL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(SBRCAL_BUILDING)
#define SBR_API __declspec(dllexport)
#else
#define SBR_API __declspec(dllimport)
#endif
#else
#define SBR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sbr_status {
  SBR_OK = 0,
  SBR_INVALID_ARGUMENT = 1,
  SBR_DIVISION_FLOOR = 2,
  SBR_NOT_APPLICABLE = 3,
  SBR_UNREACHABLE = 4,
  SBR_CONFIG = 5,
  SBR_IO = 6,
  SBR_INTERNAL = 7
} sbr_status;

typedef enum sbr_topology { SBR_NO_IF_HYBRID = 0, SBR_WITH_IF_HYBRID = 1 } sbr_topology;
typedef enum sbr_sideband { SBR_USB = 0, SBR_LSB = 1 } sbr_sideband;
typedef enum sbr_drift_target { SBR_PORT1 = 0, SBR_PORT2 = 1, SBR_BOTH_PORTS = 2 } sbr_drift_target;

typedef struct sbr_complex {
  double re;
  double im;
} sbr_complex;

/* Power ratio; above_cap is set when the value reached the 200 dB cap. */
typedef struct sbr_ratio {
  double linear;
  double db;
  int above_cap;
} sbr_ratio;

typedef struct sbr_gain_matrix {
  sbr_complex g1u, g1l, g2u, g2l;
} sbr_gain_matrix;

typedef struct sbr_imbalance_profile {
  double amp_imbalance_db;
  double amp_slope_db_per_ghz;
  double phase_imbalance_deg;
  double phase_slope_deg_per_ghz;
  double ripple_amp_db;
  double ripple_period_mhz;
  double ripple_phase_deg;
} sbr_imbalance_profile;

/* x = X1m/X1cal, dphi = phase drift; analog_rejection_db < 0 means no hybrid. */
typedef struct sbr_working_point {
  double x;
  double dphi_deg;
  double analog_rejection_db;
} sbr_working_point;

typedef struct sbr_error_budget {
  double m_uc;
  double m_uc_db;
  double delta_m;
  double err_lo_db;
  double err_hi_db;
  double dx_cal, dphi_cal_rad;
  double dx_meas, dphi_meas_rad;
} sbr_error_budget;

typedef struct sbr_receiver sbr_receiver;
typedef struct sbr_calibration sbr_calibration;

SBR_API const char* sbr_version(void);
SBR_API const char* sbr_last_error(void);

/* Receiver ------------------------------------------------------------- */

SBR_API sbr_status sbr_receiver_load(const char* toml_path, sbr_receiver** out);
SBR_API sbr_status sbr_receiver_from_toml(const char* toml_text, sbr_receiver** out);
SBR_API sbr_status sbr_receiver_create(sbr_topology topology, const sbr_imbalance_profile* profile,
                                       double nominal_analog_rejection_db, const double* if_grid_mhz,
                                       size_t channels, double noise_sigma, uint64_t rng_seed, sbr_receiver** out);
/* Explicit gains, one matrix per channel. */
SBR_API sbr_status sbr_receiver_from_gains(sbr_topology topology, const sbr_gain_matrix* gains,
                                           const double* if_grid_mhz, size_t channels, double noise_sigma,
                                           uint64_t rng_seed, sbr_receiver** out);
SBR_API void sbr_receiver_free(sbr_receiver* r);

SBR_API sbr_status sbr_receiver_channels(const sbr_receiver* r, size_t* out);
SBR_API sbr_status sbr_receiver_gains(const sbr_receiver* r, size_t channel, sbr_gain_matrix* out);
SBR_API sbr_status sbr_receiver_analog_outputs(const sbr_receiver* r, size_t channel, sbr_complex v_usb,
                                               sbr_complex v_lsb, sbr_complex* v1, sbr_complex* v2);
SBR_API sbr_status sbr_receiver_analog_rejection(const sbr_receiver* r, size_t channel, sbr_ratio* out);
SBR_API sbr_status sbr_receiver_apply_drift(const sbr_receiver* r, double dgain_db, double dphase_deg,
                                            sbr_drift_target target, sbr_receiver** out);

/* Calibration and compensation ---------------------------------------- */

SBR_API sbr_status sbr_calibrate(const sbr_receiver* r, double tone_amplitude, int averages, uint64_t seed,
                                 sbr_calibration** out);
SBR_API void sbr_calibration_free(sbr_calibration* c);
SBR_API sbr_status sbr_calibration_channel(const sbr_calibration* c, size_t channel, sbr_complex* x1,
                                           sbr_complex* x2, sbr_complex* c2, sbr_complex* c3);
SBR_API sbr_status sbr_calibration_write_csv(const sbr_calibration* c, const char* path);
SBR_API sbr_status sbr_calibration_read_csv(const sbr_receiver* r, const char* path, sbr_calibration** out);

SBR_API sbr_status sbr_compensate(const sbr_calibration* c, size_t channel, sbr_complex v1, sbr_complex v2,
                                  sbr_complex* v1c, sbr_complex* v2c);
SBR_API sbr_status sbr_srr_from_tone(const sbr_receiver* r, const sbr_calibration* c, size_t channel,
                                     sbr_sideband sideband, double tone_amplitude, uint64_t seed, int averages,
                                     sbr_ratio* raw, sbr_ratio* compensated);

/* Compensated rejection and error analysis ----------------------------- */

SBR_API sbr_status sbr_m_uc_general(sbr_complex x1_cal, sbr_complex x2_cal, sbr_complex x1_m, sbr_ratio* out);
SBR_API sbr_status sbr_m_uc_closed_form(sbr_working_point wp, sbr_ratio* out);
SBR_API sbr_status sbr_delta_x_phi(double dv_over_v, double x, double* dx, double* dphi_rad);
SBR_API sbr_status sbr_coupled_voltage(sbr_topology topology, double power, double analog_rejection_db,
                                       double* out);
SBR_API sbr_status sbr_propagate(sbr_working_point wp, double dv_over_v_cal, double dv_over_v_meas,
                                 sbr_error_budget* out);
/* x interval reaching target_db at dphi; x_hi is +inf when unbounded. */
SBR_API sbr_status sbr_contour_row(double target_db, double analog_rejection_db, double dphi_deg, double* x_lo,
                                   double* x_hi);

/* Scenarios ------------------------------------------------------------- */

/* Runs a scenario file. kind may be NULL (taken from the file); seed
 * is used when has_seed is nonzero; out_dir may be NULL. *exit_code receives
 * 0, 2 (config error) or 3 (numerical failure). For a nonzero exit code the
 * diagnostics, one per line, are available from sbr_last_error(). */
SBR_API sbr_status sbr_run_experiment(const char* config_path, const char* kind, int has_seed, uint64_t seed,
                                      const char* out_dir, int* exit_code);
/* Converts a contour or error-bar CSV into gnuplot columns. */
SBR_API sbr_status sbr_plot_data(const char* csv_path, const char* out_path);

#ifdef __cplusplus
}
#endif

#endif /* SBRCAL_SBRCAL_H */
