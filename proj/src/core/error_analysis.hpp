// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "core/compensation.hpp"

namespace sbr {

struct XPhiError {
  double dX = 0.0;
  double dphi_rad = 0.0;
};

/// Uncertainty of X = |v_num/v_den| and phi = arg v_num - arg v_den when the
/// real and imaginary part of both voltages carry an error dv, with
/// dv_over_v = dv/|v_num|:
///   dX = dv_over_v * X * sqrt(1 + X^2),  dphi = dv_over_v * sqrt(1 + X^2)
XPhiError delta_x_phi(double dv_over_v, double X);

/// Non-rejected port voltage for coupled power P: sqrt(P/2) without IF hybrid,
/// sqrt(P * M/(1+M)) with one (M = analog rejection, linear).
double coupled_voltage(Topology topology, double power, std::optional<double> analog_rejection);

enum class ErrorSources { CalibrationAndMeasurement, MeasurementOnly };

const char* to_string(ErrorSources s);

/// Propagated uncertainty of the compensated rejection at a working point.
/// err_lo_db / err_hi_db are the two arms of [M - dM, M + dM] in dB; the
/// reported bar length is their sum.
struct ErrorBudget {
  double dv_over_v_cal = 0.0;
  double dv_over_v_meas = 0.0;
  XPhiError cal;
  XPhiError meas;
  double m_uc = 0.0;     // linear
  double delta_m = 0.0;  // linear
  double err_lo_db = 0.0;
  double err_hi_db = 0.0;

  double length_db() const { return err_lo_db + err_hi_db; }
};

/// Annex-style propagation over k in {cal, meas}:
///   dM^2 = sum_k (dM/dX_k)^2 dX_k^2 + (dM/dphi_k)^2 dphi_k^2
/// with the rejection written through the general expression for
/// X1cal = X2cal = X_cal e^{j phi_cal}, X1m = X_meas e^{j phi_meas}. Nominally
/// X_cal = j (no hybrid) or sqrt(M_A) (hybrid, so M_A follows X_cal^2),
/// X_meas = x * |X_cal| and phi_meas - phi_cal = dphi. Partial derivatives are
/// central differences with step 1e-6 * max(1, |value|). Throws at capped
/// points.
ErrorBudget propagate_m_uc(const WorkingPoint& wp, double dv_over_v_cal, double dv_over_v_meas);

inline ErrorBudget propagate_m_uc(const WorkingPoint& wp, double dv_over_v, ErrorSources sources) {
  return propagate_m_uc(wp, sources == ErrorSources::MeasurementOnly ? 0.0 : dv_over_v, dv_over_v);
}

struct MonteCarloSummary {
  std::size_t samples = 0;
  std::size_t capped = 0;
  double nominal_db = 0.0;
  double mean_db = 0.0;
  double median_db = 0.0;
  double q16_db = 0.0;
  double q84_db = 0.0;
  double linear_half_width = 0.0;  // (Q84 - Q16)/2 of the linear ratio
  double err_lo_db = 0.0;          // arms of [M0 - hw, M0 + hw] in dB
  double err_hi_db = 0.0;

  double percentile_half_width_db() const { return (q84_db - q16_db) / 2.0; }
  double length_db() const { return err_lo_db + err_hi_db; }
  double half_width_db() const { return length_db() / 2.0; }
};

/// Independent check of propagate_m_uc: perturbs the three measured voltage
/// pairs (USB and LSB calibration tones, USB measurement tone) with Gaussian
/// noise of std. dev. dv_over_v relative to the signal port and recomputes the
/// compensated rejection through m_uc_general per sample.
MonteCarloSummary monte_carlo_m_uc(const WorkingPoint& wp, double dv_over_v_cal, double dv_over_v_meas,
                                   std::size_t samples, std::uint64_t seed);

/// Reference calibration ratio used by the analysis for a working point:
/// +j without IF hybrid, sqrt(M_A) with one.
Complex reference_x(const WorkingPoint& wp);

struct ContourRow {
  double dphi_deg = 0.0;
  double x_lo = 0.0;  // 0 when the region reaches x -> 0
  double x_hi = 0.0;  // +inf when the region is unbounded above
};

struct ContourResult {
  double target_db = 0.0;
  std::optional<double> analog_rejection_db;
  std::vector<ContourRow> rows;  // ascending dphi, only where a solution exists

  /// Closed path: lower branch by ascending dphi, then upper branch by
  /// descending dphi. Open ends (0 or inf) are left out.
  std::vector<std::pair<double, double>> points() const;
};

/// Pairs (x, dphi) reaching the target compensated rejection. For each dphi on
/// a uniform grid over [-90, 90] degrees both roots in x are bracketed around
/// the maximum of the closed form and refined by bisection.
ContourResult systematic_contour(double target_db, std::optional<double> analog_rejection_db,
                                 std::size_t n_points = 721);

/// Allowed x interval at one dphi; nullopt when the target is not reached there.
std::optional<ContourRow> solve_contour_row(double target_db, std::optional<double> analog_rejection_db,
                                            double dphi_deg);

void write_contour_csv(std::ostream& out, const ContourResult& contour);
void write_contour_plot_data(std::ostream& out, const ContourResult& contour);

/// One point of an error-bar curve. analog_rejection_db is absent for the
/// receiver without IF hybrid (written as M_A_db = 0 in the CSV).
struct ErrorBarPoint {
  std::optional<double> analog_rejection_db;
  WorkingPoint wp;
  ErrorBudget budget;
};

struct ErrorBarCurve {
  double target_db = 0.0;
  ErrorSources sources = ErrorSources::CalibrationAndMeasurement;
  double dv_over_v_ref = 1e-3;
  double reference_analog_rejection_db = 20.0;
  std::vector<ErrorBarPoint> points;
};

/// Relative voltage error at equal coupled power, scaled from a reference
/// value given for a hybrid receiver of analog rejection ref_db.
double scaled_dv_over_v(double dv_over_v_ref, double ref_db, std::optional<double> analog_rejection_db);

/// Working point at dphi = 0 that lands exactly on the target: the x > 1 root
/// when it exists, the x < 1 root otherwise.
WorkingPoint working_point_for_target(double target_db, std::optional<double> analog_rejection_db);

/// Error bars for the no-hybrid receiver followed by every reachable entry of
/// the analog rejection grid.
ErrorBarCurve error_bar_curve(double target_db, std::span<const double> analog_rejection_grid_db,
                              double dv_over_v_ref, double reference_analog_rejection_db, ErrorSources sources);

void write_error_bar_csv(std::ostream& out, const ErrorBarCurve& curve);
void write_error_bar_plot_data(std::ostream& out, const ErrorBarCurve& curve);

/// Reference dv/v that makes the no-hybrid bar length at target_db equal
/// desired_length_db.
double fit_dv_over_v(double target_db, double desired_length_db, double reference_analog_rejection_db,
                     ErrorSources sources);

}  // namespace sbr
