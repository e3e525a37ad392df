// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

#include "core/error_analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "core/csv.hpp"

namespace sbr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Arms of [m - dm, m + dm] in dB.
void fill_arms(double m, double dm, double& lo_db, double& hi_db) {
  hi_db = power_db((m + dm) / m);
  lo_db = dm < m ? power_db(m / (m - dm)) : kInf;
}

// Compensated rejection as a function of the calibration and measurement
// ratios, through the general expression with X1cal = X2cal. The reference
// phase is +90 degrees without IF hybrid and 0 with one, where the analog
// rejection is X_cal^2.
double closed_form(bool hybrid, double x_cal, double phi_cal, double x_meas, double phi_meas) {
  const double phase0 = hybrid ? 0.0 : std::numbers::pi / 2.0;
  const Complex z = std::polar(x_cal, phase0 + phi_cal);
  const Ratio r = m_uc_general(z, z, std::polar(x_meas, phase0 + phi_meas));
  if (r.above_cap) fail(ErrorCode::InvalidArgument, "error propagation is undefined at a capped working point");
  return r.linear;
}

double central_difference(const std::array<double, 4>& p, std::size_t i, bool hybrid) {
  const double h = 1e-6 * std::max(1.0, std::abs(p[i]));
  auto up = p, down = p;
  up[i] += h;
  down[i] -= h;
  return (closed_form(hybrid, up[0], up[1], up[2], up[3]) - closed_form(hybrid, down[0], down[1], down[2], down[3])) /
         (2.0 * h);
}

// Linear ratio of the closed form (kCapLinear when capped), used by the
// contour solver.
double closed_form_linear(std::optional<double> ma, double x, double dphi_deg) {
  return m_uc_closed_form({x, dphi_deg, ma}).linear;
}

double bisect(std::optional<double> ma, double dphi_deg, double target, double below, double above) {
  // closed form < target at `below`, >= target at `above`
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (below + above);
    if (mid == below || mid == above) break;
    (closed_form_linear(ma, mid, dphi_deg) >= target ? above : below) = mid;
    if (std::abs(above - below) <= 1e-15 * std::max(1.0, std::abs(above))) break;
  }
  return 0.5 * (below + above);
}

// Location of the maximum over x > 0, or +inf when the closed form increases
// monotonically towards its limit.
double peak_x(std::optional<double> ma, double dphi_deg) {
  if (!ma) return 1.0;
  const double m = *ma;
  const double c = std::cos(deg_to_rad(dphi_deg));
  if (m == 1.0) return 1.0;
  if (c <= 0.0) return kInf;
  // Stationary points solve c m x^2 - (m + 1) x + c = 0; the larger root is the maximum.
  const double disc = (m + 1.0) * (m + 1.0) - 4.0 * c * c * m;
  return ((m + 1.0) + std::sqrt(std::max(disc, 0.0))) / (2.0 * c * m);
}

constexpr double kProbeMin = 1e-15;
constexpr double kProbeMax = 1e15;

}  // namespace

XPhiError delta_x_phi(double dv_over_v, double X) {
  require(std::isfinite(X) && X > 0.0, "X must be finite and > 0");
  require(std::isfinite(dv_over_v) && dv_over_v >= 0.0, "dv/v must be finite and >= 0");
  const double root = std::sqrt(1.0 + X * X);
  return {dv_over_v * X * root, dv_over_v * root};
}

double coupled_voltage(Topology topology, double power, std::optional<double> analog_rejection) {
  require(std::isfinite(power) && power > 0.0, "coupled power must be > 0");
  if (topology == Topology::NoIfHybrid) return std::sqrt(power) / std::numbers::sqrt2;
  if (!analog_rejection) fail(ErrorCode::InvalidArgument, "coupled voltage with IF hybrid needs the analog rejection");
  const double m = *analog_rejection;
  require(m > 0.0, "analog rejection must be > 0");
  if (std::isinf(m)) return std::sqrt(power);
  return std::sqrt(power) * std::sqrt(m / (1.0 + m));
}

const char* to_string(ErrorSources s) {
  return s == ErrorSources::MeasurementOnly ? "meas" : "both";
}

Complex reference_x(const WorkingPoint& wp) {
  if (wp.analog_rejection) return {std::sqrt(*wp.analog_rejection), 0.0};
  return {0.0, 1.0};
}

ErrorBudget propagate_m_uc(const WorkingPoint& wp, double dv_over_v_cal, double dv_over_v_meas) {
  wp.validate();
  const bool hybrid = wp.analog_rejection.has_value();
  const double x_cal = std::abs(reference_x(wp));
  const double x_meas = wp.x * x_cal;
  const std::array<double, 4> p{x_cal, 0.0, x_meas, deg_to_rad(wp.dphi_deg)};

  ErrorBudget b;
  b.dv_over_v_cal = dv_over_v_cal;
  b.dv_over_v_meas = dv_over_v_meas;
  b.cal = delta_x_phi(dv_over_v_cal, x_cal);
  b.meas = delta_x_phi(dv_over_v_meas, x_meas);
  const Ratio nominal = m_uc_closed_form(wp);
  if (nominal.above_cap) fail(ErrorCode::InvalidArgument, "error propagation is undefined at a capped working point");
  b.m_uc = nominal.linear;

  const std::array<double, 4> sigma{b.cal.dX, b.cal.dphi_rad, b.meas.dX, b.meas.dphi_rad};
  double variance = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (sigma[i] == 0.0) continue;
    const double d = central_difference(p, i, hybrid);
    variance += d * d * sigma[i] * sigma[i];
  }
  b.delta_m = std::sqrt(variance);
  fill_arms(b.m_uc, b.delta_m, b.err_lo_db, b.err_hi_db);
  return b;
}

MonteCarloSummary monte_carlo_m_uc(const WorkingPoint& wp, double dv_over_v_cal, double dv_over_v_meas,
                                   std::size_t samples, std::uint64_t seed) {
  wp.validate();
  require(samples >= 1000, "Monte Carlo needs at least 1000 samples");
  require(dv_over_v_cal >= 0.0 && dv_over_v_meas >= 0.0, "dv/v must be >= 0");
  const Complex x_cal = reference_x(wp);
  const Complex x_meas = x_cal * std::polar(wp.x, deg_to_rad(wp.dphi_deg));

  // Signal-port voltage normalized to 1 for every tone.
  const Complex cal_usb_v2 = 1.0 / x_cal;
  const Complex cal_lsb_v1 = 1.0 / x_cal;
  const Complex meas_v2 = 1.0 / x_meas;

  MonteCarloSummary s;
  s.samples = samples;
  const Ratio nominal = m_uc_general(x_cal, x_cal, x_meas);
  s.nominal_db = nominal.db();

  NoiseSource noise(seed);
  auto perturbed = [&noise](Complex v, double sigma) {
    const double re = noise.gaussian();
    const double im = noise.gaussian();
    return v + sigma * Complex{re, im};
  };

  std::vector<double> linear(samples);
  double sum_db = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Complex u1 = perturbed(1.0, dv_over_v_cal);
    const Complex u2 = perturbed(cal_usb_v2, dv_over_v_cal);
    const Complex l1 = perturbed(cal_lsb_v1, dv_over_v_cal);
    const Complex l2 = perturbed(1.0, dv_over_v_cal);
    const Complex m1 = perturbed(1.0, dv_over_v_meas);
    const Complex m2 = perturbed(meas_v2, dv_over_v_meas);
    const Ratio r = m_uc_general(u1 / u2, l2 / l1, m1 / m2);
    if (r.above_cap) ++s.capped;
    linear[i] = r.linear;
    sum_db += r.db();
  }
  s.mean_db = sum_db / static_cast<double>(samples);

  auto quantile = [&linear](double q) {
    const auto k = static_cast<std::size_t>(std::llround(q * static_cast<double>(linear.size() - 1)));
    std::nth_element(linear.begin(), linear.begin() + static_cast<std::ptrdiff_t>(k), linear.end());
    return linear[k];
  };
  const double q16 = quantile(0.158655253931457);
  const double q50 = quantile(0.5);
  const double q84 = quantile(0.841344746068543);
  s.q16_db = Ratio::from_powers(q16, 1.0).db();
  s.median_db = Ratio::from_powers(q50, 1.0).db();
  s.q84_db = Ratio::from_powers(q84, 1.0).db();
  s.linear_half_width = 0.5 * (q84 - q16);
  if (!nominal.above_cap) fill_arms(nominal.linear, s.linear_half_width, s.err_lo_db, s.err_hi_db);
  return s;
}

std::optional<ContourRow> solve_contour_row(double target_db, std::optional<double> analog_rejection_db,
                                            double dphi_deg) {
  std::optional<double> ma;
  if (analog_rejection_db) ma = db_to_power(*analog_rejection_db);
  const double target = db_to_power(target_db);

  const double peak = peak_x(ma, dphi_deg);
  const double peak_value = std::isinf(peak) ? *ma : closed_form_linear(ma, peak, dphi_deg);
  if (peak_value < target) {
    // Tangent contact within round-off: the contour touches this dphi at one x.
    if (!std::isinf(peak) && power_db(target) - power_db(peak_value) <= 1e-9) return ContourRow{dphi_deg, peak, peak};
    return std::nullopt;
  }

  // A point inside the region.
  double inside = peak;
  if (std::isinf(inside)) {
    inside = 1.0;
    while (closed_form_linear(ma, inside, dphi_deg) < target) {
      inside *= 2.0;
      if (inside > kProbeMax) return std::nullopt;
    }
  }

  ContourRow row{dphi_deg, 0.0, kInf};
  double probe = inside;
  while (closed_form_linear(ma, probe, dphi_deg) >= target && probe >= kProbeMin) probe /= 2.0;
  if (probe >= kProbeMin) row.x_lo = bisect(ma, dphi_deg, target, probe, std::min(2.0 * probe, inside));

  if (!std::isinf(peak)) {
    probe = inside;
    while (closed_form_linear(ma, probe, dphi_deg) >= target && probe <= kProbeMax) probe *= 2.0;
    if (probe <= kProbeMax) row.x_hi = bisect(ma, dphi_deg, target, probe, std::max(probe / 2.0, inside));
  }
  return row;
}

ContourResult systematic_contour(double target_db, std::optional<double> analog_rejection_db,
                                 std::size_t n_points) {
  require(std::isfinite(target_db), "target must be finite");
  require(n_points >= 2, "contour needs at least two dphi points");
  if (analog_rejection_db)
    require(std::isfinite(*analog_rejection_db) && *analog_rejection_db >= 0.0,
            "analog rejection must be finite and >= 0 dB");
  if (!solve_contour_row(target_db, analog_rejection_db, 0.0))
    fail(ErrorCode::Unreachable, "target " + csv::number(target_db) + " dB unreachable" +
                                     (analog_rejection_db ? " at M_A = " + csv::number(*analog_rejection_db) + " dB"
                                                          : std::string(" without IF hybrid")));

  ContourResult result{target_db, analog_rejection_db, {}};
  for (std::size_t i = 0; i < n_points; ++i) {
    const double dphi = -90.0 + 180.0 * static_cast<double>(i) / static_cast<double>(n_points - 1);
    if (auto row = solve_contour_row(target_db, analog_rejection_db, dphi)) result.rows.push_back(*row);
  }
  return result;
}

std::vector<std::pair<double, double>> ContourResult::points() const {
  std::vector<std::pair<double, double>> path;
  for (const auto& r : rows)
    if (r.x_lo > 0.0) path.emplace_back(r.dphi_deg, r.x_lo);
  for (auto it = rows.rbegin(); it != rows.rend(); ++it)
    if (std::isfinite(it->x_hi) && it->x_hi != it->x_lo) path.emplace_back(it->dphi_deg, it->x_hi);
  return path;
}

void write_contour_csv(std::ostream& out, const ContourResult& contour) {
  csv::write_row(out, {"dphi_deg", "x_lo", "x_hi"});
  for (const auto& r : contour.rows)
    csv::write_row(out, {csv::number(r.dphi_deg), csv::number(r.x_lo), csv::number(r.x_hi)});
}

void write_contour_plot_data(std::ostream& out, const ContourResult& contour) {
  out << "# target_db " << csv::number(contour.target_db) << " M_A_db "
      << (contour.analog_rejection_db ? csv::number(*contour.analog_rejection_db) : std::string("none")) << '\n';
  out << "# dphi_deg x\n";
  for (const auto& [dphi, x] : contour.points()) out << csv::number(dphi) << ' ' << csv::number(x) << '\n';
}

double scaled_dv_over_v(double dv_over_v_ref, double ref_db, std::optional<double> analog_rejection_db) {
  const double v_ref = coupled_voltage(Topology::WithIfHybrid, 1.0, db_to_power(ref_db));
  const double v = analog_rejection_db
                       ? coupled_voltage(Topology::WithIfHybrid, 1.0, db_to_power(*analog_rejection_db))
                       : coupled_voltage(Topology::NoIfHybrid, 1.0, std::nullopt);
  return dv_over_v_ref * v_ref / v;
}

WorkingPoint working_point_for_target(double target_db, std::optional<double> analog_rejection_db) {
  const auto row = solve_contour_row(target_db, analog_rejection_db, 0.0);
  if (!row) fail(ErrorCode::Unreachable, "target " + csv::number(target_db) + " dB unreachable at dphi = 0");
  WorkingPoint wp;
  wp.x = std::isfinite(row->x_hi) ? row->x_hi : row->x_lo;
  wp.dphi_deg = 0.0;
  if (analog_rejection_db) wp.analog_rejection = db_to_power(*analog_rejection_db);
  return wp;
}

ErrorBarCurve error_bar_curve(double target_db, std::span<const double> analog_rejection_grid_db,
                              double dv_over_v_ref, double reference_analog_rejection_db, ErrorSources sources) {
  ErrorBarCurve curve{target_db, sources, dv_over_v_ref, reference_analog_rejection_db, {}};
  auto add = [&](std::optional<double> ma_db) {
    const WorkingPoint wp = working_point_for_target(target_db, ma_db);
    const double dvv = scaled_dv_over_v(dv_over_v_ref, reference_analog_rejection_db, ma_db);
    curve.points.push_back({ma_db, wp, propagate_m_uc(wp, dvv, sources)});
  };
  add(std::nullopt);
  for (double ma_db : analog_rejection_grid_db) {
    if (!solve_contour_row(target_db, ma_db, 0.0)) continue;  // compensation impossible at this M_A
    add(ma_db);
  }
  return curve;
}

void write_error_bar_csv(std::ostream& out, const ErrorBarCurve& curve) {
  csv::write_row(out, {"M_A_db", "m_uc_db", "err_lo_db", "err_hi_db"});
  for (const auto& p : curve.points)
    csv::write_row(out, {csv::number(p.analog_rejection_db.value_or(0.0)), csv::number(power_db(p.budget.m_uc)),
                         csv::number(p.budget.err_lo_db), csv::number(p.budget.err_hi_db)});
}

void write_error_bar_plot_data(std::ostream& out, const ErrorBarCurve& curve) {
  out << "# target_db " << csv::number(curve.target_db) << " sources " << to_string(curve.sources) << '\n';
  const char* names[] = {"lower", "upper"};
  for (int arm = 0; arm < 2; ++arm) {
    if (arm) out << "\n\n";
    out << "# M_A_db m_uc_db_" << names[arm] << '\n';
    for (const auto& p : curve.points) {
      const double m_db = power_db(p.budget.m_uc);
      const double y = arm == 0 ? m_db - p.budget.err_lo_db : m_db + p.budget.err_hi_db;
      out << csv::number(p.analog_rejection_db.value_or(0.0)) << ' ' << csv::number(y) << '\n';
    }
  }
}

double fit_dv_over_v(double target_db, double desired_length_db, double reference_analog_rejection_db,
                     ErrorSources sources) {
  require(desired_length_db > 0.0, "desired error bar length must be > 0");
  const WorkingPoint wp = working_point_for_target(target_db, std::nullopt);
  auto length = [&](double ref) {
    return propagate_m_uc(wp, scaled_dv_over_v(ref, reference_analog_rejection_db, std::nullopt), sources)
        .length_db();
  };
  double lo = 1e-8, hi = 1e-1;
  if (length(hi) < desired_length_db) fail(ErrorCode::Unreachable, "error bar length not reachable below dv/v = 0.1");
  for (int i = 0; i < 200; ++i) {
    const double mid = std::sqrt(lo * hi);
    (length(mid) < desired_length_db ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

}  // namespace sbr
