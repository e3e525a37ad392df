// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

#include "core/compensation.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "core/csv.hpp"

namespace sbr {

PortVoltages compensate(const PortVoltages& v, const Constants& c) {
  return {c.c1 * v.v1 + c.c2 * v.v2, c.c3 * v.v1 + c.c4 * v.v2};
}

PortVoltages compensate(const PortVoltages& v, const CalibrationSet& cal, std::size_t channel) {
  return compensate(v, cal.at(channel).constants);
}

ToneSrr srr_from_tone(const ReceiverInstance& r, const CalibrationSet& cal, std::size_t channel, Sideband sideband,
                      double tone_amplitude, NoiseSource& noise, int averages) {
  require(std::isfinite(tone_amplitude) && tone_amplitude > 0.0, "tone amplitude must be > 0");
  require(averages >= 1, "averages must be >= 1");
  const Complex tone{tone_amplitude, 0.0};
  const Complex usb = sideband == Sideband::USB ? tone : Complex{};
  const Complex lsb = sideband == Sideband::LSB ? tone : Complex{};
  const Constants& constants = cal.at(channel).constants;

  double raw_signal = 0.0, raw_image = 0.0, comp_signal = 0.0, comp_image = 0.0;
  for (int i = 0; i < averages; ++i) {
    const PortVoltages v = r.observe(channel, usb, lsb, noise);
    const PortVoltages vc = compensate(v, constants);
    if (sideband == Sideband::USB) {
      raw_signal += std::norm(v.v1);
      raw_image += std::norm(v.v2);
      comp_signal += std::norm(vc.v1);
      comp_image += std::norm(vc.v2);
    } else {
      raw_signal += std::norm(v.v2);
      raw_image += std::norm(v.v1);
      comp_signal += std::norm(vc.v2);
      comp_image += std::norm(vc.v1);
    }
  }
  return {Ratio::from_powers(raw_signal, raw_image), Ratio::from_powers(comp_signal, comp_image)};
}

Ratio m_uc_general(Complex x1_cal, Complex x2_cal, Complex x1_m) {
  for (Complex z : {x1_cal, x2_cal, x1_m})
    if (!is_finite(z) || z == Complex{}) fail(ErrorCode::InvalidArgument, "X values must be finite and nonzero");
  const Complex num = x1_cal * (x2_cal * x1_m - 1.0);
  const Complex den = x2_cal * (x1_cal - x1_m);
  return Ratio::from_powers(std::norm(num), std::norm(den));
}

void WorkingPoint::validate() const {
  require(std::isfinite(x) && x > 0.0, "working point x must be finite and > 0");
  require(std::isfinite(dphi_deg), "working point dphi must be finite");
  if (analog_rejection)
    require(std::isfinite(*analog_rejection) && *analog_rejection > 0.0, "analog rejection must be finite and > 0");
}

// The closed forms are evaluated as
//   1 + x^2 - 2x cos d = (1 - x)^2 + 4x sin^2(d/2)
//   1 + x^2 + 2x cos d = (1 + x)^2 - 4x sin^2(d/2)
// which are identical algebraically and free of cancellation near x = 1, d = 0.

Ratio m_uc_no_hybrid(const WorkingPoint& wp) {
  wp.validate();
  if (wp.analog_rejection) fail(ErrorCode::NotApplicable, "no-hybrid closed form takes no analog rejection");
  const double x = wp.x;
  const double s = std::sin(deg_to_rad(wp.dphi_deg) / 2.0);
  const double s2 = s * s;
  const double num = (1.0 + x) * (1.0 + x) - 4.0 * x * s2;
  const double den = (1.0 - x) * (1.0 - x) + 4.0 * x * s2;
  return Ratio::from_powers(num, den);
}

Ratio m_uc_with_hybrid(const WorkingPoint& wp) {
  wp.validate();
  if (!wp.analog_rejection) fail(ErrorCode::NotApplicable, "hybrid closed form needs the analog rejection");
  const double m = *wp.analog_rejection;
  if (m == 1.0) return {1.0, false};  // identically 1, including the 0/0 point x = 1, dphi = 0
  const double x = wp.x;
  const double s = std::sin(deg_to_rad(wp.dphi_deg) / 2.0);
  const double s2 = s * s;
  const double xm = x * m;
  // Operation order mirrors the denominator so that m == 1 gives exactly 1.
  const double num = (1.0 - xm) * (1.0 - xm) + 4.0 * x * m * s2;
  const double den = m * ((1.0 - x) * (1.0 - x) + 4.0 * x * s2);
  return Ratio::from_powers(num, den);
}

Ratio m_uc_closed_form(const WorkingPoint& wp) {
  return wp.analog_rejection ? m_uc_with_hybrid(wp) : m_uc_no_hybrid(wp);
}

std::uint64_t measurement_stream(std::size_t channel, Sideband sideband) {
  return (std::uint64_t{1} << 32) + 2 * static_cast<std::uint64_t>(channel) + (sideband == Sideband::LSB ? 1 : 0);
}

SrrSpectrum srr_sweep(const ReceiverInstance& r, const CalibrationSet& cal, double tone_amplitude,
                      std::uint64_t seed, int averages) {
  require(cal.channels.size() == r.channel_count(), "calibration does not cover the receiver's IF grid");
  SrrSpectrum spectrum{r.plan(), {}};
  spectrum.points.reserve(2 * r.channel_count());
  for (std::size_t ch = 0; ch < r.channel_count(); ++ch) {
    for (Sideband sb : {Sideband::USB, Sideband::LSB}) {
      NoiseSource noise(seed, measurement_stream(ch, sb));
      const ToneSrr srr = srr_from_tone(r, cal, ch, sb, tone_amplitude, noise, averages);
      spectrum.points.push_back({ch, r.plan().if_grid_mhz[ch], sb, srr.raw, srr.compensated});
    }
  }
  return spectrum;
}

void write_srr_csv(std::ostream& out, const SrrSpectrum& spectrum) {
  csv::write_row(out, {"channel_index", "if_freq_mhz", "sideband", "raw_srr_db", "comp_srr_db", "above_cap"});
  for (const auto& p : spectrum.points)
    csv::write_row(out, {std::to_string(p.channel), csv::number(p.if_mhz), to_string(p.sideband),
                         csv::number(p.raw.db()), csv::number(p.compensated.db()),
                         p.compensated.above_cap ? "1" : "0"});
}

}  // namespace sbr
