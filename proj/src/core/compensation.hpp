// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "core/calibration.hpp"

namespace sbr {

PortVoltages compensate(const PortVoltages& v, const Constants& c);
PortVoltages compensate(const PortVoltages& v, const CalibrationSet& cal, std::size_t channel);

struct ToneSrr {
  Ratio raw;
  Ratio compensated;
};

/// Injects a tone in one sideband and reads signal-port over image-port power
/// before and after compensation. USB: signal on port 1, image on port 2; LSB
/// swaps the ports. With averages > 1 the port powers are averaged over that
/// many independent observations before the ratio is taken.
ToneSrr srr_from_tone(const ReceiverInstance& r, const CalibrationSet& cal, std::size_t channel, Sideband sideband,
                      double tone_amplitude, NoiseSource& noise, int averages = 1);

/// Compensated USB rejection in terms of the measured ratios:
///   | X1cal (X2cal X1m - 1) / (X2cal (X1cal - X1m)) |^2
Ratio m_uc_general(Complex x1_cal, Complex x2_cal, Complex x1_m);

/// Drift between calibration and measurement, x = X1m/X1cal and
/// dphi = arg X1m - arg X1cal. analog_rejection (linear) is set for a receiver
/// with IF hybrid and absent otherwise.
struct WorkingPoint {
  double x = 1.0;
  double dphi_deg = 0.0;
  std::optional<double> analog_rejection;

  void validate() const;
};

/// (1 + x^2 + 2x cos dphi) / (1 + x^2 - 2x cos dphi)
Ratio m_uc_no_hybrid(const WorkingPoint& wp);

/// (1 + x^2 M^2 - 2xM cos dphi) / (M + x^2 M - 2xM cos dphi), M = analog rejection.
Ratio m_uc_with_hybrid(const WorkingPoint& wp);

/// Dispatches on the presence of analog_rejection.
Ratio m_uc_closed_form(const WorkingPoint& wp);

struct SrrPoint {
  std::size_t channel = 0;
  double if_mhz = 0.0;
  Sideband sideband = Sideband::USB;
  Ratio raw;
  Ratio compensated;
};

struct SrrSpectrum {
  FrequencyPlan plan;
  std::vector<SrrPoint> points;  // channel-major, USB before LSB
};

/// srr_from_tone for every channel and both sidebands. Channel k, sideband s
/// draws from its own stream of `seed`, disjoint from the calibration streams.
SrrSpectrum srr_sweep(const ReceiverInstance& r, const CalibrationSet& cal, double tone_amplitude,
                      std::uint64_t seed, int averages = 1);

/// Noise stream used by srr_sweep for (channel, sideband).
std::uint64_t measurement_stream(std::size_t channel, Sideband sideband);

void write_srr_csv(std::ostream& out, const SrrSpectrum& spectrum);

}  // namespace sbr
