// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "core/receiver.hpp"

namespace sbr {

/// Digital recombination constants:
///   v1c = c1 * v1 + c2 * v2
///   v2c = c3 * v1 + c4 * v2
struct Constants {
  Complex c1{1.0, 0.0};
  Complex c2{0.0, 0.0};
  Complex c3{0.0, 0.0};
  Complex c4{1.0, 0.0};
};

struct ChannelCalibration {
  Complex X1;  // v1/v2 with a USB-only tone
  Complex X2;  // v2/v1 with an LSB-only tone
  Constants constants;
};

struct CalibrationSet {
  FrequencyPlan plan;
  double tone_amplitude = 1.0;
  int averages = 1;
  std::vector<ChannelCalibration> channels;

  const ChannelCalibration& at(std::size_t channel) const;
};

/// Ratios whose denominator port falls below floor_factor * tone_amplitude
/// are rejected as degenerate.
inline constexpr double kDivisionFloorFactor = 1e-12;

/// Mean over `averages` observations of v1/v2 with V_U = tone, V_L = 0.
Complex measure_x1(const ReceiverInstance& r, std::size_t channel, double tone_amplitude, int averages,
                   NoiseSource& noise, double floor_factor = kDivisionFloorFactor);

/// Mean over `averages` observations of v2/v1 with V_U = 0, V_L = tone.
Complex measure_x2(const ReceiverInstance& r, std::size_t channel, double tone_amplitude, int averages,
                   NoiseSource& noise, double floor_factor = kDivisionFloorFactor);

/// c1 = c4 = 1, c2 = -1/X2, c3 = -1/X1.
Constants derive_constants(Complex x1, Complex x2);

/// Calibrates every channel of the receiver's plan. Channel k draws X1 noise
/// from stream 2k and X2 noise from stream 2k+1 of `seed`, so the result does
/// not depend on evaluation order.
CalibrationSet sweep_calibrate(const ReceiverInstance& r, double tone_amplitude, int averages, std::uint64_t seed);

/// Builds a set from already measured X values (constants derived).
CalibrationSet calibration_from_x(const FrequencyPlan& plan, const std::vector<Complex>& x1,
                                  const std::vector<Complex>& x2, double tone_amplitude = 1.0, int averages = 1);

void write_calibration_csv(std::ostream& out, const CalibrationSet& cal);

/// Reads the CSV layout written above. The IF grid in the file must match
/// `plan` channel for channel.
CalibrationSet read_calibration_csv(std::istream& in, const FrequencyPlan& plan);

}  // namespace sbr
