// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sbr {

using Complex = std::complex<double>;

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Linear power ratio -> dB. Caller guarantees a positive argument.
inline double power_db(double linear) { return 10.0 * std::log10(linear); }
inline double db_to_power(double db) { return std::pow(10.0, db / 10.0); }
inline double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }

enum class ErrorCode {
  InvalidArgument,
  DivisionFloor,   // degenerate ratio during calibration
  NotApplicable,   // operation undefined for the given topology
  Unreachable,     // requested target has no solution
  Config,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::InvalidArgument, what);
}

// Power ratios are kept numeric for CSV output: anything at or above the cap
// (including an exact division by zero) is reported as the cap value with the
// flag set.
inline constexpr double kCapDb = 200.0;
inline constexpr double kCapLinear = 1e20;

struct Ratio {
  double linear = 1.0;
  bool above_cap = false;

  double db() const { return above_cap ? kCapDb : std::max(power_db(linear), -kCapDb); }

  static Ratio capped() { return {kCapLinear, true}; }

  /// |num|^2 / |den|^2 with the cap applied.
  static Ratio from_powers(double num_power, double den_power) {
    if (!(den_power > 0.0) || num_power >= kCapLinear * den_power) return capped();
    return {num_power / den_power, false};
  }
};

}  // namespace sbr
