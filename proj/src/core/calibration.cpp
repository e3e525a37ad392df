// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

#include "core/calibration.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "core/csv.hpp"

namespace sbr {

namespace {

enum class Injected { Usb, Lsb };

Complex measure_ratio(const ReceiverInstance& r, std::size_t channel, double tone_amplitude, int averages,
                      NoiseSource& noise, double floor_factor, Injected which) {
  require(std::isfinite(tone_amplitude) && tone_amplitude > 0.0, "tone amplitude must be > 0");
  require(averages >= 1, "averages must be >= 1");
  const double floor = floor_factor * tone_amplitude;
  const Complex tone{tone_amplitude, 0.0};

  Complex sum{};
  for (int i = 0; i < averages; ++i) {
    if (which == Injected::Usb) {
      const PortVoltages v = r.observe(channel, tone, Complex{}, noise);
      if (std::abs(v.v2) < floor)
        fail(ErrorCode::DivisionFloor, "|v2| below division floor with a USB-only tone");
      sum += v.v1 / v.v2;
    } else {
      const PortVoltages v = r.observe(channel, Complex{}, tone, noise);
      if (std::abs(v.v1) < floor)
        fail(ErrorCode::DivisionFloor, "|v1| below division floor with an LSB-only tone");
      sum += v.v2 / v.v1;
    }
  }
  return sum / static_cast<double>(averages);
}

}  // namespace

const ChannelCalibration& CalibrationSet::at(std::size_t channel) const {
  if (channel >= channels.size())
    fail(ErrorCode::InvalidArgument, "channel " + std::to_string(channel) + " not covered by calibration");
  return channels[channel];
}

Complex measure_x1(const ReceiverInstance& r, std::size_t channel, double tone_amplitude, int averages,
                   NoiseSource& noise, double floor_factor) {
  return measure_ratio(r, channel, tone_amplitude, averages, noise, floor_factor, Injected::Usb);
}

Complex measure_x2(const ReceiverInstance& r, std::size_t channel, double tone_amplitude, int averages,
                   NoiseSource& noise, double floor_factor) {
  return measure_ratio(r, channel, tone_amplitude, averages, noise, floor_factor, Injected::Lsb);
}

Constants derive_constants(Complex x1, Complex x2) {
  if (!is_finite(x1) || !is_finite(x2)) fail(ErrorCode::InvalidArgument, "X values must be finite");
  if (x1 == Complex{} || x2 == Complex{}) fail(ErrorCode::InvalidArgument, "X values must be nonzero");
  return {Complex{1.0, 0.0}, -1.0 / x2, -1.0 / x1, Complex{1.0, 0.0}};
}

CalibrationSet sweep_calibrate(const ReceiverInstance& r, double tone_amplitude, int averages, std::uint64_t seed) {
  CalibrationSet cal;
  cal.plan = r.plan();
  cal.tone_amplitude = tone_amplitude;
  cal.averages = averages;
  cal.channels.reserve(r.channel_count());
  for (std::size_t ch = 0; ch < r.channel_count(); ++ch) {
    try {
      NoiseSource usb_noise(seed, 2 * ch);
      NoiseSource lsb_noise(seed, 2 * ch + 1);
      const Complex x1 = measure_x1(r, ch, tone_amplitude, averages, usb_noise);
      const Complex x2 = measure_x2(r, ch, tone_amplitude, averages, lsb_noise);
      cal.channels.push_back({x1, x2, derive_constants(x1, x2)});
    } catch (const Error& e) {
      throw Error(e.code(), "channel " + std::to_string(ch) + " (" + csv::number(r.plan().if_grid_mhz[ch]) +
                                " MHz): " + e.what());
    }
  }
  return cal;
}

CalibrationSet calibration_from_x(const FrequencyPlan& plan, const std::vector<Complex>& x1,
                                  const std::vector<Complex>& x2, double tone_amplitude, int averages) {
  plan.validate();
  require(x1.size() == plan.size() && x2.size() == plan.size(), "one X1/X2 pair per channel is required");
  CalibrationSet cal{plan, tone_amplitude, averages, {}};
  for (std::size_t ch = 0; ch < plan.size(); ++ch) cal.channels.push_back({x1[ch], x2[ch], derive_constants(x1[ch], x2[ch])});
  return cal;
}

void write_calibration_csv(std::ostream& out, const CalibrationSet& cal) {
  using csv::number;
  csv::write_row(out, {"channel_index", "if_freq_mhz", "X1_re", "X1_im", "X2_re", "X2_im", "c2_re", "c2_im",
                       "c3_re", "c3_im"});
  for (std::size_t ch = 0; ch < cal.channels.size(); ++ch) {
    const auto& c = cal.channels[ch];
    csv::write_row(out, {std::to_string(ch), number(cal.plan.if_grid_mhz[ch]), number(c.X1.real()),
                         number(c.X1.imag()), number(c.X2.real()), number(c.X2.imag()),
                         number(c.constants.c2.real()), number(c.constants.c2.imag()),
                         number(c.constants.c3.real()), number(c.constants.c3.imag())});
  }
}

CalibrationSet read_calibration_csv(std::istream& in, const FrequencyPlan& plan) {
  const csv::Table table = csv::read_table(in);
  const std::size_t idx = table.column("channel_index");
  const std::size_t freq = table.column("if_freq_mhz");
  const std::size_t x1r = table.column("X1_re"), x1i = table.column("X1_im");
  const std::size_t x2r = table.column("X2_re"), x2i = table.column("X2_im");
  if (table.rows.size() != plan.size())
    fail(ErrorCode::Io, "calibration file has " + std::to_string(table.rows.size()) + " channels, plan has " +
                            std::to_string(plan.size()));
  std::vector<Complex> x1, x2;
  for (std::size_t row = 0; row < table.rows.size(); ++row) {
    const auto& f = table.rows[row];
    if (csv::parse_int(f[idx]) != static_cast<long long>(row))
      fail(ErrorCode::Io, "calibration rows must be ordered by channel_index");
    const double mhz = csv::parse_double(f[freq]);
    if (std::abs(mhz - plan.if_grid_mhz[row]) > 1e-6 * std::max(1.0, std::abs(mhz)))
      fail(ErrorCode::Io, "calibration channel " + std::to_string(row) + " is at " + f[freq] +
                              " MHz, plan expects " + csv::number(plan.if_grid_mhz[row]));
    x1.emplace_back(csv::parse_double(f[x1r]), csv::parse_double(f[x1i]));
    x2.emplace_back(csv::parse_double(f[x2r]), csv::parse_double(f[x2i]));
  }
  return calibration_from_x(plan, x1, x2);
}

}  // namespace sbr
