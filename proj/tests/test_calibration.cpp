// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

#include <cmath>
#include <sstream>

#include <doctest.h>

#include "core/calibration.hpp"
#include "test_util.hpp"

using namespace sbr;

namespace {

FrequencyPlan plan_of(std::vector<double> f) {
  FrequencyPlan p;
  p.if_grid_mhz = std::move(f);
  return p;
}

ReceiverInstance imbalanced(Topology t, double sigma) {
  ImbalanceProfile p;
  p.amp_imbalance_db = 0.8;
  p.phase_imbalance_deg = 6.0;
  p.phase_slope_deg_per_ghz = 0.5;
  p.ripple_amp_db = 0.4;
  return build_receiver(t, p, 18.0, plan_of({4000.0, 4500.0, 5000.0, 5500.0}), sigma, 1);
}

}  // namespace

TEST_CASE("noiseless calibration recovers the gain ratios") {
  for (Topology t : {Topology::NoIfHybrid, Topology::WithIfHybrid}) {
    const ReceiverInstance r = imbalanced(t, 0.0);
    const CalibrationSet cal = sweep_calibrate(r, 0.3, 1, 7);
    REQUIRE(cal.channels.size() == r.channel_count());
    for (std::size_t ch = 0; ch < r.channel_count(); ++ch) {
      const GainMatrix& g = r.gains(ch);
      const ChannelCalibration& c = cal.at(ch);
      CHECK(test::close(c.X1, g.g1U / g.g2U, 1e-14));
      CHECK(test::close(c.X2, g.g2L / g.g1L, 1e-14));
      CHECK(c.constants.c1 == Complex{1.0, 0.0});
      CHECK(c.constants.c4 == Complex{1.0, 0.0});
      CHECK(test::close(c.constants.c2 * c.X2, Complex{-1.0, 0.0}, 1e-14));
      CHECK(test::close(c.constants.c3 * c.X1, Complex{-1.0, 0.0}, 1e-14));
    }
  }
}

TEST_CASE("ideal no-hybrid receiver calibrates to X1 = X2 = j") {
  const ReceiverInstance r = build_receiver(Topology::NoIfHybrid, {}, 0.0, plan_of({4000.0}), 0.0, 1);
  const CalibrationSet cal = sweep_calibrate(r, 1.0, 1, 1);
  CHECK(test::close(cal.at(0).X1, Complex{0.0, 1.0}, 1e-15));
  CHECK(test::close(cal.at(0).X2, Complex{0.0, 1.0}, 1e-15));
}

TEST_CASE("degenerate denominator port raises a division floor error") {
  GainMatrix g{{1.0, 0.0}, {0.5, 0.0}, {0.0, 0.0}, {1.0, 0.0}};  // USB never reaches port 2
  const GainMatrix fine{{1.0, 0.0}, {0.5, 0.0}, {0.5, 0.0}, {1.0, 0.0}};
  const ReceiverInstance r(Topology::NoIfHybrid, plan_of({4000.0, 4100.0}), {fine, g}, 0.0, 1);
  NoiseSource noise(1);
  try {
    (void)measure_x1(r, 1, 1.0, 1, noise);
    FAIL("expected a division floor error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DivisionFloor);
  }
  try {
    (void)sweep_calibrate(r, 1.0, 1, 1);
    FAIL("expected a division floor error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DivisionFloor);
    CHECK(std::string(e.what()).find("channel 1") != std::string::npos);
  }
}

TEST_CASE("averaging shrinks the calibration scatter as 1/sqrt(N)") {
  const ReceiverInstance r = imbalanced(Topology::WithIfHybrid, 2e-3);
  const Complex truth = r.gains(0).g1U / r.gains(0).g2U;
  auto spread = [&](int averages) {
    double sum_sq = 0.0;
    const int trials = 400;
    for (int t = 0; t < trials; ++t) {
      NoiseSource noise(100 + static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(averages));
      sum_sq += std::norm(measure_x1(r, 0, 1.0, averages, noise) - truth);
    }
    return std::sqrt(sum_sq / trials);
  };
  const double s1 = spread(1);
  const double s16 = spread(16);
  CHECK(s1 / s16 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("calibration sweep is deterministic and seed dependent") {
  const ReceiverInstance r = imbalanced(Topology::NoIfHybrid, 1e-3);
  const CalibrationSet a = sweep_calibrate(r, 1.0, 4, 99);
  const CalibrationSet b = sweep_calibrate(r, 1.0, 4, 99);
  const CalibrationSet c = sweep_calibrate(r, 1.0, 4, 100);
  for (std::size_t ch = 0; ch < r.channel_count(); ++ch) {
    CHECK(a.at(ch).X1 == b.at(ch).X1);
    CHECK(a.at(ch).X2 == b.at(ch).X2);
    CHECK(a.at(ch).X1 != c.at(ch).X1);
  }
}

TEST_CASE("calibration CSV round-trips exactly") {
  const ReceiverInstance r = imbalanced(Topology::WithIfHybrid, 1e-3);
  const CalibrationSet cal = sweep_calibrate(r, 1.0, 8, 5);
  std::stringstream buf;
  write_calibration_csv(buf, cal);
  const CalibrationSet back = read_calibration_csv(buf, r.plan());
  for (std::size_t ch = 0; ch < r.channel_count(); ++ch) {
    CHECK(back.at(ch).X1 == cal.at(ch).X1);
    CHECK(back.at(ch).X2 == cal.at(ch).X2);
    CHECK(back.at(ch).constants.c2 == cal.at(ch).constants.c2);
    CHECK(back.at(ch).constants.c3 == cal.at(ch).constants.c3);
  }

  std::stringstream again;
  write_calibration_csv(again, cal);
  CHECK_THROWS_AS(read_calibration_csv(again, plan_of({4000.0, 4500.0, 5000.0, 5600.0})), Error);
  std::stringstream short_file;
  write_calibration_csv(short_file, cal);
  CHECK_THROWS_AS(read_calibration_csv(short_file, plan_of({4000.0})), Error);
}

TEST_CASE("constants reject zero or non-finite ratios") {
  CHECK_THROWS_AS(derive_constants({0.0, 0.0}, {1.0, 0.0}), Error);
  CHECK_THROWS_AS(derive_constants({1.0, 0.0}, {std::nan(""), 0.0}), Error);
  CHECK_THROWS_AS(calibration_from_x(plan_of({1.0}), {}, {}), Error);
  const ReceiverInstance r = imbalanced(Topology::NoIfHybrid, 0.0);
  CHECK_THROWS_AS(sweep_calibrate(r, 0.0, 1, 1), Error);
  CHECK_THROWS_AS(sweep_calibrate(r, 1.0, 0, 1), Error);
}
