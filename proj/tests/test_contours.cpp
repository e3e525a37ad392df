// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

#include <cmath>
#include <sstream>

#include <doctest.h>

#include "core/csv.hpp"
#include "core/error_analysis.hpp"
#include "test_util.hpp"

using namespace sbr;

namespace {

double eval_db(double x, double dphi, std::optional<double> ma_db) {
  WorkingPoint wp{x, dphi, std::nullopt};
  if (ma_db) wp.analog_rejection = db_to_power(*ma_db);
  return m_uc_closed_form(wp).db();
}

// Roots at dphi = 0 from the quadratics, solved by hand.
std::pair<double, double> roots_at_zero(double target_db, std::optional<double> ma_db) {
  const double t = db_to_power(target_db);
  if (!ma_db) {
    // ((1 + x)/(1 - x))^2 = T
    const double r = std::sqrt(t);
    return {(r - 1.0) / (r + 1.0), (r + 1.0) / (r - 1.0)};
  }
  // ((1 - xM)/(1 - x))^2 = T M, taking the branches 1 - xM = -/+ r (1 - x)
  const double m = db_to_power(*ma_db);
  const double r = std::sqrt(t * m);
  const double lo = (1.0 + r) / (m + r);
  const double hi = r > m ? (r - 1.0) / (r - m) : std::numeric_limits<double>::infinity();
  return {lo, hi};
}

}  // namespace

TEST_CASE("contour rows at zero phase drift match the quadratic roots") {
  for (double target : {25.0, 30.0, 40.0, 50.0}) {
    for (std::optional<double> ma : {std::optional<double>{}, std::optional<double>{3.0}, std::optional<double>{10.0},
                                     std::optional<double>{20.0}, std::optional<double>{30.0}}) {
      const auto row = solve_contour_row(target, ma, 0.0);
      REQUIRE(row.has_value());
      const auto [lo, hi] = roots_at_zero(target, ma);
      CHECK(test::rel(row->x_lo, lo) < 1e-12);
      if (std::isinf(hi))
        CHECK(std::isinf(row->x_hi));
      else
        CHECK(test::rel(row->x_hi, hi) < 1e-12);
    }
  }
}

TEST_CASE("every contour point lands on its target") {
  for (double target : {30.0, 40.0}) {
    for (std::optional<double> ma : {std::optional<double>{}, std::optional<double>{3.0}, std::optional<double>{7.0},
                                     std::optional<double>{15.0}, std::optional<double>{30.0}}) {
      const ContourResult c = systematic_contour(target, ma, 181);
      REQUIRE_FALSE(c.rows.empty());
      for (const auto& row : c.rows) {
        if (row.x_lo > 0.0) CHECK(std::abs(eval_db(row.x_lo, row.dphi_deg, ma) - target) < 1e-6);
        if (std::isfinite(row.x_hi)) CHECK(std::abs(eval_db(row.x_hi, row.dphi_deg, ma) - target) < 1e-6);
        // Inside the interval the target is exceeded.
        const double mid = std::isfinite(row.x_hi) ? std::sqrt(std::max(row.x_lo, 1e-12) * row.x_hi) : 2 * row.x_lo + 1;
        CHECK(eval_db(mid, row.dphi_deg, ma) >= target - 1e-6);
      }
      for (const auto& [dphi, x] : c.points()) CHECK(std::abs(eval_db(x, dphi, ma) - target) < 1e-6);
    }
  }
}

TEST_CASE("allowed intervals widen with analog rejection") {
  for (double target : {30.0, 40.0}) {
    const auto base = solve_contour_row(target, std::nullopt, 0.0);
    REQUIRE(base);
    double prev_lo = 1.0, prev_hi = 1.0;
    for (double ma : {3.0, 7.0, 10.0, 15.0, 20.0, 30.0}) {
      const auto row = solve_contour_row(target, ma, 0.0);
      REQUIRE(row);
      CHECK(row->x_lo < prev_lo);
      CHECK(row->x_hi > prev_hi);
      prev_lo = row->x_lo;
      prev_hi = row->x_hi;
      // Weak analog rejection leaves less room than no hybrid at all.
      const bool contains = row->x_lo < base->x_lo && row->x_hi > base->x_hi;
      CHECK(contains == (ma >= 10.0));
    }
  }
}

TEST_CASE("the no-hybrid contour is symmetric in x and 1/x") {
  const ContourResult c = systematic_contour(35.0, std::nullopt, 91);
  for (const auto& row : c.rows) CHECK(test::rel(row.x_lo * row.x_hi, 1.0) < 1e-9);
}

TEST_CASE("unreachable targets") {
  CHECK_FALSE(solve_contour_row(30.0, 0.0, 0.0).has_value());
  try {
    (void)systematic_contour(30.0, 0.0, 11);
    FAIL("expected Unreachable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Unreachable);
  }
  // At 90 degrees the no-hybrid form is identically 1.
  CHECK_FALSE(solve_contour_row(10.0, std::nullopt, 90.0).has_value());
  const auto flat = solve_contour_row(0.0, std::nullopt, 90.0);
  REQUIRE(flat);
  CHECK(flat->x_lo == 0.0);
  CHECK(std::isinf(flat->x_hi));
}

TEST_CASE("contour CSV and plot layout") {
  const ContourResult c = systematic_contour(30.0, 10.0, 5);
  std::ostringstream out;
  write_contour_csv(out, c);
  std::istringstream in(out.str());
  const csv::Table t = csv::read_table(in);
  CHECK(t.header == std::vector<std::string>{"dphi_deg", "x_lo", "x_hi"});
  CHECK(t.rows.size() == c.rows.size());

  std::ostringstream plot;
  write_contour_plot_data(plot, c);
  std::istringstream lines(plot.str());
  std::size_t data = 0;
  for (std::string line; std::getline(lines, line);)
    if (!line.empty() && line[0] != '#') ++data;
  CHECK(data == c.points().size());
}
