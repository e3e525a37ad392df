/* SPDX-License-Identifier: Apache-2.0 */
/* Copyright 2026 The sbrcal Authors */

/* Exercises the shared library through its C header only. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "sbrcal/sbrcal.h"

static int failures = 0;

#define EXPECT(cond)                                                 \
  do {                                                               \
    if (!(cond)) {                                                   \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                    \
    }                                                                \
  } while (0)

#define EXPECT_OK(call)                                                                   \
  do {                                                                                    \
    sbr_status st_ = (call);                                                              \
    if (st_ != SBR_OK) {                                                                  \
      fprintf(stderr, "%s:%d: %s -> %d (%s)\n", __FILE__, __LINE__, #call, (int)st_, sbr_last_error()); \
      ++failures;                                                                         \
    }                                                                                     \
  } while (0)

static const char* kReceiver =
    "[topology]\n"
    "kind = \"with_if_hybrid\"\n"
    "nominal_analog_rejection_db = 20.0\n"
    "[profile]\n"
    "phase_imbalance_deg = 2.0\n"
    "ripple_amp_db = 0.5\n"
    "[plan]\n"
    "if_grid_mhz = [4000.0, 5000.0, 6000.0]\n";

static void test_receiver_and_calibration(void) {
  sbr_receiver* r = NULL;
  EXPECT_OK(sbr_receiver_from_toml(kReceiver, &r));
  if (!r) return;

  size_t n = 0;
  EXPECT_OK(sbr_receiver_channels(r, &n));
  EXPECT(n == 3);

  sbr_ratio ma;
  EXPECT_OK(sbr_receiver_analog_rejection(r, 0, &ma));
  EXPECT(ma.db > 15.0 && ma.db < 25.0);
  EXPECT(!ma.above_cap);

  sbr_gain_matrix g;
  EXPECT_OK(sbr_receiver_gains(r, 1, &g));
  sbr_complex usb = {1.0, 0.0}, lsb = {0.0, 0.0}, v1, v2;
  EXPECT_OK(sbr_receiver_analog_outputs(r, 1, usb, lsb, &v1, &v2));
  EXPECT(fabs(v1.re - g.g1u.re) < 1e-15 && fabs(v2.im - g.g2u.im) < 1e-15);

  EXPECT(sbr_receiver_gains(r, 7, &g) == SBR_INVALID_ARGUMENT);
  EXPECT(strstr(sbr_last_error(), "channel") != NULL);

  sbr_calibration* cal = NULL;
  EXPECT_OK(sbr_calibrate(r, 1.0, 1, 42, &cal));
  sbr_complex x1, x2, c2, c3;
  EXPECT_OK(sbr_calibration_channel(cal, 1, &x1, &x2, &c2, &c3));
  {
    /* X1 = g1U / g2U */
    double den = g.g2u.re * g.g2u.re + g.g2u.im * g.g2u.im;
    double re = (g.g1u.re * g.g2u.re + g.g1u.im * g.g2u.im) / den;
    double im = (g.g1u.im * g.g2u.re - g.g1u.re * g.g2u.im) / den;
    EXPECT(fabs(x1.re - re) < 1e-12 && fabs(x1.im - im) < 1e-12);
  }

  sbr_complex v1c, v2c;
  EXPECT_OK(sbr_compensate(cal, 1, v1, v2, &v1c, &v2c));
  EXPECT(hypot(v2c.re, v2c.im) < 1e-12);

  sbr_ratio raw, comp;
  EXPECT_OK(sbr_srr_from_tone(r, cal, 0, SBR_USB, 1.0, 1, 1, &raw, &comp));
  EXPECT(comp.db > 150.0);
  EXPECT(raw.db < 25.0);

  /* Drifted copy, original untouched. */
  sbr_receiver* drifted = NULL;
  EXPECT_OK(sbr_receiver_apply_drift(r, 0.1, 0.5, SBR_PORT2, &drifted));
  EXPECT_OK(sbr_srr_from_tone(drifted, cal, 0, SBR_USB, 1.0, 1, 1, &raw, &comp));
  EXPECT(comp.db > 30.0 && comp.db < 80.0);
  EXPECT(sbr_receiver_apply_drift(r, 0.1, 0.5, (sbr_drift_target)9, &drifted) == SBR_INVALID_ARGUMENT);

  const char* path = "capi_test_calibration.csv";
  EXPECT_OK(sbr_calibration_write_csv(cal, path));
  sbr_calibration* back = NULL;
  EXPECT_OK(sbr_calibration_read_csv(r, path, &back));
  sbr_complex bx1;
  EXPECT_OK(sbr_calibration_channel(back, 1, &bx1, NULL, NULL, NULL));
  EXPECT(bx1.re == x1.re && bx1.im == x1.im);
  remove(path);

  sbr_calibration_free(back);
  sbr_calibration_free(cal);
  sbr_receiver_free(drifted);
  sbr_receiver_free(r);
}

static void test_created_receiver(void) {
  const double grid[2] = {4000.0, 4500.0};
  sbr_imbalance_profile p;
  memset(&p, 0, sizeof p);
  p.ripple_period_mhz = 250.0;
  sbr_receiver* r = NULL;
  EXPECT_OK(sbr_receiver_create(SBR_NO_IF_HYBRID, &p, 0.0, grid, 2, 0.0, 1, &r));
  sbr_ratio ma;
  EXPECT(sbr_receiver_analog_rejection(r, 0, &ma) == SBR_NOT_APPLICABLE);
  sbr_receiver_free(r);

  sbr_receiver* bad = NULL;
  const double backwards[2] = {5.0, 4.0};
  EXPECT(sbr_receiver_create(SBR_NO_IF_HYBRID, NULL, 0.0, backwards, 2, 0.0, 1, &bad) == SBR_INVALID_ARGUMENT);
  EXPECT(bad == NULL);
  EXPECT(sbr_receiver_from_toml("[topology\n", &bad) == SBR_CONFIG);
  EXPECT(sbr_receiver_channels(NULL, NULL) == SBR_INVALID_ARGUMENT);

  sbr_gain_matrix g = {{1, 0}, {0.1, 0}, {0.05, 0}, {1, 0}};
  EXPECT_OK(sbr_receiver_from_gains(SBR_WITH_IF_HYBRID, &g, grid, 1, 0.0, 1, &r));
  EXPECT_OK(sbr_receiver_analog_rejection(r, 0, &ma));
  EXPECT(fabs(ma.db - 20.0) < 1e-12);
  sbr_receiver_free(r);
}

static void test_analysis(void) {
  sbr_working_point wp = {1.05, 0.0, -1.0};
  sbr_ratio m;
  EXPECT_OK(sbr_m_uc_closed_form(wp, &m));
  {
    double expected = pow((1 + 1.05) / (1 - 1.05), 2);
    EXPECT(fabs(m.linear - expected) < 1e-9 * expected);
  }
  sbr_complex j = {0.0, 1.0}, jm = {0.0, 1.05};
  sbr_ratio g;
  EXPECT_OK(sbr_m_uc_general(j, j, jm, &g));
  EXPECT(fabs(g.linear - m.linear) < 1e-12 * m.linear);

  wp.analog_rejection_db = 0.0;
  EXPECT_OK(sbr_m_uc_closed_form(wp, &m));
  EXPECT(m.linear == 1.0);

  double dx, dphi;
  EXPECT_OK(sbr_delta_x_phi(1e-3, 1.0, &dx, &dphi));
  EXPECT(fabs(dx - 1e-3 * sqrt(2.0)) < 1e-15);

  double v;
  EXPECT_OK(sbr_coupled_voltage(SBR_NO_IF_HYBRID, 2.0, -1.0, &v));
  EXPECT(fabs(v - 1.0) < 1e-15);

  double lo, hi;
  EXPECT_OK(sbr_contour_row(45.0, -1.0, 0.0, &lo, &hi));
  {
    sbr_working_point at = {hi, 0.0, -1.0};
    sbr_error_budget b;
    EXPECT_OK(sbr_propagate(at, 1.4072e-3, 1.4072e-3, &b));
    EXPECT(fabs(b.m_uc_db - 45.0) < 1e-9);
    EXPECT(b.err_lo_db + b.err_hi_db > 4.0 && b.err_lo_db + b.err_hi_db < 6.0);
  }
  EXPECT(sbr_contour_row(30.0, 0.0, 0.0, &lo, &hi) == SBR_UNREACHABLE);
  EXPECT(strlen(sbr_version()) > 0);
}

static void test_run_experiment(void) {
  int code = -1;
  EXPECT_OK(sbr_run_experiment("does-not-exist.toml", NULL, 0, 0, NULL, &code));
  EXPECT(code == 2);
  EXPECT(strlen(sbr_last_error()) > 0);
  EXPECT(sbr_run_experiment("x.toml", "warp", 0, 0, NULL, &code) == SBR_INVALID_ARGUMENT);
}

int main(void) {
  test_receiver_and_calibration();
  test_created_receiver();
  test_analysis();
  test_run_experiment();
  if (failures) {
    fprintf(stderr, "%d failure(s)\n", failures);
    return 1;
  }
  printf("capi: all checks passed\n");
  return 0;
}
