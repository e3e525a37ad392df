// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

#include "core/receiver.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

namespace sbr {

namespace {

constexpr Complex kJ{0.0, 1.0};

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, std::string(name) + " must be finite");
}

}  // namespace

const char* to_string(Topology t) { return t == Topology::NoIfHybrid ? "no_if_hybrid" : "with_if_hybrid"; }
const char* to_string(Sideband s) { return s == Sideband::USB ? "USB" : "LSB"; }

void GainMatrix::validate() const {
  for (Complex g : {g1U, g1L, g2U, g2L})
    if (!is_finite(g)) fail(ErrorCode::InvalidArgument, "gain matrix entries must be finite");
  if (g1U == Complex{} && g2U == Complex{}) fail(ErrorCode::InvalidArgument, "USB reaches neither port");
  if (g1L == Complex{} && g2L == Complex{}) fail(ErrorCode::InvalidArgument, "LSB reaches neither port");
}

double ImbalanceProfile::amplitude_db(double if_mhz) const {
  const double ripple =
      ripple_amp_db * std::sin(2.0 * std::numbers::pi * if_mhz / ripple_period_mhz + deg_to_rad(ripple_phase_deg));
  return amp_imbalance_db + amp_slope_db_per_ghz * (if_mhz / 1000.0) + ripple;
}

double ImbalanceProfile::phase_deg(double if_mhz) const {
  return phase_imbalance_deg + phase_slope_deg_per_ghz * (if_mhz / 1000.0);
}

void ImbalanceProfile::validate() const {
  require_finite(amp_imbalance_db, "profile.amp_imbalance_db");
  require_finite(amp_slope_db_per_ghz, "profile.amp_slope_db_per_ghz");
  require_finite(phase_imbalance_deg, "profile.phase_imbalance_deg");
  require_finite(phase_slope_deg_per_ghz, "profile.phase_slope_deg_per_ghz");
  require_finite(ripple_amp_db, "profile.ripple_amp_db");
  require_finite(ripple_phase_deg, "profile.ripple_phase_deg");
  require(ripple_amp_db >= 0.0, "profile.ripple_amp_db must be >= 0");
  require(std::isfinite(ripple_period_mhz) && ripple_period_mhz > 0.0, "profile.ripple_period_mhz must be > 0");
}

void FrequencyPlan::validate() const {
  require(std::isfinite(lo1_ghz) && lo1_ghz > 0.0, "plan.lo1_ghz must be > 0");
  require(std::isfinite(lo2_ghz) && lo2_ghz > 0.0, "plan.lo2_ghz must be > 0");
  require(!if_grid_mhz.empty(), "plan.if_grid_mhz must not be empty");
  for (std::size_t i = 0; i < if_grid_mhz.size(); ++i) {
    require(std::isfinite(if_grid_mhz[i]) && if_grid_mhz[i] > 0.0, "plan.if_grid_mhz entries must be > 0");
    if (i > 0) require(if_grid_mhz[i] > if_grid_mhz[i - 1], "plan.if_grid_mhz must be strictly increasing");
  }
}

NoiseSource::NoiseSource(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ReceiverInstance::ReceiverInstance(Topology topology, FrequencyPlan plan, std::vector<GainMatrix> gains,
                                   double noise_sigma, std::uint64_t rng_seed)
    : topology_(topology), plan_(std::move(plan)), gains_(std::move(gains)), noise_sigma_(noise_sigma),
      rng_seed_(rng_seed) {
  plan_.validate();
  require(gains_.size() == plan_.size(), "one gain matrix per IF channel is required");
  for (const auto& g : gains_) g.validate();
  require(std::isfinite(noise_sigma_) && noise_sigma_ >= 0.0, "noise sigma must be finite and >= 0");
}

const GainMatrix& ReceiverInstance::gains(std::size_t channel) const {
  if (channel >= gains_.size())
    fail(ErrorCode::InvalidArgument, "channel " + std::to_string(channel) + " outside the IF grid");
  return gains_[channel];
}

PortVoltages ReceiverInstance::analog_outputs(std::size_t channel, Complex v_usb, Complex v_lsb) const {
  const GainMatrix& g = gains(channel);
  return {g.g1U * v_usb + g.g1L * v_lsb, g.g2U * v_usb + g.g2L * v_lsb};
}

PortVoltages ReceiverInstance::observe(std::size_t channel, Complex v_usb, Complex v_lsb,
                                       NoiseSource& noise) const {
  PortVoltages out = analog_outputs(channel, v_usb, v_lsb);
  if (noise_sigma_ == 0.0) return out;
  // Draw order is fixed: Re(v1), Im(v1), Re(v2), Im(v2).
  const double n0 = noise.gaussian();
  const double n1 = noise.gaussian();
  const double n2 = noise.gaussian();
  const double n3 = noise.gaussian();
  out.v1 += noise_sigma_ * Complex{n0, n1};
  out.v2 += noise_sigma_ * Complex{n2, n3};
  return out;
}

Ratio ReceiverInstance::analog_rejection(std::size_t channel) const {
  if (topology_ != Topology::WithIfHybrid)
    fail(ErrorCode::NotApplicable, "analog rejection is undefined for a receiver without IF hybrid");
  const GainMatrix& g = gains(channel);
  return Ratio::from_powers(std::norm(g.g1U), std::norm(g.g1L));
}

ReceiverInstance ReceiverInstance::apply_drift(const DriftEvent& drift) const {
  require_finite(drift.dgain_db, "drift.dgain_db");
  require_finite(drift.dphase_deg, "drift.dphase_deg");
  const Complex factor = std::polar(db_to_amplitude(drift.dgain_db), deg_to_rad(drift.dphase_deg));
  std::vector<GainMatrix> drifted = gains_;
  for (auto& g : drifted) {
    if (drift.target != DriftTarget::Port2) {
      g.g1U *= factor;
      g.g1L *= factor;
    }
    if (drift.target != DriftTarget::Port1) {
      g.g2U *= factor;
      g.g2L *= factor;
    }
  }
  return {topology_, plan_, std::move(drifted), noise_sigma_, rng_seed_};
}

ReceiverInstance ReceiverInstance::with_noise(double noise_sigma) const {
  return {topology_, plan_, gains_, noise_sigma, rng_seed_};
}

ReceiverInstance build_receiver(Topology topology, const ImbalanceProfile& profile,
                                double nominal_analog_rejection_db, const FrequencyPlan& plan, double noise_sigma,
                                std::uint64_t rng_seed) {
  profile.validate();
  plan.validate();
  require(std::isfinite(noise_sigma) && noise_sigma >= 0.0, "noise sigma must be finite and >= 0");

  double base_ratio = 1.0;
  if (topology == Topology::WithIfHybrid) {
    require(std::isfinite(nominal_analog_rejection_db) && nominal_analog_rejection_db >= 0.0,
            "nominal analog rejection must be finite and >= 0 dB");
    const double root = std::sqrt(db_to_power(nominal_analog_rejection_db));
    base_ratio = (root - 1.0) / (root + 1.0);
  }

  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  std::vector<GainMatrix> gains;
  gains.reserve(plan.size());
  for (double f : plan.if_grid_mhz) {
    const double ratio = base_ratio * db_to_amplitude(profile.amplitude_db(f));
    const double theta = deg_to_rad(profile.phase_deg(f));
    // I path carries both sidebands in phase; Q path is -j for USB, +j for LSB.
    const Complex i_usb = inv_sqrt2;
    const Complex i_lsb = inv_sqrt2;
    const Complex q_usb = -kJ * std::polar(ratio, theta) * inv_sqrt2;
    const Complex q_lsb = kJ * std::polar(ratio, -theta) * inv_sqrt2;

    GainMatrix g;
    if (topology == Topology::NoIfHybrid) {
      g = {i_usb, i_lsb, q_usb, q_lsb};
    } else {
      // IF hybrid: port 1 = (I + jQ)/sqrt(2), port 2 = (I - jQ)/sqrt(2).
      g.g1U = (i_usb + kJ * q_usb) * inv_sqrt2;
      g.g1L = (i_lsb + kJ * q_lsb) * inv_sqrt2;
      g.g2U = (i_usb - kJ * q_usb) * inv_sqrt2;
      g.g2L = (i_lsb - kJ * q_lsb) * inv_sqrt2;
    }
    gains.push_back(g);
  }
  return {topology, plan, std::move(gains), noise_sigma, rng_seed};
}

}  // namespace sbr
