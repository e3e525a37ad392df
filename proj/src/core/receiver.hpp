// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "core/types.hpp"

namespace sbr {

enum class Topology { NoIfHybrid, WithIfHybrid };
enum class Sideband { USB, LSB };

const char* to_string(Topology t);
const char* to_string(Sideband s);

/// Complex voltage gains of the analog chain for one IF channel:
///   v1 = g1U * V_U + g1L * V_L
///   v2 = g2U * V_U + g2L * V_L
struct GainMatrix {
  Complex g1U{1.0, 0.0};
  Complex g1L{0.0, 0.0};
  Complex g2U{0.0, 0.0};
  Complex g2L{1.0, 0.0};

  /// Throws InvalidArgument when an entry is non-finite or a sideband has no
  /// path to either port.
  void validate() const;

  bool operator==(const GainMatrix&) const = default;
};

/// Frequency-dependent amplitude/phase imbalance between the two IF paths.
/// A linear trend plus a sinusoidal ripple standing in for waveguide standing
/// waves. Frequencies are IF frequencies in MHz.
struct ImbalanceProfile {
  double amp_imbalance_db = 0.0;
  double amp_slope_db_per_ghz = 0.0;
  double phase_imbalance_deg = 0.0;
  double phase_slope_deg_per_ghz = 0.0;
  double ripple_amp_db = 0.0;
  double ripple_period_mhz = 250.0;
  double ripple_phase_deg = 0.0;

  double amplitude_db(double if_mhz) const;
  double phase_deg(double if_mhz) const;

  void validate() const;
};

struct FrequencyPlan {
  double lo1_ghz = 662.0;
  double lo2_ghz = 7.0;
  std::vector<double> if_grid_mhz;
  Sideband sideband = Sideband::USB;

  std::size_t size() const { return if_grid_mhz.size(); }
  void validate() const;
};

enum class DriftTarget { Port1, Port2, Both };

struct DriftEvent {
  double dgain_db = 0.0;
  double dphase_deg = 0.0;
  DriftTarget target = DriftTarget::Both;
};

struct PortVoltages {
  Complex v1;
  Complex v2;
};

/// Seeded Gaussian source. Each caller owns its stream; nothing in the library
/// draws from hidden global state.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed, std::uint64_t stream = 0);

  double gaussian() { return normal_(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Deterministic child seed (splitmix64 of seed and tag) for sub-experiments
/// that need their own family of streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

/// Immutable analog receiver: one GainMatrix per IF channel of the plan.
class ReceiverInstance {
 public:
  ReceiverInstance(Topology topology, FrequencyPlan plan, std::vector<GainMatrix> gains, double noise_sigma,
                   std::uint64_t rng_seed);

  Topology topology() const { return topology_; }
  const FrequencyPlan& plan() const { return plan_; }
  std::size_t channel_count() const { return gains_.size(); }
  const GainMatrix& gains(std::size_t channel) const;
  const std::vector<GainMatrix>& all_gains() const { return gains_; }
  double noise_sigma() const { return noise_sigma_; }
  std::uint64_t rng_seed() const { return rng_seed_; }

  /// Noise-free evaluation of the gain equations.
  PortVoltages analog_outputs(std::size_t channel, Complex v_usb, Complex v_lsb) const;

  /// analog_outputs plus i.i.d. Gaussian noise (std. dev. noise_sigma) on the
  /// real and imaginary part of each port voltage.
  PortVoltages observe(std::size_t channel, Complex v_usb, Complex v_lsb, NoiseSource& noise) const;

  /// |g1U|^2 / |g1L|^2 for the hybrid topology; port 1 nominally carries USB.
  Ratio analog_rejection(std::size_t channel) const;

  ReceiverInstance apply_drift(const DriftEvent& drift) const;

  /// Same receiver with a different observation noise level.
  ReceiverInstance with_noise(double noise_sigma) const;

 private:
  Topology topology_;
  FrequencyPlan plan_;
  std::vector<GainMatrix> gains_;
  double noise_sigma_;
  std::uint64_t rng_seed_;
};

/// Synthesizes per-channel gains from an imbalance description.
///
/// NoIfHybrid: I/Q ports with nominal gains (1, 1, -j, +j)/sqrt(2); the Q path
/// carries amplitude ratio G = 10^(a(f)/20) and a quadrature error theta = p(f)
/// of opposite sign for the two sidebands.
///
/// WithIfHybrid: the same I/Q pair followed by an ideal 90 degree IF hybrid.
/// The Q-path ratio is G0 * 10^(a(f)/20), where G0 = (sqrt(M)-1)/(sqrt(M)+1)
/// makes the unperturbed analog rejection equal to M.
ReceiverInstance build_receiver(Topology topology, const ImbalanceProfile& profile,
                                double nominal_analog_rejection_db, const FrequencyPlan& plan, double noise_sigma,
                                std::uint64_t rng_seed);


}  // namespace sbr
