// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

#include <algorithm>
#include <string>

#include <doctest.h>

#include "core/config.hpp"
#include "test_util.hpp"

using namespace sbr;

namespace {

const char* kReceiver = R"(
[topology]
kind = "with_if_hybrid"
nominal_analog_rejection_db = 15.0

[profile]
amp_imbalance_db = 0.2
ripple_amp_db = 0.5

[plan]
if_start_mhz = 4000.0
if_step_mhz = 250
channels = 4
sideband = "LSB"

[noise]
sigma = 1e-3
rng_seed = 12
)";

std::string config_error(const std::string& text) {
  try {
    (void)scenario_from_string(text, ".");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("receiver config parses all sections") {
  const ReceiverConfig cfg = receiver_config_from_string(kReceiver);
  CHECK(cfg.topology == Topology::WithIfHybrid);
  CHECK(cfg.nominal_analog_rejection_db == 15.0);
  CHECK(cfg.profile.amp_imbalance_db == 0.2);
  CHECK(cfg.profile.ripple_amp_db == 0.5);
  CHECK(cfg.plan.if_grid_mhz == std::vector<double>{4000.0, 4250.0, 4500.0, 4750.0});
  CHECK(cfg.plan.sideband == Sideband::LSB);
  CHECK(cfg.noise_sigma == 1e-3);
  CHECK(cfg.rng_seed == 12);
  const ReceiverInstance r = cfg.build();
  CHECK(r.channel_count() == 4);
}

TEST_CASE("receiver config errors are collected") {
  const std::string text = R"(
[topology]
kind = "triple"
[plan]
if_grid_mhz = [5.0, 4.0]
bogus = 1
[noise]
sigma = -1
)";
  try {
    (void)receiver_config_from_string(text, "r.toml");
    FAIL("expected failure");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(e.code() == ErrorCode::Config);
    CHECK(contains(msg, "topology.kind"));
    CHECK(contains(msg, "unknown key 'bogus'"));
    CHECK(contains(msg, "strictly increasing"));
    CHECK(contains(msg, "noise.sigma"));
    CHECK(std::count(msg.begin(), msg.end(), '\n') >= 3);
  }
  CHECK_THROWS_AS(receiver_config_from_string("[topology\n"), Error);
  CHECK_THROWS_AS(receiver_config_from_string("[topology]\nkind = \"no_if_hybrid\"\n"), Error);  // no plan
}

TEST_CASE("scenario with inline receiver and drift events") {
  const std::string text = std::string(R"(
[experiment]
kind = "stability"
seed = 42
measure_averages = 8

[drift]
[[drift.events]]
dgain_db = 0.1
target = "port1"
[[drift.events]]
dphase_deg = -0.5
target = "both"

[output]
dir = "results"

[receiver]
)") + R"(
[receiver.topology]
kind = "no_if_hybrid"
[receiver.plan]
if_grid_mhz = [4000.0]
)";
  const ScenarioConfig cfg = scenario_from_string(text, "/tmp/base");
  CHECK(cfg.kind == ExperimentKind::Stability);
  CHECK(cfg.seed == 42);
  CHECK(cfg.measure_averages == 8);
  CHECK(cfg.repetitions == 2);
  REQUIRE(cfg.drift.events.size() == 2);
  CHECK(cfg.drift.events[0].target == DriftTarget::Port1);
  CHECK(cfg.drift.events[1].dphase_deg == -0.5);
  CHECK(cfg.out_dir == std::filesystem::path("/tmp/base/results"));
  REQUIRE(cfg.receiver);
  CHECK(cfg.receiver->topology == Topology::NoIfHybrid);
}

TEST_CASE("overrides take precedence") {
  ScenarioOverrides ov;
  ov.seed = 7;
  ov.out_dir = "/tmp/elsewhere";
  ov.kind = ExperimentKind::Contours;
  const ScenarioConfig cfg = scenario_from_string("[experiment]\nseed = 1\n", ".", ov);
  CHECK(cfg.seed == 7);
  CHECK(cfg.out_dir == std::filesystem::path("/tmp/elsewhere"));
  CHECK(cfg.kind == ExperimentKind::Contours);

  ov.kind = ExperimentKind::ErrorBars;
  CHECK_THROWS_AS(scenario_from_string("[experiment]\nkind = \"contours\"\n", ".", ov), Error);
}

TEST_CASE("scenario validation failures") {
  CHECK(contains(config_error("[experiment]\nkind = \"sweep\"\n"), "receiver"));
  CHECK(contains(config_error("[experiment]\nkind = \"warp\"\n"), "unknown experiment"));
  CHECK(contains(config_error("[experiment]\nkind = \"contours\"\ncolor = 3\n"), "unknown key 'color'"));
  CHECK(contains(config_error("[experiment]\nkind = \"contours\"\nrepetitions = 0\n"), "repetitions"));
  CHECK(contains(config_error("[experiment]\nkind = \"montecarlo\"\n"), "exactly one of target_db or x"));
  CHECK(contains(config_error("[experiment]\nkind = \"montecarlo\"\nx = 1.1\nsamples = 10\n"), "samples"));
  CHECK(contains(config_error("[experiment]\nkind = \"contours\"\ntargets_db = []\n"), "targets_db"));
  CHECK(contains(config_error("[experiment]\nkind = \"contours\"\nseed = -4\n"), "seed"));
  CHECK(contains(config_error("[experiment]\nkind = \"contours\"\n[receiver]\nconfig = \"missing.toml\"\n"),
                 "missing.toml"));
  CHECK(contains(config_error("[experiment]\nkind = \"sweep\"\ncalibration_file = \"nope.csv\"\n[receiver]\n"
                              "config = \"x.toml\"\n"),
                 "nope.csv"));
  CHECK(contains(config_error("[experiment]\nkind = \"contours\"\n[drift]\ngain_step_db = -1\n"), "gain_step_db"));
  CHECK(contains(config_error("[experiment]\nkind = \"contours\"\n[weather]\n"), "unknown key 'weather'"));
  CHECK(contains(config_error("not toml at all ["), "<scenario>"));
  CHECK_THROWS_AS(load_scenario("/definitely/not/here.toml"), Error);
}

TEST_CASE("repetitions must match an explicit event list") {
  const std::string base = R"(
[receiver.topology]
kind = "no_if_hybrid"
[receiver.plan]
if_grid_mhz = [4000.0]
[[drift.events]]
dgain_db = 0.1
)";
  CHECK(contains(config_error("[experiment]\nkind = \"defluxing\"\nrepetitions = 3\n" + base), "drift events"));
  CHECK(contains(config_error("[experiment]\nkind = \"defluxing\"\n[drift]\ngain_step_db = 0.1\n"
                              "[[drift.events]]\ndgain_db = 0.1\n[receiver.topology]\nkind = \"no_if_hybrid\"\n"
                              "[receiver.plan]\nif_grid_mhz = [4000.0]\n"),
                 "not both"));
}

TEST_CASE("experiment kind names round-trip") {
  for (auto k : {ExperimentKind::Calibrate, ExperimentKind::SrrSweep, ExperimentKind::Stability,
                 ExperimentKind::Defluxing, ExperimentKind::Contours, ExperimentKind::ErrorBars,
                 ExperimentKind::MonteCarlo})
    CHECK(parse_experiment_kind(to_string(k)) == k);
  CHECK_FALSE(parse_experiment_kind("Sweep").has_value());
}

TEST_CASE("shipped example configs are valid") {
  const std::filesystem::path dir = SBRCAL_EXAMPLES_DIR;
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".toml") continue;
    const std::string name = entry.path().stem().string();
    if (name.rfind("receiver_", 0) == 0) {
      CHECK_NOTHROW(load_receiver_config(entry.path()).build());
    } else {
      CHECK_NOTHROW(load_scenario(entry.path()));
    }
    ++seen;
  }
  CHECK(seen >= 9);
}
