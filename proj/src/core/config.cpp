// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

#include "core/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

namespace sbr {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Config, "cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

toml::table parse_toml(const std::string& text, const std::string& origin) {
  try {
    return toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << origin << ':' << e.source().begin.line << ": " << e.description();
    fail(ErrorCode::Config, msg.str());
  }
}

// Accumulates one diagnostic per problem so a bad file reports everything at once.
class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  void error(const std::string& where, const std::string& what) { errors_.push_back(origin_ + ": " + where + ": " + what); }

  void check_keys(const toml::table& t, const std::string& where, std::initializer_list<std::string_view> known) {
    const std::set<std::string_view> allowed(known);
    for (const auto& [key, node] : t)
      if (!allowed.count(key.str())) error(where, "unknown key '" + std::string(key.str()) + "'");
  }

  const toml::table* section(const toml::table& root, std::string_view name, bool required) {
    const toml::node* node = root.get(name);
    if (!node) {
      if (required) error(std::string(name), "missing section");
      return nullptr;
    }
    if (!node->is_table()) {
      error(std::string(name), "must be a table");
      return nullptr;
    }
    return node->as_table();
  }

  std::optional<double> number(const toml::table& t, std::string_view key, const std::string& where) {
    const toml::node* node = t.get(key);
    if (!node) return std::nullopt;
    if (auto v = node->value<double>(); v && (node->is_floating_point() || node->is_integer())) return *v;
    error(where + "." + std::string(key), "expected a number");
    return std::nullopt;
  }

  double number_or(const toml::table& t, std::string_view key, const std::string& where, double fallback) {
    return number(t, key, where).value_or(fallback);
  }

  std::optional<std::int64_t> integer(const toml::table& t, std::string_view key, const std::string& where) {
    const toml::node* node = t.get(key);
    if (!node) return std::nullopt;
    if (node->is_integer()) return node->value<std::int64_t>();
    error(where + "." + std::string(key), "expected an integer");
    return std::nullopt;
  }

  std::optional<std::string> string(const toml::table& t, std::string_view key, const std::string& where) {
    const toml::node* node = t.get(key);
    if (!node) return std::nullopt;
    if (node->is_string()) return node->value<std::string>();
    error(where + "." + std::string(key), "expected a string");
    return std::nullopt;
  }

  std::optional<std::vector<double>> numbers(const toml::table& t, std::string_view key, const std::string& where) {
    const toml::node* node = t.get(key);
    if (!node) return std::nullopt;
    const toml::array* arr = node->as_array();
    if (!arr) {
      error(where + "." + std::string(key), "expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (const auto& item : *arr) {
      if (!(item.is_floating_point() || item.is_integer())) {
        error(where + "." + std::string(key), "expected an array of numbers");
        return std::nullopt;
      }
      out.push_back(*item.value<double>());
    }
    return out;
  }

  void finish() const {
    if (errors_.empty()) return;
    std::string joined;
    for (const auto& e : errors_) joined += (joined.empty() ? "" : "\n") + e;
    fail(ErrorCode::Config, joined);
  }

  // Runs a domain validator and records its message instead of throwing.
  template <class F>
  void validate(const std::string& where, F&& f) {
    try {
      f();
    } catch (const Error& e) {
      error(where, e.what());
    }
  }

 private:
  std::string origin_;
  std::vector<std::string> errors_;
};

std::optional<DriftTarget> parse_target(const std::string& s) {
  if (s == "port1") return DriftTarget::Port1;
  if (s == "port2") return DriftTarget::Port2;
  if (s == "both") return DriftTarget::Both;
  return std::nullopt;
}

ReceiverConfig read_receiver(Reader& rd, const toml::table& root) {
  ReceiverConfig cfg;
  rd.check_keys(root, "receiver", {"topology", "profile", "plan", "noise"});

  if (const toml::table* t = rd.section(root, "topology", true)) {
    rd.check_keys(*t, "topology", {"kind", "nominal_analog_rejection_db"});
    const auto kind = rd.string(*t, "kind", "topology");
    if (!kind)
      rd.error("topology.kind", "missing (no_if_hybrid | with_if_hybrid)");
    else if (*kind == "no_if_hybrid")
      cfg.topology = Topology::NoIfHybrid;
    else if (*kind == "with_if_hybrid")
      cfg.topology = Topology::WithIfHybrid;
    else
      rd.error("topology.kind", "expected no_if_hybrid or with_if_hybrid, got '" + *kind + "'");
    cfg.nominal_analog_rejection_db =
        rd.number_or(*t, "nominal_analog_rejection_db", "topology", cfg.nominal_analog_rejection_db);
  }

  if (const toml::table* t = rd.section(root, "profile", false)) {
    rd.check_keys(*t, "profile",
                  {"amp_imbalance_db", "amp_slope_db_per_ghz", "phase_imbalance_deg", "phase_slope_deg_per_ghz",
                   "ripple_amp_db", "ripple_period_mhz", "ripple_phase_deg"});
    ImbalanceProfile& p = cfg.profile;
    p.amp_imbalance_db = rd.number_or(*t, "amp_imbalance_db", "profile", p.amp_imbalance_db);
    p.amp_slope_db_per_ghz = rd.number_or(*t, "amp_slope_db_per_ghz", "profile", p.amp_slope_db_per_ghz);
    p.phase_imbalance_deg = rd.number_or(*t, "phase_imbalance_deg", "profile", p.phase_imbalance_deg);
    p.phase_slope_deg_per_ghz = rd.number_or(*t, "phase_slope_deg_per_ghz", "profile", p.phase_slope_deg_per_ghz);
    p.ripple_amp_db = rd.number_or(*t, "ripple_amp_db", "profile", p.ripple_amp_db);
    p.ripple_period_mhz = rd.number_or(*t, "ripple_period_mhz", "profile", p.ripple_period_mhz);
    p.ripple_phase_deg = rd.number_or(*t, "ripple_phase_deg", "profile", p.ripple_phase_deg);
    rd.validate("profile", [&] { p.validate(); });
  }

  if (const toml::table* t = rd.section(root, "plan", true)) {
    rd.check_keys(*t, "plan",
                  {"lo1_ghz", "lo2_ghz", "if_grid_mhz", "if_start_mhz", "if_step_mhz", "channels", "sideband"});
    FrequencyPlan& plan = cfg.plan;
    plan.lo1_ghz = rd.number_or(*t, "lo1_ghz", "plan", plan.lo1_ghz);
    plan.lo2_ghz = rd.number_or(*t, "lo2_ghz", "plan", plan.lo2_ghz);
    if (auto sb = rd.string(*t, "sideband", "plan")) {
      if (*sb == "USB")
        plan.sideband = Sideband::USB;
      else if (*sb == "LSB")
        plan.sideband = Sideband::LSB;
      else
        rd.error("plan.sideband", "expected USB or LSB");
    }
    const auto grid = rd.numbers(*t, "if_grid_mhz", "plan");
    const auto start = rd.number(*t, "if_start_mhz", "plan");
    const auto step = rd.number(*t, "if_step_mhz", "plan");
    const auto count = rd.integer(*t, "channels", "plan");
    if (grid && (start || step || count)) {
      rd.error("plan", "give either if_grid_mhz or if_start_mhz/if_step_mhz/channels, not both");
    } else if (grid) {
      plan.if_grid_mhz = *grid;
    } else if (start && step && count) {
      if (*count < 1) rd.error("plan.channels", "must be >= 1");
      for (std::int64_t i = 0; i < *count; ++i) plan.if_grid_mhz.push_back(*start + *step * static_cast<double>(i));
    } else {
      rd.error("plan", "missing IF grid (if_grid_mhz, or if_start_mhz + if_step_mhz + channels)");
    }
    if (!plan.if_grid_mhz.empty()) rd.validate("plan", [&] { plan.validate(); });
  }

  if (const toml::table* t = rd.section(root, "noise", false)) {
    rd.check_keys(*t, "noise", {"sigma", "rng_seed"});
    cfg.noise_sigma = rd.number_or(*t, "sigma", "noise", cfg.noise_sigma);
    if (!(std::isfinite(cfg.noise_sigma) && cfg.noise_sigma >= 0.0)) rd.error("noise.sigma", "must be >= 0");
    if (auto s = rd.integer(*t, "rng_seed", "noise")) {
      if (*s < 0) rd.error("noise.rng_seed", "must be >= 0");
      cfg.rng_seed = static_cast<std::uint64_t>(*s);
    }
  }
  if (cfg.topology == Topology::WithIfHybrid &&
      !(std::isfinite(cfg.nominal_analog_rejection_db) && cfg.nominal_analog_rejection_db >= 0.0))
    rd.error("topology.nominal_analog_rejection_db", "must be >= 0 dB");
  return cfg;
}

}  // namespace

ReceiverInstance ReceiverConfig::build() const {
  return build_receiver(topology, profile, nominal_analog_rejection_db, plan, noise_sigma, rng_seed);
}

ReceiverConfig receiver_config_from_string(const std::string& text, const std::string& origin) {
  const toml::table root = parse_toml(text, origin);
  Reader rd(origin);
  ReceiverConfig cfg = read_receiver(rd, root);
  rd.finish();
  return cfg;
}

ReceiverConfig load_receiver_config(const std::filesystem::path& path) {
  return receiver_config_from_string(read_file(path), path.string());
}

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Calibrate: return "calibrate";
    case ExperimentKind::SrrSweep: return "sweep";
    case ExperimentKind::Stability: return "stability";
    case ExperimentKind::Defluxing: return "defluxing";
    case ExperimentKind::Contours: return "contours";
    case ExperimentKind::ErrorBars: return "errorbars";
    case ExperimentKind::MonteCarlo: return "montecarlo";
  }
  return "?";
}

std::optional<ExperimentKind> parse_experiment_kind(const std::string& name) {
  for (auto k : {ExperimentKind::Calibrate, ExperimentKind::SrrSweep, ExperimentKind::Stability,
                 ExperimentKind::Defluxing, ExperimentKind::Contours, ExperimentKind::ErrorBars,
                 ExperimentKind::MonteCarlo})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

bool needs_receiver(ExperimentKind kind) {
  return kind == ExperimentKind::Calibrate || kind == ExperimentKind::SrrSweep || kind == ExperimentKind::Stability ||
         kind == ExperimentKind::Defluxing;
}

ScenarioConfig scenario_from_string(const std::string& text, const std::filesystem::path& base_dir,
                                    const ScenarioOverrides& overrides) {
  ScenarioConfig cfg;
  cfg.source_text = text;
  const std::string origin = cfg.source_path.empty() ? "<scenario>" : cfg.source_path.string();
  const toml::table root = parse_toml(text, origin);
  Reader rd(origin);
  rd.check_keys(root, "scenario", {"receiver", "experiment", "drift", "output"});

  // [experiment]
  std::optional<ExperimentKind> kind = overrides.kind;
  if (const toml::table* t = rd.section(root, "experiment", !overrides.kind.has_value())) {
    rd.check_keys(*t, "experiment",
                  {"kind", "seed", "tone_amplitude", "averages", "measure_averages", "repetitions",
                   "calibration_file", "targets_db", "analog_rejection_grid_db", "dphi_points", "dv_over_v",
                   "reference_analog_rejection_db", "samples", "target_db", "x", "dphi_deg",
                   "analog_rejection_db"});
    if (auto k = rd.string(*t, "kind", "experiment")) {
      const auto parsed = parse_experiment_kind(*k);
      if (!parsed)
        rd.error("experiment.kind", "unknown experiment '" + *k + "'");
      else if (kind && *kind != *parsed)
        rd.error("experiment.kind", "config describes '" + *k + "' but '" + to_string(*kind) + "' was requested");
      else
        kind = parsed;
    }
    if (auto s = rd.integer(*t, "seed", "experiment")) {
      if (*s < 0) rd.error("experiment.seed", "must be >= 0");
      cfg.seed = static_cast<std::uint64_t>(*s);
    }
    cfg.tone_amplitude = rd.number_or(*t, "tone_amplitude", "experiment", cfg.tone_amplitude);
    if (!(std::isfinite(cfg.tone_amplitude) && cfg.tone_amplitude > 0.0))
      rd.error("experiment.tone_amplitude", "must be > 0");
    auto positive_int = [&](std::string_view key, int& dst) {
      if (auto v = rd.integer(*t, key, "experiment")) {
        if (*v < 1 || *v > 100'000'000)
          rd.error("experiment." + std::string(key), "must be >= 1");
        else
          dst = static_cast<int>(*v);
      }
    };
    positive_int("averages", cfg.averages);
    positive_int("measure_averages", cfg.measure_averages);
    const bool repetitions_given = t->contains("repetitions");
    positive_int("repetitions", cfg.repetitions);
    if (!repetitions_given) cfg.repetitions = 0;  // resolved after [drift]
    if (auto f = rd.string(*t, "calibration_file", "experiment")) {
      std::filesystem::path p(*f);
      cfg.calibration_file = p.is_absolute() ? p : base_dir / p;
      if (!std::filesystem::exists(*cfg.calibration_file))
        rd.error("experiment.calibration_file", "file not found: " + cfg.calibration_file->string());
    }
    if (auto v = rd.numbers(*t, "targets_db", "experiment")) cfg.targets_db = *v;
    if (auto v = rd.numbers(*t, "analog_rejection_grid_db", "experiment")) cfg.analog_rejection_grid_db = *v;
    if (auto v = rd.integer(*t, "dphi_points", "experiment")) {
      if (*v < 2)
        rd.error("experiment.dphi_points", "must be >= 2");
      else
        cfg.dphi_points = static_cast<std::size_t>(*v);
    }
    cfg.dv_over_v = rd.number_or(*t, "dv_over_v", "experiment", cfg.dv_over_v);
    if (!(std::isfinite(cfg.dv_over_v) && cfg.dv_over_v >= 0.0)) rd.error("experiment.dv_over_v", "must be >= 0");
    cfg.reference_analog_rejection_db =
        rd.number_or(*t, "reference_analog_rejection_db", "experiment", cfg.reference_analog_rejection_db);
    if (!(cfg.reference_analog_rejection_db > 0.0))
      rd.error("experiment.reference_analog_rejection_db", "must be > 0 dB");
    if (auto v = rd.integer(*t, "samples", "experiment")) {
      if (*v < 1000)
        rd.error("experiment.samples", "must be >= 1000");
      else
        cfg.samples = static_cast<std::size_t>(*v);
    }
    cfg.target_db = rd.number(*t, "target_db", "experiment");
    cfg.x = rd.number(*t, "x", "experiment");
    cfg.dphi_deg = rd.number_or(*t, "dphi_deg", "experiment", cfg.dphi_deg);
    cfg.analog_rejection_db = rd.number(*t, "analog_rejection_db", "experiment");
    if (cfg.x && !(*cfg.x > 0.0)) rd.error("experiment.x", "must be > 0");
    if (cfg.analog_rejection_db && !(*cfg.analog_rejection_db >= 0.0))
      rd.error("experiment.analog_rejection_db", "must be >= 0 dB");
    for (double ma : cfg.analog_rejection_grid_db)
      if (!(std::isfinite(ma) && ma >= 0.0)) rd.error("experiment.analog_rejection_grid_db", "entries must be >= 0 dB");
    for (double target : cfg.targets_db)
      if (!std::isfinite(target)) rd.error("experiment.targets_db", "entries must be finite");
  } else {
    cfg.repetitions = 0;
  }
  if (!kind) {
    if (root.contains("experiment")) rd.error("experiment.kind", "missing");
    rd.finish();
    fail(ErrorCode::Config, origin + ": experiment kind not given");
  }
  cfg.kind = *kind;
  if (overrides.seed) cfg.seed = *overrides.seed;

  // [receiver]
  const bool want_receiver = needs_receiver(cfg.kind);
  if (const toml::table* t = rd.section(root, "receiver", want_receiver)) {
    if (auto ref = rd.string(*t, "config", "receiver")) {
      if (t->size() != 1) rd.error("receiver", "use either config = <path> or inline sections, not both");
      std::filesystem::path p(*ref);
      if (!p.is_absolute()) p = base_dir / p;
      try {
        cfg.receiver_text = read_file(p);
        Reader sub(p.string());
        cfg.receiver = read_receiver(sub, parse_toml(cfg.receiver_text, p.string()));
        sub.finish();
      } catch (const Error& e) {
        rd.error("receiver.config", e.what());
      }
    } else {
      cfg.receiver = read_receiver(rd, *t);
    }
  }
  if (cfg.receiver) rd.validate("receiver", [&] { (void)cfg.receiver->build(); });

  // [drift]
  if (const toml::table* t = rd.section(root, "drift", false)) {
    rd.check_keys(*t, "drift", {"gain_step_db", "phase_step_deg", "events"});
    cfg.drift.gain_step_db = rd.number_or(*t, "gain_step_db", "drift", 0.0);
    cfg.drift.phase_step_deg = rd.number_or(*t, "phase_step_deg", "drift", 0.0);
    if (!(cfg.drift.gain_step_db >= 0.0)) rd.error("drift.gain_step_db", "must be >= 0");
    if (!(cfg.drift.phase_step_deg >= 0.0)) rd.error("drift.phase_step_deg", "must be >= 0");
    if (const toml::node* ev = t->get("events")) {
      const toml::array* arr = ev->as_array();
      if (!arr || !arr->is_array_of_tables()) {
        rd.error("drift.events", "expected an array of tables ([[drift.events]])");
      } else {
        for (std::size_t i = 0; i < arr->size(); ++i) {
          const toml::table& e = *arr->get(i)->as_table();
          const std::string where = "drift.events[" + std::to_string(i) + "]";
          rd.check_keys(e, where, {"dgain_db", "dphase_deg", "target"});
          DriftEvent d;
          d.dgain_db = rd.number_or(e, "dgain_db", where, 0.0);
          d.dphase_deg = rd.number_or(e, "dphase_deg", where, 0.0);
          if (auto tg = rd.string(e, "target", where)) {
            if (auto parsed = parse_target(*tg))
              d.target = *parsed;
            else
              rd.error(where + ".target", "expected port1, port2 or both");
          }
          cfg.drift.events.push_back(d);
        }
        if (!cfg.drift.events.empty() && (cfg.drift.gain_step_db > 0.0 || cfg.drift.phase_step_deg > 0.0))
          rd.error("drift", "give either random step bounds or an explicit events list, not both");
      }
    }
  }
  if (cfg.kind == ExperimentKind::Stability || cfg.kind == ExperimentKind::Defluxing) {
    const int from_events = static_cast<int>(cfg.drift.events.size());
    if (cfg.repetitions == 0) cfg.repetitions = from_events > 0 ? from_events : 1;
    if (from_events > 0 && cfg.repetitions != from_events)
      rd.error("experiment.repetitions", "must equal the number of drift events (" + std::to_string(from_events) + ")");
  }
  if (cfg.repetitions == 0) cfg.repetitions = 1;

  if (cfg.kind == ExperimentKind::MonteCarlo) {
    if (cfg.target_db.has_value() == cfg.x.has_value())
      rd.error("experiment", "montecarlo needs exactly one of target_db or x");
  }
  if ((cfg.kind == ExperimentKind::Contours || cfg.kind == ExperimentKind::ErrorBars) && cfg.targets_db.empty())
    rd.error("experiment.targets_db", "must not be empty");

  // [output]
  if (const toml::table* t = rd.section(root, "output", false)) {
    rd.check_keys(*t, "output", {"dir"});
    if (auto d = rd.string(*t, "dir", "output")) {
      std::filesystem::path p(*d);
      cfg.out_dir = p.is_absolute() ? p : base_dir / p;
    }
  } else {
    cfg.out_dir = base_dir / cfg.out_dir;
  }
  if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;

  rd.finish();
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path, const ScenarioOverrides& overrides) {
  const std::string text = read_file(path);
  // Parse errors should name the file.
  try {
    ScenarioConfig cfg = scenario_from_string(text, path.parent_path(), overrides);
    cfg.source_path = path;
    return cfg;
  } catch (const Error& e) {
    std::string msg = e.what();
    const std::string generic = "<scenario>";
    for (std::size_t pos = msg.find(generic); pos != std::string::npos; pos = msg.find(generic, pos))
      msg.replace(pos, generic.size(), path.string());
    throw Error(e.code(), msg);
  }
}

}  // namespace sbr
