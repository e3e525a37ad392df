// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

// Command-line front end. Links only the C interface.

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sbrcal/sbrcal.h"

namespace {

void print_diagnostics(const char* text) {
  std::istringstream in(text ? text : "");
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) std::cerr << "sbrcal: " << line << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sideband-separating receiver calibration experiments"};
  app.set_version_flag("--version", sbr_version());
  app.require_subcommand(1);

  struct Run {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
  } run;

  const char* experiments[][2] = {
      {"calibrate", "Calibrate every IF channel and write the constants"},
      {"sweep", "Calibrate (or load a calibration) and measure the SRR spectrum"},
      {"stability", "Frozen calibration under cumulative drift"},
      {"defluxing", "Frozen calibration under independent per-reset perturbations"},
      {"contours", "Drift pairs (x, dphi) reaching target compensated rejections"},
      {"errorbars", "Propagated error bars against analog rejection"},
      {"montecarlo", "Monte Carlo check of the propagated error"},
  };
  for (const auto& [name, help] : experiments) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", run.config, "Scenario TOML file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", run.seed, "Override the scenario seed");
    sub->add_option("--out-dir", run.out_dir, "Override the output directory");
  }

  std::string csv_in, dat_out;
  CLI::App* plot = app.add_subcommand("plot-data", "Convert a contour or error-bar CSV into gnuplot columns");
  plot->add_option("input", csv_in, "CSV file")->required()->check(CLI::ExistingFile);
  plot->add_option("-o,--output", dat_out, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (plot->parsed()) {
    if (sbr_plot_data(csv_in.c_str(), dat_out.c_str()) != SBR_OK) {
      print_diagnostics(sbr_last_error());
      return 3;
    }
    return 0;
  }

  const std::string kind = app.get_subcommands().front()->get_name();
  int exit_code = 0;
  const sbr_status st = sbr_run_experiment(run.config.c_str(), kind.c_str(), run.seed.has_value(),
                                           run.seed.value_or(0), run.out_dir ? run.out_dir->c_str() : nullptr,
                                           &exit_code);
  if (st != SBR_OK) {
    print_diagnostics(sbr_last_error());
    return st == SBR_CONFIG || st == SBR_INVALID_ARGUMENT ? 2 : 3;
  }
  if (exit_code != 0) print_diagnostics(sbr_last_error());
  return exit_code;
}
