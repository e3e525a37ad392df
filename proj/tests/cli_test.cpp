// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

// Drives the CLI binary: exit codes, overrides, determinism, plot-data.
// Usage: sbrcal_cli_test <cli> <examples dir> <work dir>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  if (!ok) {
    std::cerr << "FAILED: " << what << '\n';
    ++failures;
  }
}

int run(const std::string& cmd) {
  const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::cerr << "usage: sbrcal_cli_test <cli> <examples dir> <work dir>\n";
    return 2;
  }
  const fs::path cli = argv[1], ex = argv[2], work = argv[3];
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string bin = q(cli);

  for (const std::string kind : {"calibrate", "sweep", "stability", "defluxing", "contours", "errorbars", "montecarlo"}) {
    const fs::path a = work / (kind + "_a"), b = work / (kind + "_b");
    const std::string base = bin + " " + kind + " --config " + q(ex / (kind + ".toml")) + " --seed 99 --out-dir ";
    expect(run(base + q(a)) == 0, kind + " exits 0");
    expect(run(base + q(b)) == 0, kind + " rerun exits 0");
    for (const auto& e : fs::directory_iterator(a))
      expect(slurp(e.path()) == slurp(b / e.path().filename()), kind + ": " + e.path().filename().string() + " identical");
    expect(slurp(a / "manifest.json").find("\"seed\": 99") != std::string::npos, kind + " manifest records seed");
  }

  // Subcommand and config kind disagree.
  expect(run(bin + " sweep --config " + q(ex / "contours.toml") + " --out-dir " + q(work / "x")) == 2,
         "kind mismatch is a config error");
  expect(!fs::exists(work / "x"), "kind mismatch writes nothing");

  // Missing receiver section.
  {
    std::ofstream(work / "bad.toml") << "[experiment]\nkind = \"stability\"\n[output]\ndir = \"bad_out\"\n";
    expect(run(bin + " stability --config " + q(work / "bad.toml")) == 2, "missing receiver exits 2");
    expect(!fs::exists(work / "bad_out"), "missing receiver writes nothing");
  }

  // Unreachable contour target.
  {
    std::ofstream(work / "unreach.toml")
        << "[experiment]\nkind = \"contours\"\ntargets_db = [40.0]\nanalog_rejection_grid_db = [0.0]\n";
    expect(run(bin + " contours --config " + q(work / "unreach.toml") + " --out-dir " + q(work / "unreach")) == 3,
           "unreachable target exits 3");
    expect(fs::exists(work / "unreach" / "manifest.json"), "manifest written on failure");
  }

  expect(run(bin + " calibrate") == 2, "missing --config is a usage error");
  expect(run(bin + " frobnicate --config x") == 2, "unknown subcommand is a usage error");
  expect(run(bin + " --help") == 0, "--help exits 0");

  // plot-data on an emitted contour.
  {
    const fs::path csv = work / "contours_a" / "contour_30db_ma10db.csv";
    const fs::path out = work / "contour.dat";
    expect(run(bin + " plot-data " + q(csv) + " -o " + q(out)) == 0, "plot-data exits 0");
    const std::string dat = slurp(out);
    const std::string direct = slurp(work / "contours_a" / "contour_30db_ma10db.dat");
    expect(!dat.empty() && direct.substr(direct.find('\n') + 1) == dat, "plot-data matches the emitted .dat");
    expect(run(bin + " plot-data " + q(work / "bad.toml") + " -o " + q(out)) == 3, "plot-data rejects junk");
  }

  if (failures) {
    std::cerr << failures << " CLI check(s) failed\n";
    return 1;
  }
  std::cout << "cli: all checks passed\n";
  return 0;
}
