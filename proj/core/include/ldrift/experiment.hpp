#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ldrift/config.hpp"
#include "ldrift/evolution.hpp"
#include "ldrift/steady_longtime.hpp"

namespace ldrift {

/// Process exit codes of `ldrift run` and `ldrift plot`.
enum ExitCode : int {
  exit_pass = 0,
  exit_assertion = 1,
  exit_parse = 2,
  exit_solver = 3,
};

std::string version();

struct RunOptions {
  std::optional<std::filesystem::path> output_dir;  ///< overrides output.directory
  std::optional<std::uint64_t> seed;                ///< overrides the config seed
};

struct RunManifest {
  int status = exit_pass;
  std::filesystem::path directory;
  std::vector<std::string> files;     ///< relative to directory, manifest.json last
  std::vector<std::string> failures;  ///< failed assertions, or the solver error
  nlohmann::json json;
};

/// Builds the problem described by the [model] and [domain] sections.
ProblemData build_problem(const Config& cfg, std::uint64_t seed);
EvolutionConfig build_evolution(const Config& cfg, const ProblemData& data);
SteadyConfig build_steady(const Config& cfg, const ProblemData& data);

/// Runs the configured experiment and writes its outputs plus manifest.json.
/// Config problems surface as FormatError; solver failures are caught,
/// recorded and reported through status = exit_solver.
RunManifest run_experiment(const Config& cfg, const RunOptions& opts = {});

enum class PlotKind { energy, decay, convergence };
PlotKind parse_plot_kind(const std::string& name);

struct PlotOutput {
  std::filesystem::path data;     ///< two-column CSV (x, y)
  std::filesystem::path sidecar;  ///< reference curves as JSON
};

/// Converts a trace.csv, decay_series.csv or convergence.csv into plot-ready
/// (x, y) data. Throws FormatError on missing columns or an empty table.
PlotOutput emit_plot_data(const std::filesystem::path& trace, PlotKind kind,
                          const std::optional<std::filesystem::path>& out = {});

}  // namespace ldrift
