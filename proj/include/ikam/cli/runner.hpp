#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ikam/cli/manifest.hpp"
#include "ikam/cli/scenario.hpp"

namespace ikam::cli {

enum ExitCode : int { exit_ok = 0, exit_validation = 2, exit_numerical = 3, exit_io = 4 };

struct RunOptions {
    std::filesystem::path out_dir;
    /// Replaces the sweep and poincare horizons.
    std::optional<std::size_t> horizon;
    /// Replaces the point counts (nx, ny) of the subcommand's grid.
    std::optional<std::pair<int, int>> grid;
    /// Replaces rtol; atol becomes tol / 100.
    std::optional<double> tol;
    unsigned threads = 0;
    /// Reference chart cache; charts are recomputed when empty.
    std::filesystem::path chart_cache;
};

struct RunResult {
    int exit_code = exit_ok;
    std::vector<ManifestRow> files;
    std::string message;
};

const std::vector<std::string>& subcommands();

/// Scenario with the command-line overrides applied.
Scenario apply_overrides(Scenario scenario, const std::string& subcommand, const RunOptions& options);

/// Runs one subcommand, writing its outputs and MANIFEST.tsv into out_dir.
RunResult run(const std::string& subcommand, const Scenario& scenario, const RunOptions& options);

/// Parses "N" or "NxM".
std::optional<std::pair<int, int>> parse_grid(const std::string& text);

}  // namespace ikam::cli
