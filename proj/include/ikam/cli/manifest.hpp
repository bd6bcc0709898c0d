#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ikam/cli/scenario.hpp"

namespace ikam::cli {

/// One output file of a run; `file` is "-" for a run that produced nothing.
struct ManifestRow {
    std::string file;
    bool complete = true;
    std::string note;
};

/// "impulsive-core=1.0.0;duffing-model=1.0.0;..." for every module.
std::string module_versions();

/// Column names of MANIFEST.tsv, tab separated.
std::string manifest_header();

/// Appends one row per output file to dir/MANIFEST.tsv, writing the header
/// when the file is new. Throws std::runtime_error on I/O failure.
void append_manifest(const std::filesystem::path& dir, const Scenario& scenario, const std::string& subcommand,
                     const std::vector<ManifestRow>& rows);

}  // namespace ikam::cli
