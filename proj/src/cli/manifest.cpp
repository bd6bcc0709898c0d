#include "ikam/cli/manifest.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <ctime>
#include <fstream>
#include <stdexcept>

namespace ikam::cli {

namespace {

constexpr const char* kModules[] = {"impulsive-core", "duffing-model", "poincare", "action-angle",
                                    "smoothing",      "diagnostics",   "cli"};
constexpr const char* kVersion = "1.0.0";

std::string clean(std::string s) {
    for (char& c : s)
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    return s;
}

}  // namespace

std::string module_versions() {
    std::string s;
    for (const char* m : kModules) {
        if (!s.empty()) s += ';';
        s += fmt::format("{}={}", m, kVersion);
    }
    return s;
}

std::string manifest_header() {
    return "file\tsubcommand\tscenario\tscenario_hash\tmodule_versions\trtol\tatol\tescape_radius\tchart_tol\t"
           "complete\ttimestamp\tnote";
}

void append_manifest(const std::filesystem::path& dir, const Scenario& scenario, const std::string& subcommand,
                     const std::vector<ManifestRow>& rows) {
    const auto path = dir / "MANIFEST.tsv";
    const bool fresh = !std::filesystem::exists(path);
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (fresh) out << manifest_header() << '\n';
    const std::string stamp = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
    for (const auto& r : rows)
        out << fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", clean(r.file),
                           subcommand, clean(scenario.name), scenario.hash, module_versions(), scenario.control.rtol,
                           scenario.control.atol, scenario.control.escape_radius, scenario.chart_tol,
                           r.complete ? "true" : "false", stamp, clean(r.note));
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace ikam::cli
