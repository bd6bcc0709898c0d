#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <iostream>

#include "ikam/cli/runner.hpp"
#include "ikam/cli/scenario.hpp"

namespace fs = std::filesystem;
using namespace ikam::cli;

namespace {

// Output root: IKAM_OUT_ROOT when set, otherwise ./ikam-out.
fs::path output_root() {
    if (const char* env = std::getenv("IKAM_OUT_ROOT"); env && *env) return env;
    return "ikam-out";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Impulsive Duffing experiments: simulation, sections, charts and invariant-circle diagnostics"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir, grid_text;
    std::size_t horizon = 0;
    double tol = 0.0;
    unsigned threads = 0;

    for (const auto& name : subcommands()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--scenario", scenario_path, "scenario file (YAML)")->required();
        sub->add_option("--out", out_dir, "output directory (default $IKAM_OUT_ROOT/<scenario>/<subcommand>)");
        sub->add_option("--horizon", horizon, "map iterates for sweep and poincare orbits");
        sub->add_option("--grid", grid_text, "grid point counts, N or NxM");
        sub->add_option("--tol", tol, "integrator rtol (atol = tol/100)");
        sub->add_option("--threads", threads, "worker threads, 0 = all cores");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_validation;
    }
    const std::string subcommand = app.get_subcommands().front()->get_name();
    const auto* sub = app.get_subcommands().front();

    Scenario sc;
    try {
        sc = load_scenario(scenario_path);
    } catch (const ScenarioError& e) {
        std::cerr << e.what() << '\n';
        return exit_validation;
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return exit_io;
    }
    for (const auto& w : sc.warnings) std::cerr << "warning: " << w << '\n';

    RunOptions opt;
    opt.threads = threads;
    opt.out_dir = out_dir.empty() ? output_root() / sc.name / subcommand : fs::path(out_dir);
    opt.chart_cache = output_root() / "chart-cache";
    if (sub->count("--horizon")) opt.horizon = horizon;
    if (sub->count("--tol")) opt.tol = tol;
    if (sub->count("--grid")) {
        opt.grid = parse_grid(grid_text);
        if (!opt.grid) {
            std::cerr << "--grid: expected N or NxM with positive integers, got '" << grid_text << "'\n";
            return exit_validation;
        }
    }

    const auto res = run(subcommand, sc, opt);
    if (res.exit_code != exit_ok) {
        std::cerr << subcommand << ": " << res.message << '\n';
        return res.exit_code;
    }
    for (const auto& f : res.files) std::cout << (opt.out_dir / f.file).string() << '\n';
    return exit_ok;
}
