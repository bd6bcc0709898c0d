#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ikam/core/impulsive.hpp"
#include "ikam/duffing/model.hpp"
#include "ikam/ode/dop853.hpp"

namespace ikam::cli {

enum class IssueKind { parse, range, condition_H };
const char* to_string(IssueKind k);

struct Issue {
    IssueKind kind = IssueKind::parse;
    std::string path;  // field path, e.g. "impulses[1].beta"
    std::string message;

    std::string describe() const;
};

/// All validation failures found while loading one scenario.
class ScenarioError : public std::runtime_error {
public:
    explicit ScenarioError(std::vector<Issue> issues);
    const std::vector<Issue>& issues() const { return issues_; }
    bool has(IssueKind k) const;

private:
    std::vector<Issue> issues_;
};

enum class SystemKind { duffing, riccati };

/// Rectangular grid of nx by ny points, both ends included.
struct GridSpec {
    double x_min = -5.0, x_max = 5.0;
    double y_min = -5.0, y_max = 5.0;
    int nx = 20, ny = 20;

    std::vector<duffing::Point> points() const;  // row-major in y, then x
};

/// Seeds (lambda_i, theta) in the chart, lambda_i evenly spaced.
struct SeedLadder {
    double lambda_min = 1.0;
    double lambda_max = 4.0;
    int count = 16;
    double theta = 0.0;

    std::vector<double> lambdas() const;
};

struct SimulateSpec {
    double tau = 0.0;
    std::vector<double> initial;
    double t_min = 0.0, t_max = 1.0;
    int samples = 1001;
    std::vector<double> probes;
};

struct PoincareSpec {
    std::optional<duffing::Point> seed;  // orbit mode when set, grid mode otherwise
    std::size_t horizon = 1000;
    GridSpec grid{1.0, 3.0, -1.0, 1.0, 10, 10};
};

struct AreaCheckSpec {
    GridSpec grid{1.0, 3.0, -1.0, 1.0, 10, 10};
    double fd_step = 1e-6;
};

struct SweepSpec {
    GridSpec grid{};
    std::size_t horizon = 10000;
};

struct RoundTripSpec {
    std::vector<int> n{1, 2, 3};
    double tol = 1e-10;
    int points = 1000;
    int det_grid = 32;
    unsigned seed = 1;
};

struct SmoothRateSpec {
    /// Coefficient index to smooth; the lacunary test signal when unset.
    std::optional<int> coefficient;
    double gamma = 0.6;
    int k_min = 3, k_max = 9;  // sigma = 2^-k
    int points = 2048;
};

struct Scenario {
    std::string name;
    std::filesystem::path source;
    std::string hash;  // FNV-1a 64 of the file bytes, hex
    SystemKind system = SystemKind::duffing;

    // Duffing system
    duffing::DuffingParams params;
    std::vector<double> schedule;
    std::vector<duffing::ImpulseEntry> impulses;
    double A = 1.0;
    std::optional<double> eps0;

    // Riccati system u' = 1 + u^2 with constant jumps
    double period = 1.0;
    double jump = -1.0;

    ode::StepControl control;
    double chart_tol = 1e-10;

    SimulateSpec simulate;
    PoincareSpec poincare;
    AreaCheckSpec area_check;
    SweepSpec sweep;
    SeedLadder ladder;
    std::size_t rotation_N = 4096;
    std::size_t detect_N = 8192;
    double residual_tol = 1e-4;
    RoundTripSpec roundtrip;
    SmoothRateSpec smooth_rate;

    std::vector<std::string> warnings;

    core::ImpulsiveSystem<2> duffing_system() const;
    core::ImpulsiveSystem<1> riccati_system() const;
};

/// Parses and validates a scenario file; throws ScenarioError listing every
/// problem, or std::runtime_error when the file cannot be read.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text, const std::filesystem::path& source = {});

/// Real literal or arithmetic expression in numbers and pi, e.g. "3*pi/4".
std::optional<double> parse_real_expression(const std::string& text);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace ikam::cli
