#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ikam/cli/manifest.hpp"
#include "ikam/cli/runner.hpp"
#include "ikam/cli/scenario.hpp"
#include "support/systems.hpp"

using namespace ikam;
using namespace ikam::cli;
namespace fs = std::filesystem;

namespace {

fs::path scenario_file(const std::string& name) { return fs::path(IKAM_SOURCE_DIR) / "scenarios" / (name + ".yaml"); }

fs::path fresh_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("ikam-cli-test-" + name);
    fs::remove_all(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

std::vector<std::vector<std::string>> read_table(const fs::path& p, char sep = ',') {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, sep)) cells.push_back(cell);
        if (!line.empty() && line.back() == sep) cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

const char* kMinimal = R"(
name: t
n: 1
schedule: [0.3, 0.6]
impulses:
  - {kind: constant-shift, alpha: 0.1}
  - {kind: constant-shift, alpha: 0.2}
)";

ScenarioError rejection(const std::string& text) {
    try {
        (void)parse_scenario(text);
    } catch (const ScenarioError& e) {
        return e;
    }
    ADD_FAILURE() << "scenario was accepted";
    return ScenarioError({});
}

bool has_issue(const ScenarioError& e, IssueKind k, const std::string& path) {
    for (const auto& i : e.issues())
        if (i.kind == k && i.path == path) return true;
    return false;
}

}  // namespace

TEST(Expression, RealsAndMultiplesOfPi) {
    const double pi = std::numbers::pi;
    EXPECT_EQ(parse_real_expression("0.25"), 0.25);
    EXPECT_EQ(parse_real_expression("1e-3"), 1e-3);
    EXPECT_EQ(parse_real_expression("pi/4"), pi / 4);
    EXPECT_EQ(parse_real_expression("3*pi/4"), 3 * pi / 4);
    EXPECT_EQ(parse_real_expression("2pi"), 2 * pi);
    EXPECT_EQ(parse_real_expression("-pi/8"), -pi / 8);
    EXPECT_EQ(parse_real_expression("(1 + 1) * pi"), 2 * pi);
    EXPECT_EQ(parse_real_expression("2*pi - pi/8"), 2 * pi - pi / 8);
    EXPECT_FALSE(parse_real_expression("pie"));
    EXPECT_FALSE(parse_real_expression("1/0"));
    EXPECT_FALSE(parse_real_expression("1 +"));
    EXPECT_FALSE(parse_real_expression(""));
}

TEST(Scenario, ShippedKickedScenarioMatchesTestSystem) {
    const auto sc = load_scenario(scenario_file("remark-2.1-basic"));
    EXPECT_EQ(sc.name, "remark-2.1-basic");
    EXPECT_TRUE(sc.warnings.empty());
    ASSERT_EQ(sc.params.n, 1);
    EXPECT_EQ(sc.schedule, testsys::kicked_schedule().base_times());
    const auto ref = testsys::kicked_params();
    for (std::size_t i = 0; i < 3; ++i)
        for (double t : {0.0, 0.1, 0.37, 0.8}) EXPECT_EQ(sc.params.coefficients[i](t), ref.coefficients[i](t));
    const auto imp = testsys::kicked_impulses();
    ASSERT_EQ(sc.impulses.size(), 2u);
    for (std::size_t k = 0; k < 2; ++k)
        for (const duffing::Point p : {duffing::Point{1.5, -2.0}, duffing::Point{-3.0, 0.5}}) {
            EXPECT_EQ(sc.impulses[k].I(p[0], p[1]), imp[k].I(p[0], p[1]));
            EXPECT_EQ(sc.impulses[k].J(p[0], p[1]), imp[k].J(p[0], p[1]));
        }
    EXPECT_EQ(sc.A, 10.0);
    EXPECT_EQ(sc.control.escape_radius, 1e6);
}

TEST(Scenario, ShippedKickedScenarioPassesAreaIdentityWithValueZero) {
    const auto sc = load_scenario(scenario_file("remark-2.1-basic"));
    for (const auto& e : sc.impulses) {
        EXPECT_EQ(e.tag(), "poly-kick");
        EXPECT_LE(e.beta().size(), 2u);
        for (double x : {-5.0, 0.0, 2.5})
            for (double y : {-1.0, 3.0}) EXPECT_EQ(duffing::area_identity(e, {x, y}), 0.0);
    }
}

TEST(Scenario, AllShippedScenariosLoad) {
    for (const auto& entry : fs::directory_iterator(fs::path(IKAM_SOURCE_DIR) / "scenarios")) {
        if (entry.path().extension() != ".yaml") continue;
        EXPECT_NO_THROW((void)load_scenario(entry.path())) << entry.path();
    }
}

TEST(Scenario, RiccatiScenarioUsesPiExpressions) {
    const auto sc = load_scenario(scenario_file("riccati-tan"));
    EXPECT_EQ(sc.system, SystemKind::riccati);
    EXPECT_EQ(sc.period, std::numbers::pi / 4);
    EXPECT_EQ(sc.simulate.t_max, 2 * std::numbers::pi);
    EXPECT_EQ(sc.jump, -1.0);
}

TEST(Scenario, DecreasingTimesRejectedNamingConditionH) {
    const auto e = rejection(R"(
name: t
n: 1
schedule: [0.6, 0.3]
impulses:
  - {kind: constant-shift, alpha: 0.1}
  - {kind: constant-shift, alpha: 0.2}
)");
    EXPECT_TRUE(has_issue(e, IssueKind::condition_H, "schedule[1]"));
    EXPECT_NE(std::string(e.what()).find("condition (H)"), std::string::npos);
    const auto edge = rejection(R"(
name: t
n: 1
schedule: [0, 1]
impulses: [{kind: constant-shift}, {kind: constant-shift}]
)");
    EXPECT_TRUE(has_issue(edge, IssueKind::condition_H, "schedule[0]"));
    EXPECT_TRUE(has_issue(edge, IssueKind::condition_H, "schedule[1]"));
}

TEST(Scenario, AllFailuresReportedTogetherWithPaths) {
    const auto e = rejection(R"(
name: t
n: 1
coefficients:
  - {kind: wavelet}
  - {kind: constant}
schedule: [0.3]
impulses:
  - {kind: poly-kick, beta: [1, 2, 3]}
A: -2
detect: {N: 100}
colour: blue
)");
    EXPECT_TRUE(has_issue(e, IssueKind::parse, "coefficients[0].kind"));
    EXPECT_TRUE(has_issue(e, IssueKind::parse, "coefficients[1].value"));
    EXPECT_TRUE(has_issue(e, IssueKind::range, "impulses[0].beta"));
    EXPECT_TRUE(has_issue(e, IssueKind::range, "A"));
    EXPECT_TRUE(has_issue(e, IssueKind::range, "detect.N"));
    EXPECT_TRUE(has_issue(e, IssueKind::parse, "colour"));
    EXPECT_GE(e.issues().size(), 6u);
}

TEST(Scenario, ErrorKindsAreDistinct) {
    EXPECT_TRUE(rejection("name: [unclosed").has(IssueKind::parse));
    const auto r = rejection(std::string(kMinimal) + "eps0: 0\n");
    EXPECT_TRUE(r.has(IssueKind::range));
    EXPECT_FALSE(r.has(IssueKind::condition_H));
    EXPECT_TRUE(rejection("name: t\nn: one\nschedule: [0.5]\nimpulses: [{kind: constant-shift}]\n")
                    .has(IssueKind::parse));
    EXPECT_TRUE(rejection(std::string(kMinimal) + "tolerances: {rtol: 1e-10, atol: fast}\n").has(IssueKind::parse));
    EXPECT_TRUE(rejection("name: t\nn: 1\nschedule: [0.3, 0.6]\nimpulses: [{kind: constant-shift}]\n")
                    .has(IssueKind::range));
}

TEST(Scenario, HolderExponentRule) {
    const std::string body = R"(
schedule: [0.5]
impulses: [{kind: constant-shift}]
coefficients:
  - {kind: lacunary, gamma: 0.3}
)";
    const auto one = parse_scenario("name: t\nn: 1\n" + body);
    ASSERT_EQ(one.warnings.size(), 1u);
    EXPECT_NE(one.warnings[0].find("1 - 1/n = 0"), std::string::npos) << one.warnings[0];
    EXPECT_NE(one.warnings[0].find("rejected for n = 2"), std::string::npos) << one.warnings[0];
    const auto two = rejection("name: t\nn: 2\n" + body);
    EXPECT_TRUE(has_issue(two, IssueKind::range, "coefficients[0].gamma"));
    EXPECT_NO_THROW((void)parse_scenario("name: t\nn: 2\n" + std::string(R"(
schedule: [0.5]
impulses: [{kind: constant-shift}]
coefficients:
  - {kind: lacunary, gamma: 0.6}
)")));
}

TEST(Scenario, HashTracksFileBytes) {
    const auto a = parse_scenario(kMinimal), b = parse_scenario(kMinimal);
    EXPECT_EQ(a.hash, b.hash);
    EXPECT_EQ(a.hash.size(), 16u);
    EXPECT_NE(parse_scenario(std::string(kMinimal) + "A: 2\n").hash, a.hash);
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
}

TEST(Scenario, MissingFileIsNotAValidationError) {
    EXPECT_THROW((void)load_scenario("/nonexistent/scenario.yaml"), std::runtime_error);
    try {
        (void)load_scenario("/nonexistent/scenario.yaml");
    } catch (const ScenarioError&) {
        FAIL() << "missing file reported as a validation failure";
    } catch (const std::runtime_error&) {
    }
}

TEST(Runner, GridParsing) {
    EXPECT_EQ(parse_grid("20"), (std::pair{20, 20}));
    EXPECT_EQ(parse_grid("10x4"), (std::pair{10, 4}));
    EXPECT_FALSE(parse_grid("0"));
    EXPECT_FALSE(parse_grid("3x"));
    EXPECT_FALSE(parse_grid("-2"));
}

TEST(Runner, SimulateRiccatiMatchesClosedForm) {
    const auto dir = fresh_dir("riccati");
    const auto res = run("simulate", load_scenario(scenario_file("riccati-tan")), {.out_dir = dir});
    ASSERT_EQ(res.exit_code, exit_ok) << res.message;
    const auto probes = read_table(dir / "probes.csv");
    ASSERT_EQ(probes.size(), 4u);
    for (std::size_t i = 1; i < probes.size(); ++i) {
        ASSERT_EQ(probes[i][1], "1");
        EXPECT_NEAR(std::stod(probes[i][2]), std::sqrt(2.0) - 1.0, 1e-8);
    }
    const auto traj = read_table(dir / "trajectory.csv");
    ASSERT_GT(traj.size(), 1000u);
    // pi/8 is the 100th grid step of [0, 2 pi] with 1601 samples
    EXPECT_NEAR(std::stod(traj[100][0]), std::numbers::pi / 8, 1e-15);
    EXPECT_NEAR(std::stod(traj[100][1]), std::sqrt(2.0) - 1.0, 1e-8);
    EXPECT_EQ(read_json(dir / "simulate.json")["jumps"], 7);
}

TEST(Runner, SimulateReportsEscapeBeforeFirstImpulse) {
    const auto dir = fresh_dir("blowup");
    const auto res = run("simulate", load_scenario(scenario_file("riccati-blowup")), {.out_dir = dir});
    ASSERT_EQ(res.exit_code, exit_ok) << res.message;
    const auto doc = read_json(dir / "simulate.json");
    EXPECT_EQ(doc["right"]["reason"], "escape");
    EXPECT_FALSE(doc["right"]["closed"].get<bool>());
    const double t = doc["right"]["t"];
    EXPECT_LT(t, std::numbers::pi / 4);
    EXPECT_GE(t, std::numbers::pi / 4 - 1e-3);
}

TEST(Runner, AreaCheckOnKickedScenario) {
    const auto dir = fresh_dir("area");
    const auto res = run("area-check", load_scenario(scenario_file("remark-2.1-basic")), {.out_dir = dir});
    ASSERT_EQ(res.exit_code, exit_ok) << res.message;
    const auto doc = read_json(dir / "area_check.json");
    EXPECT_EQ(doc["points"], 100);
    EXPECT_LE(doc["max_abs_det_minus_one"].get<double>(), 1e-6);
    EXPECT_LE(doc["max_entry_diff_fd"].get<double>(), 1e-5);
    EXPECT_TRUE(doc["area_identity_satisfied"].get<bool>());
    EXPECT_EQ(read_table(dir / "area_check.csv").size(), 101u);
}

TEST(Runner, SweepOnUnforcedScenarioIsFullyBounded) {
    const auto dir = fresh_dir("sweep");
    RunOptions opt{.out_dir = dir, .horizon = 50, .grid = std::pair{6, 6}};
    const auto res = run("sweep", load_scenario(scenario_file("unforced")), opt);
    ASSERT_EQ(res.exit_code, exit_ok) << res.message;
    const auto doc = read_json(dir / "sweep.json");
    EXPECT_EQ(doc["points"], 36);
    EXPECT_EQ(doc["horizon"], 50);
    EXPECT_EQ(doc["fraction_bounded"].get<double>(), 1.0);
}

TEST(Runner, DissipativeControlBoundedButViolatesAreaIdentity) {
    const auto sc = load_scenario(scenario_file("dissipative"));
    const auto dir = fresh_dir("dissipative");
    ASSERT_EQ(run("sweep", sc, {.out_dir = dir, .horizon = 30, .grid = std::pair{4, 4}}).exit_code, exit_ok);
    EXPECT_EQ(read_json(dir / "sweep.json")["fraction_bounded"].get<double>(), 1.0);
    ASSERT_EQ(run("area-check", sc, {.out_dir = dir, .grid = std::pair{3, 3}}).exit_code, exit_ok);
    const auto doc = read_json(dir / "area_check.json");
    EXPECT_FALSE(doc["area_identity_satisfied"].get<bool>());
    EXPECT_NEAR(doc["max_abs_det_minus_one"].get<double>(), 0.5, 1e-6);
}

TEST(Runner, OutputsAreByteIdenticalAcrossRunsAndThreadCounts) {
    auto sc = load_scenario(scenario_file("remark-2.1-basic"));
    const auto a = fresh_dir("det-a"), b = fresh_dir("det-b");
    ASSERT_EQ(run("poincare", sc, {.out_dir = a, .horizon = 40, .threads = 1}).exit_code, exit_ok);
    ASSERT_EQ(run("poincare", sc, {.out_dir = b, .horizon = 40, .threads = 3}).exit_code, exit_ok);
    EXPECT_EQ(slurp(a / "section.csv"), slurp(b / "section.csv"));
    sc.poincare.seed.reset();
    ASSERT_EQ(run("poincare", sc, {.out_dir = a, .grid = std::pair{4, 3}, .threads = 1}).exit_code, exit_ok);
    ASSERT_EQ(run("poincare", sc, {.out_dir = b, .grid = std::pair{4, 3}, .threads = 3}).exit_code, exit_ok);
    EXPECT_EQ(slurp(a / "section.csv"), slurp(b / "section.csv"));
    EXPECT_EQ(slurp(a / "poincare.json"), slurp(b / "poincare.json"));
    EXPECT_EQ(read_table(a / "section.csv").size(), 13u);
}

TEST(Runner, ManifestRowPerOutputFile) {
    const auto sc = load_scenario(scenario_file("riccati-tan"));
    const auto dir = fresh_dir("manifest");
    const auto res = run("simulate", sc, {.out_dir = dir});
    ASSERT_EQ(res.exit_code, exit_ok);
    const auto rows = read_table(dir / "MANIFEST.tsv", '\t');
    ASSERT_EQ(rows.size(), 1 + res.files.size());
    const auto& head = rows[0];
    auto col = [&](const std::string& name) {
        return static_cast<std::size_t>(std::find(head.begin(), head.end(), name) - head.begin());
    };
    ASSERT_LT(col("timestamp"), head.size());
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_TRUE(fs::exists(dir / rows[i][col("file")]));
        EXPECT_EQ(rows[i][col("scenario_hash")], sc.hash);
        EXPECT_EQ(rows[i][col("module_versions")], module_versions());
        EXPECT_EQ(rows[i][col("complete")], "true");
        EXPECT_EQ(std::stod(rows[i][col("rtol")]), sc.control.rtol);
    }
    // data files carry no timestamp
    const std::string stamp = rows[1][col("timestamp")];
    for (const auto& f : res.files) EXPECT_EQ(slurp(dir / f.file).find(stamp.substr(0, 10)), std::string::npos);
}

TEST(Runner, ExitCodes) {
    const auto kicked = load_scenario(scenario_file("remark-2.1-basic"));
    const auto riccati = load_scenario(scenario_file("riccati-tan"));
    EXPECT_EQ(run("fly", kicked, {.out_dir = fresh_dir("x1")}).exit_code, exit_validation);
    EXPECT_EQ(run("sweep", riccati, {.out_dir = fresh_dir("x2")}).exit_code, exit_validation);
    EXPECT_EQ(run("simulate", kicked, {.out_dir = fresh_dir("x3"), .tol = -1.0}).exit_code, exit_validation);

    // a regular file where the output directory should be
    const auto blocker = fresh_dir("x4");
    std::ofstream(blocker) << "x";
    EXPECT_EQ(run("simulate", riccati, {.out_dir = blocker / "sub"}).exit_code, exit_io);
    fs::remove(blocker);
}

TEST(Runner, InsufficientSamplesIsAValidationFailure) {
    auto sc = parse_scenario(R"(
name: coarse
n: 1
coefficients:
  - {kind: samples, values: [0, 1, 0, -1, 0, 1, 0, -1]}
schedule: [0.5]
impulses: [{kind: constant-shift}]
smooth_rate: {coefficient: 0, k_min: 1, k_max: 6}
)");
    const auto dir = fresh_dir("coarse");
    const auto res = run("smooth-rate", sc, {.out_dir = dir});
    EXPECT_EQ(res.exit_code, exit_validation);
    EXPECT_NE(res.message.find("required"), std::string::npos) << res.message;
    // nothing was written, and the manifest says so
    const auto rows = read_table(dir / "MANIFEST.tsv", '\t');
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1][0], "-");
    EXPECT_NE(std::find(rows[1].begin(), rows[1].end(), "false"), rows[1].end());
}

TEST(Runner, NumericalFailureIsMarkedIncomplete) {
    // the chart cannot meet a tolerance below the floating-point floor
    auto sc = load_scenario(scenario_file("unforced"));
    sc.roundtrip.n = {1, 2};
    sc.roundtrip.tol = 1e-20;
    const auto dir = fresh_dir("numerical");
    const auto res = run("aa-roundtrip", sc, {.out_dir = dir});
    EXPECT_EQ(res.exit_code, exit_numerical) << res.message;
    ASSERT_FALSE(res.files.empty());
    EXPECT_FALSE(res.files.back().complete);
}

TEST(Tool, EndToEndExitCodes) {
    const auto root = fresh_dir("tool");
    fs::create_directories(root);
    auto sh = [&](const std::string& args) {
        const std::string cmd = "IKAM_OUT_ROOT='" + root.string() + "' '" IKAM_TOOL_PATH "' " + args + " >/dev/null 2>&1";
        const int st = std::system(cmd.c_str());
        return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    };
    EXPECT_EQ(sh("simulate --scenario '" + scenario_file("riccati-tan").string() + "'"), 0);
    EXPECT_TRUE(fs::exists(root / "riccati-tan" / "simulate" / "trajectory.csv"));
    EXPECT_TRUE(fs::exists(root / "riccati-tan" / "simulate" / "MANIFEST.tsv"));

    const auto bad = root / "bad.yaml";
    std::ofstream(bad) << "name: bad\nn: 1\nschedule: [0.7, 0.2]\nimpulses: [{kind: constant-shift}, {kind: constant-shift}]\n";
    EXPECT_EQ(sh("simulate --scenario '" + bad.string() + "'"), 2);
    EXPECT_EQ(sh("simulate --scenario '" + (root / "missing.yaml").string() + "'"), 4);
    EXPECT_EQ(sh("simulate --scenario '" + scenario_file("riccati-tan").string() + "' --grid 0x3"), 2);
    EXPECT_EQ(sh("nonsense"), 2);
}
