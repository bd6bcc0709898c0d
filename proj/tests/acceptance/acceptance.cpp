// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ikam/chart/reference_chart.hpp"
#include "ikam/chart/transforms.hpp"
#include "ikam/cli/scenario.hpp"
#include "ikam/diagnostics/diagnostics.hpp"
#include "ikam/duffing/model.hpp"
#include "ikam/poincare/time_one_map.hpp"
#include "ikam/smoothing/smoothing.hpp"
#include "support/oracles.hpp"

using namespace ikam;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

// Pinned tolerances and limits.
namespace tol {
constexpr double closed_form = 1e-8;
constexpr double escape_window = 1e-3;
constexpr double chart_residual = 1e-10;
constexpr double period_agreement = 1e-9;
constexpr double roundtrip = 1e-9;
constexpr double chart_det = 1e-7;
constexpr double map_det = 1e-6;
constexpr double jacobian_fd = 1e-5;
constexpr double fd_step = 1e-6;
constexpr double holder_slope = 0.1;
constexpr double scaling_slope = 0.15;
constexpr double frozen_margin = 2.0;
constexpr double jump_slope = 0.1;
constexpr double rotation = 1e-6;
constexpr double circle_residual = 1e-4;
constexpr double circle_fraction = 0.30;
}  // namespace tol

struct Verdict {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    double time_limit;  // seconds
    std::function<Verdict()> check;
};

fs::path scenario(const std::string& name) { return fs::path(IKAM_SOURCE_DIR) / "scenarios" / (name + ".yaml"); }

double circ(double a, double b) {
    const double d = a - b;
    return std::abs(d - std::round(d));
}

// ---- 1, 2: Riccati example ----

Verdict closed_form_solution() {
    const auto sc = cli::load_scenario(scenario("riccati-tan"));
    const auto traj = core::solve_ivp<1>(sc.riccati_system(), 0.0, {0.0}, {0.0, 2 * pi}, sc.control);
    if (traj.right().t != 2 * pi) return {false, "solution did not reach 2 pi"};
    double worst = 0.0;
    const int m = 20000;
    for (int i = 1; i <= m; ++i) {
        const double t = 2 * pi * i / m;
        const double j = std::ceil(t / (pi / 4)) - 1.0;  // t in (j pi/4, (j+1) pi/4]
        worst = std::max(worst, std::abs(traj(t)[0] - std::tan(t - j * pi / 4)));
    }
    return {worst <= tol::closed_form, fmt::format("max |u - tan(t - j pi/4)| = {:.3g} (<= {:g})", worst, tol::closed_form)};
}

Verdict non_continuable() {
    const auto sc = cli::load_scenario(scenario("riccati-blowup"));
    const auto traj = core::solve_ivp<1>(sc.riccati_system(), 0.0, {1.0}, {0.0, 1.0}, sc.control);
    const auto& r = traj.right();
    const bool ok = r.reason == core::Termination::escape && !r.closed && traj.jumps().empty() && r.t < pi / 4 &&
                    r.t >= pi / 4 - tol::escape_window;
    return {ok, fmt::format("termination {}, escape at t = {:.12f}, pi/4 - t = {:.3g}, jumps applied {}",
                            core::to_string(r.reason), r.t, pi / 4 - r.t, traj.jumps().size())};
}

// ---- 3, 4: reference chart ----

Verdict reference_chart() {
    bool ok = true;
    std::string d;
    for (int n : {1, 2, 3}) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto ch = chart::compute_reference(n, 1e-10, 4096);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const double res = ch.energy_residual();
        const double dT = std::abs(ch.T0_quadrature() - ch.T0_return());
        const double dBeta = std::abs(ch.T0() - oracle::period_closed_form(n));
        const bool pass = ch.nodes() == 4096 && res <= tol::chart_residual && dT <= tol::period_agreement &&
                          dBeta <= tol::period_agreement && secs < 5.0;
        ok = ok && pass;
        d += fmt::format("{}n={}: residual {:.2g}, |T0 quad - T0 return| {:.2g}, |T0 - Beta oracle| {:.2g}, {:.2f}s",
                         d.empty() ? "" : "; ", n, res, dT, dBeta, secs);
    }
    return {ok, d};
}

Verdict chart_round_trip() {
    bool ok = true;
    std::string d;
    for (int n : {1, 2, 3}) {
        const auto ch = chart::compute_reference(n);
        std::mt19937_64 rng(4242 + n);
        std::uniform_real_distribution<double> L(1.0, 4.0), T(0.0, 1.0);
        double rt = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const chart::ActionAngle p{L(rng), T(rng)};
            const auto b = ch.to_action_angle(ch.from_action_angle(p));
            rt = std::max({rt, std::abs(b.lambda - p.lambda), circ(b.theta, p.theta)});
        }
        const double h = 1e-5;
        double det = 0.0;
        for (int i = 0; i < 32; ++i)
            for (int k = 0; k < 32; ++k) {
                const double lam = 1.0 + 3.0 * i / 31.0, th = k / 32.0;
                const auto tp = ch.from_action_angle({lam, th + h}), tm = ch.from_action_angle({lam, th - h});
                const auto lp = ch.from_action_angle({lam + h, th}), lm = ch.from_action_angle({lam - h, th});
                const double xt = (tp[0] - tm[0]) / (2 * h), yt = (tp[1] - tm[1]) / (2 * h);
                const double xl = (lp[0] - lm[0]) / (2 * h), yl = (lp[1] - lm[1]) / (2 * h);
                det = std::max(det, std::abs(xt * yl - xl * yt - 1.0));
            }
        ok = ok && rt <= tol::roundtrip && det <= tol::chart_det;
        d += fmt::format("{}n={}: round trip {:.2g}, |det - 1| {:.2g}", d.empty() ? "" : "; ", n, rt, det);
    }
    return {ok, d};
}

// ---- 5: area preservation ----

Verdict area_preservation() {
    const auto sc = cli::load_scenario(scenario("remark-2.1-basic"));
    const poincare::TimeOneMap map(sc.duffing_system(), sc.control);
    double det = 0.0, diff = 0.0;
    for (int i = 0; i < 10; ++i)
        for (int k = 0; k < 10; ++k) {
            const poincare::Point p{1.0 + 2.0 * i / 9.0, -1.0 + 2.0 * k / 9.0};
            const auto v = map.jacobian(p, poincare::JacobianMethod::variational);
            const auto f = map.jacobian(p, poincare::JacobianMethod::finite_difference, tol::fd_step);
            if (v.escaped || f.escaped) return {false, "orbit escaped on the grid"};
            det = std::max(det, std::abs(v.determinant - 1.0));
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) diff = std::max(diff, std::abs(v.matrix[r][c] - f.matrix[r][c]));
        }
    return {det <= tol::map_det && diff <= tol::jacobian_fd,
            fmt::format("max |det - 1| = {:.2g} (<= {:g}), max |variational - FD| = {:.2g} (<= {:g})", det, tol::map_det,
                        diff, tol::jacobian_fd)};
}

// ---- 6: smoothing rate ----

Verdict smoothing_rate() {
    const double gamma = 0.6;
    const auto f = duffing::CoefficientSignal::lacunary(gamma);
    std::vector<double> ls, le;
    for (int k = 3; k <= 9; ++k) {
        const double s = std::exp2(-k);
        ls.push_back(std::log(s));
        le.push_back(std::log(smoothing::sup_error(smoothing::smooth(f, s), f, 2048)));
    }
    const double slope = oracle::slope(ls, le);
    return {std::abs(slope - gamma) <= tol::holder_slope,
            fmt::format("slope {:.4f}, expected {} +- {}", slope, gamma, tol::holder_slope)};
}

// ---- 7: perturbation scaling and split bounds ----

Verdict perturbation_scaling() {
    bool ok = true;
    std::string d;
    for (const char* name : {"holder-n1", "holder-n2"}) {
        const auto sc = cli::load_scenario(scenario(name));
        const int n = sc.params.n;
        const double eps0 = sc.eps0.value_or(0.05);
        const auto ch = chart::compute_reference(n);
        std::vector<double> la, lR, lS;
        double C1 = -1.0, C2 = -1.0;
        bool bounds = true;
        for (double A : {1e2, 1e3, 1e4}) {
            const auto r = smoothing::split_perturbation(sc.params, ch, A, eps0).report;
            const double growth = std::pow(A, n - 1);
            if (C1 < 0.0) {
                // constants calibrated at the first rung, frozen afterwards
                C1 = tol::frozen_margin * r.sup_R_rest / eps0;
                C2 = tol::frozen_margin * r.sup_R_smooth / growth;
            }
            bounds = bounds && r.sup_R_rest <= C1 * eps0 && r.sup_R_smooth <= C2 * growth;
            la.push_back(std::log(A));
            lR.push_back(std::log(r.sup_R));
            lS.push_back(std::log(r.sup_R_smooth));
        }
        const double sR = oracle::slope(la, lR), sS = oracle::slope(la, lS);
        const bool pass = std::abs(sR - (n - 1)) <= tol::scaling_slope && std::abs(sS - (n - 1)) <= tol::scaling_slope &&
                          bounds;
        ok = ok && pass;
        d += fmt::format("{}n={}: slope sup|R| {:.3f}, slope sup|R_eps| {:.3f} (target {} +- {}), frozen bounds {}",
                         d.empty() ? "" : "; ", n, sR, sS, n - 1, tol::scaling_slope, bounds ? "hold" : "violated");
    }
    return {ok, d};
}

// ---- 8: jump smallness ----

Verdict jump_smallness() {
    using duffing::ImpulseEntry;
    struct Case {
        int n;
        ImpulseEntry e;
    };
    const std::vector<Case> cases{
        {1, ImpulseEntry::constant_shift(0.3)},         {1, ImpulseEntry::poly_kick(-0.2, {0.1, 0.4})},
        {1, ImpulseEntry::sin_kick(0.5, 0.3, 0.2)},     {1, ImpulseEntry::gauss_kick(0.5, 2, -0.15)},
        {2, ImpulseEntry::constant_shift(0.3)},         {2, ImpulseEntry::poly_kick(0.1, {0.2, -0.1, 0.3})},
    };
    bool ok = true;
    double worst = 0.0;
    std::string d;
    for (const auto& c : cases) {
        const auto ch = chart::compute_reference(c.n);
        std::vector<double> la, ll, lt;
        for (double A : {1e2, 1e3, 1e4}) {
            double sl = 0.0, st = 0.0;
            for (int i = 0; i < 13; ++i)
                for (int k = 0; k < 64; ++k) {
                    const auto inc = chart::jump_action_angle(ch, A, c.e, {1.0 + 3.0 * i / 12.0, k / 64.0});
                    sl = std::max(sl, std::abs(inc.dlambda));
                    st = std::max(st, std::abs(inc.dtheta));
                }
            la.push_back(std::log(A));
            ll.push_back(std::log(sl));
            lt.push_back(std::log(st));
        }
        const double a = oracle::slope(la, ll), b = oracle::slope(la, lt);
        worst = std::max({worst, std::abs(a + 1.0), std::abs(b + 1.0)});
        ok = ok && std::abs(a + 1.0) <= tol::jump_slope && std::abs(b + 1.0) <= tol::jump_slope;
        d += fmt::format("{}{} n={}: {:.3f}/{:.3f}", d.empty() ? "" : ", ", c.e.tag(), c.n, a, b);
    }
    return {ok, fmt::format("slopes of sup|dlambda|/sup|dtheta| vs A: {}; max deviation from -1 {:.3f} (<= {})", d,
                            worst, tol::jump_slope)};
}

// ---- 9: rotation oracle and twist ----

poincare::TimeOneMap unforced_map() {
    return poincare::TimeOneMap(duffing::make_system(duffing::DuffingParams::unforced(1), core::ImpulseSchedule({0.5}),
                                                     {duffing::ImpulseEntry::constant_shift(0.0)}));
}

Verdict rotation_oracle(unsigned threads) {
    const auto ch = chart::compute_reference(1);
    const auto map = unforced_map();
    double worst = 0.0;
    for (double a : {1.5, 2.5, 4.0, 6.0}) {
        const auto est = diagnostics::rotation_number(map, ch, 1.0, {a, 0.0}, 4096);
        const double f = 1.0 / oracle::period_at_amplitude(1, a);
        worst = std::max(worst, circ(est.omega, f));
        if (est.winding_measured) worst = std::max(worst, std::abs(est.omega_lift - f));
    }

    auto ladder = [&](double A) {
        std::vector<poincare::Point> seeds;
        for (int i = 0; i < 16; ++i)
            seeds.push_back(chart::rescale_out(1, A, ch.from_action_angle({1.0 + 3.0 * i / 15.0, 0.0})));
        return seeds;
    };
    const auto unforced = diagnostics::twist_profile(map, ch, 10.0, ladder(10.0), 4096, threads);

    const auto sc = cli::load_scenario(scenario("remark-2.1-basic"));
    const poincare::TimeOneMap kicked(sc.duffing_system(), sc.control);
    const double A_large = 50.0;
    const auto forced = diagnostics::twist_profile(kicked, ch, A_large, ladder(A_large), 4096, threads);
    auto range = [](const diagnostics::TwistProfile& p) {
        return p.points.back().rotation.omega_lift - p.points.front().rotation.omega_lift;
    };
    return {worst <= tol::rotation && unforced.monotone && forced.monotone,
            fmt::format("max |omega - 1/T(h)| = {:.2g} (<= {:g}); twist over lambda in [1,4]: unforced A=10 {} "
                        "(range {:.3f}), forced A={} {} (range {:.3f})",
                        worst, tol::rotation, unforced.monotone ? "monotone" : "NOT monotone", range(unforced), A_large,
                        forced.monotone ? "monotone" : "NOT monotone", range(forced))};
}

// ---- 10: boundedness and invariant circles ----

Verdict boundedness(unsigned threads) {
    const auto sc = cli::load_scenario(scenario("remark-2.1-basic"));
    const poincare::TimeOneMap map(sc.duffing_system(), sc.control);
    cli::GridSpec grid{-5.0, 5.0, -5.0, 5.0, 20, 20};
    const auto sweep = diagnostics::boundedness_sweep(map, grid.points(), 10000, sc.control.escape_radius, threads);
    std::size_t escapes = 0;
    for (const auto& o : sweep.outcomes) escapes += o.bounded ? 0 : 1;

    const auto ch = chart::compute_reference(1);
    std::vector<poincare::Point> seeds;
    for (int i = 0; i < 16; ++i)
        seeds.push_back(chart::rescale_out(1, sc.A, ch.from_action_angle({1.0 + 3.0 * i / 15.0, 0.0})));
    std::vector<diagnostics::CircleVerdict> v(seeds.size());
    parallel_for(seeds.size(), threads, [&](std::size_t i) {
        v[i] = diagnostics::invariant_circle_detect(map, ch, sc.A, seeds[i], 8192, tol::circle_residual);
    });
    std::size_t circles = 0;
    for (const auto& x : v) circles += x.kind == diagnostics::CircleKind::circle ? 1 : 0;
    const double frac = static_cast<double>(circles) / static_cast<double>(seeds.size());
    return {escapes == 0 && frac >= tol::circle_fraction,
            fmt::format("sweep 400 points x 1e4 iterates: {} escapes, max radius {:.3f}; circles {}/16 = {:.0f}% "
                        "(>= {:.0f}%) at residual {:g}, N = 8192, A = {}",
                        escapes, sweep.max_radius_bounded, circles, 100 * frac, 100 * tol::circle_fraction,
                        tol::circle_residual, sc.A)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria 1-10"};
    std::vector<int> only;
    unsigned threads = 0;
    app.add_option("--only", only, "criterion numbers to run")->delimiter(',');
    app.add_option("--threads", threads, "worker threads, 0 = all cores");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> all{
        {1, "closed-form impulsive solution", 1.0, closed_form_solution},
        {2, "non-continuability before the first impulse", 1.0, non_continuable},
        {3, "reference chart residual and period", 15.0, reference_chart},
        {4, "chart round trip and symplectic determinant", 60.0, chart_round_trip},
        {5, "area preservation of the time-one map", 30.0, area_preservation},
        {6, "smoothing rate on a lacunary C^0.6 signal", 10.0, smoothing_rate},
        {7, "perturbation scaling and frozen split bounds", 60.0, perturbation_scaling},
        {8, "jump smallness in action-angle variables", 60.0, [] { return jump_smallness(); }},
        {9, "rotation oracle and twist", 600.0, [threads] { return rotation_oracle(threads); }},
        {10, "boundedness and invariant circles", 600.0, [threads] { return boundedness(threads); }},
    };
    const std::set<int> selected(only.begin(), only.end());

    int failures = 0;
    for (const auto& c : all) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.time_limit;
        const bool pass = v.pass && in_time;
        failures += pass ? 0 : 1;
        fmt::print("{} {:>2} {}: {} [{:.2f}s, limit {:g}s{}]\n", pass ? "PASS" : "FAIL", c.id, c.title, v.detail, secs,
                   c.time_limit, in_time ? "" : ", EXCEEDED");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
