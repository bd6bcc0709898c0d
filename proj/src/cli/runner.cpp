#include "ikam/cli/runner.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>

#include "ikam/chart/reference_chart.hpp"
#include "ikam/chart/transforms.hpp"
#include "ikam/diagnostics/diagnostics.hpp"
#include "ikam/poincare/time_one_map.hpp"
#include "ikam/smoothing/smoothing.hpp"
#include "ikam/util/parallel.hpp"

namespace ikam::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct ValidationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double v) { return fmt::format("{:.17g}", v); }

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Collects output files; each is written in full or not at all.
class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& body, const std::string& note = {}) {
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoFailure("cannot write " + path.string());
        out << body;
        out.close();
        if (!out) throw IoFailure("cannot write " + path.string());
        rows_.push_back({name, true, note});
    }
    void write_json(const std::string& name, const json& doc) { write(name, doc.dump(2) + "\n"); }

    std::vector<ManifestRow>& rows() { return rows_; }

private:
    fs::path dir_;
    std::vector<ManifestRow> rows_;
};

struct Context {
    const Scenario& sc;
    const RunOptions& opt;
    Outputs& out;

    void require_duffing(const char* what) const {
        if (sc.system != SystemKind::duffing) throw ValidationFailure(fmt::format("{} needs a duffing scenario", what));
    }
    poincare::TimeOneMap map() const {
        require_duffing("the time-one map");
        return poincare::TimeOneMap(sc.duffing_system(), sc.control);
    }
    chart::ReferenceChart chart(int n, double tol) const {
        if (opt.chart_cache.empty()) return chart::compute_reference(n, tol);
        return chart::cached_reference(opt.chart_cache, n, tol);
    }
    std::vector<poincare::Point> ladder_seeds(const chart::ReferenceChart& ch) const {
        std::vector<poincare::Point> seeds;
        for (double lam : sc.ladder.lambdas())
            seeds.push_back(chart::rescale_out(ch.n(), sc.A, ch.from_action_angle({lam, sc.ladder.theta})));
        return seeds;
    }
};

template <std::size_t Dim>
void simulate_system(Context& c, const core::ImpulsiveSystem<Dim>& sys, const std::vector<const char*>& names) {
    const auto& s = c.sc.simulate;
    core::State<Dim> u0{};
    for (std::size_t i = 0; i < Dim; ++i) u0[i] = s.initial[i];
    const auto traj = core::solve_ivp<Dim>(sys, s.tau, u0, {s.t_min, s.t_max}, c.sc.control);

    auto header = [&](std::string first) {
        for (const char* n : names) first += std::string(",") + n;
        return first + "\n";
    };
    auto row = [&](double t, const core::State<Dim>& u) {
        std::string r = num(t);
        for (double v : u) r += "," + num(v);
        return r + "\n";
    };

    std::string body = header("t");
    std::size_t written = 0;
    for (int i = 0; i < s.samples; ++i) {
        const double t = s.t_min + (s.t_max - s.t_min) * i / (s.samples - 1);
        if (!traj.contains(t)) continue;
        body += row(t, traj(t));
        ++written;
    }
    c.out.write("trajectory.csv", body);

    std::string jumps = "index,t";
    for (const char* n : names) jumps += std::string(",pre_") + n;
    for (const char* n : names) jumps += std::string(",post_") + n;
    jumps += "\n";
    for (const auto& j : traj.jumps()) {
        jumps += fmt::format("{},{}", j.index, num(j.t));
        for (double v : j.pre) jumps += "," + num(v);
        for (double v : j.post) jumps += "," + num(v);
        jumps += "\n";
    }
    c.out.write("jumps.csv", jumps);

    if (!s.probes.empty()) {
        std::string probes = header("t,defined");
        for (double t : s.probes) {
            if (traj.contains(t)) {
                probes += fmt::format("{},1", num(t));
                for (double v : traj(t)) probes += "," + num(v);
            } else {
                probes += fmt::format("{},0", num(t));
                for (std::size_t i = 0; i < Dim; ++i) probes += ",nan";
            }
            probes += "\n";
        }
        c.out.write("probes.csv", probes);
    }

    auto endpoint = [](const core::Endpoint& e) {
        return json{{"t", e.t},
                    {"closed", e.closed},
                    {"reason", core::to_string(e.reason)},
                    {"radius_exceeded", e.radius_exceeded},
                    {"step_underflow", e.step_underflow}};
    };
    c.out.write_json("simulate.json", json{{"left", endpoint(traj.left())},
                                           {"right", endpoint(traj.right())},
                                           {"jumps", traj.jumps().size()},
                                           {"samples_written", written}});
}

void cmd_simulate(Context& c) {
    if (c.sc.system == SystemKind::riccati)
        simulate_system<1>(c, c.sc.riccati_system(), {"u"});
    else
        simulate_system<2>(c, c.sc.duffing_system(), {"x", "y"});
}

void cmd_poincare(Context& c) {
    const auto map = c.map();
    const auto& p = c.sc.poincare;
    if (p.seed) {
        const auto orbit = map.iterate(*p.seed, p.horizon);
        std::string body = "k,x,y\n";
        for (std::size_t k = 0; k < orbit.points.size(); ++k)
            body += fmt::format("{},{},{}\n", k, num(orbit.points[k][0]), num(orbit.points[k][1]));
        c.out.write("section.csv", body);
        json doc{{"mode", "orbit"}, {"horizon", p.horizon}, {"iterates", orbit.points.size() - 1},
                 {"truncated", orbit.truncated}};
        doc["escape_index"] = orbit.escape_index ? json(*orbit.escape_index) : json(nullptr);
        c.out.write_json("poincare.json", doc);
        return;
    }
    const auto pts = p.grid.points();
    std::vector<poincare::MapResult> res(pts.size());
    parallel_for(pts.size(), c.opt.threads, [&](std::size_t i) { res[i] = map.evaluate(pts[i]); });
    std::string body = "i,x0,y0,x1,y1,escaped,t\n";
    std::size_t escaped = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        body += fmt::format("{},{},{},{},{},{},{}\n", i, num(pts[i][0]), num(pts[i][1]), num(res[i].state[0]),
                            num(res[i].state[1]), res[i].escaped ? 1 : 0, num(res[i].t));
        escaped += res[i].escaped ? 1 : 0;
    }
    c.out.write("section.csv", body);
    c.out.write_json("poincare.json", json{{"mode", "grid"}, {"points", pts.size()}, {"escaped", escaped}});
}

void cmd_area_check(Context& c) {
    const auto map = c.map();
    const auto& a = c.sc.area_check;
    const auto pts = a.grid.points();
    struct Row {
        poincare::JacobianRecord var, fd;
    };
    std::vector<Row> rows(pts.size());
    parallel_for(pts.size(), c.opt.threads, [&](std::size_t i) {
        rows[i].var = map.jacobian(pts[i], poincare::JacobianMethod::variational);
        rows[i].fd = map.jacobian(pts[i], poincare::JacobianMethod::finite_difference, a.fd_step);
    });
    std::string body = "x,y,det,det_fd,max_entry_diff,escaped\n";
    double worst_det = 0.0, worst_diff = 0.0;
    std::size_t escaped = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& r = rows[i];
        double diff = 0.0;
        for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l) diff = std::max(diff, std::abs(r.var.matrix[k][l] - r.fd.matrix[k][l]));
        const bool esc = r.var.escaped || r.fd.escaped;
        body += fmt::format("{},{},{},{},{},{}\n", num(pts[i][0]), num(pts[i][1]), num(r.var.determinant),
                            num(r.fd.determinant), num(diff), esc ? 1 : 0);
        if (esc) {
            ++escaped;
            continue;
        }
        worst_det = std::max(worst_det, std::abs(r.var.determinant - 1.0));
        worst_diff = std::max(worst_diff, diff);
    }
    c.out.write("area_check.csv", body);

    // area identity of each impulse: 0 or -2 everywhere for compliant impulses
    json impulses = json::array();
    bool compliant = true;
    for (std::size_t k = 0; k < c.sc.impulses.size(); ++k) {
        const auto& e = c.sc.impulses[k];
        double dev = 0.0, lo = INFINITY, hi = -INFINITY;
        for (const auto& p : pts) {
            const double v = duffing::area_identity(e, p);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            dev = std::max(dev, std::min(std::abs(v), std::abs(v + 2.0)));
        }
        const bool ok = dev <= 1e-6;
        compliant = compliant && ok;
        impulses.push_back(json{{"slot", k},
                                {"kind", e.tag()},
                                {"min", lo},
                                {"max", hi},
                                {"distance_to_0_or_minus2", dev},
                                {"satisfied", ok}});
    }
    c.out.write_json("area_check.json", json{{"points", pts.size()},
                                             {"escaped", escaped},
                                             {"max_abs_det_minus_one", worst_det},
                                             {"max_entry_diff_fd", worst_diff},
                                             {"fd_step", a.fd_step},
                                             {"area_identity", impulses},
                                             {"area_identity_satisfied", compliant}});
}

void cmd_aa_roundtrip(Context& c) {
    const auto& spec = c.sc.roundtrip;
    json reports = json::array();
    std::string body = "n,T0_quadrature,T0_return,T0_difference,energy_residual,roundtrip_max,det_max\n";
    for (int n : spec.n) {
        const auto ch = c.chart(n, spec.tol);
        std::mt19937_64 rng(spec.seed);
        std::uniform_real_distribution<double> L(1.0, 4.0), T(0.0, 1.0);
        double rt = 0.0;
        for (int i = 0; i < spec.points; ++i) {
            const chart::ActionAngle p{L(rng), T(rng)};
            const auto b = ch.to_action_angle(ch.from_action_angle(p));
            double dth = b.theta - p.theta;
            dth -= std::round(dth);
            rt = std::max({rt, std::abs(b.lambda - p.lambda), std::abs(dth)});
        }
        const double h = 1e-5;
        double det = 0.0;
        const int g = spec.det_grid;
        for (int i = 0; i < g; ++i)
            for (int k = 0; k < g; ++k) {
                const double lam = g == 1 ? 2.5 : 1.0 + 3.0 * i / (g - 1), th = static_cast<double>(k) / g;
                const auto tp = ch.from_action_angle({lam, th + h}), tm = ch.from_action_angle({lam, th - h});
                const auto lp = ch.from_action_angle({lam + h, th}), lm = ch.from_action_angle({lam - h, th});
                const double xt = (tp[0] - tm[0]) / (2 * h), yt = (tp[1] - tm[1]) / (2 * h);
                const double xl = (lp[0] - lm[0]) / (2 * h), yl = (lp[1] - lm[1]) / (2 * h);
                det = std::max(det, std::abs(xt * yl - xl * yt - 1.0));
            }
        const double dT = std::abs(ch.T0_quadrature() - ch.T0_return());
        body += fmt::format("{},{},{},{},{},{},{}\n", n, num(ch.T0_quadrature()), num(ch.T0_return()), num(dT),
                            num(ch.energy_residual()), num(rt), num(det));
        reports.push_back(json{{"n", n},
                               {"nodes", ch.nodes()},
                               {"T0_quadrature", ch.T0_quadrature()},
                               {"T0_return", ch.T0_return()},
                               {"T0_difference", dT},
                               {"energy_residual", ch.energy_residual()},
                               {"roundtrip_points", spec.points},
                               {"roundtrip_max", rt},
                               {"det_grid", g},
                               {"det_max_abs_minus_one", det}});
    }
    c.out.write("aa_roundtrip.csv", body);
    c.out.write_json("aa_roundtrip.json", json{{"tol", spec.tol}, {"charts", reports}});
}

void cmd_smooth_rate(Context& c) {
    const auto& s = c.sc.smooth_rate;
    duffing::CoefficientSignal f;
    double gamma = s.gamma;
    std::string label;
    if (s.coefficient) {
        c.require_duffing("smooth-rate on a coefficient");
        f = c.sc.params.coefficients[static_cast<std::size_t>(*s.coefficient)];
        gamma = f.holder_exponent();
        label = fmt::format("p_{}", *s.coefficient);
    } else {
        f = duffing::CoefficientSignal::lacunary(gamma);
        label = "lacunary";
    }
    std::string body = "sigma,sup_error,strip_bound\n";
    std::vector<double> ls, le;
    for (int k = s.k_min; k <= s.k_max; ++k) {
        const double sigma = std::exp2(-k);
        smoothing::AnalyticApproximation g;
        try {
            g = smoothing::smooth(f, sigma);
        } catch (const smoothing::InsufficientResolution& e) {
            throw ValidationFailure(e.what());
        }
        const double err = smoothing::sup_error(g, f, s.points);
        body += fmt::format("{},{},{}\n", num(sigma), num(err), num(smoothing::strip_bound(g, sigma)));
        if (err > 0.0) {
            ls.push_back(std::log(sigma));
            le.push_back(std::log(err));
        }
    }
    c.out.write("smooth_rate.csv", body);
    json doc{{"signal", label}, {"gamma", gamma}, {"points", s.points}};
    doc["slope"] = ls.size() >= 2 ? json(ols_slope(ls, le)) : json(nullptr);
    c.out.write_json("smooth_rate.json", doc);
}

void cmd_rotation(Context& c) {
    const auto map = c.map();
    const auto ch = c.chart(c.sc.params.n, c.sc.chart_tol);
    const auto prof = diagnostics::twist_profile(map, ch, c.sc.A, c.ladder_seeds(ch), c.sc.rotation_N, c.opt.threads);
    std::string body = "lambda,x0,y0,omega,omega_lift,winding,winding_measured,indicator,iterates,ok\n";
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& p : prof.points) {
        const auto& r = p.rotation;
        body += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", num(p.lambda), num(p.seed[0]), num(p.seed[1]),
                            num(r.omega), num(r.omega_lift), r.winding, r.winding_measured ? 1 : 0,
                            num(r.convergence_indicator), r.iterates_used, p.ok ? 1 : 0);
        if (p.ok) {
            lo = std::min(lo, r.omega_lift);
            hi = std::max(hi, r.omega_lift);
        }
    }
    c.out.write("rotation.csv", body);
    json doc{{"A", c.sc.A}, {"N", c.sc.rotation_N}, {"seeds", prof.points.size()}, {"monotone", prof.monotone}};
    doc["omega_lift_range"] = lo <= hi ? json(hi - lo) : json(nullptr);
    c.out.write_json("rotation.json", doc);
}

void cmd_sweep(Context& c) {
    const auto map = c.map();
    const auto pts = c.sc.sweep.grid.points();
    const auto rep =
        diagnostics::boundedness_sweep(map, pts, c.sc.sweep.horizon, c.sc.control.escape_radius, c.opt.threads);
    std::string body = "x0,y0,bounded,max_radius,escape_index\n";
    std::size_t escapes = 0;
    for (const auto& o : rep.outcomes) {
        body += fmt::format("{},{},{},{},{}\n", num(o.start[0]), num(o.start[1]), o.bounded ? 1 : 0,
                            num(o.max_radius), o.escape_index ? std::to_string(*o.escape_index) : std::string());
        escapes += o.bounded ? 0 : 1;
    }
    c.out.write("sweep.csv", body);
    c.out.write_json("sweep.json", json{{"horizon", rep.horizon},
                                        {"points", pts.size()},
                                        {"escapes", escapes},
                                        {"fraction_bounded", rep.fraction_bounded},
                                        {"max_radius_bounded", rep.max_radius_bounded},
                                        {"escape_radius", c.sc.control.escape_radius}});
}

void cmd_detect(Context& c) {
    const auto map = c.map();
    const auto ch = c.chart(c.sc.params.n, c.sc.chart_tol);
    const auto seeds = c.ladder_seeds(ch);
    const auto lambdas = c.sc.ladder.lambdas();
    std::vector<diagnostics::CircleVerdict> v(seeds.size());
    parallel_for(seeds.size(), c.opt.threads, [&](std::size_t i) {
        v[i] = diagnostics::invariant_circle_detect(map, ch, c.sc.A, seeds[i], c.sc.detect_N, c.sc.residual_tol);
    });
    std::string body = "lambda,x0,y0,verdict,residual,omega,indicator,usable\n";
    json verdicts = json::array();
    std::size_t circles = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        body += fmt::format("{},{},{},{},{},{},{},{}\n", num(lambdas[i]), num(seeds[i][0]), num(seeds[i][1]),
                            diagnostics::to_string(v[i].kind), num(v[i].residual), num(v[i].rotation.omega),
                            num(v[i].rotation.convergence_indicator), v[i].usable);
        circles += v[i].kind == diagnostics::CircleKind::circle ? 1 : 0;
        verdicts.push_back(json{{"lambda", lambdas[i]},
                                {"seed", {seeds[i][0], seeds[i][1]}},
                                {"verdict", diagnostics::to_string(v[i].kind)},
                                {"residual", v[i].residual},
                                {"omega", v[i].rotation.omega},
                                {"convergence_indicator", v[i].rotation.convergence_indicator},
                                {"usable_iterates", v[i].usable},
                                {"escaped", v[i].escaped},
                                {"coefficients", v[i].coefficients}});
    }
    c.out.write("detect.csv", body);
    c.out.write_json("detect.json",
                     json{{"A", c.sc.A},
                          {"N", c.sc.detect_N},
                          {"residual_tol", c.sc.residual_tol},
                          {"seeds", seeds.size()},
                          {"circles", circles},
                          {"circle_fraction", seeds.empty() ? 0.0 : static_cast<double>(circles) / seeds.size()},
                          {"verdicts", verdicts}});
}

const std::map<std::string, std::function<void(Context&)>>& table() {
    static const std::map<std::string, std::function<void(Context&)>> t{
        {"simulate", cmd_simulate},     {"poincare", cmd_poincare},   {"area-check", cmd_area_check},
        {"aa-roundtrip", cmd_aa_roundtrip}, {"smooth-rate", cmd_smooth_rate}, {"rotation", cmd_rotation},
        {"sweep", cmd_sweep},           {"detect", cmd_detect}};
    return t;
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> s{"simulate", "poincare",    "area-check", "aa-roundtrip",
                                            "smooth-rate", "rotation", "sweep",      "detect"};
    return s;
}

std::optional<std::pair<int, int>> parse_grid(const std::string& text) {
    auto to_int = [](const std::string& s) -> std::optional<int> {
        if (s.empty() || s.size() > 6) return std::nullopt;
        for (char ch : s)
            if (ch < '0' || ch > '9') return std::nullopt;
        const int v = std::stoi(s);
        return v >= 1 ? std::optional<int>(v) : std::nullopt;
    };
    const auto x = text.find_first_of("xX");
    if (x == std::string::npos) {
        const auto v = to_int(text);
        if (!v) return std::nullopt;
        return std::pair{*v, *v};
    }
    const auto a = to_int(text.substr(0, x)), b = to_int(text.substr(x + 1));
    if (!a || !b) return std::nullopt;
    return std::pair{*a, *b};
}

Scenario apply_overrides(Scenario sc, const std::string& subcommand, const RunOptions& o) {
    if (o.horizon) {
        sc.sweep.horizon = *o.horizon;
        sc.poincare.horizon = *o.horizon;
    }
    if (o.grid) {
        GridSpec* g = subcommand == "poincare"     ? &sc.poincare.grid
                      : subcommand == "area-check" ? &sc.area_check.grid
                      : subcommand == "sweep"      ? &sc.sweep.grid
                                                   : nullptr;
        if (g) {
            g->nx = o.grid->first;
            g->ny = o.grid->second;
        }
        if (subcommand == "aa-roundtrip") sc.roundtrip.det_grid = o.grid->first;
    }
    if (o.tol) {
        sc.control.rtol = *o.tol;
        sc.control.atol = *o.tol * 1e-2;
    }
    return sc;
}

RunResult run(const std::string& subcommand, const Scenario& scenario_in, const RunOptions& options) {
    RunResult res;
    const auto it = table().find(subcommand);
    if (it == table().end()) {
        res.exit_code = exit_validation;
        res.message = "unknown subcommand '" + subcommand + "'";
        return res;
    }
    if (options.tol && !(*options.tol > 0.0)) {
        res.exit_code = exit_validation;
        res.message = "--tol must be positive";
        return res;
    }
    if (options.horizon && *options.horizon < 1) {
        res.exit_code = exit_validation;
        res.message = "--horizon must be >= 1";
        return res;
    }
    const Scenario sc = apply_overrides(scenario_in, subcommand, options);

    std::error_code ec;
    fs::create_directories(options.out_dir, ec);
    if (ec) {
        res.exit_code = exit_io;
        res.message = "cannot create " + options.out_dir.string() + ": " + ec.message();
        return res;
    }

    Outputs out(options.out_dir);
    Context ctx{sc, options, out};
    try {
        it->second(ctx);
    } catch (const ValidationFailure& e) {
        res.exit_code = exit_validation;
        res.message = e.what();
    } catch (const IoFailure& e) {
        res.exit_code = exit_io;
        res.message = e.what();
    } catch (const std::exception& e) {
        res.exit_code = exit_numerical;
        res.message = e.what();
    }
    if (res.exit_code != exit_ok) out.rows().push_back({"-", false, subcommand + " did not finish: " + res.message});
    res.files = out.rows();
    try {
        append_manifest(options.out_dir, sc, subcommand, res.files);
    } catch (const std::exception& e) {
        if (res.exit_code == exit_ok) {
            res.exit_code = exit_io;
            res.message = e.what();
        }
    }
    return res;
}

}  // namespace ikam::cli
