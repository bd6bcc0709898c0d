#include "ikam/cli/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <fmt/format.h>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace ikam::cli {

const char* to_string(IssueKind k) {
    switch (k) {
        case IssueKind::parse: return "parse error";
        case IssueKind::range: return "range violation";
        case IssueKind::condition_H: return "condition (H) violation";
    }
    return "?";
}

std::string Issue::describe() const { return fmt::format("{}: {}: {}", to_string(kind), path, message); }

namespace {

std::string join_issues(const std::vector<Issue>& issues) {
    std::string s = fmt::format("scenario rejected ({} issue{})", issues.size(), issues.size() == 1 ? "" : "s");
    for (const auto& i : issues) s += "\n  " + i.describe();
    return s;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<Issue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

bool ScenarioError::has(IssueKind k) const {
    for (const auto& i : issues_)
        if (i.kind == k) return true;
    return false;
}

std::vector<duffing::Point> GridSpec::points() const {
    std::vector<duffing::Point> out;
    out.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
    auto lerp = [](double a, double b, int i, int m) { return m == 1 ? 0.5 * (a + b) : a + (b - a) * i / (m - 1); };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) out.push_back({lerp(x_min, x_max, i, nx), lerp(y_min, y_max, j, ny)});
    return out;
}

std::vector<double> SeedLadder::lambdas() const {
    std::vector<double> out;
    for (int i = 0; i < count; ++i)
        out.push_back(count == 1 ? lambda_min : lambda_min + (lambda_max - lambda_min) * i / (count - 1));
    return out;
}

core::ImpulsiveSystem<2> Scenario::duffing_system() const {
    return duffing::make_system(params, core::ImpulseSchedule(schedule), impulses);
}

core::ImpulsiveSystem<1> Scenario::riccati_system() const {
    core::ImpulsiveSystem<1> s;
    s.field = [](double, const core::State<1>& u) { return core::State<1>{1.0 + u[0] * u[0]}; };
    s.field_jacobian = [](double, const core::State<1>& u) { return core::Matrix<1>{{{2.0 * u[0]}}}; };
    s.schedule = core::ImpulseSchedule(schedule, period);
    const double c = jump;
    for (std::size_t i = 0; i < schedule.size(); ++i)
        s.jumps.push_back({[c](const core::State<1>&) { return core::State<1>{c}; },
                           [](const core::State<1>&) { return core::Matrix<1>{}; }});
    return s;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

// ---- expressions ----

namespace {

class ExprParser {
public:
    explicit ExprParser(const std::string& s) : s_(s) {}

    std::optional<double> parse() {
        auto v = sum();
        skip();
        if (!v || pos_ != s_.size()) return std::nullopt;
        return v;
    }

private:
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    std::optional<double> sum() {
        auto v = product();
        while (v) {
            if (eat('+')) {
                auto r = product();
                if (!r) return std::nullopt;
                *v += *r;
            } else if (eat('-')) {
                auto r = product();
                if (!r) return std::nullopt;
                *v -= *r;
            } else {
                break;
            }
        }
        return v;
    }
    std::optional<double> product() {
        auto v = unary();
        while (v) {
            if (eat('*')) {
                auto r = unary();
                if (!r) return std::nullopt;
                *v *= *r;
            } else if (eat('/')) {
                auto r = unary();
                if (!r) return std::nullopt;
                *v /= *r;
            } else {
                skip();
                // implicit product such as "3pi" or "2(pi)"
                if (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '(')) {
                    auto r = unary();
                    if (!r) return std::nullopt;
                    *v *= *r;
                } else {
                    break;
                }
            }
        }
        return v;
    }
    std::optional<double> unary() {
        if (eat('-')) {
            auto v = unary();
            if (v) *v = -*v;
            return v;
        }
        if (eat('+')) return unary();
        return atom();
    }
    std::optional<double> atom() {
        skip();
        if (eat('(')) {
            auto v = sum();
            if (!v || !eat(')')) return std::nullopt;
            return v;
        }
        if (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
            std::size_t end = pos_;
            while (end < s_.size() && std::isalpha(static_cast<unsigned char>(s_[end]))) ++end;
            const std::string id = s_.substr(pos_, end - pos_);
            pos_ = end;
            if (id == "pi") return std::numbers::pi;
            return std::nullopt;
        }
        const char* begin = s_.c_str() + pos_;
        char* stop = nullptr;
        const double v = std::strtod(begin, &stop);
        if (stop == begin) return std::nullopt;
        pos_ += static_cast<std::size_t>(stop - begin);
        return v;
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

std::optional<double> parse_real_expression(const std::string& text) {
    const auto v = ExprParser(text).parse();
    if (!v || !std::isfinite(*v)) return std::nullopt;
    return v;
}

// ---- loading ----

namespace {

using duffing::CoefficientSignal;
using duffing::ImpulseEntry;

class Reader {
public:
    std::vector<Issue> issues;

    void fail(IssueKind k, const std::string& path, const std::string& msg) { issues.push_back({k, path, msg}); }

    void keys(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> allowed) {
        if (!node.IsMap()) {
            fail(IssueKind::parse, path, "expected a mapping");
            return;
        }
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& kv : node) {
            const auto key = kv.first.as<std::string>();
            if (!ok.count(key)) fail(IssueKind::parse, join(path, key), "unknown field");
        }
    }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }
    static std::string index(const std::string& path, std::size_t i) { return fmt::format("{}[{}]", path, i); }

    std::optional<double> real(const YAML::Node& node, const std::string& path) {
        if (!node.IsScalar()) {
            fail(IssueKind::parse, path, "expected a real number");
            return std::nullopt;
        }
        const auto v = parse_real_expression(node.Scalar());
        if (!v) fail(IssueKind::parse, path, fmt::format("cannot read '{}' as a real number", node.Scalar()));
        return v;
    }

    std::optional<long long> integer(const YAML::Node& node, const std::string& path) {
        if (node.IsScalar()) {
            const std::string& s = node.Scalar();
            std::size_t used = 0;
            try {
                const long long v = std::stoll(s, &used);
                if (used == s.size()) return v;
            } catch (const std::exception&) {
            }
        }
        fail(IssueKind::parse, path, "expected an integer");
        return std::nullopt;
    }

    std::optional<std::string> text(const YAML::Node& node, const std::string& path) {
        if (!node.IsScalar()) {
            fail(IssueKind::parse, path, "expected a string");
            return std::nullopt;
        }
        return node.Scalar();
    }

    std::optional<std::vector<double>> reals(const YAML::Node& node, const std::string& path) {
        if (!node.IsSequence()) {
            fail(IssueKind::parse, path, "expected a list of real numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        bool ok = true;
        for (std::size_t i = 0; i < node.size(); ++i) {
            const auto v = real(node[i], index(path, i));
            ok = ok && v.has_value();
            out.push_back(v.value_or(0.0));
        }
        if (!ok) return std::nullopt;
        return out;
    }

    // Optional fields: assign only when present and valid.
    void opt_real(const YAML::Node& parent, const char* key, const std::string& path, double& out) {
        if (const auto n = parent[key]) {
            if (const auto v = real(n, join(path, key))) out = *v;
        }
    }
    template <class I>
    void opt_int(const YAML::Node& parent, const char* key, const std::string& path, I& out) {
        if (const auto n = parent[key]) {
            if (const auto v = integer(n, join(path, key))) out = static_cast<I>(*v);
        }
    }

    void positive(double v, const std::string& path) {
        if (!(v > 0.0)) fail(IssueKind::range, path, fmt::format("must be positive, got {}", v));
    }
    void at_least(long long v, long long lo, const std::string& path) {
        if (v < lo) fail(IssueKind::range, path, fmt::format("must be >= {}, got {}", lo, v));
    }

    GridSpec grid(const YAML::Node& node, const std::string& path, GridSpec g) {
        keys(node, path, {"x", "y", "nx", "ny"});
        if (!node.IsMap()) return g;
        auto range = [&](const char* key, double& lo, double& hi) {
            if (const auto n = node[key]) {
                const auto v = reals(n, join(path, key));
                if (v && v->size() == 2) {
                    lo = (*v)[0];
                    hi = (*v)[1];
                    if (!(lo <= hi)) fail(IssueKind::range, join(path, key), "expected [min, max] with min <= max");
                } else if (v) {
                    fail(IssueKind::parse, join(path, key), "expected [min, max]");
                }
            }
        };
        range("x", g.x_min, g.x_max);
        range("y", g.y_min, g.y_max);
        opt_int(node, "nx", path, g.nx);
        opt_int(node, "ny", path, g.ny);
        at_least(g.nx, 1, join(path, "nx"));
        at_least(g.ny, 1, join(path, "ny"));
        return g;
    }

    std::optional<CoefficientSignal> coefficient(const YAML::Node& node, const std::string& path, int n,
                                                 std::vector<std::string>& warnings) {
        keys(node, path, {"kind", "value", "mean", "modes", "values", "gamma", "kmax", "amplitude", "class"});
        if (!node.IsMap()) return std::nullopt;
        const auto kind = node["kind"] ? text(node["kind"], join(path, "kind")) : std::optional<std::string>{};
        if (!node["kind"]) fail(IssueKind::parse, join(path, "kind"), "missing");
        if (!kind) return std::nullopt;

        double gamma = 1.0;
        opt_real(node, "gamma", path, gamma);
        if (!(gamma > 0.0 && gamma <= 1.0))
            fail(IssueKind::range, join(path, "gamma"), fmt::format("must lie in (0, 1], got {}", gamma));
        auto cls = duffing::SignalClass::holder;
        if (const auto c = node["class"]) {
            const auto s = text(c, join(path, "class"));
            if (s == "integrable")
                cls = duffing::SignalClass::integrable;
            else if (s && *s != "holder")
                fail(IssueKind::parse, join(path, "class"), "expected 'holder' or 'integrable'");
        }

        // exponent admissibility: gamma > 1 - 1/n
        if (cls == duffing::SignalClass::holder && gamma > 0.0) {
            const double bound = 1.0 - 1.0 / n;
            const double next = 1.0 - 1.0 / (n + 1);
            if (!(gamma > bound))
                fail(IssueKind::range, join(path, "gamma"),
                     fmt::format("gamma = {} violates gamma > 1 - 1/n = {:.6g} for n = {}", gamma, bound, n));
            else if (!(gamma > next))
                warnings.push_back(fmt::format(
                    "{}: gamma = {} satisfies gamma > 1 - 1/n = {:.6g} for n = {}; the same gamma would be rejected "
                    "for n = {} (bound {:.6g})",
                    join(path, "gamma"), gamma, bound, n, n + 1, next));
        } else if (cls == duffing::SignalClass::integrable) {
            warnings.push_back(join(path, "class") + ": integrable coefficient; the Holder hypothesis is not met");
        }

        if (*kind == "zero") return CoefficientSignal::zero();
        if (*kind == "constant") {
            if (!node["value"]) {
                fail(IssueKind::parse, join(path, "value"), "missing");
                return std::nullopt;
            }
            const auto v = real(node["value"], join(path, "value"));
            if (!v) return std::nullopt;
            return CoefficientSignal::constant(*v, gamma);
        }
        if (*kind == "fourier") {
            double mean = 0.0;
            opt_real(node, "mean", path, mean);
            std::vector<Harmonic> modes;
            if (const auto m = node["modes"]) {
                const std::string mp = join(path, "modes");
                if (!m.IsSequence()) {
                    fail(IssueKind::parse, mp, "expected a list of {q, a, b}");
                    return std::nullopt;
                }
                for (std::size_t i = 0; i < m.size(); ++i) {
                    const std::string ip = index(mp, i);
                    keys(m[i], ip, {"q", "a", "b"});
                    if (!m[i].IsMap()) continue;
                    Harmonic h{1, 0.0, 0.0};
                    if (!m[i]["q"]) {
                        fail(IssueKind::parse, join(ip, "q"), "missing");
                        continue;
                    }
                    if (const auto q = integer(m[i]["q"], join(ip, "q"))) {
                        at_least(*q, 1, join(ip, "q"));
                        h.q = static_cast<int>(*q);
                    }
                    opt_real(m[i], "a", ip, h.a);
                    opt_real(m[i], "b", ip, h.b);
                    modes.push_back(h);
                }
            }
            return CoefficientSignal::fourier(TrigSeries(mean, modes), gamma, cls);
        }
        if (*kind == "samples") {
            if (!node["values"]) {
                fail(IssueKind::parse, join(path, "values"), "missing");
                return std::nullopt;
            }
            const auto v = reals(node["values"], join(path, "values"));
            if (!v) return std::nullopt;
            if (v->empty()) {
                fail(IssueKind::range, join(path, "values"), "needs at least one sample");
                return std::nullopt;
            }
            return CoefficientSignal::from_samples(*v, gamma, cls);
        }
        if (*kind == "lacunary") {
            int kmax = 12;
            double amplitude = 1.0;
            opt_int(node, "kmax", path, kmax);
            opt_real(node, "amplitude", path, amplitude);
            at_least(kmax, 0, join(path, "kmax"));
            if (!node["gamma"]) fail(IssueKind::parse, join(path, "gamma"), "required for a lacunary signal");
            if (!(gamma > 0.0 && gamma <= 1.0) || kmax < 0) return std::nullopt;
            return CoefficientSignal::lacunary(gamma, kmax, amplitude);
        }
        fail(IssueKind::parse, join(path, "kind"),
             fmt::format("unknown coefficient kind '{}' (zero, constant, fourier, samples, lacunary)", *kind));
        return std::nullopt;
    }

    std::optional<ImpulseEntry> impulse(const YAML::Node& node, const std::string& path, int n) {
        keys(node, path, {"kind", "alpha", "beta", "phase", "power", "kappa"});
        if (!node.IsMap()) return std::nullopt;
        if (!node["kind"]) {
            fail(IssueKind::parse, join(path, "kind"), "missing");
            return std::nullopt;
        }
        const auto kind = text(node["kind"], join(path, "kind"));
        if (!kind) return std::nullopt;
        double alpha = 0.0;
        opt_real(node, "alpha", path, alpha);
        auto need_real = [&](const char* key) -> std::optional<double> {
            if (!node[key]) {
                fail(IssueKind::parse, join(path, key), "missing");
                return std::nullopt;
            }
            return real(node[key], join(path, key));
        };
        if (*kind == "constant-shift") return ImpulseEntry::constant_shift(alpha);
        if (*kind == "poly-kick") {
            std::vector<double> beta;
            if (const auto b = node["beta"]) {
                const auto v = reals(b, join(path, "beta"));
                if (!v) return std::nullopt;
                beta = *v;
            }
            if (beta.size() > static_cast<std::size_t>(n) + 1) {
                fail(IssueKind::range, join(path, "beta"),
                     fmt::format("polynomial degree {} exceeds n = {}", beta.size() - 1, n));
                return std::nullopt;
            }
            return ImpulseEntry::poly_kick(alpha, beta);
        }
        if (*kind == "sin-kick") {
            const auto beta = need_real("beta");
            double phase = 0.0;
            opt_real(node, "phase", path, phase);
            if (!beta) return std::nullopt;
            return ImpulseEntry::sin_kick(*beta, phase, alpha);
        }
        if (*kind == "gauss-kick") {
            const auto beta = need_real("beta");
            int power = 2;
            opt_int(node, "power", path, power);
            if (power != 2 && power != 4) {
                fail(IssueKind::range, join(path, "power"), fmt::format("must be 2 or 4, got {}", power));
                return std::nullopt;
            }
            if (!beta) return std::nullopt;
            return ImpulseEntry::gauss_kick(*beta, power, alpha);
        }
        if (*kind == "velocity-kick") {
            const auto kappa = need_real("kappa");
            if (!kappa) return std::nullopt;
            if (!(*kappa > -1.0)) {
                fail(IssueKind::range, join(path, "kappa"), "must exceed -1 so that the jump is invertible");
                return std::nullopt;
            }
            return ImpulseEntry::velocity_kick(*kappa, alpha);
        }
        fail(IssueKind::parse, join(path, "kind"),
             fmt::format("unknown impulse kind '{}' (constant-shift, poly-kick, sin-kick, gauss-kick, velocity-kick)",
                         *kind));
        return std::nullopt;
    }

    void schedule_order(const std::vector<double>& t, double period, bool open_left, const std::string& path) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            const bool low_ok = open_left ? t[i] > 0.0 : t[i] >= 0.0;
            if (!low_ok || !(t[i] < period))
                fail(IssueKind::condition_H, index(path, i),
                     fmt::format("impulse time {} outside {}0, {:.17g})", t[i], open_left ? "(" : "[", period));
            if (i > 0 && !(t[i] > t[i - 1]))
                fail(IssueKind::condition_H, index(path, i),
                     fmt::format("impulse times must increase strictly: t[{}] = {} <= t[{}] = {}", i, t[i], i - 1,
                                 t[i - 1]));
        }
    }
};

}  // namespace

Scenario parse_scenario(const std::string& text, const std::filesystem::path& source) {
    Reader r;
    Scenario sc;
    sc.source = source;
    sc.hash = fnv1a_hex(text);

    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ScenarioError({{IssueKind::parse, "<document>", e.what()}});
    }
    if (!root.IsMap()) throw ScenarioError({{IssueKind::parse, "<document>", "expected a mapping at top level"}});

    r.keys(root, "",
           {"name", "system", "n", "coefficients", "schedule", "period", "jump", "impulses", "A", "eps0",
            "tolerances", "chart", "simulate", "poincare", "area_check", "sweep", "ladder", "rotation", "detect",
            "aa_roundtrip", "smooth_rate"});

    if (const auto n = root["name"]) {
        if (const auto s = r.text(n, "name")) sc.name = *s;
    } else {
        r.fail(IssueKind::parse, "name", "missing");
    }

    if (const auto s = root["system"]) {
        const auto v = r.text(s, "system");
        if (v == "riccati")
            sc.system = SystemKind::riccati;
        else if (v && *v != "duffing")
            r.fail(IssueKind::parse, "system", fmt::format("unknown system '{}' (duffing, riccati)", *v));
    }

    // tolerances
    sc.control = ode::StepControl{};
    sc.control.escape_radius = 1e6;
    if (const auto t = root["tolerances"]) {
        r.keys(t, "tolerances", {"rtol", "atol", "escape_radius"});
        r.opt_real(t, "rtol", "tolerances", sc.control.rtol);
        r.opt_real(t, "atol", "tolerances", sc.control.atol);
        r.opt_real(t, "escape_radius", "tolerances", sc.control.escape_radius);
        r.positive(sc.control.rtol, "tolerances.rtol");
        r.positive(sc.control.atol, "tolerances.atol");
        r.positive(sc.control.escape_radius, "tolerances.escape_radius");
    }

    std::vector<double> times;
    if (const auto s = root["schedule"]) {
        if (const auto v = r.reals(s, "schedule")) times = *v;
    } else {
        r.fail(IssueKind::parse, "schedule", "missing");
    }
    sc.schedule = times;

    if (sc.system == SystemKind::riccati) {
        for (const char* key : {"n", "coefficients", "impulses"})
            if (root[key]) r.fail(IssueKind::parse, key, "not used by the riccati system");
        r.opt_real(root, "period", "", sc.period);
        r.positive(sc.period, "period");
        r.opt_real(root, "jump", "", sc.jump);
        if (times.empty()) r.fail(IssueKind::range, "schedule", "needs at least one impulse time");
        r.schedule_order(times, sc.period, false, "schedule");
    } else {
        if (root["period"]) r.fail(IssueKind::parse, "period", "the duffing system has unit period");
        if (root["jump"]) r.fail(IssueKind::parse, "jump", "not used by the duffing system");
        int n = 1;
        if (const auto nn = root["n"]) {
            if (const auto v = r.integer(nn, "n")) {
                if (*v < 1 || *v > 8)
                    r.fail(IssueKind::range, "n", fmt::format("must lie in [1, 8], got {}", *v));
                else
                    n = static_cast<int>(*v);
            }
        } else {
            r.fail(IssueKind::parse, "n", "missing");
        }
        sc.params = duffing::DuffingParams::unforced(n);
        if (const auto c = root["coefficients"]) {
            if (!c.IsSequence()) {
                r.fail(IssueKind::parse, "coefficients", "expected a list p_0, p_1, ...");
            } else {
                if (c.size() > static_cast<std::size_t>(2 * n + 1))
                    r.fail(IssueKind::range, "coefficients",
                           fmt::format("at most 2n+1 = {} coefficients, got {}", 2 * n + 1, c.size()));
                for (std::size_t i = 0; i < c.size() && i < static_cast<std::size_t>(2 * n + 1); ++i)
                    if (auto s = r.coefficient(c[i], Reader::index("coefficients", i), n, sc.warnings))
                        sc.params.coefficients[i] = std::move(*s);
            }
        }
        if (times.empty()) r.fail(IssueKind::range, "schedule", "needs at least one impulse time");
        r.schedule_order(times, 1.0, true, "schedule");
        if (const auto im = root["impulses"]) {
            if (!im.IsSequence()) {
                r.fail(IssueKind::parse, "impulses", "expected a list");
            } else {
                for (std::size_t i = 0; i < im.size(); ++i)
                    if (auto e = r.impulse(im[i], Reader::index("impulses", i), n)) sc.impulses.push_back(*e);
                if (im.size() != times.size())
                    r.fail(IssueKind::range, "impulses",
                           fmt::format("{} impulses for {} impulse times", im.size(), times.size()));
            }
        } else {
            r.fail(IssueKind::parse, "impulses", "missing");
        }
        r.opt_real(root, "A", "", sc.A);
        r.positive(sc.A, "A");
        if (const auto e = root["eps0"]) {
            if (const auto v = r.real(e, "eps0")) {
                sc.eps0 = *v;
                r.positive(*v, "eps0");
            }
        }
    }

    if (const auto c = root["chart"]) {
        r.keys(c, "chart", {"tol"});
        r.opt_real(c, "tol", "chart", sc.chart_tol);
        r.positive(sc.chart_tol, "chart.tol");
    }

    // subcommand settings
    auto& sim = sc.simulate;
    sim.initial.assign(sc.system == SystemKind::riccati ? 1 : 2, 0.0);
    if (const auto s = root["simulate"]) {
        r.keys(s, "simulate", {"tau", "initial", "t_span", "samples", "probes"});
        r.opt_real(s, "tau", "simulate", sim.tau);
        if (const auto i = s["initial"]) {
            if (const auto v = r.reals(i, "simulate.initial")) {
                if (v->size() != sim.initial.size())
                    r.fail(IssueKind::range, "simulate.initial",
                           fmt::format("expected {} components, got {}", sim.initial.size(), v->size()));
                else
                    sim.initial = *v;
            }
        }
        if (const auto t = s["t_span"]) {
            const auto v = r.reals(t, "simulate.t_span");
            if (v && v->size() == 2) {
                sim.t_min = (*v)[0];
                sim.t_max = (*v)[1];
            } else if (v) {
                r.fail(IssueKind::parse, "simulate.t_span", "expected [a, b]");
            }
        }
        r.opt_int(s, "samples", "simulate", sim.samples);
        if (const auto p = s["probes"])
            if (const auto v = r.reals(p, "simulate.probes")) sim.probes = *v;
    }
    if (!(sim.t_min <= sim.tau && sim.tau <= sim.t_max))
        r.fail(IssueKind::range, "simulate.tau", "must lie inside t_span");
    r.at_least(sim.samples, 2, "simulate.samples");

    if (const auto p = root["poincare"]) {
        r.keys(p, "poincare", {"seed", "horizon", "grid"});
        if (const auto s = p["seed"]) {
            const auto v = r.reals(s, "poincare.seed");
            if (v && v->size() == 2)
                sc.poincare.seed = duffing::Point{(*v)[0], (*v)[1]};
            else if (v)
                r.fail(IssueKind::parse, "poincare.seed", "expected [x, y]");
        }
        r.opt_int(p, "horizon", "poincare", sc.poincare.horizon);
        if (const auto g = p["grid"]) sc.poincare.grid = r.grid(g, "poincare.grid", sc.poincare.grid);
    }
    if (const auto a = root["area_check"]) {
        r.keys(a, "area_check", {"grid", "fd_step"});
        if (const auto g = a["grid"]) sc.area_check.grid = r.grid(g, "area_check.grid", sc.area_check.grid);
        r.opt_real(a, "fd_step", "area_check", sc.area_check.fd_step);
        r.positive(sc.area_check.fd_step, "area_check.fd_step");
    }
    if (const auto s = root["sweep"]) {
        r.keys(s, "sweep", {"grid", "horizon"});
        if (const auto g = s["grid"]) sc.sweep.grid = r.grid(g, "sweep.grid", sc.sweep.grid);
        long long h = static_cast<long long>(sc.sweep.horizon);
        r.opt_int(s, "horizon", "sweep", h);
        r.at_least(h, 1, "sweep.horizon");
        sc.sweep.horizon = static_cast<std::size_t>(std::max(1LL, h));
    }
    if (const auto l = root["ladder"]) {
        r.keys(l, "ladder", {"lambda", "count", "theta"});
        if (const auto lam = l["lambda"]) {
            const auto v = r.reals(lam, "ladder.lambda");
            if (v && v->size() == 2) {
                sc.ladder.lambda_min = (*v)[0];
                sc.ladder.lambda_max = (*v)[1];
                if (!(0.0 < sc.ladder.lambda_min && sc.ladder.lambda_min <= sc.ladder.lambda_max))
                    r.fail(IssueKind::range, "ladder.lambda", "expected 0 < min <= max");
            } else if (v) {
                r.fail(IssueKind::parse, "ladder.lambda", "expected [min, max]");
            }
        }
        r.opt_int(l, "count", "ladder", sc.ladder.count);
        r.at_least(sc.ladder.count, 1, "ladder.count");
        r.opt_real(l, "theta", "ladder", sc.ladder.theta);
    }
    if (const auto ro = root["rotation"]) {
        r.keys(ro, "rotation", {"N"});
        long long N = static_cast<long long>(sc.rotation_N);
        r.opt_int(ro, "N", "rotation", N);
        r.at_least(N, 2, "rotation.N");
        sc.rotation_N = static_cast<std::size_t>(std::max(2LL, N));
    }
    if (const auto d = root["detect"]) {
        r.keys(d, "detect", {"N", "residual_tol"});
        long long N = static_cast<long long>(sc.detect_N);
        r.opt_int(d, "N", "detect", N);
        r.at_least(N, 512, "detect.N");
        sc.detect_N = static_cast<std::size_t>(std::max(512LL, N));
        r.opt_real(d, "residual_tol", "detect", sc.residual_tol);
        r.positive(sc.residual_tol, "detect.residual_tol");
    }
    if (const auto a = root["aa_roundtrip"]) {
        r.keys(a, "aa_roundtrip", {"n", "tol", "points", "det_grid", "seed"});
        if (const auto nn = a["n"]) {
            if (!nn.IsSequence()) {
                r.fail(IssueKind::parse, "aa_roundtrip.n", "expected a list of integers");
            } else {
                sc.roundtrip.n.clear();
                for (std::size_t i = 0; i < nn.size(); ++i)
                    if (const auto v = r.integer(nn[i], Reader::index("aa_roundtrip.n", i))) {
                        r.at_least(*v, 1, Reader::index("aa_roundtrip.n", i));
                        sc.roundtrip.n.push_back(static_cast<int>(*v));
                    }
            }
        }
        r.opt_real(a, "tol", "aa_roundtrip", sc.roundtrip.tol);
        r.positive(sc.roundtrip.tol, "aa_roundtrip.tol");
        r.opt_int(a, "points", "aa_roundtrip", sc.roundtrip.points);
        r.at_least(sc.roundtrip.points, 1, "aa_roundtrip.points");
        r.opt_int(a, "det_grid", "aa_roundtrip", sc.roundtrip.det_grid);
        r.at_least(sc.roundtrip.det_grid, 1, "aa_roundtrip.det_grid");
        r.opt_int(a, "seed", "aa_roundtrip", sc.roundtrip.seed);
    }
    if (const auto s = root["smooth_rate"]) {
        r.keys(s, "smooth_rate", {"coefficient", "gamma", "k_min", "k_max", "points"});
        if (const auto c = s["coefficient"]) {
            if (const auto v = r.integer(c, "smooth_rate.coefficient")) {
                if (*v < 0 || *v >= static_cast<long long>(sc.params.coefficients.size()))
                    r.fail(IssueKind::range, "smooth_rate.coefficient", "no such coefficient");
                else
                    sc.smooth_rate.coefficient = static_cast<int>(*v);
            }
        }
        r.opt_real(s, "gamma", "smooth_rate", sc.smooth_rate.gamma);
        if (!(sc.smooth_rate.gamma > 0.0 && sc.smooth_rate.gamma <= 1.0))
            r.fail(IssueKind::range, "smooth_rate.gamma", "must lie in (0, 1]");
        r.opt_int(s, "k_min", "smooth_rate", sc.smooth_rate.k_min);
        r.opt_int(s, "k_max", "smooth_rate", sc.smooth_rate.k_max);
        if (!(0 <= sc.smooth_rate.k_min && sc.smooth_rate.k_min < sc.smooth_rate.k_max))
            r.fail(IssueKind::range, "smooth_rate", "expected 0 <= k_min < k_max");
        r.opt_int(s, "points", "smooth_rate", sc.smooth_rate.points);
        r.at_least(sc.smooth_rate.points, 2, "smooth_rate.points");
    }

    if (!r.issues.empty()) throw ScenarioError(std::move(r.issues));
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read scenario file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path);
}

}  // namespace ikam::cli
