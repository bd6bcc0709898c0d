#include "ikam/duffing/model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ikam::duffing {

DuffingParams DuffingParams::unforced(int n) {
    DuffingParams p;
    p.n = n;
    p.coefficients.assign(static_cast<std::size_t>(2 * n + 1), CoefficientSignal::zero());
    return p;
}

void DuffingParams::validate() const {
    if (n < 1) throw std::invalid_argument("DuffingParams: n must be >= 1");
    if (coefficients.size() != static_cast<std::size_t>(2 * n + 1))
        throw std::invalid_argument("DuffingParams: expected 2n+1 = " + std::to_string(2 * n + 1) + " coefficients, got " +
                                    std::to_string(coefficients.size()));
}

Point duffing_field(const DuffingParams& params, double t, const Point& s) {
    const double x = s[0];
    double force = std::pow(x, 2 * params.n + 1);
    double xi = 1.0;
    for (const auto& p : params.coefficients) {
        if (!p.is_zero()) force += p(t) * xi;
        xi *= x;
    }
    return {s[1], -force};
}

double h0_energy(int n, const Point& s) {
    return std::pow(s[0], 2 * n + 2) / (2.0 * (n + 1)) + 0.5 * s[1] * s[1];
}

namespace {

// Precomputed view of the nonzero coefficients, shared by the closures.
struct FieldData {
    int n = 1;
    std::vector<std::pair<int, CoefficientSignal>> terms;
};

}  // namespace

core::ImpulsiveSystem<2> make_system(const DuffingParams& params, const core::ImpulseSchedule& schedule,
                                     const std::vector<ImpulseEntry>& impulses) {
    params.validate();
    auto data = std::make_shared<FieldData>();
    data->n = params.n;
    for (std::size_t i = 0; i < params.coefficients.size(); ++i)
        if (!params.coefficients[i].is_zero()) data->terms.emplace_back(static_cast<int>(i), params.coefficients[i]);

    core::ImpulsiveSystem<2> sys;
    sys.field = [data](double t, const core::State<2>& u) {
        const double x = u[0];
        const double x2 = x * x;
        double xp = x;  // x^{2n+1}
        for (int i = 0; i < data->n; ++i) xp *= x2;
        double force = xp;
        for (const auto& [i, p] : data->terms) force += p(t) * (i == 0 ? 1.0 : i == 1 ? x : std::pow(x, i));
        return core::State<2>{u[1], -force};
    };
    sys.field_jacobian = [data](double t, const core::State<2>& u) {
        const double x = u[0];
        double dforce = (2 * data->n + 1) * std::pow(x, 2 * data->n);
        for (const auto& [i, p] : data->terms)
            if (i > 0) dforce += p(t) * i * (i == 1 ? 1.0 : std::pow(x, i - 1));
        core::Matrix<2> m{};
        m[0][1] = 1.0;
        m[1][0] = -dforce;
        return m;
    };
    sys.schedule = schedule;
    for (const auto& e : impulses) sys.jumps.push_back(e.jump_map());
    sys.validate();
    return sys;
}

double area_identity(const ImpulseEntry& e, const Point& s) {
    const double Ix = e.dI(1, 0, s[0], s[1]), Iy = e.dI(0, 1, s[0], s[1]);
    const double Jx = e.dJ(1, 0, s[0], s[1]), Jy = e.dJ(0, 1, s[0], s[1]);
    return Ix + Jy + Ix * Jy - Iy * Jx;
}

double area_identity_fd(const ImpulseEntry& e, const Point& s, double h) {
    const double x = s[0], y = s[1];
    const double Ix = (e.I(x + h, y) - e.I(x - h, y)) / (2 * h), Iy = (e.I(x, y + h) - e.I(x, y - h)) / (2 * h);
    const double Jx = (e.J(x + h, y) - e.J(x - h, y)) / (2 * h), Jy = (e.J(x, y + h) - e.J(x, y - h)) / (2 * h);
    return Ix + Jy + Ix * Jy - Iy * Jx;
}

namespace {

std::vector<double> energy_levels(const SmallnessOptions& opt) {
    std::vector<double> h;
    const int L = std::max(2, opt.levels);
    for (int l = 0; l < L; ++l) h.push_back(opt.E * std::pow(opt.span, static_cast<double>(l) / (L - 1)));
    return h;
}

Point on_level(int n, double h, double phi) {
    const double cx = std::cos(phi), cy = std::sin(phi);
    double lo = 0.0;
    double hi = std::max(std::pow(2.0 * (n + 1) * h, 1.0 / (2 * n + 2)), std::sqrt(2.0 * h)) * 1.01;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (h0_energy(n, {mid * cx, mid * cy}) < h)
            lo = mid;
        else
            hi = mid;
    }
    const double r = 0.5 * (lo + hi);
    return {r * cx, r * cy};
}

}  // namespace

std::vector<Point> smallness_grid(int n, const SmallnessOptions& opt) {
    std::vector<Point> pts;
    for (double h : energy_levels(opt))
        for (int a = 0; a < opt.angles; ++a) {
            const Point p = on_level(n, h, 2.0 * std::numbers::pi * a / opt.angles);
            if (p[0] * p[0] + p[1] * p[1] >= opt.E) pts.push_back(p);
        }
    return pts;
}

SmallnessReport smallness_report(const ImpulseEntry& entry, int n, const SmallnessOptions& opt) {
    if (n < 1) throw std::invalid_argument("smallness_report: n must be >= 1");
    if (!(opt.E > 0.0) || opt.angles < 1) throw std::invalid_argument("smallness_report: invalid grid options");
    const auto levels = energy_levels(opt);
    const double m = 2.0 * n + 2.0;

    SmallnessReport rep;
    rep.reduced_confidence = !entry.analytic_derivatives();
    // per-level maxima for the growth fit
    std::vector<std::vector<double>> lvl_I, lvl_J;
    for (int p = 0; p <= 5; ++p)
        for (int q = 0; p + q <= 5; ++q) {
            rep.I.push_back({p, q});
            rep.J.push_back({p, q});
            lvl_I.emplace_back(levels.size(), 0.0);
            lvl_J.emplace_back(levels.size(), 0.0);
        }

    for (std::size_t l = 0; l < levels.size(); ++l) {
        for (int a = 0; a < opt.angles; ++a) {
            const Point s = on_level(n, levels[l], 2.0 * std::numbers::pi * a / opt.angles);
            if (s[0] * s[0] + s[1] * s[1] < opt.E) continue;
            ++rep.grid_points;
            const double h = h0_energy(n, s);
            for (std::size_t e = 0; e < rep.I.size(); ++e) {
                const int p = rep.I[e].p, q = rep.I[e].q;
                const double wI = std::abs(entry.dI(p, q, s[0], s[1])) * std::pow(h, p / m + q / 2.0);
                const double wJ = std::abs(entry.dJ(p, q, s[0], s[1])) * std::pow(h, (p - n) / m + q / 2.0);
                if (wI > rep.I[e].sup) rep.I[e].sup = wI, rep.I[e].where = s;
                if (wJ > rep.J[e].sup) rep.J[e].sup = wJ, rep.J[e].where = s;
                lvl_I[e][l] = std::max(lvl_I[e][l], wI);
                lvl_J[e][l] = std::max(lvl_J[e][l], wJ);
            }
        }
    }

    // least-squares slope of log(max) vs log(h0) over the top decade
    auto growth = [&](const std::vector<double>& mx) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (std::size_t l = 0; l < levels.size(); ++l) {
            if (levels[l] < levels.back() / 10.0 || !(mx[l] > 0.0)) continue;
            const double X = std::log(levels[l]), Y = std::log(mx[l]);
            sx += X, sy += Y, sxx += X * X, sxy += X * Y, ++cnt;
        }
        if (cnt < 2) return 0.0;
        const double den = cnt * sxx - sx * sx;
        return den > 0.0 ? (cnt * sxy - sx * sy) / den : 0.0;
    };
    for (std::size_t e = 0; e < rep.I.size(); ++e) {
        rep.I[e].growth = growth(lvl_I[e]);
        rep.J[e].growth = growth(lvl_J[e]);
        rep.max_weighted = std::max({rep.max_weighted, rep.I[e].sup, rep.J[e].sup});
    }
    rep.bounded = rep.max_weighted <= opt.ceiling;
    return rep;
}

}  // namespace ikam::duffing
