#include "ikam/chart/reference_chart.hpp"

#include <cmath>
// Boost 1.74 pchip calls isnan unqualified
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/interpolators/quintic_hermite.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ikam/ode/dop853.hpp"

namespace ikam::chart {

namespace {

using boost::math::interpolators::cardinal_quintic_hermite;
using boost::math::interpolators::pchip;

double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

ode::StepControl tight_control() {
    ode::StepControl c;
    c.rtol = 1e-14;
    c.atol = 1e-15;
    c.escape_radius = 1e6;
    return c;
}

auto reference_field(int n) {
    return [n](double, const ode::Vec<2>& u) { return ode::Vec<2>{u[1], -ipow(u[0], 2 * n + 1)}; };
}

}  // namespace

struct ReferenceChart::Interp {
    cardinal_quintic_hermite<std::vector<double>> X;
    cardinal_quintic_hermite<std::vector<double>> Y;
    pchip<std::vector<double>> quarter;
    double span;
};

ReferenceChart::ReferenceChart(int n, double tol, double T0_quadrature, double T0_return, std::vector<double> X,
                               std::vector<double> Y)
    : n_(n), tol_(tol), T0_(T0_quadrature), T0_return_(T0_return), X_(std::move(X)), Y_(std::move(Y)) {
    if (n_ < 1) throw std::invalid_argument("ReferenceChart: n must be >= 1");
    if (!(T0_ > 0.0)) throw std::invalid_argument("ReferenceChart: T0 must be positive");
    if (X_.size() != Y_.size() || X_.size() < 9 || (X_.size() - 1) % 4 != 0)
        throw std::invalid_argument("ReferenceChart: node count must be a positive multiple of 4");

    alpha_ = 1.0 / (n_ + 2);
    beta_ = (n_ + 1.0) / (n_ + 2);
    c_ = 1.0 / (alpha_ * T0_);
    d_ = std::pow(c_, 2.0 * beta_) / (2.0 * (n_ + 1));

    const std::size_t N = X_.size() - 1;
    const double dx = T0_ / static_cast<double>(N);
    const int m = 2 * n_ + 1;
    std::vector<double> xv(X_), xd(Y_), xdd(X_.size()), yv(Y_), yd(X_.size()), ydd(X_.size());
    for (std::size_t i = 0; i <= N; ++i) {
        xdd[i] = -ipow(X_[i], m);
        yd[i] = xdd[i];
        ydd[i] = -m * ipow(X_[i], m - 1) * Y_[i];
    }

    // quarter period: X0 decreases from 1 to 0; interpolate s as a function of X
    std::vector<double> qx, qs;
    for (std::size_t i = N / 4 + 1; i-- > 0;) {
        qx.push_back(X_[i]);
        qs.push_back(static_cast<double>(i) * dx);
    }
    for (std::size_t i = 1; i < qx.size(); ++i)
        if (!(qx[i] > qx[i - 1])) throw std::runtime_error("ReferenceChart: reference solution not monotone on the first quarter");

    interp_ = std::make_shared<const Interp>(Interp{
        cardinal_quintic_hermite<std::vector<double>>(std::move(xv), std::move(xd), std::move(xdd), 0.0, dx),
        cardinal_quintic_hermite<std::vector<double>>(std::move(yv), std::move(yd), std::move(ydd), 0.0, dx),
        pchip<std::vector<double>>(std::move(qx), std::move(qs)), dx * static_cast<double>(N)});
}

namespace {
double wrap_period(double s, double T, double span) {
    double w = s - T * std::floor(s / T);
    if (w < 0.0) w = 0.0;
    return std::min(w, span);
}
}  // namespace

Point ReferenceChart::XY0(double s) const {
    const double w = wrap_period(s, T0_, interp_->span);
    return {interp_->X(w), interp_->Y(w)};
}

Point ReferenceChart::XY0_prime(double s) const {
    const double w = wrap_period(s, T0_, interp_->span);
    return {interp_->X.prime(w), interp_->Y.prime(w)};
}

double ReferenceChart::quarter_inverse(double X) const {
    const double lo = X_[nodes() / 4];
    return interp_->quarter(std::clamp(X, lo, 1.0));
}

double ReferenceChart::energy_residual() const {
    double r = 0.0;
    for (std::size_t i = 0; i < X_.size(); ++i)
        r = std::max(r, std::abs((n_ + 1) * Y_[i] * Y_[i] + ipow(X_[i], 2 * n_ + 2) - 1.0));
    return r;
}

Point ReferenceChart::from_action_angle(const ActionAngle& p) const {
    const Point r = XY0(p.theta * T0_);
    const double cl = c_ * p.lambda;
    return {std::pow(cl, alpha_) * r[0], std::pow(cl, beta_) * r[1]};
}

ActionAngle ReferenceChart::to_action_angle(const Point& s) const {
    const double X = s[0], Y = s[1];
    if (X == 0.0 && Y == 0.0) throw std::invalid_argument("to_action_angle: the chart is singular at the origin");
    const int m = 2 * n_ + 2;
    const double e = ipow(X, m) + (n_ + 1) * Y * Y;
    const double lambda = std::pow(e, (n_ + 2.0) / m) / c_;
    if (Y == 0.0) return {lambda, X > 0.0 ? 0.0 : 0.5};

    const double cl = c_ * lambda;
    const double Xh = X / std::pow(cl, alpha_), Yh = Y / std::pow(cl, beta_);

    // monotone-piece guess, then Newton projection onto the unit curve
    const double sq = quarter_inverse(std::abs(Xh));
    double sp = Xh >= 0.0 ? sq : 0.5 * T0_ - sq;
    if (Yh > 0.0) sp = T0_ - sp;
    for (int it = 0; it < 8; ++it) {
        const Point r = XY0(sp);
        const double f = ipow(r[0], m - 1);
        const double ds = ((Xh - r[0]) * r[1] - (Yh - r[1]) * f) / (r[1] * r[1] + f * f);
        sp += ds;
        if (std::abs(ds) <= 1e-16 * T0_) break;
    }
    double theta = sp / T0_;
    theta -= std::floor(theta);
    if (theta >= 1.0) theta = 0.0;
    return {lambda, theta};
}

double quarter_period(int n, double tol) {
    if (n < 1) throw std::invalid_argument("quarter_period: n must be >= 1");
    const int m = 2 * n + 2;
    // X = 1 - v^2 removes the inverse square-root singularity at X = 1
    auto integrand = [m](double v) {
        if (v == 0.0) return 2.0 / std::sqrt(static_cast<double>(m));
        const double g = -std::expm1(m * std::log1p(-v * v));
        return 2.0 * v / std::sqrt(g);
    };
    double err = 0.0;
    const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 15,
                                                                                   std::min(tol, 1e-13), &err);
    return std::sqrt(n + 1.0) * I;
}

double return_time(int n, double T0_guess) {
    if (!(T0_guess > 0.0)) throw std::invalid_argument("return_time: guess must be positive");
    const auto f = reference_field(n);
    ode::DenseOutput<2> dense;
    const auto r = ode::integrate_segment<2>(f, 0.0, 1.25 * T0_guess, ode::Vec<2>{1.0, 0.0}, tight_control(), &dense);
    if (!r.reached()) throw std::runtime_error("return_time: reference orbit escaped");
    // Y < 0 on the first half period and Y > 0 on the second; the return
    // is the first downward crossing of Y after the start.
    for (const auto& st : dense.steps()) {
        const double ya = st.eval(st.t0)[1], yb = st.eval(st.t1())[1];
        if (st.t0 > 0.0 && ya > 0.0 && yb <= 0.0) {
            if (yb == 0.0) return st.t1();
            std::uintmax_t iters = 200;
            auto g = [&st](double t) { return st.eval(t)[1]; };
            const auto br = boost::math::tools::toms748_solve(g, st.t0, st.t1(), ya, yb,
                                                              boost::math::tools::eps_tolerance<double>(52), iters);
            return 0.5 * (br.first + br.second);
        }
    }
    throw std::runtime_error("return_time: no return detected");
}

ReferenceChart compute_reference(int n, double tol, std::size_t nodes) {
    if (n < 1) throw std::invalid_argument("compute_reference: n must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("compute_reference: tol must be positive");
    if (nodes < 8 || nodes % 4 != 0) throw std::invalid_argument("compute_reference: nodes must be a multiple of 4");

    const double T0q = 4.0 * quarter_period(n, tol);
    const double T0r = return_time(n, T0q);
    if (!(std::abs(T0q - T0r) <= tol))
        throw std::runtime_error(fmt::format("compute_reference: period estimates disagree ({:.17g} vs {:.17g})", T0q, T0r));

    std::vector<double> X(nodes + 1), Y(nodes + 1);
    const auto f = reference_field(n);
    ode::StepControl ctl = tight_control();
    ode::Vec<2> u{1.0, 0.0};
    X[0] = 1.0;
    Y[0] = 0.0;
    const double ds = T0q / static_cast<double>(nodes);
    for (std::size_t i = 1; i <= nodes; ++i) {
        const auto r = ode::integrate_segment<2>(f, (i - 1) * ds, i * ds, u, ctl);
        if (!r.reached()) throw std::runtime_error("compute_reference: integration failed");
        u = r.state;
        ctl.initial_step = std::abs(r.last_step);
        X[i] = u[0];
        Y[i] = u[1];
    }
    return ReferenceChart(n, tol, T0q, T0r, std::move(X), std::move(Y));
}

void save_chart(const ReferenceChart& chart, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("save_chart: cannot write " + tmp);
        out << "# impulsive-kam reference chart\n";
        out << fmt::format("n {}\ntol {:.17g}\nT0 {:.17g}\nT0_return {:.17g}\nnodes {}\n", chart.n(), chart.tol(),
                           chart.T0(), chart.T0_return(), chart.nodes());
        for (std::size_t i = 0; i <= chart.nodes(); ++i)
            out << fmt::format("{:.17g} {:.17g}\n", chart.X_nodes()[i], chart.Y_nodes()[i]);
        if (!out) throw std::runtime_error("save_chart: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

ReferenceChart load_chart(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_chart: cannot open " + path.string());
    std::string line;
    int n = 0;
    double tol = 0, T0 = 0, T0r = 0;
    std::size_t nodes = 0;
    int header = 0;
    while (header < 5 && std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "n") ls >> n;
        else if (key == "tol") ls >> tol;
        else if (key == "T0") ls >> T0;
        else if (key == "T0_return") ls >> T0r;
        else if (key == "nodes") ls >> nodes;
        else throw std::runtime_error("load_chart: unexpected header key '" + key + "'");
        if (ls.fail()) throw std::runtime_error("load_chart: malformed header line '" + line + "'");
        ++header;
    }
    if (header != 5) throw std::runtime_error("load_chart: incomplete header");
    std::vector<double> X(nodes + 1), Y(nodes + 1);
    for (std::size_t i = 0; i <= nodes; ++i)
        if (!(in >> X[i] >> Y[i])) throw std::runtime_error("load_chart: truncated node table");
    return ReferenceChart(n, tol, T0, T0r, std::move(X), std::move(Y));
}

std::filesystem::path chart_cache_path(const std::filesystem::path& dir, int n, double tol) {
    return dir / fmt::format("chart_n{}_tol{:.3g}.txt", n, tol);
}

ReferenceChart cached_reference(const std::filesystem::path& dir, int n, double tol) {
    const auto path = chart_cache_path(dir, n, tol);
    if (std::filesystem::exists(path)) {
        try {
            auto chart = load_chart(path);
            if (chart.n() == n && chart.tol() == tol) return chart;
        } catch (const std::exception&) {
            // fall through and rebuild
        }
    }
    auto chart = compute_reference(n, tol);
    save_chart(chart, path);
    return chart;
}

}  // namespace ikam::chart
