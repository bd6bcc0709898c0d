#include "ikam/diagnostics/diagnostics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ikam::diagnostics {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap_unit(double x) {
    double w = x - std::floor(x);
    return w >= 1.0 ? 0.0 : w;
}
}  // namespace

double weighted_birkhoff(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("weighted_birkhoff: empty sequence");
    const double N = static_cast<double>(values.size());
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double s = (static_cast<double>(k) + 1.0) / (N + 1.0);
        const double w = std::exp(-1.0 / (s * (1.0 - s)));
        num += w * values[k];
        den += w;
    }
    return num / den;
}

RotationEstimate rotation_from_angles(const std::vector<double>& thetas) {
    if (thetas.size() < 3) throw std::invalid_argument("rotation_from_angles: need at least 3 angles");
    std::vector<double> inc(thetas.size() - 1);
    double cs = 0.0, sn = 0.0;
    for (std::size_t k = 0; k + 1 < thetas.size(); ++k) {
        inc[k] = wrap_unit(thetas[k + 1] - thetas[k]);
        cs += std::cos(two_pi * inc[k]);
        sn += std::sin(two_pi * inc[k]);
    }
    // lift every increment into the unit window centred on the circular mean
    const double centre = std::atan2(sn, cs) / two_pi;
    for (double& d : inc) d = centre + (d - centre - std::floor(d - centre + 0.5));

    RotationEstimate est;
    const double full = weighted_birkhoff(inc);
    const std::vector<double> half(inc.begin(), inc.begin() + static_cast<std::ptrdiff_t>(inc.size() / 2));
    est.omega = wrap_unit(full);
    est.omega_lift = est.omega;
    est.convergence_indicator = half.empty() ? 0.0 : std::abs(weighted_birkhoff(half) - full);
    est.iterates_used = inc.size();
    return est;
}

TwistProfile assess_twist(std::vector<TwistPoint> points) {
    TwistProfile prof;
    prof.points = std::move(points);
    prof.monotone = prof.points.size() >= 2;
    for (std::size_t i = 0; i + 1 < prof.points.size() && prof.monotone; ++i) {
        const auto& a = prof.points[i];
        const auto& b = prof.points[i + 1];
        if (!a.ok || !b.ok) {
            prof.monotone = false;
            break;
        }
        const double noise = 10.0 * std::max(a.rotation.convergence_indicator, b.rotation.convergence_indicator) + 1e-12;
        if (!(b.lambda > a.lambda) || !(b.rotation.omega_lift - a.rotation.omega_lift > noise)) prof.monotone = false;
    }
    return prof;
}

const char* to_string(CircleKind k) {
    switch (k) {
        case CircleKind::circle: return "circle";
        case CircleKind::chaotic: return "chaotic";
        case CircleKind::undecided: return "undecided";
    }
    return "unknown";
}

double CircleVerdict::lambda_at(double theta) const {
    if (coefficients.empty()) return 0.0;
    double s = coefficients[0];
    for (std::size_t k = 1; 2 * k < coefficients.size(); ++k) {
        const double arg = two_pi * static_cast<double>(k) * theta;
        s += coefficients[2 * k - 1] * std::cos(arg) + coefficients[2 * k] * std::sin(arg);
    }
    return s;
}

FitResult fit_curve(const std::vector<double>& thetas, const std::vector<double>& lambdas, int order) {
    if (thetas.size() != lambdas.size()) throw std::invalid_argument("fit_curve: size mismatch");
    const int cols = 2 * order + 1;
    if (order < 0 || static_cast<int>(thetas.size()) < cols) throw std::invalid_argument("fit_curve: too few points");
    Eigen::MatrixXd M(static_cast<Eigen::Index>(thetas.size()), cols);
    Eigen::VectorXd b(static_cast<Eigen::Index>(thetas.size()));
    for (std::size_t r = 0; r < thetas.size(); ++r) {
        const auto i = static_cast<Eigen::Index>(r);
        M(i, 0) = 1.0;
        for (int k = 1; k <= order; ++k) {
            const double arg = two_pi * k * thetas[r];
            M(i, 2 * k - 1) = std::cos(arg);
            M(i, 2 * k) = std::sin(arg);
        }
        b(i) = lambdas[r];
    }
    const Eigen::VectorXd x = M.colPivHouseholderQr().solve(b);
    FitResult fr;
    fr.coefficients.assign(x.data(), x.data() + x.size());
    fr.residual = (M * x - b).cwiseAbs().maxCoeff();
    return fr;
}

CircleVerdict classify_orbit(const std::vector<chart::ActionAngle>& aa, std::size_t N, bool escaped, double residual_tol,
                             const CircleOptions& opt) {
    CircleVerdict v;
    v.usable = aa.size();
    v.escaped = escaped;
    if (aa.size() < N / 4 || static_cast<int>(aa.size()) < 2 * opt.order + 2) {
        v.kind = CircleKind::undecided;
        return v;
    }
    std::vector<double> th, la;
    th.reserve(aa.size());
    la.reserve(aa.size());
    for (const auto& p : aa) {
        th.push_back(p.theta);
        la.push_back(p.lambda);
    }
    const FitResult fr = fit_curve(th, la, opt.order);
    v.coefficients = fr.coefficients;
    v.residual = fr.residual;
    v.rotation = rotation_from_angles(th);
    v.rotation.partial = escaped;
    if (escaped || v.residual > residual_tol)
        v.kind = CircleKind::chaotic;
    else if (v.rotation.convergence_indicator > opt.indicator_threshold)
        v.kind = CircleKind::undecided;
    else
        v.kind = CircleKind::circle;
    return v;
}

}  // namespace ikam::diagnostics
