#include "ikam/smoothing/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

namespace ikam::smoothing {

namespace {
double g(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
}  // namespace

double SmoothingKernel::multiplier(double xi) const {
    const double a = std::abs(xi);
    if (a <= plateau) return 1.0;
    if (a >= support) return 0.0;
    const double u = (a - plateau) / (support - plateau);
    const double gl = g(1.0 - u), gr = g(u);
    return gl / (gl + gr);
}

InsufficientResolution::InsufficientResolution(std::size_t have, std::size_t need)
    : std::invalid_argument("smooth: " + std::to_string(have) + " samples cannot resolve the kernel band; at least " +
                            std::to_string(need) + " required"),
      need_(need) {}

std::size_t required_samples(double sigma, const SmoothingKernel& kernel) {
    return 2 * static_cast<std::size_t>(std::ceil(kernel.support / sigma)) + 1;
}

AnalyticApproximation smooth(const duffing::CoefficientSignal& f, double sigma, const SmoothingKernel& kernel) {
    if (!(sigma > 0.0)) throw std::invalid_argument("smooth: sigma must be positive");
    if (!(kernel.plateau > 0.0 && kernel.support > kernel.plateau))
        throw std::invalid_argument("smooth: kernel needs 0 < plateau < support");
    if (f.representation() == duffing::Representation::samples) {
        const std::size_t need = required_samples(sigma, kernel);
        if (f.sample_count() < need) throw InsufficientResolution(f.sample_count(), need);
    }
    std::vector<Harmonic> modes;
    for (const auto& h : f.series().modes()) {
        const double m = kernel.multiplier(sigma * h.q);
        if (m != 0.0) modes.push_back({h.q, m * h.a, m * h.b});
    }
    return {sigma, TrigSeries(f.series().mean(), std::move(modes))};
}

namespace {

template <class F>
double strip_max(F&& f, double width, int re_points, int im_points) {
    if (!(width >= 0.0)) throw std::invalid_argument("strip_bound: width must be nonnegative");
    if (re_points < 1 || im_points < 2) throw std::invalid_argument("strip_bound: grid too small");
    double best = 0.0;
    for (int l = 0; l < im_points; ++l) {
        const double im = -width + 2.0 * width * l / (im_points - 1);
        for (int j = 0; j < re_points; ++j) {
            const std::complex<double> t(static_cast<double>(j) / re_points, im);
            best = std::max(best, std::abs(f(t)));
        }
    }
    return best;
}

}  // namespace

double strip_bound(const AnalyticApproximation& approx, double width, int re_points, int im_points) {
    if (width > approx.sigma) throw std::invalid_argument("strip_bound: strip wider than the smoothing scale");
    return strip_max([&](std::complex<double> t) { return approx(t); }, width, re_points, im_points);
}

double strip_difference(const AnalyticApproximation& a, const AnalyticApproximation& b, double width, int re_points,
                        int im_points) {
    return strip_max([&](std::complex<double> t) { return a(t) - b(t); }, width, re_points, im_points);
}

double sup_error(const AnalyticApproximation& g, const duffing::CoefficientSignal& f, int points) {
    double best = 0.0;
    for (int j = 0; j < points; ++j) {
        const double t = static_cast<double>(j) / points;
        best = std::max(best, std::abs(g(t) - f(t)));
    }
    return best;
}

SplitResult split_perturbation(const duffing::DuffingParams& params, const chart::ReferenceChart& chart, double A,
                               double eps0, const SplitGrid& grid, const SmoothingKernel& kernel) {
    params.validate();
    const int n = params.n;
    if (chart.n() != n) throw std::invalid_argument("split_perturbation: chart and parameters disagree on n");
    if (!(A > 0.0) || !(eps0 > 0.0)) throw std::invalid_argument("split_perturbation: A and eps0 must be positive");
    if (!(1.0 / A < eps0))
        throw std::invalid_argument("split_perturbation: requires A^{-1} < eps0 (A = " + std::to_string(A) +
                                    ", eps0 = " + std::to_string(eps0) + ")");

    double gamma = 1.0;
    for (int i = n + 1; i <= 2 * n; ++i) {
        const auto& p = params.coefficients[static_cast<std::size_t>(i)];
        if (p.is_zero()) continue;
        if (p.declared_class() != duffing::SignalClass::holder)
            throw std::invalid_argument("split_perturbation: p_" + std::to_string(i) + " must be declared Holder");
        if (!(p.holder_exponent() > 1.0 - 1.0 / n))
            throw std::invalid_argument("split_perturbation: p_" + std::to_string(i) + " needs gamma > 1 - 1/n");
        gamma = std::min(gamma, p.holder_exponent());
    }
    const double eps = std::pow(eps0 / std::pow(A, n - 1), 1.0 / gamma);

    // coefficient of p_i: A^{i-n-1} c^{(i+1)alpha} X0^{i+1} lambda^{(i+1)alpha} / (i+1)
    struct Term {
        int i;
        double scale;
        duffing::CoefficientSignal p;
        AnalyticApproximation pe;
    };
    auto terms = std::make_shared<std::vector<Term>>();
    for (int i = 0; i <= 2 * n; ++i) {
        const auto& p = params.coefficients[static_cast<std::size_t>(i)];
        if (p.is_zero()) continue;
        Term t{i, std::pow(A, i - n - 1) / (i + 1), p, {}};
        if (i >= n + 1) t.pe = smooth(p, eps, kernel);
        terms->push_back(std::move(t));
    }

    const double ca = std::pow(chart.c(), chart.alpha());
    const double alpha = chart.alpha();
    SplitResult out;
    out.report.epsilon = eps;
    out.report.gamma = gamma;
    auto ch = std::make_shared<const chart::ReferenceChart>(chart);
    out.R_smooth = [terms, ch, ca, alpha, n](double lambda, double theta, double t) {
        const double base = ca * ch->X0(theta * ch->T0()) * std::pow(lambda, alpha);
        double s = 0.0;
        for (const auto& term : *terms)
            if (term.i >= n + 1) s += term.scale * std::pow(base, term.i + 1) * term.pe(t);
        return s;
    };

    std::vector<double> X0s(static_cast<std::size_t>(grid.thetas));
    for (int j = 0; j < grid.thetas; ++j) X0s[static_cast<std::size_t>(j)] = chart.X0(chart.T0() * j / grid.thetas);
    std::vector<std::vector<double>> pv(terms->size()), pev(terms->size());
    for (std::size_t k = 0; k < terms->size(); ++k)
        for (int l = 0; l < grid.times; ++l) {
            const double t = static_cast<double>(l) / grid.times;
            pv[k].push_back((*terms)[k].p(t));
            pev[k].push_back((*terms)[k].i >= n + 1 ? (*terms)[k].pe(t) : 0.0);
        }

    for (int a = 0; a < grid.lambdas; ++a) {
        const double lambda =
            grid.lambdas == 1 ? grid.lambda_min
                              : grid.lambda_min + (grid.lambda_max - grid.lambda_min) * a / (grid.lambdas - 1);
        for (int j = 0; j < grid.thetas; ++j) {
            const double base = ca * X0s[static_cast<std::size_t>(j)] * std::pow(lambda, alpha);
            std::vector<double> w(terms->size());
            for (std::size_t k = 0; k < terms->size(); ++k) w[k] = (*terms)[k].scale * std::pow(base, (*terms)[k].i + 1);
            for (int l = 0; l < grid.times; ++l) {
                double R = 0.0, Rs = 0.0;
                for (std::size_t k = 0; k < terms->size(); ++k) {
                    R += w[k] * pv[k][static_cast<std::size_t>(l)];
                    Rs += w[k] * pev[k][static_cast<std::size_t>(l)];
                }
                out.report.sup_R = std::max(out.report.sup_R, std::abs(R));
                out.report.sup_R_smooth = std::max(out.report.sup_R_smooth, std::abs(Rs));
                out.report.sup_R_rest = std::max(out.report.sup_R_rest, std::abs(R - Rs));
            }
        }
    }
    return out;
}

}  // namespace ikam::smoothing
