#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "ikam/chart/reference_chart.hpp"
#include "ikam/duffing/model.hpp"
#include "ikam/duffing/signal.hpp"
#include "ikam/util/trig_series.hpp"

namespace ikam::smoothing {

/// Even C-infinity frequency multiplier: 1 on |xi| <= plateau, 0 on
/// |xi| >= support, with a smooth-step transition built from exp(-1/x).
struct SmoothingKernel {
    double plateau = 0.5;
    double support = 1.0;

    double multiplier(double xi) const;
};

/// Smoothed signal: a finite trigonometric polynomial, analytic in t.
struct AnalyticApproximation {
    double sigma = 0.0;
    TrigSeries series;

    double operator()(double t) const { return series(t); }
    std::complex<double> operator()(std::complex<double> t) const { return series(t); }
};

/// Raised when a sample-based signal cannot resolve the kernel's band.
class InsufficientResolution : public std::invalid_argument {
public:
    InsufficientResolution(std::size_t have, std::size_t need);
    std::size_t required() const { return need_; }

private:
    std::size_t need_;
};

/// Minimum sample count for smoothing at sigma: 2 ceil(support / sigma) + 1.
std::size_t required_samples(double sigma, const SmoothingKernel& kernel = {});

/// Multiplies the Fourier coefficient at frequency q by multiplier(sigma q).
AnalyticApproximation smooth(const duffing::CoefficientSignal& f, double sigma, const SmoothingKernel& kernel = {});

/// Max modulus over the grid {re_j + i im_l}, re_j = j / re_points and
/// im_l evenly spaced over [-width, width] (both ends included).
double strip_bound(const AnalyticApproximation& approx, double width, int re_points = 512, int im_points = 9);

/// Max |f_a - f_b| on the same strip grid.
double strip_difference(const AnalyticApproximation& a, const AnalyticApproximation& b, double width,
                        int re_points = 512, int im_points = 9);

/// sup over an equispaced grid of [0, 1) of |g(t) - f(t)|.
double sup_error(const AnalyticApproximation& g, const duffing::CoefficientSignal& f, int points = 2048);

struct SplitGrid {
    int lambdas = 12;
    int thetas = 48;
    int times = 256;
    double lambda_min = 1.0;
    double lambda_max = 4.0;
};

struct SplitReport {
    double epsilon = 0.0;
    double gamma = 1.0;
    double sup_R = 0.0;          // |R|
    double sup_R_smooth = 0.0;   // |R_eps|, smoothed high-order part
    double sup_R_rest = 0.0;     // |R^eps|, low-order terms plus smoothing residuals
};

struct SplitResult {
    SplitReport report;
    /// R_eps(lambda, theta, t).
    std::function<double(double, double, double)> R_smooth;
};

/// Splits R into the smoothed high-order part and the remainder with
/// epsilon = (eps0 / A^{n-1})^{1/gamma}, gamma the smallest declared exponent
/// among p_{n+1}..p_{2n}. Rejects A^{-1} >= eps0.
SplitResult split_perturbation(const duffing::DuffingParams& params, const chart::ReferenceChart& chart, double A,
                               double eps0, const SplitGrid& grid = {}, const SmoothingKernel& kernel = {});

}  // namespace ikam::smoothing
