#include "ikam/duffing/signal.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ikam::duffing {

namespace {
void check_gamma(double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("CoefficientSignal: Holder exponent must lie in (0, 1]");
}
}  // namespace

CoefficientSignal CoefficientSignal::zero() { return CoefficientSignal{}; }

CoefficientSignal CoefficientSignal::constant(double c, double gamma) {
    return fourier(TrigSeries(c, {}), gamma, SignalClass::holder);
}

CoefficientSignal CoefficientSignal::fourier(TrigSeries series, double gamma, SignalClass cls) {
    check_gamma(gamma);
    CoefficientSignal s;
    s.series_ = std::move(series);
    s.rep_ = Representation::fourier;
    s.gamma_ = gamma;
    s.class_ = cls;
    return s;
}

CoefficientSignal CoefficientSignal::from_samples(const std::vector<double>& samples, double gamma, SignalClass cls) {
    check_gamma(gamma);
    const int n = static_cast<int>(samples.size());
    if (n < 1) throw std::invalid_argument("CoefficientSignal: at least one sample required");
    for (double v : samples)
        if (!std::isfinite(v)) throw std::invalid_argument("CoefficientSignal: non-finite sample");

    std::vector<double> in(samples);
    const int nc = n / 2 + 1;
    fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(nc));
    fftw_plan plan = fftw_plan_dft_r2c_1d(n, in.data(), out, FFTW_ESTIMATE);
    fftw_execute(plan);

    const double inv = 1.0 / n;
    std::vector<Harmonic> modes;
    for (int q = 1; q < nc; ++q) {
        const double re = out[q][0] * inv, im = out[q][1] * inv;
        if (2 * q == n)
            modes.push_back({q, re, 0.0});  // Nyquist term: cosine only
        else
            modes.push_back({q, 2.0 * re, -2.0 * im});
    }
    const double mean = out[0][0] * inv;
    fftw_destroy_plan(plan);
    fftw_free(out);

    CoefficientSignal s;
    s.series_ = TrigSeries(mean, std::move(modes));
    s.rep_ = Representation::samples;
    s.samples_ = static_cast<std::size_t>(n);
    s.gamma_ = gamma;
    s.class_ = cls;
    return s;
}

CoefficientSignal CoefficientSignal::lacunary(double gamma, int kmax, double amplitude) {
    check_gamma(gamma);
    if (kmax < 0 || kmax > 24) throw std::invalid_argument("CoefficientSignal: lacunary depth out of range");
    std::vector<Harmonic> modes;
    for (int k = 0; k <= kmax; ++k) modes.push_back({1 << k, amplitude * std::exp2(-gamma * k), 0.0});
    return fourier(TrigSeries(0.0, std::move(modes)), gamma, SignalClass::holder);
}

double CoefficientSignal::holder_norm_estimate() const {
    double sup = std::abs(series_.mean());
    double semi = 0.0;
    for (const auto& h : series_.modes()) {
        const double r = std::hypot(h.a, h.b);
        sup += r;
        // |f(x) - f(y)| <= r min(2, 2 pi q d) <= 2 r (pi q d)^gamma
        semi += 2.0 * r * std::pow(std::numbers::pi * h.q, gamma_);
    }
    return sup + semi;
}

}  // namespace ikam::duffing
