#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "ikam/util/trig_series.hpp"

namespace ikam::duffing {

enum class Representation { fourier, samples };
enum class SignalClass { holder, integrable };

/// A 1-periodic coefficient p_i(t). Sample-based signals are stored through
/// their trigonometric interpolant, so evaluation and smoothing share one
/// spectral representation.
class CoefficientSignal {
public:
    CoefficientSignal() = default;

    static CoefficientSignal zero();
    static CoefficientSignal constant(double c, double gamma = 1.0);
    static CoefficientSignal fourier(TrigSeries series, double gamma = 1.0, SignalClass cls = SignalClass::holder);
    static CoefficientSignal from_samples(const std::vector<double>& samples, double gamma = 1.0,
                                          SignalClass cls = SignalClass::holder);
    /// sum_{k=0}^{kmax} amplitude * 2^{-gamma k} cos(2 pi 2^k t), a C^gamma test signal.
    static CoefficientSignal lacunary(double gamma, int kmax = 12, double amplitude = 1.0);

    double operator()(double t) const { return series_(t); }
    std::complex<double> operator()(std::complex<double> t) const { return series_(t); }

    const TrigSeries& series() const { return series_; }
    Representation representation() const { return rep_; }
    std::size_t sample_count() const { return samples_; }
    double holder_exponent() const { return gamma_; }
    SignalClass declared_class() const { return class_; }
    bool is_zero() const { return series_.is_zero(); }

    /// Upper estimate of the C^gamma norm (sup norm plus Holder seminorm)
    /// from the spectral coefficients.
    double holder_norm_estimate() const;

private:
    TrigSeries series_;
    Representation rep_ = Representation::fourier;
    std::size_t samples_ = 0;
    double gamma_ = 1.0;
    SignalClass class_ = SignalClass::holder;
};

}  // namespace ikam::duffing
