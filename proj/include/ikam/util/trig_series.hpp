#pragma once

#include <complex>
#include <vector>

namespace ikam {

/// One harmonic a*cos(2*pi*q*t) + b*sin(2*pi*q*t), q >= 1.
struct Harmonic {
    int q = 1;
    double a = 0.0;
    double b = 0.0;
};

/// Finite real trigonometric polynomial of period 1.
class TrigSeries {
public:
    TrigSeries() = default;
    TrigSeries(double mean, std::vector<Harmonic> modes);

    double mean() const { return mean_; }
    const std::vector<Harmonic>& modes() const { return modes_; }
    int max_frequency() const;
    bool is_zero() const;

    double operator()(double t) const;
    std::complex<double> operator()(std::complex<double> t) const;

    /// Complex coefficient c_q for q >= 0 (c_{-q} is its conjugate).
    std::complex<double> coefficient(int q) const;

    TrigSeries scaled(double s) const;
    friend TrigSeries operator+(const TrigSeries& f, const TrigSeries& g);

private:
    double mean_ = 0.0;
    std::vector<Harmonic> modes_;  // sorted by q, unique
};

}  // namespace ikam
