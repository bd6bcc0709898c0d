#include "ikam/util/trig_series.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace ikam {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

TrigSeries::TrigSeries(double mean, std::vector<Harmonic> modes) : mean_(mean) {
    std::map<int, Harmonic> merged;
    for (const auto& h : modes) {
        if (h.q < 1) throw std::invalid_argument("TrigSeries: harmonic frequency must be >= 1");
        auto& m = merged[h.q];
        m.q = h.q;
        m.a += h.a;
        m.b += h.b;
    }
    for (const auto& [q, h] : merged)
        if (h.a != 0.0 || h.b != 0.0) modes_.push_back(h);
}

int TrigSeries::max_frequency() const { return modes_.empty() ? 0 : modes_.back().q; }

bool TrigSeries::is_zero() const { return mean_ == 0.0 && modes_.empty(); }

double TrigSeries::operator()(double t) const {
    double s = mean_;
    for (const auto& h : modes_) {
        const double arg = two_pi * h.q * t;
        s += h.a * std::cos(arg) + h.b * std::sin(arg);
    }
    return s;
}

std::complex<double> TrigSeries::operator()(std::complex<double> t) const {
    std::complex<double> s = mean_;
    for (const auto& h : modes_) {
        const std::complex<double> arg = two_pi * static_cast<double>(h.q) * t;
        s += h.a * std::cos(arg) + h.b * std::sin(arg);
    }
    return s;
}

std::complex<double> TrigSeries::coefficient(int q) const {
    if (q == 0) return mean_;
    for (const auto& h : modes_)
        if (h.q == q) return {0.5 * h.a, -0.5 * h.b};
    return 0.0;
}

TrigSeries TrigSeries::scaled(double s) const {
    std::vector<Harmonic> m = modes_;
    for (auto& h : m) {
        h.a *= s;
        h.b *= s;
    }
    return TrigSeries(mean_ * s, std::move(m));
}

TrigSeries operator+(const TrigSeries& f, const TrigSeries& g) {
    std::vector<Harmonic> m = f.modes_;
    m.insert(m.end(), g.modes_.begin(), g.modes_.end());
    return TrigSeries(f.mean_ + g.mean_, std::move(m));
}

}  // namespace ikam
