#include "ikam/duffing/impulse.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ikam::duffing {

namespace {

void check_order(int p, int q) {
    if (p < 0 || q < 0 || p + q > 5) throw std::invalid_argument("ImpulseEntry: derivative order must satisfy p + q <= 5");
}

double horner(const std::vector<double>& c, double x) {
    double s = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
    return s;
}

// Nested central differences; 2^(p+q) evaluations.
double fd_partial(const std::function<double(double, double)>& f, int p, int q, double x, double y) {
    const int order = p + q;
    if (order == 0) return f(x, y);
    const double eps = std::numeric_limits<double>::epsilon();
    const double hx = std::pow(eps, 1.0 / (order + 2)) * std::max(1.0, std::abs(x));
    const double hy = std::pow(eps, 1.0 / (order + 2)) * std::max(1.0, std::abs(y));
    if (p > 0)
        return (fd_partial(f, p - 1, q, x + hx, y) - fd_partial(f, p - 1, q, x - hx, y)) / (2.0 * hx);
    return (fd_partial(f, p, q - 1, x, y + hy) - fd_partial(f, p, q - 1, x, y - hy)) / (2.0 * hy);
}

}  // namespace

ImpulseEntry ImpulseEntry::constant_shift(double alpha) {
    ImpulseEntry e;
    e.kind_ = ImpulseKind::constant_shift;
    e.alpha_ = alpha;
    return e;
}

ImpulseEntry ImpulseEntry::poly_kick(double alpha, std::vector<double> beta) {
    ImpulseEntry e;
    e.kind_ = ImpulseKind::poly_kick;
    e.alpha_ = alpha;
    e.beta_ = std::move(beta);
    return e;
}

ImpulseEntry ImpulseEntry::sin_kick(double beta, double phase, double alpha) {
    ImpulseEntry e;
    e.kind_ = ImpulseKind::sin_kick;
    e.alpha_ = alpha;
    e.beta0_ = beta;
    e.beta_ = {beta};
    e.phase_ = phase;
    return e;
}

ImpulseEntry ImpulseEntry::gauss_kick(double beta, int power, double alpha) {
    if (power != 2 && power != 4) throw std::invalid_argument("gauss-kick: power must be 2 or 4");
    ImpulseEntry e;
    e.kind_ = ImpulseKind::gauss_kick;
    e.alpha_ = alpha;
    e.beta0_ = beta;
    e.beta_ = {beta};
    e.power_ = power;
    // P_0 = 1, P_{p+1} = P_p' - m x^{m-1} P_p
    e.gauss_poly_.push_back({1.0});
    for (int p = 0; p < 5; ++p) {
        const auto& P = e.gauss_poly_.back();
        std::vector<double> next(P.size() + static_cast<std::size_t>(power), 0.0);
        for (std::size_t i = 1; i < P.size(); ++i) next[i - 1] += static_cast<double>(i) * P[i];
        for (std::size_t i = 0; i < P.size(); ++i) next[i + static_cast<std::size_t>(power) - 1] -= power * P[i];
        e.gauss_poly_.push_back(std::move(next));
    }
    return e;
}

ImpulseEntry ImpulseEntry::velocity_kick(double kappa, double alpha) {
    ImpulseEntry e;
    e.kind_ = ImpulseKind::velocity_kick;
    e.alpha_ = alpha;
    e.kappa_ = kappa;
    return e;
}

ImpulseEntry ImpulseEntry::custom(CustomImpulse c) {
    if (!c.I || !c.J) throw std::invalid_argument("custom impulse: I and J closures are required");
    ImpulseEntry e;
    e.kind_ = ImpulseKind::custom;
    e.custom_ = std::move(c);
    return e;
}

std::string ImpulseEntry::tag() const {
    switch (kind_) {
        case ImpulseKind::constant_shift: return "constant-shift";
        case ImpulseKind::poly_kick: return "poly-kick";
        case ImpulseKind::sin_kick: return "sin-kick";
        case ImpulseKind::gauss_kick: return "gauss-kick";
        case ImpulseKind::velocity_kick: return "velocity-kick";
        case ImpulseKind::custom: return "custom";
    }
    return "unknown";
}

double ImpulseEntry::I(double x, double y) const {
    if (kind_ == ImpulseKind::custom) return custom_.I(x, y);
    return alpha_;
}

double ImpulseEntry::J(double x, double y) const {
    switch (kind_) {
        case ImpulseKind::constant_shift: return 0.0;
        case ImpulseKind::poly_kick: return horner(beta_, x);
        case ImpulseKind::sin_kick: return beta0_ * std::sin(x + phase_);
        case ImpulseKind::gauss_kick: return beta0_ * std::exp(-std::pow(x, power_));
        case ImpulseKind::velocity_kick: return kappa_ * y;
        case ImpulseKind::custom: return custom_.J(x, y);
    }
    return 0.0;
}

double ImpulseEntry::dI(int p, int q, double x, double y) const {
    check_order(p, q);
    if (kind_ == ImpulseKind::custom) {
        if (custom_.dI) return custom_.dI(p, q, x, y);
        return fd_partial(custom_.I, p, q, x, y);
    }
    return (p == 0 && q == 0) ? alpha_ : 0.0;
}

double ImpulseEntry::dJ(int p, int q, double x, double y) const {
    check_order(p, q);
    if (p == 0 && q == 0) return J(x, y);
    switch (kind_) {
        case ImpulseKind::constant_shift: return 0.0;
        case ImpulseKind::poly_kick: {
            if (q > 0) return 0.0;
            double s = 0.0;
            for (std::size_t m = static_cast<std::size_t>(p); m < beta_.size(); ++m) {
                double fall = 1.0;
                for (int r = 0; r < p; ++r) fall *= static_cast<double>(m) - r;
                s += beta_[m] * fall * std::pow(x, static_cast<double>(m) - p);
            }
            return s;
        }
        case ImpulseKind::sin_kick:
            if (q > 0) return 0.0;
            return beta0_ * std::sin(x + phase_ + p * std::numbers::pi / 2.0);
        case ImpulseKind::gauss_kick:
            if (q > 0) return 0.0;
            return beta0_ * horner(gauss_poly_[static_cast<std::size_t>(p)], x) * std::exp(-std::pow(x, power_));
        case ImpulseKind::velocity_kick: return (p == 0 && q == 1) ? kappa_ : 0.0;
        case ImpulseKind::custom:
            if (custom_.dJ) return custom_.dJ(p, q, x, y);
            return fd_partial(custom_.J, p, q, x, y);
    }
    return 0.0;
}

bool ImpulseEntry::analytic_derivatives() const {
    return kind_ != ImpulseKind::custom || (custom_.dI && custom_.dJ);
}

core::JumpMap<2> ImpulseEntry::jump_map() const {
    const ImpulseEntry self = *this;
    core::JumpMap<2> m;
    m.increment = [self](const core::State<2>& u) { return core::State<2>{self.I(u[0], u[1]), self.J(u[0], u[1])}; };
    m.jacobian = [self](const core::State<2>& u) {
        core::Matrix<2> d{};
        d[0][0] = self.dI(1, 0, u[0], u[1]);
        d[0][1] = self.dI(0, 1, u[0], u[1]);
        d[1][0] = self.dJ(1, 0, u[0], u[1]);
        d[1][1] = self.dJ(0, 1, u[0], u[1]);
        return d;
    };
    return m;
}

}  // namespace ikam::duffing
