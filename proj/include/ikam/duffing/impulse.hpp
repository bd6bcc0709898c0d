#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ikam/core/impulsive.hpp"

namespace ikam::duffing {

enum class ImpulseKind { constant_shift, poly_kick, sin_kick, gauss_kick, velocity_kick, custom };

/// User-supplied impulse. The derivative closures return
/// d^{p+q}/dx^p dy^q for p + q <= 5; without them finite differences are
/// used and results carry reduced confidence.
struct CustomImpulse {
    std::function<double(double, double)> I;
    std::function<double(double, double)> J;
    std::function<double(int, int, double, double)> dI;
    std::function<double(int, int, double, double)> dJ;
};

/// One impulse (x, y) -> (x + I(x, y), y + J(x, y)) from the catalog.
class ImpulseEntry {
public:
    static ImpulseEntry constant_shift(double alpha);
    /// I = alpha, J = sum_m beta[m] x^m.
    static ImpulseEntry poly_kick(double alpha, std::vector<double> beta);
    /// I = alpha, J = beta sin(x + phase).
    static ImpulseEntry sin_kick(double beta, double phase, double alpha = 0.0);
    /// I = alpha, J = beta exp(-x^power), power 2 or 4.
    static ImpulseEntry gauss_kick(double beta, int power, double alpha = 0.0);
    /// I = alpha, J = kappa y.
    static ImpulseEntry velocity_kick(double kappa, double alpha = 0.0);
    static ImpulseEntry custom(CustomImpulse c);

    ImpulseKind kind() const { return kind_; }
    std::string tag() const;
    double alpha() const { return alpha_; }
    const std::vector<double>& beta() const { return beta_; }
    double phase() const { return phase_; }
    int power() const { return power_; }
    double kappa() const { return kappa_; }

    double I(double x, double y) const;
    double J(double x, double y) const;
    /// Mixed partial d^{p+q}/dx^p dy^q of I and J, p + q <= 5.
    double dI(int p, int q, double x, double y) const;
    double dJ(int p, int q, double x, double y) const;
    /// False when derivatives come from finite differences.
    bool analytic_derivatives() const;

    /// The increment (I, J) as a jump map with its analytic Jacobian.
    core::JumpMap<2> jump_map() const;

private:
    ImpulseKind kind_ = ImpulseKind::constant_shift;
    double alpha_ = 0.0;
    std::vector<double> beta_;
    double beta0_ = 0.0;
    double phase_ = 0.0;
    int power_ = 2;
    double kappa_ = 0.0;
    std::vector<std::vector<double>> gauss_poly_;  // P_p with d^p/dx^p e^{-x^m} = P_p(x) e^{-x^m}
    CustomImpulse custom_;
};

}  // namespace ikam::duffing
