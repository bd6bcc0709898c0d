#pragma once

#include "ikam/chart/reference_chart.hpp"
#include "ikam/duffing/impulse.hpp"
#include "ikam/duffing/model.hpp"

namespace ikam::chart {

/// X = x / A, Y = y / A^{n+1}.
Point rescale_in(int n, double A, const Point& xy);
/// x = A X, y = A^{n+1} Y.
Point rescale_out(int n, double A, const Point& XY);

struct AngleActionIncrement {
    double dtheta = 0.0;   // wrapped to [-1/2, 1/2)
    double dlambda = 0.0;
};

/// Increment of (theta, lambda) produced by one impulse acting on the
/// rescaled state: (X, Y) -> (X + I(AX, A^{n+1}Y)/A, Y + J(AX, A^{n+1}Y)/A^{n+1}).
/// Throws std::invalid_argument if the post-jump state is the origin.
AngleActionIncrement jump_action_angle(const ReferenceChart& chart, double A, const duffing::ImpulseEntry& entry,
                                       const ActionAngle& p);

struct HamiltonianPieces {
    double H0 = 0.0;
    double R = 0.0;
};

/// H0(lambda) = d A^n lambda^{2(n+1)/(n+2)} and
/// R = sum_i p_i(t)/(i+1) A^{i-n-1} (c^alpha X0(theta T0))^{i+1} lambda^{alpha(i+1)}.
HamiltonianPieces hamiltonian_pieces(const ReferenceChart& chart, const duffing::DuffingParams& params, double A,
                                     const ActionAngle& p, double t);

/// Unperturbed frequency dH0/dlambda: revolutions of theta per unit time.
double unperturbed_frequency(const ReferenceChart& chart, double A, double lambda);

}  // namespace ikam::chart
