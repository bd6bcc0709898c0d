#include "ikam/chart/transforms.hpp"

#include <cmath>
#include <stdexcept>

namespace ikam::chart {

Point rescale_in(int n, double A, const Point& xy) {
    if (!(A > 0.0)) throw std::invalid_argument("rescale_in: A must be positive");
    return {xy[0] / A, xy[1] / std::pow(A, n + 1)};
}

Point rescale_out(int n, double A, const Point& XY) {
    if (!(A > 0.0)) throw std::invalid_argument("rescale_out: A must be positive");
    return {XY[0] * A, XY[1] * std::pow(A, n + 1)};
}

AngleActionIncrement jump_action_angle(const ReferenceChart& chart, double A, const duffing::ImpulseEntry& entry,
                                       const ActionAngle& p) {
    if (!(p.lambda > 0.0)) throw std::invalid_argument("jump_action_angle: lambda must be positive");
    const int n = chart.n();
    const Point XY = chart.from_action_angle(p);
    const Point xy = rescale_out(n, A, XY);
    const Point post{XY[0] + entry.I(xy[0], xy[1]) / A, XY[1] + entry.J(xy[0], xy[1]) / std::pow(A, n + 1)};
    if (post[0] == 0.0 && post[1] == 0.0) throw std::invalid_argument("jump_action_angle: post-jump state at the origin");
    // both ends through the inverse chart, so round-trip error cancels
    const ActionAngle q = chart.to_action_angle(post);
    const ActionAngle b = chart.to_action_angle(XY);
    double dth = q.theta - b.theta;
    dth -= std::floor(dth + 0.5);
    return {dth, q.lambda - b.lambda};
}

HamiltonianPieces hamiltonian_pieces(const ReferenceChart& chart, const duffing::DuffingParams& params, double A,
                                     const ActionAngle& p, double t) {
    if (!(A > 0.0)) throw std::invalid_argument("hamiltonian_pieces: A must be positive");
    params.validate();
    if (params.n != chart.n()) throw std::invalid_argument("hamiltonian_pieces: chart and parameters disagree on n");
    const int n = chart.n();
    HamiltonianPieces h;
    h.H0 = chart.d() * std::pow(A, n) * std::pow(p.lambda, 2.0 * (n + 1) / (n + 2));
    if (p.lambda == 0.0) return h;
    const double base = std::pow(chart.c(), chart.alpha()) * chart.X0(p.theta * chart.T0()) *
                        std::pow(p.lambda, chart.alpha());
    double bp = base;  // base^{i+1}
    for (int i = 0; i <= 2 * n; ++i) {
        const auto& sig = params.coefficients[static_cast<std::size_t>(i)];
        if (!sig.is_zero()) h.R += sig(t) / (i + 1) * std::pow(A, i - n - 1) * bp;
        bp *= base;
    }
    return h;
}

double unperturbed_frequency(const ReferenceChart& chart, double A, double lambda) {
    const int n = chart.n();
    const double e = 2.0 * (n + 1) / (n + 2);
    return chart.d() * std::pow(A, n) * e * std::pow(lambda, e - 1.0);
}

}  // namespace ikam::chart
