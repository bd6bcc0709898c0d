#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ikam/chart/reference_chart.hpp"
#include "ikam/chart/transforms.hpp"
#include "ikam/poincare/time_one_map.hpp"
#include "ikam/util/parallel.hpp"

namespace ikam::diagnostics {

using poincare::Point;

struct RotationEstimate {
    /// Rotation number in revolutions per iterate, reduced to [0, 1).
    double omega = 0.0;
    /// omega plus the integer winding per iterate, when it could be measured.
    double omega_lift = 0.0;
    long winding = 0;
    bool winding_measured = false;
    std::size_t iterates_used = 0;
    /// |estimate from the first half of the increments - full estimate|.
    double convergence_indicator = 0.0;
    bool partial = false;
    std::string failure;
};

/// sum w_k f_k / sum w_k with w_k = exp(-1 / (s (1 - s))), s = (k+1)/(N+1).
double weighted_birkhoff(const std::vector<double>& values);

/// Rotation estimate from a sequence of angles in [0, 1) along an orbit.
RotationEstimate rotation_from_angles(const std::vector<double>& thetas);

/// Angle coordinate of a raw state in the chart after rescaling by A.
inline chart::ActionAngle chart_coordinates(const chart::ReferenceChart& chart, double A, const Point& p) {
    return chart.to_action_angle(chart::rescale_in(chart.n(), A, p));
}

/// Lifted angle advance over one map period along the continuous trajectory.
template <class M>
std::optional<double> lifted_advance(const M& map, const chart::ReferenceChart& chart, double A, const Point& p) {
    if constexpr (requires { map.trajectory_samples(p, 1); }) {
        const auto aa = chart_coordinates(chart, A, p);
        const double nu = std::abs(chart::unperturbed_frequency(chart, A, aa.lambda));
        const int m = std::max(64, static_cast<int>(std::ceil(16.0 * nu)));
        const auto pts = map.trajectory_samples(p, m);
        if (pts.empty()) return std::nullopt;
        double total = 0.0;
        double prev = aa.theta;
        for (std::size_t j = 1; j < pts.size(); ++j) {
            if (pts[j][0] == 0.0 && pts[j][1] == 0.0) return std::nullopt;
            const double th = chart_coordinates(chart, A, pts[j]).theta;
            double d = th - prev;
            d -= std::floor(d + 0.5);
            total += d;
            prev = th;
        }
        return total;
    } else {
        return std::nullopt;
    }
}

/// Weighted Birkhoff rotation number of the orbit of p0 in the chart angle.
template <poincare::SectionMap M>
RotationEstimate rotation_number(const M& map, const chart::ReferenceChart& chart, double A, const Point& p0,
                                 std::size_t N) {
    if (N < 2) throw std::invalid_argument("rotation_number: N must be >= 2");
    const auto orbit = poincare::iterate(map, p0, N);
    std::vector<double> thetas;
    std::string failure;
    for (const auto& p : orbit.points) {
        if (p[0] == 0.0 && p[1] == 0.0) {
            failure = "orbit reached the origin";
            break;
        }
        thetas.push_back(chart_coordinates(chart, A, p).theta);
    }
    if (orbit.truncated && failure.empty()) failure = "orbit escaped at iterate " + std::to_string(*orbit.escape_index);
    RotationEstimate est;
    if (thetas.size() >= 3) est = rotation_from_angles(thetas);
    est.partial = !failure.empty();
    est.failure = failure;
    est.omega_lift = est.omega;
    if (const auto adv = lifted_advance(map, chart, A, p0)) {
        est.winding = std::lround(*adv - est.omega);
        est.omega_lift = est.omega + static_cast<double>(est.winding);
        est.winding_measured = true;
    }
    return est;
}

struct TwistPoint {
    Point seed{};
    double lambda = 0.0;
    RotationEstimate rotation;
    bool ok = false;
};

struct TwistProfile {
    std::vector<TwistPoint> points;
    /// Strictly increasing lifted rotation number against action, by more
    /// than the estimator noise between neighbours.
    bool monotone = false;
};

TwistProfile assess_twist(std::vector<TwistPoint> points);

template <poincare::SectionMap M>
TwistProfile twist_profile(const M& map, const chart::ReferenceChart& chart, double A, const std::vector<Point>& seeds,
                           std::size_t N, unsigned threads = 1) {
    std::vector<TwistPoint> pts(seeds.size());
    parallel_for(seeds.size(), threads, [&](std::size_t i) {
        TwistPoint tp;
        tp.seed = seeds[i];
        try {
            tp.lambda = chart_coordinates(chart, A, seeds[i]).lambda;
            tp.rotation = rotation_number(map, chart, A, seeds[i], N);
            tp.ok = !tp.rotation.partial;
        } catch (const std::exception& e) {
            tp.rotation.partial = true;
            tp.rotation.failure = e.what();
        }
        pts[i] = tp;
    });
    return assess_twist(std::move(pts));
}

struct SweepOutcome {
    Point start{};
    bool bounded = true;
    double max_radius = 0.0;
    std::optional<std::size_t> escape_index;
};

struct SweepReport {
    std::vector<SweepOutcome> outcomes;
    std::size_t horizon = 0;
    double fraction_bounded = 0.0;
    double max_radius_bounded = 0.0;
};

/// Iterates every grid point up to `horizon` times; an iterate escapes when
/// the map escapes or its radius exceeds escape_radius.
template <poincare::SectionMap M>
SweepReport boundedness_sweep(const M& map, const std::vector<Point>& grid, std::size_t horizon, double escape_radius,
                              unsigned threads = 1) {
    if (horizon < 1) throw std::invalid_argument("boundedness_sweep: horizon must be >= 1");
    SweepReport rep;
    rep.horizon = horizon;
    rep.outcomes.resize(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        SweepOutcome o;
        o.start = grid[i];
        Point cur = grid[i];
        o.max_radius = std::hypot(cur[0], cur[1]);
        for (std::size_t k = 1; k <= horizon; ++k) {
            const poincare::MapResult r = map.evaluate(cur);
            const double rad = std::hypot(r.state[0], r.state[1]);
            if (r.escaped || !(rad < escape_radius)) {
                o.bounded = false;
                o.escape_index = k;
                break;
            }
            cur = r.state;
            o.max_radius = std::max(o.max_radius, rad);
        }
        rep.outcomes[i] = o;
    });
    std::size_t nb = 0;
    for (const auto& o : rep.outcomes)
        if (o.bounded) {
            ++nb;
            rep.max_radius_bounded = std::max(rep.max_radius_bounded, o.max_radius);
        }
    rep.fraction_bounded = grid.empty() ? 1.0 : static_cast<double>(nb) / static_cast<double>(grid.size());
    return rep;
}

enum class CircleKind { circle, chaotic, undecided };
const char* to_string(CircleKind k);

struct CircleOptions {
    int order = 32;
    double indicator_threshold = 1e-6;
};

struct CircleVerdict {
    CircleKind kind = CircleKind::undecided;
    double residual = 0.0;
    /// lambda(theta) = a_0 + sum_k a_k cos(2 pi k theta) + b_k sin(2 pi k theta),
    /// stored as a_0, a_1, b_1, a_2, b_2, ...
    std::vector<double> coefficients;
    RotationEstimate rotation;
    std::size_t usable = 0;
    bool escaped = false;

    double lambda_at(double theta) const;
};

struct FitResult {
    std::vector<double> coefficients;
    double residual = 0.0;
};

/// Least-squares truncated Fourier fit of lambda against theta; the
/// residual is the maximum absolute deviation.
FitResult fit_curve(const std::vector<double>& thetas, const std::vector<double>& lambdas, int order);

CircleVerdict classify_orbit(const std::vector<chart::ActionAngle>& aa, std::size_t N, bool escaped, double residual_tol,
                             const CircleOptions& opt);

template <poincare::SectionMap M>
CircleVerdict invariant_circle_detect(const M& map, const chart::ReferenceChart& chart, double A, const Point& seed,
                                      std::size_t N, double residual_tol, const CircleOptions& opt = {}) {
    if (N < 512) throw std::invalid_argument("invariant_circle_detect: N must be >= 512");
    const auto orbit = poincare::iterate(map, seed, N);
    std::vector<chart::ActionAngle> aa;
    aa.reserve(orbit.points.size());
    for (const auto& p : orbit.points) {
        if (p[0] == 0.0 && p[1] == 0.0) break;
        aa.push_back(chart_coordinates(chart, A, p));
    }
    return classify_orbit(aa, N, orbit.truncated || aa.size() < orbit.points.size(), residual_tol, opt);
}

}  // namespace ikam::diagnostics
