#pragma once

#include <array>
#include <string>
#include <vector>

#include "ikam/core/impulsive.hpp"
#include "ikam/duffing/impulse.hpp"
#include "ikam/duffing/signal.hpp"

namespace ikam::duffing {

/// x'' + x^{2n+1} + sum_{i=0}^{2n} p_i(t) x^i = 0.
struct DuffingParams {
    int n = 1;
    std::vector<CoefficientSignal> coefficients;  // p_0 ... p_{2n}

    static DuffingParams unforced(int n);
    void validate() const;
};

using Point = std::array<double, 2>;

/// (y, -x^{2n+1} - sum p_i(t) x^i).
Point duffing_field(const DuffingParams& params, double t, const Point& state);

/// x^{2n+2} / (2(n+1)) + y^2 / 2.
double h0_energy(int n, const Point& state);

/// Builds the planar impulsive system with analytic field Jacobian.
core::ImpulsiveSystem<2> make_system(const DuffingParams& params, const core::ImpulseSchedule& schedule,
                                     const std::vector<ImpulseEntry>& impulses);

/// dI/dx + dJ/dy + dI/dx dJ/dy - dI/dy dJ/dx, computed from the entry's
/// first derivatives.
double area_identity(const ImpulseEntry& entry, const Point& state);
/// Same quantity with first derivatives from central differences.
double area_identity_fd(const ImpulseEntry& entry, const Point& state, double h = 1e-6);

struct SmallnessOptions {
    double E = 100.0;
    double ceiling = 10.0;
    int levels = 49;          // logarithmic energy levels in [E, span * E]
    double span = 1e6;
    int angles = 64;
};

struct WeightedSup {
    int p = 0;
    int q = 0;
    double sup = 0.0;
    Point where{};
    /// log-log slope of the per-level maximum against h0 over the top decade.
    double growth = 0.0;
};

struct SmallnessReport {
    std::vector<WeightedSup> I;  // 21 entries, p + q <= 5
    std::vector<WeightedSup> J;
    double max_weighted = 0.0;
    bool bounded = true;
    bool reduced_confidence = false;
    std::size_t grid_points = 0;
};

/// Weighted derivative suprema on an energy-logarithmic grid restricted to
/// x^2 + y^2 >= E. The I weight is h0^{p/(2n+2) + q/2}; the J weight is
/// h0^{(p-n)/(2n+2) + q/2}.
SmallnessReport smallness_report(const ImpulseEntry& entry, int n, const SmallnessOptions& opt = {});

/// Sample set used by smallness_report.
std::vector<Point> smallness_grid(int n, const SmallnessOptions& opt);

}  // namespace ikam::duffing
