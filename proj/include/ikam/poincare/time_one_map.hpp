#pragma once

#include <array>
#include <concepts>
#include <cstddef>
#include <optional>
#include <vector>

#include "ikam/core/impulsive.hpp"
#include "ikam/ode/dop853.hpp"

namespace ikam::poincare {

using Point = std::array<double, 2>;
using Matrix2 = core::Matrix<2>;

struct MapResult {
    bool escaped = false;
    /// 1 when the map completed, otherwise the escape time in (0, 1).
    double t = 1.0;
    Point state{};
    bool radius_exceeded = false;
    bool step_underflow = false;
};

enum class JacobianMethod { variational, finite_difference };

struct JacobianRecord {
    Matrix2 matrix{};
    double determinant = 0.0;
    JacobianMethod method = JacobianMethod::variational;
    /// Product of the segment monodromy and jump Jacobian determinants
    /// (variational method only).
    double factor_product = 0.0;
    bool escaped = false;
};

struct Orbit {
    std::vector<Point> points;  // p, P(p), P^2(p), ...
    bool truncated = false;
    std::optional<std::size_t> escape_index;  // iterate that escaped
};

/// Anything usable as a section map: rigid-rotation stubs included.
template <class M>
concept SectionMap = requires(const M& m, const Point& p) {
    { m.evaluate(p) } -> std::same_as<MapResult>;
};

/// Time-1 map P = P_k o Phi_k o ... o P_1 o Phi_1 o P_0 of a 1-periodic
/// planar impulsive system with impulse times 0 < t_1 < ... < t_k < 1.
class TimeOneMap {
public:
    explicit TimeOneMap(core::ImpulsiveSystem<2> system, ode::StepControl control = default_control());

    /// rtol 1e-11, atol 1e-13, escape radius 1e6.
    static ode::StepControl default_control();

    MapResult evaluate(const Point& p) const;
    JacobianRecord jacobian(const Point& p, JacobianMethod method = JacobianMethod::variational,
                            double fd_step = 1e-6) const;
    Orbit iterate(const Point& p, std::size_t N) const;

    /// States at times j/m, j = 0..m, along the continuous trajectory
    /// (left limits at impulse times). Empty if the orbit escapes.
    std::vector<Point> trajectory_samples(const Point& p, int m) const;

    const core::ImpulsiveSystem<2>& system() const { return system_; }
    const ode::StepControl& control() const { return control_; }
    TimeOneMap with_control(const ode::StepControl& c) const { return TimeOneMap(system_, c); }

    /// Segment boundaries 0, t_1, ..., t_k, 1.
    const std::vector<double>& nodes() const { return nodes_; }

private:
    core::ImpulsiveSystem<2> system_;
    ode::StepControl control_;
    std::vector<double> nodes_;
};

template <SectionMap M>
Orbit iterate(const M& map, const Point& p, std::size_t N) {
    Orbit o;
    o.points.reserve(N + 1);
    o.points.push_back(p);
    Point cur = p;
    for (std::size_t i = 0; i < N; ++i) {
        const MapResult r = map.evaluate(cur);
        if (r.escaped) {
            o.truncated = true;
            o.escape_index = i + 1;
            break;
        }
        cur = r.state;
        o.points.push_back(cur);
    }
    return o;
}

}  // namespace ikam::poincare
