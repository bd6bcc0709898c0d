#include "ikam/poincare/time_one_map.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ikam::poincare {

using core::State;

TimeOneMap::TimeOneMap(core::ImpulsiveSystem<2> system, ode::StepControl control)
    : system_(std::move(system)), control_(control) {
    system_.validate();
    if (!system_.schedule.empty() && !system_.schedule.satisfies_unit_period_ordering())
        throw std::invalid_argument("TimeOneMap: impulse times must satisfy 0 < t_1 < ... < t_k < 1 with period 1");
    nodes_.push_back(0.0);
    for (double t : system_.schedule.base_times()) nodes_.push_back(t);
    nodes_.push_back(1.0);
}

ode::StepControl TimeOneMap::default_control() {
    ode::StepControl c;
    c.rtol = 1e-11;
    c.atol = 1e-13;
    c.escape_radius = 1e6;
    return c;
}

MapResult TimeOneMap::evaluate(const Point& p) const {
    MapResult out;
    State<2> u = p;
    const auto& f = system_.field;
    ode::StepControl ctl = control_;
    for (std::size_t s = 0; s + 1 < nodes_.size(); ++s) {
        const auto r = ode::integrate_segment<2>(f, nodes_[s], nodes_[s + 1], u, ctl);
        if (!r.reached()) {
            out.escaped = true;
            out.t = r.t;
            out.state = r.state;
            out.radius_exceeded = r.radius_exceeded;
            out.step_underflow = r.step_underflow;
            return out;
        }
        u = r.state;
        // reuse the last step size as the next trial step
        ctl.initial_step = std::abs(r.last_step);
        if (s + 1 < nodes_.size() - 1) {
            u = core::apply_jump<2>(u, system_.jumps[s]);
            if (ode::norm<2>(u) >= ctl.escape_radius) {
                out.escaped = true;
                out.t = nodes_[s + 1];
                out.state = u;
                out.radius_exceeded = true;
                return out;
            }
        }
    }
    out.state = u;
    return out;
}

namespace {

double det2(const Matrix2& m) { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

}  // namespace

JacobianRecord TimeOneMap::jacobian(const Point& p, JacobianMethod method, double fd_step) const {
    JacobianRecord rec;
    rec.method = method;
    if (method == JacobianMethod::finite_difference) {
        // tight tolerances keep integration noise well below the difference quotient
        ode::StepControl tight = control_;
        tight.rtol = std::min(control_.rtol, 1e-13);
        tight.atol = std::min(control_.atol, 1e-15);
        const TimeOneMap fine(system_, tight);
        for (int c = 0; c < 2; ++c) {
            Point pp = p, pm = p;
            pp[c] += fd_step;
            pm[c] -= fd_step;
            const MapResult rp = fine.evaluate(pp), rm = fine.evaluate(pm);
            if (rp.escaped || rm.escaped) {
                rec.escaped = true;
                return rec;
            }
            for (int r = 0; r < 2; ++r) rec.matrix[r][c] = (rp.state[r] - rm.state[r]) / (2.0 * fd_step);
        }
        rec.determinant = det2(rec.matrix);
        return rec;
    }

    // Variational equations Phi' = DF(t, u) Phi integrated alongside the state.
    const auto& sys = system_;
    auto aug = [&sys](double t, const State<6>& z) {
        const State<2> u{z[0], z[1]};
        const State<2> f = sys.field(t, u);
        const Matrix2 d = sys.field_derivative(t, u);
        State<6> dz;
        dz[0] = f[0];
        dz[1] = f[1];
        dz[2] = d[0][0] * z[2] + d[0][1] * z[4];
        dz[3] = d[0][0] * z[3] + d[0][1] * z[5];
        dz[4] = d[1][0] * z[2] + d[1][1] * z[4];
        dz[5] = d[1][0] * z[3] + d[1][1] * z[5];
        return dz;
    };
    ode::StepControl ctl = control_;
    ctl.escape_radius = std::max(control_.escape_radius, 1e150);

    Matrix2 total = core::identity<2>();
    double factors = 1.0;
    State<2> u = p;
    for (std::size_t s = 0; s + 1 < nodes_.size(); ++s) {
        const State<6> z0{u[0], u[1], 1.0, 0.0, 0.0, 1.0};
        const auto r = ode::integrate_segment<6>(aug, nodes_[s], nodes_[s + 1], z0, ctl);
        if (!r.reached() || ode::norm<2>(State<2>{r.state[0], r.state[1]}) >= control_.escape_radius) {
            rec.escaped = true;
            return rec;
        }
        const Matrix2 mono{{{r.state[2], r.state[3]}, {r.state[4], r.state[5]}}};
        total = core::matmul<2>(mono, total);
        factors *= det2(mono);
        u = {r.state[0], r.state[1]};
        if (s + 1 < nodes_.size() - 1) {
            const auto& jm = system_.jumps[s];
            Matrix2 dj = jm.derivative(u);
            dj[0][0] += 1.0;
            dj[1][1] += 1.0;
            total = core::matmul<2>(dj, total);
            factors *= det2(dj);
            u = core::apply_jump<2>(u, jm);
        }
    }
    rec.matrix = total;
    rec.determinant = det2(total);
    rec.factor_product = factors;
    return rec;
}

Orbit TimeOneMap::iterate(const Point& p, std::size_t N) const { return poincare::iterate(*this, p, N); }

std::vector<Point> TimeOneMap::trajectory_samples(const Point& p, int m) const {
    if (m < 1) throw std::invalid_argument("trajectory_samples: m must be >= 1");
    const auto traj = core::solve_ivp<2>(system_, 0.0, p, {0.0, 1.0}, control_);
    if (!traj.right().closed || traj.right().t < 1.0) return {};
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(m) + 1);
    for (int j = 0; j <= m; ++j) out.push_back(traj(static_cast<double>(j) / m));
    return out;
}

}  // namespace ikam::poincare
