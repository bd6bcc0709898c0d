#pragma once

// Impulsive ODE engine: u' = F(t, u) between impulse times, u(t_j+) =
// u(t_j) + L_j(u(t_j)) at them, with left-continuous trajectories.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ikam/core/schedule.hpp"
#include "ikam/ode/dop853.hpp"

namespace ikam::core {

template <std::size_t Dim>
using State = ode::Vec<Dim>;

template <std::size_t Dim>
using Matrix = std::array<std::array<double, Dim>, Dim>;

template <std::size_t Dim>
Matrix<Dim> identity() {
    Matrix<Dim> m{};
    for (std::size_t i = 0; i < Dim; ++i) m[i][i] = 1.0;
    return m;
}

template <std::size_t Dim>
Matrix<Dim> matmul(const Matrix<Dim>& a, const Matrix<Dim>& b) {
    Matrix<Dim> c{};
    for (std::size_t i = 0; i < Dim; ++i)
        for (std::size_t j = 0; j < Dim; ++j)
            for (std::size_t l = 0; l < Dim; ++l) c[i][j] += a[i][l] * b[l][j];
    return c;
}

/// Solves a x = b by Gaussian elimination with partial pivoting.
template <std::size_t Dim>
std::optional<State<Dim>> solve_linear(Matrix<Dim> a, State<Dim> b) {
    for (std::size_t col = 0; col < Dim; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < Dim; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (!(std::abs(a[piv][col]) > 0.0) || !std::isfinite(a[piv][col])) return std::nullopt;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < Dim; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < Dim; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    State<Dim> x{};
    for (std::size_t i = Dim; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < Dim; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

/// Increment L_j applied at an impulse; the Jacobian is optional and is
/// replaced by central differences when absent.
template <std::size_t Dim>
struct JumpMap {
    std::function<State<Dim>(const State<Dim>&)> increment;
    std::function<Matrix<Dim>(const State<Dim>&)> jacobian;

    State<Dim> operator()(const State<Dim>& u) const { return increment(u); }

    Matrix<Dim> derivative(const State<Dim>& u) const {
        if (jacobian) return jacobian(u);
        Matrix<Dim> d{};
        for (std::size_t c = 0; c < Dim; ++c) {
            const double h = 1e-6 * std::max(1.0, std::abs(u[c]));
            State<Dim> up = u, um = u;
            up[c] += h;
            um[c] -= h;
            const State<Dim> lp = increment(up), lm = increment(um);
            for (std::size_t r = 0; r < Dim; ++r) d[r][c] = (lp[r] - lm[r]) / (2.0 * h);
        }
        return d;
    }

    static JumpMap zero() {
        return {[](const State<Dim>&) { return State<Dim>{}; }, [](const State<Dim>&) { return Matrix<Dim>{}; }};
    }
};

template <std::size_t Dim>
struct ImpulsiveSystem {
    std::function<State<Dim>(double, const State<Dim>&)> field;
    /// Optional dF/du, used by variational integrations.
    std::function<Matrix<Dim>(double, const State<Dim>&)> field_jacobian;
    ImpulseSchedule schedule;
    /// One jump map per schedule slot, applied cyclically.
    std::vector<JumpMap<Dim>> jumps;

    void validate() const {
        if (!field) throw std::invalid_argument("ImpulsiveSystem: missing vector field");
        if (jumps.size() != schedule.k())
            throw std::invalid_argument("ImpulsiveSystem: number of jump maps must equal the number of impulse slots");
        for (const auto& j : jumps)
            if (!j.increment) throw std::invalid_argument("ImpulsiveSystem: jump map without increment");
    }

    const JumpMap<Dim>& jump(long j) const { return jumps[schedule.slot(j)]; }

    Matrix<Dim> field_derivative(double t, const State<Dim>& u) const {
        if (field_jacobian) return field_jacobian(t, u);
        Matrix<Dim> d{};
        for (std::size_t c = 0; c < Dim; ++c) {
            const double h = 1e-6 * std::max(1.0, std::abs(u[c]));
            State<Dim> up = u, um = u;
            up[c] += h;
            um[c] -= h;
            const State<Dim> fp = field(t, up), fm = field(t, um);
            for (std::size_t r = 0; r < Dim; ++r) d[r][c] = (fp[r] - fm[r]) / (2.0 * h);
        }
        return d;
    }
};

/// u_pre + L(u_pre).
template <std::size_t Dim>
State<Dim> apply_jump(const State<Dim>& u_pre, const JumpMap<Dim>& jump) {
    const State<Dim> l = jump(u_pre);
    State<Dim> out;
    for (std::size_t i = 0; i < Dim; ++i) out[i] = u_pre[i] + l[i];
    return out;
}

struct JumpSolveOptions {
    double tol = 1e-12;
    int max_iter = 50;
};

template <std::size_t Dim>
struct JumpSolveResult {
    bool solved = false;
    State<Dim> pre{};
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

/// Finds v with v + L(v) = u_post by damped Newton iteration seeded at
/// `guess` (u_post when absent). The residual test is |v + L(v) - u_post| <=
/// tol * max(1, |u_post|).
template <std::size_t Dim>
JumpSolveResult<Dim> solve_jump_equation(const State<Dim>& u_post, const JumpMap<Dim>& jump,
                                         std::optional<State<Dim>> guess = std::nullopt,
                                         const JumpSolveOptions& opt = {}) {
    if (!(opt.tol > 0.0)) throw std::invalid_argument("solve_jump_equation: tol must be positive");
    const double scale = std::max(1.0, ode::norm<Dim>(u_post));
    auto residual = [&](const State<Dim>& v) {
        State<Dim> g = apply_jump<Dim>(v, jump);
        for (std::size_t i = 0; i < Dim; ++i) g[i] -= u_post[i];
        return g;
    };

    JumpSolveResult<Dim> res;
    State<Dim> v = guess.value_or(u_post);
    State<Dim> g = residual(v);
    double gn = ode::norm<Dim>(g);
    for (int it = 0; it <= opt.max_iter; ++it) {
        res.iterations = it;
        if (!std::isfinite(gn)) break;
        if (gn <= opt.tol * scale) {
            res.solved = true;
            res.pre = v;
            res.residual = gn;
            return res;
        }
        if (it == opt.max_iter) break;
        Matrix<Dim> jac = jump.derivative(v);
        for (std::size_t i = 0; i < Dim; ++i) jac[i][i] += 1.0;
        State<Dim> rhs;
        for (std::size_t i = 0; i < Dim; ++i) rhs[i] = -g[i];
        const auto delta = solve_linear<Dim>(jac, rhs);
        if (!delta) break;
        double alpha = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
            State<Dim> trial;
            for (std::size_t i = 0; i < Dim; ++i) trial[i] = v[i] + alpha * (*delta)[i];
            const State<Dim> gt = residual(trial);
            const double gtn = ode::norm<Dim>(gt);
            if (std::isfinite(gtn) && gtn < gn) {
                v = trial;
                g = gt;
                gn = gtn;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    res.pre = v;
    res.residual = gn;
    return res;
}

enum class Termination { horizon_reached, escape, jump_unsolvable, adjacency };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::horizon_reached: return "horizon-reached";
        case Termination::escape: return "escape";
        case Termination::jump_unsolvable: return "jump-equation-unsolvable";
        case Termination::adjacency: return "adjacency";
    }
    return "unknown";
}

struct Endpoint {
    double t = 0.0;
    bool closed = true;
    Termination reason = Termination::horizon_reached;
    bool radius_exceeded = false;
    bool step_underflow = false;
};

template <std::size_t Dim>
struct JumpRecord {
    long index = 0;
    double t = 0.0;
    State<Dim> pre{};
    State<Dim> post{};
};

/// Continuous piece of a trajectory between consecutive impulse (or end)
/// times; `start_state` is the right limit at t_lo, `end_state` the value at t_hi.
template <std::size_t Dim>
struct Segment {
    double t_lo = 0.0;
    double t_hi = 0.0;
    State<Dim> start_state{};
    State<Dim> end_state{};
    ode::DenseOutput<Dim> dense;
};

/// A solution on its achieved maximal interval. Left continuous: at an
/// impulse time the stored value is the pre-jump state.
template <std::size_t Dim>
class PiecewiseTrajectory {
public:
    const std::vector<Segment<Dim>>& segments() const { return segments_; }
    const std::vector<JumpRecord<Dim>>& jumps() const { return jumps_; }
    const Endpoint& left() const { return left_; }
    const Endpoint& right() const { return right_; }

    bool contains(double t) const {
        const bool after_left = left_.closed ? t >= left_.t : t > left_.t;
        const bool before_right = right_.closed ? t <= right_.t : t < right_.t;
        return after_left && before_right;
    }

    State<Dim> operator()(double t) const {
        if (segments_.empty() && jumps_.empty()) throw std::out_of_range("PiecewiseTrajectory: empty trajectory");
        if (t < left_.t || t > right_.t) throw std::out_of_range("PiecewiseTrajectory: time outside maximal interval");
        for (const auto& j : jumps_)
            if (j.t == t) return j.pre;
        for (const auto& s : segments_) {
            if (t >= s.t_lo && t <= s.t_hi) {
                if (t == s.t_hi) return s.end_state;
                if (t == s.t_lo) return s.start_state;
                return s.dense(t);
            }
        }
        throw std::out_of_range("PiecewiseTrajectory: time not covered by any segment");
    }

    // Construction interface used by solve_ivp.
    std::vector<Segment<Dim>>& mutable_segments() { return segments_; }
    std::vector<JumpRecord<Dim>>& mutable_jumps() { return jumps_; }
    void set_left(Endpoint e) { left_ = e; }
    void set_right(Endpoint e) { right_ = e; }

private:
    std::vector<Segment<Dim>> segments_;
    std::vector<JumpRecord<Dim>> jumps_;
    Endpoint left_;
    Endpoint right_;
};

/// Solves the impulsive initial value problem u(tau+) = u0 over t_span,
/// extending forward through jumps and backward through jump equations.
///
/// When tau is itself an impulse time, the forward solution starts from u0
/// without applying the jump at tau, and the backward extension first solves
/// the jump equation at tau for the pre-jump value u(tau).
template <std::size_t Dim>
PiecewiseTrajectory<Dim> solve_ivp(const ImpulsiveSystem<Dim>& sys, double tau, const State<Dim>& u0,
                                   std::pair<double, double> t_span, const ode::StepControl& ctl = {},
                                   const JumpSolveOptions& jopt = {}) {
    sys.validate();
    const auto [a, b] = t_span;
    if (!(a <= tau && tau <= b)) throw std::invalid_argument("solve_ivp: t_span must contain tau");
    const auto& sched = sys.schedule;

    PiecewiseTrajectory<Dim> traj;
    auto& segs = traj.mutable_segments();
    auto& jrec = traj.mutable_jumps();
    auto field = [&sys](double t, const State<Dim>& u) { return sys.field(t, u); };
    const auto tau_index = sched.index_at(tau);

    // Forward, following the right-extension cases.
    {
        double t = tau;
        State<Dim> u = u0;
        Endpoint right{tau, !tau_index.has_value(), Termination::horizon_reached};
        while (t < b) {
            const auto nj = sched.next_after(t);
            const double t_next = nj ? std::min(sched.time(*nj), b) : b;
            Segment<Dim> seg;
            seg.t_lo = t;
            seg.start_state = u;
            const auto r = ode::integrate_segment<Dim>(field, t, t_next, u, ctl, &seg.dense);
            if (!r.reached()) {
                seg.t_hi = r.t;
                seg.end_state = r.state;
                segs.push_back(std::move(seg));
                right = {r.t, false, r.radius_exceeded ? Termination::escape : Termination::adjacency,
                         r.radius_exceeded, r.step_underflow};
                break;
            }
            seg.t_hi = t_next;
            seg.end_state = r.state;
            segs.push_back(std::move(seg));
            right = {t_next, true, Termination::horizon_reached};
            if (t_next >= b) break;
            JumpRecord<Dim> rec{*nj, t_next, r.state, apply_jump<Dim>(r.state, sys.jump(*nj))};
            u = rec.post;
            jrec.push_back(rec);
            t = t_next;
        }
        traj.set_right(right);
    }

    // Backward, following the left-extension case.
    std::vector<Segment<Dim>> back_segs;
    std::vector<JumpRecord<Dim>> back_jumps;
    Endpoint left{tau, true, Termination::horizon_reached};
    {
        double t = tau;
        State<Dim> u = u0;
        bool alive = true;
        if (tau_index) {
            if (a < tau) {
                const auto sol = solve_jump_equation<Dim>(u0, sys.jump(*tau_index), std::nullopt, jopt);
                if (!sol.solved) {
                    left = {tau, false, Termination::jump_unsolvable};
                    alive = false;
                } else {
                    back_jumps.push_back({*tau_index, tau, sol.pre, u0});
                    u = sol.pre;
                }
            } else {
                left = {tau, false, Termination::horizon_reached};
                alive = false;
            }
        }
        while (alive && t > a) {
            const auto pj = sched.last_before(t);
            const double t_prev = pj ? std::max(sched.time(*pj), a) : a;
            Segment<Dim> seg;
            seg.t_hi = t;
            seg.end_state = u;
            const auto r = ode::integrate_segment<Dim>(field, t, t_prev, u, ctl, &seg.dense);
            if (!r.reached()) {
                seg.t_lo = r.t;
                seg.start_state = r.state;
                back_segs.push_back(std::move(seg));
                left = {r.t, false, r.radius_exceeded ? Termination::escape : Termination::adjacency,
                        r.radius_exceeded, r.step_underflow};
                break;
            }
            seg.t_lo = t_prev;
            seg.start_state = r.state;
            back_segs.push_back(std::move(seg));
            const bool at_impulse = pj && sched.time(*pj) == t_prev;
            if (!at_impulse) {
                left = {t_prev, true, Termination::horizon_reached};
                break;
            }
            const auto sol = solve_jump_equation<Dim>(r.state, sys.jump(*pj), std::nullopt, jopt);
            if (!sol.solved) {
                left = {t_prev, false, Termination::jump_unsolvable};
                break;
            }
            back_jumps.push_back({*pj, t_prev, sol.pre, r.state});
            u = sol.pre;
            t = t_prev;
            if (t <= a) {
                left = {t, true, Termination::horizon_reached};
                break;
            }
        }
    }
    traj.set_left(left);

    // Assemble in increasing time.
    std::reverse(back_segs.begin(), back_segs.end());
    std::reverse(back_jumps.begin(), back_jumps.end());
    back_segs.insert(back_segs.end(), std::make_move_iterator(segs.begin()), std::make_move_iterator(segs.end()));
    segs = std::move(back_segs);
    back_jumps.insert(back_jumps.end(), jrec.begin(), jrec.end());
    jrec = std::move(back_jumps);
    return traj;
}

}  // namespace ikam::core
