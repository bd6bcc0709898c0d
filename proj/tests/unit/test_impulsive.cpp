#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "ikam/core/impulsive.hpp"
#include "ikam/core/schedule.hpp"
#include "ikam/duffing/model.hpp"
#include "support/oracles.hpp"

using namespace ikam;
using core::ImpulseSchedule;
using core::ImpulsiveSystem;
using core::JumpMap;
using core::State;
using core::Termination;

namespace {

constexpr double pi = std::numbers::pi;

// u' = 1 + u^2 with u -> u - 1 at t = j pi/4.
ImpulsiveSystem<1> riccati_system() {
    ImpulsiveSystem<1> s;
    s.field = [](double, const State<1>& u) { return State<1>{1.0 + u[0] * u[0]}; };
    s.schedule = ImpulseSchedule({0.0}, pi / 4);
    s.jumps = {JumpMap<1>{[](const State<1>&) { return State<1>{-1.0}; }, {}}};
    return s;
}

JumpMap<1> scalar_jump(std::function<double(double)> L) {
    return {[L](const State<1>& u) { return State<1>{L(u[0])}; }, {}};
}

}  // namespace

TEST(Schedule, IndexingAndLookup) {
    ImpulseSchedule s({0.25, 0.5}, 1.0);
    EXPECT_EQ(s.time(0), 0.25);
    EXPECT_EQ(s.time(1), 0.5);
    EXPECT_EQ(s.time(2), 1.25);
    EXPECT_EQ(s.time(-1), -0.5);
    EXPECT_EQ(s.slot(-1), 1u);
    EXPECT_EQ(*s.next_after(0.25), 1);
    EXPECT_EQ(*s.next_after(0.3), 1);
    EXPECT_EQ(*s.last_before(0.25), -1);
    EXPECT_EQ(*s.index_at(1.5), 3);
    EXPECT_FALSE(s.index_at(0.3).has_value());
    EXPECT_TRUE(s.satisfies_unit_period_ordering());
    EXPECT_FALSE(ImpulseSchedule({0.0}, 1.0).satisfies_unit_period_ordering());
    EXPECT_THROW(ImpulseSchedule({0.5, 0.25}), std::invalid_argument);
    EXPECT_THROW(ImpulseSchedule({1.0}), std::invalid_argument);
}

TEST(ApplyJump, Examples) {
    const JumpMap<2> zero = JumpMap<2>::zero();
    EXPECT_EQ((core::apply_jump<2>({3.0, -2.0}, zero)), (State<2>{3.0, -2.0}));
    EXPECT_EQ(core::apply_jump<1>({1.0}, scalar_jump([](double) { return -1.0; }))[0], 0.0);
    const JumpMap<2> shift{[](const State<2>&) { return State<2>{0.5, 0.0}; }, {}};
    EXPECT_EQ((core::apply_jump<2>({1.0, 2.0}, shift)), (State<2>{1.5, 2.0}));
}

TEST(SolveJumpEquation, Examples) {
    const auto r0 = core::solve_jump_equation<2>({4.0, 1.0}, JumpMap<2>::zero());
    ASSERT_TRUE(r0.solved);
    EXPECT_EQ(r0.pre, (State<2>{4.0, 1.0}));

    const auto r1 = core::solve_jump_equation<1>({0.0}, scalar_jump([](double) { return -1.0; }));
    ASSERT_TRUE(r1.solved);
    EXPECT_NEAR(r1.pre[0], 1.0, 1e-12);

    const auto lin = scalar_jump([](double v) { return 0.1 * v; });
    const auto r2 = core::solve_jump_equation<1>({1.1}, lin);
    ASSERT_TRUE(r2.solved);
    const double root = oracle::bisect([](double v) { return v + 0.1 * v - 1.1; }, 0.0, 10.0);
    EXPECT_NEAR(r2.pre[0], 1.0, 1e-12);
    EXPECT_NEAR(r2.pre[0], root, 1e-12);
}

TEST(SolveJumpEquation, ReportsUnsolvable) {
    // v + L(v) = v^2 + 1 has no real solution for u_post = 0
    const auto bad = scalar_jump([](double v) { return v * v + 1.0 - v; });
    const auto r = core::solve_jump_equation<1>({0.0}, bad);
    EXPECT_FALSE(r.solved);
    EXPECT_THROW(core::solve_jump_equation<1>({0.0}, bad, std::nullopt, {0.0, 10}), std::invalid_argument);
}

TEST(SolveJumpEquation, FiniteDifferenceJacobianFallback) {
    const JumpMap<2> nl{[](const State<2>& u) { return State<2>{0.2 * std::sin(u[1]), 0.1 * u[0] * u[0]}; }, {}};
    const State<2> post{0.7, -0.3};
    const auto r = core::solve_jump_equation<2>(post, nl);
    ASSERT_TRUE(r.solved);
    const auto back = core::apply_jump<2>(r.pre, nl);
    EXPECT_NEAR(back[0], post[0], 1e-12);
    EXPECT_NEAR(back[1], post[1], 1e-12);
}

TEST(SolveIvp, RiccatiClosedFormAcrossImpulses) {
    const auto traj = core::solve_ivp<1>(riccati_system(), 0.0, {0.0}, {0.0, 10.0});
    EXPECT_EQ(traj.right().reason, Termination::horizon_reached);
    EXPECT_TRUE(traj.right().closed);
    EXPECT_EQ(traj.right().t, 10.0);
    for (int j = 0; pi / 4 * j + pi / 8 < 10.0; ++j)
        EXPECT_NEAR(traj(j * pi / 4 + pi / 8)[0], std::sqrt(2.0) - 1.0, 1e-8) << "j = " << j;
}

TEST(SolveIvp, RiccatiNotContinuableToFirstImpulse) {
    const auto traj = core::solve_ivp<1>(riccati_system(), 0.0, {1.0}, {0.0, 1.0});
    EXPECT_EQ(traj.right().reason, Termination::escape);
    EXPECT_FALSE(traj.right().closed);
    EXPECT_LE(traj.right().t, pi / 4);
    EXPECT_TRUE(traj.jumps().empty());
}

TEST(SolveIvp, LinearFlowWithoutImpulses) {
    ImpulsiveSystem<1> s;
    s.field = [](double, const State<1>& u) { return u; };
    s.schedule = ImpulseSchedule({0.5});
    s.jumps = {JumpMap<1>::zero()};
    const auto traj = core::solve_ivp<1>(s, 0.0, {1.0}, {0.0, 1.0});
    EXPECT_EQ(traj.left().t, 0.0);
    EXPECT_EQ(traj.right().t, 1.0);
    EXPECT_TRUE(traj.left().closed && traj.right().closed);
    for (double t : {0.1, 0.5, 0.77, 1.0}) EXPECT_NEAR(traj(t)[0], std::exp(t), 1e-9);
}

TEST(SolveIvp, LeftContinuityAndJumpConsistency) {
    const auto traj = core::solve_ivp<1>(riccati_system(), 0.3, {0.1}, {-2.0, 3.0});
    ASSERT_FALSE(traj.jumps().empty());
    const auto& segs = traj.segments();
    for (const auto& j : traj.jumps()) {
        EXPECT_EQ(traj(j.t)[0], j.pre[0]);
        if (j.t > 0.3)
            EXPECT_EQ(j.post[0], j.pre[0] + -1.0);
        else  // pre comes from the jump equation solve
            EXPECT_NEAR(j.post[0], j.pre[0] + -1.0, 1e-12);
        // the segment ending at t_j hands over exactly the pre state
        bool found = false;
        for (const auto& s : segs)
            if (s.t_hi == j.t) {
                EXPECT_EQ(s.end_state[0], j.pre[0]);
                found = true;
            }
        EXPECT_TRUE(found);
        for (const auto& s : segs)
            if (s.t_lo == j.t) EXPECT_EQ(s.start_state[0], j.post[0]);
    }
    for (std::size_t i = 0; i + 1 < segs.size(); ++i) EXPECT_EQ(segs[i].t_hi, segs[i + 1].t_lo);
}

TEST(SolveIvp, InitialConditionAtImpulseTimeIsPostJump) {
    // tau = pi/4 is an impulse time: u(tau+) = 0, so forward it is tan(t - pi/4)
    const auto traj = core::solve_ivp<1>(riccati_system(), pi / 4, {0.0}, {0.0, pi / 2});
    EXPECT_NEAR(traj(pi / 4 + 0.3)[0], std::tan(0.3), 1e-9);
    // backward the jump equation gives u(tau) = 1, then tan(t - pi/4) + 1 to the left
    ASSERT_FALSE(traj.jumps().empty());
    EXPECT_NEAR(traj(pi / 4)[0], 1.0, 1e-12);
    EXPECT_NEAR(traj(pi / 4 - 0.2)[0], std::tan(std::atan(1.0) - 0.2), 1e-9);
}

TEST(SolveIvp, UnsolvableJumpEquationStopsBackwardExtension) {
    ImpulsiveSystem<1> s;
    s.field = [](double, const State<1>&) { return State<1>{0.0}; };
    s.schedule = ImpulseSchedule({0.5});
    s.jumps = {scalar_jump([](double v) { return v * v + 1.0 - v; })};
    const auto traj = core::solve_ivp<1>(s, 0.7, {0.0}, {0.0, 1.0});
    EXPECT_EQ(traj.left().reason, Termination::jump_unsolvable);
    EXPECT_EQ(traj.left().t, 0.5);
    EXPECT_FALSE(traj.left().closed);
    EXPECT_FALSE(traj.contains(0.5));
    EXPECT_TRUE(traj.contains(0.6));
}

TEST(SolveIvp, IntegralIdentityHolds) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        const double a = U(rng), b = U(rng), c = U(rng);
        ImpulsiveSystem<2> s;
        s.field = [a, b](double t, const State<2>& u) {
            return State<2>{u[1], -u[0] - 0.1 * u[0] * u[0] * u[0] + a * std::cos(2 * pi * t) + b * u[1] * 0.05};
        };
        s.schedule = ImpulseSchedule({0.3, 0.7});
        s.jumps = {JumpMap<2>{[c](const State<2>&) { return State<2>{0.1 * c, 0.0}; }, {}},
                   JumpMap<2>{[](const State<2>& u) { return State<2>{0.0, -0.05 * u[0]}; }, {}}};
        const State<2> u0{U(rng), U(rng)};
        const auto traj = core::solve_ivp<2>(s, 0.1, u0, {0.1, 2.9});
        ASSERT_EQ(traj.right().reason, Termination::horizon_reached);

        const double tend = 2.9;
        State<2> integral{};
        for (const auto& seg : traj.segments())
            for (const auto& st : seg.dense.steps()) {
                const double lo = std::min(st.t0, st.t1()), hi = std::max(st.t0, st.t1());
                for (int comp = 0; comp < 2; ++comp) {
                    auto g = [&](double t) { return s.field(t, st.eval(t))[comp]; };
                    integral[comp] += boost::math::quadrature::gauss<double, 15>::integrate(g, lo, hi);
                }
            }
        State<2> jumps{};
        for (const auto& j : traj.jumps())
            if (j.t > 0.1 && j.t < tend)
                for (int comp = 0; comp < 2; ++comp) jumps[comp] += j.post[comp] - j.pre[comp];
        const auto uT = traj(tend);
        for (int comp = 0; comp < 2; ++comp)
            EXPECT_LE(std::abs(uT[comp] - u0[comp] - integral[comp] - jumps[comp]), 1e-9) << "trial " << trial;
    }
}

TEST(SolveIvp, SemigroupOffImpulseTimes) {
    const auto params = duffing::DuffingParams::unforced(1);
    const auto sys = duffing::make_system(params, ImpulseSchedule({0.3, 0.6}),
                                          {duffing::ImpulseEntry::constant_shift(0.1),
                                           duffing::ImpulseEntry::poly_kick(0.0, {0.05, 0.02})});
    const State<2> u0{1.2, -0.4};
    const double t1 = 1.15, t2 = 2.5;
    const auto whole = core::solve_ivp<2>(sys, 0.0, u0, {0.0, t2});
    const auto first = core::solve_ivp<2>(sys, 0.0, u0, {0.0, t1});
    const auto second = core::solve_ivp<2>(sys, t1, first(t1), {t1, t2});
    for (int c = 0; c < 2; ++c) EXPECT_NEAR(whole(t2)[c], second(t2)[c], 1e-9);
}

TEST(SolveIvp, ElasticPropertyOnGrid) {
    const auto params = duffing::DuffingParams::unforced(1);
    const auto sys = duffing::make_system(params, ImpulseSchedule({0.3, 0.6}),
                                          {duffing::ImpulseEntry::poly_kick(0.1, {0.0, 0.2}),
                                           duffing::ImpulseEntry::poly_kick(-0.05, {0.1, -0.1})});
    const std::vector<double> radii{1, 2, 3, 5, 8, 12, 16, 20, 30, 40, 60, 80, 120, 160, 240, 320, 480};
    auto min_norm_over_period = [&](double r, double phi) {
        const State<2> u0{r * std::cos(phi), r * std::sin(phi)};
        const auto traj = core::solve_ivp<2>(sys, 0.0, u0, {0.0, 1.0});
        double m = std::hypot(u0[0], u0[1]);
        for (int j = 0; j <= 400; ++j) {
            const auto u = traj(j / 400.0);
            m = std::min(m, std::hypot(u[0], u[1]));
        }
        for (const auto& jr : traj.jumps()) m = std::min(m, std::hypot(jr.post[0], jr.post[1]));
        return m;
    };
    double prev_r = 0.0;
    for (double b0 : {1.0, 2.0, 5.0, 10.0, 20.0}) {
        double found = -1.0;
        for (double r : radii) {
            bool ok = true;
            for (double scale : {1.0, 1.5, 2.0})
                for (int k = 0; k < 16 && ok; ++k) ok = min_norm_over_period(r * scale, 2 * pi * k / 16) >= b0;
            if (ok) {
                found = r;
                break;
            }
        }
        ASSERT_GT(found, 0.0) << "no radius forces |u| >= " << b0;
        EXPECT_GE(found, prev_r);
        prev_r = found;
    }
}
