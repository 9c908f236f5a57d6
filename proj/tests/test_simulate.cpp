#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "impulse/periodic.hpp"
#include "impulse/simulate.hpp"

using namespace impulse;

namespace {

const ModelParams& params() {
    static const ModelParams p = default_params();
    return p;
}

double final_s1(double tau, double u, double horizon, double dt = 0.01) {
    const ReleaseSchedule s = constant_schedule_for_horizon(tau, u, horizon, true);
    return simulate_final(params(), s, {374.0, 0.0}, horizon, dt).s1;
}

}  // namespace

TEST_CASE("apply_impulse leaves s1 alone and adds exactly u") {
    const State a = apply_impulse({374.0, 0.0}, 300.0);
    CHECK(a.s1 == 374.0);
    CHECK(a.s2 == 300.0);

    const State b{33.33, 674.47};
    const State c = apply_impulse(b, 100.0);
    CHECK(c.s1 == b.s1);
    CHECK(c.s2 == b.s2 + 100.0);

    const State d = apply_impulse(b, 0.0);
    CHECK(d.s1 == b.s1);
    CHECK(d.s2 == b.s2);

    CHECK_THROWS_AS(apply_impulse(b, -1.0), NegativeRelease);
}

TEST_CASE("equilibrium initial condition stays put") {
    const ReleaseSchedule s = constant_schedule_for_horizon(5.0, 0.0, 100.0, true);
    const Trajectory traj = simulate(params(), s, {0.0, params().raw.K2}, 100.0);
    for (const auto& sample : traj.samples) {
        CHECK(sample.state.s1 == 0.0);
        CHECK(std::abs(sample.state.s2 - params().raw.K2) < 1e-9 * params().raw.K2);
    }
}

TEST_CASE("impulse bookkeeping: pre/post pairs, exact jumps, exhausted schedule") {
    ReleaseSchedule s;
    s.tau = 7.0;
    s.amounts = {100.0, 200.0, 300.0};
    s.u_max = 300.0;
    s.include_t0 = false;
    const Trajectory traj = simulate(params(), s, {374.0, 0.0}, 30.0);

    std::vector<std::size_t> pre_idx;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        if (traj.samples[i].tag == SampleTag::pre_impulse) pre_idx.push_back(i);
    }
    REQUIRE(pre_idx.size() == 3);  // impulse at t=28 has no amount left
    const double expected_times[] = {7.0, 14.0, 21.0};
    for (std::size_t k = 0; k < pre_idx.size(); ++k) {
        const auto& pre = traj.samples[pre_idx[k]];
        const auto& post = traj.samples[pre_idx[k] + 1];
        REQUIRE(post.tag == SampleTag::post_impulse);
        CHECK(pre.t == expected_times[k]);
        CHECK(post.t == pre.t);
        CHECK(post.state.s1 == pre.state.s1);
        CHECK(post.state.s2 == pre.state.s2 + s.amounts[k]);
        CHECK(post.u_applied == s.amounts[k]);
    }
    for (std::size_t i = 0; i + 1 < traj.samples.size(); ++i) {
        CHECK(traj.samples[i].t <= traj.samples[i + 1].t);
    }
    CHECK(traj.samples.back().t == 30.0);
}

TEST_CASE("impulse at t=0 when the schedule includes it") {
    const ReleaseSchedule s = constant_schedule(7.0, 300.0, 2, true);
    const Trajectory traj = simulate(params(), s, {374.0, 0.0}, 10.0);
    REQUIRE(traj.samples.size() >= 2);
    CHECK(traj.samples[0].tag == SampleTag::pre_impulse);
    CHECK(traj.samples[0].t == 0.0);
    CHECK(traj.samples[0].state.s2 == 0.0);
    CHECK(traj.samples[1].tag == SampleTag::post_impulse);
    CHECK(traj.samples[1].state.s2 == 300.0);
    CHECK(traj.samples[1].state.s1 == 374.0);
}

TEST_CASE("step snapping makes impulse times grid nodes") {
    ReleaseSchedule s = constant_schedule(7.0, 10.0, 3, false);
    SimOptions opt;
    opt.dt_request = 0.03;
    const Trajectory traj = simulate(params(), s, {100.0, 0.0}, 21.0, opt);
    const double expected_dt = 7.0 / std::ceil(7.0 / 0.03);
    CHECK(traj.dt == expected_dt);
}

TEST_CASE("simulate input validation") {
    const ReleaseSchedule s = constant_schedule(7.0, 10.0, 3, false);
    SimOptions bad;
    bad.dt_request = 0.0;
    CHECK_THROWS_AS(simulate(params(), s, {1.0, 1.0}, 10.0, bad), InvalidStep);
    CHECK_THROWS_AS(simulate(params(), s, {1.0, 1.0}, -5.0), HorizonNonPositive);
    CHECK_THROWS_AS(simulate(params(), s, {1.0, 1.0}, 0.0), HorizonNonPositive);

    ReleaseSchedule neg = s;
    neg.amounts[1] = -2.0;
    CHECK_THROWS_AS(simulate(params(), neg, {1.0, 1.0}, 10.0), NegativeRelease);
}

TEST_CASE("oversized releases clamp without corrupting the run") {
    const ReleaseSchedule s = constant_schedule_for_horizon(14.0, 43760.0, 28.0, true);
    const Trajectory traj = simulate(params(), s, {374.0, 0.0}, 28.0);
    CHECK(traj.clamped);
    for (const auto& sample : traj.samples) {
        CHECK(sample.state.s1 >= 0.0);
        CHECK(sample.state.s2 >= 0.0);
        CHECK(std::isfinite(sample.state.s1));
        CHECK(std::isfinite(sample.state.s2));
    }
}

TEST_CASE("reference scenario finals (dt = 0.01, ic (374,0), horizon 180)") {
    // Values frozen from an independent fixed-step RK4 implementation and
    // cross-checked against an adaptive LSODA integration at rtol 1e-12.
    CHECK(final_s1(7.0, 100.0, 180.0) == doctest::Approx(129.357).epsilon(1e-3));
    CHECK(final_s1(14.0, 200.0, 180.0) == doctest::Approx(178.171).epsilon(1e-3));
    CHECK(final_s1(7.0, 300.0, 180.0) == doctest::Approx(9.134506).epsilon(1e-3));
    CHECK(final_s1(3.0, 80.0, 180.0) == doctest::Approx(0.890736).epsilon(1e-3));
    CHECK(final_s1(7.0, 80.0, 180.0) == doctest::Approx(202.578).epsilon(1e-3));
    CHECK(final_s1(7.0, 200.0, 180.0) == doctest::Approx(0.978837).epsilon(1e-3));
    CHECK(final_s1(14.0, 600.0, 180.0) == doctest::Approx(2.931764).epsilon(1e-3));

    // all five suppression scenarios end below the survival threshold
    for (auto [tau, u] : {std::pair{7.0, 300.0}, {14.0, 43760.0}, {3.0, 80.0}, {7.0, 200.0},
                          {14.0, 600.0}}) {
        CHECK(final_s1(tau, u, 180.0) < params().Kb);
    }
    for (auto [tau, u] : {std::pair{7.0, 100.0}, {14.0, 200.0}, {7.0, 80.0}}) {
        CHECK(final_s1(tau, u, 180.0) > params().Kb);
    }
}

TEST_CASE("step halving shows fourth-order convergence on a smooth segment") {
    ReleaseSchedule s;
    s.tau = 5.0;
    s.amounts.clear();
    s.u_max = 0.0;
    s.include_t0 = false;
    const State ic{100.0, 50.0};

    auto final_at = [&](double dt) { return simulate_final(params(), s, ic, 5.0, dt); };
    const State ref = final_at(0.025);
    const State coarse = final_at(0.2);
    const State half = final_at(0.1);
    const double e1 = std::hypot(coarse.s1 - ref.s1, coarse.s2 - ref.s2);
    const double e2 = std::hypot(half.s1 - ref.s1, half.s2 - ref.s2);
    REQUIRE(e2 > 0.0);
    CHECK(e1 / e2 >= 12.0);
}

TEST_CASE("identical inputs give bit-identical trajectories") {
    const ReleaseSchedule s = constant_schedule_for_horizon(7.0, 150.0, 60.0, true);
    const Trajectory a = simulate(params(), s, {374.0, 0.0}, 60.0);
    const Trajectory b = simulate(params(), s, {374.0, 0.0}, 60.0);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].t == b.samples[i].t);
        CHECK(a.samples[i].state.s1 == b.samples[i].state.s1);
        CHECK(a.samples[i].state.s2 == b.samples[i].state.s2);
        CHECK(a.samples[i].tag == b.samples[i].tag);
    }
}

TEST_CASE("positivity and uniform bounds over random impulsive runs") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> tau_d(1.0, 30.0);
    std::uniform_real_distribution<double> u_d(0.0, 1000.0);
    std::uniform_real_distribution<double> s1_d(0.0, 500.0);
    std::uniform_real_distribution<double> s2_d(0.0, 600.0);

    for (int run = 0; run < 50; ++run) {
        const double tau = tau_d(rng);
        const double horizon = 60.0;
        ReleaseSchedule s;
        s.tau = tau;
        s.u_max = 1000.0;
        s.include_t0 = run % 2 == 0;
        const int count =
            static_cast<int>(horizon / tau) + (s.include_t0 ? 1 : 0) + 1;
        for (int i = 0; i < count; ++i) s.amounts.push_back(u_d(rng));
        const State ic{s1_d(rng), s2_d(rng)};

        const Trajectory traj = simulate(params(), s, ic, horizon, {0.01, 4});
        double s1_max = 0, s2_max = 0;
        for (const auto& sample : traj.samples) {
            CHECK(sample.state.s1 >= 0.0);
            CHECK(sample.state.s2 >= 0.0);
            s1_max = std::max(s1_max, sample.state.s1);
            s2_max = std::max(s2_max, sample.state.s2);
        }
        CHECK(s1_max <= std::max(params().Kstar, ic.s1) * (1.0 + 1e-6));
        // s2 is bounded by its own impulsive logistic ceiling: the post-impulse
        // fixed point at the release cap, or the starting level if higher.
        const double ceiling =
            std::max({params().raw.K2, ic.s2, z2_plus(s.u_max, tau, params())}) + s.u_max;
        CHECK(s2_max <= ceiling * (1.0 + 1e-6));
    }
}

TEST_CASE("classify_elimination verdicts") {
    SimOptions opt;
    opt.dt_request = 0.01;
    opt.stride = 10;

    const ReleaseSchedule none = constant_schedule_for_horizon(5.0, 0.0, 100.0, true);
    const Trajectory constant =
        simulate(params(), none, {0.0, params().raw.K2}, 100.0, opt);
    CHECK(classify_elimination(constant, 1.0));

    const ReleaseSchedule weak = constant_schedule_for_horizon(7.0, 100.0, 180.0, true);
    const Trajectory persists = simulate(params(), weak, {374.0, 0.0}, 180.0, opt);
    CHECK_FALSE(classify_elimination(persists, 1.0));
    CHECK_FALSE(classify_elimination(persists, params().Kb));

    const ReleaseSchedule strong = constant_schedule_for_horizon(3.0, 80.0, 180.0, true);
    const Trajectory eliminated = simulate(params(), strong, {374.0, 0.0}, 180.0, opt);
    CHECK(classify_elimination(eliminated, 1.0));

    CHECK_THROWS_AS(classify_elimination(Trajectory{}, 1.0), EmptyTrajectory);
}
