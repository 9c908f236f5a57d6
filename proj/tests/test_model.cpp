#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "impulse/model.hpp"
#include "impulse/simulate.hpp"

using namespace impulse;

namespace {

// Left side of the depensation equilibrium equation whose positive roots are
// Kb and Kstar. Used as an independent oracle against the closed form.
double depensation_residual(double y, const RawParams& q) {
    const double r1 = q.psi1 - q.delta1;
    return (q.psi1 - r1 * y / q.K1) * (y / q.K0 - 1.0) - q.delta1;
}

double bisect_root(double lo, double hi, const RawParams& q) {
    double flo = depensation_residual(lo, q);
    REQUIRE(flo * depensation_residual(hi, q) < 0.0);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = depensation_residual(mid, q);
        if (flo * fm <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("growth rates from the default parameter set") {
    const ModelParams p = default_params();
    CHECK(p.r1 == doctest::Approx(0.29334).epsilon(1e-12));
    CHECK(p.r2 == doctest::Approx(0.14667).epsilon(1e-12));
}

TEST_CASE("Kb and Kstar agree with the bisection oracle") {
    const RawParams q = default_raw_params();
    const ModelParams p = derive_params(q);

    const double kb_oracle = bisect_root(q.K0 + 1e-9, q.K2, q);
    const double kstar_oracle = bisect_root(q.K2, 10.0 * q.K1, q);
    CHECK(p.Kb == doctest::Approx(kb_oracle).epsilon(1e-9));
    CHECK(p.Kstar == doctest::Approx(kstar_oracle).epsilon(1e-9));

    CHECK(p.Kb == doctest::Approx(33.33).epsilon(2e-4));
    CHECK(p.Kstar == doctest::Approx(413.2).epsilon(2e-4));

    // the closed-form roots satisfy the equation to high relative accuracy
    const double scale = q.psi1 + q.delta1;
    CHECK(std::abs(depensation_residual(p.Kb, q)) < 1e-9 * scale);
    CHECK(std::abs(depensation_residual(p.Kstar, q)) < 1e-9 * scale);
}

TEST_CASE("saddle point coordinates and stationarity") {
    const ModelParams p = default_params();
    CHECK(p.S1_saddle == doctest::Approx(40.94).epsilon(2e-4));
    CHECK(p.S2_saddle == doctest::Approx(259.06).epsilon(2e-4));
    CHECK(p.S2_saddle == doctest::Approx(p.raw.K2 - p.S1_saddle).epsilon(1e-12));

    const Deriv d = vector_field({p.S1_saddle, p.S2_saddle}, p);
    CHECK(std::abs(d.ds1) < 1e-9 * p.S1_saddle);
    CHECK(std::abs(d.ds2) < 1e-9 * p.S2_saddle);
}

TEST_CASE("ordering chain holds for defaults and for accepted random draws") {
    const ModelParams p = default_params();
    CHECK(0.0 < p.raw.K0);
    CHECK(p.raw.K0 < p.Kb);
    CHECK(p.Kb < p.raw.K2);
    CHECK(p.raw.K2 < p.raw.K1);
    CHECK(p.raw.K1 < p.Kstar);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int accepted = 0;
    for (int i = 0; i < 2000 && accepted < 50; ++i) {
        // draws shaped by the standing assumptions; derive_params makes the call
        RawParams q;
        q.delta1 = 0.01 + 0.07 * unit(rng);
        q.psi1 = q.delta1 + 0.15 + 0.25 * unit(rng);
        q.delta2 = q.delta1 + 0.01 + 0.08 * unit(rng);
        q.psi2 = q.delta2 + 0.05 + 0.5 * (q.psi1 - q.delta1 - 0.05) * unit(rng);
        q.K0 = 10.0 + 50.0 * unit(rng);
        q.K1 = q.K0 * (5.0 + 10.0 * unit(rng));
        q.K2 = q.K1 * (0.5 + 0.45 * unit(rng));
        try {
            const ModelParams m = derive_params(q);
            ++accepted;
            CHECK(q.K0 < m.Kb);
            CHECK(m.Kb < q.K2);
            CHECK(q.K2 < q.K1);
            CHECK(q.K1 < m.Kstar);
            CHECK(m.r1 > m.r2);
        } catch (const std::invalid_argument&) {
        }
    }
    CHECK(accepted >= 20);
}

TEST_CASE("assumption violations are hard errors") {
    RawParams q = default_raw_params();
    q.psi2 = q.psi1;  // equal birth rates
    CHECK_THROWS_AS(derive_params(q), AssumptionViolated);

    q = default_raw_params();
    q.delta1 = -0.1;
    CHECK_THROWS_AS(derive_params(q), NonPositiveParameter);

    q = default_raw_params();
    q.delta2 = q.delta1 / 2.0;
    CHECK_THROWS_AS(derive_params(q), AssumptionViolated);

    // no real roots for the depensation quadratic
    q = RawParams{0.35, 0.2, 0.01, 0.05, 100.0, 120.0, 110.0};
    CHECK_THROWS_AS(derive_params(q), NegativeDiscriminant);
}

TEST_CASE("the S1 axis is invariant for the vector field") {
    const ModelParams p = default_params();
    for (double s2 : {0.0, 1.0, p.raw.K2, 1e4, 1e8}) {
        CHECK(vector_field({0.0, s2}, p).ds1 == 0.0);
    }
}

TEST_CASE("equilibria of the continuous system") {
    const ModelParams p = default_params();

    const Deriv at_k2 = vector_field({0.0, p.raw.K2}, p);
    CHECK(at_k2.ds1 == 0.0);
    CHECK(std::abs(at_k2.ds2) < 1e-12 * p.raw.K2);

    const Deriv at_kstar = vector_field({p.Kstar, 0.0}, p);
    CHECK(std::abs(at_kstar.ds1) < 1e-9 * p.Kstar);
    CHECK(at_kstar.ds2 == 0.0);
}

TEST_CASE("predict_outcome classification") {
    const ModelParams p = default_params();
    CHECK(predict_outcome({p.raw.K1, 10.0}, p) == OutcomeClass::S1_persists);
    CHECK(predict_outcome({20.0, 10.0}, p) == OutcomeClass::S2_persists);
    CHECK(predict_outcome({p.Kb, 5.0}, p) == OutcomeClass::saddle_boundary);
    CHECK_THROWS_AS(predict_outcome({0.0, 0.0}, p), OriginExcluded);
    CHECK_THROWS_AS(predict_outcome({-1.0, 5.0}, p), OriginExcluded);
}

TEST_CASE("predict_outcome matches long uncontrolled simulations on a grid") {
    const ModelParams p = default_params();
    ReleaseSchedule no_release;
    no_release.tau = 30.0;
    no_release.amounts.clear();
    no_release.u_max = 0.0;
    no_release.include_t0 = false;

    // Sampled where the threshold classification is exact: the full quadrant
    // below Kb, and moderate s2 above it (near the saddle the separatrix
    // bends away from the vertical line s1 = Kb).
    std::vector<State> extinction_side;
    for (double s1 : {5.0, 15.0, 25.0, 31.0}) {
        for (double s2 : {0.0, 10.0, 50.0, 300.0}) extinction_side.push_back({s1, s2});
    }
    std::vector<State> persistence_side;
    for (double s1 : {100.0, 200.0, 374.0, 450.0}) {
        for (double s2 : {0.0, 10.0}) persistence_side.push_back({s1, s2});
    }

    CHECK(extinction_side.size() + persistence_side.size() >= 20);

    for (const State& ic : extinction_side) {
        CHECK(predict_outcome(ic, p) == OutcomeClass::S2_persists);
        const State end = simulate_final(p, no_release, ic, 600.0, 0.02);
        INFO("ic (", ic.s1, ", ", ic.s2, ")");
        CHECK(end.s1 < 1.0);
    }
    for (const State& ic : persistence_side) {
        CHECK(predict_outcome(ic, p) == OutcomeClass::S1_persists);
        const State end = simulate_final(p, no_release, ic, 600.0, 0.02);
        INFO("ic (", ic.s1, ", ", ic.s2, ")");
        CHECK(end.s1 > p.Kb);
        CHECK(end.s1 == doctest::Approx(p.Kstar).epsilon(1e-2));
    }
}
