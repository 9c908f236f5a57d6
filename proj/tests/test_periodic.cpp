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

// Independent oracle: iterate the period map from K2 until it settles.
double fixed_point_by_iteration(double u, double tau) {
    double z = params().raw.K2;
    for (int i = 0; i < 500; ++i) {
        const double next = recursion_map(z, u, tau, params());
        if (std::abs(next - z) < 1e-10 * std::max(1.0, z)) return next;
        z = next;
    }
    return z;
}

}  // namespace

TEST_CASE("no release degenerates to the carrying capacity") {
    for (double tau : {0.5, 3.0, 7.0, 14.0, 30.0}) {
        CHECK(z2_plus(0.0, tau, params()) ==
              doctest::Approx(params().raw.K2).epsilon(1e-12));
        const PeriodicOrbit orbit = make_orbit(0.0, tau, params());
        for (double frac : {0.1, 0.5, 1.0}) {
            CHECK(orbit_eval(orbit, frac * tau) ==
                  doctest::Approx(params().raw.K2).epsilon(1e-12));
        }
    }
}

TEST_CASE("post-impulse value agrees with the fixed-point iteration oracle") {
    CHECK(z2_plus(300.0, 7.0, params()) ==
          doctest::Approx(fixed_point_by_iteration(300.0, 7.0)).epsilon(1e-9));
    CHECK(z2_plus(300.0, 7.0, params()) == doctest::Approx(674.471027).epsilon(1e-6));

    const double v = z2_plus(600.0, 14.0, params());
    CHECK(std::abs(recursion_map(v, 600.0, 14.0, params()) - v) / v < 1e-12);

    CHECK_THROWS_AS(z2_plus(300.0, 0.0, params()), InvalidTau);
    CHECK_THROWS_AS(z2_plus(300.0, -1.0, params()), InvalidTau);
}

TEST_CASE("recursion map properties") {
    CHECK(recursion_map(params().raw.K2, 0.0, 7.0, params()) ==
          doctest::Approx(params().raw.K2).epsilon(1e-12));
    CHECK_THROWS_AS(recursion_map(0.0, 10.0, 7.0, params()), NonPositiveState);

    // strictly increasing
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> z_d(1.0, 2000.0);
    std::uniform_real_distribution<double> u_d(0.0, 1000.0);
    std::uniform_real_distribution<double> tau_d(1.0, 30.0);
    for (int i = 0; i < 200; ++i) {
        const double z = z_d(rng);
        const double u = u_d(rng);
        const double tau = tau_d(rng);
        const double delta = 1e-3 * z;
        CHECK(recursion_map(z + delta, u, tau, params()) > recursion_map(z, u, tau, params()));
    }
}

TEST_CASE("iterates converge monotonically to the fixed point") {
    for (auto [u, tau] : {std::pair{300.0, 7.0}, {600.0, 14.0}, {80.0, 3.0}, {43760.0, 14.0}}) {
        const double zstar = z2_plus(u, tau, params());
        for (double z0 : {zstar / 2.0, 2.0 * zstar}) {
            double z = z0;
            const bool from_below = z0 < zstar;
            bool converged = false;
            for (int i = 0; i < 200; ++i) {
                const double next = recursion_map(z, u, tau, params());
                if (from_below) {
                    CHECK(next >= z - 1e-9 * z);
                } else {
                    CHECK(next <= z + 1e-9 * z);
                }
                z = next;
                if (std::abs(z - zstar) < 1e-9 * zstar) {
                    converged = true;
                    break;
                }
            }
            CHECK(converged);
        }
    }
}

TEST_CASE("orbit evaluation: limits and the reference point") {
    const PeriodicOrbit orbit = make_orbit(300.0, 7.0, params());
    CHECK(orbit_eval(orbit, 1e-12) == doctest::Approx(orbit.z2_plus).epsilon(1e-9));
    CHECK(orbit_eval(orbit, 7.0) == doctest::Approx(374.471027).epsilon(1e-6));
    CHECK(orbit_period_min(orbit) == doctest::Approx(374.471027).epsilon(1e-6));
    CHECK_THROWS_AS(orbit_eval(orbit, 0.0), OffsetOutOfRange);
    CHECK_THROWS_AS(orbit_eval(orbit, 7.5), OffsetOutOfRange);
}

TEST_CASE("closed form matches one-period integration of the reduced system") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u_d(0.0, 1000.0);
    std::uniform_real_distribution<double> tau_d(1.0, 30.0);
    ReleaseSchedule no_release;
    no_release.amounts.clear();
    no_release.u_max = 0.0;
    no_release.include_t0 = false;

    for (int i = 0; i < 50; ++i) {
        const double u = u_d(rng);
        const double tau = tau_d(rng);
        const PeriodicOrbit orbit = make_orbit(u, tau, params());
        no_release.tau = tau;
        // with s1 = 0 the full system reduces to the s2-only dynamics
        const State end =
            simulate_final(params(), no_release, {0.0, orbit.z2_plus}, tau, 0.01);
        const double closed = orbit_eval(orbit, tau);
        INFO("u=", u, " tau=", tau);
        CHECK(std::abs(end.s2 - closed) / closed < 1e-6);
    }
}

TEST_CASE("eta reference values and sign structure") {
    CHECK(eta(3.0, params()) == doctest::Approx(59.039916).epsilon(1e-4));
    CHECK(eta(7.0, params()) == doctest::Approx(296.226525).epsilon(1e-4));
    CHECK(eta(11.0, params()) == doctest::Approx(43759.8987).epsilon(1e-4));
    CHECK(eta(14.0, params()) == doctest::Approx(-927.3339).epsilon(1e-4));
    CHECK(eta(21.0, params()) < 0.0);
    CHECK(std::abs(eta(1e-6, params())) < 1e-3);

    CHECK_THROWS_AS(eta(0.0, params()), InvalidTau);
    CHECK_THROWS_AS(eta(tau_singular(params()), params()), SingularPeriod);
}

TEST_CASE("singular period for the default parameters") {
    CHECK(tau_singular(params()) == doctest::Approx(11.0465037445).epsilon(1e-9));
}

TEST_CASE("eta_max on the default domain and on restricted domains") {
    const SufficientCondition sc = eta_max(params(), default_eta_domain(params()));
    CHECK(sc.eta_max == doctest::Approx(43759.8987).epsilon(1e-6));
    CHECK(sc.tau_max == doctest::Approx(11.0).epsilon(1e-6));
    CHECK(sc.tau_max < tau_singular(params()));
    CHECK(sc.eta_max > 0.0);

    // eta increases on (0, 3], so the maximum sits at the right endpoint
    const SufficientCondition small = eta_max(params(), {0.5, 3.0});
    CHECK(small.eta_max == doctest::Approx(eta(3.0, params())).epsilon(1e-9));

    // past the singular period eta is negative throughout
    CHECK_THROWS_AS(eta_max(params(), {14.0, 30.0}), NoPositiveBranch);
}

TEST_CASE("eta_max dominates sampled eta values in its domain") {
    const TauInterval domain{0.5, 10.5};
    const SufficientCondition sc = eta_max(params(), domain);
    for (int i = 0; i <= 300; ++i) {
        const double tau = domain.lo + (domain.hi - domain.lo) * i / 300.0;
        CHECK(sc.eta_max >= eta(tau, params()) - 1e-9 * std::abs(sc.eta_max));
    }
}

TEST_CASE("stability_sufficient verdicts") {
    const StabilityReport strong = stability_sufficient(300.0, 7.0, params());
    CHECK(strong.holds);
    CHECK(strong.period_min == doctest::Approx(374.471027).epsilon(1e-6));
    CHECK(strong.period_min > params().raw.K1);
    CHECK(strong.eta_criterion == EtaCriterion::satisfied);

    const StabilityReport weak = stability_sufficient(100.0, 7.0, params());
    CHECK_FALSE(weak.holds);
    CHECK(weak.eta_criterion == EtaCriterion::not_satisfied);

    const StabilityReport none = stability_sufficient(0.0, 7.0, params());
    CHECK_FALSE(none.holds);
    CHECK(none.period_min == doctest::Approx(params().raw.K2).epsilon(1e-9));

    const StabilityReport negative_eta = stability_sufficient(600.0, 14.0, params());
    CHECK_FALSE(negative_eta.holds);  // sufficient condition silent, not necessary
    CHECK(negative_eta.eta_criterion == EtaCriterion::negative_eta_inconclusive);
}
