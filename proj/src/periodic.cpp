#include "impulse/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace impulse {

namespace {

void check_tau(double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidTau("tau must be strictly positive");
}

void check_u(double u) {
    if (!(u >= 0.0) || !std::isfinite(u)) {
        throw std::invalid_argument("release amount must be non-negative");
    }
}

}  // namespace

double z2_plus(double u, double tau, const ModelParams& p) {
    check_tau(tau);
    check_u(u);
    const double K2 = p.raw.K2;
    const double em1 = std::expm1(p.r2 * tau);
    const double s = u + K2;
    return 0.5 * (s + std::sqrt(s * s + 4.0 * u * K2 / em1));
}

double recursion_map(double z, double u, double tau, const ModelParams& p) {
    check_tau(tau);
    check_u(u);
    if (!(z > 0.0)) throw NonPositiveState("recursion map requires z > 0");
    const double K2 = p.raw.K2;
    const double em1 = std::expm1(p.r2 * tau);
    return K2 * z * (em1 + 1.0) / (z * em1 + K2) + u;
}

PeriodicOrbit make_orbit(double u, double tau, const ModelParams& p) {
    PeriodicOrbit orbit;
    orbit.tau = tau;
    orbit.u = u;
    orbit.z2_plus = z2_plus(u, tau, p);
    orbit.params = p;
    return orbit;
}

double orbit_eval(const PeriodicOrbit& orbit, double t_in_period) {
    if (!(t_in_period > 0.0) || t_in_period > orbit.tau * (1.0 + 1e-12)) {
        throw OffsetOutOfRange("offset must lie in (0, tau]");
    }
    const double K2 = orbit.params.raw.K2;
    const double z = orbit.z2_plus;
    const double em1 = std::expm1(orbit.params.r2 * t_in_period);
    return K2 * z * (em1 + 1.0) / (z * em1 + K2);
}

double orbit_period_min(const PeriodicOrbit& orbit) {
    return orbit_eval(orbit, orbit.tau);
}

double tau_singular(const ModelParams& p) {
    return std::log(p.raw.K1 / (p.raw.K1 - p.raw.K2)) / p.r2;
}

double eta(double tau, const ModelParams& p) {
    check_tau(tau);
    const double K1 = p.raw.K1;
    const double K2 = p.raw.K2;
    const double em1 = std::expm1(p.r2 * tau);
    const double den = K2 - em1 * (K1 - K2);
    if (std::abs(den) < 1e-12) {
        throw SingularPeriod("phi denominator vanishes at this period");
    }
    const double phi = K1 * K2 / den;
    return em1 * phi * (phi - K2) / (K2 + phi * em1);
}

TauInterval default_eta_domain(const ModelParams& p) {
    const double ts = tau_singular(p);
    double hi = std::floor(ts);
    if (hi < 1.0) hi = 0.95 * ts;
    return {1e-3, hi};
}

namespace {

constexpr double kPoleWindow = 1e-6;  // days excluded on each side of tau_singular

double eta_or_nan(double tau, const ModelParams& p) {
    try {
        return eta(tau, p);
    } catch (const SingularPeriod&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

// Golden-section maximization of eta on [a, b].
double golden_max(double a, double b, const ModelParams& p, double& best_tau) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = eta_or_nan(c, p);
    double fd = eta_or_nan(d, p);
    for (int i = 0; i < 120 && (b - a) > 1e-12 * std::max(1.0, b); ++i) {
        if (!(fc < fd)) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = eta_or_nan(c, p);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = eta_or_nan(d, p);
        }
    }
    best_tau = 0.5 * (a + b);
    return eta_or_nan(best_tau, p);
}

}  // namespace

SufficientCondition eta_max(const ModelParams& p, TauInterval domain, int grid_points) {
    if (!(domain.lo > 0.0) || !(domain.hi > domain.lo)) {
        throw std::invalid_argument("eta_max domain must satisfy 0 < lo < hi");
    }
    const int n = std::max(grid_points, 2000);
    const double ts = tau_singular(p);

    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(n) + 96);
    for (int i = 0; i <= n; ++i) {
        grid.push_back(domain.lo + (domain.hi - domain.lo) * static_cast<double>(i) / n);
    }
    // log-spaced densification toward the pole from both sides
    for (int j = 0; j < 48; ++j) {
        const double off = kPoleWindow * std::pow(1.5, j);
        for (double t : {ts - off, ts + off}) {
            if (t > domain.lo && t < domain.hi) grid.push_back(t);
        }
    }
    std::sort(grid.begin(), grid.end());

    double best_val = -std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::abs(grid[i] - ts) < kPoleWindow) continue;
        const double v = eta_or_nan(grid[i], p);
        if (std::isfinite(v) && v > best_val) {
            best_val = v;
            best_idx = i;
        }
    }
    if (!(best_val > 0.0)) {
        throw NoPositiveBranch("eta has no positive values in the search domain");
    }

    double lo = best_idx > 0 ? grid[best_idx - 1] : domain.lo;
    double hi = best_idx + 1 < grid.size() ? grid[best_idx + 1] : domain.hi;
    // keep the refinement bracket on the same side of the pole
    const double t0 = grid[best_idx];
    if (t0 < ts) hi = std::min(hi, ts - kPoleWindow);
    if (t0 > ts) lo = std::max(lo, ts + kPoleWindow);

    double tau_best = t0;
    double val_best = golden_max(lo, hi, p, tau_best);
    // the domain endpoint itself may carry the maximum
    for (double cand : {t0, domain.hi, hi}) {
        if (std::abs(cand - ts) < kPoleWindow) continue;
        if (cand < domain.lo || cand > domain.hi) continue;
        const double v = eta_or_nan(cand, p);
        if (std::isfinite(v) && v > val_best) {
            val_best = v;
            tau_best = cand;
        }
    }

    SufficientCondition out;
    out.tau_max = tau_best;
    out.eta_max = val_best;
    out.search_domain = domain;
    return out;
}

const char* to_string(EtaCriterion c) {
    switch (c) {
        case EtaCriterion::satisfied: return "satisfied";
        case EtaCriterion::not_satisfied: return "not_satisfied";
        case EtaCriterion::negative_eta_inconclusive: return "negative_eta_inconclusive";
        case EtaCriterion::singular_period: return "singular_period";
    }
    return "?";
}

StabilityReport stability_sufficient(double u, double tau, const ModelParams& p) {
    check_tau(tau);
    check_u(u);
    StabilityReport rep;
    const PeriodicOrbit orbit = make_orbit(u, tau, p);
    rep.period_min = orbit_period_min(orbit);
    rep.holds = rep.period_min > p.raw.K1;
    try {
        rep.eta_value = eta(tau, p);
        if (rep.eta_value > 0.0) {
            rep.eta_criterion =
                u > rep.eta_value ? EtaCriterion::satisfied : EtaCriterion::not_satisfied;
        } else {
            rep.eta_criterion = EtaCriterion::negative_eta_inconclusive;
        }
    } catch (const SingularPeriod&) {
        rep.eta_value = std::numeric_limits<double>::quiet_NaN();
        rep.eta_criterion = EtaCriterion::singular_period;
    }
    return rep;
}

}  // namespace impulse
