#pragma once

#include <stdexcept>

#include "impulse/model.hpp"

namespace impulse {

struct InvalidTau : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct OffsetOutOfRange : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NonPositiveState : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SingularPeriod : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NoPositiveBranch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Post-impulse value of the S1-free tau-periodic orbit: the unique positive
/// root of Z^2 - (u+K2) Z - u K2/(e^{r2 tau}-1) = 0. For u = 0 this is K2.
double z2_plus(double u, double tau, const ModelParams& p);

/// Period-to-period map of the S2-only auxiliary system:
///   h(z) = K2 z e^{r2 tau} / (z (e^{r2 tau}-1) + K2) + u.
/// Strictly increasing in z; z2_plus is its unique positive fixed point and
/// iterates converge to it monotonically from any z > 0.
double recursion_map(double z, double u, double tau, const ModelParams& p);

/// The S1-free tau-periodic regime for a constant release u.
struct PeriodicOrbit {
    double tau = 0;
    double u = 0;
    double z2_plus = 0;  ///< post-impulse periodic value
    ModelParams params;
};

PeriodicOrbit make_orbit(double u, double tau, const ModelParams& p);

/// Closed-form orbit value at offset t_in_period in (0, tau] after an impulse.
double orbit_eval(const PeriodicOrbit& orbit, double t_in_period);

/// Minimum of the orbit over one period. Z2+ >= K2, so the logistic flow
/// decays between impulses and the minimum sits at the period end.
double orbit_period_min(const PeriodicOrbit& orbit);

/// Period at which the phi denominator e^{r2 tau} K2 - K1 (e^{r2 tau}-1)
/// vanishes: ln(K1/(K1-K2)) / r2. eta blows up approaching it from below.
double tau_singular(const ModelParams& p);

/// Sufficient per-impulse release for the S1-free orbit to dominate K1:
///   eta(tau) = (e^{r2 tau}-1) phi (phi - K2) / (K2 + phi (e^{r2 tau}-1)),
///   phi(tau) = K1 K2 / (e^{r2 tau} K2 - K1 (e^{r2 tau}-1)).
/// May be negative. Throws SingularPeriod when the phi denominator is within
/// 1e-12 of zero.
double eta(double tau, const ModelParams& p);

struct TauInterval {
    double lo = 0;
    double hi = 0;
};

struct SufficientCondition {
    double tau_max = 0;        ///< maximizing period found in the domain
    double eta_max = 0;        ///< maximal positive eta over the domain
    TauInterval search_domain; ///< interval that was examined
};

/// Default maximization domain: periods up to the largest whole day below the
/// singular period. eta increases without bound approaching tau_singular from
/// below, so a maximum is only meaningful on a stated domain; whole-day
/// periods are the operational planning resolution.
TauInterval default_eta_domain(const ModelParams& p);

/// Maximum of the positive branch of eta over the domain: coarse grid scan
/// (>= 2000 points, log-densified near the singular period, a +-1e-6 day
/// window around it excluded) refined by golden-section on the bracketing
/// interval. Throws NoPositiveBranch if eta is nowhere positive there.
SufficientCondition eta_max(const ModelParams& p, TauInterval domain, int grid_points = 2048);

enum class EtaCriterion {
    satisfied,                  ///< eta(tau) > 0 and u > eta(tau)
    not_satisfied,              ///< eta(tau) > 0 and u <= eta(tau)
    negative_eta_inconclusive,  ///< eta(tau) <= 0: the release-size criterion says nothing
    singular_period,            ///< tau at the phi singularity
};

const char* to_string(EtaCriterion c);

/// Outcome of the sufficient-stability check for a constant-u schedule.
struct StabilityReport {
    bool holds = false;        ///< orbit minimum over one period exceeds K1
    double period_min = 0;     ///< that minimum (the end-of-period value)
    double eta_value = 0;      ///< eta(tau); NaN when the period is singular
    EtaCriterion eta_criterion = EtaCriterion::not_satisfied;
};

/// Checks the global-stability sufficient condition "orbit above K1 for all t"
/// via the period minimum, and reports the u > eta(tau) release-size criterion
/// alongside. The orbit check is authoritative; when eta(tau) <= 0 the size
/// criterion is reported as inconclusive.
StabilityReport stability_sufficient(double u, double tau, const ModelParams& p);

}  // namespace impulse
