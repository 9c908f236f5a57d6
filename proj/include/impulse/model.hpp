#pragma once

#include <stdexcept>
#include <string>

namespace impulse {

struct NonPositiveParameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A standing assumption of the model does not hold for the given rates and
/// capacities. The message names the violated condition.
struct AssumptionViolated : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NegativeDiscriminant : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct OriginExcluded : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raw biological rates and capacities, all strictly positive.
struct RawParams {
    double psi1;    ///< birth rate of the suppressed species S1 (1/day)
    double psi2;    ///< birth rate of the released species S2 (1/day)
    double delta1;  ///< death rate of S1 (1/day)
    double delta2;  ///< death rate of S2 (1/day)
    double K0;      ///< Allee interaction threshold of S1 (individuals)
    double K1;      ///< capacity-related constant of S1 (individuals)
    double K2;      ///< carrying capacity of S2 (individuals)
};

/// The built-in default parameter set (wild vs. Wolbachia-infected
/// Aedes aegypti females).
RawParams default_raw_params();

/// Raw parameters plus every derived threshold used downstream.
///
/// Construction via derive_params() guarantees:
///   r1 = psi1 - delta1 > 0,  r2 = psi2 - delta2 > 0,
///   psi2 < psi1,  delta2 > delta1,  r2 < r1,
///   0 < K0 < Kb < K2 < K1 < Kstar,
///   S2_saddle = K2 - S1_saddle > 0.
struct ModelParams {
    RawParams raw{};
    double r1 = 0;         ///< intrinsic growth rate of S1 (1/day)
    double r2 = 0;         ///< intrinsic growth rate of S2 (1/day)
    double Kb = 0;         ///< minimum viable population size of S1: extinction
                           ///< threshold, smaller root of the depensation quadratic
    double Kstar = 0;      ///< carrying capacity of S1, larger root
    double S1_saddle = 0;  ///< S1 coordinate of the unstable coexistence point
    double S2_saddle = 0;  ///< S2 coordinate of the unstable coexistence point
};

/// Validates the standing assumptions and computes all derived quantities.
/// Throws NonPositiveParameter, AssumptionViolated or NegativeDiscriminant;
/// every ModelParams in circulation satisfies the full invariant list.
ModelParams derive_params(const RawParams& raw);

/// Convenience: derive_params(default_raw_params()).
ModelParams default_params();

struct State {
    double s1 = 0;  ///< population of S1 (individuals, >= 0)
    double s2 = 0;  ///< population of S2 (individuals, >= 0)
};

struct Deriv {
    double ds1 = 0;
    double ds2 = 0;
};

/// Right-hand side of the continuous competition dynamics. Total on the
/// non-negative quadrant; no impulse logic. The S1 axis is invariant:
/// vector_field({0, s2}, p).ds1 == 0 exactly.
inline Deriv vector_field(const State& x, const ModelParams& p) {
    const RawParams& q = p.raw;
    const double total = x.s1 + x.s2;
    Deriv d;
    d.ds1 = x.s1 * (q.psi1 - p.r1 / q.K1 * total) * (x.s1 / q.K0 - 1.0) - q.delta1 * x.s1;
    d.ds2 = x.s2 * (q.psi2 - p.r2 / q.K2 * total) - q.delta2 * x.s2;
    return d;
}

enum class OutcomeClass {
    S1_persists,      ///< limit (Kstar, 0)
    S2_persists,      ///< limit (0, K2); S1 goes extinct
    saddle_boundary,  ///< s1(0) exactly at Kb
};

const char* to_string(OutcomeClass c);

/// Long-run classification by initial condition: s1(0) > Kb -> S1_persists,
/// s1(0) < Kb -> S2_persists, s1(0) == Kb (exact comparison) -> saddle_boundary.
/// Throws OriginExcluded for (0,0) or negative components.
OutcomeClass predict_outcome(const State& ic, const ModelParams& p);

}  // namespace impulse
