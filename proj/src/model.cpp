#include "impulse/model.hpp"

#include <cmath>

namespace impulse {

RawParams default_raw_params() {
    RawParams p;
    p.psi1 = 0.32667;
    p.psi2 = 0.21333;
    p.delta1 = 0.03333;
    p.delta2 = 0.06666;
    p.K0 = 30.0;
    p.K1 = 374.0;
    p.K2 = 300.0;
    return p;
}

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw NonPositiveParameter(std::string(name) + " must be strictly positive");
    }
}

}  // namespace

ModelParams derive_params(const RawParams& raw) {
    require_positive(raw.psi1, "psi1");
    require_positive(raw.psi2, "psi2");
    require_positive(raw.delta1, "delta1");
    require_positive(raw.delta2, "delta2");
    require_positive(raw.K0, "K0");
    require_positive(raw.K1, "K1");
    require_positive(raw.K2, "K2");

    ModelParams p;
    p.raw = raw;
    p.r1 = raw.psi1 - raw.delta1;
    p.r2 = raw.psi2 - raw.delta2;

    if (!(p.r1 > 0.0)) throw AssumptionViolated("psi1 > delta1 required (r1 <= 0)");
    if (!(p.r2 > 0.0)) throw AssumptionViolated("psi2 > delta2 required (r2 <= 0)");
    if (!(raw.psi2 < raw.psi1)) throw AssumptionViolated("psi2 < psi1 required");
    if (!(raw.delta2 > raw.delta1)) throw AssumptionViolated("delta2 > delta1 required");
    if (!(p.r2 < p.r1)) throw AssumptionViolated("r2 < r1 required");

    // Kb and Kstar are the positive roots of
    //   (psi1 - r1*y/K1)(y/K0 - 1) - delta1 = 0,
    // i.e. r1*y^2 - (r1*K0 + psi1*K1)*y + K0*K1*(psi1 + delta1) = 0.
    const double b = p.r1 * raw.K0 + raw.psi1 * raw.K1;
    const double disc = b * b - 4.0 * p.r1 * raw.K0 * raw.K1 * (raw.psi1 + raw.delta1);
    if (!(disc > 0.0)) {
        throw NegativeDiscriminant("depensation quadratic has no two real roots");
    }
    const double sq = std::sqrt(disc);
    p.Kb = (b - sq) / (2.0 * p.r1);
    p.Kstar = (b + sq) / (2.0 * p.r1);

    const double num = raw.K0 * (raw.psi1 * (raw.K1 - raw.K2) + raw.delta1 * (raw.K1 + raw.K2));
    const double den = raw.psi1 * (raw.K1 - raw.K2) + raw.delta1 * raw.K2;
    if (den == 0.0) throw AssumptionViolated("saddle denominator vanishes");
    p.S1_saddle = num / den;
    p.S2_saddle = raw.K2 - p.S1_saddle;

    if (!(raw.K0 < p.Kb)) throw AssumptionViolated("ordering K0 < Kb violated");
    if (!(p.Kb < raw.K2)) throw AssumptionViolated("ordering Kb < K2 violated");
    if (!(raw.K2 < raw.K1)) throw AssumptionViolated("ordering K2 < K1 violated");
    if (!(raw.K1 < p.Kstar)) throw AssumptionViolated("ordering K1 < Kstar violated");
    if (!(p.S1_saddle > 0.0)) throw AssumptionViolated("S1 saddle coordinate not positive");
    if (!(p.S2_saddle > 0.0)) throw AssumptionViolated("S2 saddle coordinate not positive");

    return p;
}

ModelParams default_params() { return derive_params(default_raw_params()); }

const char* to_string(OutcomeClass c) {
    switch (c) {
        case OutcomeClass::S1_persists: return "S1_persists";
        case OutcomeClass::S2_persists: return "S2_persists";
        case OutcomeClass::saddle_boundary: return "saddle_boundary";
    }
    return "?";
}

OutcomeClass predict_outcome(const State& ic, const ModelParams& p) {
    if (!(ic.s1 >= 0.0) || !(ic.s2 >= 0.0)) {
        throw OriginExcluded("initial condition must lie in the non-negative quadrant");
    }
    if (ic.s1 == 0.0 && ic.s2 == 0.0) {
        throw OriginExcluded("origin is excluded from the region of interest");
    }
    if (ic.s1 == p.Kb) return OutcomeClass::saddle_boundary;
    return ic.s1 > p.Kb ? OutcomeClass::S1_persists : OutcomeClass::S2_persists;
}

}  // namespace impulse
