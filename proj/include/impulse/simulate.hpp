#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "impulse/model.hpp"

namespace impulse {

struct NegativeRelease : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidStep : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct HorizonNonPositive : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EmptyTrajectory : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Fixed-period release plan. amounts[i] is the i-th release that actually
/// fires; with include_t0 the first one fires at t = 0, otherwise at t = tau.
/// Releases stop once the sequence is exhausted.
struct ReleaseSchedule {
    double tau = 7.0;             ///< impulse period (days, > 0)
    std::vector<double> amounts;  ///< per-impulse releases, 0 <= u_k <= u_max
    double u_max = 0.0;           ///< release capacity per impulse
    bool include_t0 = true;       ///< whether an impulse fires at t = 0
};

/// Schedule releasing the same amount `count` times. u_max is set to u.
ReleaseSchedule constant_schedule(double tau, double u, int count, bool include_t0 = true);

/// Constant schedule with enough releases to cover [0, horizon].
ReleaseSchedule constant_schedule_for_horizon(double tau, double u, double horizon,
                                              bool include_t0 = true);

/// S2 jumps by u, S1 untouched. Throws NegativeRelease for u < 0.
State apply_impulse(const State& x, double u);

enum class SampleTag : std::uint8_t { interior, pre_impulse, post_impulse };

const char* to_string(SampleTag tag);
SampleTag sample_tag_from_string(const std::string& s);

struct TrajectorySample {
    double t = 0;
    State state;
    SampleTag tag = SampleTag::interior;
    double u_applied = 0;  ///< nonzero only on post_impulse samples
};

/// Piecewise-continuous solution. At every impulse time there is exactly one
/// pre_impulse and one post_impulse sample with identical t; post.s1 == pre.s1
/// and post.s2 == pre.s2 + u_k bit for bit.
struct Trajectory {
    std::vector<TrajectorySample> samples;
    ReleaseSchedule schedule;
    double dt = 0;         ///< snapped integration step actually used
    bool clamped = false;  ///< some step output was negative or non-finite and
                           ///< was clamped to zero
};

struct SimOptions {
    double dt_request = 0.01;  ///< snapped to tau / ceil(tau / dt_request)
    int stride = 1;            ///< record every stride-th interior step
};

/// Integrates the impulsive system with classical RK4 between releases.
/// The step is snapped so release times fall exactly on grid nodes; pre- and
/// post-impulse states are always recorded regardless of stride.
Trajectory simulate(const ModelParams& params, const ReleaseSchedule& schedule, State ic,
                    double horizon, const SimOptions& options = {});

/// Same integration without recording; returns the state at the horizon.
/// If clamped is non-null it reports whether any clamping occurred.
State simulate_final(const ModelParams& params, const ReleaseSchedule& schedule, State ic,
                     double horizon, double dt_request = 0.01, bool* clamped = nullptr);

/// True iff the final S1 is below threshold and S1 is non-increasing over the
/// last 10% of the horizon. Monotonicity is judged on the pre-impulse
/// (period-envelope) samples: right after a release the S1 derivative can turn
/// positive for S1 < K0, so the raw samples wiggle within each period even
/// while the envelope decays. Raw samples are used when fewer than two
/// pre-impulse samples fall inside the window.
bool classify_elimination(const Trajectory& traj, double threshold);

}  // namespace impulse
