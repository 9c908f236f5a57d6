#include "impulse/simulate.hpp"

#include <cmath>
#include <string>

namespace impulse {

ReleaseSchedule constant_schedule(double tau, double u, int count, bool include_t0) {
    ReleaseSchedule s;
    s.tau = tau;
    s.amounts.assign(static_cast<std::size_t>(count < 0 ? 0 : count), u);
    s.u_max = u;
    s.include_t0 = include_t0;
    return s;
}

ReleaseSchedule constant_schedule_for_horizon(double tau, double u, double horizon,
                                              bool include_t0) {
    const int first = include_t0 ? 0 : 1;
    int count = 0;
    for (int k = first; k * tau <= horizon * (1.0 + 1e-12); ++k) ++count;
    return constant_schedule(tau, u, count, include_t0);
}

State apply_impulse(const State& x, double u) {
    if (!(u >= 0.0)) throw NegativeRelease("release amount must be non-negative");
    return State{x.s1, x.s2 + u};
}

const char* to_string(SampleTag tag) {
    switch (tag) {
        case SampleTag::interior: return "interior";
        case SampleTag::pre_impulse: return "pre_impulse";
        case SampleTag::post_impulse: return "post_impulse";
    }
    return "?";
}

SampleTag sample_tag_from_string(const std::string& s) {
    if (s == "interior") return SampleTag::interior;
    if (s == "pre_impulse") return SampleTag::pre_impulse;
    if (s == "post_impulse") return SampleTag::post_impulse;
    throw std::invalid_argument("unknown sample tag: " + s);
}

namespace {

// One classical RK4 step; negative or non-finite outputs are clamped to zero.
// The true solution is non-negative, so a clamp only ever absorbs float error
// (or the fallout of deliberately oversized probe releases).
inline State rk4_step(const State& x, double h, const ModelParams& p, bool& clamped) {
    const Deriv k1 = vector_field(x, p);
    const Deriv k2 = vector_field({x.s1 + 0.5 * h * k1.ds1, x.s2 + 0.5 * h * k1.ds2}, p);
    const Deriv k3 = vector_field({x.s1 + 0.5 * h * k2.ds1, x.s2 + 0.5 * h * k2.ds2}, p);
    const Deriv k4 = vector_field({x.s1 + h * k3.ds1, x.s2 + h * k3.ds2}, p);
    State out{x.s1 + h / 6.0 * (k1.ds1 + 2.0 * k2.ds1 + 2.0 * k3.ds1 + k4.ds1),
              x.s2 + h / 6.0 * (k1.ds2 + 2.0 * k2.ds2 + 2.0 * k3.ds2 + k4.ds2)};
    if (!std::isfinite(out.s1) || out.s1 < 0.0) {
        out.s1 = 0.0;
        clamped = true;
    }
    if (!std::isfinite(out.s2) || out.s2 < 0.0) {
        out.s2 = 0.0;
        clamped = true;
    }
    return out;
}

struct NullSink {
    void initial(double, const State&) {}
    void step(double, const State&, long) {}
    void segment_end(double, const State&) {}
    void impulse(double, const State&, const State&, double) {}
};

void validate_inputs(const ModelParams&, const ReleaseSchedule& schedule, const State& ic,
                     double horizon, double dt_request) {
    if (!(dt_request > 0.0) || !std::isfinite(dt_request)) {
        throw InvalidStep("dt must be strictly positive");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw HorizonNonPositive("horizon must be strictly positive");
    }
    if (!(schedule.tau > 0.0) || !std::isfinite(schedule.tau)) {
        throw std::invalid_argument("schedule.tau must be strictly positive");
    }
    if (!(ic.s1 >= 0.0) || !(ic.s2 >= 0.0)) {
        throw std::invalid_argument("initial condition must be non-negative");
    }
    for (double u : schedule.amounts) {
        if (!(u >= 0.0)) throw NegativeRelease("release amount must be non-negative");
        if (u > schedule.u_max * (1.0 + 1e-12)) {
            throw std::invalid_argument("release amount exceeds u_max");
        }
    }
}

template <class Sink>
State integrate(const ModelParams& params, const ReleaseSchedule& schedule, State x,
                double horizon, double dt_request, int stride, Sink& sink, double& dt_out,
                bool& clamped) {
    validate_inputs(params, schedule, x, horizon, dt_request);
    if (stride < 1) throw InvalidStep("stride must be >= 1");

    const double tau = schedule.tau;
    const long steps_per_period = static_cast<long>(std::ceil(tau / dt_request - 1e-12));
    const double dt = tau / static_cast<double>(steps_per_period);
    dt_out = dt;
    clamped = false;

    const double t_eps = 1e-9 * std::max(1.0, horizon);
    double cur = 0.0;
    long step_index = 0;

    sink.initial(0.0, x);

    auto run_segment = [&](double from, double to) {
        const double seg = to - from;
        if (seg <= t_eps) return;
        long n = std::lround(seg / dt);
        if (n < 1 || std::abs(static_cast<double>(n) * dt - seg) > 1e-9 * std::max(1.0, seg)) {
            n = static_cast<long>(std::ceil(seg / dt - 1e-12));
        }
        const double h = seg / static_cast<double>(n);
        for (long i = 0; i < n; ++i) {
            x = rk4_step(x, h, params, clamped);
            ++step_index;
            const double t = (i + 1 == n) ? to : from + static_cast<double>(i + 1) * h;
            if (i + 1 == n) {
                sink.segment_end(t, x);
            } else if (step_index % stride == 0) {
                sink.step(t, x, step_index);
            }
        }
    };

    const int first_k = schedule.include_t0 ? 0 : 1;
    std::size_t amount_index = 0;
    for (int k = first_k;; ++k) {
        const double t_imp = static_cast<double>(k) * tau;
        if (t_imp > horizon + t_eps) break;
        if (amount_index >= schedule.amounts.size()) break;
        run_segment(cur, t_imp);
        cur = t_imp;
        const double u = schedule.amounts[amount_index++];
        const State pre = x;
        x = apply_impulse(x, u);
        sink.impulse(t_imp, pre, x, u);
    }
    run_segment(cur, horizon);
    return x;
}

struct TrajectorySink {
    Trajectory* traj;
    void initial(double t, const State& x) {
        traj->samples.push_back({t, x, SampleTag::interior, 0.0});
    }
    void step(double t, const State& x, long) {
        traj->samples.push_back({t, x, SampleTag::interior, 0.0});
    }
    void segment_end(double t, const State& x) {
        traj->samples.push_back({t, x, SampleTag::interior, 0.0});
    }
    void impulse(double t, const State& pre, const State& post, double u) {
        // the impulse replaces the plain samples at its time
        if (!traj->samples.empty() && traj->samples.back().t == t &&
            traj->samples.back().tag == SampleTag::interior) {
            traj->samples.pop_back();
        }
        traj->samples.push_back({t, pre, SampleTag::pre_impulse, 0.0});
        traj->samples.push_back({t, post, SampleTag::post_impulse, u});
    }
};

}  // namespace

Trajectory simulate(const ModelParams& params, const ReleaseSchedule& schedule, State ic,
                    double horizon, const SimOptions& options) {
    Trajectory traj;
    traj.schedule = schedule;
    TrajectorySink sink{&traj};
    integrate(params, schedule, ic, horizon, options.dt_request, options.stride, sink, traj.dt,
              traj.clamped);
    return traj;
}

State simulate_final(const ModelParams& params, const ReleaseSchedule& schedule, State ic,
                     double horizon, double dt_request, bool* clamped) {
    NullSink sink;
    double dt = 0;
    bool cl = false;
    State out = integrate(params, schedule, ic, horizon, dt_request, 1, sink, dt, cl);
    if (clamped) *clamped = cl;
    return out;
}

bool classify_elimination(const Trajectory& traj, double threshold) {
    if (traj.samples.empty()) throw EmptyTrajectory("trajectory has no samples");
    const double t_begin = traj.samples.front().t;
    const double t_end = traj.samples.back().t;
    const double window_start = t_end - 0.1 * (t_end - t_begin);

    const double final_s1 = traj.samples.back().state.s1;
    if (!(final_s1 < threshold)) return false;

    // Compare like phases: pre-impulse values over the releases covering the
    // window, including the one straddling its left edge.
    std::vector<double> envelope;
    for (const auto& s : traj.samples) {
        if (s.t >= window_start - traj.schedule.tau && s.tag == SampleTag::pre_impulse) {
            envelope.push_back(s.state.s1);
        }
    }
    if (envelope.size() < 2) {
        envelope.clear();
        for (const auto& s : traj.samples) {
            if (s.t >= window_start && s.tag != SampleTag::post_impulse) {
                envelope.push_back(s.state.s1);
            }
        }
    }
    for (std::size_t i = 0; i + 1 < envelope.size(); ++i) {
        if (envelope[i + 1] > envelope[i] * (1.0 + 1e-9) + 1e-300) return false;
    }
    return true;
}

}  // namespace impulse
