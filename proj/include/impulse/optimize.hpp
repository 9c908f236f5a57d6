#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "impulse/model.hpp"
#include "impulse/periodic.hpp"
#include "impulse/simulate.hpp"

namespace impulse {

struct BoxViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct TooManyReleases : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct GridTooFine : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InfeasibleAtCap : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BudgetExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Finite-horizon release problem: N impulses at tau, 2 tau, ..., N tau
/// (none at t = 0), cost C per released individual, terminal requirement
/// S1(T) < Kb - margin.
struct ControlProblem {
    ModelParams params;
    double tau = 7.0;      ///< release period (days)
    double T = 70.0;       ///< final time (days)
    int N = 0;             ///< number of releases, N tau <= T
    double C = 1.0 / 200;  ///< cost per individual
    double u_max = 0.0;    ///< per-release cap
    State ic{374.0, 0.0};
    double margin = 0.0;      ///< slack below Kb making the strict constraint checkable
    double eta_max_ref = 0;   ///< sufficient-release level, used for the warm start
};

/// Builds a problem with the defaults: N = floor(T/tau) (a release landing
/// exactly at T is kept), margin = 0.01 Kb, and u_max = the eta_max reference
/// over the default domain so the admissible box always contains a point
/// satisfying the sufficient condition. Pass an explicit u_max to cap the box
/// lower (feasibility is certified by simulation either way).
ControlProblem make_problem(const ModelParams& params, double tau, double T, double C,
                            State ic = {374.0, 0.0}, double u_max = -1.0, double margin = -1.0);

struct EvalResult {
    double J = 0;
    double s1_final = 0;
    bool feasible = false;
};

/// Simulates the release vector (impulses at k tau, k = 1..N) and evaluates
/// cost and terminal feasibility. Throws BoxViolation outside [0, u_max]^N.
EvalResult evaluate(std::span<const double> u, const ControlProblem& prob,
                    double dt_request = 0.01);

struct SolverOptions {
    std::uint64_t seed = 1;
    int multistarts = 8;        ///< random starts in addition to the warm start
    double dt_request = 0.01;   ///< step used for objective evaluations
    int max_sweeps = 10;        ///< coordinate sweeps per penalty stage
    double rho0 = 1.0;          ///< initial penalty weight
    double rho_growth = 10.0;   ///< geometric escalation factor
    int max_rho_stages = 6;
    long max_evaluations = 2'000'000;
};

struct IterRecord {
    double J = 0;
    double violation = 0;
};

struct OptimizationResult {
    std::vector<double> u_star;
    double J = 0;
    double s1_final = 0;
    bool feasible = false;
    long evaluations = 0;
    std::string method;
    std::vector<IterRecord> history;
    bool no_feasible_point_found = false;
};

/// Direct shooting: warm start at u == min(eta_max_ref, u_max), exterior
/// penalty J + rho max(0, s1(T) - (Kb - margin))^2 minimized by projected
/// coordinate descent (latest release first; per-coordinate line probes and
/// golden-section), rho escalated geometrically until the violation is below
/// margin/10, plus seeded random multi-starts. Returns the best feasible point
/// evaluated anywhere along the way; if none exists the least-violating point
/// is returned with no_feasible_point_found set.
OptimizationResult solve(const ControlProblem& prob, const SolverOptions& options = {});

/// Exhaustive grid search over [0, u_max]^N at resolution grid_step for
/// N <= 3. Points whose total exceeds the cheapest feasible single release
/// (found by bisection up front) are skipped: they cost more than a known
/// feasible point and cannot be optimal. Throws GridTooFine above 1e7
/// remaining evaluations.
OptimizationResult brute_force_oracle(const ControlProblem& prob, double grid_step);

/// Smallest single release (N == 1) achieving feasibility, by bisection to
/// 0.01 individual. Feasibility is probed on a coarse ladder first to confirm
/// it is monotone in u before bisecting. Throws InfeasibleAtCap when even
/// u_max fails.
double min_single_release(const ControlProblem& prob);

}  // namespace impulse
