#include "impulse/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace impulse {

ControlProblem make_problem(const ModelParams& params, double tau, double T, double C, State ic,
                            double u_max, double margin) {
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be strictly positive");
    if (!(T > 0.0)) throw std::invalid_argument("T must be strictly positive");
    if (!(C > 0.0)) throw std::invalid_argument("C must be strictly positive");
    ControlProblem prob;
    prob.params = params;
    prob.tau = tau;
    prob.T = T;
    prob.N = static_cast<int>(std::floor(T / tau * (1.0 + 1e-12)));
    prob.C = C;
    prob.ic = ic;
    prob.margin = margin >= 0.0 ? margin : 0.01 * params.Kb;
    prob.eta_max_ref = eta_max(params, default_eta_domain(params)).eta_max;
    prob.u_max = u_max > 0.0 ? u_max : prob.eta_max_ref;
    return prob;
}

namespace {

double sum(std::span<const double> u) { return std::accumulate(u.begin(), u.end(), 0.0); }

double feasibility_threshold(const ControlProblem& prob) {
    return prob.params.Kb - prob.margin;
}

double s1_terminal(std::span<const double> u, const ControlProblem& prob, double dt_request) {
    ReleaseSchedule schedule;
    schedule.tau = prob.tau;
    schedule.amounts.assign(u.begin(), u.end());
    schedule.u_max = prob.u_max;
    schedule.include_t0 = false;
    return simulate_final(prob.params, schedule, prob.ic, prob.T, dt_request).s1;
}

}  // namespace

EvalResult evaluate(std::span<const double> u, const ControlProblem& prob, double dt_request) {
    if (static_cast<int>(u.size()) != prob.N) {
        throw BoxViolation("release vector length must equal N");
    }
    for (double v : u) {
        if (!(v >= 0.0) || v > prob.u_max * (1.0 + 1e-12)) {
            throw BoxViolation("release outside [0, u_max]");
        }
    }
    EvalResult res;
    res.s1_final = s1_terminal(u, prob, dt_request);
    res.J = prob.C * sum(u);
    res.feasible = res.s1_final < feasibility_threshold(prob);
    return res;
}

namespace {

// Shared bookkeeping for one solve() run: counts evaluations, remembers the
// best feasible and least-violating points seen anywhere.
class Evaluator {
  public:
    Evaluator(const ControlProblem& prob, const SolverOptions& opt) : prob_(prob), opt_(opt) {}

    struct Probe {
        double J = 0;
        double viol = 0;  // max(0, s1(T) - threshold)
    };

    Probe operator()(const std::vector<double>& u) {
        if (count_ >= opt_.max_evaluations) throw BudgetExhausted("evaluation budget exhausted");
        ++count_;
        const double s1 = s1_terminal(u, prob_, opt_.dt_request);
        Probe pr;
        pr.J = prob_.C * sum(u);
        pr.viol = std::max(0.0, s1 - feasibility_threshold(prob_));
        if (pr.viol == 0.0) {
            if (!has_feasible_ || pr.J < best_feasible_J_ ||
                (pr.J == best_feasible_J_ && u < best_feasible_u_)) {
                has_feasible_ = true;
                best_feasible_J_ = pr.J;
                best_feasible_u_ = u;
            }
        } else if (!has_feasible_) {
            if (pr.viol < least_viol_ || (pr.viol == least_viol_ && pr.J < least_viol_J_)) {
                least_viol_ = pr.viol;
                least_viol_J_ = pr.J;
                least_viol_u_ = u;
            }
        }
        return pr;
    }

    long count() const { return count_; }
    bool has_feasible() const { return has_feasible_; }
    const std::vector<double>& best_feasible_u() const { return best_feasible_u_; }
    double best_feasible_J() const { return best_feasible_J_; }
    const std::vector<double>& least_viol_u() const { return least_viol_u_; }

  private:
    const ControlProblem& prob_;
    const SolverOptions& opt_;
    long count_ = 0;
    bool has_feasible_ = false;
    double best_feasible_J_ = 0;
    std::vector<double> best_feasible_u_;
    double least_viol_ = std::numeric_limits<double>::infinity();
    double least_viol_J_ = 0;
    std::vector<double> least_viol_u_;
};

double penalty_of(const Evaluator::Probe& pr, double rho) { return pr.J + rho * pr.viol * pr.viol; }

// Minimizes the penalty along coordinate k over [0, u_max]; u is updated in
// place. Returns the achieved penalty value.
double coordinate_line_min(std::vector<double>& u, int k, double rho, double u_max,
                           double probe_size, Evaluator& eval, double current_penalty) {
    const double cur = u[k];

    // Cheap exit: dropping the coordinate to zero entirely is the common move.
    if (cur > 0.0) {
        u[k] = 0.0;
        const double p0 = penalty_of(eval(u), rho);
        if (p0 <= current_penalty) return p0;
        u[k] = cur;
    }

    // Finite-difference probe to pick the descent direction.
    double lo = 0.0, hi = cur;
    const double up = std::min(u_max, cur + probe_size);
    if (up > cur) {
        u[k] = up;
        const double pu = penalty_of(eval(u), rho);
        u[k] = cur;
        if (pu < current_penalty) {
            lo = cur;
            hi = u_max;
        }
    }
    if (hi <= lo) return current_penalty;

    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    u[k] = c;
    double fc = penalty_of(eval(u), rho);
    u[k] = d;
    double fd = penalty_of(eval(u), rho);
    double best_x = cur, best_f = current_penalty;
    auto consider = [&](double x, double f) {
        if (f < best_f) {
            best_f = f;
            best_x = x;
        }
    };
    consider(c, fc);
    consider(d, fd);
    while (b - a > std::max(0.5, 1e-6 * u_max)) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            u[k] = c;
            fc = penalty_of(eval(u), rho);
            consider(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            u[k] = d;
            fd = penalty_of(eval(u), rho);
            consider(d, fd);
        }
    }
    u[k] = best_x;
    return best_f;
}

// Penalty coordinate descent from one starting point.
void refine(std::vector<double> u, const ControlProblem& prob, const SolverOptions& opt,
            Evaluator& eval, std::vector<IterRecord>& history) {
    const double probe_size = std::max(1.0, 1e-4 * prob.u_max);
    double rho = opt.rho0;
    Evaluator::Probe pr = eval(u);
    for (int stage = 0; stage < opt.max_rho_stages; ++stage) {
        double penalty = penalty_of(pr, rho);
        for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
            const double before = penalty;
            for (int k = prob.N - 1; k >= 0; --k) {  // latest release first
                penalty = coordinate_line_min(u, k, rho, prob.u_max, probe_size, eval, penalty);
            }
            pr = eval(u);
            penalty = penalty_of(pr, rho);
            history.push_back({pr.J, pr.viol});
            if (before - penalty < 1e-10 * std::max(1.0, before)) break;
        }
        if (pr.viol <= prob.margin / 10.0) break;
        rho *= opt.rho_growth;
    }
}

}  // namespace

OptimizationResult solve(const ControlProblem& prob, const SolverOptions& options) {
    if (prob.N < 0) throw std::invalid_argument("N must be non-negative");
    OptimizationResult res;
    res.method = "penalty_coordinate_descent";
    if (prob.N == 0) {
        const EvalResult ev = evaluate({}, prob, options.dt_request);
        res.J = ev.J;
        res.s1_final = ev.s1_final;
        res.feasible = ev.feasible;
        res.no_feasible_point_found = !ev.feasible;
        res.evaluations = 1;
        return res;
    }

    Evaluator eval(prob, options);
    const std::size_t n = static_cast<std::size_t>(prob.N);

    try {
        // (a) warm start from the sufficient-release level
        std::vector<double> warm(n, std::min(prob.eta_max_ref, prob.u_max));
        refine(warm, prob, options, eval, res.history);

        // (c) seeded random starts in the admissible box
        for (int s = 0; s < options.multistarts; ++s) {
            std::mt19937_64 rng(options.seed + 0x9e3779b97f4a7c15ULL * (s + 1));
            std::uniform_real_distribution<double> dist(0.0, prob.u_max);
            std::vector<double> start(n);
            for (double& v : start) v = dist(rng);
            refine(start, prob, options, eval, res.history);
        }
    } catch (const BudgetExhausted&) {
        if (!eval.has_feasible() && eval.least_viol_u().empty()) throw;
        res.method += "(budget_exhausted)";
    }

    const std::vector<double>& pick =
        eval.has_feasible() ? eval.best_feasible_u() : eval.least_viol_u();
    res.u_star = pick;
    res.no_feasible_point_found = !eval.has_feasible();
    res.evaluations = eval.count();

    // report the chosen point re-simulated at the reference step
    const EvalResult ev = evaluate(res.u_star, prob, options.dt_request);
    res.J = ev.J;
    res.s1_final = ev.s1_final;
    res.feasible = ev.feasible;
    return res;
}

namespace {

// Bisects the smallest feasible amount for a single release at impulse k
// (1-based), all other releases zero. Returns a negative value when even
// u_max is infeasible there.
double single_release_boundary(const ControlProblem& prob, int k, double dt_request,
                               double tol = 0.01) {
    std::vector<double> u(static_cast<std::size_t>(prob.N), 0.0);
    auto feasible_at = [&](double v) {
        u[static_cast<std::size_t>(k - 1)] = v;
        const double s1 = s1_terminal(u, prob, dt_request);
        return s1 < feasibility_threshold(prob);
    };
    if (!feasible_at(prob.u_max)) return -1.0;
    if (feasible_at(0.0)) return 0.0;
    double lo = 0.0, hi = prob.u_max;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (feasible_at(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace

OptimizationResult brute_force_oracle(const ControlProblem& prob, double grid_step) {
    if (prob.N > 3) throw TooManyReleases("brute force oracle supports N <= 3");
    if (!(grid_step > 0.0)) throw std::invalid_argument("grid_step must be strictly positive");

    OptimizationResult res;
    res.method = "brute_force_grid";
    const std::size_t n = static_cast<std::size_t>(prob.N);
    if (prob.N == 0) {
        const EvalResult ev = evaluate({}, prob, 0.01);
        res.J = ev.J;
        res.s1_final = ev.s1_final;
        res.feasible = ev.feasible;
        res.no_feasible_point_found = !ev.feasible;
        res.evaluations = 1;
        return res;
    }

    // Domination bound: the cheapest feasible single release caps the search.
    // Any grid point with a larger total costs more than a known feasible
    // point, so the exhaustive scan may skip it.
    double best_single = -1.0;
    for (int k = 1; k <= prob.N; ++k) {
        const double b = single_release_boundary(prob, k, 0.01, grid_step / 4.0);
        if (b >= 0.0 && (best_single < 0.0 || b < best_single)) best_single = b;
    }
    const double coord_cap =
        best_single >= 0.0 ? std::min(prob.u_max, best_single + grid_step) : prob.u_max;
    const double total_cap =
        best_single >= 0.0 ? best_single + grid_step : std::numeric_limits<double>::infinity();

    const long pts = static_cast<long>(std::floor(coord_cap / grid_step)) + 1;
    double planned = 1.0;
    for (std::size_t i = 0; i < n; ++i) planned *= static_cast<double>(pts);
    if (planned > 1e7) throw GridTooFine("grid exceeds 1e7 evaluations");

    std::vector<double> u(n, 0.0);
    std::vector<double> best_u;
    double best_J = std::numeric_limits<double>::infinity();
    double least_viol = std::numeric_limits<double>::infinity();
    std::vector<double> least_viol_u(n, 0.0);
    long evals = 0;

    const double thr = feasibility_threshold(prob);
    auto visit = [&](auto&& self, std::size_t dim, double partial) -> void {
        if (dim == n) {
            ++evals;
            const double s1 = s1_terminal(u, prob, 0.01);
            const double J = prob.C * partial;
            if (s1 < thr) {
                if (J < best_J || (J == best_J && u < best_u)) {
                    best_J = J;
                    best_u = u;
                }
            } else if (best_u.empty()) {
                const double viol = s1 - thr;
                if (viol < least_viol) {
                    least_viol = viol;
                    least_viol_u = u;
                }
            }
            return;
        }
        for (long i = 0; i < pts; ++i) {
            const double v = static_cast<double>(i) * grid_step;
            if (partial + v > total_cap) break;
            u[dim] = v;
            self(self, dim + 1, partial + v);
        }
        u[dim] = 0.0;
    };
    visit(visit, 0, 0.0);

    res.evaluations = evals;
    if (!best_u.empty()) {
        res.u_star = best_u;
        res.no_feasible_point_found = false;
    } else {
        res.u_star = least_viol_u;
        res.no_feasible_point_found = true;
    }
    const EvalResult ev = evaluate(res.u_star, prob, 0.01);
    res.J = ev.J;
    res.s1_final = ev.s1_final;
    res.feasible = ev.feasible;
    return res;
}

double min_single_release(const ControlProblem& prob) {
    if (prob.N != 1) throw std::invalid_argument("min_single_release requires N == 1");
    std::vector<double> u(1, 0.0);
    auto feasible_at = [&](double v) {
        u[0] = v;
        return s1_terminal(u, prob, 0.01) < feasibility_threshold(prob);
    };
    if (!feasible_at(prob.u_max)) {
        throw InfeasibleAtCap("no single release up to u_max achieves the terminal constraint");
    }
    if (feasible_at(0.0)) return 0.0;

    // Empirical monotonicity check on a coarse ladder before bisecting.
    const int rungs = 9;
    int first_feasible = -1;
    for (int i = 1; i <= rungs; ++i) {
        const double v = prob.u_max * static_cast<double>(i) / rungs;
        const bool f = feasible_at(v);
        if (f && first_feasible < 0) first_feasible = i;
        if (!f && first_feasible >= 0) {
            throw std::runtime_error(
                "single-release feasibility is not monotone in u on this problem");
        }
    }

    double lo = prob.u_max * static_cast<double>(first_feasible - 1) / rungs;
    double hi = prob.u_max * static_cast<double>(first_feasible) / rungs;
    while (hi - lo > 0.01) {
        const double mid = 0.5 * (lo + hi);
        if (feasible_at(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace impulse
