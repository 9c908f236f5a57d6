#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "impulse/io.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitReproFailure = 2;
constexpr int kExitIo = 3;

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw impulse::IoError("cannot open config: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Cli {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    double dt = 0.01;
    bool quiet = false;

    // a JSON overlay built from explicitly-set flags, merged over the config
    ordered_json overlay = ordered_json::object();
};

void merge_into(ordered_json& base, const ordered_json& overlay) {
    for (const auto& item : overlay.items()) {
        if (item.value().is_null()) continue;  // section referenced but no flag set
        if (item.value().is_object() && base.contains(item.key()) &&
            base.at(item.key()).is_object()) {
            merge_into(base[item.key()], item.value());
        } else {
            base[item.key()] = item.value();
        }
    }
}

impulse::RunConfig load_config(const Cli& cli, const std::string& scenario) {
    ordered_json doc = ordered_json::object();
    if (!cli.config_path.empty()) {
        try {
            doc = ordered_json::parse(read_file(cli.config_path), nullptr, true);
        } catch (const nlohmann::json::parse_error& e) {
            throw impulse::ParseError("config parse error at byte " + std::to_string(e.byte) +
                                      ": " + e.what());
        }
    }
    doc["scenario"] = scenario;
    merge_into(doc, cli.overlay);
    return impulse::parse_config(doc.dump());
}

impulse::Provenance provenance_for(const impulse::RunConfig& cfg) {
    impulse::Provenance prov;
    prov.config_sha256 = impulse::sha256_hex(impulse::config_to_json(cfg).dump());
    prov.seed = cfg.seed;
    prov.dt = cfg.dt;
    return prov;
}

void say(const Cli& cli, const std::string& line) {
    if (!cli.quiet) std::cout << line << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"impulsive two-species release toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    Cli cli;
    app.add_option("--config", cli.config_path, "JSON configuration file");
    app.add_option("--out", cli.out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", cli.seed, "RNG seed for the optimizer");
    auto* dt_opt = app.add_option("--dt", cli.dt, "integration step request (days)");
    app.add_flag("--quiet", cli.quiet, "suppress progress output");

    // ---- steady-states ----
    auto* sub_steady = app.add_subcommand("steady-states", "derived thresholds and equilibria");

    // ---- simulate ----
    auto* sub_sim = app.add_subcommand("simulate", "integrate the impulsive system");
    double sim_tau = 7, sim_u = 0, sim_horizon = 180, sim_umax = -1;
    int sim_stride = 1;
    std::vector<double> sim_ic, sim_amounts;
    bool sim_no_t0 = false;
    auto* o_tau = sub_sim->add_option("--tau", sim_tau, "impulse period (days)");
    auto* o_u = sub_sim->add_option("--u", sim_u, "constant per-impulse release");
    auto* o_amounts = sub_sim->add_option("--amounts", sim_amounts, "explicit release sequence");
    auto* o_umax = sub_sim->add_option("--u-max", sim_umax, "release cap");
    auto* o_ic = sub_sim->add_option("--ic", sim_ic, "initial condition s1 s2")->expected(2);
    auto* o_horizon = sub_sim->add_option("--horizon", sim_horizon, "final time (days)");
    auto* o_stride = sub_sim->add_option("--stride", sim_stride, "record every n-th step");
    auto* o_no_t0 = sub_sim->add_flag("--no-t0-impulse", sim_no_t0, "first release at tau, not 0");

    // ---- eta ----
    auto* sub_eta = app.add_subcommand("eta", "sufficient release amount for one period");
    double eta_tau = 7;
    sub_eta->add_option("--tau", eta_tau, "impulse period (days)")->required();

    // ---- eta-max ----
    auto* sub_etamax = app.add_subcommand("eta-max", "maximum of eta over a period domain");
    double em_lo = -1, em_hi = -1;
    int em_grid = 2048;
    auto* o_lo = sub_etamax->add_option("--tau-lo", em_lo, "domain lower end");
    auto* o_hi = sub_etamax->add_option("--tau-hi", em_hi, "domain upper end");
    auto* o_grid = sub_etamax->add_option("--grid-points", em_grid, "scan resolution");

    // ---- stability-check ----
    auto* sub_stab = app.add_subcommand("stability-check", "S1-free orbit stability condition");
    double st_u = 300, st_tau = 7;
    sub_stab->add_option("--u", st_u, "per-impulse release")->required();
    sub_stab->add_option("--tau", st_tau, "impulse period (days)")->required();

    // ---- optimize ----
    auto* sub_opt = app.add_subcommand("optimize", "minimize total release cost");
    double op_tau = 7, op_T = 70, op_C = 1.0 / 200, op_umax = -1, op_margin = -1;
    int op_starts = 8;
    std::vector<double> op_ic;
    auto* oo_tau = sub_opt->add_option("--tau", op_tau, "release period (days)");
    auto* oo_T = sub_opt->add_option("--T", op_T, "final time (days)");
    auto* oo_C = sub_opt->add_option("--C", op_C, "cost per individual");
    auto* oo_umax = sub_opt->add_option("--u-max", op_umax, "release cap");
    auto* oo_margin = sub_opt->add_option("--margin", op_margin, "slack below Kb");
    auto* oo_ic = sub_opt->add_option("--ic", op_ic, "initial condition s1 s2")->expected(2);
    auto* oo_starts = sub_opt->add_option("--multistarts", op_starts, "random starts");

    // ---- min-single-release ----
    auto* sub_msr = app.add_subcommand("min-single-release", "feasibility boundary of one release");
    double ms_tau = 30, ms_T = 70, ms_umax = -1, ms_margin = -1;
    std::vector<double> ms_ic;
    auto* mo_tau = sub_msr->add_option("--tau", ms_tau, "release time (days)");
    auto* mo_T = sub_msr->add_option("--T", ms_T, "final time (days)");
    auto* mo_umax = sub_msr->add_option("--u-max", ms_umax, "release cap");
    auto* mo_margin = sub_msr->add_option("--margin", ms_margin, "slack below Kb");
    auto* mo_ic = sub_msr->add_option("--ic", ms_ic, "initial condition s1 s2")->expected(2);

    // ---- sweep ----
    auto* sub_sweep = app.add_subcommand("sweep", "grid of (tau, u) simulations");
    std::vector<double> sw_taus, sw_us, sw_ic;
    double sw_horizon = 180, sw_threshold = -1;
    auto* wo_taus = sub_sweep->add_option("--taus", sw_taus, "periods to sweep");
    auto* wo_us = sub_sweep->add_option("--us", sw_us, "release amounts to sweep");
    auto* wo_h = sub_sweep->add_option("--horizon", sw_horizon, "final time (days)");
    auto* wo_ic = sub_sweep->add_option("--ic", sw_ic, "initial condition s1 s2")->expected(2);
    auto* wo_thr = sub_sweep->add_option("--threshold", sw_threshold, "elimination threshold");

    // ---- reproduce ----
    auto* sub_repro = app.add_subcommand("reproduce", "reference scenario and table checks");
    std::vector<std::string> rp_targets;
    auto* ro_targets = sub_repro->add_option(
        "--targets", rp_targets, "subset of {figures_1_4, tables_2_5, thresholds}");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        const fs::path out_dir(cli.out_dir);
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) throw impulse::IoError("cannot create output directory: " + out_dir.string());

        if (dt_opt->count()) cli.overlay["dt"] = cli.dt;
        if (seed_opt->count()) cli.overlay["seed"] = cli.seed;

        if (sub_steady->parsed()) {
            impulse::RunConfig cfg = load_config(cli, "steady_states");
            const impulse::ModelParams p = impulse::derive_params(cfg.params);
            const fs::path path = out_dir / "steady_states.json";
            impulse::write_result_json(impulse::steady_states_json(p), provenance_for(cfg), path);
            say(cli, "Kb=" + std::to_string(p.Kb) + " Kstar=" + std::to_string(p.Kstar) +
                         " saddle=(" + std::to_string(p.S1_saddle) + ", " +
                         std::to_string(p.S2_saddle) + ") -> " + path.string());
        } else if (sub_sim->parsed()) {
            auto& o = cli.overlay["simulate"];
            if (o_tau->count()) o["tau"] = sim_tau;
            if (o_u->count()) o["u"] = sim_u;
            if (o_amounts->count()) o["amounts"] = sim_amounts;
            if (o_umax->count()) o["u_max"] = sim_umax;
            if (o_ic->count()) o["ic"] = sim_ic;
            if (o_horizon->count()) o["horizon"] = sim_horizon;
            if (o_stride->count()) o["stride"] = sim_stride;
            if (o_no_t0->count()) o["include_t0"] = !sim_no_t0;
            impulse::RunConfig cfg = load_config(cli, "simulate");
            const auto& c = std::get<impulse::SimulateConfig>(cfg.config);
            const impulse::ModelParams p = impulse::derive_params(cfg.params);

            impulse::ReleaseSchedule schedule;
            schedule.tau = c.tau;
            schedule.include_t0 = c.include_t0;
            if (!c.amounts.empty()) {
                schedule.amounts = c.amounts;
            } else {
                schedule = impulse::constant_schedule_for_horizon(c.tau, c.u, c.horizon,
                                                                  c.include_t0);
            }
            double cap = c.u_max;
            for (double v : schedule.amounts) cap = std::max(cap, v);
            schedule.u_max = cap;

            impulse::SimOptions opt;
            opt.dt_request = cfg.dt;
            opt.stride = c.stride;
            const impulse::Trajectory traj = impulse::simulate(p, schedule, c.ic, c.horizon, opt);
            const fs::path path = out_dir / "trajectory.csv";
            impulse::write_trajectory_csv(traj, path);
            const impulse::State last = traj.samples.back().state;
            say(cli, "final state (" + std::to_string(last.s1) + ", " + std::to_string(last.s2) +
                         ") over " + std::to_string(c.horizon) + " days -> " + path.string());
        } else if (sub_eta->parsed()) {
            cli.overlay["eta"]["tau"] = eta_tau;
            impulse::RunConfig cfg = load_config(cli, "eta");
            const auto& c = std::get<impulse::EtaConfig>(cfg.config);
            const impulse::ModelParams p = impulse::derive_params(cfg.params);
            const double value = impulse::eta(c.tau, p);
            ordered_json j{{"tau", c.tau}, {"eta", value}};
            impulse::write_result_json(j, provenance_for(cfg), out_dir / "eta.json");
            say(cli, "eta(" + std::to_string(c.tau) + ") = " + std::to_string(value));
        } else if (sub_etamax->parsed()) {
            auto& o = cli.overlay["eta_max"];
            if (o_lo->count()) o["tau_lo"] = em_lo;
            if (o_hi->count()) o["tau_hi"] = em_hi;
            if (o_grid->count()) o["grid_points"] = em_grid;
            impulse::RunConfig cfg = load_config(cli, "eta_max");
            const auto& c = std::get<impulse::EtaMaxConfig>(cfg.config);
            const impulse::ModelParams p = impulse::derive_params(cfg.params);
            impulse::TauInterval domain = impulse::default_eta_domain(p);
            if (c.tau_lo > 0.0) domain.lo = c.tau_lo;
            if (c.tau_hi > 0.0) domain.hi = c.tau_hi;
            const impulse::SufficientCondition sc = impulse::eta_max(p, domain, c.grid_points);
            impulse::write_result_json(impulse::eta_max_json(sc), provenance_for(cfg),
                                       out_dir / "eta_max.json");
            say(cli, "max eta = " + std::to_string(sc.eta_max) + " at tau = " +
                         std::to_string(sc.tau_max) + " on [" + std::to_string(domain.lo) + ", " +
                         std::to_string(domain.hi) + "]");
        } else if (sub_stab->parsed()) {
            cli.overlay["stability_check"]["u"] = st_u;
            cli.overlay["stability_check"]["tau"] = st_tau;
            impulse::RunConfig cfg = load_config(cli, "stability_check");
            const auto& c = std::get<impulse::StabilityConfig>(cfg.config);
            const impulse::ModelParams p = impulse::derive_params(cfg.params);
            const impulse::StabilityReport rep = impulse::stability_sufficient(c.u, c.tau, p);
            impulse::write_result_json(impulse::stability_json(rep, c.u, c.tau),
                                       provenance_for(cfg), out_dir / "stability.json");
            say(cli, std::string("sufficient condition ") + (rep.holds ? "holds" : "fails") +
                         " (period min " + std::to_string(rep.period_min) + ", eta criterion " +
                         impulse::to_string(rep.eta_criterion) + ")");
        } else if (sub_opt->parsed()) {
            auto& o = cli.overlay["optimize"];
            if (oo_tau->count()) o["tau"] = op_tau;
            if (oo_T->count()) o["T"] = op_T;
            if (oo_C->count()) o["C"] = op_C;
            if (oo_umax->count()) o["u_max"] = op_umax;
            if (oo_margin->count()) o["margin"] = op_margin;
            if (oo_ic->count()) o["ic"] = op_ic;
            if (oo_starts->count()) o["multistarts"] = op_starts;
            impulse::RunConfig cfg = load_config(cli, "optimize");
            const auto& c = std::get<impulse::OptimizeConfig>(cfg.config);
            const impulse::ModelParams p = impulse::derive_params(cfg.params);
            impulse::ControlProblem prob =
                impulse::make_problem(p, c.tau, c.T, c.C, c.ic, c.u_max, c.margin);
            impulse::SolverOptions sopt;
            sopt.seed = cfg.seed;
            sopt.multistarts = c.multistarts;
            sopt.dt_request = cfg.dt;
            const impulse::OptimizationResult res = impulse::solve(prob, sopt);
            impulse::write_result_json(impulse::optimization_json(res, prob), provenance_for(cfg),
                                       out_dir / "optimize.json");
            double total = 0;
            for (double v : res.u_star) total += v;
            say(cli, "J = " + std::to_string(res.J) + " (sum u = " + std::to_string(total) +
                         "), s1(T) = " + std::to_string(res.s1_final) +
                         (res.feasible ? " [feasible]" : " [INFEASIBLE]"));
        } else if (sub_msr->parsed()) {
            auto& o = cli.overlay["min_single_release"];
            if (mo_tau->count()) o["tau"] = ms_tau;
            if (mo_T->count()) o["T"] = ms_T;
            if (mo_umax->count()) o["u_max"] = ms_umax;
            if (mo_margin->count()) o["margin"] = ms_margin;
            if (mo_ic->count()) o["ic"] = ms_ic;
            impulse::RunConfig cfg = load_config(cli, "min_single_release");
            const auto& c = std::get<impulse::MinSingleReleaseConfig>(cfg.config);
            const impulse::ModelParams p = impulse::derive_params(cfg.params);
            impulse::ControlProblem prob =
                impulse::make_problem(p, c.tau, c.T, 1.0 / 200, c.ic, c.u_max, c.margin);
            prob.N = 1;
            const double u = impulse::min_single_release(prob);
            ordered_json j{{"tau", c.tau}, {"T", c.T}, {"min_single_release", u},
                           {"margin", prob.margin}};
            impulse::write_result_json(j, provenance_for(cfg),
                                       out_dir / "min_single_release.json");
            say(cli, "smallest feasible single release = " + std::to_string(u));
        } else if (sub_sweep->parsed()) {
            auto& o = cli.overlay["sweep"];
            if (wo_taus->count()) o["taus"] = sw_taus;
            if (wo_us->count()) o["us"] = sw_us;
            if (wo_h->count()) o["horizon"] = sw_horizon;
            if (wo_ic->count()) o["ic"] = sw_ic;
            if (wo_thr->count()) o["threshold"] = sw_threshold;
            impulse::RunConfig cfg = load_config(cli, "sweep");
            const auto& c = std::get<impulse::SweepConfig>(cfg.config);
            const impulse::ModelParams p = impulse::derive_params(cfg.params);
            const auto records = impulse::sweep(p, c, cfg.dt);
            const fs::path path = out_dir / "sweep.csv";
            impulse::write_sweep_csv(records, path);
            say(cli, std::to_string(records.size()) + " records -> " + path.string());
        } else if (sub_repro->parsed()) {
            if (ro_targets->count()) {
                cli.overlay["reproduce"]["targets"] = rp_targets;
            }
            impulse::RunConfig cfg = load_config(cli, "reproduce");
            const auto& c = std::get<impulse::ReproduceConfig>(cfg.config);
            const impulse::ReproReport report =
                impulse::reproduce(cfg.params, c.targets, out_dir, cfg.seed, cfg.dt);
            for (const auto& r : report.records) {
                say(cli, std::string(r.pass ? "PASS " : "FAIL ") + r.case_id + " (" + r.anchor +
                             "): computed " + std::to_string(r.computed_value) + " vs reference " +
                             std::to_string(r.reference_value) + " [" + r.tolerance + "]");
            }
            say(cli, std::string("overall: ") + (report.overall_pass ? "PASS" : "FAIL"));
            if (!report.overall_pass) return kExitReproFailure;
        }
        return kExitOk;
    } catch (const impulse::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const impulse::ParseError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const impulse::SchemaViolation& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}
