#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "impulse/model.hpp"
#include "impulse/optimize.hpp"
#include "impulse/periodic.hpp"
#include "impulse/simulate.hpp"

#include <json.hpp>

namespace impulse {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SchemaViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Scenario {
    simulate,
    steady_states,
    eta,
    eta_max,
    stability_check,
    optimize,
    min_single_release,
    sweep,
    reproduce,
};

const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct SimulateConfig {
    double tau = 7.0;
    std::vector<double> amounts;  ///< explicit sequence; empty means constant u
    double u = 0.0;
    double u_max = -1.0;  ///< defaults to the largest amount
    bool include_t0 = true;
    State ic{374.0, 0.0};
    double horizon = 180.0;
    int stride = 1;
};

struct SteadyStatesConfig {};

struct EtaConfig {
    double tau = 7.0;
};

struct EtaMaxConfig {
    double tau_lo = -1.0;  ///< < 0: default domain
    double tau_hi = -1.0;
    int grid_points = 2048;
};

struct StabilityConfig {
    double u = 300.0;
    double tau = 7.0;
};

struct OptimizeConfig {
    double tau = 7.0;
    double T = 70.0;
    double C = 1.0 / 200;
    double u_max = -1.0;
    double margin = -1.0;
    State ic{374.0, 0.0};
    int multistarts = 8;
};

struct MinSingleReleaseConfig {
    double tau = 30.0;
    double T = 70.0;
    double u_max = -1.0;
    double margin = -1.0;
    State ic{374.0, 0.0};
};

struct SweepConfig {
    std::vector<double> taus{3.0, 7.0, 14.0};
    std::vector<double> us{80.0, 200.0, 300.0};
    double horizon = 180.0;
    State ic{374.0, 0.0};
    double threshold = -1.0;  ///< < 0: Kb
    bool include_t0 = true;
};

enum class ReproTarget { figures_1_4, tables_2_5, thresholds };

const char* to_string(ReproTarget t);
ReproTarget repro_target_from_string(const std::string& s);

struct ReproduceConfig {
    std::vector<ReproTarget> targets{ReproTarget::figures_1_4, ReproTarget::tables_2_5,
                                     ReproTarget::thresholds};
};

using ScenarioConfig =
    std::variant<SimulateConfig, SteadyStatesConfig, EtaConfig, EtaMaxConfig, StabilityConfig,
                 OptimizeConfig, MinSingleReleaseConfig, SweepConfig, ReproduceConfig>;

/// One fully-specified run: parameters, scenario and its settings.
struct RunConfig {
    RawParams params = default_raw_params();
    Scenario scenario = Scenario::steady_states;
    ScenarioConfig config = SteadyStatesConfig{};
    double dt = 0.01;
    std::uint64_t seed = 1;
};

/// Parses the JSON configuration document. Unknown keys and invalid values
/// raise SchemaViolation (naming the key); malformed JSON raises ParseError
/// with the byte position. An absent or partial "params" section falls back
/// to the built-in default parameter set.
RunConfig parse_config(const std::string& text);

/// Canonical JSON form of a config (used for hashing and provenance).
nlohmann::ordered_json config_to_json(const RunConfig& cfg);

/// SHA-256 hex digest.
std::string sha256_hex(std::string_view data);

struct Provenance {
    std::string config_sha256;
    std::uint64_t seed = 0;
    double dt = 0;
};

/// Writes `t,s1,s2,tag,u_applied` rows, 17 significant digits, one row per
/// sample; post-impulse rows carry the applied release.
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

/// Companion reader; reproduces every written sample bit-exactly.
Trajectory read_trajectory_csv(const std::filesystem::path& path);

/// Writes a single JSON object with a provenance block appended.
void write_result_json(nlohmann::ordered_json payload, const Provenance& prov,
                       const std::filesystem::path& path);

nlohmann::ordered_json steady_states_json(const ModelParams& p);
nlohmann::ordered_json eta_max_json(const SufficientCondition& sc);
nlohmann::ordered_json stability_json(const StabilityReport& rep, double u, double tau);
nlohmann::ordered_json optimization_json(const OptimizationResult& res,
                                         const ControlProblem& prob);

struct ReproRecord {
    std::string case_id;      ///< e.g. "figure_2c", "table_2_T70", "eta_tau3"
    std::string anchor;       ///< reference figure/table the case reproduces
    double reference_value = 0;
    double computed_value = 0;
    std::string tolerance;    ///< human-readable acceptance band
    bool pass = false;
};

struct ReproReport {
    std::vector<ReproRecord> records;
    bool overall_pass = true;
};

nlohmann::ordered_json repro_report_json(const ReproReport& report);

/// Runs the requested reproduction targets, writes per-case CSV/JSON artifacts
/// into out_dir plus repro_report.json, and returns the report. Case failures
/// are recorded, not thrown.
ReproReport reproduce(const RawParams& raw, const std::vector<ReproTarget>& targets,
                      const std::filesystem::path& out_dir, std::uint64_t seed, double dt);

struct SweepRecord {
    double tau = 0;
    double u = 0;
    double s1_final = 0;
    double s2_final = 0;
    double s1_max = 0;
    double s2_max = 0;
    bool eliminated = false;
};

/// One simulation per (tau, u) grid point, deterministic tau-major order.
std::vector<SweepRecord> sweep(const ModelParams& params, const SweepConfig& cfg, double dt);

void write_sweep_csv(const std::vector<SweepRecord>& records, const std::filesystem::path& path);

}  // namespace impulse
