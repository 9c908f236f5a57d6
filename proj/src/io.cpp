#include "impulse/io.hpp"

#include <array>
#include <cmath>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <future>
#include <sstream>

namespace impulse {

using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// SHA-256 (FIPS 180-4), compact single-use implementation for config hashes.
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<std::uint32_t, 64> kSha256K = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
    0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
    0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
    0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
    0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
    0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
    0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
    0xc67178f2};

inline std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

}  // namespace

std::string sha256_hex(std::string_view data) {
    std::array<std::uint32_t, 8> h = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                                      0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    std::vector<unsigned char> msg(data.begin(), data.end());
    const std::uint64_t bit_len = static_cast<std::uint64_t>(msg.size()) * 8;
    msg.push_back(0x80);
    while (msg.size() % 64 != 56) msg.push_back(0x00);
    for (int i = 7; i >= 0; --i) msg.push_back(static_cast<unsigned char>(bit_len >> (8 * i)));

    for (std::size_t off = 0; off < msg.size(); off += 64) {
        std::array<std::uint32_t, 64> w{};
        for (int i = 0; i < 16; ++i) {
            w[i] = (static_cast<std::uint32_t>(msg[off + 4 * i]) << 24) |
                   (static_cast<std::uint32_t>(msg[off + 4 * i + 1]) << 16) |
                   (static_cast<std::uint32_t>(msg[off + 4 * i + 2]) << 8) |
                   static_cast<std::uint32_t>(msg[off + 4 * i + 3]);
        }
        for (int i = 16; i < 64; ++i) {
            const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        auto [a, b, c, d, e, f, g, hh] = h;
        for (int i = 0; i < 64; ++i) {
            const std::uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            const std::uint32_t ch = (e & f) ^ (~e & g);
            const std::uint32_t temp1 = hh + S1 + ch + kSha256K[i] + w[i];
            const std::uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            const std::uint32_t temp2 = S0 + maj;
            hh = g;
            g = f;
            f = e;
            e = d + temp1;
            d = c;
            c = b;
            b = a;
            a = temp1 + temp2;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
        h[5] += f;
        h[6] += g;
        h[7] += hh;
    }
    char out[65];
    for (int i = 0; i < 8; ++i) std::snprintf(out + 8 * i, 9, "%08x", h[i]);
    return std::string(out, 64);
}

// ---------------------------------------------------------------------------
// Scenario names
// ---------------------------------------------------------------------------

const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::simulate: return "simulate";
        case Scenario::steady_states: return "steady_states";
        case Scenario::eta: return "eta";
        case Scenario::eta_max: return "eta_max";
        case Scenario::stability_check: return "stability_check";
        case Scenario::optimize: return "optimize";
        case Scenario::min_single_release: return "min_single_release";
        case Scenario::sweep: return "sweep";
        case Scenario::reproduce: return "reproduce";
    }
    return "?";
}

Scenario scenario_from_string(const std::string& s) {
    for (Scenario sc : {Scenario::simulate, Scenario::steady_states, Scenario::eta,
                        Scenario::eta_max, Scenario::stability_check, Scenario::optimize,
                        Scenario::min_single_release, Scenario::sweep, Scenario::reproduce}) {
        if (s == to_string(sc)) return sc;
    }
    throw SchemaViolation("scenario: unknown value '" + s + "'");
}

const char* to_string(ReproTarget t) {
    switch (t) {
        case ReproTarget::figures_1_4: return "figures_1_4";
        case ReproTarget::tables_2_5: return "tables_2_5";
        case ReproTarget::thresholds: return "thresholds";
    }
    return "?";
}

ReproTarget repro_target_from_string(const std::string& s) {
    for (ReproTarget t :
         {ReproTarget::figures_1_4, ReproTarget::tables_2_5, ReproTarget::thresholds}) {
        if (s == to_string(t)) return t;
    }
    throw SchemaViolation("reproduce.targets: unknown value '" + s + "'");
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace {

void check_keys(const ordered_json& obj, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) {
            if (item.key() == a) {
                ok = true;
                break;
            }
        }
        if (!ok) throw SchemaViolation(ctx + ": unknown key '" + item.key() + "'");
    }
}

double as_number(const ordered_json& j, const std::string& ctx) {
    if (!j.is_number()) throw SchemaViolation(ctx + ": expected a number");
    return j.get<double>();
}

double positive_number(const ordered_json& j, const std::string& ctx) {
    const double v = as_number(j, ctx);
    if (!(v > 0.0)) throw SchemaViolation(ctx + ": must be strictly positive");
    return v;
}

double non_negative_number(const ordered_json& j, const std::string& ctx) {
    const double v = as_number(j, ctx);
    if (!(v >= 0.0)) throw SchemaViolation(ctx + ": must be non-negative");
    return v;
}

State parse_ic(const ordered_json& j, const std::string& ctx) {
    if (!j.is_array() || j.size() != 2) {
        throw SchemaViolation(ctx + ": expected [s1, s2]");
    }
    State ic{non_negative_number(j[0], ctx + "[0]"), non_negative_number(j[1], ctx + "[1]")};
    return ic;
}

std::vector<double> parse_number_list(const ordered_json& j, const std::string& ctx,
                                      bool require_non_negative) {
    if (!j.is_array()) throw SchemaViolation(ctx + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string c = ctx + "[" + std::to_string(i) + "]";
        out.push_back(require_non_negative ? non_negative_number(j[i], c) : as_number(j[i], c));
    }
    return out;
}

RawParams parse_params(const ordered_json& j) {
    check_keys(j, {"psi1", "psi2", "delta1", "delta2", "K0", "K1", "K2"}, "params");
    RawParams p = default_raw_params();
    auto grab = [&](const char* key, double& field) {
        if (j.contains(key)) field = positive_number(j.at(key), std::string("params.") + key);
    };
    grab("psi1", p.psi1);
    grab("psi2", p.psi2);
    grab("delta1", p.delta1);
    grab("delta2", p.delta2);
    grab("K0", p.K0);
    grab("K1", p.K1);
    grab("K2", p.K2);
    return p;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("config parse error at byte " + std::to_string(e.byte) + ": " +
                         e.what());
    }
    if (!doc.is_object()) throw SchemaViolation("config root must be an object");
    if (!doc.contains("scenario")) throw SchemaViolation("config: missing 'scenario'");
    if (!doc.at("scenario").is_string()) throw SchemaViolation("scenario: expected a string");

    RunConfig cfg;
    cfg.scenario = scenario_from_string(doc.at("scenario").get<std::string>());
    const std::string section = to_string(cfg.scenario);
    check_keys(doc, {"scenario", "params", "dt", "seed", section.c_str()}, "config");

    if (doc.contains("params")) cfg.params = parse_params(doc.at("params"));
    if (doc.contains("dt")) cfg.dt = positive_number(doc.at("dt"), "dt");
    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_unsigned()) {
            throw SchemaViolation("seed: expected an unsigned integer");
        }
        cfg.seed = doc.at("seed").get<std::uint64_t>();
    }

    const ordered_json empty = ordered_json::object();
    const ordered_json& sec = doc.contains(section) ? doc.at(section) : empty;
    if (!sec.is_object()) throw SchemaViolation(section + ": expected an object");

    switch (cfg.scenario) {
        case Scenario::simulate: {
            check_keys(sec,
                       {"tau", "u", "amounts", "u_max", "include_t0", "ic", "horizon", "stride"},
                       section);
            SimulateConfig c;
            if (sec.contains("tau")) c.tau = positive_number(sec.at("tau"), "simulate.tau");
            if (sec.contains("u")) c.u = non_negative_number(sec.at("u"), "simulate.u");
            if (sec.contains("amounts")) {
                c.amounts = parse_number_list(sec.at("amounts"), "simulate.amounts", true);
            }
            if (sec.contains("u_max")) {
                c.u_max = non_negative_number(sec.at("u_max"), "simulate.u_max");
            }
            if (sec.contains("include_t0")) {
                if (!sec.at("include_t0").is_boolean()) {
                    throw SchemaViolation("simulate.include_t0: expected a boolean");
                }
                c.include_t0 = sec.at("include_t0").get<bool>();
            }
            if (sec.contains("ic")) c.ic = parse_ic(sec.at("ic"), "simulate.ic");
            if (sec.contains("horizon")) {
                c.horizon = positive_number(sec.at("horizon"), "simulate.horizon");
            }
            if (sec.contains("stride")) {
                const double v = positive_number(sec.at("stride"), "simulate.stride");
                c.stride = static_cast<int>(v);
                if (c.stride < 1 || v != static_cast<double>(c.stride)) {
                    throw SchemaViolation("simulate.stride: expected a positive integer");
                }
            }
            cfg.config = c;
            break;
        }
        case Scenario::steady_states: {
            check_keys(sec, {}, section);
            cfg.config = SteadyStatesConfig{};
            break;
        }
        case Scenario::eta: {
            check_keys(sec, {"tau"}, section);
            EtaConfig c;
            if (sec.contains("tau")) c.tau = positive_number(sec.at("tau"), "eta.tau");
            cfg.config = c;
            break;
        }
        case Scenario::eta_max: {
            check_keys(sec, {"tau_lo", "tau_hi", "grid_points"}, section);
            EtaMaxConfig c;
            if (sec.contains("tau_lo")) {
                c.tau_lo = positive_number(sec.at("tau_lo"), "eta_max.tau_lo");
            }
            if (sec.contains("tau_hi")) {
                c.tau_hi = positive_number(sec.at("tau_hi"), "eta_max.tau_hi");
            }
            if (sec.contains("grid_points")) {
                c.grid_points =
                    static_cast<int>(positive_number(sec.at("grid_points"), "eta_max.grid_points"));
            }
            cfg.config = c;
            break;
        }
        case Scenario::stability_check: {
            check_keys(sec, {"u", "tau"}, section);
            StabilityConfig c;
            if (sec.contains("u")) c.u = non_negative_number(sec.at("u"), "stability_check.u");
            if (sec.contains("tau")) {
                c.tau = positive_number(sec.at("tau"), "stability_check.tau");
            }
            cfg.config = c;
            break;
        }
        case Scenario::optimize: {
            check_keys(sec, {"tau", "T", "C", "u_max", "margin", "ic", "multistarts"}, section);
            OptimizeConfig c;
            if (sec.contains("tau")) c.tau = positive_number(sec.at("tau"), "optimize.tau");
            if (sec.contains("T")) c.T = positive_number(sec.at("T"), "optimize.T");
            if (sec.contains("C")) c.C = positive_number(sec.at("C"), "optimize.C");
            if (sec.contains("u_max")) c.u_max = positive_number(sec.at("u_max"), "optimize.u_max");
            if (sec.contains("margin")) {
                c.margin = non_negative_number(sec.at("margin"), "optimize.margin");
            }
            if (sec.contains("ic")) c.ic = parse_ic(sec.at("ic"), "optimize.ic");
            if (sec.contains("multistarts")) {
                c.multistarts = static_cast<int>(
                    non_negative_number(sec.at("multistarts"), "optimize.multistarts"));
            }
            cfg.config = c;
            break;
        }
        case Scenario::min_single_release: {
            check_keys(sec, {"tau", "T", "u_max", "margin", "ic"}, section);
            MinSingleReleaseConfig c;
            if (sec.contains("tau")) {
                c.tau = positive_number(sec.at("tau"), "min_single_release.tau");
            }
            if (sec.contains("T")) c.T = positive_number(sec.at("T"), "min_single_release.T");
            if (sec.contains("u_max")) {
                c.u_max = positive_number(sec.at("u_max"), "min_single_release.u_max");
            }
            if (sec.contains("margin")) {
                c.margin = non_negative_number(sec.at("margin"), "min_single_release.margin");
            }
            if (sec.contains("ic")) c.ic = parse_ic(sec.at("ic"), "min_single_release.ic");
            cfg.config = c;
            break;
        }
        case Scenario::sweep: {
            check_keys(sec, {"taus", "us", "horizon", "ic", "threshold", "include_t0"}, section);
            SweepConfig c;
            if (sec.contains("taus")) {
                c.taus = parse_number_list(sec.at("taus"), "sweep.taus", false);
                for (double t : c.taus) {
                    if (!(t > 0.0)) throw SchemaViolation("sweep.taus: must be strictly positive");
                }
            }
            if (sec.contains("us")) c.us = parse_number_list(sec.at("us"), "sweep.us", true);
            if (sec.contains("horizon")) {
                c.horizon = positive_number(sec.at("horizon"), "sweep.horizon");
            }
            if (sec.contains("ic")) c.ic = parse_ic(sec.at("ic"), "sweep.ic");
            if (sec.contains("threshold")) {
                c.threshold = positive_number(sec.at("threshold"), "sweep.threshold");
            }
            if (sec.contains("include_t0")) {
                if (!sec.at("include_t0").is_boolean()) {
                    throw SchemaViolation("sweep.include_t0: expected a boolean");
                }
                c.include_t0 = sec.at("include_t0").get<bool>();
            }
            cfg.config = c;
            break;
        }
        case Scenario::reproduce: {
            check_keys(sec, {"targets"}, section);
            ReproduceConfig c;
            if (sec.contains("targets")) {
                if (!sec.at("targets").is_array()) {
                    throw SchemaViolation("reproduce.targets: expected an array");
                }
                c.targets.clear();
                for (const auto& t : sec.at("targets")) {
                    if (!t.is_string()) {
                        throw SchemaViolation("reproduce.targets: expected strings");
                    }
                    c.targets.push_back(repro_target_from_string(t.get<std::string>()));
                }
            }
            cfg.config = c;
            break;
        }
    }
    return cfg;
}

namespace {

ordered_json ic_json(const State& ic) { return ordered_json::array({ic.s1, ic.s2}); }

}  // namespace

nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
    ordered_json j;
    j["scenario"] = to_string(cfg.scenario);
    j["params"] = {{"psi1", cfg.params.psi1},     {"psi2", cfg.params.psi2},
                   {"delta1", cfg.params.delta1}, {"delta2", cfg.params.delta2},
                   {"K0", cfg.params.K0},         {"K1", cfg.params.K1},
                   {"K2", cfg.params.K2}};
    j["dt"] = cfg.dt;
    j["seed"] = cfg.seed;
    ordered_json sec;
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, SimulateConfig>) {
                sec = {{"tau", c.tau},       {"u", c.u},
                       {"amounts", c.amounts}, {"u_max", c.u_max},
                       {"include_t0", c.include_t0}, {"ic", ic_json(c.ic)},
                       {"horizon", c.horizon}, {"stride", c.stride}};
            } else if constexpr (std::is_same_v<T, EtaConfig>) {
                sec = {{"tau", c.tau}};
            } else if constexpr (std::is_same_v<T, EtaMaxConfig>) {
                sec = {{"tau_lo", c.tau_lo}, {"tau_hi", c.tau_hi}, {"grid_points", c.grid_points}};
            } else if constexpr (std::is_same_v<T, StabilityConfig>) {
                sec = {{"u", c.u}, {"tau", c.tau}};
            } else if constexpr (std::is_same_v<T, OptimizeConfig>) {
                sec = {{"tau", c.tau},       {"T", c.T},
                       {"C", c.C},           {"u_max", c.u_max},
                       {"margin", c.margin}, {"ic", ic_json(c.ic)},
                       {"multistarts", c.multistarts}};
            } else if constexpr (std::is_same_v<T, MinSingleReleaseConfig>) {
                sec = {{"tau", c.tau},
                       {"T", c.T},
                       {"u_max", c.u_max},
                       {"margin", c.margin},
                       {"ic", ic_json(c.ic)}};
            } else if constexpr (std::is_same_v<T, SweepConfig>) {
                sec = {{"taus", c.taus},           {"us", c.us},
                       {"horizon", c.horizon},     {"ic", ic_json(c.ic)},
                       {"threshold", c.threshold}, {"include_t0", c.include_t0}};
            } else if constexpr (std::is_same_v<T, ReproduceConfig>) {
                ordered_json targets = ordered_json::array();
                for (ReproTarget t : c.targets) targets.push_back(to_string(t));
                sec = {{"targets", targets}};
            } else {
                sec = ordered_json::object();
            }
        },
        cfg.config);
    j[to_string(cfg.scenario)] = sec;
    return j;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "t,s1,s2,tag,u_applied\n";
    for (const auto& s : traj.samples) {
        out << fmt17(s.t) << ',' << fmt17(s.state.s1) << ',' << fmt17(s.state.s2) << ','
            << to_string(s.tag) << ',' << fmt17(s.u_applied) << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    Trajectory traj;
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty file: " + path.string());
    if (line != "t,s1,s2,tag,u_applied") {
        throw IoError("unexpected CSV header in " + path.string());
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::array<std::string, 5> fields;
        std::size_t start = 0;
        for (int i = 0; i < 5; ++i) {
            const std::size_t comma = line.find(',', start);
            if (i < 4 && comma == std::string::npos) {
                throw IoError("malformed CSV row in " + path.string() + ": " + line);
            }
            fields[i] = line.substr(start, comma == std::string::npos ? std::string::npos
                                                                      : comma - start);
            start = comma + 1;
        }
        TrajectorySample s;
        s.t = std::strtod(fields[0].c_str(), nullptr);
        s.state.s1 = std::strtod(fields[1].c_str(), nullptr);
        s.state.s2 = std::strtod(fields[2].c_str(), nullptr);
        s.tag = sample_tag_from_string(fields[3]);
        s.u_applied = std::strtod(fields[4].c_str(), nullptr);
        traj.samples.push_back(s);
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Result JSON
// ---------------------------------------------------------------------------

void write_result_json(ordered_json payload, const Provenance& prov,
                       const std::filesystem::path& path) {
    payload["provenance"] = {{"config_sha256", prov.config_sha256},
                             {"seed", prov.seed},
                             {"dt", prov.dt},
                             {"tool", "impulse 0.1.0"}};
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << payload.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

nlohmann::ordered_json steady_states_json(const ModelParams& p) {
    return {{"r1", p.r1},
            {"r2", p.r2},
            {"Kb", p.Kb},
            {"Kstar", p.Kstar},
            {"saddle", ordered_json::array({p.S1_saddle, p.S2_saddle})},
            {"attractors",
             ordered_json::array({ordered_json::array({0.0, p.raw.K2}),
                                  ordered_json::array({p.Kstar, 0.0})})}};
}

nlohmann::ordered_json eta_max_json(const SufficientCondition& sc) {
    return {{"tau_max", sc.tau_max},
            {"eta_max", sc.eta_max},
            {"domain", ordered_json::array({sc.search_domain.lo, sc.search_domain.hi})}};
}

nlohmann::ordered_json stability_json(const StabilityReport& rep, double u, double tau) {
    ordered_json j{{"u", u},
                   {"tau", tau},
                   {"holds", rep.holds},
                   {"period_min", rep.period_min},
                   {"eta_criterion", to_string(rep.eta_criterion)}};
    if (std::isfinite(rep.eta_value)) {
        j["eta"] = rep.eta_value;
    } else {
        j["eta"] = nullptr;
    }
    return j;
}

nlohmann::ordered_json optimization_json(const OptimizationResult& res,
                                         const ControlProblem& prob) {
    double total = 0;
    for (double v : res.u_star) total += v;
    ordered_json hist = ordered_json::array();
    for (const auto& h : res.history) {
        hist.push_back(ordered_json::array({h.J, h.violation}));
    }
    return {{"tau", prob.tau},
            {"T", prob.T},
            {"N", prob.N},
            {"C", prob.C},
            {"u_max", prob.u_max},
            {"margin", prob.margin},
            {"feasible", res.feasible},
            {"no_feasible_point_found", res.no_feasible_point_found},
            {"u_star", res.u_star},
            {"sum_u", total},
            {"J", res.J},
            {"s1_final", res.s1_final},
            {"evaluations", res.evaluations},
            {"method", res.method},
            {"history", hist}};
}

nlohmann::ordered_json repro_report_json(const ReproReport& report) {
    ordered_json records = ordered_json::array();
    for (const auto& r : report.records) {
        records.push_back({{"case", r.case_id},
                           {"anchor", r.anchor},
                           {"reference_value", r.reference_value},
                           {"computed_value", r.computed_value},
                           {"tolerance", r.tolerance},
                           {"pass", r.pass}});
    }
    return {{"records", records}, {"overall_pass", report.overall_pass}};
}

// ---------------------------------------------------------------------------
// Reproduction harness
// ---------------------------------------------------------------------------

namespace {

struct FigureCase {
    const char* id;
    const char* anchor;
    double tau;
    double u;
    bool eliminates;
};

constexpr FigureCase kFigureCases[] = {
    {"figure_1a", "Fig. 1(a)", 7.0, 100.0, false},
    {"figure_1b", "Fig. 1(b)", 14.0, 200.0, false},
    {"figure_2c", "Fig. 2(c)", 7.0, 300.0, true},
    {"figure_2d", "Fig. 2(d)", 14.0, 43760.0, true},
    {"figure_3e", "Fig. 3(e)", 3.0, 80.0, true},
    {"figure_3f", "Fig. 3(f)", 7.0, 80.0, false},
    {"figure_4g", "Fig. 4(g)", 7.0, 200.0, true},
    {"figure_4h", "Fig. 4(h)", 14.0, 600.0, true},
};

struct TableCase {
    const char* id;
    const char* anchor;
    double tau;
    double T;
    double sum_u;
};

constexpr TableCase kTableCases[] = {
    {"table_2_T300", "Table 2, T=300", 7.0, 300.0, 2949.52},
    {"table_2_T180", "Table 2, T=180", 7.0, 180.0, 1243.07},
    {"table_2_T100", "Table 2, T=100", 7.0, 100.0, 1126.62},
    {"table_2_T70", "Table 2, T=70", 7.0, 70.0, 908.66},
    {"table_3_T300", "Table 3, T=300", 14.0, 300.0, 3604.23},
    {"table_3_T180", "Table 3, T=180", 14.0, 180.0, 1677.15},
    {"table_3_T100", "Table 3, T=100", 14.0, 100.0, 1109.34},
    {"table_3_T70", "Table 3, T=70", 14.0, 70.0, 1110.13},
    {"table_4_T300", "Table 4, T=300", 21.0, 300.0, 2918.42},
    {"table_4_T180", "Table 4, T=180", 21.0, 180.0, 2283.66},
    {"table_4_T100", "Table 4, T=100", 21.0, 100.0, 1294.69},
    {"table_4_T70", "Table 4, T=70", 21.0, 70.0, 1106.70},
    {"table_5_T300", "Table 5, T=300", 30.0, 300.0, 3788.17},
    {"table_5_T180", "Table 5, T=180", 30.0, 180.0, 2081.34},
    {"table_5_T100", "Table 5, T=100", 30.0, 100.0, 1256.42},
    {"table_5_T70", "Table 5, T=70", 30.0, 70.0, 873.47},
};

void run_figures(const ModelParams& params, const std::filesystem::path& out_dir, double dt,
                 ReproReport& report) {
    std::vector<std::future<std::pair<Trajectory, bool>>> futures;
    for (const FigureCase& fc : kFigureCases) {
        futures.push_back(std::async(std::launch::async, [&params, fc, dt] {
            ReleaseSchedule schedule = constant_schedule_for_horizon(fc.tau, fc.u, 180.0, true);
            SimOptions opt;
            opt.dt_request = dt;
            opt.stride = 10;
            Trajectory traj = simulate(params, schedule, State{374.0, 0.0}, 180.0, opt);
            const bool verdict = classify_elimination(traj, params.Kb);
            return std::make_pair(std::move(traj), verdict);
        }));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) {
        auto [traj, verdict] = futures[i].get();
        const FigureCase& fc = kFigureCases[i];
        write_trajectory_csv(traj, out_dir / (std::string(fc.id) + ".csv"));
        ReproRecord rec;
        rec.case_id = fc.id;
        rec.anchor = fc.anchor;
        rec.reference_value = fc.eliminates ? 1.0 : 0.0;
        rec.computed_value = verdict ? 1.0 : 0.0;
        rec.tolerance = "exact verdict (S1(180) < Kb, non-increasing release-time envelope)";
        rec.pass = verdict == fc.eliminates;
        report.records.push_back(rec);
    }
}

void run_thresholds(const ModelParams& params, const std::filesystem::path& out_dir,
                    ReproReport& report) {
    auto add = [&](const std::string& id, const std::string& anchor, double ref, double got,
                   const std::string& tol, bool pass) {
        report.records.push_back({id, anchor, ref, got, tol, pass});
    };
    const double e3 = eta(3.0, params);
    add("eta_tau3", "reference eta(3) ~ 60", 60.0, e3, "[54, 66]", e3 >= 54.0 && e3 <= 66.0);
    const double e7 = eta(7.0, params);
    add("eta_tau7", "reference eta(7) ~ 300", 300.0, e7, "[270, 330]",
        e7 >= 270.0 && e7 <= 330.0);
    const double e14 = eta(14.0, params);
    add("eta_tau14", "reference eta(14) < 0", 0.0, e14, "negative", e14 < 0.0);
    const SufficientCondition sc = eta_max(params, default_eta_domain(params));
    add("eta_max", "reference max eta ~ 43759.89", 43759.89, sc.eta_max, "±1%",
        std::abs(sc.eta_max - 43759.89) <= 0.01 * 43759.89);
    write_result_json(eta_max_json(sc), Provenance{}, out_dir / "eta_max.json");
}

void run_tables(const ModelParams& params, const std::filesystem::path& out_dir,
                std::uint64_t seed, double dt, ReproReport& report) {
    struct CaseOut {
        OptimizationResult res;
        ControlProblem prob;
        bool feasible_half = false;
    };
    std::vector<std::future<CaseOut>> futures;
    for (const TableCase& tc : kTableCases) {
        futures.push_back(std::async(std::launch::async, [&params, tc, seed, dt] {
            CaseOut out;
            out.prob = make_problem(params, tc.tau, tc.T, 1.0 / 200);
            SolverOptions opt;
            opt.seed = seed;
            opt.dt_request = dt;
            out.res = solve(out.prob, opt);
            if (out.res.feasible) {
                out.feasible_half =
                    evaluate(out.res.u_star, out.prob, dt / 2.0).feasible;
            }
            return out;
        }));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) {
        CaseOut out = futures[i].get();
        const TableCase& tc = kTableCases[i];
        write_result_json(optimization_json(out.res, out.prob), Provenance{"", seed, dt},
                          out_dir / (std::string(tc.id) + ".json"));
        double total = 0;
        for (double v : out.res.u_star) total += v;
        ReproRecord rec;
        rec.case_id = tc.id;
        rec.anchor = tc.anchor;
        rec.reference_value = tc.sum_u;
        rec.computed_value = total;
        rec.tolerance = "sum(u) within ±25% and feasible at dt/2";
        const bool in_band = total >= 0.75 * tc.sum_u && total <= 1.25 * tc.sum_u;
        rec.pass = in_band && out.res.feasible && out.feasible_half;
        report.records.push_back(rec);
    }
}

}  // namespace

ReproReport reproduce(const RawParams& raw, const std::vector<ReproTarget>& targets,
                      const std::filesystem::path& out_dir, std::uint64_t seed, double dt) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir.string());

    const ModelParams params = derive_params(raw);
    ReproReport report;
    for (ReproTarget t : targets) {
        switch (t) {
            case ReproTarget::figures_1_4: run_figures(params, out_dir, dt, report); break;
            case ReproTarget::thresholds: run_thresholds(params, out_dir, report); break;
            case ReproTarget::tables_2_5: run_tables(params, out_dir, seed, dt, report); break;
        }
    }
    report.overall_pass = true;
    for (const auto& r : report.records) report.overall_pass = report.overall_pass && r.pass;
    write_result_json(repro_report_json(report), Provenance{"", seed, dt},
                      out_dir / "repro_report.json");
    return report;
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

std::vector<SweepRecord> sweep(const ModelParams& params, const SweepConfig& cfg, double dt) {
    std::vector<SweepRecord> records;
    records.reserve(cfg.taus.size() * cfg.us.size());
    const double threshold = cfg.threshold > 0.0 ? cfg.threshold : params.Kb;

    std::vector<std::future<SweepRecord>> futures;
    for (double tau : cfg.taus) {
        for (double u : cfg.us) {
            futures.push_back(std::async(std::launch::async, [&params, &cfg, tau, u, dt,
                                                              threshold] {
                ReleaseSchedule schedule =
                    constant_schedule_for_horizon(tau, u, cfg.horizon, cfg.include_t0);
                SimOptions opt;
                opt.dt_request = dt;
                opt.stride = 10;
                Trajectory traj = simulate(params, schedule, cfg.ic, cfg.horizon, opt);
                SweepRecord rec;
                rec.tau = tau;
                rec.u = u;
                const State last = traj.samples.back().state;
                rec.s1_final = last.s1;
                rec.s2_final = last.s2;
                rec.s1_max = 0;
                rec.s2_max = 0;
                for (const auto& s : traj.samples) {
                    rec.s1_max = std::max(rec.s1_max, s.state.s1);
                    rec.s2_max = std::max(rec.s2_max, s.state.s2);
                }
                rec.eliminated = classify_elimination(traj, threshold);
                return rec;
            }));
        }
    }
    for (auto& f : futures) records.push_back(f.get());
    return records;
}

void write_sweep_csv(const std::vector<SweepRecord>& records,
                     const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "tau,u,s1_final,s2_final,s1_max,s2_max,eliminated\n";
    for (const auto& r : records) {
        out << fmt17(r.tau) << ',' << fmt17(r.u) << ',' << fmt17(r.s1_final) << ','
            << fmt17(r.s2_final) << ',' << fmt17(r.s1_max) << ',' << fmt17(r.s2_max) << ','
            << (r.eliminated ? 1 : 0) << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace impulse
