#include "ggsep/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#ifndef GGSEP_VERSION
#define GGSEP_VERSION "0.0.0"
#endif
#ifndef GGSEP_GIT_REV
#define GGSEP_GIT_REV "unknown"
#endif

namespace ggsep {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where)
{
    if (!j.is_object()) {
        throw std::invalid_argument("config: expected an object at " + where);
    }
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) {
            throw std::invalid_argument("config: unknown key '" + key + "' at " + where);
        }
    }
}

double get_num(const json& j, const char* key, double fallback,
               const std::string& where)
{
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) {
        throw std::invalid_argument("config: '" + std::string(key) + "' at " + where +
                                    " must be a number");
    }
    return j.at(key).get<double>();
}

FourierCoefficients get_fourier(const json& j, const char* key,
                                const FourierCoefficients& fallback,
                                const std::string& where)
{
    if (!j.contains(key)) return fallback;
    const json& f = j.at(key);
    reject_unknown(f, {"a", "b"}, where + "/" + key);
    FourierCoefficients c = fallback;
    if (f.contains("a")) {
        if (!f.at("a").is_array() || f.at("a").size() != 5) {
            throw std::invalid_argument("config: '" + std::string(key) +
                                        ".a' must hold 5 numbers (a0..a4)");
        }
        for (int i = 0; i < 5; ++i) c.a[i] = f.at("a").at(i).get<double>();
    }
    if (f.contains("b")) {
        if (!f.at("b").is_array() || f.at("b").size() != 4) {
            throw std::invalid_argument("config: '" + std::string(key) +
                                        ".b' must hold 4 numbers (b1..b4)");
        }
        for (int i = 0; i < 4; ++i) c.b[i] = f.at("b").at(i).get<double>();
    }
    return c;
}

json fourier_json(const FourierCoefficients& c)
{
    return json{{"a", c.a}, {"b", c.b}};
}

json fock_json(const FockDistribution& d)
{
    json out;
    out["n_max"] = d.n_max;
    out["truncation_defect"] = d.truncation_defect;
    if (d.n_modes == 1) {
        out["populations"] = d.populations;
    } else {
        json rows = json::array();
        for (int na = 0; na <= d.n_max; ++na) {
            json row = json::array();
            for (int nb = 0; nb <= d.n_max; ++nb) row.push_back(d.p(na, nb));
            rows.push_back(row);
        }
        out["populations"] = rows;
    }
    return out;
}

} // namespace

RunConfig parse_config_json(const json& j)
{
    reject_unknown(j,
                   {"crystal", "mode", "dt_us", "n_max", "decimation",
                    "full_three_body", "precompensated", "onthefly", "montecarlo",
                    "optimize"},
                   "/");

    RunConfig rc;
    ProtocolConfig& p = rc.protocol;

    if (j.contains("crystal")) {
        const json& c = j.at("crystal");
        reject_unknown(c, {"data_mass_amu", "helper_mass_amu", "omega_ip_mhz"},
                       "/crystal");
        p.crystal.data_ion.mass =
            get_num(c, "data_mass_amu", constants::mass_be9, "/crystal");
        p.crystal.helper_ion.mass =
            get_num(c, "helper_mass_amu", constants::mass_mg25, "/crystal");
        const double mhz = get_num(c, "omega_ip_mhz", 1.0, "/crystal");
        if (!(mhz > 0.0)) {
            throw std::invalid_argument("config: omega_ip_mhz must be positive");
        }
        p.crystal.omega_ip_initial = 2.0 * std::numbers::pi * mhz;
        if (!(p.crystal.data_ion.mass > 0.0) || !(p.crystal.helper_ion.mass > 0.0)) {
            throw std::invalid_argument("config: ion masses must be positive");
        }
    }

    if (j.contains("mode")) {
        const std::string m = j.at("mode").get<std::string>();
        if (m == "precompensated") {
            p.mode = ProtocolMode::Precompensated;
        } else if (m == "onthefly") {
            p.mode = ProtocolMode::OnTheFly;
        } else {
            throw std::invalid_argument(
                "config: mode must be 'precompensated' or 'onthefly', got '" + m + "'");
        }
    }

    p.dt = get_num(j, "dt_us", p.dt, "/");
    if (!(p.dt > 0.0)) {
        throw std::invalid_argument("config: dt_us must be positive");
    }
    p.n_max = static_cast<int>(get_num(j, "n_max", p.n_max, "/"));
    p.decimation = static_cast<int>(get_num(j, "decimation", p.decimation, "/"));
    if (p.decimation < 1) {
        throw std::invalid_argument("config: decimation must be >= 1");
    }
    if (j.contains("full_three_body")) {
        p.full_three_body = j.at("full_three_body").get<bool>();
    }

    if (j.contains("precompensated")) {
        const json& s = j.at("precompensated");
        reject_unknown(s, {"tau_us", "tau0_us", "ramp_up_us", "eta_us", "ramp_applies_to"},
                       "/precompensated");
        p.precomp.tau = get_num(s, "tau_us", p.precomp.tau, "/precompensated");
        p.precomp.tau0 = get_num(s, "tau0_us", p.precomp.tau0, "/precompensated");
        p.precomp.ramp_up = get_num(s, "ramp_up_us", p.precomp.ramp_up, "/precompensated");
        p.precomp.eta = get_num(s, "eta_us", p.precomp.eta, "/precompensated");
        if (s.contains("ramp_applies_to")) {
            const std::string r = s.at("ramp_applies_to").get<std::string>();
            if (r == "frequency") {
                p.precomp.ramp_curvature = false;
            } else if (r == "curvature") {
                p.precomp.ramp_curvature = true;
            } else {
                throw std::invalid_argument(
                    "config: ramp_applies_to must be 'frequency' or 'curvature'");
            }
        }
        if (!(p.precomp.tau > 0.0) || !(p.precomp.tau0 > 0.0) || !(p.precomp.ramp_up > 0.0)) {
            throw std::invalid_argument("config: ramp durations must be positive");
        }
    }

    if (j.contains("onthefly")) {
        const json& s = j.at("onthefly");
        reject_unknown(s,
                       {"tau1_us", "tau2_us", "floor_ratio", "catch_threshold_um",
                        "eta_us", "fourier_down", "fourier_catch_b", "fourier_catch_m"},
                       "/onthefly");
        p.onthefly.tau1 = get_num(s, "tau1_us", p.onthefly.tau1, "/onthefly");
        p.onthefly.tau2 = get_num(s, "tau2_us", p.onthefly.tau2, "/onthefly");
        p.onthefly.floor_ratio = get_num(s, "floor_ratio", p.onthefly.floor_ratio, "/onthefly");
        p.onthefly.catch_threshold =
            get_num(s, "catch_threshold_um", p.onthefly.catch_threshold, "/onthefly");
        p.onthefly.eta = get_num(s, "eta_us", p.onthefly.eta, "/onthefly");
        p.onthefly.down = get_fourier(s, "fourier_down", p.onthefly.down, "/onthefly");
        p.onthefly.catch_b = get_fourier(s, "fourier_catch_b", p.onthefly.catch_b, "/onthefly");
        p.onthefly.catch_m = get_fourier(s, "fourier_catch_m", p.onthefly.catch_m, "/onthefly");
        if (!(p.onthefly.tau1 > 0.0) || !(p.onthefly.tau2 > 0.0)) {
            throw std::invalid_argument("config: modulation durations must be positive");
        }
        if (!(p.onthefly.floor_ratio > 0.0)) {
            throw std::invalid_argument("config: floor_ratio must be positive");
        }
    }

    if (j.contains("montecarlo")) {
        const json& s = j.at("montecarlo");
        reject_unknown(s, {"max_fraction", "n_samples", "seed"}, "/montecarlo");
        rc.montecarlo.max_fraction =
            get_num(s, "max_fraction", rc.montecarlo.max_fraction, "/montecarlo");
        rc.montecarlo.n_samples =
            static_cast<int>(get_num(s, "n_samples", rc.montecarlo.n_samples, "/montecarlo"));
        if (s.contains("seed")) {
            rc.montecarlo.seed = s.at("seed").get<std::uint64_t>();
        }
        if (rc.montecarlo.max_fraction < 0.0 || rc.montecarlo.n_samples < 1) {
            throw std::invalid_argument("config: invalid montecarlo block");
        }
    }

    if (j.contains("optimize")) {
        const json& s = j.at("optimize");
        reject_unknown(s, {"max_evaluations", "simplex_scale", "target_total"}, "/optimize");
        rc.optimize.max_evaluations = static_cast<int>(
            get_num(s, "max_evaluations", rc.optimize.max_evaluations, "/optimize"));
        rc.optimize.simplex_scale =
            get_num(s, "simplex_scale", rc.optimize.simplex_scale, "/optimize");
        rc.optimize.target_total =
            get_num(s, "target_total", rc.optimize.target_total, "/optimize");
    }

    // Echo the fully resolved config for provenance.
    json r;
    r["crystal"] = {{"data_mass_amu", p.crystal.data_ion.mass},
                    {"helper_mass_amu", p.crystal.helper_ion.mass},
                    {"omega_ip_mhz", p.crystal.omega_ip_initial / (2.0 * std::numbers::pi)}};
    r["mode"] = p.mode == ProtocolMode::Precompensated ? "precompensated" : "onthefly";
    r["dt_us"] = p.dt;
    r["n_max"] = p.n_max;
    r["decimation"] = p.decimation;
    r["full_three_body"] = p.full_three_body;
    r["precompensated"] = {{"tau_us", p.precomp.tau},
                           {"tau0_us", p.precomp.tau0},
                           {"ramp_up_us", p.precomp.ramp_up},
                           {"eta_us", p.precomp.eta},
                           {"ramp_applies_to",
                            p.precomp.ramp_curvature ? "curvature" : "frequency"}};
    r["onthefly"] = {{"tau1_us", p.onthefly.tau1},
                     {"tau2_us", p.onthefly.tau2},
                     {"floor_ratio", p.onthefly.floor_ratio},
                     {"catch_threshold_um", p.onthefly.catch_threshold},
                     {"eta_us", p.onthefly.eta},
                     {"fourier_down", fourier_json(p.onthefly.down)},
                     {"fourier_catch_b", fourier_json(p.onthefly.catch_b)},
                     {"fourier_catch_m", fourier_json(p.onthefly.catch_m)}};
    r["montecarlo"] = {{"max_fraction", rc.montecarlo.max_fraction},
                       {"n_samples", rc.montecarlo.n_samples},
                       {"seed", rc.montecarlo.seed}};
    r["optimize"] = {{"max_evaluations", rc.optimize.max_evaluations},
                     {"simplex_scale", rc.optimize.simplex_scale},
                     {"target_total", rc.optimize.target_total}};
    rc.resolved = std::move(r);
    return rc;
}

RunConfig parse_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("config: cannot open '" + path + "'");
    }
    json j = json::parse(in); // throws parse_error with byte position
    return parse_config_json(j);
}

void write_trajectory_csv(const std::string& path, const ProtocolResult& result)
{
    std::ofstream out(path);
    if (!out) {
        throw std::invalid_argument("cannot write '" + path + "'");
    }
    out << "t_us,c_D1_um,c_H_um,c_D2_um,w_D1_um,w_D2_um,k_D,k_H,n_op,n_a,n_b,theta_dot\n";
    char line[512];
    for (const auto& s : result.trajectory.samples) {
        std::snprintf(line, sizeof(line),
                      "%.9g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                      s.t, s.positions[0], s.positions[1], s.positions[2], -s.w_B,
                      s.w_B, s.k_D, s.k_H, s.n_op, s.n_a, s.n_b,
                      s.geometry.theta_dot);
        out << line;
    }
}

std::string version_string()
{
    return std::string(GGSEP_VERSION) + "+" + GGSEP_GIT_REV;
}

json summary_json(const ProtocolResult& result, const RunConfig& config)
{
    json out;
    out["version"] = version_string();
    out["config"] = config.resolved;
    out["t_final_us"] = result.t_final;
    if (result.t_catch >= 0.0) {
        out["t_catch_us"] = result.t_catch;
    }
    out["final_occupations"] = {{"n_op", result.n_op_final},
                                {"n_a", result.n_a_final},
                                {"n_b", result.n_b_final}};
    out["reference_freqs_rad_us"] = result.ref_freqs;
    out["final_squeezes"] = {{"r_op", result.r_op_final},
                             {"r_a", result.r_a_final},
                             {"r_b", result.r_b_final}};
    if (result.comp_op) {
        out["precompensation"]["op"] = {{"r", result.comp_op->r},
                                        {"phi", result.comp_op->phi},
                                        {"omega_ref", result.comp_op->omega_ref}};
    }
    if (result.comp_ab) {
        const DoubleCompensation& c = *result.comp_ab;
        out["precompensation"]["ab"] = {
            {"r_a", c.squeeze_a.r},       {"phi_a", c.squeeze_a.phi},
            {"r_b", c.squeeze_b.r},       {"phi_b", c.squeeze_b.phi},
            {"theta_bs", c.bs.theta_bs},  {"phi_bs", c.bs.phi_bs},
            {"residual_occupation", c.residual}};
    }
    if (result.op_fock) {
        out["fock"]["op"] = fock_json(*result.op_fock);
    }
    if (result.ab_fock) {
        out["fock"]["ab"] = fock_json(*result.ab_fock);
    }
    out["runtime_seconds"] = result.runtime_seconds;
    return out;
}

json report_json(const MonteCarloReport& report, const RunConfig& config)
{
    json out;
    out["version"] = version_string();
    out["config"] = config.resolved;
    out["seed"] = report.seed;
    out["max_fraction"] = report.max_fraction;
    out["n_samples"] = report.n_samples;
    out["n_failed"] = report.n_failed;
    out["t_catch_us"] = report.t_catch;

    json op;
    op["n_max"] = report.op.n_max;
    op["mean"] = report.op.mean;
    op["std_error"] = report.op.std_error;
    out["op"] = op;

    json ab;
    ab["n_max"] = report.ab.n_max;
    json rows = json::array(), errs = json::array();
    for (int na = 0; na <= report.ab.n_max; ++na) {
        json row = json::array(), erow = json::array();
        for (int nb = 0; nb <= report.ab.n_max; ++nb) {
            row.push_back(report.ab.p(na, nb));
            erow.push_back(report.ab.std_error[static_cast<size_t>(na) *
                                                   (report.ab.n_max + 1) +
                                               nb]);
        }
        rows.push_back(row);
        errs.push_back(erow);
    }
    ab["mean"] = rows;
    ab["std_error"] = errs;
    out["ab"] = ab;
    return out;
}

} // namespace ggsep
