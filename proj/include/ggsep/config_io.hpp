#pragma once

#include <string>

#include <json.hpp>

#include "ggsep/protocols.hpp"
#include "ggsep/studies.hpp"

// Config parsing and result export for the command-line pipelines.
namespace ggsep {

struct RunConfig {
    ProtocolConfig protocol;
    PerturbationSpec montecarlo{1e-5, 1000, 20240817ULL};
    OptimizationProblem optimize;
    nlohmann::json resolved; ///< config with all defaults applied
};

/// Parses and validates a JSON config file. Unknown keys are rejected with
/// their location; missing keys fall back to the published example values.
/// Throws std::invalid_argument (validation) or nlohmann::json::exception
/// (syntax).
RunConfig parse_config(const std::string& path);
RunConfig parse_config_json(const nlohmann::json& j);

/// Frozen column set:
/// t_us,c_D1_um,c_H_um,c_D2_um,w_D1_um,w_D2_um,k_D,k_H,n_op,n_a,n_b,theta_dot
void write_trajectory_csv(const std::string& path, const ProtocolResult& result);

nlohmann::json summary_json(const ProtocolResult& result, const RunConfig& config);
nlohmann::json report_json(const MonteCarloReport& report, const RunConfig& config);

std::string version_string();

} // namespace ggsep
