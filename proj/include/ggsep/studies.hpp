#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "ggsep/protocols.hpp"

// Waveform optimization and Monte-Carlo robustness analysis.
namespace ggsep {

struct NelderMeadOptions {
    double initial_step = 0.1; ///< simplex edge along each axis
    double tolerance = 1e-9;   ///< value spread termination
    int max_evaluations = 2000;
};

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// Standard reflect/expand/contract/shrink simplex search. Deterministic
/// for a given x0 and options. Throws std::invalid_argument if the
/// objective is not finite at x0.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& x0, const NelderMeadOptions& options);

/// Uniform coefficient noise: each of the 27 Fourier coefficients receives
/// an independent offset in [-f A_max, +f A_max), A_max the largest
/// magnitude within its segment.
struct PerturbationSpec {
    double max_fraction = 0.0;
    int n_samples = 1;
    std::uint64_t seed = 0;
};

/// Counter-based uniform draw in [-1, 1): a pure function of
/// (seed, sample_index, stream_index), so samples can be evaluated in any
/// order or in parallel with identical results.
double perturbation_draw(std::uint64_t seed, std::uint64_t sample_index,
                         std::uint64_t stream_index);

OnTheFlyParams perturb_segments(const OnTheFlyParams& params,
                                const PerturbationSpec& spec, int sample_index);

/// Entrywise average of per-sample Fock tables with standard errors.
struct AveragedTable {
    int n_modes = 1;
    int n_max = 0;
    std::vector<double> mean;
    std::vector<double> std_error;

    double p(int n) const;
    double p(int n_a, int n_b) const;
    double mean_occupation(int mode) const;
};

struct MonteCarloReport {
    AveragedTable op;
    AveragedTable ab;
    int n_samples = 0;
    int n_failed = 0;
    std::uint64_t seed = 0;
    double max_fraction = 0.0;
    double t_catch = 0.0;
};

/// Replays the nominal catch wells under perturbed coefficients with the
/// full three-body dynamics, applies the residual classical displacement
/// to the op mode in the lab frame, and averages the Fock tables.
/// Failed samples are excluded and counted.
MonteCarloReport monte_carlo_robustness(const ProtocolConfig& config,
                                        const PerturbationSpec& spec);

struct OptimizationProblem {
    int max_evaluations = 2000;
    double simplex_scale = 0.05;
    double target_total = 0.5; ///< total final occupation to reach
};

struct OptimizeOutcome {
    OnTheFlyParams params;
    double objective = 0.0; ///< best total final occupation
    int evaluations = 0;
    bool converged = false; ///< objective reached target_total
    ProtocolResult result;  ///< protocol run with the best parameters
};

/// Optimizes the free Fourier coefficients (five per segment). Stages:
/// release segment against the total occupation, catch-B against the op
/// mode, catch-M against n_a + n_b, then one joint polish pass. Boundary
/// conditions are enforced exactly throughout; the best total ever seen
/// is returned, so the outcome never degrades the starting point.
OptimizeOutcome optimize_waveform(const ProtocolConfig& config,
                                  const OptimizationProblem& problem);

} // namespace ggsep
