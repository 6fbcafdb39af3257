#pragma once

#include <optional>
#include <vector>

#include "ggsep/decomp.hpp"
#include "ggsep/dynamics.hpp"
#include "ggsep/fock.hpp"

// End-to-end separation pipelines: the pre-compensated sinusoidal-ramp
// protocol, the on-the-fly Fourier-modulated protocol, and their
// time-reversed (recombination) counterparts.
namespace ggsep {

enum class ProtocolMode { Precompensated, OnTheFly };

/// Sinusoidal ramp-down / free flight / ramp-up with friction recapture.
struct PrecompensatedParams {
    double tau = 0.365;     // ramp-down duration, us
    double tau0 = 1.1;      // free flight, us
    double ramp_up = 0.73;  // recapture ramp duration, us
    double eta = 0.4;       // catch friction constant, us
    /// Apply the sinusoidal shape to the curvature instead of the frequency.
    bool ramp_curvature = false;
};

struct FourierCoefficients {
    std::array<double, 5> a{};
    std::array<double, 4> b{};
};

/// Fourier-modulated release and catch. Published example coefficients by
/// default; the catch series are normalized to the floor frequency.
struct OnTheFlyParams {
    double tau1 = 0.85;            // release modulation, us
    double tau2 = 1.4;             // catch modulation, us
    double floor_ratio = 30.0;     // omega_floor = omega_0 / floor_ratio
    double catch_threshold = 50.0; // um B-ion excursion triggering the catch wells
    double eta = 0.4;              // us
    /// Measure the catch threshold from the trap center rather than from
    /// the starting equilibrium position.
    bool threshold_from_origin = true;
    /// Read the Fourier series as the curvature ratio k(t)/k_0 instead of
    /// the frequency ratio (comparison studies).
    bool series_curvature = false;
    FourierCoefficients down{{2.217, 0.3, -0.517, -0.5, -0.5}, {-2.2, 0.1, 0.0, 0.5}};
    FourierCoefficients catch_b{{24.2, 172.7, -206.5, -0.5, 11.1}, {-202.3, -0.1, 9.5, 43.5}};
    FourierCoefficients catch_m{{27.2, 229.5, -264.5, -0.5, 9.3}, {-260.5, -0.5, 10.5, 57.5}};
};

struct ProtocolConfig {
    CrystalConfig crystal;
    ProtocolMode mode = ProtocolMode::OnTheFly;
    PrecompensatedParams precomp;
    OnTheFlyParams onthefly;
    double dt = 1e-4;   // us
    int n_max = 40;     // Fock report cutoff; 0 disables the tables
    int decimation = 10;
    bool reversed = false;        // run the time-mirrored protocol
    bool full_three_body = false; // disable the symmetric reduction
};

struct ProtocolResult {
    Trajectory trajectory;
    std::vector<double> t_series;
    std::vector<double> n_op_series, n_a_series, n_b_series;
    std::vector<double> theta_dot_series;

    double n_op_final = 0.0, n_a_final = 0.0, n_b_final = 0.0;
    double t_catch = -1.0; // us; < 0 when the protocol has no catch event
    double t_final = 0.0;

    std::optional<SqueezeParams> comp_op;      // pre-compensation (ramp protocol)
    std::optional<DoubleCompensation> comp_ab;

    GaussianState op_state_final; // 1 mode
    GaussianState ab_state_final; // 2 modes

    double r_op_final = 0.0; // squeeze of the final states relative to the
    double r_a_final = 0.0;  // ground states at the reference frequencies
    double r_b_final = 0.0;

    std::optional<FockDistribution> op_fock;
    std::optional<FockDistribution> ab_fock;

    std::array<double, 3> ref_freqs{}; // (op, a, b) occupation references
    double runtime_seconds = 0.0;
};

ProtocolResult run_protocol(const ProtocolConfig& config);
ProtocolResult run_precompensated(const ProtocolConfig& config);
ProtocolResult run_onthefly(const ProtocolConfig& config);

/// The example configurations in configs/: the ramp protocol is specified
/// through the in-phase frequency (1 MHz), the on-the-fly protocol through
/// the single-ion well frequency (omega_0 / 2 pi = 1 MHz).
ProtocolConfig bmb_ramp_example();
ProtocolConfig bmb_onthefly_example();

/// Time-mirrored protocol: toggles the reversed flag. Running the result
/// starts from the forward protocol's final state and recombines.
ProtocolConfig reverse_protocol(const ProtocolConfig& config);

/// Schedule builders, exposed for tests and studies.
CurvatureSchedule build_precompensated_schedule(const CrystalConfig& crystal,
                                                const PrecompensatedParams& p);
CurvatureSchedule build_onthefly_schedule(const CrystalConfig& crystal,
                                          const OnTheFlyParams& p, double t_catch);
/// Exploratory integration up to the displacement threshold; the returned
/// catch time is snapped to the integration grid.
double find_catch_time(const CrystalConfig& crystal, const OnTheFlyParams& p,
                       double dt);

/// Squeeze magnitude of a single-mode state relative to the ground state
/// at omega_ref.
double state_squeeze(const GaussianState& state, double omega_ref);

/// Squeeze magnitudes of a two-mode state assigned to the (a, b) modes by
/// the dominant weight of each squeeze channel.
std::pair<double, double> state_squeezes_ab(const GaussianState& state,
                                            double omega_a, double omega_b);

} // namespace ggsep
