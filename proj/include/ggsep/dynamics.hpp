#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <vector>

#include "ggsep/crystal.hpp"
#include "ggsep/symplectic.hpp"
#include "ggsep/waveforms.hpp"

// Classical 1-D three-body integration under the full (non-quadratic)
// Hamiltonian with time-dependent wells, co-integrating the op and (a,b)
// transfer matrices on the same clock.
namespace ggsep {

/// Ion ordering is (D1, H, D2) with c_D1 < c_H < c_D2 throughout.
struct ClassicalState {
    std::array<double, 3> positions{};  // um
    std::array<double, 3> velocities{}; // um/us
    double t = 0.0;
};

/// Instantaneous well minima and local curvatures at the three ions.
struct WellState {
    std::array<double, 3> minima{};     // um
    std::array<double, 3> curvatures{}; // amu/us^2
};

/// Hamilton's equations for the three ions: returns (velocities,
/// accelerations). Throws numerical_error when a Coulomb gap shrinks
/// below 1e-6 um.
std::array<double, 6> classical_derivatives(const ClassicalState& state,
                                            const WellState& wells,
                                            const CrystalConfig& config);

/// Uniformly sampled cubic-Hermite series, used to replay well minima.
struct HermiteSeries {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> value;
    std::vector<double> slope;

    bool empty() const { return value.empty(); }
    double eval(double t) const;
    double eval_derivative(double t) const;
    /// Mirror in time about [t0, t0 + (n-1) dt]: values reversed, slopes negated.
    HermiteSeries reversed() const;
};

struct TrajectorySample {
    double t = 0.0;
    std::array<double, 3> positions{};
    std::array<double, 3> velocities{};
    double w_B = 0.0; // right catch-well minimum (left well at -w_B)
    double k_D = 0.0;
    double k_H = 0.0;
    ModeGeometry geometry;
    Eigen::Matrix2d m_op = Eigen::Matrix2d::Identity();
    Eigen::Matrix4d m_ab = Eigen::Matrix4d::Identity();
    // Occupation columns are filled by the protocol layer, which knows the
    // initial state and the reference frequencies.
    double n_op = 0.0;
    double n_a = 0.0;
    double n_b = 0.0;
};

struct CatchEvent {
    double t_catch = 0.0;
    double threshold = 0.0;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    double dt = 0.0;
    int decimation = 1;
    TransferMatrix m_op_final;
    TransferMatrix m_ab_final;
    ClassicalState final_state;
    ModeGeometry initial_geometry;
    ModeGeometry final_geometry;
    HermiteSeries well_minimum; // w_B(t) of the nominal run, dt grid
};

struct IntegrationOptions {
    double dt = 1e-4;    // us
    int decimation = 10; // sample every N steps
    /// Reduced symmetric system (c_H = 0, c_D1 = -c_D2), the nominal-run
    /// approximation. The full three-body system is used when false.
    bool symmetric = true;
    /// Replay pre-computed catch-well minima instead of following the live
    /// ion state (perturbed and time-reversed runs).
    const HermiteSeries* replay_wells = nullptr;
    /// Starting state; defaults to the symmetric equilibrium at rest of
    /// the schedule's initial curvature.
    std::optional<ClassicalState> initial;
};

/// Integrates the six classical variables together with M_op (2x2) and
/// M_ab (4x4) in one fixed-step RK4 system over [0, schedule.t_final].
/// Throws numerical_error for near-collisions or symplecticity loss.
Trajectory integrate_protocol(const CrystalConfig& config,
                              const CurvatureSchedule& schedule,
                              const IntegrationOptions& options);

/// Symmetric equilibrium positions for the schedule's initial curvature.
ClassicalState equilibrium_state(const CrystalConfig& config,
                                 const CurvatureSchedule& schedule);

/// First time |c_D2(t) - c_D2(0)| reaches the threshold, refined by linear
/// interpolation between samples. Throws solver_error when never reached.
CatchEvent detect_catch(const Trajectory& traj, double threshold);

} // namespace ggsep
