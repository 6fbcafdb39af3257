#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "ggsep/symplectic.hpp"

// Squeezer / rotation / beam-splitter primitives, Bloch-Messiah
// decompositions and the ground-state pre-compensation solvers.
namespace ggsep {

/// Single-mode squeeze. r >= 0 and phi in (-pi, pi] after normalization.
struct SqueezeParams {
    double r = 0.0;
    double phi = 0.0;
    double omega_ref = 1.0;
};

struct RotationParams {
    double theta = 0.0;
    double omega_ref = 1.0;
};

/// Two-mode beam splitter acting on modes at (omega_a, omega_b).
struct BeamSplitterParams {
    double theta_bs = 0.0;
    double phi_bs = 0.0;
    double omega_a = 1.0;
    double omega_b = 1.0;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Maps negative r onto (|r|, phi+pi) and wraps phi.
SqueezeParams normalize_squeeze(SqueezeParams p);

/// 2x2 squeeze matrix acting on (p, x):
///   [cosh r - sinh r cos phi,  w sinh r sin phi ]
///   [sinh r sin phi / w,       cosh r + sinh r cos phi]
Eigen::Matrix2d squeezer_matrix(const SqueezeParams& p);

/// 2x2 rotation matrix [[cos t, -w sin t], [sin t / w, cos t]].
Eigen::Matrix2d rotation_matrix(const RotationParams& p);

/// 4x4 beam-splitter matrix on (p_a, p_b, x_a, x_b).
Eigen::Matrix4d beamsplitter_matrix(const BeamSplitterParams& p);

/// Passive two-mode operation: beam splitter followed by per-mode rotations,
/// B_BS(theta_bs, phi_bs) * [R(theta_a) (+) R(theta_b)].
struct TwoPortInterferometer {
    BeamSplitterParams bs;
    double theta_a = 0.0;
    double theta_b = 0.0;

    Eigen::Matrix4d matrix() const;
};

/// M = R(theta2) S(r, phi) R(theta1) for a 2x2 symplectic matrix.
struct SingleModeEuler {
    double theta2 = 0.0;
    SqueezeParams squeeze;
    double theta1 = 0.0;

    Eigen::Matrix2d reconstruct() const;
};

/// Euler/Bloch-Messiah factors of a single-mode symplectic matrix at a
/// reference frequency. Canonical split theta1 = theta2. Throws
/// std::invalid_argument if the input is not symplectic within 1e-8.
SingleModeEuler bloch_messiah_2(const Eigen::Matrix2d& m, double omega_ref);

/// M = post * [S(r_1,0) (+) S(r_2,0)] * pre with r_1 >= r_2 >= 0.
struct BlochMessiahFactors {
    TwoPortInterferometer post;
    std::vector<SqueezeParams> squeezes;
    TwoPortInterferometer pre;

    Eigen::Matrix4d reconstruct() const;
};

/// Bloch-Messiah decomposition of a two-mode symplectic matrix with both
/// sides referenced to (omega_a, omega_b). Squeeze phases are absorbed
/// into the interferometers; r sorted descending.
BlochMessiahFactors bloch_messiah_4(const Eigen::Matrix4d& m,
                                    double omega_a, double omega_b);

/// Squeeze S(r_p, phi_p) at omega_i such that applying it to the ground
/// state at omega_i and then evolving through m_f lands on the ground
/// state at omega_f. Closed form from the covariance match
/// V_p = m_f^-1 V_f m_f^-T. Throws solver_error if no quadrant works.
SqueezeParams precompensation_single(const TransferMatrix& m_f,
                                     double omega_i, double omega_f);

/// Pre-compensation for a coupled mode pair: squeeze both modes, then mix,
/// M_p = B_BS(theta_bs, phi_bs) * [S_a (+) S_b].
struct DoubleCompensation {
    SqueezeParams squeeze_a;
    SqueezeParams squeeze_b;
    BeamSplitterParams bs;
    double residual = 0.0; ///< total final occupation achieved

    Eigen::Matrix4d matrix() const;
};

/// Solves M_f * M_p : ground(omegas_i) -> ground(omegas_f). Seeded from a
/// Bloch-Messiah construction and refined by Levenberg-Marquardt on the 10
/// independent covariance entries, with deterministic random restarts as a
/// fallback. Throws solver_error if the residual stays above 1e-4.
DoubleCompensation precompensation_double(const TransferMatrix& m_f,
                                          std::pair<double, double> omegas_i,
                                          std::pair<double, double> omegas_f);

} // namespace ggsep
