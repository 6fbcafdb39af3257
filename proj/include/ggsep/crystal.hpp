#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "ggsep/constants.hpp"

// Physics of the linear data-helper-data crystal: equilibrium geometry,
// axial normal-mode frequencies, the rotating (a, b) basis and the
// time-dependent quadratic forms driving the quantum evolution.
namespace ggsep {

struct IonSpecies {
    double mass = 1.0; // amu
    int charge = 1;    // elementary charges
};

struct CrystalConfig {
    IonSpecies data_ion{constants::mass_be9, 1};
    IonSpecies helper_ion{constants::mass_mg25, 1};
    double omega_ip_initial = 2.0 * std::numbers::pi; // rad/us (1 MHz)
    double coulomb_constant = constants::coulomb_constant;
    double hbar = constants::hbar;

    /// Initial single-D well frequency; at the symmetric equilibrium the
    /// in-phase mode satisfies omega_ip^2 = (13/5) omega_0^2.
    double omega0() const { return omega_ip_initial * std::sqrt(5.0 / 13.0); }
    /// Initial well curvature k_0 = m_D omega_0^2 (amu/us^2).
    double k0() const { return data_ion.mass * omega0() * omega0(); }
    double mass_ratio() const { return data_ion.mass / helper_ion.mass; }
};

/// Instantaneous mode data for given curvatures and D-ion half spacing.
/// Squared frequencies are the primitive quantities; they may go negative
/// during transient anti-confinement.
struct ModeGeometry {
    double c = 0.0;   // um
    double k_D = 0.0; // amu/us^2
    double k_H = 0.0;

    double omega_op_sq = 0.0; // rad^2/us^2
    double omega_ip_sq = 0.0;
    double omega_H_sq = 0.0;
    double omega_coupling_sq = 0.0; // Omega^2_Hip, rad^2/us^2

    double omega_a_sq = 0.0;
    double omega_b_sq = 0.0;
    double gamma = 0.0; // rad^2/us^2, omega_a_sq - omega_b_sq

    double theta = 0.0;     // rad
    double theta_dot = 0.0; // rad/us

    double omega_op() const { return signed_sqrt(omega_op_sq); }
    double omega_ip() const { return signed_sqrt(omega_ip_sq); }
    double omega_H() const { return signed_sqrt(omega_H_sq); }
    double omega_a() const { return signed_sqrt(omega_a_sq); }
    double omega_b() const { return signed_sqrt(omega_b_sq); }

    static double signed_sqrt(double x)
    {
        return x >= 0.0 ? std::sqrt(x) : -std::sqrt(-x);
    }
};

/// Half spacing c of the symmetric DHD equilibrium, the root of
/// k_D c = k_e (1/c^2 + 1/(4c^2)), i.e. c = (5 k_e / (4 k_D))^(1/3).
double equilibrium_half_spacing(const CrystalConfig& config, double k_D);

/// All mode data at one instant. k_D_dot, c_dot and k_H_dot feed the
/// analytic theta_dot. Throws std::domain_error for c <= 0.
ModeGeometry mode_geometry(const CrystalConfig& config, double k_D, double k_H,
                           double c, double k_D_dot, double c_dot, double k_H_dot);

/// h for the decoupled out-of-phase mode: diag(1, omega_op^2).
Eigen::Matrix2d h_op(const ModeGeometry& g);

/// h for the coupled (a, b) pair on (p_a, p_b, x_a, x_b):
///   [[1, 0, 0, -td], [0, 1, td, 0], [0, td, wa^2, 0], [-td, 0, 0, wb^2]].
Eigen::Matrix4d h_ab(const ModeGeometry& g);

} // namespace ggsep
