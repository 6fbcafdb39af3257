#include "ggsep/crystal.hpp"

#include <cmath>
#include <stdexcept>

namespace ggsep {

double equilibrium_half_spacing(const CrystalConfig& config, double k_D)
{
    if (!(k_D > 0.0)) {
        throw std::domain_error("equilibrium_half_spacing: k_D must be positive");
    }
    return std::cbrt(5.0 * config.coulomb_constant / (4.0 * k_D));
}

ModeGeometry mode_geometry(const CrystalConfig& config, double k_D, double k_H,
                           double c, double k_D_dot, double c_dot, double k_H_dot)
{
    if (!(c > 0.0)) {
        throw std::domain_error("mode_geometry: half spacing must be positive");
    }
    const double m_D = config.data_ion.mass;
    const double m_H = config.helper_ion.mass;
    const double ke_c3 = config.coulomb_constant / (c * c * c);

    ModeGeometry g;
    g.c = c;
    g.k_D = k_D;
    g.k_H = k_H;
    g.omega_op_sq = k_D / m_D + 2.5 * ke_c3 / m_D;
    g.omega_ip_sq = k_D / m_D + 2.0 * ke_c3 / m_D;
    g.omega_H_sq = k_H / m_H + 4.0 * ke_c3 / m_H;
    // Coefficient of the -x_H x_ip coupling in the quadratic expansion of
    // the Coulomb term, 2 sqrt(2) k_e / (sqrt(m_D m_H) c^3).
    g.omega_coupling_sq = 2.0 * std::sqrt(2.0) * ke_c3 / std::sqrt(m_D * m_H);

    const double u = 2.0 * g.omega_coupling_sq;
    const double v = g.omega_H_sq - g.omega_ip_sq;
    g.gamma = std::hypot(u, v);
    g.omega_a_sq = 0.5 * (g.omega_ip_sq + g.omega_H_sq + g.gamma);
    g.omega_b_sq = 0.5 * (g.omega_ip_sq + g.omega_H_sq - g.gamma);

    // tan(2 theta) = u / v fixes 2 theta modulo pi; the branch
    // 2 theta = atan2(-u, -v) is the one that assigns the x_a coordinate
    // the upper frequency omega_a. With u > 0 it is also continuous along
    // any continuous schedule (the atan2 cut is never crossed).
    g.theta = 0.5 * std::atan2(-u, -v);

    const double u_dot = -3.0 * u * c_dot / c;
    const double v_dot = k_H_dot / m_H - k_D_dot / m_D -
                         3.0 * (4.0 / m_H - 2.0 / m_D) * ke_c3 * c_dot / c;
    g.theta_dot = 0.5 * (u_dot * v - u * v_dot) / (u * u + v * v);
    return g;
}

Eigen::Matrix2d h_op(const ModeGeometry& g)
{
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    h(0, 0) = 1.0;
    h(1, 1) = g.omega_op_sq;
    return h;
}

Eigen::Matrix4d h_ab(const ModeGeometry& g)
{
    const double td = g.theta_dot;
    Eigen::Matrix4d h;
    h << 1.0, 0.0, 0.0, -td,
         0.0, 1.0, td, 0.0,
         0.0, td, g.omega_a_sq, 0.0,
         -td, 0.0, 0.0, g.omega_b_sq;
    return h;
}

} // namespace ggsep
