#include <doctest.h>

#include <cmath>
#include <random>

#include "ggsep/crystal.hpp"

using namespace ggsep;

namespace {

// Full potential energy of the three-ion crystal at lab-frame positions,
// the independent oracle for curvatures and couplings.
double potential_energy(const CrystalConfig& cfg, double k_D, double k_H,
                        double x1, double xh, double x2)
{
    const double ke = cfg.coulomb_constant;
    return 0.5 * k_D * (x1 * x1 + x2 * x2) + 0.5 * k_H * xh * xh +
           ke / (xh - x1) + ke / (x2 - x1) + ke / (x2 - xh);
}

// Second derivative of the potential along a mass-weighted direction
// (d1, dh, d2), evaluated at the symmetric configuration (-c, 0, c).
double direction_curvature(const CrystalConfig& cfg, double k_D, double k_H,
                           double c, double d1, double dh, double d2)
{
    const double sm_D = std::sqrt(cfg.data_ion.mass);
    const double sm_H = std::sqrt(cfg.helper_ion.mass);
    auto v = [&](double s) {
        return potential_energy(cfg, k_D, k_H, -c + s * d1 / sm_D, s * dh / sm_H,
                                c + s * d2 / sm_D);
    };
    const double h = 1e-4;
    return (v(h) - 2.0 * v(0.0) + v(-h)) / (h * h);
}

} // namespace

TEST_CASE("equilibrium half spacing")
{
    const CrystalConfig cfg;

    SUBCASE("closed form satisfies the force balance")
    {
        const double k = 100.0;
        const double c = equilibrium_half_spacing(cfg, k);
        CHECK(cfg.coulomb_constant / (c * c * c) ==
              doctest::Approx(0.8 * k).epsilon(1e-12));
        // Residual force on the right ion.
        const double f = k * c - 1.25 * cfg.coulomb_constant / (c * c);
        CHECK(std::abs(f) < 1e-10 * k * c);
    }

    SUBCASE("reference crystal sits near 10.83 um")
    {
        const double c = equilibrium_half_spacing(cfg, cfg.k0());
        CHECK(c == doctest::Approx(10.83).epsilon(2e-3));

        // Independent bisection on the force balance.
        double lo = 1.0, hi = 100.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            const double f = cfg.k0() * mid - 1.25 * cfg.coulomb_constant / (mid * mid);
            (f > 0.0 ? hi : lo) = mid;
        }
        CHECK(c == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-10));
    }

    SUBCASE("doubling the curvature scales by 2^(-1/3)")
    {
        const double c1 = equilibrium_half_spacing(cfg, 50.0);
        const double c2 = equilibrium_half_spacing(cfg, 100.0);
        CHECK(c2 == doctest::Approx(c1 * std::pow(2.0, -1.0 / 3.0)).epsilon(1e-14));
    }

    CHECK_THROWS_AS(equilibrium_half_spacing(cfg, -1.0), std::domain_error);
}

TEST_CASE("mode frequencies at the symmetric equilibrium")
{
    const CrystalConfig cfg;
    const double w0 = cfg.omega0();
    const double k0 = cfg.k0();
    const double c = equilibrium_half_spacing(cfg, k0);
    const ModeGeometry g = mode_geometry(cfg, k0, k0, c, 0.0, 0.0, 0.0);

    CHECK(g.omega_op() == doctest::Approx(std::sqrt(3.0) * w0).epsilon(1e-9));
    CHECK(g.omega_ip_sq == doctest::Approx(2.6 * w0 * w0).epsilon(1e-12));
    CHECK(g.omega_H_sq ==
          doctest::Approx(4.2 * cfg.mass_ratio() * w0 * w0).epsilon(1e-12));

    SUBCASE("alpha and beta factors against independent diagonalization")
    {
        Eigen::Matrix2d block;
        block << g.omega_ip_sq, -g.omega_coupling_sq,
                 -g.omega_coupling_sq, g.omega_H_sq;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(block);
        CHECK(g.omega_a_sq == doctest::Approx(es.eigenvalues()(1)).epsilon(1e-12));
        CHECK(g.omega_b_sq == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-12));

        const double alpha_a = g.omega_a() / w0;
        const double alpha_b = g.omega_b() / w0;
        const double beta_b = std::sqrt(cfg.mass_ratio());
        CHECK(alpha_a == doctest::Approx(1.876).epsilon(1e-3));
        CHECK(alpha_b == doctest::Approx(0.771).epsilon(1e-3));
        CHECK(beta_b == doctest::Approx(0.6005).epsilon(1e-3));

        // Closed forms in the mass ratio.
        const double mu = cfg.mass_ratio();
        const double root = std::sqrt(512.0 * mu + (13.0 - 21.0 * mu) * (13.0 - 21.0 * mu));
        CHECK(alpha_a ==
              doctest::Approx(std::sqrt((13.0 + 21.0 * mu + root) / 10.0)).epsilon(1e-12));
        CHECK(alpha_b ==
              doctest::Approx(std::sqrt((13.0 + 21.0 * mu - root) / 10.0)).epsilon(1e-12));
    }

    SUBCASE("static schedule means no basis rotation rate")
    {
        CHECK(g.theta_dot == 0.0);
    }

    SUBCASE("theta assigns the upper branch to the a coordinate")
    {
        // Rotating (x_ip, x_H) by theta must diagonalize the coupled block
        // with the x_a coefficient equal to omega_a^2.
        const double ct = std::cos(g.theta), st = std::sin(g.theta);
        const double waa = g.omega_ip_sq * ct * ct + g.omega_H_sq * st * st -
                           2.0 * g.omega_coupling_sq * st * ct;
        const double wbb = g.omega_ip_sq * st * st + g.omega_H_sq * ct * ct +
                           2.0 * g.omega_coupling_sq * st * ct;
        CHECK(waa == doctest::Approx(g.omega_a_sq).epsilon(1e-12));
        CHECK(wbb == doctest::Approx(g.omega_b_sq).epsilon(1e-12));
    }
}

TEST_CASE("mass-weighted Hessian of the full potential matches the mode frequencies")
{
    const CrystalConfig cfg;
    const double k0 = cfg.k0();
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    const double rt2 = std::sqrt(2.0);
    for (int i = 0; i < 10; ++i) {
        const double k_D = k0 * u(rng);
        const double k_H = k0 * u(rng);
        const double c = 8.0 * u(rng);
        const ModeGeometry g = mode_geometry(cfg, k_D, k_H, c, 0.0, 0.0, 0.0);

        // op direction (mass-weighted): (-1, 0, 1)/sqrt(2)
        const double w_op = direction_curvature(cfg, k_D, k_H, c, -1 / rt2, 0, 1 / rt2);
        CHECK(w_op == doctest::Approx(g.omega_op_sq).epsilon(1e-6));
        // ip direction: (1, 0, 1)/sqrt(2)
        const double w_ip = direction_curvature(cfg, k_D, k_H, c, 1 / rt2, 0, 1 / rt2);
        CHECK(w_ip == doctest::Approx(g.omega_ip_sq).epsilon(1e-6));
        // H direction: (0, 1, 0)
        const double w_h = direction_curvature(cfg, k_D, k_H, c, 0, 1, 0);
        CHECK(w_h == doctest::Approx(g.omega_H_sq).epsilon(1e-6));
        // Cross curvature along (ip + H)/sqrt(2) reveals the coupling:
        //   V'' = (w_ip^2 + w_H^2)/2 - Omega^2.
        const double w_mix =
            direction_curvature(cfg, k_D, k_H, c, 0.5, 1 / rt2, 0.5);
        const double coupling = 0.5 * (g.omega_ip_sq + g.omega_H_sq) - w_mix;
        CHECK(coupling == doctest::Approx(g.omega_coupling_sq).epsilon(1e-5));
    }
}

TEST_CASE("quadratic form builders")
{
    const CrystalConfig cfg;
    const double c = equilibrium_half_spacing(cfg, cfg.k0());
    const ModeGeometry g = mode_geometry(cfg, cfg.k0(), cfg.k0(), c, 5.0, -2.0, 3.0);

    const Eigen::Matrix2d hop = h_op(g);
    CHECK(hop(0, 0) == 1.0);
    CHECK(hop(1, 1) == doctest::Approx(3.0 * cfg.omega0() * cfg.omega0()).epsilon(1e-9));
    CHECK(hop(0, 1) == 0.0);

    const Eigen::Matrix4d hab = h_ab(g);
    CHECK((hab - hab.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(hab(0, 3) == doctest::Approx(-g.theta_dot));
    CHECK(hab(1, 2) == doctest::Approx(g.theta_dot));
    CHECK(hab(2, 2) == doctest::Approx(g.omega_a_sq));
    CHECK(hab(3, 3) == doctest::Approx(g.omega_b_sq));

    SUBCASE("free flight limit")
    {
        const ModeGeometry far = mode_geometry(cfg, 0.0, 0.0, 1e5, 0.0, 0.0, 0.0);
        CHECK(h_op(far)(1, 1) < 1e-9);
    }

    SUBCASE("static geometry decouples the pair")
    {
        const ModeGeometry st = mode_geometry(cfg, cfg.k0(), cfg.k0(), c, 0.0, 0.0, 0.0);
        const Eigen::Matrix4d h = h_ab(st);
        CHECK(h(0, 3) == 0.0);
        CHECK(h(1, 2) == 0.0);
    }
}

TEST_CASE("coupled-block eigenvalue invariant for random geometries")
{
    const CrystalConfig cfg;
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int i = 0; i < 100; ++i) {
        const ModeGeometry g = mode_geometry(cfg, 150.0 * u(rng), 150.0 * u(rng),
                                             10.0 * u(rng), 0.0, 0.0, 0.0);
        Eigen::Matrix2d block;
        block << g.omega_ip_sq, -g.omega_coupling_sq,
                 -g.omega_coupling_sq, g.omega_H_sq;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(block);
        const double scale = std::abs(g.omega_a_sq);
        CHECK(std::abs(es.eigenvalues()(1) - g.omega_a_sq) < 1e-10 * scale);
        CHECK(std::abs(es.eigenvalues()(0) - g.omega_b_sq) < 1e-10 * scale);
        CHECK(g.omega_a_sq >= g.omega_b_sq);
        // op always sits above ip by the Coulomb term.
        CHECK(g.omega_op_sq - g.omega_ip_sq ==
              doctest::Approx(0.5 * cfg.coulomb_constant /
                              (cfg.data_ion.mass * std::pow(g.c, 3)))
                  .epsilon(1e-10));
    }
}

TEST_CASE("theta is continuous and theta_dot matches finite differences")
{
    const CrystalConfig cfg;
    const double k0 = cfg.k0();
    // A smooth synthetic schedule: k(t) swings, c(t) expands.
    auto k_of = [&](double t) { return k0 * (0.2 + std::pow(std::sin(0.9 * t + 0.3), 2)); };
    auto kdot_of = [&](double t) {
        return k0 * 2.0 * std::sin(0.9 * t + 0.3) * std::cos(0.9 * t + 0.3) * 0.9;
    };
    auto c_of = [&](double t) { return 10.0 + 8.0 * t + 0.5 * t * t; };
    auto cdot_of = [&](double t) { return 8.0 + t; };

    double prev_theta = 0.0;
    bool first = true;
    for (double t = 0.0; t < 3.0; t += 0.01) {
        const ModeGeometry g =
            mode_geometry(cfg, k_of(t), k_of(t), c_of(t), kdot_of(t), cdot_of(t), kdot_of(t));
        if (!first) {
            CHECK(std::abs(g.theta - prev_theta) < 0.1); // no branch jumps
        }
        prev_theta = g.theta;
        first = false;

        const double dt = 1e-5;
        const ModeGeometry gp = mode_geometry(cfg, k_of(t + dt), k_of(t + dt), c_of(t + dt),
                                              kdot_of(t + dt), cdot_of(t + dt), kdot_of(t + dt));
        const ModeGeometry gm = mode_geometry(cfg, k_of(t - dt), k_of(t - dt), c_of(t - dt),
                                              kdot_of(t - dt), cdot_of(t - dt), kdot_of(t - dt));
        const double fd = (gp.theta - gm.theta) / (2.0 * dt);
        CHECK(std::abs(g.theta_dot - fd) < 1e-6);
    }
}

TEST_CASE("invalid geometry inputs")
{
    const CrystalConfig cfg;
    CHECK_THROWS_AS(mode_geometry(cfg, 1.0, 1.0, -2.0, 0, 0, 0), std::domain_error);
    CHECK_THROWS_AS(mode_geometry(cfg, 1.0, 1.0, 0.0, 0, 0, 0), std::domain_error);
}
