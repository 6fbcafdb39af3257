#include <doctest.h>

#include <cmath>
#include <random>

#include "ggsep/decomp.hpp"

using namespace ggsep;

namespace {

// Random symplectic matrices as products of random primitives.
Eigen::Matrix2d random_symplectic_2(std::mt19937& rng, double w)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
    for (int i = 0; i < 3; ++i) {
        m = m * rotation_matrix({M_PI * u(rng), w});
        m = m * squeezer_matrix({1.2 * std::abs(u(rng)), M_PI * u(rng), w});
    }
    return m;
}

Eigen::Matrix4d random_symplectic_4(std::mt19937& rng, double wa, double wb)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto sq_pair = [&](double ra, double pa, double rb, double pb) {
        return DoubleCompensation{{ra, pa, wa}, {rb, pb, wb}, {0.0, 0.0, wa, wb}}.matrix();
    };
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    for (int i = 0; i < 2; ++i) {
        m = m * TwoPortInterferometer{{M_PI * u(rng), M_PI * u(rng), wa, wb},
                                      M_PI * u(rng), M_PI * u(rng)}
                    .matrix();
        m = m * sq_pair(std::abs(u(rng)), M_PI * u(rng), std::abs(u(rng)), M_PI * u(rng));
    }
    return m;
}

} // namespace

TEST_CASE("squeezer matrix special values")
{
    CHECK((squeezer_matrix({0.0, 0.7, 2.0}) - Eigen::Matrix2d::Identity())
              .cwiseAbs()
              .maxCoeff() == 0.0);

    const double r = 0.9;
    const Eigen::Matrix2d s = squeezer_matrix({r, 0.0, 3.0});
    CHECK(s(0, 0) == doctest::Approx(std::exp(-r)).epsilon(1e-14));
    CHECK(s(1, 1) == doctest::Approx(std::exp(r)).epsilon(1e-14));
    CHECK(s(0, 1) == 0.0);
    CHECK(s(1, 0) == 0.0);

    for (double phi : {0.0, 0.4, -2.9}) {
        const Eigen::Matrix2d m = squeezer_matrix({1.3, phi, 2.2});
        CHECK(std::abs(m.determinant() - 1.0) < 1e-12);
    }
}

TEST_CASE("rotation matrix special values and group property")
{
    CHECK((rotation_matrix({0.0, 1.0}) - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() ==
          0.0);

    const double w = 1.8;
    const Eigen::Matrix2d quarter = rotation_matrix({M_PI / 2.0, w});
    CHECK(quarter(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(quarter(0, 1) == doctest::Approx(-w));
    CHECK(quarter(1, 0) == doctest::Approx(1.0 / w));

    const Eigen::Matrix2d combined =
        rotation_matrix({0.6, w}) * rotation_matrix({-1.4, w});
    CHECK((combined - rotation_matrix({-0.8, w})).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("beam splitter matrix")
{
    CHECK((beamsplitter_matrix({0.0, 1.2, 2.0, 0.7}) - Eigen::Matrix4d::Identity())
              .cwiseAbs()
              .maxCoeff() == 0.0);

    SUBCASE("half angle with equal frequencies swaps the modes up to signs")
    {
        const Eigen::Matrix4d m = beamsplitter_matrix({M_PI / 2.0, 0.0, 1.5, 1.5});
        Eigen::Matrix4d expected;
        expected << 0, 1, 0, 0,
                   -1, 0, 0, 0,
                    0, 0, 0, 1,
                    0, 0, -1, 0;
        CHECK((m - expected).cwiseAbs().maxCoeff() < 1e-14);
    }

    SUBCASE("symplectic for random parameters")
    {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        for (int i = 0; i < 50; ++i) {
            const Eigen::Matrix4d m =
                beamsplitter_matrix({u(rng), u(rng), 0.5 + std::abs(u(rng)),
                                     0.5 + std::abs(u(rng))});
            CHECK(symplectic_defect(m) < 1e-12);
            CHECK(std::abs(m.determinant() - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("single-mode Euler decomposition")
{
    const double w = 2.4;

    SUBCASE("identity")
    {
        const SingleModeEuler eu = bloch_messiah_2(Eigen::Matrix2d::Identity(), w);
        CHECK(eu.squeeze.r == doctest::Approx(0.0));
        CHECK(eu.theta1 == doctest::Approx(0.0));
        CHECK(eu.theta2 == doctest::Approx(0.0));
    }

    SUBCASE("pure squeezer round trip")
    {
        const SqueezeParams p{0.8, 1.2, w};
        const SingleModeEuler eu = bloch_messiah_2(squeezer_matrix(p), w);
        CHECK(eu.squeeze.r == doctest::Approx(p.r).epsilon(1e-12));
        CHECK(eu.squeeze.phi == doctest::Approx(p.phi).epsilon(1e-12));
        CHECK(std::abs(eu.theta1) < 1e-12);
        CHECK(std::abs(eu.theta2) < 1e-12);
    }

    SUBCASE("random round trips")
    {
        std::mt19937 rng(11);
        for (int i = 0; i < 1000; ++i) {
            const Eigen::Matrix2d m = random_symplectic_2(rng, w);
            const SingleModeEuler eu = bloch_messiah_2(m, w);
            CHECK(eu.squeeze.r >= 0.0);
            CHECK(eu.squeeze.phi <= M_PI);
            CHECK(eu.squeeze.phi > -M_PI);
            CHECK((eu.reconstruct() - m).cwiseAbs().maxCoeff() < 1e-9);
        }
    }

    SUBCASE("non-symplectic input is rejected")
    {
        Eigen::Matrix2d bad;
        bad << 2.0, 0.0, 0.0, 2.0;
        CHECK_THROWS_AS(bloch_messiah_2(bad, w), std::invalid_argument);
    }
}

TEST_CASE("two-mode Bloch-Messiah decomposition")
{
    const double wa = 2.0, wb = 0.8;

    SUBCASE("identity")
    {
        const BlochMessiahFactors f = bloch_messiah_4(Eigen::Matrix4d::Identity(), wa, wb);
        CHECK(f.squeezes[0].r == doctest::Approx(0.0));
        CHECK(f.squeezes[1].r == doctest::Approx(0.0));
        CHECK((f.reconstruct() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-10);
    }

    SUBCASE("direct sum of squeezers")
    {
        const Eigen::Matrix4d m =
            DoubleCompensation{{0.7, 0.0, wa}, {0.3, 0.0, wb}, {0.0, 0.0, wa, wb}}.matrix();
        const BlochMessiahFactors f = bloch_messiah_4(m, wa, wb);
        CHECK(f.squeezes[0].r == doctest::Approx(0.7).epsilon(1e-10));
        CHECK(f.squeezes[1].r == doctest::Approx(0.3).epsilon(1e-10));
        CHECK((f.reconstruct() - m).cwiseAbs().maxCoeff() < 1e-9);
    }

    SUBCASE("random round trips")
    {
        std::mt19937 rng(17);
        for (int i = 0; i < 1000; ++i) {
            const Eigen::Matrix4d m = random_symplectic_4(rng, wa, wb);
            const BlochMessiahFactors f = bloch_messiah_4(m, wa, wb);
            CHECK(f.squeezes[0].r >= f.squeezes[1].r); // canonical order
            CHECK(f.squeezes[1].r >= 0.0);
            const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
            CHECK((f.reconstruct() - m).cwiseAbs().maxCoeff() < 1e-9 * scale);
        }
    }
}

TEST_CASE("single-mode pre-compensation")
{
    const double wi = 6.75, wf = 3.9;

    SUBCASE("pure rescaling needs no squeeze")
    {
        Eigen::Matrix2d q = Eigen::Matrix2d::Zero();
        q(0, 0) = std::sqrt(wf / wi);
        q(1, 1) = std::sqrt(wi / wf);
        const SqueezeParams p = precompensation_single({q, 0.0, 0.0}, wi, wf);
        CHECK(p.r == doctest::Approx(0.0).epsilon(1e-10));
    }

    SUBCASE("self-consistency on random maps")
    {
        std::mt19937 rng(23);
        for (int i = 0; i < 200; ++i) {
            const Eigen::Matrix2d m = random_symplectic_2(rng, wi);
            const SqueezeParams p = precompensation_single({m, 0.0, 0.0}, wi, wf);
            const Eigen::Matrix2d total = m * squeezer_matrix(p);
            const GaussianState g = ground_state_covariance({wi});
            const GaussianState fin =
                evolve_covariance(TransferMatrix{total, 0.0, 0.0}, g);
            CHECK(occupation_number(fin, 0, wf) < 1e-8);
        }
    }
}

TEST_CASE("two-mode pre-compensation")
{
    const double wa_i = 7.3, wb_i = 3.0;
    const double wa_f = 3.9, wb_f = 2.34;

    SUBCASE("pure rescaling map needs nothing")
    {
        Eigen::Matrix4d q = Eigen::Matrix4d::Zero();
        q(0, 0) = std::sqrt(wa_f / wa_i);
        q(1, 1) = std::sqrt(wb_f / wb_i);
        q(2, 2) = std::sqrt(wa_i / wa_f);
        q(3, 3) = std::sqrt(wb_i / wb_f);
        const DoubleCompensation c =
            precompensation_double({q, 0.0, 0.0}, {wa_i, wb_i}, {wa_f, wb_f});
        CHECK(c.squeeze_a.r == doctest::Approx(0.0).epsilon(1e-8));
        CHECK(c.squeeze_b.r == doctest::Approx(0.0).epsilon(1e-8));
        CHECK(std::abs(std::sin(c.bs.theta_bs)) < 1e-8);
    }

    SUBCASE("self-consistency on random maps")
    {
        std::mt19937 rng(29);
        for (int i = 0; i < 40; ++i) {
            const Eigen::Matrix4d m = random_symplectic_4(rng, wa_i, wb_i);
            const DoubleCompensation c =
                precompensation_double({m, 0.0, 0.0}, {wa_i, wb_i}, {wa_f, wb_f});
            CHECK(c.residual < 1e-6);
            CHECK(c.squeeze_a.r >= 0.0);
            CHECK(c.squeeze_b.r >= 0.0);
            // Canonical beam-splitter domain.
            CHECK(c.bs.theta_bs >= 0.0);
            CHECK(c.bs.theta_bs < M_PI + 1e-12);
            CHECK(std::cos(c.bs.phi_bs) >= -1e-12);

            const Eigen::Matrix4d total = m * c.matrix();
            const GaussianState g = ground_state_covariance({wa_i, wb_i});
            const GaussianState fin =
                evolve_covariance(TransferMatrix{total, 0.0, 0.0}, g);
            CHECK(occupation_number(fin, 0, wa_f) + occupation_number(fin, 1, wb_f) < 1e-6);
        }
    }
}

TEST_CASE("squeeze normalization")
{
    const SqueezeParams p = normalize_squeeze({-0.5, 0.3, 1.0});
    CHECK(p.r == doctest::Approx(0.5));
    CHECK(p.phi == doctest::Approx(0.3 + M_PI));
    // The two parameter sets describe the same matrix.
    CHECK((squeezer_matrix(p) - squeezer_matrix({-0.5, 0.3, 1.0})).cwiseAbs().maxCoeff() <
          1e-14);

    const SqueezeParams q = normalize_squeeze({1.0, 7.0, 1.0});
    CHECK(q.phi <= M_PI);
    CHECK(q.phi > -M_PI);
}
