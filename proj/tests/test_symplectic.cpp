#include <doctest.h>

#include <cmath>
#include <random>

#include "ggsep/decomp.hpp"
#include "ggsep/symplectic.hpp"

using namespace ggsep;

namespace {

HamiltonianSource constant_oscillator(double w)
{
    return [w](double, Eigen::Ref<Eigen::MatrixXd> h) {
        h.setZero();
        h(0, 0) = 1.0;
        h(1, 1) = w * w;
    };
}

// Smooth single-mode test schedule with nonzero curvature sweep.
HamiltonianSource swept_oscillator()
{
    return [](double t, Eigen::Ref<Eigen::MatrixXd> h) {
        h.setZero();
        h(0, 0) = 1.0;
        const double w = 2.0 + 1.5 * std::sin(1.3 * t);
        h(1, 1) = w * w;
    };
}

} // namespace

TEST_CASE("commutation matrix definition and identity")
{
    const Eigen::MatrixXd c1 = commutation_matrix(1);
    CHECK(c1(0, 0) == 0.0);
    CHECK(c1(0, 1) == -1.0);
    CHECK(c1(1, 0) == 1.0);
    CHECK(c1(1, 1) == 0.0);

    const Eigen::MatrixXd c2 = commutation_matrix(2);
    CHECK((c2.topRightCorner(2, 2) + Eigen::Matrix2d::Identity()).norm() == 0.0);
    CHECK((c2.bottomLeftCorner(2, 2) - Eigen::Matrix2d::Identity()).norm() == 0.0);

    for (int n : {1, 2, 3, 5}) {
        const Eigen::MatrixXd c = commutation_matrix(n);
        const Eigen::MatrixXd shouldBeMinusI = c * c;
        CHECK((shouldBeMinusI + Eigen::MatrixXd::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff() ==
              0.0);
    }
}

TEST_CASE("ground state covariance")
{
    const GaussianState g1 = ground_state_covariance({1.0});
    CHECK(g1.v(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g1.v(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g1.mean.norm() == 0.0);

    const double w0 = 3.896650;
    const double w = std::sqrt(3.0) * w0;
    const GaussianState g = ground_state_covariance({w});
    CHECK(g.v(0, 0) == doctest::Approx(0.5 * w).epsilon(1e-15));
    CHECK(g.v(1, 1) == doctest::Approx(0.5 / w).epsilon(1e-15));

    const GaussianState g2 = ground_state_covariance({2.0, 0.7});
    CHECK(g2.v(0, 0) == doctest::Approx(1.0));
    CHECK(g2.v(1, 1) == doctest::Approx(0.35));
    CHECK(g2.v(2, 2) == doctest::Approx(0.25));
    CHECK(g2.v(3, 3) == doctest::Approx(1.0 / 1.4));
    CHECK(g2.v.cwiseAbs().sum() ==
          doctest::Approx(g2.v.diagonal().cwiseAbs().sum())); // diagonal

    CHECK_THROWS_AS(ground_state_covariance({-1.0}), std::domain_error);
    CHECK_THROWS_AS(ground_state_covariance({0.0}), std::domain_error);
}

TEST_CASE("constant-h evolution matches the analytic rotation over 10 periods")
{
    const double w = 2.6;
    const double period = 2.0 * M_PI / w;
    const TransferMatrix m =
        integrate_transfer(constant_oscillator(w), 1, 0.0, 10.0 * period, 1e-4);
    const Eigen::Matrix2d ref = rotation_matrix({w * 10.0 * period, w});
    CHECK((m.m - ref).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("quarter period gives the special rotation")
{
    const double w = 1.9;
    const TransferMatrix m =
        integrate_transfer(constant_oscillator(w), 1, 0.0, M_PI / (2.0 * w), 1e-5);
    Eigen::Matrix2d ref;
    ref << 0.0, -w, 1.0 / w, 0.0;
    CHECK((m.m - ref).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("integrated transfer matrices are symplectic")
{
    const TransferMatrix m = integrate_transfer(swept_oscillator(), 1, 0.0, 5.0, 1e-4);
    CHECK(symplectic_defect(m.m) < 1e-9);
    CHECK(std::abs(m.m.determinant() - 1.0) < 1e-9);
}

TEST_CASE("halving dt changes the result below 1e-8 relative")
{
    const TransferMatrix a = integrate_transfer(swept_oscillator(), 1, 0.0, 3.0, 1e-4);
    const TransferMatrix b = integrate_transfer(swept_oscillator(), 1, 0.0, 3.0, 5e-5);
    const double scale = a.m.cwiseAbs().maxCoeff();
    CHECK((a.m - b.m).cwiseAbs().maxCoeff() < 1e-8 * scale);
}

TEST_CASE("composition over subintervals matches the full integration")
{
    const TransferMatrix full = integrate_transfer(swept_oscillator(), 1, 0.0, 2.0, 1e-4);
    const TransferMatrix first = integrate_transfer(swept_oscillator(), 1, 0.0, 0.8, 1e-4);
    const TransferMatrix second = integrate_transfer(swept_oscillator(), 1, 0.8, 2.0, 1e-4);
    CHECK(((second.m * first.m) - full.m).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("time-mirrored schedule inverts the map up to the momentum flip")
{
    const double tf = 2.4;
    auto mirrored = [&](double t, Eigen::Ref<Eigen::MatrixXd> h) {
        swept_oscillator()(tf - t, h);
    };
    const TransferMatrix fwd = integrate_transfer(swept_oscillator(), 1, 0.0, tf, 1e-4);
    const TransferMatrix rev = integrate_transfer(mirrored, 1, 0.0, tf, 1e-4);
    Eigen::Matrix2d flip;
    flip << -1.0, 0.0, 0.0, 1.0;
    const Eigen::Matrix2d prod = flip * rev.m * flip * fwd.m;
    CHECK((prod - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("evolve_covariance basics")
{
    const double w = 1.4;
    const GaussianState g = ground_state_covariance({w});

    SUBCASE("identity leaves the state unchanged")
    {
        TransferMatrix eye{Eigen::Matrix2d::Identity(), 0.0, 0.0};
        const GaussianState out = evolve_covariance(eye, g);
        CHECK((out.v - g.v).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("rotation leaves the matched ground state unchanged")
    {
        TransferMatrix rot{rotation_matrix({0.83, w}), 0.0, 0.0};
        const GaussianState out = evolve_covariance(rot, g);
        CHECK((out.v - g.v).cwiseAbs().maxCoeff() < 1e-14);
    }

    SUBCASE("squeezer produces the expected covariance")
    {
        const double r = 0.6;
        const Eigen::Matrix2d s = squeezer_matrix({r, 0.0, w});
        // Independent oracle: direct matrix product.
        const Eigen::Matrix2d expected = s * g.v * s.transpose();
        CHECK(expected(0, 0) == doctest::Approx(0.5 * w * std::exp(-2.0 * r)).epsilon(1e-12));
        CHECK(expected(1, 1) == doctest::Approx(0.5 / w * std::exp(2.0 * r)).epsilon(1e-12));
        const GaussianState out = evolve_covariance(TransferMatrix{s, 0.0, 0.0}, g);
        CHECK((out.v - expected).cwiseAbs().maxCoeff() < 1e-14);
    }

    SUBCASE("dimension mismatch throws")
    {
        TransferMatrix m4{Eigen::Matrix4d::Identity(), 0.0, 0.0};
        CHECK_THROWS_AS(evolve_covariance(m4, g), std::invalid_argument);
    }
}

TEST_CASE("evolution preserves positivity and physicality")
{
    const GaussianState g = ground_state_covariance({1.0, 2.5});
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        // Random symplectic built from primitives.
        const Eigen::Matrix4d m =
            TwoPortInterferometer{{u(rng), u(rng), 1.0, 2.5}, u(rng), u(rng)}.matrix() *
            DoubleCompensation{{std::abs(u(rng)), u(rng), 1.0},
                               {std::abs(u(rng)), u(rng), 2.5},
                               {0.0, 0.0, 1.0, 2.5}}
                .matrix();
        const GaussianState out = evolve_covariance(TransferMatrix{m, 0.0, 0.0}, g);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.v);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
        CHECK(physicality_defect(out) > -1e-10);
    }
}

TEST_CASE("occupation number")
{
    const double w = 2.2;
    const GaussianState g = ground_state_covariance({w});

    SUBCASE("ground state at its own frequency")
    {
        CHECK(std::abs(occupation_number(g, 0, w)) < 1e-14);
    }

    SUBCASE("squeezed vacuum has sinh^2 r")
    {
        const double r = 0.8;
        for (double phi : {0.0, 1.1, -2.4}) {
            const Eigen::Matrix2d s = squeezer_matrix({r, phi, w});
            const GaussianState out = evolve_covariance(TransferMatrix{s, 0.0, 0.0}, g);
            CHECK(occupation_number(out, 0, w) ==
                  doctest::Approx(std::sinh(r) * std::sinh(r)).epsilon(1e-12));
        }
    }

    SUBCASE("frequency mismatch")
    {
        const double wp = 3.1;
        const double expected = (w / wp + wp / w) / 4.0 - 0.5;
        CHECK(occupation_number(g, 0, wp) == doctest::Approx(expected).epsilon(1e-12));
    }

    SUBCASE("mean displacement contributes coherent quanta")
    {
        GaussianState d = g;
        d.mean << 0.3, -0.2;
        const double coherent =
            (0.3 * 0.3 + w * w * 0.2 * 0.2) / (2.0 * w);
        CHECK(occupation_number(d, 0, w) == doctest::Approx(coherent).epsilon(1e-12));
    }
}

TEST_CASE("constant-h evolution of its own ground state stays unoccupied")
{
    const double w = 1.7;
    const GaussianState g = ground_state_covariance({w});
    for (double t : {0.3, 0.9, 2.2, 6.5}) {
        const TransferMatrix m = integrate_transfer(constant_oscillator(w), 1, 0.0, t, 1e-4);
        const GaussianState out = evolve_covariance(m, g);
        CHECK(std::abs(occupation_number(out, 0, w)) < 1e-10);
    }
}

TEST_CASE("quadratic form validation")
{
    QuadraticForm q;
    q.h = Eigen::Matrix2d::Identity();
    CHECK_NOTHROW(q.validate());
    q.h(0, 1) = 1e-6;
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
    q.h = Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}

TEST_CASE("symplecticity failure raises a numerical error")
{
    // A wildly stiff Hamiltonian at a huge step destroys symplecticity.
    auto stiff = [](double, Eigen::Ref<Eigen::MatrixXd> h) {
        h.setZero();
        h(0, 0) = 1.0;
        h(1, 1) = 1e8;
    };
    CHECK_THROWS_AS(integrate_transfer(stiff, 1, 0.0, 10.0, 0.5), numerical_error);
}
