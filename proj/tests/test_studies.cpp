#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ggsep/studies.hpp"

using namespace ggsep;

TEST_CASE("nelder-mead on a quadratic bowl")
{
    auto bowl = [](const Eigen::VectorXd& x) {
        return (x.array() - 1.0).square().sum();
    };
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(4);
    NelderMeadOptions opt;
    opt.max_evaluations = 2000;
    opt.tolerance = 1e-14;
    const NelderMeadResult r = nelder_mead(bowl, x0, opt);
    CHECK(r.converged);
    CHECK((r.x.array() - 1.0).abs().maxCoeff() < 1e-6);
}

TEST_CASE("nelder-mead on the 2-d Rosenbrock function")
{
    auto rosenbrock = [](const Eigen::VectorXd& x) {
        const double a = 1.0 - x(0);
        const double b = x(1) - x(0) * x(0);
        return a * a + 100.0 * b * b;
    };
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    NelderMeadOptions opt;
    opt.max_evaluations = 4000;
    opt.tolerance = 1e-16;
    opt.initial_step = 0.5;
    const NelderMeadResult r = nelder_mead(rosenbrock, x0, opt);
    CHECK(std::abs(r.x(0) - 1.0) < 1e-4);
    CHECK(std::abs(r.x(1) - 1.0) < 1e-4);

    // Independent fine grid search near the reported optimum confirms it.
    double best = r.value;
    for (double dx = -2e-4; dx <= 2e-4; dx += 5e-5) {
        for (double dy = -2e-4; dy <= 2e-4; dy += 5e-5) {
            Eigen::VectorXd p(2);
            p << r.x(0) + dx, r.x(1) + dy;
            best = std::min(best, rosenbrock(p));
        }
    }
    CHECK(r.value <= best + 1e-10);
}

TEST_CASE("nelder-mead never returns worse than the start")
{
    auto noisy = [](const Eigen::VectorXd& x) {
        return std::cos(7.0 * x(0)) + 0.3 * x(0) * x(0);
    };
    Eigen::VectorXd x0(1);
    x0 << 0.4;
    NelderMeadOptions opt;
    opt.max_evaluations = 60;
    const NelderMeadResult r = nelder_mead(noisy, x0, opt);
    CHECK(r.value <= noisy(x0) + 1e-15);
}

TEST_CASE("nelder-mead rejects a non-finite start")
{
    auto bad = [](const Eigen::VectorXd&) { return std::nan(""); };
    CHECK_THROWS_AS(nelder_mead(bad, Eigen::VectorXd::Zero(2), {}), std::invalid_argument);
}

TEST_CASE("perturbation draws")
{
    SUBCASE("deterministic in (seed, sample, stream)")
    {
        CHECK(perturbation_draw(1, 2, 3) == perturbation_draw(1, 2, 3));
        CHECK(perturbation_draw(1, 2, 3) != perturbation_draw(1, 2, 4));
        CHECK(perturbation_draw(1, 2, 3) != perturbation_draw(2, 2, 3));
    }

    SUBCASE("uniform on [-1, 1): Kolmogorov-Smirnov at the 1% level")
    {
        const int n = 100000;
        std::vector<double> draws(n);
        for (int i = 0; i < n; ++i) {
            draws[i] = perturbation_draw(99, i / 27, i % 27);
        }
        std::sort(draws.begin(), draws.end());
        double d_stat = 0.0;
        for (int i = 0; i < n; ++i) {
            const double cdf = 0.5 * (draws[i] + 1.0);
            d_stat = std::max(d_stat, std::abs(cdf - (i + 1.0) / n));
            d_stat = std::max(d_stat, std::abs(cdf - static_cast<double>(i) / n));
        }
        // Critical value at alpha = 0.01.
        CHECK(d_stat < 1.628 / std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("perturb_segments")
{
    const OnTheFlyParams base;

    SUBCASE("zero fraction leaves the coefficients untouched")
    {
        const OnTheFlyParams p = perturb_segments(base, {0.0, 1, 7}, 0);
        CHECK(p.down.a == base.down.a);
        CHECK(p.catch_b.b == base.catch_b.b);
        CHECK(p.catch_m.a == base.catch_m.a);
    }

    SUBCASE("offsets are bounded by the segment's largest coefficient")
    {
        const double f = 1e-5;
        const PerturbationSpec spec{f, 1, 1234};
        double max_seen = 0.0;
        for (int s = 0; s < 500; ++s) {
            const OnTheFlyParams p = perturb_segments(base, spec, s);
            for (int i = 0; i < 5; ++i) {
                max_seen = std::max(max_seen, std::abs(p.catch_b.a[i] - base.catch_b.a[i]));
            }
            for (int i = 0; i < 4; ++i) {
                max_seen = std::max(max_seen, std::abs(p.catch_b.b[i] - base.catch_b.b[i]));
            }
        }
        CHECK(max_seen <= f * 206.5);
        CHECK(max_seen > 0.5 * f * 206.5); // the bound is actually approached
    }

    SUBCASE("different samples get different noise")
    {
        const PerturbationSpec spec{1e-4, 2, 5};
        const OnTheFlyParams p0 = perturb_segments(base, spec, 0);
        const OnTheFlyParams p1 = perturb_segments(base, spec, 1);
        CHECK(p0.down.a != p1.down.a);
    }
}

TEST_CASE("monte-carlo with zero noise reproduces the nominal populations")
{
    ProtocolConfig cfg;
    cfg.dt = 2e-4;
    cfg.n_max = 16;
    const PerturbationSpec spec{0.0, 3, 42};
    const MonteCarloReport rep = monte_carlo_robustness(cfg, spec);
    CHECK(rep.n_failed == 0);
    CHECK(rep.n_samples == 3);

    // All samples identical, so the standard errors vanish.
    for (double e : rep.op.std_error) CHECK(e < 1e-15);

    // And the averages agree with a direct nominal run.
    ProtocolConfig nominal = cfg;
    nominal.n_max = 16;
    const ProtocolResult res = run_onthefly(nominal);
    REQUIRE(res.op_fock.has_value());
    for (int n = 0; n <= 8; ++n) {
        CHECK(std::abs(rep.op.p(n) - res.op_fock->p(n)) < 1e-9);
    }
    for (int na = 0; na <= 4; ++na) {
        for (int nb = 0; nb <= 4; ++nb) {
            CHECK(std::abs(rep.ab.p(na, nb) - res.ab_fock->p(na, nb)) < 1e-9);
        }
    }
}

TEST_CASE("monte-carlo runs are deterministic given the seed")
{
    ProtocolConfig cfg;
    cfg.dt = 2e-4;
    cfg.n_max = 12;
    const PerturbationSpec spec{1e-5, 4, 777};
    const MonteCarloReport a = monte_carlo_robustness(cfg, spec);
    const MonteCarloReport b = monte_carlo_robustness(cfg, spec);
    CHECK(a.op.mean == b.op.mean);
    CHECK(a.ab.mean == b.ab.mean);
    CHECK(a.op.std_error == b.op.std_error);
}

TEST_CASE("symmetric noise keeps odd ab totals empty")
{
    ProtocolConfig cfg;
    cfg.dt = 2e-4;
    cfg.n_max = 10;
    const PerturbationSpec spec{1e-5, 4, 3};
    const MonteCarloReport rep = monte_carlo_robustness(cfg, spec);
    for (int na = 0; na <= 10; ++na) {
        for (int nb = 0; nb <= 10; ++nb) {
            if ((na + nb) % 2 == 1) {
                CHECK(rep.ab.p(na, nb) < 1e-6);
            }
        }
    }
}

TEST_CASE("optimizer objective with unchanged parameters equals the nominal run")
{
    ProtocolConfig cfg;
    cfg.dt = 2e-4;
    cfg.n_max = 0;
    OptimizationProblem prob;
    prob.max_evaluations = 1; // just the baseline evaluation
    const OptimizeOutcome oc = optimize_waveform(cfg, prob);
    const ProtocolResult nominal = run_onthefly(cfg);
    CHECK(oc.objective ==
          doctest::Approx(nominal.n_op_final + nominal.n_a_final + nominal.n_b_final)
              .epsilon(1e-12));
}

TEST_CASE("optimizer does not lose ground from the published coefficients")
{
    ProtocolConfig cfg;
    cfg.dt = 2e-4;
    cfg.n_max = 0;
    OptimizationProblem prob;
    prob.max_evaluations = 60;
    prob.target_total = 1e-9; // force the stages to actually run
    const OptimizeOutcome oc = optimize_waveform(cfg, prob);
    const ProtocolResult nominal = run_onthefly(cfg);
    CHECK(oc.objective <=
          nominal.n_op_final + nominal.n_a_final + nominal.n_b_final + 1e-12);
    CHECK(oc.evaluations <= 60 + 16); // stage bookkeeping slack
}
