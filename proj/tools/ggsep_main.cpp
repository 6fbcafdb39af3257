#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ggsep/config_io.hpp"

namespace fs = std::filesystem;
using namespace ggsep;

namespace {

int run_selftest();

void apply_overrides(RunConfig& rc, double dt_override, long long seed_override,
                     bool seed_given)
{
    if (dt_override > 0.0) {
        rc.protocol.dt = dt_override;
        rc.resolved["dt_us"] = dt_override;
    }
    if (seed_given) {
        rc.montecarlo.seed = static_cast<std::uint64_t>(seed_override);
        rc.resolved["montecarlo"]["seed"] = rc.montecarlo.seed;
    } else if (const char* env = std::getenv("GGSEP_SEED")) {
        rc.montecarlo.seed = std::strtoull(env, nullptr, 10);
        rc.resolved["montecarlo"]["seed"] = rc.montecarlo.seed;
    }
}

void write_json(const fs::path& path, const nlohmann::json& j)
{
    std::ofstream out(path);
    if (!out) {
        throw std::invalid_argument("cannot write '" + path.string() + "'");
    }
    out << j.dump(2) << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"DHD crystal ground-state separation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    double dt_override = -1.0;
    long long seed_override = 0;
    bool seed_given = false;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* copt = cmd->add_option("--config", config_path, "JSON config file");
        if (needs_config) {
            copt->required()->check(CLI::ExistingFile);
        }
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--dt", dt_override, "integration step override (us)");
        cmd->add_option("--seed", seed_override, "Monte-Carlo seed override")
            ->each([&](const std::string&) { seed_given = true; });
    };

    auto* simulate = app.add_subcommand("simulate", "run the configured protocol");
    add_common(simulate, true);
    auto* precompensate =
        app.add_subcommand("precompensate", "solve the ramp-protocol compensation");
    add_common(precompensate, true);
    auto* optimize = app.add_subcommand("optimize", "optimize the Fourier waveform");
    add_common(optimize, true);
    auto* montecarlo =
        app.add_subcommand("montecarlo", "coefficient-noise robustness study");
    add_common(montecarlo, true);
    auto* selftest = app.add_subcommand("selftest", "run the built-in invariant checks");
    (void)selftest;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (selftest->parsed()) {
            return run_selftest();
        }

        RunConfig rc = parse_config(config_path);
        apply_overrides(rc, dt_override, seed_override, seed_given);
        fs::create_directories(out_dir);
        const fs::path out(out_dir);

        if (simulate->parsed()) {
            const ProtocolResult res = run_protocol(rc.protocol);
            write_trajectory_csv((out / "trajectory.csv").string(), res);
            write_json(out / "summary.json", summary_json(res, rc));
            std::printf("simulate: t_f=%.4g us  n_op=%.4g  n_a=%.4g  n_b=%.4g\n",
                        res.t_final, res.n_op_final, res.n_a_final, res.n_b_final);
        } else if (precompensate->parsed()) {
            rc.protocol.mode = ProtocolMode::Precompensated;
            rc.resolved["mode"] = "precompensated";
            const ProtocolResult res = run_precompensated(rc.protocol);
            write_trajectory_csv((out / "trajectory.csv").string(), res);
            write_json(out / "summary.json", summary_json(res, rc));
            std::printf(
                "precompensate: r_p=%.4g phi_p=%.4g  r_a=%.4g r_b=%.4g theta_bs=%.4g\n",
                res.comp_op->r, res.comp_op->phi, res.comp_ab->squeeze_a.r,
                res.comp_ab->squeeze_b.r, res.comp_ab->bs.theta_bs);
        } else if (optimize->parsed()) {
            const OptimizeOutcome oc = optimize_waveform(rc.protocol, rc.optimize);
            RunConfig best = rc;
            best.protocol.onthefly = oc.params;
            best.resolved["onthefly"]["fourier_down"] = {{"a", oc.params.down.a},
                                                         {"b", oc.params.down.b}};
            best.resolved["onthefly"]["fourier_catch_b"] = {{"a", oc.params.catch_b.a},
                                                            {"b", oc.params.catch_b.b}};
            best.resolved["onthefly"]["fourier_catch_m"] = {{"a", oc.params.catch_m.a},
                                                            {"b", oc.params.catch_m.b}};
            write_json(out / "summary.json", summary_json(oc.result, best));
            nlohmann::json ckpt = best.resolved;
            ckpt["optimizer"] = {{"objective", oc.objective},
                                 {"evaluations", oc.evaluations},
                                 {"converged", oc.converged}};
            write_json(out / "checkpoint.json", ckpt);
            std::printf("optimize: best total occupation %.4g in %d evaluations (%s)\n",
                        oc.objective, oc.evaluations,
                        oc.converged ? "converged" : "not converged");
        } else if (montecarlo->parsed()) {
            const MonteCarloReport rep = monte_carlo_robustness(rc.protocol, rc.montecarlo);
            write_json(out / "report.json", report_json(rep, rc));
            std::printf("montecarlo: f=%.3g n=%d failed=%d  P0(op)=%.4g P00(ab)=%.4g\n",
                        rep.max_fraction, rep.n_samples, rep.n_failed, rep.op.p(0),
                        rep.ab.p(0, 0));
        }
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}

namespace {

int run_selftest()
{
    int failures = 0;
    auto check = [&](const char* name, bool ok) {
        std::printf("%-52s %s\n", name, ok ? "pass" : "FAIL");
        if (!ok) ++failures;
    };

    const CrystalConfig crystal;
    const double w0 = crystal.omega0();

    // Commutation identity C^2 = -I.
    {
        const Eigen::MatrixXd c = commutation_matrix(3);
        check("commutation matrix squares to -identity",
              (c * c + Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() == 0.0);
    }

    // Constant-h evolution matches the analytic harmonic rotation.
    {
        const double w = 2.3;
        auto h = [&](double, Eigen::Ref<Eigen::MatrixXd> m) {
            m.setZero();
            m(0, 0) = 1.0;
            m(1, 1) = w * w;
        };
        const double t = 3.7;
        const TransferMatrix m = integrate_transfer(h, 1, 0.0, t, 1e-4);
        const Eigen::Matrix2d ref = rotation_matrix({w * t, w});
        check("harmonic rotation oracle",
              (m.m - ref).cwiseAbs().maxCoeff() < 1e-8);
    }

    // Mode identities at the symmetric equilibrium.
    {
        const double c = equilibrium_half_spacing(crystal, crystal.k0());
        const ModeGeometry g =
            mode_geometry(crystal, crystal.k0(), crystal.k0(), c, 0.0, 0.0, 0.0);
        check("omega_op(0) = sqrt(3) omega_0",
              std::abs(g.omega_op() - std::sqrt(3.0) * w0) < 1e-9 * w0);
        Eigen::Matrix2d block;
        block << g.omega_ip_sq, -g.omega_coupling_sq, -g.omega_coupling_sq, g.omega_H_sq;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(block);
        check("coupled-block eigenvalues match omega_a, omega_b",
              std::abs(es.eigenvalues()(1) - g.omega_a_sq) < 1e-10 * g.omega_a_sq &&
                  std::abs(es.eigenvalues()(0) - g.omega_b_sq) < 1e-10 * g.omega_a_sq);
    }

    // Published release segment satisfies its boundary conditions.
    {
        const OnTheFlyParams p;
        FourierSegment seg;
        seg.a = p.down.a;
        seg.b = p.down.b;
        seg.duration = p.tau1;
        seg.amplitude_ref = w0;
        check("release segment boundary values",
              std::abs(eval_fourier(seg, 0.0) - w0) < 0.01 * w0 &&
                  std::abs(eval_fourier(seg, p.tau1) - w0 / 30.0) < 0.01 * w0);
    }

    // Truncated-operator squeezed vacuum matches the closed form.
    {
        GaussianState g = ground_state_covariance({1.7});
        const Eigen::Matrix2d s = squeezer_matrix({0.3, 0.0, 1.7});
        g.v = s * g.v * s.transpose();
        const FockDistribution num = gaussian_to_fock(g, {1.7}, 24);
        const FockDistribution ref = squeezed_vacuum_populations(0.3, 24);
        double err = 0.0;
        for (int n = 0; n <= 24; ++n) err = std::max(err, std::abs(num.p(n) - ref.p(n)));
        check("Fock oracle vs closed-form squeezed vacuum", err < 1e-10);
    }

    // Short protocol run keeps its transfer matrices symplectic.
    {
        ProtocolConfig cfg;
        cfg.n_max = 0;
        cfg.dt = 2e-4;
        const ProtocolResult res = run_onthefly(cfg);
        check("protocol transfer matrices symplectic",
              symplectic_defect(res.trajectory.m_op_final.m) < 1e-9 &&
                  symplectic_defect(res.trajectory.m_ab_final.m) < 1e-9);
    }

    std::printf(failures == 0 ? "selftest: all checks passed\n"
                              : "selftest: %d check(s) FAILED\n",
                failures);
    return failures == 0 ? 0 : 3;
}

} // namespace
