#include "ggsep/studies.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace ggsep {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& x0, const NelderMeadOptions& options)
{
    const int n = static_cast<int>(x0.size());
    int evals = 0;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++evals;
        return objective(x);
    };

    std::vector<Eigen::VectorXd> pts(n + 1, x0);
    std::vector<double> vals(n + 1);
    vals[0] = eval(x0);
    if (!std::isfinite(vals[0])) {
        throw std::invalid_argument("nelder_mead: objective not finite at x0");
    }
    for (int i = 0; i < n; ++i) {
        pts[i + 1](i) += options.initial_step;
        vals[i + 1] = eval(pts[i + 1]);
    }

    // Track the best point ever evaluated; the returned value never
    // exceeds the starting one.
    Eigen::VectorXd best_x = pts[0];
    double best_v = vals[0];
    auto note = [&](const Eigen::VectorXd& x, double v) {
        if (v < best_v) {
            best_v = v;
            best_x = x;
        }
    };
    for (int i = 0; i <= n; ++i) note(pts[i], vals[i]);

    constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
    bool converged = false;
    while (evals < options.max_evaluations) {
        std::vector<int> order(n + 1);
        for (int i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return vals[a] < vals[b]; });
        const int lo = order[0], hi = order[n], second_hi = order[n - 1];

        if (vals[hi] - vals[lo] < options.tolerance) {
            converged = true;
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i = 0; i <= n; ++i) {
            if (i != hi) centroid += pts[i];
        }
        centroid /= n;

        const Eigen::VectorXd xr = centroid + kReflect * (centroid - pts[hi]);
        const double vr = eval(xr);
        note(xr, vr);
        if (vr < vals[lo]) {
            const Eigen::VectorXd xe = centroid + kExpand * (xr - centroid);
            const double ve = eval(xe);
            note(xe, ve);
            if (ve < vr) {
                pts[hi] = xe;
                vals[hi] = ve;
            } else {
                pts[hi] = xr;
                vals[hi] = vr;
            }
        } else if (vr < vals[second_hi]) {
            pts[hi] = xr;
            vals[hi] = vr;
        } else {
            const bool outside = vr < vals[hi];
            const Eigen::VectorXd base = outside ? xr : pts[hi];
            const Eigen::VectorXd xc = centroid + kContract * (base - centroid);
            const double vc = eval(xc);
            note(xc, vc);
            if (vc < std::min(vr, vals[hi])) {
                pts[hi] = xc;
                vals[hi] = vc;
            } else {
                for (int i = 0; i <= n; ++i) {
                    if (i == lo) continue;
                    pts[i] = pts[lo] + kShrink * (pts[i] - pts[lo]);
                    vals[i] = eval(pts[i]);
                    note(pts[i], vals[i]);
                    if (evals >= options.max_evaluations) break;
                }
            }
        }
    }

    return NelderMeadResult{best_x, best_v, evals, converged};
}

namespace {

std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

double perturbation_draw(std::uint64_t seed, std::uint64_t sample_index,
                         std::uint64_t stream_index)
{
    std::uint64_t k = mix64(seed);
    k = mix64(k + sample_index);
    k = mix64(k + stream_index);
    return 2.0 * (static_cast<double>(k >> 11) * 0x1.0p-53) - 1.0;
}

namespace {

double max_abs(const FourierCoefficients& c)
{
    double m = 0.0;
    for (double x : c.a) m = std::max(m, std::abs(x));
    for (double x : c.b) m = std::max(m, std::abs(x));
    return m;
}

void perturb_one(FourierCoefficients& c, double scale, const PerturbationSpec& spec,
                 int sample_index, std::uint64_t stream_base)
{
    for (int i = 0; i < 5; ++i) {
        c.a[i] += scale * perturbation_draw(spec.seed, sample_index, stream_base + i);
    }
    for (int i = 0; i < 4; ++i) {
        c.b[i] += scale * perturbation_draw(spec.seed, sample_index, stream_base + 5 + i);
    }
}

} // namespace

OnTheFlyParams perturb_segments(const OnTheFlyParams& params,
                                const PerturbationSpec& spec, int sample_index)
{
    OnTheFlyParams out = params;
    const double f = spec.max_fraction;
    perturb_one(out.down, f * max_abs(params.down), spec, sample_index, 0);
    perturb_one(out.catch_b, f * max_abs(params.catch_b), spec, sample_index, 9);
    perturb_one(out.catch_m, f * max_abs(params.catch_m), spec, sample_index, 18);
    return out;
}

double AveragedTable::p(int n) const
{
    if (n_modes != 1 || n < 0 || n > n_max) return 0.0;
    return mean[static_cast<size_t>(n)];
}

double AveragedTable::p(int n_a, int n_b) const
{
    if (n_modes != 2 || n_a < 0 || n_a > n_max || n_b < 0 || n_b > n_max) return 0.0;
    return mean[static_cast<size_t>(n_a) * (n_max + 1) + n_b];
}

double AveragedTable::mean_occupation(int mode) const
{
    double s = 0.0;
    if (n_modes == 1) {
        for (int n = 0; n <= n_max; ++n) s += n * p(n);
    } else {
        for (int na = 0; na <= n_max; ++na)
            for (int nb = 0; nb <= n_max; ++nb) s += (mode == 0 ? na : nb) * p(na, nb);
    }
    return s;
}

namespace {

struct SampleTables {
    std::vector<double> op;
    std::vector<double> ab;
    bool ok = false;
};

AveragedTable reduce_tables(const std::vector<SampleTables>& all, bool ab_table,
                            int n_modes, int n_max)
{
    const size_t len = ab_table ? static_cast<size_t>(n_max + 1) * (n_max + 1)
                                : static_cast<size_t>(n_max + 1);
    AveragedTable t;
    t.n_modes = n_modes;
    t.n_max = n_max;
    t.mean.assign(len, 0.0);
    t.std_error.assign(len, 0.0);
    int n_ok = 0;
    for (const auto& s : all) {
        if (!s.ok) continue;
        ++n_ok;
        const auto& src = ab_table ? s.ab : s.op;
        for (size_t i = 0; i < len; ++i) t.mean[i] += src[i];
    }
    if (n_ok == 0) return t;
    for (size_t i = 0; i < len; ++i) t.mean[i] /= n_ok;
    if (n_ok > 1) {
        for (const auto& s : all) {
            if (!s.ok) continue;
            const auto& src = ab_table ? s.ab : s.op;
            for (size_t i = 0; i < len; ++i) {
                const double d = src[i] - t.mean[i];
                t.std_error[i] += d * d;
            }
        }
        for (size_t i = 0; i < len; ++i) {
            t.std_error[i] = std::sqrt(t.std_error[i] / (double(n_ok) * (n_ok - 1)));
        }
    }
    return t;
}

} // namespace

MonteCarloReport monte_carlo_robustness(const ProtocolConfig& config,
                                        const PerturbationSpec& spec)
{
    if (config.mode != ProtocolMode::OnTheFly) {
        throw std::invalid_argument("monte_carlo_robustness: requires the on-the-fly protocol");
    }
    if (spec.n_samples < 1) {
        throw std::invalid_argument("monte_carlo_robustness: n_samples must be >= 1");
    }

    // Nominal run: fixes the catch time and the pre-computed well motion.
    ProtocolConfig nominal_cfg = config;
    nominal_cfg.n_max = 0;
    const ProtocolResult nominal = run_onthefly(nominal_cfg);
    const HermiteSeries& wells = nominal.trajectory.well_minimum;
    const double t_final = nominal.t_final;

    const ModeGeometry g0 = nominal.trajectory.initial_geometry;
    const ModeGeometry gf = nominal.trajectory.final_geometry;
    const auto refs = nominal.ref_freqs;
    const GaussianState op0 = ground_state_covariance({g0.omega_op()});
    const GaussianState ab0 = ground_state_covariance({g0.omega_a(), g0.omega_b()});
    const ClassicalState start = nominal.trajectory.samples.front().t == 0.0
                                     ? ClassicalState{nominal.trajectory.samples.front().positions,
                                                      nominal.trajectory.samples.front().velocities,
                                                      0.0}
                                     : ClassicalState{};

    const double m_B = config.crystal.data_ion.mass;
    const double m_H = config.crystal.helper_ion.mass;
    const double hbar = config.crystal.hbar;
    const int n_max = std::max(8, config.n_max);

    const double w_end = wells.value.back();
    const double wdot_end = wells.slope.back();

    std::vector<SampleTables> tables(spec.n_samples);

    auto run_sample = [&](int i) {
        const OnTheFlyParams pert = perturb_segments(config.onthefly, spec, i);
        const CurvatureSchedule sched =
            build_onthefly_schedule(config.crystal, pert, nominal.t_catch);
        IntegrationOptions opt;
        opt.dt = config.dt;
        opt.decimation = 1 << 20; // finals only
        opt.symmetric = false;
        opt.replay_wells = &wells;
        opt.initial = start;
        SampleTables out;
        try {
            const Trajectory traj = integrate_protocol(config.crystal, sched, opt);

            // Residual classical motion relative to the intended wells at
            // t_f, entering as a coherent displacement in the lab frame.
            const double dx2 = traj.final_state.positions[2] - w_end;
            const double dv2 = traj.final_state.velocities[2] - wdot_end;
            const double dx1 = traj.final_state.positions[0] + w_end;
            const double dv1 = traj.final_state.velocities[0] + wdot_end;
            const double dxh = traj.final_state.positions[1];
            const double dvh = traj.final_state.velocities[1];

            // Mass-weighted, hbar-scaled mode displacements.
            Eigen::Vector2d d_op;
            d_op << std::sqrt(m_B / hbar) * (dv2 - dv1) / std::sqrt(2.0),
                    std::sqrt(m_B / hbar) * (dx2 - dx1) / std::sqrt(2.0);
            const double dp_ip = std::sqrt(m_B / hbar) * (dv2 + dv1) / std::sqrt(2.0);
            const double dx_ip = std::sqrt(m_B / hbar) * (dx2 + dx1) / std::sqrt(2.0);
            const double dp_h = std::sqrt(m_H / hbar) * dvh;
            const double dx_h = std::sqrt(m_H / hbar) * dxh;
            const double ct = std::cos(gf.theta);
            const double st = std::sin(gf.theta);
            Eigen::Vector4d d_ab;
            d_ab << dp_ip * ct + dp_h * st, dp_h * ct - dp_ip * st,
                    dx_ip * ct + dx_h * st, dx_h * ct - dx_ip * st;

            const GaussianState op_f =
                evolve_covariance(TransferMatrix{traj.m_op_final.m, 0.0, t_final}, op0);
            const GaussianState ab_f =
                evolve_covariance(TransferMatrix{traj.m_ab_final.m, 0.0, t_final}, ab0);

            const FockDistribution fop =
                displaced_populations(op_f, d_op, {refs[0]}, n_max);
            const FockDistribution fab =
                displaced_populations(ab_f, d_ab, {refs[1], refs[2]}, n_max);

            out.op.assign(static_cast<size_t>(n_max + 1), 0.0);
            for (int n = 0; n <= n_max; ++n) out.op[n] = fop.p(n);
            out.ab.assign(static_cast<size_t>(n_max + 1) * (n_max + 1), 0.0);
            for (int na = 0; na <= n_max; ++na)
                for (int nb = 0; nb <= n_max; ++nb)
                    out.ab[static_cast<size_t>(na) * (n_max + 1) + nb] = fab.p(na, nb);
            out.ok = true;
        } catch (const std::exception&) {
            out.ok = false;
        }
        tables[i] = std::move(out);
    };

    const int n_threads = std::max(1u, std::min(std::thread::hardware_concurrency(), 16u));
    if (n_threads == 1 || spec.n_samples == 1) {
        for (int i = 0; i < spec.n_samples; ++i) run_sample(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) {
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < spec.n_samples; i = next.fetch_add(1)) {
                    run_sample(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    MonteCarloReport report;
    report.op = reduce_tables(tables, false, 1, n_max);
    report.ab = reduce_tables(tables, true, 2, n_max);
    report.n_samples = spec.n_samples;
    report.n_failed = static_cast<int>(
        std::count_if(tables.begin(), tables.end(), [](const SampleTables& t) { return !t.ok; }));
    report.seed = spec.seed;
    report.max_fraction = spec.max_fraction;
    report.t_catch = nominal.t_catch;
    return report;
}

namespace {

struct FreeCoords {
    std::array<double, 5> down{}, catch_b{}, catch_m{};
};

FreeCoords free_of(const OnTheFlyParams& p)
{
    auto pick = [](const FourierCoefficients& c) {
        return std::array<double, 5>{c.a[3], c.a[4], c.b[1], c.b[2], c.b[3]};
    };
    return FreeCoords{pick(p.down), pick(p.catch_b), pick(p.catch_m)};
}

} // namespace

OptimizeOutcome optimize_waveform(const ProtocolConfig& config,
                                  const OptimizationProblem& problem)
{
    if (config.mode != ProtocolMode::OnTheFly) {
        throw std::invalid_argument("optimize_waveform: requires the on-the-fly protocol");
    }
    const double w0 = config.crystal.omega0();
    const OnTheFlyParams& base = config.onthefly;
    const double floor_omega = w0 / base.floor_ratio;

    // Free slots are (a3, a4, b2, b3, b4); the boundary conditions fix
    // (a0, a1, a2, b1).
    auto assemble = [&](const FreeCoords& fc) {
        OnTheFlyParams p = base;
        const FourierBoundary bc_down{w0, 0.0, floor_omega, 0.0};
        const FourierBoundary bc_catch{floor_omega, 0.0, w0, 0.0};
        auto fill = [](FourierCoefficients& dst, const FourierSegment& seg) {
            dst.a = seg.a;
            dst.b = seg.b;
        };
        fill(p.down, constrain_fourier({fc.down[0], fc.down[1], fc.down[2], fc.down[3],
                                        fc.down[4]},
                                       bc_down, base.tau1, w0));
        fill(p.catch_b, constrain_fourier({fc.catch_b[0], fc.catch_b[1], fc.catch_b[2],
                                           fc.catch_b[3], fc.catch_b[4]},
                                          bc_catch, base.tau2, floor_omega));
        fill(p.catch_m, constrain_fourier({fc.catch_m[0], fc.catch_m[1], fc.catch_m[2],
                                           fc.catch_m[3], fc.catch_m[4]},
                                          bc_catch, base.tau2, floor_omega));
        return p;
    };

    struct Tracker {
        OnTheFlyParams best_params;
        double best_total = std::numeric_limits<double>::infinity();
        int evaluations = 0;
    } tracker;

    auto evaluate = [&](const OnTheFlyParams& p, double* n_op, double* n_ab) {
        ++tracker.evaluations;
        ProtocolConfig c = config;
        c.onthefly = p;
        c.n_max = 0;
        c.decimation = 1 << 20;
        try {
            const ProtocolResult r = run_onthefly(c);
            *n_op = r.n_op_final;
            *n_ab = r.n_a_final + r.n_b_final;
        } catch (const std::exception&) {
            // Catch never reached or integration failure: steer away.
            *n_op = 1e3;
            *n_ab = 1e3;
        }
        const double total = *n_op + *n_ab;
        if (total < tracker.best_total) {
            tracker.best_total = total;
            tracker.best_params = p;
        }
        return total;
    };

    FreeCoords current = free_of(base);
    {
        double a, b;
        evaluate(assemble(current), &a, &b); // baseline
    }

    auto stage = [&](int which, auto objective_of, int budget) {
        if (tracker.evaluations >= problem.max_evaluations ||
            tracker.best_total < problem.target_total) {
            return;
        }
        Eigen::VectorXd x0(5);
        const std::array<double, 5>& src = which == 0   ? current.down
                                           : which == 1 ? current.catch_b
                                                        : current.catch_m;
        for (int i = 0; i < 5; ++i) x0(i) = src[i];
        NelderMeadOptions nm;
        nm.initial_step = problem.simplex_scale;
        nm.max_evaluations =
            std::min(budget, problem.max_evaluations - tracker.evaluations);
        if (nm.max_evaluations < 8) return;
        const NelderMeadResult r = nelder_mead(
            [&](const Eigen::VectorXd& x) {
                FreeCoords fc = current;
                std::array<double, 5>& dst = which == 0   ? fc.down
                                             : which == 1 ? fc.catch_b
                                                          : fc.catch_m;
                for (int i = 0; i < 5; ++i) dst[i] = x(i);
                double n_op, n_ab;
                const double total = evaluate(assemble(fc), &n_op, &n_ab);
                return objective_of(n_op, n_ab, total);
            },
            x0, nm);
        std::array<double, 5>& dst = which == 0   ? current.down
                                     : which == 1 ? current.catch_b
                                                  : current.catch_m;
        for (int i = 0; i < 5; ++i) dst[i] = r.x(i);
    };

    const int quarter = problem.max_evaluations / 4;
    stage(0, [](double, double, double total) { return total; }, quarter);
    stage(1, [](double n_op, double, double) { return n_op; }, quarter);
    stage(2, [](double, double n_ab, double) { return n_ab; }, quarter);

    // Joint polish on all fifteen free coefficients.
    if (tracker.evaluations < problem.max_evaluations &&
        tracker.best_total >= problem.target_total) {
        Eigen::VectorXd x0(15);
        for (int i = 0; i < 5; ++i) {
            x0(i) = current.down[i];
            x0(5 + i) = current.catch_b[i];
            x0(10 + i) = current.catch_m[i];
        }
        NelderMeadOptions nm;
        nm.initial_step = problem.simplex_scale;
        nm.max_evaluations = problem.max_evaluations - tracker.evaluations;
        if (nm.max_evaluations >= 20) {
            nelder_mead(
                [&](const Eigen::VectorXd& x) {
                    FreeCoords fc;
                    for (int i = 0; i < 5; ++i) {
                        fc.down[i] = x(i);
                        fc.catch_b[i] = x(5 + i);
                        fc.catch_m[i] = x(10 + i);
                    }
                    double n_op, n_ab;
                    return evaluate(assemble(fc), &n_op, &n_ab);
                },
                x0, nm);
        }
    }

    OptimizeOutcome out;
    out.params = tracker.best_params;
    out.objective = tracker.best_total;
    out.evaluations = tracker.evaluations;
    out.converged = tracker.best_total < problem.target_total;
    ProtocolConfig best_cfg = config;
    best_cfg.onthefly = tracker.best_params;
    out.result = run_onthefly(best_cfg);
    return out;
}

} // namespace ggsep
