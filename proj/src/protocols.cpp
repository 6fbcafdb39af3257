#include "ggsep/protocols.hpp"

#include <chrono>
#include <cmath>

namespace ggsep {

namespace {

FourierSegment make_segment(const FourierCoefficients& c, double duration,
                            double amplitude_ref)
{
    FourierSegment seg;
    seg.a = c.a;
    seg.b = c.b;
    seg.duration = duration;
    seg.amplitude_ref = amplitude_ref;
    return seg;
}

// Occupation references after separation: each D ion alone at omega_0, the
// helper at sqrt(m_D/m_H) omega_0 (same curvature, heavier mass).
std::array<double, 3> final_reference_freqs(const CrystalConfig& crystal)
{
    const double w0 = crystal.omega0();
    return {w0, w0, std::sqrt(crystal.mass_ratio()) * w0};
}

struct InitialQuantum {
    GaussianState op;
    GaussianState ab;
};

InitialQuantum initial_ground_states(const ModeGeometry& g)
{
    InitialQuantum q;
    q.op = ground_state_covariance({g.omega_op()});
    q.ab = ground_state_covariance({g.omega_a(), g.omega_b()});
    return q;
}

// Evolves the initial states through the sampled transfer matrices and
// fills the occupation series and columns.
void fill_series(ProtocolResult& res, const InitialQuantum& init,
                 const std::array<double, 3>& refs)
{
    auto& traj = res.trajectory;
    res.t_series.reserve(traj.samples.size());
    res.n_op_series.reserve(traj.samples.size());
    for (auto& s : traj.samples) {
        const TransferMatrix mop{s.m_op, 0.0, s.t};
        const TransferMatrix mab{s.m_ab, 0.0, s.t};
        const GaussianState op = evolve_covariance(mop, init.op);
        const GaussianState ab = evolve_covariance(mab, init.ab);
        s.n_op = occupation_number(op, 0, refs[0]);
        s.n_a = occupation_number(ab, 0, refs[1]);
        s.n_b = occupation_number(ab, 1, refs[2]);
        res.t_series.push_back(s.t);
        res.n_op_series.push_back(s.n_op);
        res.n_a_series.push_back(s.n_a);
        res.n_b_series.push_back(s.n_b);
        res.theta_dot_series.push_back(s.geometry.theta_dot);
    }

    res.op_state_final = evolve_covariance(traj.m_op_final, init.op);
    res.ab_state_final = evolve_covariance(traj.m_ab_final, init.ab);
    res.n_op_final = occupation_number(res.op_state_final, 0, refs[0]);
    res.n_a_final = occupation_number(res.ab_state_final, 0, refs[1]);
    res.n_b_final = occupation_number(res.ab_state_final, 1, refs[2]);
    res.ref_freqs = refs;
}

void fill_final_squeezes(ProtocolResult& res)
{
    res.r_op_final = state_squeeze(res.op_state_final, res.ref_freqs[0]);
    const auto [ra, rb] =
        state_squeezes_ab(res.ab_state_final, res.ref_freqs[1], res.ref_freqs[2]);
    res.r_a_final = ra;
    res.r_b_final = rb;
}

void fill_fock_tables(ProtocolResult& res, int n_max)
{
    if (n_max <= 0) {
        return;
    }
    res.op_fock = gaussian_to_fock_adaptive(res.op_state_final, {res.ref_freqs[0]}, n_max);
    res.ab_fock = gaussian_to_fock_adaptive(res.ab_state_final,
                                            {res.ref_freqs[1], res.ref_freqs[2]}, n_max);
}

ProtocolResult run_reversed(const ProtocolConfig& config);

} // namespace

CurvatureSchedule build_precompensated_schedule(const CrystalConfig& crystal,
                                                const PrecompensatedParams& p)
{
    const double w0 = crystal.omega0();
    CurvatureSchedule s;
    s.t_final = p.tau + p.tau0 + p.ramp_up;

    ScheduleSegment down;
    down.t_start = 0.0;
    down.duration = p.tau;
    ScheduleSegment up;
    up.t_start = p.tau + p.tau0;
    up.duration = p.ramp_up;
    up.rule = WellRule::Friction;
    up.eta = p.eta;
    if (p.ramp_curvature) {
        // Sinusoid applied to the curvature: k(t)/k0 = [1 + cos(pi t/tau)]/2,
        // the l = 2 harmonic of a squared Fourier segment.
        FourierSegment fd;
        fd.a = {0.5, 0.0, 0.5, 0.0, 0.0};
        fd.duration = p.tau;
        fd.amplitude_ref = w0;
        down.shape = fd;
        down.squared = true;
        FourierSegment fu;
        fu.a = {0.5, 0.0, -0.5, 0.0, 0.0};
        fu.duration = p.ramp_up;
        fu.amplitude_ref = w0;
        up.shape = fu;
        up.squared = true;
    } else {
        down.shape = SinusoidalRamp{w0, 0.0, p.tau};
        up.shape = SinusoidalRamp{0.0, w0, p.ramp_up};
    }

    ScheduleSegment flight;
    flight.t_start = p.tau;
    flight.duration = p.tau0;
    flight.shape = HoldSegment{0.0};

    s.b_well = {down, flight, up};
    s.m_well = s.b_well; // helper confinement ramped identically (k_H = k_D)
    for (auto& seg : s.m_well) {
        seg.rule = WellRule::FixedOrigin;
    }
    return s;
}

CurvatureSchedule build_onthefly_schedule(const CrystalConfig& crystal,
                                          const OnTheFlyParams& p, double t_catch)
{
    const double w0 = crystal.omega0();
    if (!(t_catch > p.tau1)) {
        throw std::invalid_argument("build_onthefly_schedule: t_catch must exceed tau1");
    }

    CurvatureSchedule s;
    s.t_final = t_catch + p.tau2;

    ScheduleSegment down;
    down.t_start = 0.0;
    down.duration = p.tau1;
    down.shape = make_segment(p.down, p.tau1, w0);
    down.squared = p.series_curvature;

    // The hold level and the catch normalization both follow the value the
    // release segment actually ends at, which keeps the schedule continuous
    // even with rounded published coefficients.
    const double floor_omega = down.omega_at(p.tau1);

    ScheduleSegment floor_seg;
    floor_seg.t_start = p.tau1;
    floor_seg.duration = t_catch - p.tau1;
    floor_seg.shape = HoldSegment{floor_omega};

    ScheduleSegment catch_b;
    catch_b.t_start = t_catch;
    catch_b.duration = p.tau2;
    catch_b.shape = make_segment(p.catch_b, p.tau2, floor_omega);
    catch_b.squared = p.series_curvature;
    catch_b.rule = WellRule::Friction;
    catch_b.eta = p.eta;

    ScheduleSegment catch_m = catch_b;
    catch_m.shape = make_segment(p.catch_m, p.tau2, floor_omega);
    catch_m.rule = WellRule::FixedOrigin;
    catch_m.eta = 0.0;

    s.b_well = {down, floor_seg, catch_b};
    s.m_well = {down, floor_seg, catch_m};
    return s;
}

double find_catch_time(const CrystalConfig& crystal, const OnTheFlyParams& p,
                       double dt)
{
    const double w0 = crystal.omega0();
    constexpr double kSearchWindow = 6.0; // us of floor flight at most

    CurvatureSchedule s;
    s.t_final = p.tau1 + kSearchWindow;
    ScheduleSegment down;
    down.t_start = 0.0;
    down.duration = p.tau1;
    down.shape = make_segment(p.down, p.tau1, w0);
    down.squared = p.series_curvature;
    ScheduleSegment floor_seg;
    floor_seg.t_start = p.tau1;
    floor_seg.duration = kSearchWindow;
    floor_seg.shape = HoldSegment{down.omega_at(p.tau1)};
    s.b_well = {down, floor_seg};
    s.m_well = s.b_well;

    IntegrationOptions opt;
    opt.dt = dt;
    opt.decimation = 1;
    Trajectory traj = integrate_protocol(crystal, s, opt);
    double displacement = p.catch_threshold;
    if (p.threshold_from_origin) {
        displacement -= traj.samples.front().positions[2];
    }
    const CatchEvent ev = detect_catch(traj, std::max(0.0, displacement));

    // Snap to the integration grid so schedule boundaries coincide with
    // step boundaries.
    const double snapped = std::round(ev.t_catch / traj.dt) * traj.dt;
    return std::max(snapped, p.tau1 + traj.dt);
}

double state_squeeze(const GaussianState& state, double omega_ref)
{
    Eigen::Matrix2d t = Eigen::Matrix2d::Zero();
    t(0, 0) = 1.0 / std::sqrt(omega_ref);
    t(1, 1) = std::sqrt(omega_ref);
    const Eigen::Matrix2d vt = 2.0 * t * state.v * t;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(vt);
    // Pure-state covariance in the dimensionless frame has eigenvalues
    // e^{+-2r}.
    return 0.25 * std::log(es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff());
}

std::pair<double, double> state_squeezes_ab(const GaussianState& state,
                                            double omega_a, double omega_b)
{
    Eigen::Matrix4d t = Eigen::Matrix4d::Zero();
    t(0, 0) = 1.0 / std::sqrt(omega_a);
    t(1, 1) = 1.0 / std::sqrt(omega_b);
    t(2, 2) = std::sqrt(omega_a);
    t(3, 3) = std::sqrt(omega_b);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(2.0 * t * state.v * t);
    const Eigen::Matrix4d root = es.eigenvectors() *
                                 es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                                 es.eigenvectors().transpose();
    Eigen::Matrix4d tinv = Eigen::Matrix4d::Zero();
    tinv(0, 0) = std::sqrt(omega_a);
    tinv(1, 1) = std::sqrt(omega_b);
    tinv(2, 2) = 1.0 / std::sqrt(omega_a);
    tinv(3, 3) = 1.0 / std::sqrt(omega_b);
    const Eigen::Matrix4d w = tinv * root * t;
    const BlochMessiahFactors bm = bloch_messiah_4(w, omega_a, omega_b);
    // Route each squeeze channel to the mode its post-interferometer
    // column loads most; cos^2(theta_bs) is channel 1's weight on mode a.
    const double ca = std::cos(bm.post.bs.theta_bs);
    if (ca * ca >= 0.5) {
        return {bm.squeezes[0].r, bm.squeezes[1].r};
    }
    return {bm.squeezes[1].r, bm.squeezes[0].r};
}

ProtocolResult run_precompensated(const ProtocolConfig& config)
{
    if (config.reversed) {
        return run_reversed(config);
    }
    const auto t_start = std::chrono::steady_clock::now();

    const CurvatureSchedule sched =
        build_precompensated_schedule(config.crystal, config.precomp);
    IntegrationOptions opt;
    opt.dt = config.dt;
    opt.decimation = config.decimation;
    opt.symmetric = !config.full_three_body;

    ProtocolResult res;
    res.trajectory = integrate_protocol(config.crystal, sched, opt);
    res.t_final = sched.t_final;

    const ModeGeometry& g0 = res.trajectory.initial_geometry;
    const auto refs = final_reference_freqs(config.crystal);

    res.comp_op = precompensation_single(res.trajectory.m_op_final, g0.omega_op(), refs[0]);
    res.comp_ab = precompensation_double(res.trajectory.m_ab_final,
                                         {g0.omega_a(), g0.omega_b()},
                                         {refs[1], refs[2]});

    // Pre-compensated initial states.
    InitialQuantum init = initial_ground_states(g0);
    const Eigen::Matrix2d sp = squeezer_matrix(*res.comp_op);
    init.op.v = sp * init.op.v * sp.transpose();
    const Eigen::Matrix4d mp = res.comp_ab->matrix();
    init.ab.v = mp * init.ab.v * mp.transpose();

    fill_series(res, init, refs);
    fill_final_squeezes(res);
    // Pre-compensation squeezing is far too strong for useful Fock tables;
    // only occupations are reported for this protocol.

    res.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return res;
}

ProtocolResult run_onthefly(const ProtocolConfig& config)
{
    if (config.reversed) {
        return run_reversed(config);
    }
    const auto t_start = std::chrono::steady_clock::now();

    const double t_catch = find_catch_time(config.crystal, config.onthefly, config.dt);
    const CurvatureSchedule sched =
        build_onthefly_schedule(config.crystal, config.onthefly, t_catch);

    IntegrationOptions opt;
    opt.dt = config.dt;
    opt.decimation = config.decimation;
    opt.symmetric = !config.full_three_body;

    ProtocolResult res;
    res.trajectory = integrate_protocol(config.crystal, sched, opt);
    res.t_catch = t_catch;
    res.t_final = sched.t_final;

    const InitialQuantum init = initial_ground_states(res.trajectory.initial_geometry);
    fill_series(res, init, final_reference_freqs(config.crystal));
    fill_final_squeezes(res);
    fill_fock_tables(res, config.n_max);

    res.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return res;
}

namespace {

// Runs the time-mirrored protocol: starts from the forward run's final
// classical state with negated velocities, replays the mirrored well
// minima and integrates the mirrored schedule. Occupations are measured
// against the initial (single-well) mode frequencies where the ions
// recombine.
ProtocolResult run_reversed(const ProtocolConfig& config)
{
    const auto t_start = std::chrono::steady_clock::now();

    ProtocolConfig fwd_cfg = config;
    fwd_cfg.reversed = false;
    fwd_cfg.n_max = 0;
    const bool onthefly = config.mode == ProtocolMode::OnTheFly;

    CurvatureSchedule fwd_sched;
    if (onthefly) {
        const double t_catch = find_catch_time(config.crystal, config.onthefly, config.dt);
        fwd_sched = build_onthefly_schedule(config.crystal, config.onthefly, t_catch);
    } else {
        fwd_sched = build_precompensated_schedule(config.crystal, config.precomp);
    }
    IntegrationOptions fwd_opt;
    fwd_opt.dt = config.dt;
    fwd_opt.decimation = config.decimation;
    fwd_opt.symmetric = !config.full_three_body;
    const Trajectory fwd = integrate_protocol(config.crystal, fwd_sched, fwd_opt);

    const CurvatureSchedule rev_sched = fwd_sched.reversed();
    const HermiteSeries rev_wells = fwd.well_minimum.reversed();

    IntegrationOptions opt;
    opt.dt = config.dt;
    opt.decimation = config.decimation;
    opt.symmetric = !config.full_three_body;
    opt.replay_wells = &rev_wells;
    ClassicalState start = fwd.final_state;
    start.t = 0.0;
    for (double& v : start.velocities) {
        v = -v;
    }
    opt.initial = start;

    ProtocolResult res;
    res.trajectory = integrate_protocol(config.crystal, rev_sched, opt);
    res.t_final = rev_sched.t_final;

    // Separated ground states flow back to the single-well ground states;
    // the roles of the initial and final reference frequencies swap.
    const auto refs_fwd = final_reference_freqs(config.crystal);
    InitialQuantum init;
    init.op = ground_state_covariance({refs_fwd[0]});
    init.ab = ground_state_covariance({refs_fwd[1], refs_fwd[2]});
    const ModeGeometry& g0 = fwd.initial_geometry;
    fill_series(res, init, {g0.omega_op(), g0.omega_a(), g0.omega_b()});
    fill_final_squeezes(res);
    fill_fock_tables(res, config.n_max);

    res.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return res;
}

} // namespace

ProtocolResult run_protocol(const ProtocolConfig& config)
{
    if (config.mode == ProtocolMode::Precompensated) {
        return run_precompensated(config);
    }
    return run_onthefly(config);
}

ProtocolConfig bmb_ramp_example()
{
    ProtocolConfig cfg;
    cfg.mode = ProtocolMode::Precompensated;
    cfg.crystal.omega_ip_initial = 2.0 * std::numbers::pi; // 1 MHz in-phase
    cfg.n_max = 0;
    return cfg;
}

ProtocolConfig bmb_onthefly_example()
{
    ProtocolConfig cfg;
    cfg.mode = ProtocolMode::OnTheFly;
    // 1 MHz single-ion well: omega_ip = sqrt(13/5) MHz.
    cfg.crystal.omega_ip_initial = 2.0 * std::numbers::pi * std::sqrt(13.0 / 5.0);
    return cfg;
}

ProtocolConfig reverse_protocol(const ProtocolConfig& config)
{
    ProtocolConfig out = config;
    out.reversed = !config.reversed;
    return out;
}

} // namespace ggsep
