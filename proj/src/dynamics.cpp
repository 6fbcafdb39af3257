#include "ggsep/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace ggsep {

namespace {

constexpr double kMinGap = 1e-6; // um

void check_gaps(double d1, double h, double d2)
{
    if (h - d1 < kMinGap || d2 - h < kMinGap) {
        std::ostringstream os;
        os << "classical dynamics: ions approach collision (gaps "
           << h - d1 << ", " << d2 - h << " um)";
        throw numerical_error(os.str());
    }
}

} // namespace

std::array<double, 6> classical_derivatives(const ClassicalState& state,
                                            const WellState& wells,
                                            const CrystalConfig& config)
{
    const double d1 = state.positions[0];
    const double h = state.positions[1];
    const double d2 = state.positions[2];
    check_gaps(d1, h, d2);

    const double ke = config.coulomb_constant;
    const double g_h1 = h - d1;
    const double g_2h = d2 - h;
    const double g_21 = d2 - d1;
    const double f_h1 = ke / (g_h1 * g_h1); // repulsion between D1 and H
    const double f_2h = ke / (g_2h * g_2h);
    const double f_21 = ke / (g_21 * g_21);

    const double m_D = config.data_ion.mass;
    const double m_H = config.helper_ion.mass;

    std::array<double, 6> out;
    out[0] = state.velocities[0];
    out[1] = state.velocities[1];
    out[2] = state.velocities[2];
    out[3] = (-wells.curvatures[0] * (d1 - wells.minima[0]) - f_h1 - f_21) / m_D;
    out[4] = (-wells.curvatures[1] * (h - wells.minima[1]) + f_h1 - f_2h) / m_H;
    out[5] = (-wells.curvatures[2] * (d2 - wells.minima[2]) + f_2h + f_21) / m_D;
    return out;
}

double HermiteSeries::eval(double t) const
{
    const auto n = static_cast<long long>(value.size());
    const double s = (t - t0) / dt;
    long long i = static_cast<long long>(std::floor(s));
    i = std::max(0LL, std::min(i, n - 2));
    const double u = s - static_cast<double>(i);
    const double h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
    const double h10 = u * (1.0 - u) * (1.0 - u);
    const double h01 = u * u * (3.0 - 2.0 * u);
    const double h11 = u * u * (u - 1.0);
    return h00 * value[i] + h10 * dt * slope[i] + h01 * value[i + 1] +
           h11 * dt * slope[i + 1];
}

double HermiteSeries::eval_derivative(double t) const
{
    const auto n = static_cast<long long>(value.size());
    const double s = (t - t0) / dt;
    long long i = static_cast<long long>(std::floor(s));
    i = std::max(0LL, std::min(i, n - 2));
    const double u = s - static_cast<double>(i);
    const double d00 = 6.0 * u * (u - 1.0);
    const double d10 = (1.0 - u) * (1.0 - 3.0 * u);
    const double d01 = -d00;
    const double d11 = u * (3.0 * u - 2.0);
    return (d00 * value[i] + d01 * value[i + 1]) / dt + d10 * slope[i] +
           d11 * slope[i + 1];
}

HermiteSeries HermiteSeries::reversed() const
{
    HermiteSeries out;
    out.t0 = t0;
    out.dt = dt;
    out.value.assign(value.rbegin(), value.rend());
    for (auto it = slope.rbegin(); it != slope.rend(); ++it) {
        out.slope.push_back(-*it);
    }
    return out;
}

namespace {

// Flat integration state: 3 positions, 3 velocities, M_op, M_ab.
struct SimState {
    Eigen::Vector3d pos;
    Eigen::Vector3d vel;
    Eigen::Matrix2d mop;
    Eigen::Matrix4d mab;
};

SimState axpy(const SimState& y, double a, const SimState& d)
{
    return SimState{y.pos + a * d.pos, y.vel + a * d.vel, y.mop + a * d.mop,
                    y.mab + a * d.mab};
}

struct Rhs {
    const CrystalConfig& cfg;
    const CurvatureSchedule& sched;
    const IntegrationOptions& opt;
    double m_B;

    double well_b(double t, const ScheduleSegment& seg, double c2, double v2) const
    {
        if (seg.rule != WellRule::Friction) {
            return 0.0;
        }
        if (opt.replay_wells != nullptr) {
            return opt.replay_wells->eval(t);
        }
        return catch_well_position(c2, v2, seg.eta);
    }

    SimState operator()(double t, const SimState& y, ModeGeometry* geom_out = nullptr,
                        double* w_out = nullptr) const
    {
        // Signed curvatures; the M-well frequency is defined through the B
        // mass so k_M(0) = k_B(0).
        const double k_B = sched.curvature_b(t, m_B);
        const double k_M = sched.curvature_m(t, m_B);
        const double kd_B = sched.curvature_b_dot(t, m_B);
        const double kd_M = sched.curvature_m_dot(t, m_B);

        const ScheduleSegment& seg = sched.b_segment_at(t);

        SimState d;
        double c, cdot;
        if (opt.symmetric) {
            const double c2 = y.pos(2);
            const double v2 = y.vel(2);
            const double w2 = well_b(t, seg, c2, v2);
            if (c2 < kMinGap) {
                throw numerical_error("classical dynamics: ions approach collision");
            }
            const double ke = cfg.coulomb_constant;
            const double acc =
                (-k_B * (c2 - w2) + 1.25 * ke / (c2 * c2)) / cfg.data_ion.mass;
            d.pos = Eigen::Vector3d(-v2, 0.0, v2);
            d.vel = Eigen::Vector3d(-acc, 0.0, acc);
            c = c2;
            cdot = v2;
            if (w_out) *w_out = w2;
        } else {
            const double w2 = well_b(t, seg, y.pos(2), y.vel(2));
            // Mirror-symmetric wells; only their minima move.
            const ClassicalState cs{{y.pos(0), y.pos(1), y.pos(2)},
                                    {y.vel(0), y.vel(1), y.vel(2)},
                                    t};
            const WellState ws{{-w2, 0.0, w2}, {k_B, k_M, k_B}};
            const auto der = classical_derivatives(cs, ws, cfg);
            d.pos = Eigen::Vector3d(der[0], der[1], der[2]);
            d.vel = Eigen::Vector3d(der[3], der[4], der[5]);
            c = 0.5 * (y.pos(2) - y.pos(0));
            cdot = 0.5 * (y.vel(2) - y.vel(0));
            if (w_out) *w_out = w2;
        }

        const ModeGeometry g = mode_geometry(cfg, k_B, k_M, c, kd_B, cdot, kd_M);
        if (geom_out) *geom_out = g;

        // dM = C h M assembled by row blocks.
        const Eigen::Matrix2d hop = h_op(g);
        d.mop.row(0) = -hop.row(1) * y.mop;
        d.mop.row(1) = hop.row(0) * y.mop;
        const Eigen::Matrix4d hab = h_ab(g);
        d.mab.topRows(2) = -hab.bottomRows(2) * y.mab;
        d.mab.bottomRows(2) = hab.topRows(2) * y.mab;
        return d;
    }
};

} // namespace

ClassicalState equilibrium_state(const CrystalConfig& config,
                                 const CurvatureSchedule& schedule)
{
    const double k0 = schedule.curvature_b(0.0, config.data_ion.mass);
    const double c = equilibrium_half_spacing(config, k0);
    ClassicalState s;
    s.positions = {-c, 0.0, c};
    s.velocities = {0.0, 0.0, 0.0};
    s.t = 0.0;
    return s;
}

Trajectory integrate_protocol(const CrystalConfig& config,
                              const CurvatureSchedule& schedule,
                              const IntegrationOptions& options)
{
    if (!(options.dt > 0.0)) {
        throw std::invalid_argument("integrate_protocol: dt must be positive");
    }
    schedule.validate();

    const ClassicalState init =
        options.initial ? *options.initial : equilibrium_state(config, schedule);

    Rhs rhs{config, schedule, options, config.data_ion.mass};

    SimState y;
    y.pos = Eigen::Vector3d(init.positions[0], init.positions[1], init.positions[2]);
    y.vel = Eigen::Vector3d(init.velocities[0], init.velocities[1], init.velocities[2]);
    y.mop = Eigen::Matrix2d::Identity();
    y.mab = Eigen::Matrix4d::Identity();

    const long long n_steps =
        std::max(1LL, std::llround(schedule.t_final / options.dt));
    const double h = schedule.t_final / static_cast<double>(n_steps);

    Trajectory traj;
    traj.dt = h;
    traj.decimation = std::max(1, options.decimation);
    traj.samples.reserve(static_cast<size_t>(n_steps / traj.decimation) + 2);
    traj.well_minimum.t0 = 0.0;
    traj.well_minimum.dt = h;
    traj.well_minimum.value.reserve(n_steps + 1);
    traj.well_minimum.slope.reserve(n_steps + 1);

    auto record = [&](double t, const SimState& s, const ModeGeometry& g, double w) {
        TrajectorySample smp;
        smp.t = t;
        smp.positions = {s.pos(0), s.pos(1), s.pos(2)};
        smp.velocities = {s.vel(0), s.vel(1), s.vel(2)};
        smp.w_B = w;
        smp.k_D = g.k_D;
        smp.k_H = g.k_H;
        smp.geometry = g;
        smp.m_op = s.mop;
        smp.m_ab = s.mab;
        traj.samples.push_back(std::move(smp));
    };

    for (long long i = 0; i <= n_steps; ++i) {
        const double t = static_cast<double>(i) * h;
        ModeGeometry g;
        double w = 0.0;
        const SimState k1 = rhs(t, y, &g, &w);

        // Nominal well table on the step grid; the slope of w = c - eta v
        // uses the acceleration from the stage derivative.
        const ScheduleSegment& seg = schedule.b_segment_at(t);
        const double wdot = (seg.rule == WellRule::Friction && !options.replay_wells)
                                ? y.vel(2) - seg.eta * k1.vel(2)
                                : (options.replay_wells && seg.rule == WellRule::Friction
                                       ? options.replay_wells->eval_derivative(t)
                                       : 0.0);
        traj.well_minimum.value.push_back(w);
        traj.well_minimum.slope.push_back(wdot);

        if (i % traj.decimation == 0 || i == n_steps) {
            record(t, y, g, w);
        }
        if (i == 0) {
            traj.initial_geometry = g;
        }
        if (i == n_steps) {
            traj.final_geometry = g;
            break;
        }

        const SimState k2 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k1));
        const SimState k3 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k2));
        const SimState k4 = rhs(t + h, axpy(y, h, k3));
        y.pos += (h / 6.0) * (k1.pos + 2.0 * k2.pos + 2.0 * k3.pos + k4.pos);
        y.vel += (h / 6.0) * (k1.vel + 2.0 * k2.vel + 2.0 * k3.vel + k4.vel);
        y.mop += (h / 6.0) * (k1.mop + 2.0 * k2.mop + 2.0 * k3.mop + k4.mop);
        y.mab += (h / 6.0) * (k1.mab + 2.0 * k2.mab + 2.0 * k3.mab + k4.mab);
    }

    traj.final_state.positions = {y.pos(0), y.pos(1), y.pos(2)};
    traj.final_state.velocities = {y.vel(0), y.vel(1), y.vel(2)};
    traj.final_state.t = schedule.t_final;
    traj.m_op_final = TransferMatrix{y.mop, 0.0, schedule.t_final};
    traj.m_ab_final = TransferMatrix{y.mab, 0.0, schedule.t_final};

    const double defect = std::max(symplectic_defect(y.mop), symplectic_defect(y.mab));
    if (defect > 1e-6) {
        std::ostringstream os;
        os << "integrate_protocol: symplecticity defect " << defect
           << " exceeds 1e-6; reduce dt";
        throw numerical_error(os.str());
    }
    return traj;
}

CatchEvent detect_catch(const Trajectory& traj, double threshold)
{
    if (traj.samples.empty()) {
        throw std::invalid_argument("detect_catch: empty trajectory");
    }
    const double origin = traj.samples.front().positions[2];
    double prev_t = traj.samples.front().t;
    double prev_d = 0.0;
    for (const auto& s : traj.samples) {
        const double d = std::abs(s.positions[2] - origin);
        if (d >= threshold) {
            double t = s.t;
            if (d > prev_d && s.t > prev_t) {
                // Linear interpolation between the bracketing samples.
                const double frac = (threshold - prev_d) / (d - prev_d);
                t = prev_t + frac * (s.t - prev_t);
            }
            return CatchEvent{t, threshold};
        }
        prev_t = s.t;
        prev_d = d;
    }
    std::ostringstream os;
    os << "detect_catch: displacement never reached " << threshold << " um";
    throw solver_error(os.str());
}

} // namespace ggsep
