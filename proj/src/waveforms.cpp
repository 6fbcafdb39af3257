#include "ggsep/waveforms.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ggsep/errors.hpp"

namespace ggsep {

namespace {

constexpr double kPi = std::numbers::pi;

void require_inside(double t, double duration, const char* where)
{
    const double slack = 1e-9 * std::max(1.0, duration);
    if (t < -slack || t > duration + slack) {
        std::ostringstream os;
        os << where << ": t = " << t << " outside segment [0, " << duration << "]";
        throw std::invalid_argument(os.str());
    }
}

} // namespace

double eval_sinusoidal(const SinusoidalRamp& ramp, double t)
{
    require_inside(t, ramp.duration, "eval_sinusoidal");
    const double s = 0.5 * (1.0 + std::cos(kPi * t / ramp.duration));
    return ramp.omega_end + (ramp.omega_start - ramp.omega_end) * s;
}

double eval_sinusoidal_derivative(const SinusoidalRamp& ramp, double t)
{
    require_inside(t, ramp.duration, "eval_sinusoidal");
    const double k = kPi / ramp.duration;
    return -0.5 * (ramp.omega_start - ramp.omega_end) * k * std::sin(k * t);
}

double FourierSegment::max_abs_coefficient() const
{
    double m = 0.0;
    for (double c : a) m = std::max(m, std::abs(c));
    for (double c : b) m = std::max(m, std::abs(c));
    return m;
}

double eval_fourier(const FourierSegment& seg, double t)
{
    require_inside(t, seg.duration, "eval_fourier");
    const double base = kPi * t / (2.0 * seg.duration);
    double s = seg.a[0];
    for (int l = 1; l <= 4; ++l) {
        s += seg.a[l] * std::cos(l * base) + seg.b[l - 1] * std::sin(l * base);
    }
    return seg.amplitude_ref * s;
}

double eval_fourier_derivative(const FourierSegment& seg, double t)
{
    require_inside(t, seg.duration, "eval_fourier");
    const double base = kPi * t / (2.0 * seg.duration);
    const double k = kPi / (2.0 * seg.duration);
    double s = 0.0;
    for (int l = 1; l <= 4; ++l) {
        s += l * k * (-seg.a[l] * std::sin(l * base) + seg.b[l - 1] * std::cos(l * base));
    }
    return seg.amplitude_ref * s;
}

FourierSegment constrain_fourier(const std::array<double, 5>& free_coeffs,
                                 const FourierBoundary& bc, double duration,
                                 double amplitude_ref)
{
    if (!(duration > 0.0)) {
        throw std::invalid_argument("constrain_fourier: duration must be positive");
    }
    if (!(amplitude_ref != 0.0)) {
        throw std::invalid_argument("constrain_fourier: amplitude_ref must be nonzero");
    }
    // Normalized constraints; slope rows carry the common factor pi/(2T).
    //   value@0 : a0 + a1 + a2 + a3 + a4                 = v0
    //   slope@0 : b1 + 2 b2 + 3 b3 + 4 b4                = s0
    //   value@T : a0 - a2 + a4 + b1 - b3                 = v1
    //   slope@T : -a1 + 3 a3 - 2 b2 + 4 b4               = s1
    // solved for the dependent coefficients (a0, a1, a2, b1).
    const double slope_unit = kPi / (2.0 * duration) * amplitude_ref;
    const double v0 = bc.value_start / amplitude_ref;
    const double s0 = bc.slope_start / slope_unit;
    const double v1 = bc.value_end / amplitude_ref;
    const double s1 = bc.slope_end / slope_unit;

    const double a3 = free_coeffs[0];
    const double a4 = free_coeffs[1];
    const double b2 = free_coeffs[2];
    const double b3 = free_coeffs[3];
    const double b4 = free_coeffs[4];

    Eigen::Matrix4d m;
    // columns: (a0, a1, a2, b1)
    m << 1, 1, 1, 0,
         0, 0, 0, 1,
         1, 0, -1, 1,
         0, -1, 0, 0;
    Eigen::Vector4d rhs;
    rhs << v0 - a3 - a4,
           s0 - 2.0 * b2 - 3.0 * b3 - 4.0 * b4,
           v1 - a4 + b3,
           s1 - 3.0 * a3 + 2.0 * b2 - 4.0 * b4;

    const Eigen::FullPivLU<Eigen::Matrix4d> lu(m);
    if (!lu.isInvertible()) {
        throw solver_error("constrain_fourier: singular constraint system");
    }
    const Eigen::Vector4d dep = lu.solve(rhs);

    FourierSegment seg;
    seg.a = {dep(0), dep(1), dep(2), a3, a4};
    seg.b = {dep(3), b2, b3, b4};
    seg.duration = duration;
    seg.amplitude_ref = amplitude_ref;
    return seg;
}

double catch_well_position(double c_B, double c_B_dot, double eta)
{
    return c_B - eta * c_B_dot;
}

double ScheduleSegment::omega_at(double t) const
{
    const double local = t - t_start;
    if (std::holds_alternative<HoldSegment>(shape)) {
        return std::get<HoldSegment>(shape).omega;
    }
    if (std::holds_alternative<SinusoidalRamp>(shape)) {
        return eval_sinusoidal(std::get<SinusoidalRamp>(shape), local);
    }
    const double v = eval_fourier(std::get<FourierSegment>(shape), local);
    if (!squared) {
        return v;
    }
    // v = ref * series; the curvature ratio is k/m = ref * v, so the
    // signed frequency is sqrt(|ref v|) with the sign of the series.
    const double ref = std::get<FourierSegment>(shape).amplitude_ref;
    const double ksq = ref * v;
    return ksq >= 0.0 ? std::sqrt(ksq) : -std::sqrt(-ksq);
}

double ScheduleSegment::omega_dot_at(double t) const
{
    const double local = t - t_start;
    if (std::holds_alternative<HoldSegment>(shape)) {
        return 0.0;
    }
    if (std::holds_alternative<SinusoidalRamp>(shape)) {
        return eval_sinusoidal_derivative(std::get<SinusoidalRamp>(shape), local);
    }
    const double vd = eval_fourier_derivative(std::get<FourierSegment>(shape), local);
    if (!squared) {
        return vd;
    }
    const double ref = std::get<FourierSegment>(shape).amplitude_ref;
    const double w = omega_at(t);
    // d/dt sqrt(ref v) = ref vd / (2 w); undefined at w = 0.
    return std::abs(w) > 1e-12 ? 0.5 * ref * vd / w : 0.0;
}

double ScheduleSegment::curvature_at(double t, double mass) const
{
    if (squared && std::holds_alternative<FourierSegment>(shape)) {
        const auto& f = std::get<FourierSegment>(shape);
        return mass * f.amplitude_ref * eval_fourier(f, t - t_start);
    }
    const double w = omega_at(t);
    return mass * w * std::abs(w);
}

double ScheduleSegment::curvature_dot_at(double t, double mass) const
{
    if (squared && std::holds_alternative<FourierSegment>(shape)) {
        const auto& f = std::get<FourierSegment>(shape);
        return mass * f.amplitude_ref * eval_fourier_derivative(f, t - t_start);
    }
    return 2.0 * mass * std::abs(omega_at(t)) * omega_dot_at(t);
}

namespace {

const ScheduleSegment& segment_at(const std::vector<ScheduleSegment>& segs, double t)
{
    if (segs.empty()) {
        throw std::invalid_argument("CurvatureSchedule: empty segment list");
    }
    // Segment intervals are [t_start, t_end); the last one includes t_final.
    for (const auto& s : segs) {
        if (t < s.t_end()) {
            return s;
        }
    }
    return segs.back();
}

void validate_group(const std::vector<ScheduleSegment>& segs, double t_final,
                    const char* name)
{
    if (segs.empty()) {
        throw std::invalid_argument(std::string("CurvatureSchedule: no segments for ") + name);
    }
    const double tol_t = 1e-9 * std::max(1.0, t_final);
    if (std::abs(segs.front().t_start) > tol_t) {
        throw std::invalid_argument(std::string("CurvatureSchedule: ") + name +
                                    " does not start at t = 0");
    }
    for (size_t i = 0; i < segs.size(); ++i) {
        if (!(segs[i].duration > 0.0)) {
            throw std::invalid_argument(std::string("CurvatureSchedule: ") + name +
                                        " has a non-positive segment duration");
        }
        if (i + 1 < segs.size()) {
            if (std::abs(segs[i].t_end() - segs[i + 1].t_start) > tol_t) {
                throw std::invalid_argument(std::string("CurvatureSchedule: ") + name +
                                            " segments are not contiguous");
            }
            const double w0 = segs[i].omega_at(segs[i].t_end());
            const double w1 = segs[i + 1].omega_at(segs[i + 1].t_start);
            const double scale = std::max({std::abs(w0), std::abs(w1), 1e-12});
            if (std::abs(w0 - w1) > 1e-6 * scale) {
                std::ostringstream os;
                os << "CurvatureSchedule: " << name << " frequency jump at t = "
                   << segs[i].t_end() << " (" << w0 << " vs " << w1 << ")";
                throw std::invalid_argument(os.str());
            }
        }
    }
    if (std::abs(segs.back().t_end() - t_final) > tol_t) {
        throw std::invalid_argument(std::string("CurvatureSchedule: ") + name +
                                    " does not cover [0, t_final]");
    }
}

} // namespace

double CurvatureSchedule::omega_b(double t) const { return segment_at(b_well, t).omega_at(t); }
double CurvatureSchedule::omega_b_dot(double t) const { return segment_at(b_well, t).omega_dot_at(t); }
double CurvatureSchedule::omega_m(double t) const { return segment_at(m_well, t).omega_at(t); }
double CurvatureSchedule::omega_m_dot(double t) const { return segment_at(m_well, t).omega_dot_at(t); }
double CurvatureSchedule::curvature_b(double t, double mass) const
{
    return segment_at(b_well, t).curvature_at(t, mass);
}
double CurvatureSchedule::curvature_b_dot(double t, double mass) const
{
    return segment_at(b_well, t).curvature_dot_at(t, mass);
}
double CurvatureSchedule::curvature_m(double t, double mass) const
{
    return segment_at(m_well, t).curvature_at(t, mass);
}
double CurvatureSchedule::curvature_m_dot(double t, double mass) const
{
    return segment_at(m_well, t).curvature_dot_at(t, mass);
}

const ScheduleSegment& CurvatureSchedule::b_segment_at(double t) const
{
    return segment_at(b_well, t);
}

void CurvatureSchedule::validate() const
{
    validate_group(b_well, t_final, "B well");
    validate_group(m_well, t_final, "M well");
}

ScheduleSegment reverse_segment(const ScheduleSegment& seg, double t_final)
{
    ScheduleSegment out = seg;
    out.t_start = t_final - seg.t_end();
    if (std::holds_alternative<SinusoidalRamp>(seg.shape)) {
        const auto& r = std::get<SinusoidalRamp>(seg.shape);
        out.shape = SinusoidalRamp{r.omega_end, r.omega_start, r.duration};
    } else if (std::holds_alternative<FourierSegment>(seg.shape)) {
        // omega(T - t): cos and sin pick up the quarter-turn phases
        // cos(pi l / 2), sin(pi l / 2) and stay within the same order.
        // Integer tables keep the mirror an exact involution.
        static constexpr int cl[5] = {0, 0, -1, 0, 1};
        static constexpr int sl[5] = {0, 1, 0, -1, 0};
        const auto& f = std::get<FourierSegment>(seg.shape);
        FourierSegment rf = f;
        for (int l = 1; l <= 4; ++l) {
            rf.a[l] = f.a[l] * cl[l] + f.b[l - 1] * sl[l];
            rf.b[l - 1] = f.a[l] * sl[l] - f.b[l - 1] * cl[l];
        }
        out.shape = rf;
    }
    return out;
}

CurvatureSchedule CurvatureSchedule::reversed() const
{
    CurvatureSchedule out;
    out.t_final = t_final;
    for (auto it = b_well.rbegin(); it != b_well.rend(); ++it) {
        out.b_well.push_back(reverse_segment(*it, t_final));
    }
    for (auto it = m_well.rbegin(); it != m_well.rend(); ++it) {
        out.m_well.push_back(reverse_segment(*it, t_final));
    }
    return out;
}

} // namespace ggsep
