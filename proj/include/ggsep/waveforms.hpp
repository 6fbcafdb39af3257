#pragma once

#include <array>
#include <variant>
#include <vector>

// Time-dependent well-frequency schedules: sinusoidal ramps, truncated
// Fourier series with boundary constraints, and their assembly into
// piecewise schedules for the B and M wells.
namespace ggsep {

/// Cosine interpolation between two frequencies with zero end slopes.
struct SinusoidalRamp {
    double omega_start = 0.0; // rad/us
    double omega_end = 0.0;   // rad/us
    double duration = 0.0;    // us
};

double eval_sinusoidal(const SinusoidalRamp& ramp, double t);
double eval_sinusoidal_derivative(const SinusoidalRamp& ramp, double t);

/// omega(t) = amplitude_ref * [a0 + sum_l (a_l cos(pi l t / 2T) + b_l sin(pi l t / 2T))].
struct FourierSegment {
    std::array<double, 5> a{}; // a0..a4, dimensionless
    std::array<double, 4> b{}; // b1..b4
    double duration = 0.0;     // us
    double amplitude_ref = 0.0; // rad/us

    /// Largest coefficient magnitude, the noise scale for robustness studies.
    double max_abs_coefficient() const;
};

double eval_fourier(const FourierSegment& seg, double t);
double eval_fourier_derivative(const FourierSegment& seg, double t);

/// Boundary values and slopes in physical units (rad/us, rad/us^2).
struct FourierBoundary {
    double value_start = 0.0;
    double slope_start = 0.0;
    double value_end = 0.0;
    double slope_end = 0.0;
};

/// Builds a segment from the five free coefficients (a3, a4, b2, b3, b4);
/// the dependent ones (a0, a1, a2, b1) are solved from the four boundary
/// conditions. Throws solver_error if the constraint system is singular.
FourierSegment constrain_fourier(const std::array<double, 5>& free_coeffs,
                                 const FourierBoundary& bc, double duration,
                                 double amplitude_ref);

/// Catch-well minimum w = c - eta * c_dot; the mirror well uses -w.
double catch_well_position(double c_B, double c_B_dot, double eta);

/// Constant-frequency stretch.
struct HoldSegment {
    double omega = 0.0; // rad/us
};

enum class WellRule {
    FixedOrigin, ///< well minimum pinned at the equilibrium position
    Friction,    ///< minimum follows w = c - eta * c_dot (catching)
};

struct ScheduleSegment {
    double t_start = 0.0;
    double duration = 0.0;
    std::variant<HoldSegment, SinusoidalRamp, FourierSegment> shape;
    WellRule rule = WellRule::FixedOrigin;
    double eta = 0.0; // us, used by WellRule::Friction
    /// When set, a Fourier shape describes the curvature ratio
    /// k(t) = m * amplitude_ref * series(t) instead of the frequency;
    /// see curvature_at().
    bool squared = false;

    double t_end() const { return t_start + duration; }
    double omega_at(double t) const;     // t absolute; signed sqrt if squared
    double omega_dot_at(double t) const;
    /// Signed curvature k(t) for an ion of mass m, k = m w |w| for
    /// frequency-described shapes.
    double curvature_at(double t, double mass) const;
    double curvature_dot_at(double t, double mass) const;
};

/// Piecewise well-frequency schedules for the two D (B) wells and the
/// helper (M) well, covering [0, t_final]. Both wells translate frequency
/// to curvature as k = m_B * omega * |omega| (signed, so transient
/// anti-confinement from optimizer candidates is well defined).
struct CurvatureSchedule {
    std::vector<ScheduleSegment> b_well;
    std::vector<ScheduleSegment> m_well;
    double t_final = 0.0;

    double omega_b(double t) const;
    double omega_b_dot(double t) const;
    double omega_m(double t) const;
    double omega_m_dot(double t) const;
    double curvature_b(double t, double mass) const;
    double curvature_b_dot(double t, double mass) const;
    double curvature_m(double t, double mass) const;
    double curvature_m_dot(double t, double mass) const;
    const ScheduleSegment& b_segment_at(double t) const;

    /// Checks contiguity and frequency continuity (1e-6 relative) at the
    /// segment boundaries of both wells. Throws std::invalid_argument.
    void validate() const;

    /// Time-mirrored schedule: omega'(t) = omega(t_final - t). Fourier
    /// segments mirror onto Fourier segments of the same order.
    CurvatureSchedule reversed() const;
};

/// Mirrors one segment shape in time (helper for reversed()).
ScheduleSegment reverse_segment(const ScheduleSegment& seg, double t_final);

} // namespace ggsep
