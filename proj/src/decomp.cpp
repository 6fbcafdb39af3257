#include "ggsep/decomp.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace ggsep {

namespace {

constexpr double kPi = std::numbers::pi;

using Cx = std::complex<double>;

void require_positive_freq(double w, const char* where)
{
    if (!(w > 0.0)) {
        std::ostringstream os;
        os << where << ": reference frequency must be positive";
        throw std::domain_error(os.str());
    }
}

// Frequency scaling T = diag(1/sqrt(w_a), 1/sqrt(w_b), sqrt(w_a), sqrt(w_b)).
// T M T^-1 is the same map between dimensionless quadratures, where the
// ground state covariance is I/2 and passive operations are orthogonal.
Eigen::Matrix4d freq_scaling(double wa, double wb)
{
    Eigen::Matrix4d t = Eigen::Matrix4d::Zero();
    t(0, 0) = 1.0 / std::sqrt(wa);
    t(1, 1) = 1.0 / std::sqrt(wb);
    t(2, 2) = std::sqrt(wa);
    t(3, 3) = std::sqrt(wb);
    return t;
}

Eigen::Matrix4d freq_scaling_inv(double wa, double wb)
{
    return freq_scaling(1.0 / wa, 1.0 / wb);
}

// Ladder-operator block of a 4x4 orthogonal symplectic matrix in the
// dimensionless frame: A = W_pp + i W_px (the B block vanishes).
Eigen::Matrix2cd passive_unitary(const Eigen::Matrix4d& w)
{
    Eigen::Matrix2cd u;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            u(i, j) = Cx(w(i, j), w(i, 2 + j));
        }
    }
    return u;
}

struct UnitaryFactors {
    double theta_bs, phi_bs, theta_a, theta_b;
};

// Factor a 2x2 unitary as BS(theta_bs, phi_bs) * diag(e^{-i theta_a}, e^{-i theta_b})
// where BS = [[c, e^{i phi} s], [-e^{-i phi} s, c]].
UnitaryFactors factor_unitary(const Eigen::Matrix2cd& u)
{
    UnitaryFactors f{};
    const double c = std::abs(u(0, 0));
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    if (s < 1e-12) {
        f.theta_bs = 0.0;
        f.phi_bs = 0.0;
        f.theta_a = -std::arg(u(0, 0));
        f.theta_b = -std::arg(u(1, 1));
    } else if (c < 1e-12) {
        f.theta_bs = 0.5 * kPi;
        f.theta_a = 0.0;
        f.phi_bs = -std::arg(-u(1, 0));
        f.theta_b = wrap_angle(f.phi_bs - std::arg(u(0, 1)));
    } else {
        f.theta_bs = std::atan2(s, c);
        f.theta_a = -std::arg(u(0, 0));
        f.theta_b = -std::arg(u(1, 1));
        f.phi_bs = wrap_angle(std::arg(u(0, 1)) + f.theta_b);
    }
    return f;
}

void check_symplectic(const Eigen::MatrixXd& m, const char* where)
{
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (symplectic_defect(m) > 1e-8 * scale * scale) {
        std::ostringstream os;
        os << where << ": input matrix is not symplectic";
        throw std::invalid_argument(os.str());
    }
}

} // namespace

double wrap_angle(double a)
{
    a = std::fmod(a, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    if (a > kPi) a -= 2.0 * kPi;
    return a;
}

SqueezeParams normalize_squeeze(SqueezeParams p)
{
    if (p.r < 0.0) {
        p.r = -p.r;
        p.phi += kPi;
    }
    p.phi = wrap_angle(p.phi);
    return p;
}

Eigen::Matrix2d squeezer_matrix(const SqueezeParams& p)
{
    require_positive_freq(p.omega_ref, "squeezer_matrix");
    const double ch = std::cosh(p.r);
    const double sh = std::sinh(p.r);
    const double cp = std::cos(p.phi);
    const double sp = std::sin(p.phi);
    Eigen::Matrix2d m;
    m << ch - sh * cp, p.omega_ref * sh * sp,
         sh * sp / p.omega_ref, ch + sh * cp;
    return m;
}

Eigen::Matrix2d rotation_matrix(const RotationParams& p)
{
    require_positive_freq(p.omega_ref, "rotation_matrix");
    const double c = std::cos(p.theta);
    const double s = std::sin(p.theta);
    Eigen::Matrix2d m;
    m << c, -p.omega_ref * s,
         s / p.omega_ref, c;
    return m;
}

Eigen::Matrix4d beamsplitter_matrix(const BeamSplitterParams& p)
{
    require_positive_freq(p.omega_a, "beamsplitter_matrix");
    require_positive_freq(p.omega_b, "beamsplitter_matrix");
    const double c = std::cos(p.theta_bs);
    const double s = std::sin(p.theta_bs);
    const double cp = std::cos(p.phi_bs);
    const double sp = std::sin(p.phi_bs);
    const double rab = std::sqrt(p.omega_a / p.omega_b);
    const double gab = std::sqrt(p.omega_a * p.omega_b);
    Eigen::Matrix4d m;
    m << c, rab * cp * s, 0.0, gab * sp * s,
        -cp * s / rab, c, gab * sp * s, 0.0,
        0.0, -sp * s / gab, c, cp * s / rab,
        -sp * s / gab, 0.0, -rab * cp * s, c;
    return m;
}

Eigen::Matrix4d TwoPortInterferometer::matrix() const
{
    Eigen::Matrix4d rot = Eigen::Matrix4d::Zero();
    const Eigen::Matrix2d ra = rotation_matrix({theta_a, bs.omega_a});
    const Eigen::Matrix2d rb = rotation_matrix({theta_b, bs.omega_b});
    // Interleave the per-mode 2x2 blocks into (p_a, p_b, x_a, x_b) ordering.
    rot(0, 0) = ra(0, 0); rot(0, 2) = ra(0, 1);
    rot(2, 0) = ra(1, 0); rot(2, 2) = ra(1, 1);
    rot(1, 1) = rb(0, 0); rot(1, 3) = rb(0, 1);
    rot(3, 1) = rb(1, 0); rot(3, 3) = rb(1, 1);
    return beamsplitter_matrix(bs) * rot;
}

Eigen::Matrix2d SingleModeEuler::reconstruct() const
{
    const double w = squeeze.omega_ref;
    return rotation_matrix({theta2, w}) * squeezer_matrix(squeeze) *
           rotation_matrix({theta1, w});
}

SingleModeEuler bloch_messiah_2(const Eigen::Matrix2d& m, double omega_ref)
{
    require_positive_freq(omega_ref, "bloch_messiah_2");
    check_symplectic(m, "bloch_messiah_2");
    const double w = omega_ref;
    // Ladder representation a' = alpha a + beta a^dagger.
    const Cx alpha(0.5 * (m(0, 0) + m(1, 1)), 0.5 * (m(0, 1) / w - w * m(1, 0)));
    const Cx beta(0.5 * (m(1, 1) - m(0, 0)), 0.5 * (m(0, 1) / w + w * m(1, 0)));

    SingleModeEuler out;
    out.squeeze.omega_ref = w;
    out.squeeze.r = std::asinh(std::abs(beta));
    const double theta = (std::abs(alpha) > 0.0) ? -std::arg(alpha) : 0.0;
    out.theta1 = out.theta2 = 0.5 * theta;
    out.squeeze.phi = (out.squeeze.r > 1e-14) ? std::arg(beta) : 0.0;
    out.squeeze = normalize_squeeze(out.squeeze);
    return out;
}

Eigen::Matrix4d BlochMessiahFactors::reconstruct() const
{
    Eigen::Matrix4d d = Eigen::Matrix4d::Identity();
    d(0, 0) = std::exp(-squeezes[0].r);
    d(1, 1) = std::exp(-squeezes[1].r);
    d(2, 2) = std::exp(squeezes[0].r);
    d(3, 3) = std::exp(squeezes[1].r);
    return post.matrix() * d * pre.matrix();
}

BlochMessiahFactors bloch_messiah_4(const Eigen::Matrix4d& m,
                                    double omega_a, double omega_b)
{
    require_positive_freq(omega_a, "bloch_messiah_4");
    require_positive_freq(omega_b, "bloch_messiah_4");
    check_symplectic(m, "bloch_messiah_4");

    const Eigen::Matrix4d t = freq_scaling(omega_a, omega_b);
    const Eigen::Matrix4d tinv = freq_scaling_inv(omega_a, omega_b);
    const Eigen::Matrix4d mt = t * m * tinv;

    // Polar decomposition mt = P O. P = (mt mt^T)^(1/2) is symmetric
    // positive definite symplectic; its eigenvalues come in (l, 1/l) pairs
    // with C-conjugate eigenvectors.
    const Eigen::Matrix4d gram = mt * mt.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(gram);
    const Eigen::Vector4d evals = es.eigenvalues(); // ascending
    const Eigen::Matrix4d evecs = es.eigenvectors();

    const double r1 = -0.5 * std::log(evals(0));
    const double r2 = -0.5 * std::log(evals(1));

    Eigen::Matrix4d rot;     // orthogonal symplectic eigenbasis
    Eigen::Vector4d dvec;    // diag of the squeeze core
    Eigen::Matrix4d ortho;   // residual orthogonal factor
    if (r1 < 1e-9) {
        // mt is orthogonal to working precision.
        rot = Eigen::Matrix4d::Identity();
        dvec = Eigen::Vector4d::Ones();
        ortho = mt;
    } else {
        const Eigen::Matrix4d c4 = commutation_matrix(2);
        Eigen::Vector4d u1 = evecs.col(0);
        Eigen::Vector4d u2 = evecs.col(1);
        rot.col(0) = u1;
        rot.col(1) = u2;
        rot.col(2) = c4 * u1;
        rot.col(3) = c4 * u2;
        dvec << std::exp(-r1), std::exp(-r2), std::exp(r1), std::exp(r2);
        ortho = rot * dvec.cwiseInverse().asDiagonal() * rot.transpose() * mt;
    }

    BlochMessiahFactors out;
    out.squeezes = {
        SqueezeParams{std::max(0.0, r1), 0.0, omega_a},
        SqueezeParams{std::max(0.0, r2), 0.0, omega_b},
    };
    const UnitaryFactors post = factor_unitary(passive_unitary(rot));
    const UnitaryFactors pre = factor_unitary(passive_unitary(ortho));
    out.post = {BeamSplitterParams{post.theta_bs, post.phi_bs, omega_a, omega_b},
                post.theta_a, post.theta_b};
    out.pre = {BeamSplitterParams{pre.theta_bs, pre.phi_bs, omega_a, omega_b},
               pre.theta_a, pre.theta_b};
    return out;
}

SqueezeParams precompensation_single(const TransferMatrix& m_f,
                                     double omega_i, double omega_f)
{
    require_positive_freq(omega_i, "precompensation_single");
    require_positive_freq(omega_f, "precompensation_single");
    if (m_f.m.rows() != 2) {
        throw std::invalid_argument("precompensation_single: expected a 2x2 transfer matrix");
    }
    check_symplectic(m_f.m, "precompensation_single");

    const Eigen::Matrix2d& m = m_f.m;
    Eigen::Matrix2d minv;
    minv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0); // det = 1

    Eigen::Matrix2d vf = Eigen::Matrix2d::Zero();
    vf(0, 0) = 0.5 * omega_f;
    vf(1, 1) = 0.5 / omega_f;
    const Eigen::Matrix2d vp = minv * vf * minv.transpose();

    // V_p = S V_i S^T with V_i the ground state at omega_i gives
    //   V_pp = w/2 (cosh 2r - sinh 2r cos phi)
    //   V_xx = (cosh 2r + sinh 2r cos phi) / (2w)
    //   V_px = sinh 2r sin phi / 2.
    const double cosh2r = (vp(0, 0) + omega_i * omega_i * vp(1, 1)) / omega_i;
    const double sinh2r = std::sqrt(std::max(0.0, cosh2r * cosh2r - 1.0));

    SqueezeParams p;
    p.omega_ref = omega_i;
    if (sinh2r < 1e-12) {
        p.r = 0.0;
        p.phi = 0.0;
    } else {
        p.r = 0.5 * std::acosh(std::max(1.0, cosh2r));
        const double sp = 2.0 * vp(0, 1) / sinh2r;
        const double cp = (2.0 * omega_i * vp(1, 1) - cosh2r) / sinh2r;
        p.phi = std::atan2(sp, cp);
    }
    p = normalize_squeeze(p);

    auto residual_for = [&](const SqueezeParams& cand) {
        const Eigen::Matrix2d total = m * squeezer_matrix(cand);
        GaussianState g = ground_state_covariance({omega_i});
        GaussianState fin = evolve_covariance(TransferMatrix{total, 0.0, 0.0}, g);
        return occupation_number(fin, 0, omega_f);
    };

    if (residual_for(p) < 1e-8) {
        return p;
    }
    // Quadrant fallback; the closed form above already fixes (sin, cos), so
    // this only fires on inconsistent input.
    double best = residual_for(p);
    SqueezeParams best_p = p;
    for (double phi : {kPi - p.phi, -p.phi, p.phi + kPi}) {
        SqueezeParams cand = normalize_squeeze({p.r, phi, omega_i});
        const double res = residual_for(cand);
        if (res < best) {
            best = res;
            best_p = cand;
        }
    }
    if (best > 1e-6) {
        std::ostringstream os;
        os << "precompensation_single: no phase quadrant reaches tolerance"
           << " (best residual occupation " << best << ")";
        throw solver_error(os.str());
    }
    return best_p;
}

Eigen::Matrix4d DoubleCompensation::matrix() const
{
    Eigen::Matrix4d sq = Eigen::Matrix4d::Zero();
    const Eigen::Matrix2d sa = squeezer_matrix(squeeze_a);
    const Eigen::Matrix2d sb = squeezer_matrix(squeeze_b);
    sq(0, 0) = sa(0, 0); sq(0, 2) = sa(0, 1);
    sq(2, 0) = sa(1, 0); sq(2, 2) = sa(1, 1);
    sq(1, 1) = sb(0, 0); sq(1, 3) = sb(0, 1);
    sq(3, 1) = sb(1, 0); sq(3, 3) = sb(1, 1);
    return beamsplitter_matrix(bs) * sq;
}

namespace {

// splitmix64; used for deterministic solver restarts.
uint64_t mix64(uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double unit_double(uint64_t z)
{
    return static_cast<double>(z >> 11) * 0x1.0p-53; // [0, 1)
}

struct LmProblem {
    Eigen::Matrix4d vi, vp_scaled, t;
    std::pair<double, double> omegas_i;

    DoubleCompensation unpack(const Eigen::VectorXd& x) const
    {
        DoubleCompensation c;
        c.squeeze_a = {x(0), x(1), omegas_i.first};
        c.squeeze_b = {x(2), x(3), omegas_i.second};
        c.bs = {x(4), x(5), omegas_i.first, omegas_i.second};
        return c;
    }

    // Residuals: upper triangle of T (M_p V_i M_p^T - V_p) T, which makes
    // all ten entries dimensionless and O(1).
    Eigen::VectorXd residuals(const Eigen::VectorXd& x) const
    {
        const Eigen::Matrix4d mp = unpack(x).matrix();
        const Eigen::Matrix4d diff = t * (mp * vi * mp.transpose()) * t - vp_scaled;
        Eigen::VectorXd r(10);
        int k = 0;
        for (int i = 0; i < 4; ++i) {
            for (int j = i; j < 4; ++j) {
                r(k++) = diff(i, j);
            }
        }
        return r;
    }
};

Eigen::VectorXd lm_solve(const LmProblem& prob, Eigen::VectorXd x, double* cost_out)
{
    constexpr int kMaxIter = 120;
    double lambda = 1e-3;
    Eigen::VectorXd r = prob.residuals(x);
    double cost = r.squaredNorm();
    for (int iter = 0; iter < kMaxIter && cost > 1e-26; ++iter) {
        Eigen::MatrixXd jac(r.size(), x.size());
        for (int j = 0; j < x.size(); ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(x(j)));
            Eigen::VectorXd xp = x, xm = x;
            xp(j) += h;
            xm(j) -= h;
            jac.col(j) = (prob.residuals(xp) - prob.residuals(xm)) / (2.0 * h);
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        bool stepped = false;
        for (int tries = 0; tries < 12; ++tries) {
            Eigen::MatrixXd a = jtj;
            a.diagonal().array() += lambda;
            const Eigen::VectorXd dx = a.ldlt().solve(jtr);
            const Eigen::VectorXd xn = x - dx;
            const Eigen::VectorXd rn = prob.residuals(xn);
            const double cn = rn.squaredNorm();
            if (cn < cost) {
                x = xn;
                r = rn;
                cost = cn;
                lambda = std::max(1e-12, lambda * 0.3);
                stepped = true;
                break;
            }
            lambda *= 8.0;
        }
        if (!stepped) {
            break;
        }
    }
    *cost_out = cost;
    return x;
}

} // namespace

DoubleCompensation precompensation_double(const TransferMatrix& m_f,
                                          std::pair<double, double> omegas_i,
                                          std::pair<double, double> omegas_f)
{
    require_positive_freq(omegas_i.first, "precompensation_double");
    require_positive_freq(omegas_i.second, "precompensation_double");
    require_positive_freq(omegas_f.first, "precompensation_double");
    require_positive_freq(omegas_f.second, "precompensation_double");
    if (m_f.m.rows() != 4) {
        throw std::invalid_argument("precompensation_double: expected a 4x4 transfer matrix");
    }
    check_symplectic(m_f.m, "precompensation_double");

    const GaussianState gi = ground_state_covariance({omegas_i.first, omegas_i.second});
    const GaussianState gf = ground_state_covariance({omegas_f.first, omegas_f.second});

    const Eigen::Matrix4d minv = m_f.m.inverse();
    const Eigen::Matrix4d vp = minv * gf.v * minv.transpose();

    LmProblem prob;
    prob.vi = gi.v;
    prob.t = freq_scaling(omegas_i.first, omegas_i.second);
    prob.vp_scaled = prob.t * vp * prob.t;
    prob.omegas_i = omegas_i;

    // Constructive seed: W = T^-1 sqrt(2 T V_p T) T maps the initial ground
    // state onto V_p. Its Bloch-Messiah post-factor absorbs the rotations
    // into the squeeze phases (R(t) S(r,0) = S(r,-2t) R(t), trailing
    // rotations act trivially on the ground state].
    const Eigen::Matrix4d t = freq_scaling(omegas_i.first, omegas_i.second);
    const Eigen::Matrix4d tinv = freq_scaling_inv(omegas_i.first, omegas_i.second);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(2.0 * t * vp * t);
    const Eigen::Matrix4d sqrt_v =
        es.eigenvectors() *
        es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().asDiagonal() *
        es.eigenvectors().transpose();
    const Eigen::Matrix4d w0 = tinv * sqrt_v * t;
    const BlochMessiahFactors bm = bloch_messiah_4(w0, omegas_i.first, omegas_i.second);

    Eigen::VectorXd x0(6);
    x0 << bm.squeezes[0].r, wrap_angle(-2.0 * bm.post.theta_a),
          bm.squeezes[1].r, wrap_angle(-2.0 * bm.post.theta_b),
          bm.post.bs.theta_bs, bm.post.bs.phi_bs;

    double best_cost;
    Eigen::VectorXd best_x = lm_solve(prob, x0, &best_cost);
    if (best_cost > 1e-20) {
        for (int attempt = 0; attempt < 15; ++attempt) {
            Eigen::VectorXd xr(6);
            const uint64_t base = 0x5eedULL + 977ULL * static_cast<uint64_t>(attempt);
            xr << 3.0 * unit_double(mix64(base)),
                  kPi * (2.0 * unit_double(mix64(base + 1)) - 1.0),
                  3.0 * unit_double(mix64(base + 2)),
                  kPi * (2.0 * unit_double(mix64(base + 3)) - 1.0),
                  kPi * unit_double(mix64(base + 4)),
                  kPi * (2.0 * unit_double(mix64(base + 5)) - 1.0);
            double cost;
            const Eigen::VectorXd x = lm_solve(prob, xr, &cost);
            if (cost < best_cost) {
                best_cost = cost;
                best_x = x;
            }
            if (best_cost <= 1e-20) {
                break;
            }
        }
    }

    DoubleCompensation comp = prob.unpack(best_x);
    comp.squeeze_a = normalize_squeeze(comp.squeeze_a);
    comp.squeeze_b = normalize_squeeze(comp.squeeze_b);
    // Canonical beam-splitter domain: theta in [0, pi), cos(phi) >= 0.
    // B(t, p) = B(pi - t, p - pi) * R(pi, pi) and the trailing rotation is
    // absorbed without changing the squeeze phases.
    comp.bs.theta_bs = wrap_angle(comp.bs.theta_bs);
    comp.bs.phi_bs = wrap_angle(comp.bs.phi_bs);
    if (comp.bs.theta_bs < 0.0) {
        comp.bs.theta_bs = -comp.bs.theta_bs;
        comp.bs.phi_bs = wrap_angle(comp.bs.phi_bs + kPi);
    }
    if (std::cos(comp.bs.phi_bs) < 0.0) {
        comp.bs.theta_bs = kPi - comp.bs.theta_bs;
        comp.bs.phi_bs = wrap_angle(comp.bs.phi_bs - kPi);
    }

    // Report the self-consistency residual as total final occupation.
    const Eigen::Matrix4d total = m_f.m * comp.matrix();
    const GaussianState fin = evolve_covariance(TransferMatrix{total, 0.0, 0.0}, gi);
    comp.residual = occupation_number(fin, 0, omegas_f.first) +
                    occupation_number(fin, 1, omegas_f.second);
    if (comp.residual > 1e-4) {
        std::ostringstream os;
        os << "precompensation_double: solver failed (best residual occupation "
           << comp.residual << ")";
        throw solver_error(os.str());
    }
    return comp;
}

} // namespace ggsep
