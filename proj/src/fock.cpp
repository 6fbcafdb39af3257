#include "ggsep/fock.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <sstream>

#include "ggsep/decomp.hpp"

namespace ggsep {

namespace {

using Cx = std::complex<double>;
using VecC = Eigen::VectorXcd;

// Applies exp(K) to psi via scaled Taylor summation. K must be
// (anti-)bounded by norm_bound; apply_k writes K * in into out.
void exp_apply(const std::function<void(const VecC&, VecC&)>& apply_k,
               VecC& psi, double norm_bound)
{
    const int s = std::max(1, static_cast<int>(std::ceil(norm_bound / 0.5)));
    VecC term(psi.size()), next(psi.size());
    for (int rep = 0; rep < s; ++rep) {
        term = psi;
        VecC total = psi;
        for (int j = 1; j < 200; ++j) {
            apply_k(term, next);
            term = next / (static_cast<double>(s) * static_cast<double>(j));
            total += term;
            if (term.norm() < 1e-18 * total.norm()) {
                break;
            }
        }
        psi = total;
    }
}

// Single-mode squeeze exp[r/2 (e^{i phi} a^dag^2 - e^{-i phi} a^2)] on the
// given mode of a 1- or 2-mode state with w levels per mode.
void apply_squeeze(VecC& psi, int w, int n_modes, int mode, double r, double phi)
{
    if (std::abs(r) < 1e-15) {
        return;
    }
    const Cx up = 0.5 * r * std::exp(Cx(0.0, phi));
    const Cx dn = 0.5 * r * std::exp(Cx(0.0, -phi));
    const int stride = (n_modes == 2 && mode == 0) ? w : 1;
    const int outer = (n_modes == 2) ? w : 1;
    const int outer_stride = (n_modes == 2 && mode == 0) ? 1 : w;
    auto k = [&](const VecC& in, VecC& out) {
        out.setZero();
        for (int o = 0; o < outer; ++o) {
            const int base = (n_modes == 2) ? o * outer_stride : 0;
            for (int n = 0; n < w; ++n) {
                Cx acc(0.0, 0.0);
                if (n >= 2) {
                    acc += up * std::sqrt(double(n) * double(n - 1)) *
                           in(base + (n - 2) * stride);
                }
                if (n + 2 < w) {
                    acc -= dn * std::sqrt(double(n + 1) * double(n + 2)) *
                           in(base + (n + 2) * stride);
                }
                out(base + n * stride) = acc;
            }
        }
    };
    exp_apply(k, psi, std::abs(r) * (w + 1.0));
}

// Beam splitter exp[t (e^{i phi} a^dag b - e^{-i phi} a b^dag)] on a
// two-mode state.
void apply_beamsplitter(VecC& psi, int w, double theta, double phi)
{
    if (std::abs(theta) < 1e-15) {
        return;
    }
    const Cx up = theta * std::exp(Cx(0.0, phi));
    const Cx dn = theta * std::exp(Cx(0.0, -phi));
    auto k = [&](const VecC& in, VecC& out) {
        out.setZero();
        for (int na = 0; na < w; ++na) {
            for (int nb = 0; nb < w; ++nb) {
                Cx acc(0.0, 0.0);
                // a^dag b : (na-1, nb+1) -> (na, nb)
                if (na >= 1 && nb + 1 < w) {
                    acc += up * std::sqrt(double(na) * double(nb + 1)) *
                           in((na - 1) * w + nb + 1);
                }
                // a b^dag : (na+1, nb-1) -> (na, nb)
                if (nb >= 1 && na + 1 < w) {
                    acc -= dn * std::sqrt(double(na + 1) * double(nb)) *
                           in((na + 1) * w + nb - 1);
                }
                out(na * w + nb) = acc;
            }
        }
    };
    exp_apply(k, psi, 2.0 * std::abs(theta) * (w + 1.0));
}

// Mode rotation exp[-i theta a^dag a]: diagonal phases.
void apply_rotation(VecC& psi, int w, int n_modes, int mode, double theta)
{
    if (std::abs(theta) < 1e-15) {
        return;
    }
    for (int i = 0; i < psi.size(); ++i) {
        const int n = (n_modes == 2) ? (mode == 0 ? i / w : i % w) : i;
        psi(i) *= std::exp(Cx(0.0, -theta * n));
    }
}

// Displacement exp[alpha a^dag - conj(alpha) a] on the given mode.
void apply_displacement(VecC& psi, int w, int n_modes, int mode, Cx alpha)
{
    if (std::abs(alpha) < 1e-15) {
        return;
    }
    const int stride = (n_modes == 2 && mode == 0) ? w : 1;
    const int outer = (n_modes == 2) ? w : 1;
    const int outer_stride = (n_modes == 2 && mode == 0) ? 1 : w;
    const Cx ac = std::conj(alpha);
    auto k = [&](const VecC& in, VecC& out) {
        out.setZero();
        for (int o = 0; o < outer; ++o) {
            const int base = (n_modes == 2) ? o * outer_stride : 0;
            for (int n = 0; n < w; ++n) {
                Cx acc(0.0, 0.0);
                if (n >= 1) {
                    acc += alpha * std::sqrt(double(n)) * in(base + (n - 1) * stride);
                }
                if (n + 1 < w) {
                    acc -= ac * std::sqrt(double(n + 1)) * in(base + (n + 1) * stride);
                }
                out(base + n * stride) = acc;
            }
        }
    };
    exp_apply(k, psi, 2.0 * std::abs(alpha) * std::sqrt(w + 1.0));
}

} // namespace

double FockDistribution::p(int n) const
{
    if (n_modes != 1 || n < 0 || n > n_max) {
        return 0.0;
    }
    return populations[static_cast<size_t>(n)];
}

double FockDistribution::p(int n_a, int n_b) const
{
    if (n_modes != 2 || n_a < 0 || n_a > n_max || n_b < 0 || n_b > n_max) {
        return 0.0;
    }
    return populations[static_cast<size_t>(n_a) * (n_max + 1) + n_b];
}

double FockDistribution::total() const
{
    double s = 0.0;
    for (double v : populations) s += v;
    return s;
}

double FockDistribution::mean_occupation(int mode) const
{
    double s = 0.0;
    if (n_modes == 1) {
        for (int n = 0; n <= n_max; ++n) s += n * populations[n];
    } else {
        for (int na = 0; na <= n_max; ++na) {
            for (int nb = 0; nb <= n_max; ++nb) {
                s += (mode == 0 ? na : nb) * p(na, nb);
            }
        }
    }
    return s;
}

FockDistribution squeezed_vacuum_populations(double r, int n_max)
{
    if (r < 0.0) {
        throw std::domain_error("squeezed_vacuum_populations: r must be >= 0");
    }
    FockDistribution d;
    d.n_modes = 1;
    d.n_max = n_max;
    d.populations.assign(n_max + 1, 0.0);
    const double th2 = std::tanh(r) * std::tanh(r);
    double p = 1.0 / std::cosh(r);
    double sum = 0.0;
    for (int n = 0; 2 * n <= n_max; ++n) {
        d.populations[2 * n] = p;
        sum += p;
        p *= th2 * (2.0 * n + 1.0) / (2.0 * n + 2.0);
    }
    d.truncation_defect = std::max(0.0, 1.0 - sum);
    return d;
}

namespace {

FockDistribution build_distribution(const GaussianState& state,
                                    const std::vector<double>& ref_freqs, int n_max)
{
    const int n = state.modes();
    if (n != 1 && n != 2) {
        throw std::invalid_argument("gaussian_to_fock: supports 1 or 2 modes");
    }
    if (static_cast<int>(ref_freqs.size()) != n) {
        throw std::invalid_argument("gaussian_to_fock: reference frequency count mismatch");
    }
    for (double w : ref_freqs) {
        if (!(w > 0.0)) {
            throw std::domain_error("gaussian_to_fock: reference frequencies must be positive");
        }
    }

    // Working space holds twice the reported levels so that the defect is
    // an honest leak measure.
    const int w = 2 * (n_max + 1);
    const Eigen::Index dim = (n == 2) ? Eigen::Index(w) * w : Eigen::Index(w);
    VecC psi = VecC::Zero(dim);
    psi(0) = 1.0;

    // Symmetric symplectic root W: V = W V_ground W^T, via the
    // dimensionless frame where the ground covariance is I/2.
    const int d2 = 2 * n;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(d2, d2);
    for (int k = 0; k < n; ++k) {
        t(k, k) = 1.0 / std::sqrt(ref_freqs[k]);
        t(n + k, n + k) = std::sqrt(ref_freqs[k]);
    }
    const Eigen::MatrixXd vt = 2.0 * t * state.v * t;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(vt);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw std::invalid_argument("gaussian_to_fock: covariance not positive definite");
    }
    const Eigen::MatrixXd root = es.eigenvectors() *
                                 es.eigenvalues().cwiseSqrt().asDiagonal() *
                                 es.eigenvectors().transpose();
    const Eigen::MatrixXd wmap = t.inverse() * root * t;

    if (n == 1) {
        const SingleModeEuler eu = bloch_messiah_2(wmap, ref_freqs[0]);
        apply_squeeze(psi, w, 1, 0, eu.squeeze.r, eu.squeeze.phi);
        apply_rotation(psi, w, 1, 0, eu.theta2);
    } else {
        const BlochMessiahFactors bm = bloch_messiah_4(wmap, ref_freqs[0], ref_freqs[1]);
        apply_squeeze(psi, w, 2, 0, bm.squeezes[0].r, bm.squeezes[0].phi);
        apply_squeeze(psi, w, 2, 1, bm.squeezes[1].r, bm.squeezes[1].phi);
        apply_rotation(psi, w, 2, 0, bm.post.theta_a);
        apply_rotation(psi, w, 2, 1, bm.post.theta_b);
        apply_beamsplitter(psi, w, bm.post.bs.theta_bs, bm.post.bs.phi_bs);
    }

    for (int k = 0; k < n; ++k) {
        const double wk = ref_freqs[k];
        const Cx alpha = (Cx(0.0, 1.0) * state.mean(k) + wk * state.mean(n + k)) /
                         std::sqrt(2.0 * wk);
        apply_displacement(psi, w, n, k, alpha);
    }

    FockDistribution d;
    d.n_modes = n;
    d.n_max = n_max;
    if (n == 1) {
        d.populations.assign(n_max + 1, 0.0);
        for (int i = 0; i <= n_max; ++i) {
            d.populations[i] = std::norm(psi(i));
        }
    } else {
        d.populations.assign(static_cast<size_t>(n_max + 1) * (n_max + 1), 0.0);
        for (int na = 0; na <= n_max; ++na) {
            for (int nb = 0; nb <= n_max; ++nb) {
                d.populations[static_cast<size_t>(na) * (n_max + 1) + nb] =
                    std::norm(psi(Eigen::Index(na) * w + nb));
            }
        }
    }
    d.truncation_defect = std::max(0.0, 1.0 - d.total());
    return d;
}

} // namespace

FockDistribution gaussian_to_fock(const GaussianState& state,
                                  const std::vector<double>& ref_freqs, int n_max)
{
    FockDistribution d = build_distribution(state, ref_freqs, n_max);
    if (d.truncation_defect >= 1e-6) {
        std::ostringstream os;
        os << "gaussian_to_fock: truncation defect " << d.truncation_defect
           << " at n_max = " << n_max;
        throw numerical_error(os.str());
    }
    return d;
}

FockDistribution displaced_populations(const GaussianState& state,
                                       const Eigen::VectorXd& displacement,
                                       const std::vector<double>& ref_freqs,
                                       int n_max)
{
    if (displacement.size() != state.mean.size()) {
        throw std::invalid_argument("displaced_populations: displacement size mismatch");
    }
    GaussianState shifted = state;
    shifted.mean += displacement;
    return gaussian_to_fock(shifted, ref_freqs, n_max);
}

FockDistribution gaussian_to_fock_adaptive(const GaussianState& state,
                                           const std::vector<double>& ref_freqs,
                                           int n_max)
{
    int n = n_max;
    while (true) {
        try {
            return gaussian_to_fock(state, ref_freqs, n);
        } catch (const numerical_error&) {
            if (2 * n > 160) {
                throw;
            }
            n *= 2;
        }
    }
}

} // namespace ggsep
