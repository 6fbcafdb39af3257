#include "ggsep/symplectic.hpp"

#include <cmath>
#include <complex>
#include <sstream>

namespace ggsep {

Eigen::MatrixXd commutation_matrix(int n_modes)
{
    if (n_modes < 1) {
        throw std::invalid_argument("commutation_matrix: n_modes must be >= 1");
    }
    const int n = n_modes;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    c.topRightCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
    c.bottomLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    return c;
}

Eigen::MatrixXd apply_commutation(const Eigen::MatrixXd& a)
{
    const int n = static_cast<int>(a.rows()) / 2;
    Eigen::MatrixXd out(a.rows(), a.cols());
    out.topRows(n) = -a.bottomRows(n);
    out.bottomRows(n) = a.topRows(n);
    return out;
}

double symplectic_defect(const Eigen::MatrixXd& m)
{
    const int n = static_cast<int>(m.rows()) / 2;
    const Eigen::MatrixXd c = commutation_matrix(n);
    return (m * c * m.transpose() - c).cwiseAbs().maxCoeff();
}

void QuadraticForm::validate() const
{
    if (h.rows() != h.cols() || h.rows() % 2 != 0 || h.rows() == 0) {
        throw std::invalid_argument("QuadraticForm: dimension must be even and nonzero");
    }
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale) {
        throw std::invalid_argument("QuadraticForm: matrix not symmetric");
    }
}

GaussianState ground_state_covariance(const std::vector<double>& freqs)
{
    const int n = static_cast<int>(freqs.size());
    if (n < 1) {
        throw std::domain_error("ground_state_covariance: need at least one frequency");
    }
    GaussianState s;
    s.v = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    s.mean = Eigen::VectorXd::Zero(2 * n);
    s.ref_freqs = Eigen::VectorXd(n);
    for (int k = 0; k < n; ++k) {
        const double w = freqs[k];
        if (!(w > 0.0)) {
            throw std::domain_error("ground_state_covariance: frequencies must be positive");
        }
        s.v(k, k) = 0.5 * w;
        s.v(n + k, n + k) = 0.5 / w;
        s.ref_freqs(k) = w;
    }
    return s;
}

double physicality_defect(const GaussianState& state)
{
    const int n = state.modes();
    const Eigen::MatrixXd c = commutation_matrix(n);
    Eigen::MatrixXcd m = state.v.cast<std::complex<double>>();
    m += std::complex<double>(0.0, 0.5) * c.cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    return es.eigenvalues().minCoeff();
}

namespace detail {

void rk4_transfer_step(const HamiltonianSource& h_of_t, double t, double dt,
                       Eigen::MatrixXd& m, Eigen::MatrixXd& hw,
                       Eigen::MatrixXd& k1, Eigen::MatrixXd& k2,
                       Eigen::MatrixXd& k3, Eigen::MatrixXd& k4)
{
    const int n = static_cast<int>(m.rows()) / 2;
    // dM/dt = C h M; C h is assembled by row blocks to avoid the product with C.
    auto deriv = [&](double tt, const Eigen::MatrixXd& mm, Eigen::MatrixXd& out) {
        h_of_t(tt, hw);
        out.topRows(n).noalias() = -hw.bottomRows(n) * mm;
        out.bottomRows(n).noalias() = hw.topRows(n) * mm;
    };
    deriv(t, m, k1);
    Eigen::MatrixXd tmp = m + 0.5 * dt * k1;
    deriv(t + 0.5 * dt, tmp, k2);
    tmp = m + 0.5 * dt * k2;
    deriv(t + 0.5 * dt, tmp, k3);
    tmp = m + dt * k3;
    deriv(t + dt, tmp, k4);
    m += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace detail

TransferMatrix integrate_transfer(const HamiltonianSource& h_of_t, int n_modes,
                                  double t0, double t1, double dt)
{
    if (!(t1 > t0)) {
        throw std::invalid_argument("integrate_transfer: t1 must be greater than t0");
    }
    if (!(dt > 0.0)) {
        throw std::invalid_argument("integrate_transfer: dt must be positive");
    }
    const int dim = 2 * n_modes;
    const long long n_steps = std::max(1LL, std::llround((t1 - t0) / dt));
    const double h = (t1 - t0) / static_cast<double>(n_steps);

    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(dim, dim);
    Eigen::MatrixXd hw(dim, dim), k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim);
    for (long long i = 0; i < n_steps; ++i) {
        const double t = t0 + static_cast<double>(i) * h;
        detail::rk4_transfer_step(h_of_t, t, h, m, hw, k1, k2, k3, k4);
    }

    const double defect = symplectic_defect(m);
    if (defect > 1e-6) {
        std::ostringstream os;
        os << "integrate_transfer: symplecticity defect " << defect
           << " exceeds 1e-6; reduce dt";
        throw numerical_error(os.str());
    }
    return TransferMatrix{std::move(m), t0, t1};
}

GaussianState evolve_covariance(const TransferMatrix& m, const GaussianState& state)
{
    if (m.m.rows() != state.v.rows()) {
        throw std::invalid_argument("evolve_covariance: dimension mismatch");
    }
    GaussianState out;
    out.v = m.m * state.v * m.m.transpose();
    out.mean = m.m * state.mean;
    out.ref_freqs = state.ref_freqs;
    return out;
}

double occupation_number(const GaussianState& state, int mode_index, double omega_ref)
{
    const int n = state.modes();
    if (mode_index < 0 || mode_index >= n) {
        throw std::invalid_argument("occupation_number: mode index out of range");
    }
    if (!(omega_ref > 0.0)) {
        throw std::domain_error("occupation_number: omega_ref must be positive");
    }
    const double vpp = state.v(mode_index, mode_index);
    const double vxx = state.v(n + mode_index, n + mode_index);
    const double mp = state.mean(mode_index);
    const double mx = state.mean(n + mode_index);
    return (0.5 * vpp + 0.5 * omega_ref * omega_ref * vxx) / omega_ref - 0.5 +
           (mp * mp + omega_ref * omega_ref * mx * mx) / (2.0 * omega_ref);
}

} // namespace ggsep
