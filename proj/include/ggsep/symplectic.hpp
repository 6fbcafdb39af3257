#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "ggsep/errors.hpp"

// Gaussian-state and transfer-matrix machinery for evolution under
// time-dependent quadratic Hamiltonians H = 1/2 xi^T h(t) xi with the
// phase-space ordering xi = (p_1..p_N, x_1..x_N).
namespace ggsep {

/// Writes the instantaneous Hamiltonian matrix h(t) (2N x 2N, symmetric)
/// into the provided storage. Called at every integrator stage.
using HamiltonianSource = std::function<void(double t, Eigen::Ref<Eigen::MatrixXd> h)>;

/// Commutation matrix C = [[0, -I], [I, 0]] for n_modes modes.
Eigen::MatrixXd commutation_matrix(int n_modes);

/// In-place product C * a for the block structure of C (no temporary).
Eigen::MatrixXd apply_commutation(const Eigen::MatrixXd& a);

/// max |M C M^T - C|, the symplecticity defect of a 2N x 2N matrix.
double symplectic_defect(const Eigen::MatrixXd& m);

/// Quadratic Hamiltonian coefficient matrix. Momentum block entries are
/// dimensionless, position block rad^2/us^2, cross blocks rad/us.
struct QuadraticForm {
    Eigen::MatrixXd h;

    int modes() const { return static_cast<int>(h.rows()) / 2; }
    /// Throws std::invalid_argument if not symmetric (1e-12 relative) or odd-sized.
    void validate() const;
};

/// Symplectic map of phase-space operators from t_start to t_end.
struct TransferMatrix {
    Eigen::MatrixXd m;
    double t_start = 0.0;
    double t_end = 0.0;

    int modes() const { return static_cast<int>(m.rows()) / 2; }
};

/// Gaussian state: covariance matrix, phase-space mean and the reference
/// frequencies its modes were prepared at (all in mass-weighted hbar=1 units).
struct GaussianState {
    Eigen::MatrixXd v;
    Eigen::VectorXd mean;
    Eigen::VectorXd ref_freqs;

    int modes() const { return static_cast<int>(v.rows()) / 2; }
};

/// Ground state of N uncoupled modes: V = diag(w_k/2 .. , 1/(2 w_k) ..),
/// zero mean. Throws std::domain_error for non-positive frequencies.
GaussianState ground_state_covariance(const std::vector<double>& freqs);

/// Most negative eigenvalue of V + i C / 2; >= -tol for a physical state.
double physicality_defect(const GaussianState& state);

/// Integrates dM/dt = C h(t) M from t0 to t1 with fixed-step RK4.
/// The step is (t1-t0)/n with n = round((t1-t0)/dt), so segment ends are
/// hit exactly. Throws numerical_error if the symplecticity defect of the
/// result exceeds 1e-6.
TransferMatrix integrate_transfer(const HamiltonianSource& h_of_t, int n_modes,
                                  double t0, double t1, double dt);

/// V' = M V M^T, mean' = M mean. Reference frequencies are preserved.
GaussianState evolve_covariance(const TransferMatrix& m, const GaussianState& state);

/// Mean occupation of one mode measured against omega_ref, including the
/// energy carried by the phase-space mean:
///   (V_pp/2 + w^2 V_xx/2)/w - 1/2 + (mean_p^2 + w^2 mean_x^2)/(2w).
double occupation_number(const GaussianState& state, int mode_index, double omega_ref);

namespace detail {
/// One RK4 step of dM/dt = C h(t) M, shared with the co-integrating
/// protocol dynamics. k1..k4 and hw are caller-provided workspaces.
void rk4_transfer_step(const HamiltonianSource& h_of_t, double t, double dt,
                       Eigen::MatrixXd& m, Eigen::MatrixXd& hw,
                       Eigen::MatrixXd& k1, Eigen::MatrixXd& k2,
                       Eigen::MatrixXd& k3, Eigen::MatrixXd& k4);
} // namespace detail

} // namespace ggsep
