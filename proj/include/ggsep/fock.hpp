#pragma once

#include <vector>

#include "ggsep/symplectic.hpp"

// Truncated number-basis representation of Gaussian states, used to
// compute P_n / P_{n,m} tables and to validate covariance occupations.
namespace ggsep {

/// Number-basis populations for one or two modes. Two-mode entries are
/// stored row-major, index = n_a * (n_max + 1) + n_b. The truncation
/// defect is the probability mass that leaked above n_max (the internal
/// working space is twice as large, so populations + defect sum to 1).
struct FockDistribution {
    int n_modes = 1;
    int n_max = 0;
    std::vector<double> populations;
    double truncation_defect = 0.0;

    double p(int n) const;
    double p(int n_a, int n_b) const;
    double total() const;
    double mean_occupation(int mode) const;
};

/// Closed-form squeezed-vacuum populations,
/// P_{2n} = (2n)! tanh^{2n} r / (4^n (n!)^2 cosh r), odd terms zero.
FockDistribution squeezed_vacuum_populations(double r, int n_max);

/// Populations of a Gaussian state (including its mean displacement):
/// Bloch-Messiah factors of the covariance relative to the ground state
/// at ref_freqs are applied to the vacuum as matrix exponentials of
/// truncated ladder operators. Throws numerical_error if the truncation
/// defect reaches 1e-6.
FockDistribution gaussian_to_fock(const GaussianState& state,
                                  const std::vector<double>& ref_freqs, int n_max);

/// Same with an extra phase-space displacement added to the state mean.
FockDistribution displaced_populations(const GaussianState& state,
                                       const Eigen::VectorXd& displacement,
                                       const std::vector<double>& ref_freqs,
                                       int n_max);

/// gaussian_to_fock with automatic n_max doubling (cap 160) on truncation
/// failure.
FockDistribution gaussian_to_fock_adaptive(const GaussianState& state,
                                           const std::vector<double>& ref_freqs,
                                           int n_max);

} // namespace ggsep
