#pragma once
#include <Eigen/Dense>

#include "spinsim/spin_core.hpp"

namespace spinsim {

// Symmetric pairwise dipolar strengths for one cluster, angular 1/s.
struct CouplingMatrix {
    int n_spins = 0;
    Eigen::MatrixXd w;   // symmetric, zero diagonal, entries >= 0

    static CouplingMatrix equal(int n_spins, double w0);
    static CouplingMatrix zero(int n_spins);
    void check() const;
    CouplingMatrix scaled(double s) const;
};

struct DriveSettings {
    double omega = 0.0;            // angular 1/s, >= 0
    SignedAxis axis = SignedAxis::PlusX;
};

// H = Sum_{i<j} w_ij [ sigma_i . sigma_j - 2 sigma^z_i sigma^z_j ]
//   = Sum_{i<j} w_ij [ XX + YY - ZZ ]   (two-level NV subspace form)
// Commutes with Sum_i sigma^z_i.
HermitianOperator dipolar_hamiltonian(const CouplingMatrix& couplings);

// H = B Sum_i sigma^z_i (uniform field over the cluster).
HermitianOperator bath_hamiltonian(double B, int n_spins);

// H = Omega Sum_i sigma_i^axis, sign folded in.
HermitianOperator drive_hamiltonian(const DriveSettings& settings, int n_spins);

HermitianOperator total_hamiltonian(const HermitianOperator& dipolar, double B,
                                    const DriveSettings& drive);

// J0 = 52 MHz nm^3 entered bare: 5.2e7 (angular 1/s nm^3).
inline constexpr double kJ0 = 5.2e7;

} // namespace spinsim
