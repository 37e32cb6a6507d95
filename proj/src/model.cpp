#include "spinsim/model.hpp"

#include <cmath>

namespace spinsim {

CouplingMatrix CouplingMatrix::equal(int n_spins, double w0) {
    CouplingMatrix c;
    c.n_spins = n_spins;
    c.w = Eigen::MatrixXd::Constant(n_spins, n_spins, w0);
    c.w.diagonal().setZero();
    c.check();
    return c;
}

CouplingMatrix CouplingMatrix::zero(int n_spins) {
    CouplingMatrix c;
    c.n_spins = n_spins;
    c.w = Eigen::MatrixXd::Zero(n_spins, n_spins);
    c.check();
    return c;
}

void CouplingMatrix::check() const {
    if (n_spins < 1) throw Error(errc::BAD_ARGUMENT, "coupling matrix needs n_spins >= 1");
    if (n_spins > kMaxSpins)
        throw Error(errc::DIM_TOO_LARGE, "coupling matrix for " + std::to_string(n_spins) + " spins");
    if (w.rows() != n_spins || w.cols() != n_spins)
        throw Error(errc::BAD_COUPLING, "coupling matrix shape mismatch");
    for (int i = 0; i < n_spins; ++i) {
        if (w(i, i) != 0.0)
            throw Error(errc::BAD_COUPLING, "nonzero diagonal at site " + std::to_string(i));
        for (int j = i + 1; j < n_spins; ++j)
            if (w(i, j) != w(j, i))
                throw Error(errc::BAD_COUPLING, "asymmetric entry at (" + std::to_string(i) + "," +
                                                    std::to_string(j) + ")");
    }
}

CouplingMatrix CouplingMatrix::scaled(double s) const {
    CouplingMatrix c = *this;
    c.w *= s;
    return c;
}

HermitianOperator dipolar_hamiltonian(const CouplingMatrix& couplings) {
    couplings.check();
    const int n = couplings.n_spins;
    const long d = 1L << n;
    HermitianOperator H{n, MatC::Zero(d, d)};
    // Per pair: diagonal -w on aligned states, +w on anti-aligned, and a
    // flip-flop 2w between the two anti-aligned states.
    for (long s = 0; s < d; ++s) {
        for (int i = 0; i < n; ++i) {
            const long mi = 1L << (n - 1 - i);
            for (int j = i + 1; j < n; ++j) {
                const double wij = couplings.w(i, j);
                if (wij == 0.0) continue;
                const long mj = 1L << (n - 1 - j);
                const bool same = ((s & mi) == 0) == ((s & mj) == 0);
                H.matrix(s, s) += same ? -wij : wij;
                if (!same) H.matrix(s ^ mi ^ mj, s) += 2.0 * wij;
            }
        }
    }
    return H;
}

HermitianOperator bath_hamiltonian(double B, int n_spins) {
    VecD zd = collective_z_diagonal(n_spins);
    const long d = zd.size();
    HermitianOperator H{n_spins, MatC::Zero(d, d)};
    for (long s = 0; s < d; ++s) H.matrix(s, s) = B * zd(s);
    return H;
}

HermitianOperator drive_hamiltonian(const DriveSettings& settings, int n_spins) {
    if (settings.omega < 0)
        throw Error(errc::BAD_ARGUMENT, "drive amplitude must be >= 0");
    auto S = collective_pauli(base_axis(settings.axis), n_spins);
    S.matrix *= settings.omega * axis_sign(settings.axis);
    return S;
}

HermitianOperator total_hamiltonian(const HermitianOperator& dipolar, double B,
                                    const DriveSettings& drive) {
    HermitianOperator H = dipolar;
    if (B != 0.0) H.matrix += bath_hamiltonian(B, dipolar.n_spins).matrix;
    if (drive.omega != 0.0) H.matrix += drive_hamiltonian(drive, dipolar.n_spins).matrix;
    return H;
}

} // namespace spinsim
