#pragma once
#include <complex>
#include <Eigen/Dense>

#include "spinsim/errors.hpp"

namespace spinsim {

using cxd = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using VecD = Eigen::VectorXd;

inline constexpr int kMaxSpins = 10;   // dense 2^10 = 1024 is the ceiling

enum class Axis { X, Y, Z };

// Signed rotation/drive axis. Sign folds into the rotation angle / drive sign.
enum class SignedAxis { PlusX, MinusX, PlusY, MinusY };

Axis base_axis(SignedAxis a);
double axis_sign(SignedAxis a);
const char* to_string(SignedAxis a);
SignedAxis signed_axis_from_string(const std::string& s);

// Normalized state of an n-spin cluster, amplitudes in the computational
// z-basis, big-endian site order (site 0 = leftmost tensor factor).
struct SpinState {
    int n_spins = 0;
    VecC amplitudes;

    static SpinState zero_basis(int n_spins);  // |up...up>
    long dim() const { return amplitudes.size(); }
    double norm() const { return amplitudes.norm(); }
    void check() const;  // throws on bad size / norm
};

struct HermitianOperator {
    int n_spins = 0;
    MatC matrix;   // units: angular frequency (1/s)

    void check() const;  // hermiticity within 1e-12 * max|M|
};

struct UnitaryPropagator {
    int n_spins = 0;
    MatC matrix;
};

// I (x) ... (x) sigma_axis (x) ... (x) I with sigma at `site`.
HermitianOperator pauli_embed(Axis axis, int site, int n_spins);

// Sum_i sigma_axis_i
HermitianOperator collective_pauli(Axis axis, int n_spins);

// Uniform |+x...+x>: amplitude 2^{-n/2} on every basis state; <Sx> = 1.
SpinState plus_state(int n_spins);

// (1/n) Sum_i <sigma^x_i>; computed via bit-flip pairing, O(n 2^n).
double expect_sx(const SpinState& state);

// exp(-i H dt) by self-adjoint eigendecomposition.
UnitaryPropagator propagator(const HermitianOperator& H, double dt);

// Collective instantaneous rotation exp(-i (angle/2) Sum_i sigma_i^axis).
// Applied in O(n 2^n) without forming the 2^n x 2^n matrix.
SpinState apply_rotation(const SpinState& state, SignedAxis axis, double angle);

SpinState apply(const UnitaryPropagator& U, const SpinState& state);

// Cached eigensystem of a Hermitian operator: propagation to any t is a
// diagonal phase in the eigenbasis. Reused across every step that shares H.
struct EigenSystem {
    int n_spins = 0;
    VecD eigenvalues;
    MatC eigenvectors;

    static EigenSystem of(const HermitianOperator& H);
    // exp(-i H t) |psi>
    VecC evolve(const VecC& amplitudes, double t) const;
    MatC unitary(double t) const;
};

// z-parity diagonal: d[s] = Sum_i (+1 if bit_i(s)=up else -1).
// exp(-i B dt Sum sigma_z) is a phase vector over this diagonal.
VecD collective_z_diagonal(int n_spins);

} // namespace spinsim
