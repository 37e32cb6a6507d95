#include "spinsim/spin_core.hpp"

#include <cmath>

namespace spinsim {

namespace {

void check_n_spins(int n_spins) {
    if (n_spins < 1) throw Error(errc::BAD_ARGUMENT, "n_spins must be >= 1, got " + std::to_string(n_spins));
    if (n_spins > kMaxSpins)
        throw Error(errc::DIM_TOO_LARGE, "n_spins " + std::to_string(n_spins) + " exceeds dense limit " +
                                              std::to_string(kMaxSpins));
}

// bit of `site` inside basis index s, big-endian: site 0 is the most
// significant bit. Bit value 0 means spin up.
inline int site_mask(int site, int n_spins) { return 1 << (n_spins - 1 - site); }

} // namespace

Axis base_axis(SignedAxis a) {
    switch (a) {
        case SignedAxis::PlusX:
        case SignedAxis::MinusX: return Axis::X;
        default: return Axis::Y;
    }
}

double axis_sign(SignedAxis a) {
    return (a == SignedAxis::MinusX || a == SignedAxis::MinusY) ? -1.0 : 1.0;
}

const char* to_string(SignedAxis a) {
    switch (a) {
        case SignedAxis::PlusX: return "+x";
        case SignedAxis::MinusX: return "-x";
        case SignedAxis::PlusY: return "+y";
        case SignedAxis::MinusY: return "-y";
    }
    return "?";
}

SignedAxis signed_axis_from_string(const std::string& s) {
    if (s == "+x" || s == "x") return SignedAxis::PlusX;
    if (s == "-x") return SignedAxis::MinusX;
    if (s == "+y" || s == "y") return SignedAxis::PlusY;
    if (s == "-y") return SignedAxis::MinusY;
    throw Error(errc::BAD_ARGUMENT, "unknown axis '" + s + "' (want +x, -x, +y, -y)");
}

SpinState SpinState::zero_basis(int n_spins) {
    check_n_spins(n_spins);
    SpinState s;
    s.n_spins = n_spins;
    s.amplitudes = VecC::Zero(1L << n_spins);
    s.amplitudes(0) = cxd(1.0, 0.0);
    return s;
}

void SpinState::check() const {
    check_n_spins(n_spins);
    if (amplitudes.size() != (1L << n_spins))
        throw Error(errc::BAD_ARGUMENT, "state has " + std::to_string(amplitudes.size()) +
                                            " amplitudes, expected 2^" + std::to_string(n_spins));
    if (std::abs(norm() - 1.0) > 1e-6)
        throw Error(errc::BAD_ARGUMENT, "state norm " + std::to_string(norm()) + " is not 1");
}

void HermitianOperator::check() const {
    check_n_spins(n_spins);
    const long d = 1L << n_spins;
    if (matrix.rows() != d || matrix.cols() != d)
        throw Error(errc::BAD_ARGUMENT, "operator is " + std::to_string(matrix.rows()) + "x" +
                                            std::to_string(matrix.cols()) + ", expected " + std::to_string(d));
    double scale = matrix.cwiseAbs().maxCoeff();
    double dev = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
    if (dev > 1e-12 * std::max(scale, 1.0))
        throw Error(errc::NON_HERMITIAN, "max |M - M^dag| = " + std::to_string(dev));
}

HermitianOperator pauli_embed(Axis axis, int site, int n_spins) {
    check_n_spins(n_spins);
    if (site < 0 || site >= n_spins)
        throw Error(errc::BAD_ARGUMENT,
                    "site " + std::to_string(site) + " out of range for " + std::to_string(n_spins) + " spins");
    const long d = 1L << n_spins;
    const int mask = site_mask(site, n_spins);
    HermitianOperator op{n_spins, MatC::Zero(d, d)};
    for (long s = 0; s < d; ++s) {
        const bool up = (s & mask) == 0;
        switch (axis) {
            case Axis::X: op.matrix(s ^ mask, s) = cxd(1, 0); break;
            case Axis::Y: op.matrix(s ^ mask, s) = up ? cxd(0, 1) : cxd(0, -1); break;
            case Axis::Z: op.matrix(s, s) = up ? cxd(1, 0) : cxd(-1, 0); break;
        }
    }
    return op;
}

HermitianOperator collective_pauli(Axis axis, int n_spins) {
    check_n_spins(n_spins);
    const long d = 1L << n_spins;
    HermitianOperator op{n_spins, MatC::Zero(d, d)};
    for (int i = 0; i < n_spins; ++i) op.matrix += pauli_embed(axis, i, n_spins).matrix;
    return op;
}

SpinState plus_state(int n_spins) {
    check_n_spins(n_spins);
    SpinState s;
    s.n_spins = n_spins;
    const long d = 1L << n_spins;
    s.amplitudes = VecC::Constant(d, cxd(std::pow(2.0, -0.5 * n_spins), 0.0));
    return s;
}

double expect_sx(const SpinState& state) {
    const long d = state.amplitudes.size();
    double total = 0.0;
    for (int i = 0; i < state.n_spins; ++i) {
        const int mask = site_mask(i, state.n_spins);
        double acc = 0.0;
        for (long s = 0; s < d; ++s)
            acc += (std::conj(state.amplitudes(s)) * state.amplitudes(s ^ mask)).real();
        total += acc;
    }
    return total / state.n_spins;
}

UnitaryPropagator propagator(const HermitianOperator& H, double dt) {
    if (!std::isfinite(dt))
        throw Error(errc::BAD_ARGUMENT, "propagator needs a finite dt, got " + std::to_string(dt));
    H.check();
    EigenSystem es = EigenSystem::of(H);
    return UnitaryPropagator{H.n_spins, es.unitary(dt)};
}

SpinState apply_rotation(const SpinState& state, SignedAxis axis, double angle) {
    const double half = 0.5 * angle * axis_sign(axis);
    const cxd c(std::cos(half), 0.0);
    // exp(-i half sigma) per site: off-diagonal entries for x are -i sin,
    // for y they are -+ sin (a real rotation block).
    const cxd from_up = (base_axis(axis) == Axis::X) ? cxd(0.0, -std::sin(half)) : cxd(std::sin(half), 0.0);
    const cxd from_down = (base_axis(axis) == Axis::X) ? cxd(0.0, -std::sin(half)) : cxd(-std::sin(half), 0.0);

    SpinState out = state;
    const long d = out.amplitudes.size();
    for (int i = 0; i < state.n_spins; ++i) {
        const int mask = site_mask(i, state.n_spins);
        for (long s = 0; s < d; ++s) {
            if (s & mask) continue;  // visit each (up, down) pair once
            const long sd = s | mask;
            const cxd a = out.amplitudes(s);
            const cxd b = out.amplitudes(sd);
            out.amplitudes(s) = c * a + from_down * b;
            out.amplitudes(sd) = from_up * a + c * b;
        }
    }
    return out;
}

SpinState apply(const UnitaryPropagator& U, const SpinState& state) {
    SpinState out = state;
    out.amplitudes = U.matrix * state.amplitudes;
    return out;
}

EigenSystem EigenSystem::of(const HermitianOperator& H) {
    H.check();
    Eigen::SelfAdjointEigenSolver<MatC> solver(H.matrix);
    if (solver.info() != Eigen::Success)
        throw Error(errc::BAD_ARGUMENT, "eigendecomposition failed");
    EigenSystem es;
    es.n_spins = H.n_spins;
    es.eigenvalues = solver.eigenvalues();
    es.eigenvectors = solver.eigenvectors();
    return es;
}

VecC EigenSystem::evolve(const VecC& amplitudes, double t) const {
    VecC c = eigenvectors.adjoint() * amplitudes;
    for (long k = 0; k < c.size(); ++k) c(k) *= std::polar(1.0, -eigenvalues(k) * t);
    return eigenvectors * c;
}

MatC EigenSystem::unitary(double t) const {
    VecC phases(eigenvalues.size());
    for (long k = 0; k < phases.size(); ++k) phases(k) = std::polar(1.0, -eigenvalues(k) * t);
    return eigenvectors * phases.asDiagonal() * eigenvectors.adjoint();
}

VecD collective_z_diagonal(int n_spins) {
    check_n_spins(n_spins);
    const long d = 1L << n_spins;
    VecD diag(d);
    for (long s = 0; s < d; ++s) {
        int downs = 0;
        for (int i = 0; i < n_spins; ++i)
            if (s & (1L << i)) ++downs;
        diag(s) = n_spins - 2 * downs;
    }
    return diag;
}

} // namespace spinsim
