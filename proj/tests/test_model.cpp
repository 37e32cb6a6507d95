#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "spinsim/model.hpp"
#include "spinsim/spin_core.hpp"

using namespace spinsim;

namespace {

CouplingMatrix random_couplings(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(50.0, 900.0);
    CouplingMatrix c = CouplingMatrix::zero(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double w = u(rng);
            c.w(i, j) = w;
            c.w(j, i) = w;
        }
    return c;
}

}  // namespace

TEST_CASE("pair hamiltonian eigenvalues are {-w,-w,-w,3w}") {
    double w = 451.0;
    auto H = dipolar_hamiltonian(CouplingMatrix::equal(2, w));
    Eigen::SelfAdjointEigenSolver<MatC> es(H.matrix);
    VecD ev = es.eigenvalues();
    CHECK(ev(0) == doctest::Approx(-w).epsilon(1e-12));
    CHECK(ev(1) == doctest::Approx(-w).epsilon(1e-12));
    CHECK(ev(2) == doctest::Approx(-w).epsilon(1e-12));
    CHECK(ev(3) == doctest::Approx(3 * w).epsilon(1e-12));
}

TEST_CASE("pair matrix elements: XX+YY-ZZ structure") {
    double w = 1.0;
    auto H = dipolar_hamiltonian(CouplingMatrix::equal(2, w));
    // diag(-1,1,1,-1)*w from -ZZ, plus 2w flip-flop off-diagonals from XX+YY
    CHECK(H.matrix(0, 0).real() == doctest::Approx(-1.0));
    CHECK(H.matrix(1, 1).real() == doctest::Approx(1.0));
    CHECK(H.matrix(2, 2).real() == doctest::Approx(1.0));
    CHECK(H.matrix(3, 3).real() == doctest::Approx(-1.0));
    CHECK(H.matrix(1, 2).real() == doctest::Approx(2.0));
    CHECK(H.matrix(2, 1).real() == doctest::Approx(2.0));
    CHECK(std::abs(H.matrix(0, 3)) < 1e-15);
    CHECK(std::abs(H.matrix(0, 1)) < 1e-15);
}

TEST_CASE("pair <Sx>(t) oscillates as cos(4wt)") {
    double w = 377.0;
    auto H = dipolar_hamiltonian(CouplingMatrix::equal(2, w));
    auto es = EigenSystem::of(H);
    auto s = plus_state(2);
    for (double t : {1e-4, 3.7e-4, 9e-4}) {
        VecC amp = es.evolve(s.amplitudes, t);
        SpinState out{2, amp};
        CHECK(expect_sx(out) == doctest::Approx(std::cos(4 * w * t)).epsilon(1e-10));
    }
}

TEST_CASE("dipolar hamiltonian commutes with collective z") {
    auto c = random_couplings(4, 11);
    auto H = dipolar_hamiltonian(c);
    auto Sz = collective_pauli(Axis::Z, 4);
    MatC comm = H.matrix * Sz.matrix - Sz.matrix * H.matrix;
    CHECK(comm.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("isotropic exchange part commutes with total J^2") {
    // sum_ij w_ij sigma_i.sigma_j is a scalar under global rotations, so it
    // commutes with J^2 = (sum_i sigma_i/2)^2 for arbitrary couplings
    int n = 4;
    auto c = random_couplings(n, 29);
    int dim = 1 << n;
    MatC Hiso = MatC::Zero(dim, dim);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (Axis ax : {Axis::X, Axis::Y, Axis::Z})
                Hiso += c.w(i, j) * (pauli_embed(ax, i, n).matrix *
                                     pauli_embed(ax, j, n).matrix);
    MatC J2 = MatC::Zero(dim, dim);
    for (Axis ax : {Axis::X, Axis::Y, Axis::Z}) {
        auto S = collective_pauli(ax, n);
        J2 += 0.25 * S.matrix * S.matrix;
    }
    MatC comm = Hiso * J2 - J2 * Hiso;
    double scale = Hiso.cwiseAbs().maxCoeff() * J2.cwiseAbs().maxCoeff();
    CHECK(comm.cwiseAbs().maxCoeff() / scale < 1e-12);
}

TEST_CASE("collective pi-x rotation leaves dipolar H invariant") {
    auto c = random_couplings(5, 13);
    auto H = dipolar_hamiltonian(c);
    auto Sx = collective_pauli(Axis::X, 5);
    auto U = propagator(Sx, M_PI / 2.0);  // exp(-i pi/2 Sx): collective pi about x
    MatC rotated = U.matrix.adjoint() * H.matrix * U.matrix;
    CHECK((rotated - H.matrix).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("hamiltonian scales exactly with couplings") {
    auto c = random_couplings(3, 17);
    auto H1 = dipolar_hamiltonian(c);
    auto H2 = dipolar_hamiltonian(c.scaled(2.75));
    CHECK((H2.matrix - 2.75 * H1.matrix).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("hamiltonian is hermitian and traceless") {
    auto c = random_couplings(6, 19);
    auto H = dipolar_hamiltonian(c);
    CHECK((H.matrix - H.matrix.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(H.matrix.trace()) < 1e-9);
}

TEST_CASE("bath hamiltonian is B times collective z") {
    double B = 1234.5;
    auto Hb = bath_hamiltonian(B, 3);
    VecD zd = collective_z_diagonal(3);
    for (int i = 0; i < 8; ++i)
        CHECK(Hb.matrix(i, i).real() == doctest::Approx(B * zd(i)));
    // off-diagonal free
    CHECK(std::abs(Hb.matrix(0, 1)) < 1e-15);

    // two spins: diag(2B, 0, 0, -2B)
    auto Hb2 = bath_hamiltonian(B, 2);
    CHECK(Hb2.matrix(0, 0).real() == doctest::Approx(2 * B));
    CHECK(std::abs(Hb2.matrix(1, 1)) < 1e-12);
    CHECK(Hb2.matrix(3, 3).real() == doctest::Approx(-2 * B));
}

TEST_CASE("single spin under constant B: <Sx>(t) = cos(2Bt)") {
    double B = 3100.0;
    auto Hb = bath_hamiltonian(B, 1);
    auto es = EigenSystem::of(Hb);
    auto s = plus_state(1);
    for (double t : {1e-5, 7e-5, 2.3e-4}) {
        VecC amp = es.evolve(s.amplitudes, t);
        CHECK(expect_sx(SpinState{1, amp}) ==
              doctest::Approx(std::cos(2 * B * t)).epsilon(1e-10));
    }
}

TEST_CASE("drive hamiltonian is Omega times collective x") {
    double W = 4524.0;
    auto Hd = drive_hamiltonian(DriveSettings{W, SignedAxis::PlusX}, 2);
    auto Sx = collective_pauli(Axis::X, 2);
    CHECK((Hd.matrix - W * Sx.matrix).cwiseAbs().maxCoeff() < 1e-12);

    // minus axis folds the sign in
    auto Hdm = drive_hamiltonian(DriveSettings{W, SignedAxis::MinusX}, 2);
    CHECK((Hdm.matrix + W * Sx.matrix).cwiseAbs().maxCoeff() < 1e-12);

    // drive angle convention: theta = 2*Omega*t, so a pi pulse
    // lasts t_pi = pi/(2 Omega); check |0> -> |1> population transfer
    auto up = SpinState::zero_basis(1);
    auto H1 = drive_hamiltonian(DriveSettings{W, SignedAxis::PlusX}, 1);
    auto U = propagator(H1, M_PI / (2.0 * W));
    auto out = apply(U, up);
    CHECK(std::norm(out.amplitudes(1)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("total hamiltonian = dipolar + bath + drive") {
    auto c = random_couplings(3, 23);
    double B = 800.0, W = 9000.0;
    auto Hd = dipolar_hamiltonian(c);
    auto H = total_hamiltonian(Hd, B, DriveSettings{W, SignedAxis::PlusY});
    auto Hb = bath_hamiltonian(B, 3);
    auto Hw = drive_hamiltonian(DriveSettings{W, SignedAxis::PlusY}, 3);
    MatC sum = Hd.matrix + Hb.matrix + Hw.matrix;
    CHECK((H.matrix - sum).cwiseAbs().maxCoeff() < 1e-12);

    // zero bath and drive reduce to the dipolar part alone
    auto H0 = total_hamiltonian(Hd, 0.0, DriveSettings{0.0, SignedAxis::PlusX});
    CHECK((H0.matrix - Hd.matrix).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("coupling matrix validation") {
    CouplingMatrix c = CouplingMatrix::zero(3);
    c.w(0, 1) = 5.0;  // asymmetric on purpose
    CHECK_THROWS_AS(c.check(), Error);
    c.w(1, 0) = 5.0;
    CHECK_NOTHROW(c.check());
    c.w(2, 2) = 1.0;  // nonzero diagonal
    CHECK_THROWS_AS(c.check(), Error);
}

TEST_CASE("single spin has zero dipolar hamiltonian") {
    auto H = dipolar_hamiltonian(CouplingMatrix::zero(1));
    CHECK(H.matrix.cwiseAbs().maxCoeff() < 1e-15);
}
