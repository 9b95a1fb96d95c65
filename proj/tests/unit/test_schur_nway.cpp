#include <algorithm>
#include <complex>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pqr/memory_guard.hpp"
#include "pqr/models.hpp"
#include "pqr/schur_nway.hpp"

namespace pqr {
namespace {

using namespace pqr::testing;
using cdouble = std::complex<double>;

void expect_schur_invariants(const Matrix& a, const SchurForm& sf) {
    const Index n = a.rows();
    const Eigen::MatrixXcd recon = sf.U * sf.T * sf.U.adjoint();
    EXPECT_LE((recon - a.cast<cdouble>()).norm(), 1e-10 * std::max(1e-300, a.norm()));
    EXPECT_LE((sf.U.adjoint() * sf.U - Eigen::MatrixXcd::Identity(n, n)).norm(), 1e-12);
    for (Index j = 0; j < n; ++j)
        for (Index i = j + 1; i < n; ++i) EXPECT_LE(std::abs(sf.T(i, j)), 1e-12 * sf.T.norm());
}

std::vector<cdouble> sorted(std::vector<cdouble> v) {
    std::sort(v.begin(), v.end(), [](cdouble a, cdouble b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return v;
}

TEST(Schur, DiagonalInput) {
    const Matrix a = Eigen::Vector2d(-1, -2).asDiagonal();
    const SchurForm sf = schur_decompose(a);
    expect_schur_invariants(a, sf);
    auto ev = sorted({sf.T(0, 0), sf.T(1, 1)});
    EXPECT_NEAR(std::abs(ev[0] - cdouble(-2, 0)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(ev[1] - cdouble(-1, 0)), 0.0, 1e-14);
    EXPECT_LE(std::abs(std::abs(sf.U(0, 0)) + std::abs(sf.U(0, 1)) - 1.0), 1e-12);
}

TEST(Schur, RotationHasImaginaryPair) {
    Matrix a(2, 2);
    a << 0, 1, -1, 0;
    const SchurForm sf = schur_decompose(a);
    expect_schur_invariants(a, sf);
    auto ev = sorted({sf.T(0, 0), sf.T(1, 1)});
    EXPECT_LE(std::abs(ev[0] - cdouble(0, -1)), 1e-12);
    EXPECT_LE(std::abs(ev[1] - cdouble(0, 1)), 1e-12);
}

// Characteristic polynomial of the Lorenz linear part, expanded by hand:
// (s + 8/3) (s^2 + 11 s - 270), whose roots come from the companion matrix.
TEST(Schur, LorenzMatchesCompanionOracle) {
    const Matrix a = lorenz().system.A;
    const SchurForm sf = schur_decompose(a);
    expect_schur_invariants(a, sf);
    const double b = 8.0 / 3.0;
    const double c2 = 11.0 + b, c1 = 11.0 * b - 270.0, c0 = -270.0 * b;
    Matrix companion = Matrix::Zero(3, 3);
    companion(0, 2) = -c0;
    companion(1, 2) = -c1;
    companion(2, 2) = -c2;
    companion(1, 0) = 1.0;
    companion(2, 1) = 1.0;
    Eigen::EigenSolver<Matrix> es(companion, false);
    std::vector<cdouble> want, got;
    for (Index i = 0; i < 3; ++i) {
        want.push_back(es.eigenvalues()[i]);
        got.push_back(sf.T(i, i));
    }
    want = sorted(want);
    got = sorted(got);
    for (int i = 0; i < 3; ++i) EXPECT_LE(std::abs(want[i] - got[i]), 1e-10);
}

TEST(Schur, RandomInvariants) {
    Rng rng(21);
    for (Index n = 1; n <= 12; ++n) {
        const Matrix a = random_matrix(rng, n, n);
        const SchurForm sf = schur_decompose(a);
        expect_schur_invariants(a, sf);
        EXPECT_EQ(sf.source_hash, matrix_hash(a));
    }
}

TEST(Schur, RejectsNonFinite) {
    Matrix a = Matrix::Identity(2, 2);
    a(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(schur_decompose(a), Error);
}

TEST(NwaySolve, ScalarDegreeOne) {
    const SchurForm sf = schur_decompose(Matrix::Constant(1, 1, -2.0));
    const ModeTensor v = nway_solve(sf, 1, ModeTensor::cube(1, 1, Vector::Constant(1, 4.0)));
    EXPECT_NEAR(v.entries()[0], -2.0, 1e-15);
}

TEST(NwaySolve, DiagonalDegreeTwo) {
    const SchurForm sf = schur_decompose(Eigen::Vector2d(-1, -2).asDiagonal());
    const Vector v = nway_solve(sf, 2, ModeTensor::cube(2, 2, Vector::Ones(4))).entries();
    Vector want(4);
    want << -0.5, -1.0 / 3.0, -1.0 / 3.0, -0.25;
    EXPECT_LE((v - want).norm(), 1e-15);
}

TEST(NwaySolve, ThreeWayMatchesDenseSolve) {
    Rng rng(22);
    const Matrix a = random_stable(rng, 3);
    const Vector b = random_vector(rng, 27);
    const Vector v = nway_solve(schur_decompose(a), 3, ModeTensor::cube(3, 3, b)).entries();
    const Vector want = naive_lyap(a, 3, 3).partialPivLu().solve(b);
    EXPECT_LE(rel_err(v, want), 1e-9);
}

TEST(NwaySolve, DenseOracleRandomSweep) {
    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = 1 + trial % 4;
        const int d = 1 + (trial / 4) % 4;
        const Matrix a = random_stable(rng, n, 0.1 + 0.2 * (trial % 3));
        const Vector b = random_vector(rng, ipow(n, d));
        const Vector v = nway_solve(schur_decompose(a), d, ModeTensor::cube(n, d, b)).entries();
        const Vector want = naive_lyap(a, n, d).partialPivLu().solve(b);
        ASSERT_LE(rel_err(v, want), 1e-9) << "trial " << trial;
    }
}

TEST(NwaySolve, VerifyModeChecksResidualPivotsAndWork) {
    Rng rng(24);
    for (Index n = 1; n <= 5; ++n)
        for (int d = 1; d <= 5; ++d) {
            const Matrix a = random_stable(rng, n);
            const Vector b = random_vector(rng, ipow(n, d));
            NwaySolveStats stats;
            const ModeTensor v = nway_solve(schur_decompose(a), d, ModeTensor::cube(n, d, b), {true}, &stats);
            const Vector back = lyap_sum_apply(a, d, v).entries();
            EXPECT_LE((back - b).norm(), 1e-9 * b.norm());
            EXPECT_LE(static_cast<double>(stats.multiply_adds), 4.0 * d * std::pow(double(n), d + 1));
            Eigen::EigenSolver<Matrix> es(a, false);
            const double delta = -es.eigenvalues().real().maxCoeff();
            EXPECT_GE(stats.min_pivot, d * delta * (1.0 - 1e-10));
            EXPECT_LE(stats.residual_ratio, 1e-9);
            EXPECT_LE(stats.imag_ratio, 1e-9);
        }
}

TEST(NwaySolve, ComplexEigenvaluesGiveRealSolution) {
    Matrix a(2, 2);
    a << -1, 3, -3, -1;
    const Vector b = Vector::LinSpaced(8, 1, 8);
    const ModeTensor v = nway_solve(schur_decompose(a), 3, ModeTensor::cube(2, 3, b), {true});
    EXPECT_LE((lyap_sum_apply(a, 3, v).entries() - b).norm(), 1e-12 * b.norm());
}

TEST(NwaySolve, ReflectedEigenvaluesRejected) {
    const Matrix a = Eigen::Vector2d(1, -1).asDiagonal();
    EXPECT_TRUE(throws_code([&] { nway_solve(schur_decompose(a), 2, ModeTensor::cube(2, 2, Vector::Ones(4))); },
                            ErrorCode::EigenvalueSumNearZero));
}

TEST(NwaySolve, WrongModeCount) {
    const SchurForm sf = schur_decompose(-Matrix::Identity(2, 2));
    EXPECT_TRUE(throws_code([&] { nway_solve(sf, 3, ModeTensor::cube(2, 2, Vector::Ones(4))); },
                            ErrorCode::DimensionMismatch));
}

TEST(NwaySolve, BudgetOverflow) {
    const SchurForm sf = schur_decompose(-Matrix::Identity(4, 4));
    const ModeTensor b = ModeTensor::cube(4, 4, Vector::Ones(256));
    ScopedEntryBudget budget(100);
    EXPECT_TRUE(throws_code([&] { nway_solve(sf, 4, b); }, ErrorCode::SizeOverflow));
}

TEST(Lyap2, ScalarCase) {
    const Matrix v = lyap2_solve(Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, 2.0));
    EXPECT_NEAR(v(0, 0), 1.0, 1e-15);
}

TEST(Lyap2, DiagonalCase) {
    const Matrix v = lyap2_solve(Eigen::Vector2d(-1, -2).asDiagonal(), Matrix::Identity(2, 2));
    Matrix want = Matrix::Zero(2, 2);
    want(0, 0) = 0.5;
    want(1, 1) = 0.25;
    EXPECT_LE((v - want).norm(), 1e-15);
}

TEST(Lyap2, RandomResidualAndSymmetry) {
    Rng rng(25);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix a = random_stable(rng, 4);
        const Matrix c0 = random_matrix(rng, 4, 4);
        const Matrix c = c0 + c0.transpose();
        const Matrix v = lyap2_solve(a, c);
        EXPECT_LE((a.transpose() * v + v * a + c).norm(), 1e-10);
        EXPECT_EQ(v, v.transpose());
    }
}

TEST(Lyap2, ShapeChecks) {
    EXPECT_TRUE(throws_code([] { lyap2_solve(Matrix::Ones(2, 3), Matrix::Ones(2, 2)); }, ErrorCode::DimensionMismatch));
    EXPECT_TRUE(throws_code([] { lyap2_solve(-Matrix::Identity(2, 2), Matrix::Ones(3, 3)); },
                            ErrorCode::DimensionMismatch));
}

}  // namespace
}  // namespace pqr
