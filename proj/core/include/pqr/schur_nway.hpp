#pragma once

#include <cstdint>
#include <limits>

#include <Eigen/Core>

#include "pqr/kron.hpp"

namespace pqr {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Complex Schur factorization A = U T U^* of a real square matrix.
struct SchurForm {
    ComplexMatrix U;
    ComplexMatrix T;
    std::uint64_t source_hash = 0;
    /// The factored matrix, kept for residual verification.
    Matrix source;

    Index n() const noexcept { return T.rows(); }
    ComplexVector eigenvalues() const { return T.diagonal(); }
};

/// FNV-1a over the shape and entries of `a`.
std::uint64_t matrix_hash(const Matrix& a) noexcept;

SchurForm schur_decompose(const Matrix& a);

struct NwaySolveOptions {
    /// Test mode: check the residual, pivot bound, and operation count of
    /// every solve and throw std::logic_error when one is violated.
    bool verify = false;
};

struct NwaySolveStats {
    std::uint64_t multiply_adds = 0;
    double min_pivot = std::numeric_limits<double>::infinity();
    double pivot_threshold = 0.0;
    double imag_ratio = 0.0;
    /// ||L_d(A) v - b|| / ||b||, only filled in when verifying.
    double residual_ratio = std::numeric_limits<double>::quiet_NaN();
};

/// Solves L_d(A) v = b for the matrix A factored in `sf`.
///
/// b is rotated into the Schur basis one mode at a time, the upper-triangular
/// Kronecker-sum system is solved by backward substitution over linear
/// indices, and the result is rotated back. Throws EigenvalueSumNearZero when
/// some sum of d eigenvalues has magnitude below 1e-12 ||T||_F, and
/// NonRealSolution when the back-transformed solution is not real.
ModeTensor nway_solve(const SchurForm& sf, int d, const ModeTensor& b,
                      const NwaySolveOptions& options = {}, NwaySolveStats* stats = nullptr);

/// Solves A^T V + V A + C = 0 for symmetric C; the result is symmetrized.
Matrix lyap2_solve(const Matrix& a, const Matrix& c);

}  // namespace pqr
