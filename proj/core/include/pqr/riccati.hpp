#pragma once

#include <vector>

#include "pqr/kron.hpp"

namespace pqr {

struct AreSolution {
    Matrix V2;  ///< symmetric n x n stabilizing solution
    Matrix K1;  ///< m x n gain, u = K1 x
    double residual_norm = 0.0;
    /// Residual after the Hamiltonian step followed by each accepted Newton step.
    std::vector<double> residual_history;
};

/// Frobenius norm of A^T V + V A - V B R^{-1} B^T V + Q.
double care_residual(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r,
                     const Matrix& v);

/// Largest real part over the eigenvalues of a square matrix.
double spectral_abscissa(const Matrix& a);

/// PBH test: rank [A - lambda I, B] == n for every eigenvalue with Re(lambda) >= 0.
bool is_stabilizable(const Matrix& a, const Matrix& b, double tolerance = 1e-10);

/// Continuous algebraic Riccati equation via the stable invariant subspace
/// of the Hamiltonian, refined with Newton-Kleinman iterations.
///
/// Throws Unstabilizable when (A, B) fails the PBH test, the Hamiltonian
/// does not have exactly n stable eigenvalues, or the stable eigenvectors are
/// rank deficient / ill conditioned. Throws RefinementStagnation when the
/// residual target 1e-9 max(1, ||Q||_F) is not reached.
AreSolution care_solve(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r);

}  // namespace pqr
