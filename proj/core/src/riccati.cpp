#include "pqr/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "pqr/errors.hpp"
#include "pqr/schur_nway.hpp"

namespace pqr {
namespace {

using cdouble = std::complex<double>;

void check_shapes(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r) {
    const Index n = a.rows();
    require(a.cols() == n, ErrorCode::DimensionMismatch, "care: A is not square");
    require(b.rows() == n, ErrorCode::DimensionMismatch, "care: B has wrong row count");
    require(q.rows() == n && q.cols() == n, ErrorCode::DimensionMismatch, "care: Q is not n x n");
    require(r.rows() == b.cols() && r.cols() == b.cols(), ErrorCode::DimensionMismatch,
            "care: R is not m x m");
}

Eigen::LLT<Matrix> factor_r(const Matrix& r) {
    Eigen::LLT<Matrix> llt(r);
    require(llt.info() == Eigen::Success, ErrorCode::InvalidArgument, "care: R is not positive definite");
    return llt;
}

Matrix symmetrized(const Matrix& x) { return (0.5 * (x + x.transpose())).eval(); }

Matrix residual_matrix(const Matrix& a, const Matrix& g, const Matrix& q, const Matrix& v) {
    return a.transpose() * v + v * a - v * g * v + q;
}

}  // namespace

double care_residual(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r,
                     const Matrix& v) {
    check_shapes(a, b, q, r);
    const auto llt = factor_r(r);
    const Matrix btv = b.transpose() * v;
    const Matrix res = a.transpose() * v + v * a - btv.transpose() * llt.solve(btv) + q;
    return res.norm();
}

double spectral_abscissa(const Matrix& a) {
    Eigen::EigenSolver<Matrix> es(a, false);
    return es.eigenvalues().real().maxCoeff();
}

bool is_stabilizable(const Matrix& a, const Matrix& b, double tolerance) {
    const Index n = a.rows();
    Eigen::EigenSolver<Matrix> es(a, false);
    const double scale = std::max(1.0, std::max(a.norm(), b.norm()));
    for (Index k = 0; k < n; ++k) {
        const cdouble lambda = es.eigenvalues()[k];
        if (lambda.real() < 0.0) continue;
        Eigen::MatrixXcd pbh(n, n + b.cols());
        pbh.leftCols(n) = a.cast<cdouble>() - lambda * Eigen::MatrixXcd::Identity(n, n);
        pbh.rightCols(b.cols()) = b.cast<cdouble>();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
        if (svd.singularValues()[n - 1] <= tolerance * scale) return false;
    }
    return true;
}

AreSolution care_solve(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r) {
    check_shapes(a, b, q, r);
    const Index n = a.rows();
    require(a.allFinite() && b.allFinite() && q.allFinite() && r.allFinite(),
            ErrorCode::InvalidArgument, "care: non-finite data");
    require((q - q.transpose()).norm() <= 1e-10 * std::max(1.0, q.norm()), ErrorCode::InvalidArgument,
            "care: Q is not symmetric");
    require((r - r.transpose()).norm() <= 1e-10 * std::max(1.0, r.norm()), ErrorCode::InvalidArgument,
            "care: R is not symmetric");
    const auto r_llt = factor_r(r);

    if (!is_stabilizable(a, b))
        fail(ErrorCode::Unstabilizable, "(A, B) fails the PBH stabilizability test");

    const Matrix g = b * r_llt.solve(b.transpose());
    Matrix h(2 * n, 2 * n);
    h << a, -g, -q, -a.transpose();
    Eigen::EigenSolver<Matrix> es(h, true);
    require(es.info() == Eigen::Success, ErrorCode::Unstabilizable, "Hamiltonian eigensolver failed");

    Eigen::MatrixXcd stable(2 * n, n);
    Index found = 0;
    for (Index k = 0; k < 2 * n; ++k) {
        if (es.eigenvalues()[k].real() < 0.0) {
            if (found == n) {
                found = n + 1;
                break;
            }
            stable.col(found++) = es.eigenvectors().col(k);
        }
    }
    if (found != n)
        fail(ErrorCode::Unstabilizable, "Hamiltonian stable subspace has dimension " +
                                            std::to_string(found) + ", expected " + std::to_string(n));

    Eigen::JacobiSVD<Eigen::MatrixXcd> basis_svd(stable);
    const auto& sv = basis_svd.singularValues();
    if (sv[n - 1] <= 1e-10 * sv[0])
        fail(ErrorCode::Unstabilizable, "stable eigenvector set is rank deficient");

    const Eigen::MatrixXcd x11 = stable.topRows(n);
    const Eigen::MatrixXcd x21 = stable.bottomRows(n);
    Eigen::JacobiSVD<Eigen::MatrixXcd> x11_svd(x11);
    const auto& s11 = x11_svd.singularValues();
    if (s11[n - 1] == 0.0 || s11[0] / s11[n - 1] > 1e12)
        fail(ErrorCode::Unstabilizable, "X11 is singular (condition number above 1e12)");

    // V = X21 X11^{-1}  <=>  X11^T V^T = X21^T
    const Eigen::MatrixXcd vt = x11.transpose().partialPivLu().solve(x21.transpose());
    Matrix v = vt.transpose().real();
    v = symmetrized(v);

    AreSolution sol;
    double residual = care_residual(a, b, q, r, v);
    sol.residual_history.push_back(residual);
    const double target = 1e-9 * std::max(1.0, q.norm());

    // Newton-Kleinman in defect-correction form: (A - G V)^T D + D (A - G V) + Res(V) = 0.
    // Iterates continue past non-improving steps; only improvements are accepted.
    // Once the target holds, polishing stops at the first step that does not improve.
    Matrix iterate = v;
    for (int step = 0; step < 10; ++step) {
        const Matrix ak = a - g * iterate;
        if (spectral_abscissa(ak) >= 0.0) break;
        Matrix delta;
        try {
            delta = lyap2_solve(ak, residual_matrix(a, g, q, iterate));
        } catch (const Error&) {
            break;
        }
        iterate += delta;
        iterate = symmetrized(iterate);
        const double res = care_residual(a, b, q, r, iterate);
        if (!std::isfinite(res)) break;
        if (res < residual) {
            v = iterate;
            residual = res;
            sol.residual_history.push_back(residual);
        } else if (residual <= target) {
            break;
        }
    }
    if (!(residual <= target))
        fail(ErrorCode::RefinementStagnation, "ARE residual " + format_number(residual) +
                                                  " above target " + format_number(target));

    sol.V2 = std::move(v);
    sol.K1 = -r_llt.solve(b.transpose() * sol.V2);
    sol.residual_norm = residual;

    if (spectral_abscissa(a + b * sol.K1) >= 0.0)
        fail(ErrorCode::Unstabilizable, "closed-loop matrix A + B K1 is not stable");
    return sol;
}

}  // namespace pqr
