#include "pqr/schur_nway.hpp"

#include <cmath>
#include <complex>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "pqr/detail/mode_product.hpp"
#include "pqr/errors.hpp"
#include "pqr/memory_guard.hpp"

namespace pqr {
namespace {

using cdouble = std::complex<double>;

// Applies the same n x n matrix to every mode of a buffer with d modes of size n.
void rotate_all_modes(const ComplexMatrix& x, int d, Index n, ComplexVector& data,
                      ComplexVector& scratch) {
    Index pre = 1;
    Index post = data.size() / n;
    for (int mode = 0; mode < d; ++mode) {
        detail::apply_mode_raw<cdouble>(x, pre, post, data.data(), scratch.data(), false);
        data.swap(scratch);
        pre *= n;
        post /= n;
    }
}

}  // namespace

std::uint64_t matrix_hash(const Matrix& a) noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* p, std::size_t len) {
        const auto* bytes = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    };
    const Index rows = a.rows();
    const Index cols = a.cols();
    mix(&rows, sizeof rows);
    mix(&cols, sizeof cols);
    mix(a.data(), sizeof(double) * static_cast<std::size_t>(a.size()));
    return h;
}

SchurForm schur_decompose(const Matrix& a) {
    require(a.rows() == a.cols(), ErrorCode::DimensionMismatch, "schur_decompose: matrix is not square");
    require(a.allFinite(), ErrorCode::InvalidArgument, "schur_decompose: non-finite entries");
    Eigen::ComplexSchur<ComplexMatrix> schur(a.rows());
    schur.compute(a.cast<cdouble>(), true);
    if (schur.info() != Eigen::Success)
        fail(ErrorCode::SchurNonConvergence,
             "QR iteration did not converge within " + std::to_string(schur.getMaxIterations()) +
                 " iterations");
    SchurForm sf;
    sf.U = schur.matrixU();
    sf.T = schur.matrixT().triangularView<Eigen::Upper>();
    sf.source_hash = matrix_hash(a);
    sf.source = a;
    return sf;
}

ModeTensor nway_solve(const SchurForm& sf, int d, const ModeTensor& b, const NwaySolveOptions& options,
                      NwaySolveStats* stats) {
    require(d >= 1, ErrorCode::InvalidArgument, "nway_solve: d must be positive");
    const Index n = sf.n();
    require(b.modes() == d, ErrorCode::DimensionMismatch,
            "nway_solve: right-hand side has " + std::to_string(b.modes()) + " modes, expected " +
                std::to_string(d));
    for (Index dim : b.dims())
        require(dim == n, ErrorCode::DimensionMismatch, "nway_solve: mode size differs from n");
    // Two complex work buffers count double against the budget.
    check_entries(saturating_mul(4, static_cast<std::size_t>(b.size())), "nway_solve work buffers");

    NwaySolveStats local;
    const double t_norm = sf.T.norm();
    const double eps = 1e-12 * t_norm;
    local.pivot_threshold = eps;

    ComplexVector w = b.entries().cast<cdouble>();
    ComplexVector scratch(w.size());
    const ComplexMatrix u_adj = sf.U.adjoint();
    rotate_all_modes(u_adj, d, n, w, scratch);

    // Row-major copy of T for the inner coupling loops.
    std::vector<cdouble> t_rows(static_cast<std::size_t>(n * n));
    std::vector<cdouble> diag(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        diag[static_cast<std::size_t>(i)] = sf.T(i, i);
        for (Index j = 0; j < n; ++j) t_rows[static_cast<std::size_t>(i * n + j)] = sf.T(i, j);
    }
    std::vector<Index> strides(static_cast<std::size_t>(d));
    {
        Index s = 1;
        for (int k = d - 1; k >= 0; --k) {
            strides[static_cast<std::size_t>(k)] = s;
            s *= n;
        }
    }

    std::vector<Index> digits(static_cast<std::size_t>(d), n - 1);
    std::uint64_t madds = 0;
    double min_pivot = std::numeric_limits<double>::infinity();
    cdouble* data = w.data();
    for (Index idx = w.size() - 1; idx >= 0; --idx) {
        cdouble acc = data[idx];
        cdouble pivot = 0.0;
        for (int k = 0; k < d; ++k) {
            const Index i = digits[static_cast<std::size_t>(k)];
            const Index s = strides[static_cast<std::size_t>(k)];
            pivot += diag[static_cast<std::size_t>(i)];
            const cdouble* row = t_rows.data() + i * n;
            const cdouble* tail = data + idx;
            for (Index j = i + 1; j < n; ++j) acc -= row[j] * tail[(j - i) * s];
            madds += static_cast<std::uint64_t>(n - 1 - i);
        }
        const double mag = std::abs(pivot);
        if (mag < min_pivot) min_pivot = mag;
        if (!(mag >= eps) || mag == 0.0)
            fail(ErrorCode::EigenvalueSumNearZero,
                 "pivot magnitude " + format_number(mag) + " below threshold " + format_number(eps) +
                     " (eigenvalues reflected across the imaginary axis)");
        data[idx] = acc / pivot;
        // Decrement the multi-index, last mode fastest.
        for (int k = d - 1; k >= 0; --k) {
            Index& digit = digits[static_cast<std::size_t>(k)];
            if (digit > 0) {
                --digit;
                break;
            }
            digit = n - 1;
        }
    }

    rotate_all_modes(sf.U, d, n, w, scratch);
    scratch.resize(0);

    Vector v = w.real();
    const double v_norm = v.norm();
    const double imag_norm = w.imag().norm();
    local.imag_ratio = v_norm > 0.0 ? imag_norm / v_norm : imag_norm;
    local.multiply_adds = madds;
    local.min_pivot = min_pivot;
    if (imag_norm > 1e-9 * v_norm)
        fail(ErrorCode::NonRealSolution, "imaginary part " + format_number(imag_norm) +
                                             " exceeds 1e-9 of solution norm " + format_number(v_norm));

    ModeTensor result(b.dims(), std::move(v));

    if (options.verify) {
        const double b_norm = b.entries().norm();
        const ModeTensor applied = lyap_sum_apply(sf.source, d, result);
        const double res = (applied.entries() - b.entries()).norm();
        local.residual_ratio = b_norm > 0.0 ? res / b_norm : res;
        if (res > 1e-9 * b_norm)
            throw std::logic_error("nway_solve: residual " + format_number(local.residual_ratio) +
                                   " exceeds 1e-9 relative");
        const double bound = 4.0 * d * std::pow(static_cast<double>(n), d + 1);
        if (static_cast<double>(madds) > bound)
            throw std::logic_error("nway_solve: substitution used " + std::to_string(madds) +
                                   " multiply-adds, bound is 4 d n^(d+1)");
        const double delta = -sf.T.diagonal().real().maxCoeff();
        if (delta > 0.0 && min_pivot < d * delta * (1.0 - 1e-12))
            throw std::logic_error("nway_solve: pivot below d * stability margin");
    }
    if (stats) *stats = local;
    return result;
}

Matrix lyap2_solve(const Matrix& a, const Matrix& c) {
    require(a.rows() == a.cols(), ErrorCode::DimensionMismatch, "lyap2_solve: A is not square");
    require(c.rows() == a.rows() && c.cols() == a.cols(), ErrorCode::DimensionMismatch,
            "lyap2_solve: C does not match A");
    const Index n = a.rows();
    const SchurForm sf = schur_decompose(a.transpose());
    const ModeTensor rhs = ModeTensor::cube(n, 2, -vec(c));
    const ModeTensor v = nway_solve(sf, 2, rhs);
    const Matrix vm = unvec(v.entries(), n, n);
    return 0.5 * (vm + vm.transpose());
}

}  // namespace pqr
