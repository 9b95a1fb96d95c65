#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace pqr {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Layout tag recorded in every serialized coefficient file.
inline constexpr const char* kLayoutName = "column-major-mode1-slowest";

/// A real vector viewed as a tensor with one dimension per mode.
///
/// Mode 0 varies slowest and the last mode fastest, which is the ordering
/// produced by X_1 (x) ... (x) X_d acting on mode-ordered vectors. Under this
/// convention vec(x y^T) = y (x) x, matching column-major vec.
class ModeTensor {
public:
    ModeTensor() = default;
    ModeTensor(std::vector<Index> dims, Vector entries);

    static ModeTensor zeros(std::vector<Index> dims);
    /// d modes of size n over the given entries (length n^d).
    static ModeTensor cube(Index n, int modes, Vector entries);

    const std::vector<Index>& dims() const noexcept { return dims_; }
    int modes() const noexcept { return static_cast<int>(dims_.size()); }
    Index size() const noexcept { return entries_.size(); }

    const Vector& entries() const noexcept { return entries_; }
    Vector& entries() noexcept { return entries_; }

    /// Same entries under new mode dimensions (product must match).
    ModeTensor reshaped(std::vector<Index> dims) const&;
    ModeTensor reshaped(std::vector<Index> dims) &&;

    Index linear_index(std::span<const Index> multi_index) const;
    double operator()(std::span<const Index> multi_index) const {
        return entries_[linear_index(multi_index)];
    }

private:
    std::vector<Index> dims_;
    Vector entries_;
};

/// Explicit Kronecker product. Intended for oracles at small sizes.
Matrix kron_dense(const Matrix& x, const Matrix& y);

/// Column-major stacking: entry (i, j) lands at i + j * rows.
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Index rows, Index cols);

/// Applies `x` to one mode of `v`; the mode's size changes from x.cols() to x.rows().
ModeTensor apply_mode(const Matrix& x, int mode, const ModeTensor& v);

/// (X_1 (x) ... (x) X_d) v by successive mode products; exact identity factors are skipped.
ModeTensor kron_apply(std::span<const Matrix> factors, const ModeTensor& v);

/// Sum over the d insertion positions of (I (x) ... (x) X (x) ... (x) I) v.
///
/// `v` must have d modes of size n = x.cols(). `x` may have n^k rows, in which
/// case the inserted mode is split into k modes of size n and the result has
/// d - 1 + k modes of size n.
ModeTensor lyap_sum_apply(const Matrix& x, int d, const ModeTensor& v);

/// x (x) x (x) ... (x) x with d factors.
ModeTensor monomial(const Vector& x, int d);

/// Contracts every mode of a length-n^d coefficient vector with x, i.e. c^T (x^{(x)d}).
double contract_all(const Vector& coefficients, const Vector& x, int d);

/// True iff `x` is square and exactly the identity.
bool is_exact_identity(const Matrix& x) noexcept;

}  // namespace pqr
