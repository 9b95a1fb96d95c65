#include "pqr/kron.hpp"

#include <string>
#include <utility>

#include "pqr/detail/mode_product.hpp"
#include "pqr/errors.hpp"
#include "pqr/memory_guard.hpp"

namespace pqr {
namespace {

std::size_t entry_count(const std::vector<Index>& dims) {
    std::size_t p = 1;
    for (Index d : dims) p = saturating_mul(p, static_cast<std::size_t>(d));
    return p;
}

std::string dims_to_string(const std::vector<Index>& dims) {
    std::string s = "[";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(dims[i]);
    }
    return s + "]";
}

Index product(const std::vector<Index>& dims, std::size_t begin, std::size_t end) {
    Index p = 1;
    for (std::size_t i = begin; i < end; ++i) p *= dims[i];
    return p;
}

// Smallest k >= 0 with n^k == rows, or -1.
int power_of(Index n, Index rows) {
    if (n == 1) return rows == 1 ? 1 : -1;
    Index p = 1;
    for (int k = 0; k < 64; ++k) {
        if (p == rows) return k;
        if (p > rows / n) return -1;
        p *= n;
    }
    return -1;
}

}  // namespace

ModeTensor::ModeTensor(std::vector<Index> dims, Vector entries)
    : dims_(std::move(dims)), entries_(std::move(entries)) {
    for (Index d : dims_) require(d > 0, ErrorCode::InvalidArgument, "mode dimensions must be positive");
    require(entry_count(dims_) == static_cast<std::size_t>(entries_.size()),
            ErrorCode::DimensionMismatch,
            "tensor with dims " + dims_to_string(dims_) + " cannot hold " +
                std::to_string(entries_.size()) + " entries");
}

ModeTensor ModeTensor::zeros(std::vector<Index> dims) {
    const std::size_t count = entry_count(dims);
    check_entries(count, "tensor");
    return ModeTensor(std::move(dims), Vector::Zero(static_cast<Index>(count)));
}

ModeTensor ModeTensor::cube(Index n, int modes, Vector entries) {
    require(modes >= 0, ErrorCode::InvalidArgument, "negative mode count");
    return ModeTensor(std::vector<Index>(static_cast<std::size_t>(modes), n), std::move(entries));
}

ModeTensor ModeTensor::reshaped(std::vector<Index> dims) const& {
    return ModeTensor(std::move(dims), entries_);
}

ModeTensor ModeTensor::reshaped(std::vector<Index> dims) && {
    return ModeTensor(std::move(dims), std::move(entries_));
}

Index ModeTensor::linear_index(std::span<const Index> multi_index) const {
    require(multi_index.size() == dims_.size(), ErrorCode::DimensionMismatch,
            "multi-index has wrong number of modes");
    Index linear = 0;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
        require(multi_index[k] >= 0 && multi_index[k] < dims_[k], ErrorCode::InvalidArgument,
                "multi-index out of range");
        linear = linear * dims_[k] + multi_index[k];
    }
    return linear;
}

Matrix kron_dense(const Matrix& x, const Matrix& y) {
    const std::size_t rows = saturating_mul(static_cast<std::size_t>(x.rows()), y.rows());
    const std::size_t cols = saturating_mul(static_cast<std::size_t>(x.cols()), y.cols());
    check_entries(saturating_mul(rows, cols), "kron_dense");
    Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
    for (Index j = 0; j < x.cols(); ++j)
        for (Index i = 0; i < x.rows(); ++i)
            out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    return out;
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, Index rows, Index cols) {
    require(rows >= 0 && cols >= 0 && rows * cols == v.size(), ErrorCode::DimensionMismatch,
            "unvec: length " + std::to_string(v.size()) + " is not " + std::to_string(rows) + "x" +
                std::to_string(cols));
    return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

bool is_exact_identity(const Matrix& x) noexcept {
    if (x.rows() != x.cols()) return false;
    for (Index j = 0; j < x.cols(); ++j)
        for (Index i = 0; i < x.rows(); ++i)
            if (x(i, j) != (i == j ? 1.0 : 0.0)) return false;
    return true;
}

ModeTensor apply_mode(const Matrix& x, int mode, const ModeTensor& v) {
    const auto& dims = v.dims();
    require(mode >= 0 && mode < v.modes(), ErrorCode::InvalidArgument, "apply_mode: mode out of range");
    const auto k = static_cast<std::size_t>(mode);
    require(x.cols() == dims[k], ErrorCode::DimensionMismatch,
            "apply_mode: factor has " + std::to_string(x.cols()) + " columns, mode " +
                std::to_string(mode) + " has size " + std::to_string(dims[k]));
    std::vector<Index> out_dims = dims;
    out_dims[k] = x.rows();
    ModeTensor out = ModeTensor::zeros(std::move(out_dims));
    detail::apply_mode_raw<double>(x, product(dims, 0, k), product(dims, k + 1, dims.size()),
                                   v.entries().data(), out.entries().data(), false);
    return out;
}

ModeTensor kron_apply(std::span<const Matrix> factors, const ModeTensor& v) {
    require(static_cast<int>(factors.size()) == v.modes(), ErrorCode::DimensionMismatch,
            "kron_apply: " + std::to_string(factors.size()) + " factors for a " +
                std::to_string(v.modes()) + "-mode tensor");
    for (std::size_t k = 0; k < factors.size(); ++k)
        require(factors[k].cols() == v.dims()[k], ErrorCode::DimensionMismatch,
                "kron_apply: factor " + std::to_string(k) + " does not match mode size");
    ModeTensor result = v;
    for (std::size_t k = 0; k < factors.size(); ++k) {
        if (is_exact_identity(factors[k])) continue;
        result = apply_mode(factors[k], static_cast<int>(k), result);
    }
    return result;
}

ModeTensor lyap_sum_apply(const Matrix& x, int d, const ModeTensor& v) {
    require(d >= 1, ErrorCode::InvalidArgument, "lyap_sum_apply: d must be positive");
    const Index n = x.cols();
    require(v.modes() == d, ErrorCode::DimensionMismatch,
            "lyap_sum_apply: expected " + std::to_string(d) + " modes, got " +
                std::to_string(v.modes()));
    for (Index dim : v.dims())
        require(dim == n, ErrorCode::DimensionMismatch, "lyap_sum_apply: mode size differs from cols(X)");
    const int k = power_of(n, x.rows());
    require(k >= 0, ErrorCode::DimensionMismatch,
            "lyap_sum_apply: rows(X) = " + std::to_string(x.rows()) + " is not a power of " +
                std::to_string(n));

    const std::vector<Index> out_dims(static_cast<std::size_t>(d - 1 + k), n);
    if (is_exact_identity(x)) {
        ModeTensor out = v;
        out.entries() *= static_cast<double>(d);
        return out;
    }
    ModeTensor out = ModeTensor::zeros(out_dims);
    Index pre = 1;
    Index post = v.size() / n;
    for (int pos = 0; pos < d; ++pos) {
        detail::apply_mode_raw<double>(x, pre, post, v.entries().data(), out.entries().data(),
                                       pos > 0);
        pre *= n;
        post /= n;
    }
    return out;
}

ModeTensor monomial(const Vector& x, int d) {
    require(d >= 1, ErrorCode::InvalidArgument, "monomial: degree must be >= 1");
    const Index n = x.size();
    check_entries(saturating_pow(static_cast<std::size_t>(n), d), "monomial");
    Vector current = x;
    for (int k = 2; k <= d; ++k) {
        Vector next(current.size() * n);
        for (Index i = 0; i < current.size(); ++i) next.segment(i * n, n) = current[i] * x;
        current = std::move(next);
    }
    return ModeTensor::cube(n, d, std::move(current));
}

double contract_all(const Vector& coefficients, const Vector& x, int d) {
    require(d >= 1, ErrorCode::InvalidArgument, "contract_all: degree must be >= 1");
    const Index n = x.size();
    require(static_cast<std::size_t>(coefficients.size()) == saturating_pow(static_cast<std::size_t>(n), d),
            ErrorCode::DimensionMismatch, "contract_all: coefficient length is not n^d");
    if (d == 1) return coefficients.dot(x);
    // Contract the slowest mode first: c viewed as n^{d-1} x n.
    Index rest = coefficients.size() / n;
    Vector work = Eigen::Map<const Matrix>(coefficients.data(), rest, n) * x;
    for (int left = d - 2; left > 0; --left) {
        rest /= n;
        Vector next = Eigen::Map<const Matrix>(work.data(), rest, n) * x;
        work = std::move(next);
    }
    return work.dot(x);
}

}  // namespace pqr
