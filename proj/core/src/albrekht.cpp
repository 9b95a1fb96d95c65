#include "pqr/albrekht.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "pqr/detail/mode_product.hpp"
#include "pqr/errors.hpp"
#include "pqr/memory_guard.hpp"

namespace pqr {
namespace {

Index ipow(Index base, int exponent) {
    Index p = 1;
    for (int i = 0; i < exponent; ++i) p *= base;
    return p;
}

// coeff (rows x n^k) times x^{(x)k}, contracting the slowest mode first.
template <class S>
Eigen::Matrix<S, -1, 1> apply_to_power(const Eigen::Matrix<S, -1, -1>& coeff, const Eigen::Matrix<S, -1, 1>& x, int k) {
    using Mat = Eigen::Matrix<S, -1, -1>;
    const Index n = x.size();
    if (k == 1) return coeff * x;
    Index width = coeff.size() / n;
    Eigen::Matrix<S, -1, 1> work = Eigen::Map<const Mat>(coeff.data(), width, n) * x;
    for (int left = k - 1; left > 0; --left) {
        width /= n;
        Eigen::Matrix<S, -1, 1> next = Eigen::Map<const Mat>(work.data(), width, n) * x;
        work = std::move(next);
    }
    return work;
}

Vector apply_to_power(const Matrix& coeff, const Vector& x, int k) { return apply_to_power<double>(coeff, x, k); }

// Residual diagnostics cancel terms of very different size; accumulate them in extended precision.
using Wide = long double;
using WideVector = Eigen::Matrix<Wide, -1, 1>;
using WideMatrix = Eigen::Matrix<Wide, -1, -1>;

WideVector wide_power(const WideVector& x, int k) {
    WideVector p = WideVector::Ones(1);
    for (int i = 0; i < k; ++i) {
        WideVector next(p.size() * x.size());
        for (Index a = 0; a < p.size(); ++a) next.segment(a * x.size(), x.size()) = p[a] * x;
        p = std::move(next);
    }
    return p;
}

// Gradient of v_k^T x^{(x)k}: every mode but one contracted with x.
WideVector wide_gradient(const ValueFunction& value, const WideVector& x) {
    const Index n = x.size();
    WideVector grad = WideVector::Zero(n);
    for (int k = 2; k <= value.max_degree(); ++k) {
        const WideVector vk = value.v(k).cast<Wide>();
        WideVector work = vk;
        for (int pos = 0; pos < k; ++pos) {
            const Index rest = work.size() / n;
            grad += Eigen::Map<const WideMatrix>(work.data(), rest, n).transpose() * wide_power(x, k - pos - 1);
            WideVector next = Eigen::Map<const WideMatrix>(work.data(), rest, n) * x;
            work = std::move(next);
        }
    }
    return grad;
}

bool symmetric(const Matrix& s) {
    return (s - s.transpose()).norm() <= 1e-10 * std::max(1.0, s.norm());
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void PolynomialSystem::validate() const {
    const Index dim = A.rows();
    require(dim >= 1 && A.cols() == dim, ErrorCode::DimensionMismatch, "system: A must be square and non-empty");
    require(B.rows() == dim && B.cols() >= 1, ErrorCode::DimensionMismatch, "system: B must be n x m with m >= 1");
    require(A.allFinite() && B.allFinite(), ErrorCode::InvalidArgument, "system: non-finite entries in A or B");
    for (const auto& [k, nk] : N) {
        require(k >= 2, ErrorCode::InvalidArgument, "system: nonlinear degrees start at 2");
        const std::size_t cols = saturating_pow(static_cast<std::size_t>(dim), k);
        check_entries(saturating_mul(cols, static_cast<std::size_t>(dim)), "nonlinear coefficient N_" + std::to_string(k));
        require(nk.rows() == dim && static_cast<std::size_t>(nk.cols()) == cols, ErrorCode::DimensionMismatch,
                "system: N_" + std::to_string(k) + " must be n x n^" + std::to_string(k));
        require(nk.allFinite(), ErrorCode::InvalidArgument, "system: non-finite entries in N_" + std::to_string(k));
    }
}

Vector PolynomialSystem::nonlinearity(const Vector& x) const {
    Vector f = Vector::Zero(n());
    for (const auto& [k, nk] : N) f += apply_to_power(nk, x, k);
    return f;
}

Vector PolynomialSystem::rhs(const Vector& x, const Vector& u) const {
    return A * x + B * u + nonlinearity(x);
}

void QuadraticCost::validate(Index n, Index m) const {
    require(Q.rows() == n && Q.cols() == n, ErrorCode::DimensionMismatch, "cost: Q must be n x n");
    require(R.rows() == m && R.cols() == m, ErrorCode::DimensionMismatch, "cost: R must be m x m");
    require(symmetric(Q), ErrorCode::InvalidArgument, "cost: Q is not symmetric");
    require(symmetric(R), ErrorCode::InvalidArgument, "cost: R is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> qe(Q, Eigen::EigenvaluesOnly);
    require(qe.eigenvalues().minCoeff() >= -1e-10 * std::max(1.0, qe.eigenvalues().cwiseAbs().maxCoeff()),
            ErrorCode::InvalidArgument, "cost: Q is not positive semidefinite");
    Eigen::SelfAdjointEigenSolver<Matrix> re(R, Eigen::EigenvaluesOnly);
    require(re.eigenvalues().minCoeff() > 1e-10 * re.eigenvalues().cwiseAbs().maxCoeff(),
            ErrorCode::InvalidArgument, "cost: R is not positive definite");
}

const Vector& ValueFunction::v(int k) const {
    require(k >= 2 && k <= max_degree(), ErrorCode::MissingCoefficient,
            "value function has no v_" + std::to_string(k));
    return coefficients[static_cast<std::size_t>(k - 2)];
}

const Matrix& FeedbackLaw::k(int j) const {
    require(j >= 1 && j <= max_degree(), ErrorCode::MissingCoefficient,
            "feedback law has no k_" + std::to_string(j));
    return gains[static_cast<std::size_t>(j - 1)];
}

AlbrekhtSolver::AlbrekhtSolver(PolynomialSystem system, QuadraticCost cost, PqrOptions options)
    : system_(std::move(system)), cost_(std::move(cost)), options_(options) {
    const auto start = std::chrono::steady_clock::now();
    system_.validate();
    cost_.validate(system_.n(), system_.m());
    are_ = care_solve(system_.A, system_.B, cost_.Q, cost_.R);
    closed_loop_ = system_.A + system_.B * are_.K1;
    schur_ = schur_decompose(closed_loop_.transpose());
    value_.n = system_.n();
    value_.coefficients.push_back(vec(are_.V2));
    law_.n = system_.n();
    law_.m = system_.m();
    law_.gains.push_back(are_.K1);
    DegreeReport report;
    report.degree = 1;
    report.seconds = seconds_since(start);
    report.value_norm = are_.V2.norm();
    report.gain_norm = are_.K1.norm();
    reports_.push_back(report);
}

void AlbrekhtSolver::extend_to(int degree) {
    require(degree >= 1, ErrorCode::InvalidArgument, "degree must be >= 1");
    const Index n = system_.n();
    if (degree > law_.max_degree())
        check_entries(saturating_pow(static_cast<std::size_t>(n), degree + 2),
                      "degree " + std::to_string(degree) + " expansion");
    for (int d = law_.max_degree() + 1; d <= degree; ++d) {
        const auto start = std::chrono::steady_clock::now();
        DegreeReport report;
        report.degree = d;
        const ModeTensor c = assemble_rhs(d, system_, cost_, value_, law_, options_.strict_paper_rhs);
        NwaySolveOptions solve_options;
        solve_options.verify = options_.verify_solves;
        ModeTensor v = nway_solve(schur_, d + 1, c, solve_options, &report.solve);
        Matrix k = compute_gain(d, system_.B, cost_.R, v.entries());
        report.value_norm = v.entries().norm();
        report.gain_norm = k.norm();
        if (options_.report_asymmetry) report.asymmetry = asymmetry_norm(v.entries(), n, d + 1);
        value_.coefficients.push_back(std::move(v.entries()));
        law_.gains.push_back(std::move(k));
        report.seconds = seconds_since(start);
        reports_.push_back(report);
    }
}

PqrResult pqr(const PolynomialSystem& system, const QuadraticCost& cost, int degree,
              const PqrOptions& options) {
    require(degree >= 1, ErrorCode::InvalidArgument, "degree must be >= 1");
    AlbrekhtSolver solver(system, cost, options);
    solver.extend_to(degree);
    return PqrResult{solver.value(), solver.feedback(), solver.are(), solver.reports()};
}

ModeTensor assemble_rhs(int d, const PolynomialSystem& system, const QuadraticCost& cost,
                        const ValueFunction& value, const FeedbackLaw& law, bool strict_paper_rhs) {
    require(d >= 2, ErrorCode::InvalidArgument, "assemble_rhs: degree must be >= 2");
    require(value.max_degree() >= d, ErrorCode::MissingCoefficient,
            "assemble_rhs: need v_2..v_" + std::to_string(d));
    require(law.max_degree() >= d - 1, ErrorCode::MissingCoefficient,
            "assemble_rhs: need k_1..k_" + std::to_string(d - 1));
    const Index n = system.n();
    const Index m = system.m();
    ModeTensor c = ModeTensor::zeros(std::vector<Index>(static_cast<std::size_t>(d + 1), n));
    double* out = c.entries().data();

    // Gradient of v_j along the nonlinearity: -L_j(N_i^T) v_j with j = d + 2 - i.
    for (const auto& [i, ni] : system.N) {
        if (i > d) break;
        const int j = d + 2 - i;
        if (strict_paper_rhs && j == 2 && i >= 3) continue;
        const Matrix neg_t = -ni.transpose();
        const Vector& vj = value.v(j);
        Index pre = 1;
        Index post = vj.size() / n;
        for (int pos = 0; pos < j; ++pos) {
            detail::apply_mode_raw<double>(neg_t, pre, post, vj.data(), out, true);
            pre *= n;
            post /= n;
        }
    }

    // -L_j((B k_i)^T) v_j, applied as B^T (n -> m) then k_i^T (m -> n^i) on each mode.
    const Matrix bt = system.B.transpose();
    Vector scratch;
    for (int i = 2; i <= d - 1; ++i) {
        const int j = d + 2 - i;
        const Matrix neg_kt = -law.k(i).transpose();
        const Vector& vj = value.v(j);
        scratch.resize(vj.size() / n * m);
        Index pre = 1;
        Index post = vj.size() / n;
        for (int pos = 0; pos < j; ++pos) {
            detail::apply_mode_raw<double>(bt, pre, post, vj.data(), scratch.data(), false);
            detail::apply_mode_raw<double>(neg_kt, pre, post, scratch.data(), out, true);
            pre *= n;
            post /= n;
        }
    }

    // -(k_i^T (x) k_j^T) r_2 = -vec(k_j^T R k_i) for i + j = d + 1, 2 <= i, j <= d - 1.
    for (int i = 2; i <= d - 1; ++i) {
        const int j = d + 1 - i;
        const Matrix rk = cost.R * law.k(i);
        Eigen::Map<Matrix> block(out, ipow(n, j), ipow(n, i));
        block.noalias() -= law.k(j).transpose() * rk;
    }
    return c;
}

Matrix compute_gain(int d, const Matrix& b, const Matrix& r, const Vector& v_next) {
    require(d >= 1, ErrorCode::InvalidArgument, "compute_gain: degree must be >= 1");
    const Index n = b.rows();
    const Index m = b.cols();
    require(r.rows() == m && r.cols() == m, ErrorCode::DimensionMismatch, "compute_gain: R must be m x m");
    require(static_cast<std::size_t>(v_next.size()) == saturating_pow(static_cast<std::size_t>(n), d + 1),
            ErrorCode::DimensionMismatch, "compute_gain: v has length != n^(d+1)");
    const Index width = v_next.size() / n;  // n^d
    Matrix g = Matrix::Zero(width, m);       // (sum of position terms)^T
    Index pre = 1;
    Index post = width;
    for (int pos = 0; pos <= d; ++pos) {
        for (Index p = 0; p < pre; ++p) {
            Eigen::Map<const Matrix> slab(v_next.data() + p * n * post, post, n);
            g.middleRows(p * post, post).noalias() += slab * b;
        }
        pre *= n;
        post /= n;
    }
    Eigen::LLT<Matrix> llt(r);
    require(llt.info() == Eigen::Success, ErrorCode::InvalidArgument, "compute_gain: R is not positive definite");
    return -0.5 * llt.solve(g.transpose());
}

Vector eval_feedback(const FeedbackLaw& law, const Vector& x, std::optional<int> up_to_degree) {
    require(x.size() == law.n, ErrorCode::DimensionMismatch, "eval_feedback: state has wrong length");
    const int top = up_to_degree.value_or(law.max_degree());
    require(top <= law.max_degree(), ErrorCode::MissingCoefficient,
            "eval_feedback: law only has degree " + std::to_string(law.max_degree()));
    Vector u = Vector::Zero(law.m);
    for (int j = 1; j <= top; ++j) u += apply_to_power(law.k(j), x, j);
    return u;
}

double eval_value(const ValueFunction& value, const Vector& x, std::optional<int> up_to_degree) {
    require(x.size() == value.n, ErrorCode::DimensionMismatch, "eval_value: state has wrong length");
    const int top = up_to_degree.value_or(value.max_degree());
    require(top <= value.max_degree(), ErrorCode::MissingCoefficient,
            "eval_value: value function only has degree " + std::to_string(value.max_degree()));
    double total = 0.0;
    for (int k = 2; k <= top; ++k) total += contract_all(value.v(k), x, k);
    return total;
}

Vector value_gradient(const ValueFunction& value, const Vector& x, std::optional<int> up_to_degree) {
    require(x.size() == value.n, ErrorCode::DimensionMismatch, "value_gradient: state has wrong length");
    const int top = up_to_degree.value_or(value.max_degree());
    require(top <= value.max_degree(), ErrorCode::MissingCoefficient,
            "value_gradient: value function only has degree " + std::to_string(value.max_degree()));
    const Index n = value.n;
    const Matrix xt = x.transpose();
    const Matrix eye = Matrix::Identity(n, n);
    Vector grad = Vector::Zero(n);
    for (int k = 2; k <= top; ++k) {
        const ModeTensor vk = ModeTensor::cube(n, k, value.v(k));
        for (int pos = 0; pos < k; ++pos) {
            std::vector<Matrix> factors(static_cast<std::size_t>(k), xt);
            factors[static_cast<std::size_t>(pos)] = eye;
            grad += kron_apply(factors, vk).entries();
        }
    }
    return grad;
}

std::pair<double, double> hjb_residual(const PolynomialSystem& system, const QuadraticCost& cost,
                                       const ValueFunction& value, const FeedbackLaw& law,
                                       const Vector& x) {
    require(x.size() == system.n() && value.n == system.n() && law.n == system.n() && law.m == system.m(),
            ErrorCode::DimensionMismatch, "hjb_residual: inconsistent dimensions");
    const WideVector xw = x.cast<Wide>();
    const WideVector grad = wide_gradient(value, xw);
    WideVector u = WideVector::Zero(law.m);
    for (int j = 1; j <= law.max_degree(); ++j) u += apply_to_power<Wide>(law.k(j).cast<Wide>(), xw, j);
    WideVector f = system.A.cast<Wide>() * xw + system.B.cast<Wide>() * u;
    for (const auto& [k, nk] : system.N) f += apply_to_power<Wide>(nk.cast<Wide>(), xw, k);
    const WideMatrix q = cost.Q.cast<Wide>(), r = cost.R.cast<Wide>();
    const Wide r1 = grad.dot(f) + xw.dot(q * xw) + u.dot(r * u);
    const Wide r2 = (system.B.cast<Wide>().transpose() * grad + 2 * (r * u)).norm();
    return {static_cast<double>(r1), static_cast<double>(r2)};
}

double asymmetry_norm(const Vector& v, Index n, int modes) {
    const double norm = v.norm();
    if (modes < 2 || norm == 0.0) return 0.0;
    double worst = 0.0;
    for (int pos = 0; pos + 1 < modes; ++pos) {
        const Index pre = ipow(n, pos);
        const Index post = ipow(n, modes - pos - 2);
        double sq = 0.0;
        for (Index p = 0; p < pre; ++p)
            for (Index a = 0; a < n; ++a)
                for (Index b = 0; b < n; ++b)
                    for (Index q = 0; q < post; ++q) {
                        const double diff = v[((p * n + a) * n + b) * post + q] - v[((p * n + b) * n + a) * post + q];
                        sq += diff * diff;
                    }
        worst = std::max(worst, std::sqrt(sq) / norm);
    }
    return worst;
}

}  // namespace pqr
