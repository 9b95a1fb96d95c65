#include "pqr_cli/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "pqr/errors.hpp"
#include "pqr/models.hpp"
#include "pqr/riccati.hpp"
#include "pqr/schur_nway.hpp"

namespace pqr::cli {
namespace {

using Rng = std::mt19937_64;

Matrix random_matrix(Rng& rng, Index rows, Index cols) {
    std::normal_distribution<double> dist;
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
    return m;
}

Matrix random_stable(Rng& rng, Index n) {
    Matrix a = random_matrix(rng, n, n);
    Eigen::EigenSolver<Matrix> es(a, false);
    const double shift = es.eigenvalues().real().maxCoeff() + 0.5;
    return a - shift * Matrix::Identity(n, n);
}

Index ipow(Index n, int k) {
    Index r = 1;
    for (int i = 0; i < k; ++i) r *= n;
    return r;
}

Matrix eye(Index n) { return Matrix::Identity(n, n); }

/// Dense sum over positions of I (x) .. (x) X (x) .. (x) I with d slots.
Matrix dense_lyap(const Matrix& x, Index n, int d) {
    const Index rows_in = ipow(n, d - 1) * x.rows();
    Matrix total = Matrix::Zero(rows_in, ipow(n, d - 1) * x.cols());
    for (int pos = 0; pos < d; ++pos)
        total += kron_dense(eye(ipow(n, pos)), kron_dense(x, eye(ipow(n, d - 1 - pos))));
    return total;
}

/// Permutes the modes of a cube tensor: out(i_perm[0], ..., i_perm[D-1]) = in(i_0, ..., i_{D-1}).
Vector permute_modes(const Vector& in, Index n, const std::vector<int>& perm) {
    const int d = static_cast<int>(perm.size());
    std::vector<Index> strides(static_cast<std::size_t>(d));
    Index s = 1;
    for (int k = d - 1; k >= 0; --k) {
        strides[static_cast<std::size_t>(k)] = s;
        s *= n;
    }
    Vector out(in.size());
    for (Index lin = 0; lin < in.size(); ++lin) {
        Index rest = lin, target = 0;
        for (int k = d - 1; k >= 0; --k) {
            const Index digit = rest % n;
            rest /= n;
            target += digit * strides[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])];
        }
        out[target] = in[lin];
    }
    return out;
}

Vector symmetrize(const Vector& t, Index n, int d) {
    std::vector<int> perm(static_cast<std::size_t>(d));
    std::iota(perm.begin(), perm.end(), 0);
    Vector acc = Vector::Zero(t.size());
    int count = 0;
    do {
        acc += permute_modes(t, n, perm);
        ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return acc / count;
}

/// Coefficient of x^{(x)j} in A x + B K(x) + f(x), or an empty matrix.
Matrix closed_loop_coefficient(const PolynomialSystem& sys, const FeedbackLaw& law, int j) {
    Matrix g;
    if (j == 1) g = sys.A;
    if (auto it = sys.N.find(j); it != sys.N.end()) g = it->second;
    if (j <= law.max_degree()) {
        const Matrix bk = sys.B * law.k(j);
        g = g.size() == 0 ? bk : Matrix(g + bk);
    }
    return g;
}

SuiteResult make(std::string name, bool ok, std::string detail) {
    return SuiteResult{std::move(name), ok, std::move(detail)};
}

SuiteResult kron_suite() {
    Rng rng(11);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 1 + trial % 4;
        const Matrix x = random_matrix(rng, n, n);
        const Matrix y = random_matrix(rng, n + 1, n);
        const Vector v = random_matrix(rng, n * n, 1).col(0);
        const std::vector<Matrix> factors{x, y};
        const Vector got = kron_apply(factors, ModeTensor({n, n}, v)).entries();
        const Vector want = kron_dense(x, y) * v;
        worst = std::max(worst, (got - want).norm() / std::max(1.0, want.norm()));
        for (int d = 1; d <= 4; ++d) {
            const Vector w = random_matrix(rng, ipow(n, d), 1).col(0);
            const Vector got_l = lyap_sum_apply(x, d, ModeTensor::cube(n, d, w)).entries();
            const Vector want_l = dense_lyap(x, n, d) * w;
            worst = std::max(worst, (got_l - want_l).norm() / std::max(1.0, want_l.norm()));
        }
        const Vector a = random_matrix(rng, n, 1).col(0), b = random_matrix(rng, n, 1).col(0);
        const double lhs = monomial(a, 3).entries().dot(monomial(b, 3).entries());
        worst = std::max(worst, std::abs(lhs - std::pow(a.dot(b), 3)) / std::max(1.0, std::abs(lhs)));
    }
    return make("kron", worst <= 1e-13, "max relative error " + format_number(worst));
}

SuiteResult nway_suite() {
    Rng rng(23);
    double worst = 0.0;
    for (int trial = 0; trial < 24; ++trial) {
        const Index n = 1 + trial % 4;
        const int d = 1 + (trial / 4) % 4;
        const Matrix a = random_stable(rng, n);
        const Vector b = random_matrix(rng, ipow(n, d), 1).col(0);
        const Vector got = nway_solve(schur_decompose(a), d, ModeTensor::cube(n, d, b)).entries();
        const Vector want = dense_lyap(a, n, d).partialPivLu().solve(b);
        worst = std::max(worst, (got - want).norm() / want.norm());
    }
    return make("nway", worst <= 1e-9, "max relative error vs dense solve " + format_number(worst));
}

SuiteResult riccati_suite() {
    Rng rng(37);
    double worst = 0.0;
    bool stable = true;
    const AreSolution scalar = care_solve(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1),
                                          Matrix::Ones(1, 1), Matrix::Ones(1, 1));
    const double scalar_err = std::abs(scalar.V2(0, 0) - (std::sqrt(2.0) - 1.0));
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 1 + trial % 8;
        const Index m = (n + 1) / 2 + trial % ((n + 2) / 2);
        const Matrix a = random_matrix(rng, n, n);
        const Matrix b = random_matrix(rng, n, m);
        const Matrix cq = random_matrix(rng, n, n);
        const Matrix q = cq * cq.transpose() / static_cast<double>(n) + eye(n);
        const Matrix cr = random_matrix(rng, m, m);
        const Matrix r = cr * cr.transpose() / static_cast<double>(m) + eye(m);
        const AreSolution sol = care_solve(a, b, q, r);
        worst = std::max(worst, sol.residual_norm / std::max(1.0, q.norm()));
        stable = stable && spectral_abscissa(a + b * sol.K1) < 0.0;
    }
    const bool ok = worst <= 1e-9 && stable && scalar_err <= 1e-12;
    return make("riccati", ok,
                "max scaled residual " + format_number(worst) + ", scalar error " + format_number(scalar_err) +
                    (stable ? "" : ", unstable closed loop"));
}

SuiteResult scalar_suite() {
    PolynomialSystem sys{Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1), {{2, Matrix::Ones(1, 1)}}};
    QuadraticCost cost{Matrix::Ones(1, 1), Matrix::Ones(1, 1)};
    const PqrResult res = pqr(sys, cost, 2);
    const double e1 = std::abs(res.value.v(2)[0] - 0.41421356237309515);
    const double e2 = std::abs(res.value.v(3)[0] - 0.19526214587563495);
    const double e3 = std::abs(res.feedback.k(2)(0, 0) + 0.29289321881345254);
    const double worst = std::max({e1, e2, e3});
    return make("albrekht-scalar", worst <= 1e-9, "max error " + format_number(worst));
}

SuiteResult decoupling_suite(const ValidationHooks& hooks) {
    struct Case {
        BenchmarkInstance inst;
        int degree;
    };
    std::vector<Case> cases;
    cases.push_back({lorenz(), 4});
    {
        Rng rng(53);
        BenchmarkInstance inst;
        inst.system.A = random_stable(rng, 2);
        inst.system.B = random_matrix(rng, 2, 1);
        inst.system.N.emplace(2, random_matrix(rng, 2, 4));
        inst.system.N.emplace(3, random_matrix(rng, 2, 8));
        inst.cost.Q = eye(2);
        inst.cost.R = Matrix::Constant(1, 1, 2.0);
        inst.x0 = Vector::Ones(2);
        inst.horizon = 1.0;
        cases.push_back({inst, 4});
    }
    double worst_identity = 0.0;
    double worst_hjb = 0.0;
    for (const Case& c : cases) {
        AlbrekhtSolver solver(c.inst.system, c.inst.cost);
        solver.extend_to(c.degree);
        ValueFunction value = solver.value();
        if (hooks.perturb_value) hooks.perturb_value(value);
        const FeedbackLaw& law = solver.feedback();
        for (int d = 2; d <= c.degree; ++d) {
            const double scale = std::max(1.0, value.v(2).norm()) * std::max(1.0, law.k(d).norm()) *
                                 std::max(1.0, c.inst.system.B.norm() + law.k(1).norm());
            worst_identity = std::max(worst_identity, decoupling_defect(c.inst.system, c.inst.cost, value, law, d) / scale);
        }
        for (int deg = 2; deg <= c.degree + 1; ++deg) {
            const Vector coeff = dense_hjb_coefficient(c.inst.system, c.inst.cost, value, law, deg);
            const double scale = std::max(1.0, value.v(deg).norm() * solver.closed_loop().norm());
            worst_hjb = std::max(worst_hjb, coeff.norm() / scale);
        }
    }
    const bool ok = worst_identity <= 1e-8 && worst_hjb <= 1e-8;
    return make("albrekht-decoupling", ok,
                "identity defect " + format_number(worst_identity) + ", HJB coefficient defect " +
                    format_number(worst_hjb));
}

SuiteResult lqr_suite() {
    Rng rng(71);
    PolynomialSystem sys{random_stable(rng, 3), random_matrix(rng, 3, 2), {}};
    QuadraticCost cost{eye(3), eye(2)};
    const PqrResult res = pqr(sys, cost, 4);
    double worst = 0.0;
    const double v2 = res.value.v(2).norm();
    for (int k = 3; k <= 5; ++k) worst = std::max(worst, res.value.v(k).norm() / v2);
    for (int j = 2; j <= 4; ++j) worst = std::max(worst, res.feedback.k(j).norm() / v2);
    return make("albrekht-lqr", worst <= 1e-10, "max relative higher-order norm " + format_number(worst));
}

SuiteResult odd_suite() {
    const BenchmarkInstance inst = vdp_ring(3, {1, 2}, 0.3);
    const PqrResult res = pqr(inst.system, inst.cost, 4);
    const double k1 = res.feedback.k(1).norm();
    const double worst = std::max(res.feedback.k(2).norm(), res.feedback.k(4).norm()) / k1;
    return make("albrekht-odd-symmetry", worst <= 1e-9, "max even gain ratio " + format_number(worst));
}

template <class F>
SuiteResult guarded(const std::string& name, F&& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        return make(name, false, std::string("threw: ") + e.what());
    }
}

}  // namespace

Vector dense_hjb_coefficient(const PolynomialSystem& sys, const QuadraticCost& cost,
                             const ValueFunction& value, const FeedbackLaw& law, int degree) {
    const Index n = sys.n();
    Vector total = Vector::Zero(ipow(n, degree));
    if (degree == 2) total += vec(cost.Q);
    for (int k = 2; k <= degree && k <= value.max_degree(); ++k) {
        const int j = degree - k + 1;
        const Matrix g = closed_loop_coefficient(sys, law, j);
        if (g.size() == 0) continue;
        total += dense_lyap(g, n, k).transpose() * value.v(k);
    }
    for (int i = 1; i < degree; ++i) {
        const int j = degree - i;
        if (i > law.max_degree() || j > law.max_degree()) continue;
        total += kron_dense(law.k(i), law.k(j)).transpose() * vec(cost.R);
    }
    return symmetrize(total, n, degree);
}

double decoupling_defect(const PolynomialSystem& sys, const QuadraticCost& cost,
                         const ValueFunction& value, const FeedbackLaw& law, int d) {
    const Index n = sys.n();
    const Matrix bk = sys.B * law.k(d);
    const Matrix lhs = kron_dense(bk, eye(n)) + kron_dense(eye(n), bk);
    const Matrix kk = kron_dense(law.k(d), law.k(1)) + kron_dense(law.k(1), law.k(d));
    const Vector row = lhs.transpose() * value.v(2) + kk.transpose() * vec(cost.R);
    return row.norm();
}

std::vector<SuiteResult> run_validation(const ValidationHooks& hooks) {
    std::vector<SuiteResult> out;
    out.push_back(guarded("kron", kron_suite));
    out.push_back(guarded("nway", nway_suite));
    out.push_back(guarded("riccati", riccati_suite));
    out.push_back(guarded("albrekht-scalar", scalar_suite));
    out.push_back(guarded("albrekht-decoupling", [&] { return decoupling_suite(hooks); }));
    out.push_back(guarded("albrekht-lqr", lqr_suite));
    out.push_back(guarded("albrekht-odd-symmetry", odd_suite));
    return out;
}

void print_report(std::ostream& out, const std::vector<SuiteResult>& results) {
    for (const SuiteResult& r : results)
        out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
}

}  // namespace pqr::cli
