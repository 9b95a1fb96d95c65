#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "pqr/kron.hpp"
#include "pqr/riccati.hpp"
#include "pqr/schur_nway.hpp"

namespace pqr {

/// x' = A x + B u + N_2 (x (x) x) + ... + N_p (x (x) ... (x) x)
struct PolynomialSystem {
    Matrix A;
    Matrix B;
    /// N[k] has shape n x n^k; absent degrees are zero.
    std::map<int, Matrix> N;

    Index n() const noexcept { return A.rows(); }
    Index m() const noexcept { return B.cols(); }
    /// Highest nonlinearity degree, 1 when there is none.
    int degree() const noexcept { return N.empty() ? 1 : N.rbegin()->first; }

    void validate() const;
    Vector nonlinearity(const Vector& x) const;
    Vector rhs(const Vector& x, const Vector& u) const;
};

/// l(x, u) = x^T Q x + u^T R u
struct QuadraticCost {
    Matrix Q;
    Matrix R;

    Vector q2() const { return vec(Q); }
    Vector r2() const { return vec(R); }

    void validate(Index n, Index m) const;
    double running_cost(const Vector& x, const Vector& u) const {
        return x.dot(Q * x) + u.dot(R * u);
    }
};

/// v(x) = v_2^T x^{(x)2} + ... + v_D^T x^{(x)D}
struct ValueFunction {
    Index n = 0;
    /// coefficients[k - 2] = v_k, length n^k
    std::vector<Vector> coefficients;

    int max_degree() const noexcept { return static_cast<int>(coefficients.size()) + 1; }
    const Vector& v(int k) const;
};

/// K(x) = k_1 x + k_2 x^{(x)2} + ... + k_d x^{(x)d}
struct FeedbackLaw {
    Index n = 0;
    Index m = 0;
    /// gains[j - 1] = k_j, shape m x n^j
    std::vector<Matrix> gains;

    int max_degree() const noexcept { return static_cast<int>(gains.size()); }
    const Matrix& k(int j) const;
};

struct PqrOptions {
    /// Drop L_2(N_i^T) v_2 for i >= 3 from the right-hand side, reproducing
    /// the truncated v4/v5 equations instead of full degree matching.
    bool strict_paper_rhs = false;
    /// Verify residual, pivot bound and operation count of every solve.
    bool verify_solves = false;
    /// Compute the (adjacent-transposition) asymmetry norm of each v_k.
    bool report_asymmetry = false;
};

struct DegreeReport {
    int degree = 0;  ///< feedback degree d (v_{d+1}, k_d)
    double seconds = 0.0;
    double value_norm = 0.0;
    double gain_norm = 0.0;
    double asymmetry = 0.0;
    NwaySolveStats solve;
};

/// Computes the series degree by degree and caches everything computed so far.
class AlbrekhtSolver {
public:
    AlbrekhtSolver(PolynomialSystem system, QuadraticCost cost, PqrOptions options = {});

    /// Ensures k_1..k_d and v_2..v_{d+1} are available.
    void extend_to(int degree);
    int degree() const noexcept { return law_.max_degree(); }

    const PolynomialSystem& system() const noexcept { return system_; }
    const QuadraticCost& cost() const noexcept { return cost_; }
    const ValueFunction& value() const noexcept { return value_; }
    const FeedbackLaw& feedback() const noexcept { return law_; }
    const AreSolution& are() const noexcept { return are_; }
    const Matrix& closed_loop() const noexcept { return closed_loop_; }
    const std::vector<DegreeReport>& reports() const noexcept { return reports_; }

private:
    PolynomialSystem system_;
    QuadraticCost cost_;
    PqrOptions options_;
    AreSolution are_;
    Matrix closed_loop_;
    SchurForm schur_;  // of A_c^T
    ValueFunction value_;
    FeedbackLaw law_;
    std::vector<DegreeReport> reports_;
};

struct PqrResult {
    ValueFunction value;
    FeedbackLaw feedback;
    AreSolution are;
    std::vector<DegreeReport> reports;
};

PqrResult pqr(const PolynomialSystem& system, const QuadraticCost& cost, int degree,
              const PqrOptions& options = {});

/// Right-hand side c with L_{d+1}(A_c^T) v_{d+1} = c, built from v_2..v_d and k_1..k_{d-1}.
ModeTensor assemble_rhs(int d, const PolynomialSystem& system, const QuadraticCost& cost,
                        const ValueFunction& value, const FeedbackLaw& law,
                        bool strict_paper_rhs = false);

/// k_d = -1/2 R^{-1} (L_{d+1}(B^T) v_{d+1})^T with each position's m-mode moved to the front.
Matrix compute_gain(int d, const Matrix& b, const Matrix& r, const Vector& v_next);

Vector eval_feedback(const FeedbackLaw& law, const Vector& x,
                     std::optional<int> up_to_degree = std::nullopt);
double eval_value(const ValueFunction& value, const Vector& x,
                  std::optional<int> up_to_degree = std::nullopt);
/// Analytic gradient of eval_value.
Vector value_gradient(const ValueFunction& value, const Vector& x,
                      std::optional<int> up_to_degree = std::nullopt);

/// (r1, r2): the HJB value-equation residual and the norm of the optimality-condition residual at x.
/// Accumulated in extended precision where the platform provides it.
std::pair<double, double> hjb_residual(const PolynomialSystem& system, const QuadraticCost& cost,
                                       const ValueFunction& value, const FeedbackLaw& law,
                                       const Vector& x);

/// max over adjacent mode swaps P of ||v - P v|| / ||v||; 0 for a symmetric tensor.
double asymmetry_norm(const Vector& v, Index n, int modes);

}  // namespace pqr
