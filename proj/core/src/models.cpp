#include "pqr/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include <Eigen/Cholesky>

#include "pqr/errors.hpp"

namespace pqr {

void BenchmarkInstance::validate() const {
    system.validate();
    cost.validate(system.n(), system.m());
    require(x0.size() == system.n(), ErrorCode::DimensionMismatch, "instance: x0 has wrong length");
    require(x0.allFinite(), ErrorCode::InvalidArgument, "instance: x0 is not finite");
    require(horizon > 0.0, ErrorCode::InvalidArgument, "instance: horizon must be positive");
}

BenchmarkInstance lorenz() {
    BenchmarkInstance inst;
    inst.label = "lorenz";
    inst.system.A.resize(3, 3);
    inst.system.A << -10.0, 10.0, 0.0,
                     28.0, -1.0, 0.0,
                     0.0, 0.0, -8.0 / 3.0;
    inst.system.B = Matrix::Zero(3, 1);
    inst.system.B(0, 0) = 1.0;
    Matrix n2 = Matrix::Zero(3, 9);
    // Column c of the Kronecker layout is x_{c / 3} x_{c % 3}.
    n2(1, 2) = -0.5;  // x1 x3
    n2(1, 6) = -0.5;  // x3 x1
    n2(2, 1) = 0.5;   // x1 x2
    n2(2, 3) = 0.5;   // x2 x1
    inst.system.N.emplace(2, std::move(n2));
    inst.cost.Q = Matrix::Identity(3, 3);
    inst.cost.R = Matrix::Identity(1, 1);
    inst.x0 = Vector::Constant(3, 10.0);
    inst.horizon = 50.0;
    return inst;
}

BenchmarkInstance vdp_ring(int g, const std::vector<int>& actuated_nodes, double y0) {
    require(g >= 2, ErrorCode::InvalidArgument, "vdp_ring: need at least 2 oscillators");
    require(!actuated_nodes.empty(), ErrorCode::InvalidArgument, "vdp_ring: no actuated nodes");
    std::set<int> seen;
    for (int node : actuated_nodes) {
        require(node >= 1 && node <= g, ErrorCode::InvalidArgument,
                "vdp_ring: invalid node index " + std::to_string(node));
        require(seen.insert(node).second, ErrorCode::InvalidArgument,
                "vdp_ring: duplicate node index " + std::to_string(node));
    }
    const Index n = 2 * g;
    const Index m = static_cast<Index>(actuated_nodes.size());
    BenchmarkInstance inst;
    inst.label = "vdp";
    Matrix a = Matrix::Zero(n, n);
    for (Index i = 0; i < g; ++i) {
        a(i, g + i) = 1.0;
        a(g + i, i) += -1.0 - 2.0;
        a(g + i, (i + g - 1) % g) += 1.0;
        a(g + i, (i + 1) % g) += 1.0;
        a(g + i, g + i) = 1.0;
    }
    Matrix n3 = Matrix::Zero(n, n * n * n);
    for (Index i = 0; i < g; ++i) {
        const Index y = i;
        const Index yd = g + i;
        n3(yd, (y * n + y) * n + yd) = -1.0 / 3.0;
        n3(yd, (y * n + yd) * n + y) = -1.0 / 3.0;
        n3(yd, (yd * n + y) * n + y) = -1.0 / 3.0;
    }
    Matrix b = Matrix::Zero(n, m);
    for (Index c = 0; c < m; ++c) b(g + actuated_nodes[static_cast<std::size_t>(c)] - 1, c) = 1.0;

    inst.system.A = std::move(a);
    inst.system.B = std::move(b);
    inst.system.N.emplace(3, std::move(n3));
    inst.cost.Q = Matrix::Identity(n, n);
    inst.cost.R = Matrix::Identity(m, m);
    inst.x0 = Vector::Zero(n);
    inst.x0.head(g).setConstant(y0);
    inst.horizon = 50.0;
    return inst;
}

BurgersFem burgers_assemble(int n_elements, int m) {
    require(n_elements >= 3, ErrorCode::InvalidArgument, "burgers: need at least 3 elements");
    require(m >= 1, ErrorCode::InvalidArgument, "burgers: need at least one input patch");
    const Index n = n_elements;
    BurgersFem fem;
    fem.h = 1.0 / static_cast<double>(n);
    const double h = fem.h;
    fem.nodes = Vector::LinSpaced(n, 0.0, static_cast<double>(n - 1) * h);
    fem.mass = Matrix::Zero(n, n);
    fem.stiffness = Matrix::Zero(n, n);
    fem.convection = Matrix::Zero(n, n * n);
    fem.input = Matrix::Zero(n, m);

    for (Index e = 0; e < n; ++e) {
        const Index local[2] = {e, (e + 1) % n};
        const double slope[2] = {-1.0 / h, 1.0 / h};
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                fem.mass(local[r], local[c]) += (r == c ? 2.0 : 1.0) * h / 6.0;
                fem.stiffness(local[r], local[c]) += (r == c ? 1.0 : -1.0) / h;
            }
        }
        // 1/2 int phi_j phi_l phi_i' over the element, with int phi_j phi_l = h/3 or h/6.
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int l = 0; l < 2; ++l) {
                    const double pair = (j == l ? h / 3.0 : h / 6.0);
                    fem.convection(local[i], local[j] * n + local[l]) += 0.5 * slope[i] * pair;
                }
        // Exact integral of each hat over its overlap with every patch.
        const double x_lo = static_cast<double>(e) * h;
        const double x_hi = static_cast<double>(e + 1) * h;
        for (int k = 0; k < m; ++k) {
            const double lo = std::max(x_lo, static_cast<double>(k) / m);
            const double hi = std::min(x_hi, static_cast<double>(k + 1) / m);
            if (!(hi > lo)) continue;
            const double left[2] = {(x_hi - lo) / h, (lo - x_lo) / h};
            const double right[2] = {(x_hi - hi) / h, (hi - x_lo) / h};
            for (int i = 0; i < 2; ++i)
                fem.input(local[i], k) += 0.5 * (hi - lo) * (left[i] + right[i]);
        }
    }
    return fem;
}

double burgers_initial_profile(double x) {
    if (x > 0.0 && x < 0.5) {
        const double s = std::sin(2.0 * std::numbers::pi * x);
        return 0.5 * s * s;
    }
    return 0.0;
}

BenchmarkInstance burgers_fem(int n_elements, double eps, double alpha, int m) {
    require(eps > 0.0, ErrorCode::InvalidArgument, "burgers: eps must be positive");
    const BurgersFem fem = burgers_assemble(n_elements, m);
    Eigen::LLT<Matrix> mass_llt(fem.mass);
    require(mass_llt.info() == Eigen::Success, ErrorCode::InvalidArgument, "burgers: mass matrix is not SPD");
    const Index n = fem.mass.rows();

    BenchmarkInstance inst;
    inst.label = "burgers";
    inst.system.A = mass_llt.solve(-eps * fem.stiffness + alpha * fem.mass);
    inst.system.B = mass_llt.solve(fem.input);
    inst.system.N.emplace(2, mass_llt.solve(fem.convection));
    inst.cost.Q = fem.mass;
    inst.cost.R = 10.0 * Matrix::Identity(m, m);
    inst.x0.resize(n);
    for (Index i = 0; i < n; ++i) inst.x0[i] = burgers_initial_profile(fem.nodes[i]);
    inst.horizon = 200.0;
    return inst;
}

}  // namespace pqr
