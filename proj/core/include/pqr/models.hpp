#pragma once

#include <string>
#include <vector>

#include "pqr/albrekht.hpp"

namespace pqr {

/// A PQR problem together with the initial state and horizon used to evaluate it.
struct BenchmarkInstance {
    PolynomialSystem system;
    QuadraticCost cost;
    Vector x0;
    double horizon = 0.0;
    std::string label;

    void validate() const;
};

/// Controlled Lorenz system (sigma = 10, rho = 28, beta = 8/3), actuated in the first state.
BenchmarkInstance lorenz();

/// Ring of g van der Pol oscillators, state [y_1..y_g, y'_1..y'_g].
///
/// y''_i = -y_i + y'_i - y_i^2 y'_i + (y_{i-1} - 2 y_i + y_{i+1}) + b_i u_i with
/// y_0 = y_g and y_{g+1} = y_1. `actuated_nodes` are 1-based; each adds one
/// input column. Q = I, R = I, y_i(0) = y0, y'_i(0) = 0, T = 50.
BenchmarkInstance vdp_ring(int g, const std::vector<int>& actuated_nodes, double y0);

/// Raw periodic linear-element matrices on [0, 1) with nodes x_i = i / n.
struct BurgersFem {
    double h = 0.0;
    Vector nodes;
    Matrix mass;        ///< circulant h/6 [1, 4, 1]
    Matrix stiffness;   ///< circulant 1/h [-1, 2, -1]
    Matrix convection;  ///< n x n^2, weak form of -1/2 (z^2)_x, i.e. +1/2 int z^2 phi_i'
    Matrix input;       ///< n x m, int over patch k of phi_i
};

BurgersFem burgers_assemble(int n_elements, int m);

/// 0.5 sin^2(2 pi x) on (0, 0.5), zero elsewhere on [0, 1).
double burgers_initial_profile(double x);

/// z' = eps z_xx - 1/2 (z^2)_x + alpha z + sum_k chi_k u_k, in standard form via M^{-1}.
/// Q = M, R = 10 I, nodal interpolation of the initial profile, T = 200.
BenchmarkInstance burgers_fem(int n_elements, double eps, double alpha, int m);

}  // namespace pqr
