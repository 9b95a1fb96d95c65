#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/resource.h>

#include "oracles.hpp"
#include "pqr/albrekht.hpp"
#include "pqr/models.hpp"
#include "pqr/riccati.hpp"
#include "pqr/schur_nway.hpp"
#include "pqr/sim.hpp"

namespace {

using namespace pqr;
using namespace pqr::testing;

struct Verdict {
    bool passed = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            passed = false;
            detail << " [" << what << "]";
        }
    }
};

struct Row {
    double value;
    double cost;
};

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void compare_table(Verdict& v, const BenchmarkInstance& inst, const std::vector<Row>& table, double tol) {
    const PqrResult res = pqr::pqr(inst.system, inst.cost, static_cast<int>(table.size()));
    double worst = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const int d = static_cast<int>(i) + 1;
        const double value = eval_value(res.value, inst.x0, d + 1);
        const CostResult cost = closed_loop_cost(inst, res.feedback, d, inst.horizon);
        const bool completed = cost.trajectory.status == TrajectoryStatus::Completed;
        const double ev = rel(value, table[i].value);
        const double ec = completed ? rel(cost.total_cost, table[i].cost) : INFINITY;
        worst = std::max({worst, ev, ec});
        v.require(ev <= tol, "d=" + std::to_string(d) + " value " + fmt(value) + " vs " + fmt(table[i].value));
        v.require(ec <= tol, "d=" + std::to_string(d) + " cost " +
                                 (completed ? fmt(cost.total_cost) : std::string(to_string(cost.trajectory.status))) +
                                 " vs " + fmt(table[i].cost));
    }
    v.detail << " worst relative deviation " << fmt(worst) << " (tolerance " << tol << ")";
}

Verdict lorenz_table() {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    compare_table(v, lorenz(),
                  {{7533.49, 6999.37},
                   {7062.15, 6911.03},
                   {6957.19, 6906.45},
                   {6924.27, 6906.21},
                   {6913.68, 6906.18},
                   {6910.45, 6906.17},
                   {6909.30, 6906.17}},
                  0.005);
    v.detail << ", " << fmt(seconds_since(start)) << " s";
    return v;
}

Verdict burgers_table() {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    compare_table(v, burgers_fem(16, 0.005, 0.3, 3),
                  {{0.0162721, 0.0190134},
                   {0.0216261, 0.0188797},
                   {0.0200150, 0.0187951},
                   {0.0178709, 0.0187623},
                   {0.0183326, 0.0187435}},
                  0.015);
    v.detail << ", " << fmt(seconds_since(start)) << " s";
    return v;
}

Verdict vdp_table() {
    Verdict v;
    const BenchmarkInstance inst = vdp_ring(4, {1, 2}, 0.3);
    const std::vector<Row> table{{4.6380, 4.4253}, {4.6380, 4.4253}, {4.4125, 4.4208}, {4.4125, 4.4208},
                                 {4.4246, 4.4208}, {4.4246, 4.4208}, {4.4242, 4.4208}};
    const PqrResult res = pqr::pqr(inst.system, inst.cost, 7);
    std::vector<Row> got;
    double worst = 0.0;
    for (int d = 1; d <= 7; ++d) {
        const CostResult cost = closed_loop_cost(inst, res.feedback, d, inst.horizon);
        v.require(cost.trajectory.status == TrajectoryStatus::Completed, "d=" + std::to_string(d) + " not completed");
        got.push_back({eval_value(res.value, inst.x0, d + 1), cost.total_cost});
        const Row& want = table[static_cast<std::size_t>(d - 1)];
        const double ev = rel(got.back().value, want.value), ec = rel(got.back().cost, want.cost);
        worst = std::max({worst, ev, ec});
        v.require(ev <= 0.02, "d=" + std::to_string(d) + " value " + fmt(got.back().value));
        v.require(ec <= 0.02, "d=" + std::to_string(d) + " cost " + fmt(got.back().cost));
    }
    double repeat = 0.0;
    for (int d = 2; d <= 6; d += 2) {
        const Row& even = got[static_cast<std::size_t>(d - 1)];
        const Row& odd = got[static_cast<std::size_t>(d - 2)];
        repeat = std::max({repeat, std::abs(even.value - odd.value), std::abs(even.cost - odd.cost)});
        v.require(res.feedback.k(d).norm() == 0.0, "k" + std::to_string(d) + " nonzero");
    }
    v.require(repeat <= 1e-6, "even rows differ by " + fmt(repeat));
    v.detail << " worst relative deviation " << fmt(worst) << " (tolerance 0.02), even/odd row gap " << fmt(repeat);
    return v;
}

Verdict vdp_actuators() {
    Verdict v;
    struct Case {
        std::vector<int> nodes;
        bool cubic_blows_up;
    };
    for (const Case& c : std::vector<Case>{{{1, 2, 3, 4}, true}, {{1, 2, 3, 6}, false}, {{1, 2, 4, 6}, false},
                                           {{1, 2, 4, 7}, false}}) {
        const BenchmarkInstance inst = vdp_ring(8, c.nodes, 0.3);
        const PqrResult res = pqr::pqr(inst.system, inst.cost, 5);
        std::vector<CostResult> costs;
        for (int d : {1, 3, 5}) costs.push_back(closed_loop_cost(inst, res.feedback, d, inst.horizon));
        std::string label = "(";
        for (int node : c.nodes) label += std::to_string(node) + (node == c.nodes.back() ? ")" : ",");
        v.detail << ' ' << label;
        for (const CostResult& r : costs)
            v.detail << ' '
                     << (r.trajectory.status == TrajectoryStatus::Completed ? fmt(r.total_cost)
                                                                          : std::string(to_string(r.trajectory.status)));
        const bool linear_ok = costs[0].trajectory.status == TrajectoryStatus::Completed;
        const bool quintic_ok = costs[2].trajectory.status == TrajectoryStatus::Completed;
        v.require(linear_ok, label + " linear did not complete");
        v.require(quintic_ok, label + " quintic did not complete");
        if (c.cubic_blows_up) {
            v.require(costs[1].trajectory.status == TrajectoryStatus::Blowup, label + " cubic did not blow up");
            continue;
        }
        for (std::size_t i : {1u, 2u}) {
            const bool done = costs[i].trajectory.status == TrajectoryStatus::Completed;
            v.require(done && linear_ok && costs[i].total_cost <= costs[0].total_cost * 1.001,
                      label + " degree " + std::to_string(2 * i + 1) + " worse than linear");
        }
    }
    return v;
}

Verdict property_suite() {
    Verdict v;
    Rng rng(500);

    double nway_worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = 1 + trial % 4;
        const int d = 1 + (trial / 4) % 4;
        const Matrix a = random_stable(rng, n, 0.1 + 0.2 * (trial % 3));
        const Vector b = random_vector(rng, ipow(n, d));
        const Vector got = nway_solve(schur_decompose(a), d, ModeTensor::cube(n, d, b)).entries();
        const Vector want = naive_lyap(a, n, d).partialPivLu().solve(b);
        nway_worst = std::max(nway_worst, rel_err(got, want));
    }
    v.require(nway_worst <= 1e-9, "nway dense oracle " + fmt(nway_worst));

    double are_worst = 0.0, abscissa_worst = -INFINITY;
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = 1 + trial % 8;
        const Index lo = (n + 1) / 2;
        const Index m = lo + static_cast<Index>(rng() % static_cast<std::uint64_t>(n - lo + 1));
        const Matrix a = random_matrix(rng, n, n), b = random_matrix(rng, n, m);
        const Matrix c = random_matrix(rng, n, n), e = random_matrix(rng, m, m);
        const Matrix q = c * c.transpose() / double(n) + Matrix::Identity(n, n);
        const Matrix r = e * e.transpose() / double(m) + Matrix::Identity(m, m);
        const AreSolution s = care_solve(a, b, q, r);
        are_worst = std::max(are_worst, care_residual(a, b, q, r, s.V2) / std::max(1.0, q.norm()));
        abscissa_worst = std::max(abscissa_worst, spectral_abscissa(a + b * s.K1));
    }
    v.require(are_worst <= 1e-9, "ARE residual " + fmt(are_worst));
    v.require(abscissa_worst < 0.0, "closed loop abscissa " + fmt(abscissa_worst));

    const BenchmarkInstance lz = lorenz();
    double decoupling_worst = 0.0;
    {
        const PqrResult res = pqr::pqr(lz.system, lz.cost, 4);
        const Index n = lz.system.n();
        const Matrix eye = Matrix::Identity(n, n);
        const Matrix& k1 = res.feedback.k(1);
        for (int d = 2; d <= 4; ++d) {
            const Matrix& kd = res.feedback.k(d);
            const Matrix bk = lz.system.B * kd;
            const Matrix lhs = res.value.v(2).transpose() * (naive_kron(bk, eye) + naive_kron(eye, bk)) +
                               vec(lz.cost.R).transpose() * (naive_kron(kd, k1) + naive_kron(k1, kd));
            const double scale = res.value.v(2).norm() * bk.norm() + lz.cost.R.norm() * kd.norm() * k1.norm();
            decoupling_worst = std::max(decoupling_worst, lhs.norm() / scale);
        }
    }
    v.require(decoupling_worst <= 1e-8, "decoupling " + fmt(decoupling_worst));

    double lqr_worst = 0.0;
    for (Index n = 1; n <= 4; ++n) {
        const PolynomialSystem s{random_matrix(rng, n, n), random_matrix(rng, n, 2), {}};
        const PqrResult res = pqr::pqr(s, {Matrix::Identity(n, n), Matrix::Identity(2, 2)}, 5);
        const double v2 = res.value.v(2).norm();
        for (int k = 3; k <= 6; ++k) lqr_worst = std::max(lqr_worst, res.value.v(k).norm() / v2);
        for (int j = 2; j <= 5; ++j) lqr_worst = std::max(lqr_worst, res.feedback.k(j).norm() / v2);
    }
    v.require(lqr_worst <= 1e-10, "LQR degeneration " + fmt(lqr_worst));

    const PolynomialSystem scalar_sys{Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, 1.0),
                                      {{2, Matrix::Constant(1, 1, 1.0)}}};
    const QuadraticCost scalar_cost{Matrix::Identity(1, 1), Matrix::Identity(1, 1)};
    double min_slope = INFINITY;
    for (const auto& [sys, cost] : {std::pair{scalar_sys, scalar_cost}, std::pair{lz.system, lz.cost}}) {
        for (int d = 2; d <= 4; ++d) {
            const PqrResult res = pqr::pqr(sys, cost, d);
            std::vector<std::pair<double, double>> points;
            for (int trial = 0; trial < 8; ++trial) {
                Vector w = random_vector(rng, sys.n());
                w.normalize();
                for (double eps : {1e-1, 1e-2})
                    points.emplace_back(eps, hjb_residual(sys, cost, res.value, res.feedback, Vector(eps * w)).first);
            }
            const double slope = loglog_slope(points);
            min_slope = std::min(min_slope, slope - d);
            v.require(slope >= d + 1.5, "n=" + std::to_string(sys.n()) + " d=" + std::to_string(d) + " slope " +
                                            fmt(slope));
        }
    }

    const PqrResult scalar_res = pqr::pqr(scalar_sys, scalar_cost, 2);
    const double scalar_worst = std::max({std::abs(scalar_res.value.v(2)[0] - (std::sqrt(2.0) - 1.0)),
                                          std::abs(scalar_res.value.v(3)[0] - 0.1952621),
                                          std::abs(scalar_res.feedback.k(2)(0, 0) + 0.2928932)});
    v.require(std::abs(scalar_res.value.v(2)[0] - 0.4142136) <= 5e-8, "scalar v2");
    v.require(std::abs(scalar_res.value.v(3)[0] - 0.1952621) <= 5e-8, "scalar v3");
    v.require(std::abs(scalar_res.feedback.k(2)(0, 0) + 0.2928932) <= 5e-8, "scalar k2");
    const double v2 = std::sqrt(2.0) - 1.0, v3 = 2.0 * v2 / (3.0 * (1.0 + v2));
    v.require(std::abs(scalar_res.value.v(2)[0] - v2) <= 1e-9, "scalar v2 exact");
    v.require(std::abs(scalar_res.value.v(3)[0] - v3) <= 1e-9, "scalar v3 exact");
    v.require(std::abs(scalar_res.feedback.k(2)(0, 0) + 1.5 * v3) <= 1e-9, "scalar k2 exact");

    v.detail << " nway " << fmt(nway_worst) << ", ARE " << fmt(are_worst) << ", abscissa " << fmt(abscissa_worst)
             << ", decoupling " << fmt(decoupling_worst) << ", LQR " << fmt(lqr_worst) << ", min slope - d "
             << fmt(min_slope) << ", scalar " << fmt(scalar_worst);
    return v;
}

Verdict performance_guard() {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    const BenchmarkInstance inst = vdp_ring(4, {1, 2}, 0.3);
    PqrOptions options;
    options.verify_solves = true;
    try {
        const PqrResult res = pqr::pqr(inst.system, inst.cost, 7, options);
        for (int d = 1; d <= 7; ++d) closed_loop_cost(inst, res.feedback, d, inst.horizon);
        v.require(res.value.max_degree() == 8, "value series incomplete");
    } catch (const std::exception& e) {
        v.require(false, e.what());
    }
    const double elapsed = seconds_since(start);
    rusage usage{};
    getrusage(RUSAGE_SELF, &usage);
    const double peak_gb = static_cast<double>(usage.ru_maxrss) / (1024.0 * 1024.0);
    v.require(elapsed <= 900.0, "elapsed " + fmt(elapsed) + " s");
    v.require(peak_gb < 4.0, "peak " + fmt(peak_gb) + " GB");
    v.detail << ' ' << fmt(elapsed) << " s, peak RSS " << fmt(peak_gb) << " GB, solves verified";
    return v;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        Verdict (*run)();
    };
    const Criterion criteria[] = {
        {"1 lorenz-table", lorenz_table},       {"2 burgers-table", burgers_table},
        {"3 vdp-table", vdp_table},             {"4 vdp-actuator-placement", vdp_actuators},
        {"5 property-suite", property_suite},   {"6 performance-guard", performance_guard},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v.passed = false;
            v.detail << " exception: " << e.what();
        }
        if (!v.passed) ++failures;
        std::cout << (v.passed ? "PASS " : "FAIL ") << c.name << ":" << v.detail.str() << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
