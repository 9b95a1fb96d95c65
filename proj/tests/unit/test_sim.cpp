#include <cmath>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pqr/albrekht.hpp"
#include "pqr/models.hpp"
#include "pqr/sim.hpp"

namespace pqr {
namespace {

using namespace pqr::testing;

BenchmarkInstance scalar_decay(double x0, double horizon) {
    BenchmarkInstance inst;
    inst.system.A = Matrix::Constant(1, 1, -1.0);
    inst.system.B = Matrix::Constant(1, 1, 1.0);
    inst.cost.Q = Matrix::Identity(1, 1);
    inst.cost.R = Matrix::Identity(1, 1);
    inst.x0 = Vector::Constant(1, x0);
    inst.horizon = horizon;
    inst.label = "decay";
    return inst;
}

TEST(Integrate, LinearDecay) {
    const OdeRhs rhs = [](double, const Vector& x, Vector& dx) { dx = -x; };
    const OdeSolution sol = integrate(rhs, Vector::Constant(1, 1.0), 1.0);
    ASSERT_EQ(sol.status, TrajectoryStatus::Completed);
    EXPECT_EQ(sol.final_time, 1.0);
    EXPECT_NEAR(sol.final_state[0], std::exp(-1.0), 1e-9 * std::exp(-1.0));
    ASSERT_EQ(sol.times.size(), 2u);
    EXPECT_EQ(sol.times.front(), 0.0);
    EXPECT_EQ(sol.times.back(), 1.0);
}

TEST(Integrate, DenseOutputMatchesExactSolution) {
    IntegratorOptions opt;
    for (int i = 0; i <= 20; ++i) opt.sample_times.push_back(0.25 * i);
    const OdeRhs rhs = [](double, const Vector& x, Vector& dx) {
        dx.resize(2);
        dx << x[1], -x[0];
    };
    const OdeSolution sol = integrate(rhs, Eigen::Vector2d(1, 0), 5.0, opt);
    ASSERT_EQ(sol.states.size(), 21u);
    for (std::size_t i = 0; i < sol.times.size(); ++i) {
        EXPECT_EQ(sol.times[i], opt.sample_times[i]);
        EXPECT_NEAR(sol.states[i][0], std::cos(sol.times[i]), 1e-8);
        EXPECT_NEAR(sol.states[i][1], -std::sin(sol.times[i]), 1e-8);
    }
}

TEST(Integrate, FiniteTimeEscape) {
    const OdeRhs rhs = [](double, const Vector& x, Vector& dx) { dx = x.cwiseProduct(x); };
    const OdeSolution sol = integrate(rhs, Vector::Constant(1, 1.0), 2.0);
    EXPECT_EQ(sol.status, TrajectoryStatus::Blowup);
    EXPECT_LT(sol.final_time, 1.0);
    EXPECT_GT(sol.final_time, 0.99);
    EXPECT_FALSE(sol.message.empty());
}

TEST(Integrate, NonFiniteDerivativeIsAnError) {
    const OdeRhs rhs = [](double t, const Vector& x, Vector& dx) {
        dx = -x;
        if (t >= 0.5) dx[0] = std::numeric_limits<double>::quiet_NaN();
    };
    const OdeSolution sol = integrate(rhs, Vector::Constant(1, 1.0), 1.0);
    EXPECT_EQ(sol.status, TrajectoryStatus::Error);
    EXPECT_NEAR(sol.final_time, 0.5, 0.05);
}

TEST(Integrate, UncontrolledLorenzStaysOnAttractor) {
    const BenchmarkInstance lz = lorenz();
    IntegratorOptions opt;
    for (int i = 0; i <= 5000; ++i) opt.sample_times.push_back(0.01 * i);
    const OdeRhs rhs = [&](double, const Vector& x, Vector& dx) { dx = lz.system.rhs(x, Vector::Zero(1)); };
    const OdeSolution sol = integrate(rhs, lz.x0, 50.0, opt);
    ASSERT_EQ(sol.status, TrajectoryStatus::Completed);
    for (const Vector& x : sol.states) ASSERT_LT(x.lpNorm<Eigen::Infinity>(), 100.0);
}

TEST(Integrate, StatusNames) {
    EXPECT_EQ(to_string(TrajectoryStatus::Completed), "completed");
    EXPECT_EQ(to_string(TrajectoryStatus::Blowup), "blowup");
    EXPECT_EQ(to_string(TrajectoryStatus::Error), "error");
}

TEST(Cost, OpenLoopDecayIsHalf) {
    const CostResult res = open_loop_cost(scalar_decay(1.0, 20.0), 20.0);
    ASSERT_EQ(res.trajectory.status, TrajectoryStatus::Completed);
    EXPECT_NEAR(res.total_cost, 0.5 * (1.0 - std::exp(-40.0)), 1e-8);
}

TEST(Cost, ZeroStateCostsNothing) {
    const BenchmarkInstance lz = lorenz();
    BenchmarkInstance at_rest = lz;
    at_rest.x0 = Vector::Zero(3);
    const PqrResult res = pqr(lz.system, lz.cost, 3);
    const CostResult cost = closed_loop_cost(at_rest, res.feedback, std::nullopt, 50.0);
    EXPECT_EQ(cost.total_cost, 0.0);
    for (const Vector& x : cost.trajectory.states) EXPECT_EQ(x.norm(), 0.0);
    EXPECT_EQ(open_loop_cost(scalar_decay(0.0, 5.0), 5.0).total_cost, 0.0);
}

TEST(Cost, ScalarLqrMatchesValueFunction) {
    const BenchmarkInstance inst = scalar_decay(1.0, 40.0);
    const PqrResult res = pqr(inst.system, inst.cost, 1);
    const CostResult cost = closed_loop_cost(inst, res.feedback, std::nullopt, 40.0);
    EXPECT_NEAR(cost.total_cost, std::sqrt(2.0) - 1.0, 1e-8);
}

TEST(Cost, LorenzTableTrend) {
    const BenchmarkInstance lz = lorenz();
    const PqrResult res = pqr(lz.system, lz.cost, 7);
    double previous = std::numeric_limits<double>::infinity();
    double previous_gap = std::numeric_limits<double>::infinity();
    for (int d = 1; d <= 7; ++d) {
        const CostResult cost = closed_loop_cost(lz, res.feedback, d, lz.horizon);
        ASSERT_EQ(cost.trajectory.status, TrajectoryStatus::Completed);
        EXPECT_LE(cost.total_cost, previous) << "d = " << d;
        const double gap = std::abs(eval_value(res.value, lz.x0, d + 1) - cost.total_cost);
        if (d >= 3) {
            EXPECT_LE(gap, previous_gap * 1.05) << "d = " << d;
        }
        previous = cost.total_cost;
        previous_gap = gap;
    }
    EXPECT_NEAR(closed_loop_cost(lz, res.feedback, 1, lz.horizon).total_cost, 6999.37, 0.005 * 6999.37);
    EXPECT_NEAR(previous, 6906.17, 0.005 * 6906.17);
}

TEST(Cost, ToleranceConvergence) {
    const BenchmarkInstance lz = lorenz();
    const PqrResult res = pqr(lz.system, lz.cost, 3);
    SimulationOptions coarse, fine;
    fine.rtol = coarse.rtol / 2;
    fine.atol = coarse.atol / 2;
    const double a = closed_loop_cost(lz, res.feedback, std::nullopt, lz.horizon, coarse).total_cost;
    const double b = closed_loop_cost(lz, res.feedback, std::nullopt, lz.horizon, fine).total_cost;
    EXPECT_LE(std::abs(a - b), 1e-6 * std::abs(b));
}

TEST(Cost, BurgersFeedbackBeatsOpenLoop) {
    const BenchmarkInstance bg = burgers_fem(16, 0.005, 0.3, 3);
    const PqrResult res = pqr(bg.system, bg.cost, 1);
    const double horizon = 10.0;
    const CostResult open = open_loop_cost(bg, horizon);
    const CostResult closed = closed_loop_cost(bg, res.feedback, 1, horizon);
    ASSERT_EQ(open.trajectory.status, TrajectoryStatus::Completed);
    ASSERT_EQ(closed.trajectory.status, TrajectoryStatus::Completed);
    EXPECT_GT(open.total_cost, closed.total_cost);
}

TEST(Cost, BlowupReportsNaNCost) {
    const BenchmarkInstance vdp = vdp_ring(4, {1, 2}, 3.0);
    const CostResult open = open_loop_cost(vdp, 50.0);
    ASSERT_EQ(open.trajectory.status, TrajectoryStatus::Completed);
    BenchmarkInstance growth = scalar_decay(1.0, 2.0);
    growth.system.N[2] = Matrix::Constant(1, 1, 2.0);
    const CostResult escape = open_loop_cost(growth, 2.0);
    EXPECT_EQ(escape.trajectory.status, TrajectoryStatus::Blowup);
    EXPECT_TRUE(std::isnan(escape.total_cost));
    EXPECT_LT(escape.trajectory.final_time, 2.0);
}

TEST(Cost, SamplesAreUniform) {
    SimulationOptions opt;
    opt.samples = 11;
    const CostResult res = open_loop_cost(scalar_decay(1.0, 2.0), 2.0, opt);
    ASSERT_EQ(res.trajectory.times.size(), 11u);
    ASSERT_EQ(res.trajectory.controls.size(), 11u);
    ASSERT_EQ(res.trajectory.running_cost.size(), 11u);
    for (int i = 0; i <= 10; ++i) EXPECT_NEAR(res.trajectory.times[i], 0.2 * i, 1e-15);
    EXPECT_EQ(res.trajectory.running_cost.front(), 0.0);
    EXPECT_NEAR(res.trajectory.running_cost.back(), res.total_cost, 1e-15);
    for (std::size_t i = 1; i < 11; ++i) EXPECT_GE(res.trajectory.running_cost[i], res.trajectory.running_cost[i - 1]);
}

TEST(TrajectoryCsv, HeaderAndPrecision) {
    SimulationOptions opt;
    opt.samples = 3;
    const BenchmarkInstance lz = lorenz();
    const PqrResult res = pqr(lz.system, lz.cost, 1);
    const CostResult cost = closed_loop_cost(lz, res.feedback, std::nullopt, 1.0, opt);
    std::ostringstream out;
    write_trajectory_csv(out, cost.trajectory);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,x1,x2,x3,u1,cost");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        std::istringstream fields(line);
        std::string field;
        int count = 0;
        while (std::getline(fields, field, ',')) ++count;
        EXPECT_EQ(count, 6);
        if (rows == 1) {
            EXPECT_EQ(line.substr(0, 2), "0,");
        }
    }
    EXPECT_EQ(rows, 3);
    // 17 significant digits round-trip every double
    std::istringstream again(out.str());
    std::getline(again, line);
    std::getline(again, line);
    std::getline(again, line);
    const double x1 = std::stod(line.substr(line.find(',') + 1));
    EXPECT_EQ(x1, cost.trajectory.states[1][0]);
}

}  // namespace
}  // namespace pqr
