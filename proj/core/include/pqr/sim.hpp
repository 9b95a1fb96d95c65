#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pqr/albrekht.hpp"
#include "pqr/models.hpp"

namespace pqr {

using OdeRhs = std::function<void(double t, const Vector& x, Vector& dxdt)>;

enum class TrajectoryStatus { Completed, Blowup, Error };
std::string_view to_string(TrajectoryStatus status) noexcept;

struct IntegratorOptions {
    double rtol = 1e-9;
    double atol = 1e-11;
    /// ||x||_inf above this marks a finite-time escape.
    double blowup_norm = 1e6;
    /// Number of leading components checked against blowup_norm (all when negative).
    Index monitored_components = -1;
    /// Dense-output sample times in [0, T]; empty means 0 and T only.
    std::vector<double> sample_times;
    std::size_t max_steps = 5'000'000;
};

struct OdeSolution {
    std::vector<double> times;
    std::vector<Vector> states;
    TrajectoryStatus status = TrajectoryStatus::Completed;
    /// T when completed, otherwise the time of the escape / failure.
    double final_time = 0.0;
    Vector final_state;
    std::string message;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    std::size_t rhs_evaluations = 0;
};

/// Dormand-Prince 5(4) with PI step-size control and 4th-order dense output.
OdeSolution integrate(const OdeRhs& rhs, const Vector& x0, double horizon,
                      const IntegratorOptions& options = {});

struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<Vector> controls;
    std::vector<double> running_cost;
    TrajectoryStatus status = TrajectoryStatus::Completed;
    double final_time = 0.0;
    std::string message;
};

struct CostResult {
    Trajectory trajectory;
    /// s(T); NaN unless the run completed.
    double total_cost = 0.0;
    std::size_t accepted_steps = 0;
};

struct SimulationOptions {
    double rtol = 1e-9;
    double atol = 1e-11;
    /// Uniform samples over [0, T] recorded in the trajectory.
    int samples = 501;
};

/// Integrates x' = A x + B K(x) + f(x) together with s' = l(x, K(x)), s(0) = 0.
CostResult closed_loop_cost(const BenchmarkInstance& instance, const FeedbackLaw& law,
                            std::optional<int> up_to_degree, double horizon,
                            const SimulationOptions& options = {});

/// Same with u = 0.
CostResult open_loop_cost(const BenchmarkInstance& instance, double horizon,
                          const SimulationOptions& options = {});

/// Header t,x1..xn,u1..um,cost; 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace pqr
