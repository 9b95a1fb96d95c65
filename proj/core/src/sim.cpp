#include "pqr/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "pqr/errors.hpp"

namespace pqr {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
constexpr double a21 = 0.2;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// PI controller constants.
constexpr double kSafe = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 10.0;
constexpr double kBeta = 0.04;

double scaled_norm(const Vector& v, const Vector& y0, const Vector& y1, double rtol, double atol) {
    double sum = 0.0;
    for (Index i = 0; i < v.size(); ++i) {
        const double sk = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = v[i] / sk;
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(std::max<Index>(v.size(), 1)));
}

double initial_step(const OdeRhs& rhs, double t0, const Vector& x0, const Vector& f0, double horizon,
                    double rtol, double atol, std::size_t& evals) {
    const double dnf = scaled_norm(f0, x0, x0, rtol, atol);
    const double dny = scaled_norm(x0, x0, x0, rtol, atol);
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
    h = std::min(h, horizon);
    Vector x1 = x0 + h * f0;
    Vector f1(x0.size());
    rhs(t0 + h, x1, f1);
    ++evals;
    if (!f1.allFinite()) return std::min(h, 1e-6 * horizon);
    const double der2 = scaled_norm(f1 - f0, x0, x0, rtol, atol) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, horizon});
}

double monitored_inf_norm(const Vector& x, Index count) {
    const Index k = count < 0 ? x.size() : std::min(count, x.size());
    return k == 0 ? 0.0 : x.head(k).cwiseAbs().maxCoeff();
}

std::vector<double> uniform_samples(double horizon, int samples) {
    const int count = std::max(samples, 2);
    std::vector<double> times(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        times[static_cast<std::size_t>(i)] = horizon * static_cast<double>(i) / (count - 1);
    times.back() = horizon;
    return times;
}

}  // namespace

std::string_view to_string(TrajectoryStatus status) noexcept {
    switch (status) {
        case TrajectoryStatus::Completed: return "completed";
        case TrajectoryStatus::Blowup: return "blowup";
        case TrajectoryStatus::Error: return "error";
    }
    return "error";
}

OdeSolution integrate(const OdeRhs& rhs, const Vector& x0, double horizon, const IntegratorOptions& options) {
    require(horizon > 0.0, ErrorCode::InvalidArgument, "integrate: horizon must be positive");
    require(options.rtol > 0.0 && options.atol > 0.0, ErrorCode::InvalidArgument,
            "integrate: tolerances must be positive");
    require(x0.allFinite(), ErrorCode::InvalidArgument, "integrate: initial state is not finite");

    std::vector<double> samples = options.sample_times;
    if (samples.empty()) samples = {0.0, horizon};
    std::sort(samples.begin(), samples.end());
    for (double s : samples)
        require(s >= 0.0 && s <= horizon, ErrorCode::InvalidArgument, "integrate: sample time outside [0, T]");

    OdeSolution sol;
    const Index dim = x0.size();
    std::size_t next_sample = 0;
    auto record = [&](double t, const Vector& x) {
        sol.times.push_back(t);
        sol.states.push_back(x);
    };
    while (next_sample < samples.size() && samples[next_sample] <= 0.0) record(samples[next_sample++], x0);

    Vector x = x0;
    double t = 0.0;
    Vector k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
    Vector stage(dim), x_new(dim), err_vec(dim);
    rhs(t, x, k1);
    ++sol.rhs_evaluations;
    if (!k1.allFinite()) {
        sol.status = TrajectoryStatus::Error;
        sol.final_time = t;
        sol.final_state = x;
        sol.message = "non-finite derivative at t = 0";
        return sol;
    }

    double h = initial_step(rhs, t, x, k1, horizon, options.rtol, options.atol, sol.rhs_evaluations);
    double facold = 1e-4;
    bool last_rejected = false;
    const double h_min = 1e-14 * horizon;
    const double expo1 = 0.2 - kBeta * 0.75;

    // Non-finite output from a finite state inside the blowup bound is a right-hand side error,
    // as opposed to a trial stage that has already escaped.
    double error_time = std::numeric_limits<double>::quiet_NaN();
    auto eval = [&](double ts, const Vector& y, Vector& out) {
        rhs(ts, y, out);
        if (std::isnan(error_time) && !out.allFinite() && y.allFinite() &&
            monitored_inf_norm(y, options.monitored_components) <= options.blowup_norm)
            error_time = ts;
    };

    while (t < horizon) {
        if (sol.accepted_steps + sol.rejected_steps >= options.max_steps) {
            sol.status = TrajectoryStatus::Error;
            sol.message = "step limit exceeded at t = " + format_number(t);
            break;
        }
        if (h < h_min) {
            sol.status = TrajectoryStatus::Blowup;
            sol.message = "step size underflow at t = " + format_number(t);
            break;
        }
        bool last = false;
        if (t + h >= horizon) {
            h = horizon - t;
            last = true;
        }

        stage = x + h * a21 * k1;
        eval(t + c2 * h, stage, k2);
        stage = x + h * (a31 * k1 + a32 * k2);
        eval(t + c3 * h, stage, k3);
        stage = x + h * (a41 * k1 + a42 * k2 + a43 * k3);
        eval(t + c4 * h, stage, k4);
        stage = x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        eval(t + c5 * h, stage, k5);
        stage = x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        eval(t + h, stage, k6);
        x_new = x + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        eval(t + h, x_new, k7);
        sol.rhs_evaluations += 6;
        if (!std::isnan(error_time)) {
            sol.status = TrajectoryStatus::Error;
            sol.message = "non-finite derivative at t = " + format_number(error_time);
            sol.final_time = error_time;
            sol.final_state = x;
            return sol;
        }

        err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double err = scaled_norm(err_vec, x, x_new, options.rtol, options.atol);
        if (!std::isfinite(err) || !x_new.allFinite()) {
            // A trial stage left the region where the right-hand side is finite.
            ++sol.rejected_steps;
            h *= 0.1;
            last_rejected = true;
            continue;
        }

        const double fac11 = std::pow(err, expo1);
        double fac = fac11 / std::pow(facold, kBeta);
        fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
        double h_new = h / fac;

        if (err > 1.0) {
            ++sol.rejected_steps;
            h /= std::min(1.0 / kFacMin, fac11 / kSafe);
            last_rejected = true;
            continue;
        }

        ++sol.accepted_steps;
        facold = std::max(err, 1e-4);
        if (last_rejected) h_new = std::min(h_new, h);
        last_rejected = false;

        const double t_new = last ? horizon : t + h;
        // Dense output coefficients for samples inside (t, t_new].
        if (next_sample < samples.size() && samples[next_sample] <= t_new) {
            const Vector r1 = x;
            const Vector r2 = x_new - x;
            const Vector r3 = h * k1 - r2;
            const Vector r4 = r2 - h * k7 - r3;
            const Vector r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            while (next_sample < samples.size() && samples[next_sample] <= t_new) {
                const double ts = samples[next_sample++];
                if (ts == t_new) {
                    record(ts, x_new);
                    continue;
                }
                const double theta = (ts - t) / h;
                const double theta1 = 1.0 - theta;
                record(ts, r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5))));
            }
        }

        x = x_new;
        k1 = k7;
        t = t_new;
        h = h_new;

        if (monitored_inf_norm(x, options.monitored_components) > options.blowup_norm) {
            sol.status = TrajectoryStatus::Blowup;
            sol.message = "state norm exceeded " + format_number(options.blowup_norm) +
                          " at t = " + format_number(t);
            break;
        }
        if (!k1.allFinite()) {
            sol.status = TrajectoryStatus::Error;
            sol.message = "non-finite derivative at t = " + format_number(t);
            break;
        }
    }
    sol.final_time = t;
    sol.final_state = x;
    return sol;
}

namespace {

CostResult simulate_with_cost(const BenchmarkInstance& instance, const FeedbackLaw* law,
                              std::optional<int> up_to_degree, double horizon,
                              const SimulationOptions& options) {
    instance.validate();
    const PolynomialSystem& sys = instance.system;
    const QuadraticCost& cost = instance.cost;
    const Index n = sys.n();
    const Index m = sys.m();
    if (law) {
        require(law->n == n && law->m == m, ErrorCode::DimensionMismatch,
                "closed_loop_cost: law dimensions do not match the instance");
        if (up_to_degree)
            require(*up_to_degree >= 1 && *up_to_degree <= law->max_degree(), ErrorCode::MissingCoefficient,
                    "closed_loop_cost: requested degree not available");
    }

    auto control = [&](const Vector& x) -> Vector {
        return law ? eval_feedback(*law, x, up_to_degree) : Vector(Vector::Zero(m));
    };
    const OdeRhs rhs = [&](double, const Vector& z, Vector& dz) {
        const Vector x = z.head(n);
        const Vector u = control(x);
        dz.head(n) = sys.rhs(x, u);
        dz[n] = cost.running_cost(x, u);
    };

    IntegratorOptions io;
    io.rtol = options.rtol;
    io.atol = options.atol;
    io.monitored_components = n;
    io.sample_times = uniform_samples(horizon, options.samples);

    Vector z0(n + 1);
    z0.head(n) = instance.x0;
    z0[n] = 0.0;
    const OdeSolution ode = integrate(rhs, z0, horizon, io);

    CostResult result;
    Trajectory& traj = result.trajectory;
    traj.status = ode.status;
    traj.final_time = ode.final_time;
    traj.message = ode.message;
    for (std::size_t i = 0; i < ode.times.size(); ++i) {
        const Vector x = ode.states[i].head(n);
        traj.times.push_back(ode.times[i]);
        traj.states.push_back(x);
        traj.controls.push_back(control(x));
        traj.running_cost.push_back(ode.states[i][n]);
    }
    result.accepted_steps = ode.accepted_steps;
    result.total_cost = ode.status == TrajectoryStatus::Completed ? ode.final_state[n]
                                                                  : std::numeric_limits<double>::quiet_NaN();
    return result;
}

}  // namespace

CostResult closed_loop_cost(const BenchmarkInstance& instance, const FeedbackLaw& law,
                            std::optional<int> up_to_degree, double horizon, const SimulationOptions& options) {
    return simulate_with_cost(instance, &law, up_to_degree, horizon, options);
}

CostResult open_loop_cost(const BenchmarkInstance& instance, double horizon, const SimulationOptions& options) {
    return simulate_with_cost(instance, nullptr, std::nullopt, horizon, options);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
    const Index n = trajectory.states.empty() ? 0 : trajectory.states.front().size();
    const Index m = trajectory.controls.empty() ? 0 : trajectory.controls.front().size();
    out << 't';
    for (Index i = 1; i <= n; ++i) out << ",x" << i;
    for (Index i = 1; i <= m; ++i) out << ",u" << i;
    out << ",cost\n";
    const auto old_precision = out.precision(17);
    for (std::size_t r = 0; r < trajectory.times.size(); ++r) {
        out << trajectory.times[r];
        for (Index i = 0; i < n; ++i) out << ',' << trajectory.states[r][i];
        for (Index i = 0; i < m; ++i) out << ',' << trajectory.controls[r][i];
        out << ',' << trajectory.running_cost[r] << '\n';
    }
    out.precision(old_precision);
}

}  // namespace pqr
