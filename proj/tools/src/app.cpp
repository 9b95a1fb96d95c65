#include "pqr_cli/app.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pqr/errors.hpp"
#include "pqr/memory_guard.hpp"
#include "pqr/serialize.hpp"
#include "pqr/sim.hpp"
#include "pqr_cli/validation.hpp"

namespace pqr::cli {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void prepare_out_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw ConfigError("cannot create output directory " + dir.string());
}

struct Solved {
    BenchmarkInstance instance;
    std::unique_ptr<AlbrekhtSolver> solver;
    double are_seconds = 0.0;
};

Solved solve_instance(const RunConfig& config, int degree) {
    Solved s;
    s.instance = build_instance(config);
    const auto start = Clock::now();
    PqrOptions opts;
    opts.strict_paper_rhs = config.strict_paper_rhs;
    opts.report_asymmetry = true;
    s.solver = std::make_unique<AlbrekhtSolver>(s.instance.system, s.instance.cost, opts);
    s.are_seconds = seconds_since(start);
    s.solver->extend_to(degree);
    return s;
}

SimulationOptions sim_options(const RunConfig& config) {
    SimulationOptions o;
    o.rtol = config.rtol;
    o.atol = config.atol;
    o.samples = config.samples;
    return o;
}

std::string summary_json(const RunConfig& config, const Solved& s) {
    using nlohmann::ordered_json;
    const AlbrekhtSolver& solver = *s.solver;
    ordered_json doc;
    doc["model"] = to_string(config.model);
    doc["label"] = s.instance.label;
    doc["n"] = s.instance.system.n();
    doc["m"] = s.instance.system.m();
    doc["p"] = s.instance.system.degree();
    doc["degree"] = solver.degree();
    doc["strictPaperRhs"] = config.strict_paper_rhs;
    doc["areResidual"] = solver.are().residual_norm;
    doc["areSeconds"] = s.are_seconds;
    ordered_json degrees = ordered_json::array();
    degrees.push_back({{"degree", 1},
                       {"seconds", s.are_seconds},
                       {"valueNorm", solver.value().v(2).norm()},
                       {"gainNorm", solver.feedback().k(1).norm()},
                       {"valueSeriesAtX0", eval_value(solver.value(), s.instance.x0, 2)}});
    for (const DegreeReport& r : solver.reports()) {
        if (r.degree == 1) continue;
        degrees.push_back({{"degree", r.degree},
                           {"seconds", r.seconds},
                           {"valueNorm", r.value_norm},
                           {"gainNorm", r.gain_norm},
                           {"asymmetry", r.asymmetry},
                           {"valueSeriesAtX0", eval_value(solver.value(), s.instance.x0, r.degree + 1)}});
    }
    doc["degrees"] = degrees;
    return doc.dump(2) + "\n";
}

void print_degree_times(std::ostream& out, const Solved& s) {
    out << "degree 1: " << format_number(s.are_seconds) << " s (ARE residual "
        << format_number(s.solver->are().residual_norm) << ")\n";
    for (const DegreeReport& r : s.solver->reports()) {
        if (r.degree == 1) continue;
        out << "degree " << r.degree << ": " << format_number(r.seconds) << " s, |v_" << r.degree + 1
            << "| = " << format_number(r.value_norm) << ", |k_" << r.degree << "| = " << format_number(r.gain_norm)
            << '\n';
    }
}

std::size_t budget_for(const RunConfig& config) { return config.memory_budget.value_or(entry_budget()); }

struct Flags {
    std::string config_file;
    std::string model;
    int degree = 0;
    double horizon = 0.0;
    std::string x0;
    int g = 0;
    std::string nodes;
    double y0 = 0.0;
    int n_elements = 0;
    double eps = 0.0;
    double alpha = 0.0;
    int m = 0;
    double rtol = 0.0;
    double atol = 0.0;
    int samples = 0;
    std::string out;
    std::size_t memory_budget = 0;
    std::string system_file;
    bool strict = false;
    bool open_loop = false;
};

struct Registered {
    std::map<std::string, CLI::Option*> opts;
    bool given(const std::string& name) const {
        auto it = opts.find(name);
        return it != opts.end() && it->second->count() > 0;
    }
};

Registered add_run_options(CLI::App* cmd, Flags& f, bool with_open_loop) {
    Registered r;
    r.opts["config"] = cmd->add_option("--config", f.config_file, "JSON run configuration (flags override it)");
    r.opts["model"] = cmd->add_option("--model", f.model, "lorenz | vdp | burgers | custom");
    r.opts["degree"] = cmd->add_option("--degree", f.degree, "feedback degree d (1..8)");
    r.opts["horizon"] = cmd->add_option("--horizon", f.horizon, "simulation horizon T");
    r.opts["x0"] = cmd->add_option("--x0", f.x0, "initial state a,b,c,...");
    r.opts["g"] = cmd->add_option("--g", f.g, "number of van der Pol oscillators");
    r.opts["nodes"] = cmd->add_option("--nodes", f.nodes, "actuated oscillators i,j,... (1-based)");
    r.opts["y0"] = cmd->add_option("--y0", f.y0, "initial oscillator displacement");
    r.opts["n-elements"] = cmd->add_option("--n-elements", f.n_elements, "Burgers linear elements");
    r.opts["eps"] = cmd->add_option("--eps", f.eps, "Burgers viscosity");
    r.opts["alpha"] = cmd->add_option("--alpha", f.alpha, "Burgers reaction coefficient");
    r.opts["m"] = cmd->add_option("--m", f.m, "Burgers control patches");
    r.opts["rtol"] = cmd->add_option("--rtol", f.rtol, "integrator relative tolerance");
    r.opts["atol"] = cmd->add_option("--atol", f.atol, "integrator absolute tolerance");
    r.opts["samples"] = cmd->add_option("--samples", f.samples, "trajectory samples over [0, T]");
    r.opts["out"] = cmd->add_option("--out", f.out, "output directory");
    r.opts["memory-budget"] = cmd->add_option("--memory-budget", f.memory_budget, "largest buffer in entries");
    r.opts["system-file"] = cmd->add_option("--system-file", f.system_file, "custom system JSON");
    r.opts["strict-paper-rhs"] =
        cmd->add_flag("--strict-paper-rhs", f.strict, "drop the L2(N_i^T) v2 terms for i >= 3");
    if (with_open_loop) r.opts["open-loop"] = cmd->add_flag("--open-loop", f.open_loop, "simulate with u = 0");
    return r;
}

RunConfig resolve(const Flags& f, const Registered& r) {
    RunConfig c;
    if (r.given("config")) c = apply_config_json(read_text(f.config_file), c);
    if (r.given("model")) c.model = parse_model(f.model);
    if (r.given("degree")) c.degree = f.degree;
    if (r.given("horizon")) c.horizon = f.horizon;
    if (r.given("x0")) c.x0 = parse_number_list(f.x0);
    if (r.given("g")) c.g = f.g;
    if (r.given("nodes")) c.nodes = parse_index_list(f.nodes);
    if (r.given("y0")) c.y0 = f.y0;
    if (r.given("n-elements")) c.n_elements = f.n_elements;
    if (r.given("eps")) c.eps = f.eps;
    if (r.given("alpha")) c.alpha = f.alpha;
    if (r.given("m")) c.m = f.m;
    if (r.given("rtol")) c.rtol = f.rtol;
    if (r.given("atol")) c.atol = f.atol;
    if (r.given("samples")) c.samples = f.samples;
    if (r.given("out")) c.out_dir = f.out;
    if (r.given("memory-budget")) c.memory_budget = f.memory_budget;
    if (r.given("system-file")) {
        c.system_file = f.system_file;
        if (!r.given("model")) c.model = ModelKind::Custom;
    }
    if (r.given("strict-paper-rhs")) c.strict_paper_rhs = f.strict;
    if (r.given("open-loop")) c.open_loop = f.open_loop;
    validate_config(c);
    return c;
}

}  // namespace

std::string format_full(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string table_csv(const std::vector<TableRow>& rows) {
    std::string s = "degree,value_series,integrated_cost,status\n";
    for (const TableRow& r : rows) {
        s += std::to_string(r.degree) + ',' + format_full(r.value_series) + ',';
        if (r.status == "completed") s += format_full(r.integrated_cost);
        s += ',' + r.status + '\n';
    }
    return s;
}

int cmd_solve(const RunConfig& config, std::ostream& out) {
    validate_config(config);
    const ScopedEntryBudget scope(budget_for(config));
    prepare_out_dir(config.out_dir);
    const Solved s = solve_instance(config, config.degree);
    write_file_atomic(config.out_dir / "coefficients.json",
                      coefficients_to_json(s.solver->value(), s.solver->feedback()));
    const std::string summary = summary_json(config, s);
    write_file_atomic(config.out_dir / "summary.json", summary);
    out << "model " << s.instance.label << ": n = " << s.instance.system.n() << ", m = " << s.instance.system.m()
        << ", degree " << config.degree << '\n';
    print_degree_times(out, s);
    out << "wrote " << (config.out_dir / "coefficients.json").string() << '\n';
    return kExitOk;
}

int cmd_simulate(const RunConfig& config, std::ostream& out) {
    validate_config(config);
    const ScopedEntryBudget scope(budget_for(config));
    prepare_out_dir(config.out_dir);
    CostResult result;
    BenchmarkInstance instance;
    if (config.open_loop) {
        instance = build_instance(config);
        result = open_loop_cost(instance, instance.horizon, sim_options(config));
    } else {
        Solved s = solve_instance(config, config.degree);
        print_degree_times(out, s);
        instance = s.instance;
        result = closed_loop_cost(instance, s.solver->feedback(), config.degree, instance.horizon,
                                  sim_options(config));
    }
    std::ostringstream csv;
    write_trajectory_csv(csv, result.trajectory);
    write_file_atomic(config.out_dir / "trajectory.csv", csv.str());
    out << "status " << to_string(result.trajectory.status) << " at t = " << format_full(result.trajectory.final_time)
        << '\n';
    if (result.trajectory.status == TrajectoryStatus::Completed)
        out << "integrated cost " << format_full(result.total_cost) << '\n';
    else
        out << result.trajectory.message << '\n';
    return kExitOk;
}

int cmd_table(const RunConfig& config, std::ostream& out) {
    validate_config(config);
    const ScopedEntryBudget scope(budget_for(config));
    prepare_out_dir(config.out_dir);
    Solved s = solve_instance(config, config.degree);
    std::vector<TableRow> rows;
    for (int d = 1; d <= config.degree; ++d) {
        TableRow row;
        row.degree = d;
        row.value_series = eval_value(s.solver->value(), s.instance.x0, d + 1);
        row.solve_seconds = d == 1 ? s.are_seconds : s.solver->reports()[static_cast<std::size_t>(d - 2)].seconds;
        const auto start = Clock::now();
        const CostResult c = closed_loop_cost(s.instance, s.solver->feedback(), d, s.instance.horizon,
                                              sim_options(config));
        row.simulate_seconds = seconds_since(start);
        row.integrated_cost = c.total_cost;
        row.status = std::string(to_string(c.trajectory.status));
        rows.push_back(row);
    }
    const std::string csv = table_csv(rows);
    write_file_atomic(config.out_dir / "table.csv", csv);
    out << csv;
    for (const TableRow& r : rows)
        out << "# degree " << r.degree << ": solve " << format_number(r.solve_seconds) << " s, simulate "
            << format_number(r.simulate_seconds) << " s\n";
    return kExitOk;
}

int cmd_validate(std::ostream& out) {
    const auto results = run_validation();
    print_report(out, results);
    for (const auto& r : results)
        if (!r.passed) return kExitValidationFailed;
    return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Polynomial-quadratic regulator: feedback laws, value functions and closed-loop tables"};
    app.require_subcommand(1);
    Flags flags;
    CLI::App* solve = app.add_subcommand("solve", "compute coefficients and write coefficients.json");
    CLI::App* simulate = app.add_subcommand("simulate", "simulate one closed-loop (or open-loop) run");
    CLI::App* table = app.add_subcommand("table", "value series and integrated cost for degrees 1..d");
    CLI::App* validate = app.add_subcommand("validate", "run the built-in oracle suites");
    const Registered r_solve = add_run_options(solve, flags, false);
    const Registered r_sim = add_run_options(simulate, flags, true);
    const Registered r_table = add_run_options(table, flags, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }

    try {
        if (validate->parsed()) return cmd_validate(out);
        if (solve->parsed()) return cmd_solve(resolve(flags, r_solve), out);
        if (simulate->parsed()) return cmd_simulate(resolve(flags, r_sim), out);
        if (table->parsed()) return cmd_table(resolve(flags, r_table), out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitSolverError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitSolverError;
    }
    return kExitConfigError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.push_back("pqr");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace pqr::cli
