#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pqr_cli/config.hpp"

namespace pqr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailed = 1;
inline constexpr int kExitSolverError = 2;
inline constexpr int kExitConfigError = 3;

/// Parses `argv` and runs one of solve, simulate, table, validate.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct TableRow {
    int degree = 0;
    double value_series = 0.0;
    double integrated_cost = 0.0;
    std::string status;
    double solve_seconds = 0.0;
    double simulate_seconds = 0.0;
};

/// CSV text with columns degree,value_series,integrated_cost,status (empty cost unless completed).
std::string table_csv(const std::vector<TableRow>& rows);

/// %.17g rendering.
std::string format_full(double value);

int cmd_solve(const RunConfig& config, std::ostream& out);
int cmd_simulate(const RunConfig& config, std::ostream& out);
int cmd_table(const RunConfig& config, std::ostream& out);
int cmd_validate(std::ostream& out);

}  // namespace pqr::cli
