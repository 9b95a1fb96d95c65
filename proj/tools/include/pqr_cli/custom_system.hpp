#pragma once

#include <filesystem>
#include <string>

#include "pqr/models.hpp"

namespace pqr::cli {

/// Parses {n, m, p, A, B, N2..Np, Q, R, x0, T}; arrays are flat and column-major.
/// Throws ConfigError on missing keys, wrong lengths or non-finite entries.
BenchmarkInstance custom_system_from_json(const std::string& text);
BenchmarkInstance load_custom_system(const std::filesystem::path& path);

}  // namespace pqr::cli
