#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqr/models.hpp"

namespace pqr::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ModelKind { Lorenz, Vdp, Burgers, Custom };

std::string to_string(ModelKind kind);
ModelKind parse_model(const std::string& name);

struct RunConfig {
    ModelKind model = ModelKind::Lorenz;
    int degree = 3;
    std::optional<double> horizon;
    std::optional<std::vector<double>> x0;

    int g = 4;
    std::vector<int> nodes{1, 2};
    double y0 = 0.3;

    int n_elements = 16;
    double eps = 0.005;
    double alpha = 0.3;
    int m = 3;

    /// Column-major overrides of the model's cost weights.
    std::optional<std::vector<double>> q;
    std::optional<std::vector<double>> r;

    std::filesystem::path system_file;

    double rtol = 1e-9;
    double atol = 1e-11;
    int samples = 501;
    std::filesystem::path out_dir = ".";
    std::optional<std::size_t> memory_budget;
    bool strict_paper_rhs = false;
    bool open_loop = false;
};

inline constexpr int kMaxDegree = 8;

/// Applies a JSON document on top of `base`; unknown keys are rejected.
RunConfig apply_config_json(const std::string& text, RunConfig base = {});

/// Range checks that can be made before any model is built.
void validate_config(const RunConfig& config);

/// Builds the benchmark (or loads the custom system) and applies overrides.
BenchmarkInstance build_instance(const RunConfig& config);

std::vector<double> parse_number_list(const std::string& text);
std::vector<int> parse_index_list(const std::string& text);

}  // namespace pqr::cli
