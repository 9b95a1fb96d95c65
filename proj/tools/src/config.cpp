#include "pqr_cli/config.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pqr/errors.hpp"
#include "pqr_cli/custom_system.hpp"

namespace pqr::cli {
namespace {

using nlohmann::json;

template <class T>
T get_as(const json& node, const char* key) {
    try {
        return node.get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
}

Matrix square_from(const std::vector<double>& entries, Index size, const char* what) {
    if (static_cast<Index>(entries.size()) != size * size)
        throw ConfigError(std::string(what) + " override has " + std::to_string(entries.size()) +
                          " entries, expected " + std::to_string(size * size));
    return unvec(Eigen::Map<const Vector>(entries.data(), size * size), size, size);
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Lorenz: return "lorenz";
        case ModelKind::Vdp: return "vdp";
        case ModelKind::Burgers: return "burgers";
        case ModelKind::Custom: return "custom";
    }
    return "unknown";
}

ModelKind parse_model(const std::string& name) {
    if (name == "lorenz") return ModelKind::Lorenz;
    if (name == "vdp") return ModelKind::Vdp;
    if (name == "burgers") return ModelKind::Burgers;
    if (name == "custom") return ModelKind::Custom;
    throw ConfigError("unknown model '" + name + "' (expected lorenz, vdp, burgers or custom)");
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ConfigError("cannot parse number '" + item + "'");
        }
        if (used != item.size()) throw ConfigError("cannot parse number '" + item + "'");
        out.push_back(value);
    }
    if (out.empty()) throw ConfigError("empty number list");
    return out;
}

std::vector<int> parse_index_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        int value = 0;
        try {
            value = std::stoi(item, &used);
        } catch (const std::exception&) {
            throw ConfigError("cannot parse index '" + item + "'");
        }
        if (used != item.size()) throw ConfigError("cannot parse index '" + item + "'");
        out.push_back(value);
    }
    if (out.empty()) throw ConfigError("empty index list");
    return out;
}

RunConfig apply_config_json(const std::string& text, RunConfig base) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");

    RunConfig c = std::move(base);
    for (const auto& [key, node] : doc.items()) {
        const char* k = key.c_str();
        if (key == "model") c.model = parse_model(get_as<std::string>(node, k));
        else if (key == "degree") c.degree = get_as<int>(node, k);
        else if (key == "horizon") c.horizon = get_as<double>(node, k);
        else if (key == "x0") c.x0 = get_as<std::vector<double>>(node, k);
        else if (key == "g") c.g = get_as<int>(node, k);
        else if (key == "nodes") c.nodes = get_as<std::vector<int>>(node, k);
        else if (key == "y0") c.y0 = get_as<double>(node, k);
        else if (key == "nElements") c.n_elements = get_as<int>(node, k);
        else if (key == "eps") c.eps = get_as<double>(node, k);
        else if (key == "alpha") c.alpha = get_as<double>(node, k);
        else if (key == "m") c.m = get_as<int>(node, k);
        else if (key == "Q") c.q = get_as<std::vector<double>>(node, k);
        else if (key == "R") c.r = get_as<std::vector<double>>(node, k);
        else if (key == "systemFile") c.system_file = get_as<std::string>(node, k);
        else if (key == "rtol") c.rtol = get_as<double>(node, k);
        else if (key == "atol") c.atol = get_as<double>(node, k);
        else if (key == "samples") c.samples = get_as<int>(node, k);
        else if (key == "out") c.out_dir = get_as<std::string>(node, k);
        else if (key == "memoryBudget") c.memory_budget = get_as<std::size_t>(node, k);
        else if (key == "strictPaperRhs") c.strict_paper_rhs = get_as<bool>(node, k);
        else if (key == "openLoop") c.open_loop = get_as<bool>(node, k);
        else throw ConfigError("unknown config key '" + key + "'");
    }
    return c;
}

void validate_config(const RunConfig& c) {
    auto check = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    check(c.degree >= 1 && c.degree <= kMaxDegree,
          "degree must be in 1.." + std::to_string(kMaxDegree) + ", got " + std::to_string(c.degree));
    check(std::isfinite(c.rtol) && c.rtol > 0.0, "rtol must be positive");
    check(std::isfinite(c.atol) && c.atol > 0.0, "atol must be positive");
    check(c.samples >= 2, "samples must be at least 2");
    if (c.horizon) check(std::isfinite(*c.horizon) && *c.horizon > 0.0, "horizon must be positive");
    if (c.x0)
        for (double v : *c.x0) check(std::isfinite(v), "x0 entries must be finite");
    if (c.memory_budget) check(*c.memory_budget > 0, "memory budget must be positive");

    switch (c.model) {
        case ModelKind::Lorenz: break;
        case ModelKind::Vdp: {
            check(c.g >= 2, "g must be at least 2");
            check(!c.nodes.empty(), "at least one actuated node is required");
            std::set<int> seen;
            for (int node : c.nodes) {
                check(node >= 1 && node <= c.g,
                      "actuated node " + std::to_string(node) + " outside 1.." + std::to_string(c.g));
                check(seen.insert(node).second, "actuated node " + std::to_string(node) + " repeated");
            }
            check(std::isfinite(c.y0), "y0 must be finite");
            break;
        }
        case ModelKind::Burgers:
            check(c.m >= 1, "m must be at least 1");
            check(c.n_elements >= 3 && c.n_elements >= c.m, "n-elements must be at least max(3, m)");
            check(std::isfinite(c.eps) && c.eps > 0.0, "eps must be positive");
            check(std::isfinite(c.alpha), "alpha must be finite");
            break;
        case ModelKind::Custom:
            check(!c.system_file.empty(), "model custom requires --system-file");
            break;
    }
}

BenchmarkInstance build_instance(const RunConfig& c) {
    validate_config(c);
    BenchmarkInstance inst;
    switch (c.model) {
        case ModelKind::Lorenz: inst = lorenz(); break;
        case ModelKind::Vdp: inst = vdp_ring(c.g, c.nodes, c.y0); break;
        case ModelKind::Burgers: inst = burgers_fem(c.n_elements, c.eps, c.alpha, c.m); break;
        case ModelKind::Custom: inst = load_custom_system(c.system_file); break;
    }
    const Index n = inst.system.n();
    const Index m = inst.system.m();
    if (c.horizon) inst.horizon = *c.horizon;
    if (c.x0) {
        if (static_cast<Index>(c.x0->size()) != n)
            throw ConfigError("x0 has " + std::to_string(c.x0->size()) + " entries, model has n = " +
                              std::to_string(n));
        inst.x0 = Eigen::Map<const Vector>(c.x0->data(), n);
    }
    if (c.q) inst.cost.Q = square_from(*c.q, n, "Q");
    if (c.r) inst.cost.R = square_from(*c.r, m, "R");
    try {
        inst.validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return inst;
}

}  // namespace pqr::cli
