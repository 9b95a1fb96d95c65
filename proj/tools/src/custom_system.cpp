#include "pqr_cli/custom_system.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pqr/errors.hpp"
#include "pqr/memory_guard.hpp"
#include "pqr_cli/config.hpp"

namespace pqr::cli {
namespace {

using nlohmann::json;

const json& member(const json& doc, const std::string& key) {
    auto it = doc.find(key);
    if (it == doc.end()) throw ConfigError("system file: missing key '" + key + "'");
    return *it;
}

Index positive_int(const json& doc, const std::string& key) {
    const json& node = member(doc, key);
    if (!node.is_number_integer() || node.get<long long>() < 1)
        throw ConfigError("system file: '" + key + "' must be a positive integer");
    return static_cast<Index>(node.get<long long>());
}

Matrix dense(const json& doc, const std::string& key, Index rows, Index cols) {
    const json& node = member(doc, key);
    if (!node.is_array()) throw ConfigError("system file: '" + key + "' must be a flat array");
    const std::size_t expected = saturating_mul(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    if (node.size() != expected)
        throw ConfigError("system file: '" + key + "' has " + std::to_string(node.size()) +
                          " entries, expected " + std::to_string(expected));
    check_entries(expected, "system file " + key);
    Vector flat(static_cast<Index>(expected));
    for (std::size_t i = 0; i < expected; ++i) {
        if (!node[i].is_number()) throw ConfigError("system file: '" + key + "' holds a non-number");
        flat[static_cast<Index>(i)] = node[i].get<double>();
    }
    if (!flat.allFinite()) throw ConfigError("system file: '" + key + "' holds non-finite entries");
    return unvec(flat, rows, cols);
}

}  // namespace

BenchmarkInstance custom_system_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("system file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("system file must be a JSON object");

    const Index n = positive_int(doc, "n");
    const Index m = positive_int(doc, "m");
    const Index p = positive_int(doc, "p");

    std::set<std::string> known{"n", "m", "p", "A", "B", "Q", "R", "x0", "T", "layout", "label"};
    for (Index k = 2; k <= p; ++k) known.insert("N" + std::to_string(k));
    for (const auto& item : doc.items())
        if (!known.count(item.key())) throw ConfigError("system file: unknown key '" + item.key() + "'");

    if (doc.contains("layout") && doc["layout"] != std::string(kLayoutName))
        throw ConfigError("system file: layout must be \"" + std::string(kLayoutName) + "\"");

    BenchmarkInstance inst;
    inst.label = doc.value("label", std::string("custom"));
    inst.system.A = dense(doc, "A", n, n);
    inst.system.B = dense(doc, "B", n, m);
    for (Index k = 2; k <= p; ++k) {
        const std::string key = "N" + std::to_string(k);
        if (!doc.contains(key)) continue;
        inst.system.N.emplace(static_cast<int>(k),
                              dense(doc, key, n, static_cast<Index>(saturating_pow(static_cast<std::size_t>(n), k))));
    }
    inst.cost.Q = dense(doc, "Q", n, n);
    inst.cost.R = dense(doc, "R", m, m);
    inst.x0 = dense(doc, "x0", n, 1).col(0);
    const json& t = member(doc, "T");
    if (!t.is_number()) throw ConfigError("system file: 'T' must be a number");
    inst.horizon = t.get<double>();
    try {
        inst.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("system file: ") + e.what());
    }
    return inst;
}

BenchmarkInstance load_custom_system(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open system file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return custom_system_from_json(ss.str());
}

}  // namespace pqr::cli
