#include "pqr/serialize.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "pqr/errors.hpp"
#include "pqr/memory_guard.hpp"

namespace pqr {
namespace {

using nlohmann::json;

void write_array(std::ostream& out, const double* data, Index count) {
    out << '[';
    for (Index i = 0; i < count; ++i) {
        if (i) out << ',';
        out << data[i];
    }
    out << ']';
}

Vector read_array(const json& node, Index expected, const std::string& what) {
    if (!node.is_array()) fail(ErrorCode::ParseError, what + " is not an array");
    if (static_cast<Index>(node.size()) != expected)
        fail(ErrorCode::ParseError, what + " has " + std::to_string(node.size()) + " entries, expected " +
                                        std::to_string(expected));
    Vector out(expected);
    for (Index i = 0; i < expected; ++i) {
        const json& e = node[static_cast<std::size_t>(i)];
        if (!e.is_number()) fail(ErrorCode::ParseError, what + " contains a non-number");
        out[i] = e.get<double>();
    }
    return out;
}

Index get_index(const json& doc, const char* key) {
    if (!doc.contains(key) || !doc[key].is_number_integer())
        fail(ErrorCode::ParseError, std::string("missing integer field '") + key + "'");
    return doc[key].get<Index>();
}

}  // namespace

void write_coefficients(std::ostream& out, const ValueFunction& value, const FeedbackLaw& law) {
    require(value.n == law.n, ErrorCode::DimensionMismatch, "value function and law disagree on n");
    const auto old_precision = out.precision(17);
    out << "{\n  \"format\": \"pqr-coefficients\",\n  \"n\": " << law.n << ",\n  \"m\": " << law.m
        << ",\n  \"maxDegree\": " << law.max_degree() << ",\n  \"layout\": \"" << kLayoutName
        << "\",\n  \"value\": [";
    for (int k = 2; k <= value.max_degree(); ++k) {
        const Vector& vk = value.v(k);
        out << (k > 2 ? ",\n" : "\n") << "    {\"degree\": " << k << ", \"entries\": ";
        write_array(out, vk.data(), vk.size());
        out << '}';
    }
    out << "\n  ],\n  \"feedback\": [";
    for (int j = 1; j <= law.max_degree(); ++j) {
        const Matrix& kj = law.k(j);
        out << (j > 1 ? ",\n" : "\n") << "    {\"degree\": " << j << ", \"rows\": " << kj.rows()
            << ", \"cols\": " << kj.cols() << ", \"entries\": ";
        write_array(out, kj.data(), kj.size());
        out << '}';
    }
    out << "\n  ]\n}\n";
    out.precision(old_precision);
}

std::string coefficients_to_json(const ValueFunction& value, const FeedbackLaw& law) {
    std::ostringstream os;
    write_coefficients(os, value, law);
    return os.str();
}

Coefficients coefficients_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, e.what());
    }
    if (!doc.is_object()) fail(ErrorCode::ParseError, "coefficient document is not an object");
    if (!doc.contains("layout") || doc["layout"] != kLayoutName)
        fail(ErrorCode::ParseError, std::string("layout must be '") + kLayoutName + "'");
    const Index n = get_index(doc, "n");
    const Index m = get_index(doc, "m");
    const Index max_degree = get_index(doc, "maxDegree");
    if (n < 1 || m < 1 || max_degree < 1) fail(ErrorCode::ParseError, "n, m, maxDegree must be positive");
    if (!doc.contains("value") || !doc["value"].is_array() || !doc.contains("feedback") ||
        !doc["feedback"].is_array())
        fail(ErrorCode::ParseError, "missing 'value' or 'feedback' arrays");

    Coefficients out;
    out.value.n = n;
    out.feedback.n = n;
    out.feedback.m = m;
    const json& values = doc["value"];
    if (static_cast<Index>(values.size()) != max_degree)
        fail(ErrorCode::ParseError, "expected v_2..v_" + std::to_string(max_degree + 1));
    for (std::size_t idx = 0; idx < values.size(); ++idx) {
        const int k = static_cast<int>(idx) + 2;
        if (get_index(values[idx], "degree") != k) fail(ErrorCode::ParseError, "value degrees out of order");
        const std::size_t len = saturating_pow(static_cast<std::size_t>(n), k);
        check_entries(len, "v_" + std::to_string(k));
        out.value.coefficients.push_back(
            read_array(values[idx]["entries"], static_cast<Index>(len), "v_" + std::to_string(k)));
    }
    const json& gains = doc["feedback"];
    if (static_cast<Index>(gains.size()) != max_degree)
        fail(ErrorCode::ParseError, "expected k_1..k_" + std::to_string(max_degree));
    for (std::size_t idx = 0; idx < gains.size(); ++idx) {
        const int j = static_cast<int>(idx) + 1;
        const json& g = gains[idx];
        if (get_index(g, "degree") != j) fail(ErrorCode::ParseError, "feedback degrees out of order");
        const Index rows = get_index(g, "rows");
        const Index cols = get_index(g, "cols");
        const std::size_t expected_cols = saturating_pow(static_cast<std::size_t>(n), j);
        if (rows != m || static_cast<std::size_t>(cols) != expected_cols)
            fail(ErrorCode::ParseError, "k_" + std::to_string(j) + " has the wrong shape");
        out.feedback.gains.push_back(
            unvec(read_array(g["entries"], rows * cols, "k_" + std::to_string(j)), rows, cols));
    }
    return out;
}

Coefficients read_coefficients(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::ParseError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return coefficients_from_json(ss.str());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::InvalidArgument, "cannot write " + tmp.string());
        out << contents;
        if (!out) fail(ErrorCode::InvalidArgument, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace pqr
