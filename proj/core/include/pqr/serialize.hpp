#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "pqr/albrekht.hpp"

namespace pqr {

struct Coefficients {
    ValueFunction value;
    FeedbackLaw feedback;
};

/// Writes {n, m, maxDegree, layout, value[], feedback[]} as JSON with 17 significant digits.
void write_coefficients(std::ostream& out, const ValueFunction& value, const FeedbackLaw& law);
std::string coefficients_to_json(const ValueFunction& value, const FeedbackLaw& law);

/// Parses the document produced by write_coefficients; throws ParseError on malformed input.
Coefficients coefficients_from_json(const std::string& text);
Coefficients read_coefficients(const std::filesystem::path& path);

/// Writes `contents` to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace pqr
