#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pqr/albrekht.hpp"

namespace pqr::cli {

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ValidationHooks {
    /// Applied to each computed value function before the decoupling checks.
    std::function<void(ValueFunction&)> perturb_value;
};

/// Dense-oracle and invariant suites on small instances; deterministic seeds.
std::vector<SuiteResult> run_validation(const ValidationHooks& hooks = {});

/// Symmetrized degree-D coefficient of the HJB value equation, assembled densely.
/// Zero for every D <= d + 1 when (value, law) solve the expansion through degree d.
Vector dense_hjb_coefficient(const PolynomialSystem& system, const QuadraticCost& cost,
                             const ValueFunction& value, const FeedbackLaw& law, int degree);

/// || v2^T ((B k_d) (x) I + I (x) (B k_d)) + r2^T (k_d (x) k1 + k1 (x) k_d) ||, densely assembled.
double decoupling_defect(const PolynomialSystem& system, const QuadraticCost& cost,
                         const ValueFunction& value, const FeedbackLaw& law, int d);

void print_report(std::ostream& out, const std::vector<SuiteResult>& results);

}  // namespace pqr::cli
