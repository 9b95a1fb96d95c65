#include "pqr/memory_guard.hpp"

#include <atomic>
#include <limits>
#include <string>

#include "pqr/errors.hpp"

namespace pqr {
namespace {
std::atomic<std::size_t> g_budget{kDefaultEntryBudget};
constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
}  // namespace

std::size_t entry_budget() noexcept { return g_budget.load(std::memory_order_relaxed); }

void set_entry_budget(std::size_t entries) noexcept {
    g_budget.store(entries, std::memory_order_relaxed);
}

void check_entries(std::size_t entries, std::string_view what) {
    const std::size_t budget = entry_budget();
    if (entries > budget) {
        fail(ErrorCode::SizeOverflow,
             std::string(what) + " needs " +
                 (entries == kMax ? std::string("more than 2^64") : std::to_string(entries)) +
                 " entries, budget is " + std::to_string(budget));
    }
}

std::size_t saturating_mul(std::size_t a, std::size_t b) noexcept {
    if (a != 0 && b > kMax / a) return kMax;
    return a * b;
}

std::size_t saturating_product(std::span<const std::size_t> dims) noexcept {
    std::size_t p = 1;
    for (std::size_t d : dims) p = saturating_mul(p, d);
    return p;
}

std::size_t saturating_pow(std::size_t base, int exponent) noexcept {
    std::size_t p = 1;
    for (int i = 0; i < exponent; ++i) p = saturating_mul(p, base);
    return p;
}

ScopedEntryBudget::ScopedEntryBudget(std::size_t entries) noexcept : previous_(entry_budget()) {
    set_entry_budget(entries);
}

ScopedEntryBudget::~ScopedEntryBudget() { set_entry_budget(previous_); }

}  // namespace pqr
