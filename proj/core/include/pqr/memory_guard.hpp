#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace pqr {

/// Default upper bound on the number of scalar entries any single buffer may hold.
inline constexpr std::size_t kDefaultEntryBudget = 500'000'000;

/// Process-wide entry budget shared by every allocation-heavy operation.
std::size_t entry_budget() noexcept;
void set_entry_budget(std::size_t entries) noexcept;

/// Throws ErrorCode::SizeOverflow if `entries` exceeds the current budget.
void check_entries(std::size_t entries, std::string_view what);

/// Product of `dims`, saturating instead of wrapping on overflow.
std::size_t saturating_product(std::span<const std::size_t> dims) noexcept;
std::size_t saturating_pow(std::size_t base, int exponent) noexcept;
std::size_t saturating_mul(std::size_t a, std::size_t b) noexcept;

/// Restores the previous budget on destruction.
class ScopedEntryBudget {
public:
    explicit ScopedEntryBudget(std::size_t entries) noexcept;
    ~ScopedEntryBudget();
    ScopedEntryBudget(const ScopedEntryBudget&) = delete;
    ScopedEntryBudget& operator=(const ScopedEntryBudget&) = delete;

private:
    std::size_t previous_;
};

}  // namespace pqr
