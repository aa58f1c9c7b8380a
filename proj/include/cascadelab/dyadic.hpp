#pragma once

// Sets described through the closed dyadic intervals [k/2^ℓ, (k+1)/2^ℓ]
// that meet them.

#include <cstdint>
#include <functional>
#include <vector>

namespace cascadelab {

struct DyadicInterval {
  int level = 0;
  std::uint64_t index = 0;

  double left() const noexcept;
  double right() const noexcept;
  bool operator==(const DyadicInterval&) const = default;
};

/// True when the closed cell (level, index) meets the set. Must be hereditary:
/// a cell that meets the set has a parent that meets it.
using CellPredicate = std::function<bool(int level, std::uint64_t index)>;

/// Middle-third Cantor set, decided exactly with integer arithmetic.
bool cantor_meets(int level, std::uint64_t index);
CellPredicate cantor_set();
CellPredicate unit_interval();
/// Cells containing the rational point num/den.
CellPredicate rational_point(std::uint64_t num, std::uint64_t den);

/// Indices of level-`level` cells meeting the set, ascending, found by
/// descending from the root (levels up to 40).
std::vector<std::uint64_t> cover_indices(const CellPredicate& set, int level);

}  // namespace cascadelab
