#include "cascadelab/dyadic.hpp"

#include <cmath>

#include "cascadelab/error.hpp"

namespace cascadelab {

namespace {

using i128 = __int128;

constexpr int kMaxLevel = 40;

void check_level(int level) {
  if (level < 0 || level > kMaxLevel) throw Error(Errc::domain, "dyadic level must lie in [0, 40]");
}

}  // namespace

double DyadicInterval::left() const noexcept { return std::ldexp(static_cast<double>(index), -level); }
double DyadicInterval::right() const noexcept { return std::ldexp(static_cast<double>(index + 1), -level); }

// [a, b] = [A, A+1]/2^ℓ against Cantor cylinders [c, c+1]/3^j. Everything is
// scaled by 2^ℓ·3^j so the comparisons are exact in 128 bits (ℓ ≤ 40 needs
// j ≤ 27, 2^40·3^27 < 2^84). A cylinder's endpoints belong to the set, so
// the cell meets the set iff it meets a cylinder and either holds one of its
// endpoints or meets one of its two children.
bool cantor_meets(int level, std::uint64_t index) {
  check_level(level);
  if (index >> level != 0) throw Error(Errc::domain, "dyadic index out of range");
  const i128 two_l = static_cast<i128>(1) << level;
  i128 c = 0;
  i128 three_j = 1;
  for (int j = 0; j <= 2 * kMaxLevel; ++j) {
    // Compare in units of 1/(2^ℓ 3^j).
    const i128 a = static_cast<i128>(index) * three_j;
    const i128 b = a + three_j;
    const i128 lo = c * two_l;
    const i128 hi = (c + 1) * two_l;
    if (b < lo || a > hi) return false;
    if ((a <= lo && lo <= b) || (a <= hi && hi <= b)) return true;
    // The cell sits strictly inside the cylinder; it lies in the left third,
    // the right third, or straddles the removed middle (then it holds the
    // endpoint (3c+1)/3^{j+1} and was caught above at the next level).
    c *= 3;
    three_j *= 3;
    const i128 a2 = a * 3;
    const i128 split_lo = (c + 1) * two_l;
    c = a2 <= split_lo ? c : c + 2;
  }
  return false;
}

CellPredicate cantor_set() { return [](int level, std::uint64_t index) { return cantor_meets(level, index); }; }

CellPredicate unit_interval() {
  return [](int, std::uint64_t) { return true; };
}

CellPredicate rational_point(std::uint64_t num, std::uint64_t den) {
  if (den == 0 || num > den) throw Error(Errc::domain, "point must lie in [0, 1]");
  return [num, den](int level, std::uint64_t index) {
    const i128 p = static_cast<i128>(num) << level;
    const i128 lo = static_cast<i128>(index) * den;
    const i128 hi = static_cast<i128>(index + 1) * den;
    return lo <= p && p <= hi;
  };
}

std::vector<std::uint64_t> cover_indices(const CellPredicate& set, int level) {
  check_level(level);
  std::vector<std::uint64_t> cur;
  if (set(0, 0)) cur.push_back(0);
  for (int l = 1; l <= level; ++l) {
    std::vector<std::uint64_t> next;
    next.reserve(cur.size() * 2);
    for (std::uint64_t k : cur) {
      if (set(l, 2 * k)) next.push_back(2 * k);
      if (set(l, 2 * k + 1)) next.push_back(2 * k + 1);
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace cascadelab
