#pragma once

#include <algorithm>

namespace difflab {

/// A bounded interval of the real line. Whether the right end is included is
/// decided by the operation using it; the library default is half-open.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const noexcept { return hi > lo ? hi - lo : 0.0; }
  bool empty() const noexcept { return !(hi > lo); }

  bool contains_half_open(double x) const noexcept { return x >= lo && x < hi; }
  bool contains_closed(double x) const noexcept { return x >= lo && x <= hi; }

  bool contains(const Interval& other) const noexcept {
    return other.empty() || (other.lo >= lo && other.hi <= hi);
  }

  static Interval centered(double half_length) noexcept {
    return {-half_length, half_length};
  }

  friend bool operator==(const Interval&, const Interval&) = default;
};

inline Interval intersect(const Interval& a, const Interval& b) noexcept {
  return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

}  // namespace difflab
