#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "denslice/error.hpp"
#include "denslice/feature.hpp"

namespace denslice {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_open = false;
  bool hi_open = false;

  bool contains(double v) const {
    if (lo_open ? !(v > lo) : !(v >= lo)) return false;
    if (hi_open ? !(v < hi) : !(v <= hi)) return false;
    return true;
  }
};

// One per-feature constraint: an interval for numeric kinds, a level set for
// nominal. Ordered subsets live in code space with half-integer endpoints.
struct Subset {
  int feature = -1;
  FeatureKind kind = FeatureKind::Real;
  Interval iv;
  std::vector<std::string> levels;  // sorted, nominal only

  bool contains_num(double v) const { return iv.contains(v); }
  bool contains_label(const std::string& s) const {
    return std::binary_search(levels.begin(), levels.end(), s);
  }
};

inline Subset full_subset(int feature, const Domain& d) {
  Subset s;
  s.feature = feature;
  s.kind = d.kind;
  if (d.kind == FeatureKind::Nominal) {
    s.levels = d.levels;
  } else {
    s.iv = Interval{d.lo, d.hi, false, false};
  }
  return s;
}

inline bool subset_complete(const Subset& s, const Domain& d) {
  if (s.kind == FeatureKind::Nominal) return s.levels == d.levels;
  return s.iv.lo == d.lo && s.iv.hi == d.hi && !s.iv.lo_open && !s.iv.hi_open;
}

// Half-integer endpoints for integer/ordered subsets; open/closed flags are
// immaterial there and normalized to closed.
inline void normalize_subset(Subset& s) {
  if (s.kind == FeatureKind::Integer || s.kind == FeatureKind::Ordered) {
    s.iv.lo_open = false;
    s.iv.hi_open = false;
  }
  if (s.kind == FeatureKind::Nominal) std::sort(s.levels.begin(), s.levels.end());
}

// Count of table values inside the interval, respecting open/closed ends.
inline std::size_t values_in_interval(const Interval& iv, std::span<const double> sorted_values) {
  auto lo_it = iv.lo_open ? std::upper_bound(sorted_values.begin(), sorted_values.end(), iv.lo)
                          : std::lower_bound(sorted_values.begin(), sorted_values.end(), iv.lo);
  auto hi_it = iv.hi_open ? std::lower_bound(sorted_values.begin(), sorted_values.end(), iv.hi)
                          : std::upper_bound(sorted_values.begin(), sorted_values.end(), iv.hi);
  return hi_it > lo_it ? static_cast<std::size_t>(hi_it - lo_it) : 0;
}

inline void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    fail(errc::epsilon_out_of_range, "epsilon must lie in (0, 1), got " + std::to_string(epsilon));
}

// Fractional length L(s) in (0, 1]. Integer/ordered/nominal lengths are the
// raw size ratios; real intervals get the epsilon adjustment
//   L = (1 - eps) * (hi - lo)/|dom| + eps * n_s/n_j
// with n_s the distinct observed values inside the interval. The full domain
// has length exactly 1.
inline double subset_length(const Subset& s, const Domain& d,
                            std::span<const double> unique_values, double epsilon) {
  check_epsilon(epsilon);
  if (s.kind == FeatureKind::Nominal) {
    if (s.levels.empty()) fail(errc::empty_subset, "empty level set");
    return static_cast<double>(s.levels.size()) / d.size;
  }
  if (s.iv.hi < s.iv.lo) fail(errc::empty_subset, "interval hi < lo");
  if (s.kind != FeatureKind::Real) {
    double len = (s.iv.hi - s.iv.lo) / d.size;
    if (len <= 0.0) fail(errc::empty_subset, "zero-size interval");
    return len;
  }
  if (subset_complete(s, d)) return 1.0;
  const std::size_t n_s = values_in_interval(s.iv, unique_values);
  const double raw = (s.iv.hi - s.iv.lo) / d.size;
  const double len = (1.0 - epsilon) * raw + epsilon * (static_cast<double>(n_s) / static_cast<double>(d.n_unique));
  if (len <= 0.0)
    fail(errc::empty_subset, "real interval has zero width and contains no observed value");
  return len;
}

// Boundary gap of a subset: the pieces of s outside the kept core. Intervals
// may have a piece at either end; a nominal gap is a single level set.
struct GapPieces {
  std::vector<Subset> pieces;
};

struct SubtractResult {
  Subset remainder;
  std::vector<Subset> removed;
};

namespace detail {

inline bool same_point(double a, double b) { return a == b; }

}  // namespace detail

// Removes boundary gap pieces from s. Pieces must lie inside s, touch its
// boundary (one per end at most), and leave a non-empty remainder; endpoint
// flags are set so the remainder and the pieces tile s exactly.
inline SubtractResult subset_subtract(const Subset& s, const GapPieces& gap) {
  if (gap.pieces.empty()) fail(errc::invalid_argument, "no gap pieces");
  SubtractResult out;
  out.remainder = s;

  if (s.kind == FeatureKind::Nominal) {
    if (gap.pieces.size() != 1) fail(errc::invalid_argument, "nominal gap must be one level set");
    const Subset& g = gap.pieces[0];
    std::vector<std::string> rem;
    for (const auto& lv : s.levels) {
      if (!std::binary_search(g.levels.begin(), g.levels.end(), lv)) rem.push_back(lv);
    }
    for (const auto& lv : g.levels)
      if (!std::binary_search(s.levels.begin(), s.levels.end(), lv))
        fail(errc::gap_not_contained, "gap level '" + lv + "' outside subset");
    if (rem.empty()) fail(errc::gap_not_contained, "gap equals the whole subset");
    if (g.levels.empty()) fail(errc::empty_subset, "empty gap level set");
    out.remainder.levels = rem;
    out.removed.push_back(g);
    return out;
  }

  if (gap.pieces.size() > 2) fail(errc::invalid_argument, "at most two interval gap pieces");
  bool took_lo = false, took_hi = false;
  Interval core = s.iv;
  for (const Subset& g : gap.pieces) {
    if (g.iv.hi < g.iv.lo || (g.iv.hi == g.iv.lo && (g.iv.lo_open || g.iv.hi_open)))
      fail(errc::empty_subset, "degenerate gap piece");
    if (g.iv.lo < s.iv.lo || g.iv.hi > s.iv.hi)
      fail(errc::gap_not_contained, "gap piece exceeds subset bounds");
    const bool at_lo = detail::same_point(g.iv.lo, s.iv.lo) && g.iv.lo_open == s.iv.lo_open;
    const bool at_hi = detail::same_point(g.iv.hi, s.iv.hi) && g.iv.hi_open == s.iv.hi_open;
    if (at_lo && at_hi) fail(errc::gap_not_contained, "gap equals the whole subset");
    if (!at_lo && !at_hi) fail(errc::gap_not_boundary, "gap piece does not touch the subset boundary");
    if (at_lo) {
      if (took_lo) fail(errc::invalid_argument, "two gap pieces at the lower end");
      took_lo = true;
      core.lo = g.iv.hi;
      core.lo_open = !g.iv.hi_open;  // complementary flag: pieces + remainder tile s
    } else {
      if (took_hi) fail(errc::invalid_argument, "two gap pieces at the upper end");
      took_hi = true;
      core.hi = g.iv.lo;
      core.hi_open = !g.iv.lo_open;
    }
    out.removed.push_back(g);
  }
  if (core.hi < core.lo || (core.hi == core.lo && (core.lo_open || core.hi_open)))
    fail(errc::gap_not_contained, "remainder would be empty");
  out.remainder.iv = core;
  normalize_subset(out.remainder);
  return out;
}

}  // namespace denslice
