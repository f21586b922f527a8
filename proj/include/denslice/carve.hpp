#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "denslice/error.hpp"
#include "denslice/feature.hpp"
#include "denslice/slice.hpp"
#include "denslice/subset.hpp"

namespace denslice {

// Shared geometry context: domains, the per-feature sorted unique-value
// tables of the partitioned dataset, and epsilon.
struct GeometryContext {
  const std::vector<Domain>* domains = nullptr;
  const std::vector<std::vector<double>>* unique_values = nullptr;
  double epsilon = 0.001;

  double length(const Subset& s) const {
    const std::size_t j = static_cast<std::size_t>(s.feature);
    return subset_length(s, (*domains)[j], (*unique_values)[j], epsilon);
  }
};

struct FeatureGaps {
  int feature = -1;
  std::vector<Subset> pieces;   // 1-2 interval pieces, or one level set
  double union_length = 0.0;
};

// Empty space between a slice's boundary and the extremes of its member
// rows: interval pieces outside [obs_min, obs_max] (integers/ordered:
// outside [obs_min - 0.5, obs_max + 0.5]), unobserved levels for nominal.
inline std::vector<FeatureGaps> boundary_gaps(const std::vector<Subset>& subsets, const Dataset& ds,
                                              const std::vector<std::size_t>& rows,
                                              const GeometryContext& geo) {
  if (rows.empty()) fail(errc::invalid_argument, "boundary gaps need a non-empty slice");
  std::vector<FeatureGaps> out;
  for (std::size_t j = 0; j < subsets.size(); ++j) {
    const Subset& s = subsets[j];
    FeatureGaps g;
    g.feature = static_cast<int>(j);
    if (s.kind == FeatureKind::Nominal) {
      std::vector<std::string> observed;
      for (std::size_t i : rows) observed.push_back(ds.label(j, i));
      std::sort(observed.begin(), observed.end());
      observed.erase(std::unique(observed.begin(), observed.end()), observed.end());
      std::vector<std::string> unseen;
      for (const auto& lv : s.levels)
        if (!std::binary_search(observed.begin(), observed.end(), lv)) unseen.push_back(lv);
      if (!unseen.empty()) {
        Subset piece = s;
        piece.levels = std::move(unseen);
        g.pieces.push_back(std::move(piece));
      }
    } else {
      double lo = ds.num(j, rows[0]), hi = lo;
      for (std::size_t i : rows) {
        lo = std::min(lo, ds.num(j, i));
        hi = std::max(hi, ds.num(j, i));
      }
      if (s.kind != FeatureKind::Real) {
        lo -= 0.5;
        hi += 0.5;
      }
      if (s.iv.lo < lo) {
        Subset piece = s;
        piece.iv = Interval{s.iv.lo, lo, s.iv.lo_open, true};
        normalize_subset(piece);
        g.pieces.push_back(std::move(piece));
      }
      if (hi < s.iv.hi) {
        Subset piece = s;
        piece.iv = Interval{hi, s.iv.hi, true, s.iv.hi_open};
        normalize_subset(piece);
        g.pieces.push_back(std::move(piece));
      }
    }
    for (const Subset& piece : g.pieces) g.union_length += geo.length(piece);
    out.push_back(std::move(g));
  }
  return out;
}

struct CarveLimits {
  double min_l = 0.1;
  std::size_t p_star = 3;
};

// Conservation record for one carve or split, parent volume vs the sum over
// the parts it was cut into.
struct CarveEvent {
  double parent_volume = 0.0;
  double parts_volume = 0.0;
};

namespace detail {

inline std::size_t node_dimension(const std::vector<Subset>& subsets, const std::vector<Domain>& domains) {
  std::size_t d = 0;
  for (std::size_t j = 0; j < subsets.size(); ++j)
    if (!subset_complete(subsets[j], domains[j])) ++d;
  return d;
}

inline double node_volume(const std::vector<Subset>& subsets, const GeometryContext& geo) {
  double v = 1.0;
  for (const Subset& s : subsets) {
    const std::size_t j = static_cast<std::size_t>(s.feature);
    if (subset_complete(s, (*geo.domains)[j])) continue;
    v *= geo.length(s);
  }
  return v;
}

// Conditions shared by both carving heuristics: the empty slice keeps the
// dimension budget, and every side other than the gap has length > min_L.
inline bool carve_conditions_hold(const std::vector<Subset>& subsets, std::size_t gap_feature,
                                  const GeometryContext& geo, const CarveLimits& lim) {
  const std::vector<Domain>& domains = *geo.domains;
  std::size_t dim_after = node_dimension(subsets, domains);
  if (subset_complete(subsets[gap_feature], domains[gap_feature])) ++dim_after;
  if (dim_after > lim.p_star) return false;
  for (std::size_t k = 0; k < subsets.size(); ++k) {
    if (k == gap_feature) continue;
    if (subset_complete(subsets[k], domains[k])) continue;  // complete side has length 1
    if (!(geo.length(subsets[k]) > lim.min_l)) return false;
  }
  return true;
}

}  // namespace detail

struct CarveOutcome {
  std::vector<Subset> trimmed;              // the slice after trimming
  std::vector<std::vector<Subset>> empties; // one emitted empty slice per trim
  std::vector<CarveEvent> events;
};

// Boundary-gap trimming: repeatedly take the largest gap piece with length
// > min_L that passes the dimension and side-length conditions, subtract it,
// and emit the piece as an empty slice. Ties go to the lower feature index,
// then the lower piece bound.
inline CarveOutcome carve_after_split(const std::vector<Subset>& subsets, const Dataset& ds,
                                      const std::vector<std::size_t>& rows, const GeometryContext& geo,
                                      const CarveLimits& lim) {
  CarveOutcome out;
  out.trimmed = subsets;
  while (true) {
    const std::vector<FeatureGaps> gaps = boundary_gaps(out.trimmed, ds, rows, geo);
    double best_len = lim.min_l;
    const Subset* best_piece = nullptr;
    int best_feature = -1;
    for (const FeatureGaps& g : gaps) {
      for (const Subset& piece : g.pieces) {
        const double len = geo.length(piece);
        if (!(len > best_len)) continue;
        if (!detail::carve_conditions_hold(out.trimmed, static_cast<std::size_t>(g.feature), geo, lim))
          continue;
        best_len = len;
        best_piece = &piece;
        best_feature = g.feature;
      }
    }
    if (!best_piece) break;
    const std::size_t j = static_cast<std::size_t>(best_feature);
    const double before = detail::node_volume(out.trimmed, geo);
    SubtractResult sub = subset_subtract(out.trimmed[j], GapPieces{{*best_piece}});
    std::vector<Subset> empty = out.trimmed;
    empty[j] = sub.removed[0];
    out.trimmed[j] = sub.remainder;
    const double after = detail::node_volume(out.trimmed, geo) + detail::node_volume(empty, geo);
    out.events.push_back(CarveEvent{before, after});
    out.empties.push_back(std::move(empty));
  }
  return out;
}

struct AtSplitCarve {
  std::vector<Subset> left;
  std::vector<Subset> right;
  std::optional<std::vector<Subset>> empty;
  CarveEvent event;
};

// Split-straddling empty space: the open interval between the left child's
// max and the right child's min (integers/ordered: between the half-integer
// hulls). Carved only when its length exceeds min_L and the usual conditions
// hold; otherwise the children meet at the midpoint threshold.
inline AtSplitCarve carve_at_split(const std::vector<Subset>& subsets, std::size_t feature,
                                   double threshold, double left_max, double right_min,
                                   const GeometryContext& geo, const CarveLimits& lim) {
  const Subset& s = subsets[feature];
  AtSplitCarve out;
  out.left = subsets;
  out.right = subsets;
  const bool real = s.kind == FeatureKind::Real;
  Subset gap = s;
  if (real) {
    gap.iv = Interval{left_max, right_min, true, true};
  } else {
    gap.iv = Interval{left_max + 0.5, right_min - 0.5, false, false};
  }
  double gap_len = 0.0;
  if (gap.iv.hi > gap.iv.lo) gap_len = geo.length(gap);

  const double before = detail::node_volume(out.left, geo);
  if (gap_len > lim.min_l && detail::carve_conditions_hold(subsets, feature, geo, lim)) {
    Subset l = s, r = s;
    if (real) {
      l.iv.hi = left_max;
      l.iv.hi_open = false;
      r.iv.lo = right_min;
      r.iv.lo_open = false;
    } else {
      l.iv.hi = left_max + 0.5;
      r.iv.lo = right_min - 0.5;
    }
    normalize_subset(l);
    normalize_subset(r);
    out.left[feature] = l;
    out.right[feature] = r;
    std::vector<Subset> empty = subsets;
    empty[feature] = gap;
    out.empty = std::move(empty);
  } else {
    Subset l = s, r = s;
    l.iv.hi = threshold;
    l.iv.hi_open = false;
    r.iv.lo = threshold;
    r.iv.lo_open = true;
    normalize_subset(l);
    normalize_subset(r);
    out.left[feature] = l;
    out.right[feature] = r;
  }
  double after = detail::node_volume(out.left, geo) + detail::node_volume(out.right, geo);
  if (out.empty) after += detail::node_volume(*out.empty, geo);
  out.event = CarveEvent{before, after};
  return out;
}

}  // namespace denslice
