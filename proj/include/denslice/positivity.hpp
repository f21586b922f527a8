#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "denslice/error.hpp"
#include "denslice/partition.hpp"
#include "denslice/slice.hpp"

namespace denslice {

// A slice proposed as positivity-violating: sparse or empty in the arm that
// produced it, with very uneven support across treatment arms once the
// treatment constraint is stripped.
struct ViolationCandidate {
  Slice base;                               // treatment subset removed
  std::string origin_arm;
  std::optional<double> sparsity_score;     // mean density proxy of the arm slice; absent for empty slices
  std::vector<std::size_t> arm_counts;      // base-slice members per arm, in arm order
  std::vector<double> arm_fractions;        // counts over arm sizes
  bool flagged = false;
};

struct PositivityScreen {
  std::vector<std::string> arm_levels;
  std::vector<std::size_t> arm_sizes;
  std::vector<ViolationCandidate> candidates;
  std::vector<std::pair<std::string, PartitionModel>> models;
};

namespace detail {

inline std::string slice_key(const Slice& s) {
  std::ostringstream os;
  for (const Subset& c : s.constraints) {
    os << c.feature << '|';
    if (c.kind == FeatureKind::Nominal) {
      for (const auto& lv : c.levels) os << lv << ',';
    } else {
      os.precision(17);
      os << c.iv.lo << ';' << c.iv.hi << ';' << c.iv.lo_open << ';' << c.iv.hi_open;
    }
    os << '#';
  }
  return os.str();
}

}  // namespace detail

// Conditioned partitioning followed by the opposite-arm check: per arm, take
// the slices whose mean density proxy lies in the sparsest quantile plus all
// empty slices, strip the treatment subset, count the base slice's members
// per arm over the full dataset, and flag it when the support fractions
// differ by at least imbalance_ratio (an arm with zero support flags against
// any non-empty arm). Bases empty in every arm stay unflagged.
inline PositivityScreen screen_positivity(const Dataset& ds, const std::string& treatment_feature,
                                          const PartitionConfig& cfg, double sparsity_quantile,
                                          double imbalance_ratio) {
  if (!(sparsity_quantile > 0.0 && sparsity_quantile < 1.0))
    fail(errc::invalid_argument, "sparsity_quantile must lie in (0, 1)");
  if (!(imbalance_ratio > 1.0)) fail(errc::invalid_argument, "imbalance_ratio must exceed 1");

  PositivityScreen out;
  out.models = conditioned_partition(ds, cfg, treatment_feature);
  const int treat = ds.feature_index(treatment_feature);

  for (const auto& [level, model] : out.models) {
    out.arm_levels.push_back(level);
    std::size_t size = 0;
    for (std::size_t i = 0; i < ds.n; ++i)
      if (ds.label(static_cast<std::size_t>(treat), i) == level) ++size;
    out.arm_sizes.push_back(size);
  }

  std::map<std::string, std::size_t> dedupe;
  for (std::size_t a = 0; a < out.models.size(); ++a) {
    const PartitionModel& model = out.models[a].second;

    // sparsity threshold: the top ceil(q * K) non-empty slices by mean proxy
    std::vector<const Slice*> non_empty;
    for (const Slice& s : model.slices)
      if (!s.is_empty) non_empty.push_back(&s);
    std::sort(non_empty.begin(), non_empty.end(), [](const Slice* x, const Slice* y) {
      if (*x->mean_density != *y->mean_density) return *x->mean_density > *y->mean_density;
      return x->id < y->id;
    });
    const std::size_t take = non_empty.empty()
                                 ? 0
                                 : static_cast<std::size_t>(std::ceil(
                                       sparsity_quantile * static_cast<double>(non_empty.size()) - 1e-9));

    std::vector<std::pair<const Slice*, std::optional<double>>> selected;
    for (std::size_t k = 0; k < std::min(std::max<std::size_t>(take, 1), non_empty.size()); ++k)
      selected.emplace_back(non_empty[k], *non_empty[k]->mean_density);
    for (const Slice& s : model.slices)
      if (s.is_empty) selected.emplace_back(&s, std::nullopt);

    for (const auto& [arm_slice, score] : selected) {
      Slice base;
      for (const Subset& c : arm_slice->constraints)
        if (c.feature != treat) base.constraints.push_back(c);

      const std::string key = detail::slice_key(base);
      if (dedupe.count(key)) continue;
      dedupe[key] = out.candidates.size();

      ViolationCandidate cand;
      cand.base = std::move(base);
      cand.origin_arm = out.arm_levels[a];
      cand.sparsity_score = score;
      cand.arm_counts.assign(out.arm_levels.size(), 0);
      for (std::size_t i = 0; i < ds.n; ++i) {
        if (!slice_contains(cand.base, ds, i)) continue;
        const std::string& lv = ds.label(static_cast<std::size_t>(treat), i);
        for (std::size_t b = 0; b < out.arm_levels.size(); ++b)
          if (out.arm_levels[b] == lv) {
            ++cand.arm_counts[b];
            break;
          }
      }
      cand.arm_fractions.resize(out.arm_levels.size());
      for (std::size_t b = 0; b < out.arm_levels.size(); ++b)
        cand.arm_fractions[b] = out.arm_sizes[b] == 0
                                    ? 0.0
                                    : static_cast<double>(cand.arm_counts[b]) /
                                          static_cast<double>(out.arm_sizes[b]);
      double mx = 0.0, mn = std::numeric_limits<double>::infinity();
      for (double f : cand.arm_fractions) {
        mx = std::max(mx, f);
        mn = std::min(mn, f);
      }
      if (mx > 0.0) {
        cand.flagged = mn == 0.0 || mx / mn >= imbalance_ratio;
      }
      out.candidates.push_back(std::move(cand));
    }
  }
  return out;
}

struct RemovalReport {
  std::vector<std::string> arm_levels;
  std::vector<std::size_t> removed_per_arm;
  std::size_t removed_total = 0;
};

// Removes every row matching at least one flagged base slice (union
// semantics) and reports the per-arm removal counts.
inline std::pair<Dataset, RemovalReport> remove_slices(const Dataset& ds,
                                                       const std::string& treatment_feature,
                                                       const PositivityScreen& screen) {
  const int treat = ds.feature_index(treatment_feature);
  RemovalReport rep;
  rep.arm_levels = screen.arm_levels;
  rep.removed_per_arm.assign(screen.arm_levels.size(), 0);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < ds.n; ++i) {
    bool hit = false;
    for (const ViolationCandidate& c : screen.candidates) {
      if (c.flagged && slice_contains(c.base, ds, i)) {
        hit = true;
        break;
      }
    }
    if (!hit) {
      keep.push_back(i);
      continue;
    }
    ++rep.removed_total;
    const std::string& lv = ds.label(static_cast<std::size_t>(treat), i);
    for (std::size_t b = 0; b < rep.arm_levels.size(); ++b)
      if (rep.arm_levels[b] == lv) {
        ++rep.removed_per_arm[b];
        break;
      }
  }
  return {ds.select_rows(keep), std::move(rep)};
}

}  // namespace denslice
