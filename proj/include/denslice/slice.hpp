#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "denslice/error.hpp"
#include "denslice/feature.hpp"
#include "denslice/subset.hpp"

namespace denslice {

// An axis-aligned hyper-rectangle: the intersection of per-feature subsets.
// Complete subsets are implicit; `constraints` holds only the defining ones,
// ordered by feature index.
struct Slice {
  int id = 0;
  std::vector<Subset> constraints;
  std::size_t support = 0;
  std::optional<double> mean_density;
  double volume = 0.0;
  bool is_empty = false;
};

inline std::size_t slice_dimension(const Slice& s) { return s.constraints.size(); }

// Row membership: every constraint must admit the row's value. Nominal labels
// unseen by a constraint's level set fall outside it.
inline bool slice_contains(const Slice& s, const Dataset& ds, std::size_t row) {
  for (const Subset& c : s.constraints) {
    const std::size_t j = static_cast<std::size_t>(c.feature);
    if (j >= ds.p()) fail(errc::type_mismatch, "constraint references feature out of range");
    if (ds.schema[j].kind != c.kind) fail(errc::type_mismatch, "constraint kind differs from column kind");
    if (c.kind == FeatureKind::Nominal) {
      if (!c.contains_label(ds.label(j, row))) return false;
    } else {
      if (!c.contains_num(ds.num(j, row))) return false;
    }
  }
  return true;
}

// Product of per-feature fractional lengths; implicit complete subsets
// contribute factor 1.
inline double slice_volume(const Slice& s, const std::vector<Domain>& domains,
                           const std::vector<std::vector<double>>& unique_values, double epsilon) {
  double v = 1.0;
  for (const Subset& c : s.constraints) {
    const std::size_t j = static_cast<std::size_t>(c.feature);
    v *= subset_length(c, domains[j], unique_values[j], epsilon);
  }
  return v;
}

// Expands a slice to one subset per feature, materializing the complete ones.
inline std::vector<Subset> materialize_subsets(const Slice& s, const std::vector<Domain>& domains) {
  std::vector<Subset> out;
  out.reserve(domains.size());
  for (std::size_t j = 0; j < domains.size(); ++j) out.push_back(full_subset(static_cast<int>(j), domains[j]));
  for (const Subset& c : s.constraints) out[static_cast<std::size_t>(c.feature)] = c;
  return out;
}

// Collapses per-feature subsets back to a constraint list, dropping the
// complete ones.
inline Slice make_slice(const std::vector<Subset>& subsets, const std::vector<Domain>& domains) {
  Slice s;
  for (std::size_t j = 0; j < subsets.size(); ++j) {
    if (!subset_complete(subsets[j], domains[j])) s.constraints.push_back(subsets[j]);
  }
  return s;
}

}  // namespace denslice
