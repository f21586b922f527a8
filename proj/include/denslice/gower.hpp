#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "denslice/error.hpp"
#include "denslice/feature.hpp"

namespace denslice {

// Observed max - min per feature; the Gower denominator. Nominal entries are
// unused and set to 1.
inline std::vector<double> gower_ranges(const Dataset& ds) {
  std::vector<double> out(ds.p(), 1.0);
  for (std::size_t j = 0; j < ds.p(); ++j) {
    if (ds.schema[j].kind == FeatureKind::Nominal) continue;
    const auto& v = ds.columns[j].values;
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    out[j] = *hi - *lo;
  }
  return out;
}

// Mean over features of per-feature distances: range-normalized |a-b| for
// numeric kinds, 0/1 match for nominal. Result lies in [0, 1].
inline double gower_distance(const Dataset& ds, std::size_t row_a, std::size_t row_b,
                             const std::vector<double>& ranges) {
  double sum = 0.0;
  for (std::size_t j = 0; j < ds.p(); ++j) {
    if (ds.schema[j].kind == FeatureKind::Nominal) {
      sum += ds.num(j, row_a) == ds.num(j, row_b) ? 0.0 : 1.0;
    } else {
      if (!(ranges[j] > 0.0))
        fail(errc::zero_range, "feature '" + ds.schema[j].name + "' has zero range");
      sum += std::abs(ds.num(j, row_a) - ds.num(j, row_b)) / ranges[j];
    }
  }
  return sum / static_cast<double>(ds.p());
}

// Core distance: the m-th smallest Gower distance from each row to the other
// n-1 rows, ties resolved by the order statistic of the sorted multiset.
inline std::vector<double> core_distances(const Dataset& ds, std::size_t m,
                                          const std::vector<double>* ranges_override = nullptr) {
  if (ds.n < 2) fail(errc::too_few_rows, "need at least 2 rows");
  if (m < 1 || m >= ds.n)
    fail(errc::m_too_large, "m must satisfy 1 <= m < n, got m=" + std::to_string(m) + ", n=" + std::to_string(ds.n));
  const std::vector<double> ranges = ranges_override ? *ranges_override : gower_ranges(ds);
  std::vector<double> y(ds.n);
  std::vector<double> buf(ds.n - 1);
  for (std::size_t i = 0; i < ds.n; ++i) {
    std::size_t k = 0;
    for (std::size_t j = 0; j < ds.n; ++j) {
      if (j == i) continue;
      buf[k++] = gower_distance(ds, i, j, ranges);
    }
    std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(m - 1), buf.end());
    y[i] = buf[m - 1];
  }
  return y;
}

}  // namespace denslice
