#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "denslice/error.hpp"
#include "denslice/feature.hpp"
#include "denslice/gower.hpp"
#include "denslice/isolation_forest.hpp"

namespace denslice {

enum class ProxyMethod { GowerKnn, IsolationForest };

struct ProxyConfig {
  ProxyMethod method = ProxyMethod::GowerKnn;
  std::size_t knn_m = 0;  // 0: default max(5, ceil(0.02 n))
  std::size_t trees = 100;
  std::size_t subsample = 256;  // clamped to n
};

// Per-row density proxy; higher means sparser for both methods.
struct DensityTarget {
  std::vector<double> values;
  ProxyMethod method = ProxyMethod::GowerKnn;
  std::size_t knn_m = 0;
};

inline std::size_t default_knn_m(std::size_t n) {
  const std::size_t frac = static_cast<std::size_t>(std::ceil(0.02 * static_cast<double>(n)));
  return std::max<std::size_t>(5, frac);
}

inline DensityTarget compute_density_target(const Dataset& ds, const ProxyConfig& cfg,
                                            std::uint64_t seed,
                                            const std::vector<double>* gower_ranges_override = nullptr) {
  DensityTarget t;
  t.method = cfg.method;
  if (cfg.method == ProxyMethod::GowerKnn) {
    std::size_t m = cfg.knn_m ? cfg.knn_m : default_knn_m(ds.n);
    m = std::min(m, ds.n > 1 ? ds.n - 1 : std::size_t{1});
    t.knn_m = m;
    t.values = core_distances(ds, m, gower_ranges_override);
  } else {
    const std::size_t psi = std::min(cfg.subsample, ds.n);
    t.values = isolation_forest_scores(ds, cfg.trees, psi, seed);
  }
  return t;
}

struct TrimResult {
  Dataset dataset;                     // rows that were kept
  std::vector<std::size_t> kept;       // original indices of kept rows
  std::vector<std::size_t> trimmed;    // original indices of dropped rows, ascending
  std::vector<double> target;          // proxy values of kept rows
};

// Drops the floor(fraction * n) rows with the largest proxy values. On ties
// the higher row index is dropped first, so lower indices are kept longest.
inline TrimResult trim_outliers(const Dataset& ds, const DensityTarget& target, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0))
    fail(errc::invalid_argument, "trim fraction must lie in [0, 1)");
  const std::size_t k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(ds.n)));
  TrimResult out;
  if (k == 0) {
    out.dataset = ds;
    out.kept.resize(ds.n);
    std::iota(out.kept.begin(), out.kept.end(), std::size_t{0});
    out.target = target.values;
    return out;
  }
  std::vector<std::size_t> order(ds.n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (target.values[a] != target.values[b]) return target.values[a] > target.values[b];
    return a > b;
  });
  out.trimmed.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(out.trimmed.begin(), out.trimmed.end());
  std::vector<bool> drop(ds.n, false);
  for (std::size_t i : out.trimmed) drop[i] = true;
  for (std::size_t i = 0; i < ds.n; ++i) {
    if (!drop[i]) {
      out.kept.push_back(i);
      out.target.push_back(target.values[i]);
    }
  }
  out.dataset = ds.select_rows(out.kept);
  return out;
}

}  // namespace denslice
