#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numeric>
#include <vector>

#include "denslice/error.hpp"
#include "denslice/feature.hpp"
#include "denslice/rng.hpp"

namespace denslice {

// Average unsuccessful-search path length in a BST of k nodes, with exact
// harmonic numbers so c(2) == 1.
inline double average_path_length(std::size_t k) {
  if (k < 2) return 0.0;
  double h = 0.0;
  for (std::size_t i = 1; i <= k - 1; ++i) h += 1.0 / static_cast<double>(i);
  return 2.0 * h - 2.0 * static_cast<double>(k - 1) / static_cast<double>(k);
}

namespace detail {

struct IfNode {
  int feature = -1;
  double split = 0.0;             // numeric kinds: go left iff value < split
  double level_index = -1.0;      // nominal: go left iff value == level_index
  int left = -1, right = -1;
  double leaf_term = 0.0;         // c(node size) at external nodes
};

struct IfTree {
  std::vector<IfNode> nodes;

  double path_length(const Dataset& ds, std::size_t row) const {
    int cur = 0;
    double depth = 0.0;
    while (nodes[static_cast<std::size_t>(cur)].feature >= 0) {
      const IfNode& nd = nodes[static_cast<std::size_t>(cur)];
      const double v = ds.num(static_cast<std::size_t>(nd.feature), row);
      bool go_left;
      if (nd.level_index >= 0.0) {
        go_left = v == nd.level_index;
      } else {
        go_left = v < nd.split;
      }
      cur = go_left ? nd.left : nd.right;
      depth += 1.0;
    }
    return depth + nodes[static_cast<std::size_t>(cur)].leaf_term;
  }
};

inline int build_if_node(IfTree& tree, const Dataset& ds, std::vector<std::size_t>& rows,
                         std::size_t begin, std::size_t end, std::size_t depth,
                         std::size_t depth_cap, rng& rand) {
  const int my_id = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(IfNode{});
  const std::size_t count = end - begin;
  if (count <= 1 || depth >= depth_cap) {
    tree.nodes[static_cast<std::size_t>(my_id)].leaf_term = average_path_length(count);
    return my_id;
  }
  // splittable features: >=2 distinct values among the node's rows
  std::vector<std::size_t> splittable;
  for (std::size_t j = 0; j < ds.p(); ++j) {
    const double first = ds.num(j, rows[begin]);
    for (std::size_t i = begin + 1; i < end; ++i) {
      if (ds.num(j, rows[i]) != first) {
        splittable.push_back(j);
        break;
      }
    }
  }
  if (splittable.empty()) {  // all rows identical: leaf
    tree.nodes[static_cast<std::size_t>(my_id)].leaf_term = average_path_length(count);
    return my_id;
  }
  const std::size_t j = splittable[rand.below(splittable.size())];
  IfNode nd;
  nd.feature = static_cast<int>(j);
  std::size_t mid = begin;
  if (ds.schema[j].kind == FeatureKind::Nominal) {
    std::vector<double> levels;
    for (std::size_t i = begin; i < end; ++i) levels.push_back(ds.num(j, rows[i]));
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    nd.level_index = levels[rand.below(levels.size())];
    mid = static_cast<std::size_t>(
        std::partition(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                       rows.begin() + static_cast<std::ptrdiff_t>(end),
                       [&](std::size_t r) { return ds.num(j, r) == nd.level_index; }) -
        rows.begin());
  } else {
    double lo = ds.num(j, rows[begin]), hi = lo;
    for (std::size_t i = begin; i < end; ++i) {
      lo = std::min(lo, ds.num(j, rows[i]));
      hi = std::max(hi, ds.num(j, rows[i]));
    }
    nd.split = rand.open_interval(lo, hi);
    mid = static_cast<std::size_t>(
        std::partition(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                       rows.begin() + static_cast<std::ptrdiff_t>(end),
                       [&](std::size_t r) { return ds.num(j, r) < nd.split; }) -
        rows.begin());
  }
  tree.nodes[static_cast<std::size_t>(my_id)] = nd;
  const int left = build_if_node(tree, ds, rows, begin, mid, depth + 1, depth_cap, rand);
  const int right = build_if_node(tree, ds, rows, mid, end, depth + 1, depth_cap, rand);
  tree.nodes[static_cast<std::size_t>(my_id)].left = left;
  tree.nodes[static_cast<std::size_t>(my_id)].right = right;
  return my_id;
}

}  // namespace detail

// Basic isolation forest scores in [0, 1]: 2^(-E[h(x)]/c(psi)). Trees are
// grown on subsamples drawn without replacement, splitting a uniformly random
// splittable feature at a uniform point in the node's observed range (single
// level vs rest for nominal), stopping at isolation or the ceil(log2 psi)
// depth ceiling. Bit-for-bit reproducible given (seed, n_trees, subsample).
inline std::vector<double> isolation_forest_scores(const Dataset& ds, std::size_t n_trees,
                                                   std::size_t subsample, std::uint64_t seed) {
  if (n_trees < 1) fail(errc::invalid_argument, "n_trees must be >= 1");
  if (subsample < 2) fail(errc::subsample_too_small, "subsample must be >= 2");
  if (subsample > ds.n) fail(errc::subsample_too_small, "subsample exceeds row count");
  rng rand(seed);
  const std::size_t depth_cap =
      static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(subsample))));
  std::vector<double> path_sum(ds.n, 0.0);
  std::vector<std::size_t> pool(ds.n);
  for (std::size_t t = 0; t < n_trees; ++t) {
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < subsample; ++i) {
      const std::size_t k = i + rand.below(pool.size() - i);
      std::swap(pool[i], pool[k]);
    }
    std::vector<std::size_t> rows(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(subsample));
    detail::IfTree tree;
    detail::build_if_node(tree, ds, rows, 0, subsample, 0, depth_cap, rand);
    for (std::size_t i = 0; i < ds.n; ++i) path_sum[i] += tree.path_length(ds, i);
  }
  const double c_psi = average_path_length(subsample);
  std::vector<double> score(ds.n);
  for (std::size_t i = 0; i < ds.n; ++i) {
    const double mean_h = path_sum[i] / static_cast<double>(n_trees);
    score[i] = c_psi > 0.0 ? std::exp2(-mean_h / c_psi) : 1.0;
  }
  return score;
}

}  // namespace denslice
