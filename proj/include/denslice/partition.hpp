#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "denslice/carve.hpp"
#include "denslice/density.hpp"
#include "denslice/error.hpp"
#include "denslice/feature.hpp"
#include "denslice/slice.hpp"
#include "denslice/subset.hpp"

namespace denslice {

struct PartitionConfig {
  std::size_t p_star = 3;
  double min_l = 0.1;
  double min_slice_size_frac = 0.1;
  double epsilon = 0.001;
  double min_mse_decrease_frac = 0.01;
  double trim_fraction = 0.01;
  ProxyConfig proxy;
  std::uint64_t seed = 0;
};

struct SplitCandidate {
  int feature = -1;
  bool is_level_split = false;
  double threshold = 0.0;   // numeric kinds: midpoint between adjacent node values
  std::string level;        // nominal: the singled-out level
  double left_max = 0.0;    // numeric: largest node value left of the threshold
  double right_min = 0.0;   // numeric: smallest node value right of it
  double weighted_child_mse = 0.0;
  std::size_t left_support = 0;
  std::size_t right_support = 0;
};

// The full set of slices tiling the feature space, with everything needed to
// score new data against it.
struct PartitionModel {
  PartitionConfig config;
  std::vector<FeatureSchema> schema;
  std::vector<Domain> domains;
  std::vector<std::size_t> trimmed_rows;     // original row indices
  std::vector<std::string> dropped_features;
  std::vector<Slice> slices;
  std::vector<std::string> warnings;
  std::optional<std::string> conditioning_feature;
  std::optional<std::string> conditioning_level;
};

// Conservation records collected during growth, one per split and per trim.
struct BuildTrace {
  std::vector<CarveEvent> events;
};

inline std::size_t min_leaf_support(double min_slice_size_frac, std::size_t n) {
  const double raw = min_slice_size_frac * static_cast<double>(n);
  const auto c = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::max<std::size_t>(2, c);
}

// Split thresholds for real features mirror single-precision midpoint
// arithmetic; serialized boundaries stay stable across platforms. Falls back
// to the double midpoint when the float casts collapse the neighbors.
inline double real_split_threshold(double a, double b) {
  double t = (static_cast<double>(static_cast<float>(a)) + static_cast<double>(static_cast<float>(b))) / 2.0;
  if (!(t > a && t < b)) {
    t = (a + b) / 2.0;
    if (!(t > a && t < b)) t = a;
  }
  return t;
}

inline double half_integer_threshold(double a, double b) {
  return std::floor((a + b) / 2.0) + 0.5;
}

namespace detail {

struct NodeStats {
  double sum = 0.0;
  double sum2 = 0.0;
  std::size_t count = 0;

  void add(double v) {
    sum += v;
    sum2 += v * v;
    ++count;
  }
  double sse() const {
    return count == 0 ? 0.0 : sum2 - sum * sum / static_cast<double>(count);
  }
};

inline std::size_t dimension_for_budget(const std::vector<Subset>& subsets,
                                        const std::vector<Domain>& domains, int overlay_feature) {
  std::size_t d = 0;
  for (std::size_t j = 0; j < subsets.size(); ++j) {
    if (static_cast<int>(j) == overlay_feature) continue;
    if (!subset_complete(subsets[j], domains[j])) ++d;
  }
  return d;
}

}  // namespace detail

// Exhaustive scan over legal candidates: midpoints between consecutive
// distinct node values for numeric kinds, each level vs rest for nominal.
// Returns the candidate minimizing weighted child MSE, subject to the child
// support floor, the slice dimension budget, and the minimum MSE decrease.
// Ties go to the lower feature index, then the lower threshold or
// lexicographically first level.
inline std::optional<SplitCandidate> best_split(const Dataset& ds, const std::vector<std::size_t>& rows,
                                                const std::vector<double>& y,
                                                const std::vector<Subset>& node_subsets,
                                                const std::vector<Domain>& domains,
                                                std::size_t p_star, std::size_t min_leaf,
                                                double min_decrease, int overlay_feature = -1) {
  const std::size_t n = rows.size();
  if (n < 2 * min_leaf) return std::nullopt;
  detail::NodeStats node;
  for (std::size_t i : rows) node.add(y[i]);
  const double node_sse = node.sse();
  const std::size_t dim = detail::dimension_for_budget(node_subsets, domains, overlay_feature);

  // zero-decrease splits are never taken; the guard keeps float noise on a
  // constant target from counting as a decrease
  const double noise_guard = 1e-12 * node.sum2;

  std::optional<SplitCandidate> best;
  auto consider = [&](SplitCandidate cand, double sse_children) {
    const double decrease = node_sse - sse_children;
    if (decrease <= noise_guard) return;
    if (decrease < min_decrease * static_cast<double>(n)) return;
    cand.weighted_child_mse = sse_children / static_cast<double>(n);
    if (!best || cand.weighted_child_mse < best->weighted_child_mse) best = std::move(cand);
  };

  for (std::size_t j = 0; j < ds.p(); ++j) {
    if (static_cast<int>(j) == overlay_feature) continue;
    const bool already_constrained = !subset_complete(node_subsets[j], domains[j]);
    if (!already_constrained && dim + 1 > p_star) continue;

    if (ds.schema[j].kind == FeatureKind::Nominal) {
      std::map<std::string, detail::NodeStats> per_level;
      for (std::size_t i : rows) per_level[ds.label(j, i)].add(y[i]);
      if (per_level.size() < 2) continue;
      for (const auto& [level, stats] : per_level) {
        if (stats.count < min_leaf || n - stats.count < min_leaf) continue;
        detail::NodeStats rest;
        rest.sum = node.sum - stats.sum;
        rest.sum2 = node.sum2 - stats.sum2;
        rest.count = n - stats.count;
        SplitCandidate cand;
        cand.feature = static_cast<int>(j);
        cand.is_level_split = true;
        cand.level = level;
        cand.left_support = stats.count;
        cand.right_support = rest.count;
        consider(std::move(cand), stats.sse() + rest.sse());
      }
    } else {
      std::vector<std::pair<double, double>> vy;
      vy.reserve(n);
      for (std::size_t i : rows) vy.emplace_back(ds.num(j, i), y[i]);
      std::sort(vy.begin(), vy.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      detail::NodeStats left;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        left.add(vy[k].second);
        if (vy[k].first == vy[k + 1].first) continue;
        if (left.count < min_leaf || n - left.count < min_leaf) continue;
        const double a = vy[k].first, b = vy[k + 1].first;
        detail::NodeStats right;
        right.sum = node.sum - left.sum;
        right.sum2 = node.sum2 - left.sum2;
        right.count = n - left.count;
        SplitCandidate cand;
        cand.feature = static_cast<int>(j);
        cand.threshold = ds.schema[j].kind == FeatureKind::Real ? real_split_threshold(a, b)
                                                                : half_integer_threshold(a, b);
        cand.left_max = a;
        cand.right_min = b;
        cand.left_support = left.count;
        cand.right_support = right.count;
        consider(std::move(cand), left.sse() + right.sse());
      }
    }
  }
  return best;
}

namespace detail {

struct Grower {
  const Dataset& ds;
  const std::vector<double>& y;
  const std::vector<Domain>& domains;
  GeometryContext geo;
  CarveLimits limits;
  std::size_t min_leaf;
  double min_decrease;
  int overlay_feature = -1;
  BuildTrace* trace = nullptr;

  std::vector<Slice> leaves;
  std::vector<Slice> empties;

  void emit_empty(const std::vector<Subset>& subsets) {
    Slice s = make_slice(subsets, domains);
    s.is_empty = true;
    s.support = 0;
    empties.push_back(std::move(s));
  }

  void emit_leaf(const std::vector<Subset>& subsets, const std::vector<std::size_t>& rows) {
    Slice s = make_slice(subsets, domains);
    s.is_empty = false;
    s.support = rows.size();
    double sum = 0.0;
    for (std::size_t i : rows) sum += y[i];
    s.mean_density = sum / static_cast<double>(rows.size());
    leaves.push_back(std::move(s));
  }

  std::vector<Subset> carve(const std::vector<Subset>& subsets, const std::vector<std::size_t>& rows) {
    CarveOutcome outcome = carve_after_split(subsets, ds, rows, geo, limits);
    for (const auto& e : outcome.empties) emit_empty(e);
    if (trace)
      trace->events.insert(trace->events.end(), outcome.events.begin(), outcome.events.end());
    return std::move(outcome.trimmed);
  }

  void grow(const std::vector<Subset>& subsets, const std::vector<std::size_t>& rows) {
    std::optional<SplitCandidate> cand =
        best_split(ds, rows, y, subsets, domains, limits.p_star, min_leaf, min_decrease, overlay_feature);
    if (!cand) {
      emit_leaf(subsets, rows);
      return;
    }
    const auto j = static_cast<std::size_t>(cand->feature);
    std::vector<std::size_t> left_rows, right_rows;
    std::vector<Subset> left_subsets, right_subsets;
    if (cand->is_level_split) {
      for (std::size_t i : rows)
        (ds.label(j, i) == cand->level ? left_rows : right_rows).push_back(i);
      left_subsets = subsets;
      right_subsets = subsets;
      Subset l = subsets[j], r = subsets[j];
      l.levels = {cand->level};
      r.levels.erase(std::remove(r.levels.begin(), r.levels.end(), cand->level), r.levels.end());
      left_subsets[j] = std::move(l);
      right_subsets[j] = std::move(r);
      if (trace) {
        const double parent = detail::node_volume(subsets, geo);
        const double parts =
            detail::node_volume(left_subsets, geo) + detail::node_volume(right_subsets, geo);
        trace->events.push_back(CarveEvent{parent, parts});
      }
    } else {
      for (std::size_t i : rows)
        (ds.num(j, i) <= cand->threshold ? left_rows : right_rows).push_back(i);
      AtSplitCarve cut = carve_at_split(subsets, j, cand->threshold, cand->left_max,
                                        cand->right_min, geo, limits);
      if (cut.empty) emit_empty(*cut.empty);
      if (trace) trace->events.push_back(cut.event);
      left_subsets = std::move(cut.left);
      right_subsets = std::move(cut.right);
    }
    std::vector<Subset> left_trimmed = carve(left_subsets, left_rows);
    std::vector<Subset> right_trimmed = carve(right_subsets, right_rows);
    grow(left_trimmed, left_rows);
    grow(right_trimmed, right_rows);
  }
};

struct GrowInputs {
  const Dataset* ds = nullptr;
  const std::vector<double>* y = nullptr;
  const std::vector<Domain>* domains = nullptr;
  const std::vector<std::vector<double>>* unique_values = nullptr;
  std::vector<Subset> root_subsets;
  std::size_t min_leaf = 2;
  int overlay_feature = -1;
};

inline std::vector<Slice> grow_and_assemble(const GrowInputs& in, const PartitionConfig& cfg,
                                            BuildTrace* trace) {
  Grower grower{*in.ds,
                *in.y,
                *in.domains,
                GeometryContext{in.domains, in.unique_values, cfg.epsilon},
                CarveLimits{cfg.min_l, cfg.p_star},
                in.min_leaf,
                0.0,
                in.overlay_feature,
                trace,
                {},
                {}};
  double mean = 0.0;
  for (double v : *in.y) mean += v;
  mean /= static_cast<double>(in.y->size());
  double var = 0.0;
  for (double v : *in.y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(in.y->size());
  grower.min_decrease = cfg.min_mse_decrease_frac * var;

  std::vector<std::size_t> all_rows(in.ds->n);
  for (std::size_t i = 0; i < in.ds->n; ++i) all_rows[i] = i;
  std::vector<Subset> root = grower.carve(in.root_subsets, all_rows);
  grower.grow(root, all_rows);

  std::vector<Slice> slices = std::move(grower.leaves);
  slices.insert(slices.end(), grower.empties.begin(), grower.empties.end());
  for (std::size_t k = 0; k < slices.size(); ++k) {
    slices[k].id = static_cast<int>(k + 1);
    slices[k].volume = slice_volume(slices[k], *in.domains, *in.unique_values, cfg.epsilon);
  }
  return slices;
}

inline void validate_config(const PartitionConfig& cfg) {
  check_epsilon(cfg.epsilon);
  if (!(cfg.min_l >= 0.0 && cfg.min_l <= 1.0)) fail(errc::invalid_argument, "min_L must lie in [0, 1]");
  if (!(cfg.min_slice_size_frac >= 0.0 && cfg.min_slice_size_frac <= 1.0))
    fail(errc::invalid_argument, "min_slice_size_frac must lie in [0, 1]");
  if (!(cfg.min_mse_decrease_frac >= 0.0 && cfg.min_mse_decrease_frac <= 1.0))
    fail(errc::invalid_argument, "min_mse_decrease_frac must lie in [0, 1]");
  if (!(cfg.trim_fraction >= 0.0 && cfg.trim_fraction < 1.0))
    fail(errc::invalid_argument, "trim_fraction must lie in [0, 1)");
  if (cfg.p_star < 1) fail(errc::invalid_argument, "p_star must be >= 1");
}

inline void warn_epsilon_vs_gaps(const Dataset& ds, const std::vector<Domain>& domains,
                                 const std::vector<std::vector<double>>& tables, double epsilon,
                                 std::vector<std::string>* warnings) {
  for (std::size_t j = 0; j < ds.p(); ++j) {
    if (ds.schema[j].kind != FeatureKind::Real) continue;
    const auto& t = tables[j];
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < t.size(); ++k) min_gap = std::min(min_gap, t[k + 1] - t[k]);
    const double frac = min_gap / domains[j].size;
    if (epsilon >= frac && warnings)
      warnings->push_back("epsilon " + std::to_string(epsilon) + " is not below the smallest gap fraction " +
                          std::to_string(frac) + " of feature '" + ds.schema[j].name + "'");
  }
}

}  // namespace detail

// Full pipeline: density proxy, outlier trim, domain recomputation on the
// kept rows, then depth-first tree growth with empty-space carving at and
// after each split. Deterministic given the dataset, config and seed.
inline PartitionModel build_partition(const Dataset& input, const PartitionConfig& cfg,
                                      BuildTrace* trace = nullptr) {
  detail::validate_config(cfg);
  PartitionModel model;
  model.config = cfg;

  Dataset ds = drop_single_valued_features(input, &model.dropped_features, &model.warnings);
  if (ds.p() == 0) fail(errc::invalid_argument, "no usable features after dropping constants");
  if (ds.n < 2) fail(errc::too_few_rows, "need at least 2 rows");

  DensityTarget target = compute_density_target(ds, cfg.proxy, cfg.seed);
  if (cfg.proxy.method == ProxyMethod::GowerKnn) model.config.proxy.knn_m = target.knn_m;
  TrimResult trim = trim_outliers(ds, target, cfg.trim_fraction);
  model.trimmed_rows = trim.trimmed;

  Dataset kept = drop_single_valued_features(trim.dataset, &model.dropped_features, &model.warnings);
  if (kept.p() == 0) fail(errc::invalid_argument, "no usable features after trimming");

  model.schema = kept.schema;
  model.domains = compute_domains(kept);
  const std::vector<std::vector<double>> tables = unique_value_tables(kept);
  detail::warn_epsilon_vs_gaps(kept, model.domains, tables, cfg.epsilon, &model.warnings);

  const std::size_t min_leaf = min_leaf_support(cfg.min_slice_size_frac, kept.n);
  if (kept.n < 2 * min_leaf)
    fail(errc::too_few_rows, "need at least " + std::to_string(2 * min_leaf) + " rows, have " +
                                 std::to_string(kept.n));

  detail::GrowInputs in;
  in.ds = &kept;
  in.y = &trim.target;
  in.domains = &model.domains;
  in.unique_values = &tables;
  in.min_leaf = min_leaf;
  for (std::size_t j = 0; j < kept.p(); ++j)
    in.root_subsets.push_back(full_subset(static_cast<int>(j), model.domains[j]));
  model.slices = detail::grow_and_assemble(in, cfg, trace);
  return model;
}

// Rearranges a dataset's columns to the model's feature order and recodes
// ordered columns into the model's code space by label; labels outside the
// model's representable span become NaN and fall outside every constraint
// on that feature. Fails with ModelDataMismatch on missing features or kind
// conflicts.
inline Dataset project_onto_model(const PartitionModel& model, const Dataset& ds) {
  Dataset out;
  out.n = ds.n;
  for (std::size_t k = 0; k < model.schema.size(); ++k) {
    const FeatureSchema& f = model.schema[k];
    const int j = ds.feature_index(f.name);
    if (j < 0) fail(errc::model_data_mismatch, "dataset lacks feature '" + f.name + "'");
    const Column& src = ds.columns[static_cast<std::size_t>(j)];
    if (ds.schema[static_cast<std::size_t>(j)].kind != f.kind)
      fail(errc::model_data_mismatch, "feature '" + f.name + "' kind differs from the model");
    Column col;
    if (f.kind == FeatureKind::Ordered) {
      const std::vector<std::string>& span = model.domains[k].levels;
      col.levels = span;
      col.values.reserve(ds.n);
      for (std::size_t i = 0; i < ds.n; ++i) {
        const std::string& label = src.levels[static_cast<std::size_t>(src.values[i])];
        const auto it = std::find(span.begin(), span.end(), label);
        col.values.push_back(it == span.end()
                                 ? std::numeric_limits<double>::quiet_NaN()
                                 : static_cast<double>(it - span.begin()));
      }
    } else {
      col = src;
    }
    out.schema.push_back({f.name, f.kind, {}});
    out.columns.push_back(std::move(col));
  }
  return out;
}

// Conditioned partitioning: domains come from the full dataset, then one
// partition is grown per observed level of the conditioning feature, with
// the proxy computed within the arm. The conditioning subset rides along on
// every slice without consuming the dimension budget.
inline std::vector<std::pair<std::string, PartitionModel>> conditioned_partition(
    const Dataset& input, const PartitionConfig& cfg, const std::string& conditioning_feature,
    BuildTrace* trace = nullptr) {
  detail::validate_config(cfg);

  std::vector<std::string> dropped;
  std::vector<std::string> warnings;
  Dataset ds = drop_single_valued_features(input, &dropped, &warnings);
  const int cond = ds.feature_index(conditioning_feature);
  if (cond < 0)
    fail(errc::not_categorical, "conditioning feature '" + conditioning_feature +
                                    "' is missing or single-valued");
  const FeatureKind ckind = ds.schema[static_cast<std::size_t>(cond)].kind;
  if (ckind != FeatureKind::Nominal && ckind != FeatureKind::Ordered)
    fail(errc::not_categorical, "conditioning feature must be nominal or ordered");

  const std::vector<Domain> domains = compute_domains(ds);
  const std::vector<std::vector<double>> tables = unique_value_tables(ds);
  const std::vector<double> ranges = gower_ranges(ds);
  const auto jc = static_cast<std::size_t>(cond);

  // observed levels in canonical order: sorted labels for nominal, code order
  // for ordered
  std::vector<std::pair<std::string, double>> levels;
  if (ckind == FeatureKind::Nominal) {
    for (const std::string& lv : domains[jc].levels) {
      const auto& col = ds.columns[jc];
      const auto it = std::find(col.levels.begin(), col.levels.end(), lv);
      levels.emplace_back(lv, static_cast<double>(it - col.levels.begin()));
    }
  } else {
    std::vector<double> codes = ds.columns[jc].values;
    std::sort(codes.begin(), codes.end());
    codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
    for (double c : codes) levels.emplace_back(ds.columns[jc].levels[static_cast<std::size_t>(c)], c);
  }
  if (levels.size() < 2) fail(errc::not_categorical, "conditioning feature has <2 observed levels");

  std::vector<std::pair<std::string, PartitionModel>> out;
  for (const auto& [label, code] : levels) {
    std::vector<std::size_t> arm_rows;
    for (std::size_t i = 0; i < ds.n; ++i)
      if (ds.num(jc, i) == code) arm_rows.push_back(i);
    Dataset arm = ds.select_rows(arm_rows);

    PartitionModel model;
    model.config = cfg;
    model.schema = ds.schema;
    model.domains = domains;
    model.dropped_features = dropped;
    model.warnings = warnings;
    model.conditioning_feature = conditioning_feature;
    model.conditioning_level = label;

    Subset cond_subset;
    cond_subset.feature = cond;
    cond_subset.kind = ckind;
    if (ckind == FeatureKind::Nominal) {
      cond_subset.levels = {label};
    } else {
      cond_subset.iv = Interval{code - 0.5, code + 0.5, false, false};
    }

    std::vector<double> y_arm;
    Dataset kept = arm;
    if (arm.n >= 2) {
      DensityTarget target = compute_density_target(arm, cfg.proxy, cfg.seed, &ranges);
      if (cfg.proxy.method == ProxyMethod::GowerKnn) model.config.proxy.knn_m = target.knn_m;
      TrimResult trim = trim_outliers(arm, target, cfg.trim_fraction);
      for (std::size_t t : trim.trimmed) model.trimmed_rows.push_back(arm_rows[t]);
      kept = std::move(trim.dataset);
      y_arm = std::move(trim.target);
    } else {
      y_arm.assign(arm.n, 0.0);
    }

    const std::size_t min_leaf = min_leaf_support(cfg.min_slice_size_frac, kept.n);
    std::vector<Subset> root;
    for (std::size_t j = 0; j < ds.p(); ++j) root.push_back(full_subset(static_cast<int>(j), domains[j]));
    root[jc] = cond_subset;

    if (kept.n < 2 * min_leaf) {
      model.warnings.push_back("arm '" + label + "' has " + std::to_string(kept.n) +
                               " rows, below twice the leaf floor; emitting a single slice");
      Slice s = make_slice(root, domains);
      s.id = 1;
      s.support = kept.n;
      s.is_empty = kept.n == 0;
      if (kept.n > 0) {
        double sum = 0.0;
        for (double v : y_arm) sum += v;
        s.mean_density = sum / static_cast<double>(kept.n);
      }
      s.volume = slice_volume(s, domains, tables, cfg.epsilon);
      model.slices = {std::move(s)};
    } else {
      detail::GrowInputs in;
      in.ds = &kept;
      in.y = &y_arm;
      in.domains = &domains;
      in.unique_values = &tables;
      in.min_leaf = min_leaf;
      in.root_subsets = root;
      in.overlay_feature = cond;
      model.slices = detail::grow_and_assemble(in, cfg, trace);
    }
    out.emplace_back(label, std::move(model));
  }
  return out;
}

}  // namespace denslice
