#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "denslice/error.hpp"

namespace denslice {

enum class FeatureKind { Real, Integer, Nominal, Ordered };

inline const char* kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::Real: return "real";
    case FeatureKind::Integer: return "integer";
    case FeatureKind::Nominal: return "nominal";
    case FeatureKind::Ordered: return "ordered";
  }
  return "?";
}

inline std::optional<FeatureKind> kind_from_name(const std::string& s) {
  if (s == "real") return FeatureKind::Real;
  if (s == "integer") return FeatureKind::Integer;
  if (s == "nominal") return FeatureKind::Nominal;
  if (s == "ordered") return FeatureKind::Ordered;
  return std::nullopt;
}

inline bool is_numeric_kind(FeatureKind k) { return k != FeatureKind::Nominal; }

struct FeatureSchema {
  std::string name;
  FeatureKind kind = FeatureKind::Real;
  std::vector<std::string> ordered_levels;  // required iff kind == Ordered
};

// Observed domain of one feature. Numeric kinds carry [lo, hi]; nominal
// carries the observed level set (sorted). For ordered features `levels`
// is the representable span between the observed min and max level, in
// level order, so code c maps to levels[c].
struct Domain {
  std::string name;
  FeatureKind kind = FeatureKind::Real;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::string> levels;
  double size = 0.0;        // |dom(F_j)|
  std::size_t n_unique = 0; // n_j
};

// Column storage. Numeric kinds (real, integer, ordered-as-code) live in
// `values`; nominal cells are indices into the sorted `levels` dictionary,
// stored in `values` as exact small integers.
struct Column {
  std::vector<double> values;
  std::vector<std::string> levels;  // nominal dictionary / ordered span
};

struct Dataset {
  std::vector<FeatureSchema> schema;
  std::vector<Column> columns;
  std::size_t n = 0;

  std::size_t p() const { return schema.size(); }

  double num(std::size_t feature, std::size_t row) const {
    return columns[feature].values[row];
  }
  const std::string& label(std::size_t feature, std::size_t row) const {
    const Column& c = columns[feature];
    return c.levels[static_cast<std::size_t>(c.values[row])];
  }

  int feature_index(const std::string& name) const {
    for (std::size_t j = 0; j < schema.size(); ++j)
      if (schema[j].name == name) return static_cast<int>(j);
    return -1;
  }

  Dataset select_rows(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.schema = schema;
    out.n = rows.size();
    out.columns.resize(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
      out.columns[j].levels = columns[j].levels;
      out.columns[j].values.reserve(rows.size());
      for (std::size_t i : rows) out.columns[j].values.push_back(columns[j].values[i]);
    }
    return out;
  }
};

inline void validate_schema(const std::vector<FeatureSchema>& schema) {
  std::set<std::string> names;
  for (const auto& f : schema) {
    if (!names.insert(f.name).second)
      fail(errc::invalid_argument, "duplicate feature name '" + f.name + "'");
    if (f.kind == FeatureKind::Ordered) {
      if (f.ordered_levels.size() < 2)
        fail(errc::invalid_argument, "ordered feature '" + f.name + "' needs >=2 levels");
      std::set<std::string> lv(f.ordered_levels.begin(), f.ordered_levels.end());
      if (lv.size() != f.ordered_levels.size())
        fail(errc::invalid_argument, "ordered feature '" + f.name + "' has duplicate levels");
    } else if (!f.ordered_levels.empty()) {
      fail(errc::invalid_argument,
           "feature '" + f.name + "' carries ordered_levels but kind is not ordered");
    }
  }
}

// Maps observed level labels to integer codes {0, ..., b-a}, anchored at the
// smallest observed level; unobserved levels between the observed extremes
// stay representable as intermediate codes.
struct OrderedRecode {
  std::vector<double> codes;        // per input cell
  std::vector<std::string> span;    // levels l_a..l_b in order
  std::size_t n_unique = 0;
};

inline OrderedRecode recode_ordered(const std::vector<std::string>& column,
                                    const std::vector<std::string>& ordered_levels) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t k = 0; k < ordered_levels.size(); ++k) pos[ordered_levels[k]] = k;
  std::size_t a = ordered_levels.size(), b = 0;
  for (const auto& v : column) {
    auto it = pos.find(v);
    if (it == pos.end()) fail(errc::unknown_level, "level '" + v + "' not in ordered_levels");
    a = std::min(a, it->second);
    b = std::max(b, it->second);
  }
  if (column.empty() || a == b)
    fail(errc::single_valued_feature, "ordered column has <2 distinct observed levels");
  OrderedRecode out;
  out.codes.reserve(column.size());
  std::set<double> uniq;
  for (const auto& v : column) {
    double code = static_cast<double>(pos.at(v) - a);
    out.codes.push_back(code);
    uniq.insert(code);
  }
  out.span.assign(ordered_levels.begin() + static_cast<std::ptrdiff_t>(a),
                  ordered_levels.begin() + static_cast<std::ptrdiff_t>(b) + 1);
  out.n_unique = uniq.size();
  return out;
}

// Domain of a typed column (ordered columns enter as recoded codes).
inline Domain compute_domain(const Column& column, const FeatureSchema& schema) {
  Domain d;
  d.name = schema.name;
  d.kind = schema.kind;
  if (column.values.empty()) fail(errc::invalid_argument, "empty column '" + schema.name + "'");
  if (schema.kind == FeatureKind::Nominal) {
    std::set<std::size_t> seen;
    for (double v : column.values) seen.insert(static_cast<std::size_t>(v));
    if (seen.size() < 2)
      fail(errc::single_valued_feature, "feature '" + schema.name + "' has a single value");
    for (std::size_t ix : seen) d.levels.push_back(column.levels[ix]);
    std::sort(d.levels.begin(), d.levels.end());
    d.size = static_cast<double>(d.levels.size());
    d.n_unique = d.levels.size();
    return d;
  }
  double lo = column.values[0], hi = column.values[0];
  std::set<double> uniq;
  for (double v : column.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    uniq.insert(v);
  }
  if (uniq.size() < 2)
    fail(errc::single_valued_feature, "feature '" + schema.name + "' has a single value");
  d.n_unique = uniq.size();
  switch (schema.kind) {
    case FeatureKind::Real:
      d.lo = lo;
      d.hi = hi;
      break;
    case FeatureKind::Integer:
      d.lo = lo - 0.5;
      d.hi = hi + 0.5;
      break;
    case FeatureKind::Ordered:
      // codes are observed-anchored, so the span is [-0.5, (b-a)+0.5]
      d.lo = -0.5;
      d.hi = hi + 0.5;
      d.levels = column.levels;
      break;
    case FeatureKind::Nominal:
      break;
  }
  d.size = d.hi - d.lo;
  return d;
}

inline std::vector<Domain> compute_domains(const Dataset& ds) {
  std::vector<Domain> out;
  out.reserve(ds.p());
  for (std::size_t j = 0; j < ds.p(); ++j) out.push_back(compute_domain(ds.columns[j], ds.schema[j]));
  return out;
}

// Sorted distinct observed values, per feature (numeric kinds; empty for nominal).
inline std::vector<std::vector<double>> unique_value_tables(const Dataset& ds) {
  std::vector<std::vector<double>> out(ds.p());
  for (std::size_t j = 0; j < ds.p(); ++j) {
    if (ds.schema[j].kind == FeatureKind::Nominal) continue;
    std::vector<double> v = ds.columns[j].values;
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    out[j] = std::move(v);
  }
  return out;
}

// Builds a typed Dataset from raw string cells. Every cell must parse under
// its column's kind; empty cells are missing values and rejected with the
// offending row index (0-based, header excluded).
inline Dataset validate_dataset(const std::vector<std::string>& header,
                                const std::vector<std::vector<std::string>>& rows,
                                const std::vector<FeatureSchema>& schema) {
  validate_schema(schema);
  if (header.size() != schema.size())
    fail(errc::header_mismatch, "header has " + std::to_string(header.size()) + " columns, schema has " +
                                    std::to_string(schema.size()));
  for (std::size_t j = 0; j < schema.size(); ++j)
    if (header[j] != schema[j].name)
      fail(errc::header_mismatch, "column " + std::to_string(j) + " is '" + header[j] +
                                      "', schema expects '" + schema[j].name + "'");

  Dataset ds;
  ds.schema = schema;
  ds.n = rows.size();
  ds.columns.resize(schema.size());

  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != schema.size())
      fail(errc::missing_value, "row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                                    " fields, expected " + std::to_string(schema.size()));
    for (std::size_t j = 0; j < schema.size(); ++j)
      if (rows[i][j].empty()) fail(errc::missing_value, "row " + std::to_string(i) + ", column '" + schema[j].name + "'");
  }

  for (std::size_t j = 0; j < schema.size(); ++j) {
    Column& col = ds.columns[j];
    col.values.reserve(rows.size());
    switch (schema[j].kind) {
      case FeatureKind::Real:
      case FeatureKind::Integer: {
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const std::string& cell = rows[i][j];
          std::size_t used = 0;
          double v = 0.0;
          try {
            v = std::stod(cell, &used);
          } catch (const std::exception&) {
            fail(errc::type_mismatch, "row " + std::to_string(i) + ", column '" + schema[j].name +
                                          "': '" + cell + "' is not numeric");
          }
          if (used != cell.size() || !std::isfinite(v))
            fail(errc::type_mismatch, "row " + std::to_string(i) + ", column '" + schema[j].name +
                                          "': '" + cell + "' is not numeric");
          if (schema[j].kind == FeatureKind::Integer && v != std::floor(v))
            fail(errc::type_mismatch, "row " + std::to_string(i) + ", column '" + schema[j].name +
                                          "': '" + cell + "' is not an integer");
          col.values.push_back(v);
        }
        break;
      }
      case FeatureKind::Nominal: {
        std::set<std::string> seen;
        for (std::size_t i = 0; i < rows.size(); ++i) seen.insert(rows[i][j]);
        col.levels.assign(seen.begin(), seen.end());
        std::map<std::string, double> ix;
        for (std::size_t k = 0; k < col.levels.size(); ++k) ix[col.levels[k]] = static_cast<double>(k);
        for (std::size_t i = 0; i < rows.size(); ++i) col.values.push_back(ix.at(rows[i][j]));
        break;
      }
      case FeatureKind::Ordered: {
        std::vector<std::string> raw;
        raw.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) raw.push_back(rows[i][j]);
        std::set<std::string> distinct(raw.begin(), raw.end());
        if (distinct.size() == 1) {
          // constant column; kept degenerate so the pipeline can drop it with a warning
          const std::string& only = *distinct.begin();
          if (std::find(schema[j].ordered_levels.begin(), schema[j].ordered_levels.end(), only) ==
              schema[j].ordered_levels.end())
            fail(errc::unknown_level, "level '" + only + "' not in ordered_levels");
          col.values.assign(rows.size(), 0.0);
          col.levels = {only};
          break;
        }
        OrderedRecode rc = recode_ordered(raw, schema[j].ordered_levels);
        col.values = std::move(rc.codes);
        col.levels = std::move(rc.span);
        break;
      }
    }
  }
  return ds;
}

// Drops features observed with a single distinct value; they carry no
// geometry and every proxy term on them is degenerate.
inline Dataset drop_single_valued_features(const Dataset& ds, std::vector<std::string>* dropped,
                                           std::vector<std::string>* warnings) {
  Dataset out;
  out.n = ds.n;
  for (std::size_t j = 0; j < ds.p(); ++j) {
    std::set<double> uniq(ds.columns[j].values.begin(), ds.columns[j].values.end());
    if (uniq.size() < 2) {
      if (dropped) dropped->push_back(ds.schema[j].name);
      if (warnings)
        warnings->push_back("feature '" + ds.schema[j].name + "' has a single observed value and was dropped");
      continue;
    }
    out.schema.push_back(ds.schema[j]);
    out.columns.push_back(ds.columns[j]);
  }
  return out;
}

}  // namespace denslice
