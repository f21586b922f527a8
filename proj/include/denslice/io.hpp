#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "denslice/csv.hpp"
#include "denslice/error.hpp"
#include "denslice/feature.hpp"
#include "denslice/partition.hpp"
#include "denslice/positivity.hpp"
#include "denslice/uniformity.hpp"

namespace denslice {

inline constexpr int kPartitionFormatVersion = 1;

// Minimal JSON writer with a fixed field order and floats at 17 significant
// digits, so identical models serialize to identical bytes and round-trip
// exactly. Parsing goes through nlohmann::json.
class JsonWriter {
 public:
  std::string take() { return std::move(out_); }

  void begin_object() { open('{'); }
  void end_object() { close('}'); }
  void begin_array() { open('['); }
  void end_array() { close(']'); }

  void key(const std::string& k) {
    comma();
    string_literal(k);
    out_ += ':';
    pending_value_ = true;
  }

  void value(const std::string& s) {
    comma();
    string_literal(s);
  }
  void value(const char* s) { value(std::string(s)); }
  void value(double v) {
    comma();
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out_ += buf;
  }
  void value(std::size_t v) {
    comma();
    out_ += std::to_string(v);
  }
  void value(int v) {
    comma();
    out_ += std::to_string(v);
  }
  void value(bool v) {
    comma();
    out_ += v ? "true" : "false";
  }

 private:
  void open(char c) {
    comma();
    out_ += c;
    fresh_ = true;
  }
  void close(char c) {
    out_ += c;
    fresh_ = false;
  }
  void comma() {
    if (pending_value_) {
      pending_value_ = false;
      return;
    }
    if (!fresh_ && !out_.empty()) out_ += ',';
    fresh_ = false;
  }
  void string_literal(const std::string& s) {
    out_ += '"';
    for (char c : s) {
      switch (c) {
        case '"': out_ += "\\\""; break;
        case '\\': out_ += "\\\\"; break;
        case '\n': out_ += "\\n"; break;
        case '\r': out_ += "\\r"; break;
        case '\t': out_ += "\\t"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            out_ += buf;
          } else {
            out_ += c;
          }
      }
    }
    out_ += '"';
  }

  std::string out_;
  bool fresh_ = false;
  bool pending_value_ = false;
};

// --- schema file -----------------------------------------------------------

inline std::vector<FeatureSchema> load_schema_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(errc::parse_error, std::string("schema JSON: ") + e.what());
  }
  if (!j.is_array()) fail(errc::parse_error, "schema JSON must be an array");
  std::vector<FeatureSchema> schema;
  for (const auto& item : j) {
    FeatureSchema f;
    if (!item.is_object() || !item.contains("name") || !item.contains("kind"))
      fail(errc::parse_error, "schema entries need 'name' and 'kind'");
    f.name = item.at("name").get<std::string>();
    const auto kind = kind_from_name(item.at("kind").get<std::string>());
    if (!kind) fail(errc::parse_error, "unknown kind '" + item.at("kind").get<std::string>() + "'");
    f.kind = *kind;
    if (item.contains("ordered_levels"))
      f.ordered_levels = item.at("ordered_levels").get<std::vector<std::string>>();
    schema.push_back(std::move(f));
  }
  validate_schema(schema);
  return schema;
}

inline Dataset load_dataset(const std::string& csv_path, const std::string& schema_path) {
  const CsvTable table = read_csv_file(csv_path);
  const std::vector<FeatureSchema> schema = load_schema_json(read_file(schema_path));
  return validate_dataset(table.header, table.rows, schema);
}

// --- partition file --------------------------------------------------------

namespace detail {

inline void write_config(JsonWriter& w, const PartitionConfig& c) {
  w.begin_object();
  w.key("p_star");
  w.value(c.p_star);
  w.key("min_l");
  w.value(c.min_l);
  w.key("min_slice_size_frac");
  w.value(c.min_slice_size_frac);
  w.key("epsilon");
  w.value(c.epsilon);
  w.key("min_mse_decrease_frac");
  w.value(c.min_mse_decrease_frac);
  w.key("trim_fraction");
  w.value(c.trim_fraction);
  w.key("proxy");
  w.begin_object();
  w.key("method");
  w.value(c.proxy.method == ProxyMethod::GowerKnn ? "gower-knn" : "iforest");
  if (c.proxy.method == ProxyMethod::GowerKnn) {
    w.key("knn_m");
    w.value(c.proxy.knn_m);
  } else {
    w.key("trees");
    w.value(c.proxy.trees);
    w.key("subsample");
    w.value(c.proxy.subsample);
  }
  w.end_object();
  w.key("seed");
  w.value(static_cast<std::size_t>(c.seed));
  w.end_object();
}

inline void write_subset(JsonWriter& w, const Subset& c, const std::vector<FeatureSchema>& schema) {
  w.begin_object();
  w.key("feature");
  w.value(schema[static_cast<std::size_t>(c.feature)].name);
  if (c.kind == FeatureKind::Nominal) {
    w.key("levels");
    w.begin_array();
    for (const auto& lv : c.levels) w.value(lv);
    w.end_array();
  } else {
    w.key("interval");
    w.begin_object();
    w.key("lo");
    w.value(c.iv.lo);
    w.key("hi");
    w.value(c.iv.hi);
    w.key("lo_open");
    w.value(c.iv.lo_open);
    w.key("hi_open");
    w.value(c.iv.hi_open);
    w.end_object();
  }
  w.end_object();
}

}  // namespace detail

inline std::string serialize_partition(const PartitionModel& m) {
  JsonWriter w;
  w.begin_object();
  w.key("format_version");
  w.value(kPartitionFormatVersion);
  w.key("config");
  detail::write_config(w, m.config);
  if (m.conditioning_feature) {
    w.key("conditioning");
    w.begin_object();
    w.key("feature");
    w.value(*m.conditioning_feature);
    w.key("level");
    w.value(*m.conditioning_level);
    w.end_object();
  }
  w.key("domains");
  w.begin_array();
  for (const Domain& d : m.domains) {
    w.begin_object();
    w.key("name");
    w.value(d.name);
    w.key("kind");
    w.value(kind_name(d.kind));
    if (d.kind == FeatureKind::Nominal) {
      w.key("levels");
      w.begin_array();
      for (const auto& lv : d.levels) w.value(lv);
      w.end_array();
    } else {
      w.key("lo");
      w.value(d.lo);
      w.key("hi");
      w.value(d.hi);
      if (d.kind == FeatureKind::Ordered) {
        w.key("levels");
        w.begin_array();
        for (const auto& lv : d.levels) w.value(lv);
        w.end_array();
      }
    }
    w.key("size");
    w.value(d.size);
    w.key("n_unique");
    w.value(d.n_unique);
    w.end_object();
  }
  w.end_array();
  w.key("dropped_features");
  w.begin_array();
  for (const auto& f : m.dropped_features) w.value(f);
  w.end_array();
  w.key("trimmed_rows");
  w.begin_array();
  for (std::size_t i : m.trimmed_rows) w.value(i);
  w.end_array();
  w.key("slices");
  w.begin_array();
  for (const Slice& s : m.slices) {
    w.begin_object();
    w.key("id");
    w.value(s.id);
    w.key("is_empty");
    w.value(s.is_empty);
    w.key("support");
    w.value(s.support);
    if (s.mean_density) {
      w.key("mean_density");
      w.value(*s.mean_density);
    }
    w.key("volume");
    w.value(s.volume);
    w.key("constraints");
    w.begin_array();
    for (const Subset& c : s.constraints) detail::write_subset(w, c, m.schema);
    w.end_array();
    w.end_object();
  }
  w.end_array();
  w.end_object();
  std::string out = w.take();
  out += '\n';
  return out;
}

inline PartitionModel parse_partition(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(errc::parse_error, std::string("partition JSON: ") + e.what());
  }
  PartitionModel m;
  try {
    if (j.at("format_version").get<int>() != kPartitionFormatVersion)
      fail(errc::parse_error, "unsupported partition format version");
    const auto& jc = j.at("config");
    m.config.p_star = jc.at("p_star").get<std::size_t>();
    m.config.min_l = jc.at("min_l").get<double>();
    m.config.min_slice_size_frac = jc.at("min_slice_size_frac").get<double>();
    m.config.epsilon = jc.at("epsilon").get<double>();
    m.config.min_mse_decrease_frac = jc.at("min_mse_decrease_frac").get<double>();
    m.config.trim_fraction = jc.at("trim_fraction").get<double>();
    const auto& jp = jc.at("proxy");
    if (jp.at("method").get<std::string>() == "gower-knn") {
      m.config.proxy.method = ProxyMethod::GowerKnn;
      m.config.proxy.knn_m = jp.at("knn_m").get<std::size_t>();
    } else {
      m.config.proxy.method = ProxyMethod::IsolationForest;
      m.config.proxy.trees = jp.at("trees").get<std::size_t>();
      m.config.proxy.subsample = jp.at("subsample").get<std::size_t>();
    }
    m.config.seed = jc.at("seed").get<std::uint64_t>();
    if (j.contains("conditioning")) {
      m.conditioning_feature = j.at("conditioning").at("feature").get<std::string>();
      m.conditioning_level = j.at("conditioning").at("level").get<std::string>();
    }
    for (const auto& jd : j.at("domains")) {
      Domain d;
      d.name = jd.at("name").get<std::string>();
      const auto kind = kind_from_name(jd.at("kind").get<std::string>());
      if (!kind) fail(errc::parse_error, "unknown domain kind");
      d.kind = *kind;
      if (d.kind != FeatureKind::Nominal) {
        d.lo = jd.at("lo").get<double>();
        d.hi = jd.at("hi").get<double>();
      }
      if (jd.contains("levels")) d.levels = jd.at("levels").get<std::vector<std::string>>();
      d.size = jd.at("size").get<double>();
      d.n_unique = jd.at("n_unique").get<std::size_t>();
      m.domains.push_back(std::move(d));

      FeatureSchema f;
      f.name = m.domains.back().name;
      f.kind = m.domains.back().kind;
      m.schema.push_back(std::move(f));
    }
    m.dropped_features = j.at("dropped_features").get<std::vector<std::string>>();
    m.trimmed_rows = j.at("trimmed_rows").get<std::vector<std::size_t>>();
    for (const auto& js : j.at("slices")) {
      Slice s;
      s.id = js.at("id").get<int>();
      s.is_empty = js.at("is_empty").get<bool>();
      s.support = js.at("support").get<std::size_t>();
      if (js.contains("mean_density")) s.mean_density = js.at("mean_density").get<double>();
      s.volume = js.at("volume").get<double>();
      for (const auto& jsub : js.at("constraints")) {
        Subset c;
        const std::string fname = jsub.at("feature").get<std::string>();
        c.feature = -1;
        for (std::size_t k = 0; k < m.schema.size(); ++k)
          if (m.schema[k].name == fname) c.feature = static_cast<int>(k);
        if (c.feature < 0) fail(errc::parse_error, "constraint references unknown feature '" + fname + "'");
        c.kind = m.schema[static_cast<std::size_t>(c.feature)].kind;
        if (jsub.contains("levels")) {
          c.levels = jsub.at("levels").get<std::vector<std::string>>();
        } else {
          const auto& ji = jsub.at("interval");
          c.iv.lo = ji.at("lo").get<double>();
          c.iv.hi = ji.at("hi").get<double>();
          c.iv.lo_open = ji.at("lo_open").get<bool>();
          c.iv.hi_open = ji.at("hi_open").get<bool>();
        }
        s.constraints.push_back(std::move(c));
      }
      m.slices.push_back(std::move(s));
    }
  } catch (const error&) {
    throw;
  } catch (const std::exception& e) {
    fail(errc::parse_error, std::string("partition JSON: ") + e.what());
  }
  return m;
}

// --- metrics file ----------------------------------------------------------

inline std::string serialize_metrics(const PartitionModel& model, const UniformityReport& rep) {
  JsonWriter w;
  w.begin_object();
  w.key("n_used");
  w.value(rep.n_used);
  w.key("n_outside");
  w.value(rep.n_outside);
  w.key("slice_count");
  w.value(model.slices.size());
  w.key("chi");
  w.value(rep.chi);
  w.key("df");
  w.value(rep.df);
  w.key("normalized");
  w.value(rep.normalized);
  w.key("degenerate_single_slice");
  w.value(rep.degenerate_single_slice);
  w.key("p_value");
  w.value(rep.p_value);
  w.key("per_slice");
  w.begin_array();
  for (std::size_t k = 0; k < model.slices.size(); ++k) {
    const Slice& s = model.slices[k];
    w.begin_object();
    w.key("id");
    w.value(s.id);
    w.key("is_empty");
    w.value(s.is_empty);
    w.key("phi");
    w.value(rep.phi[k]);
    w.key("volume");
    w.value(rep.volumes[k]);
    if (s.mean_density) {
      w.key("mean_density");
      w.value(*s.mean_density);
    }
    w.end_object();
  }
  w.end_array();
  w.end_object();
  std::string out = w.take();
  out += '\n';
  return out;
}

// --- positivity candidates -------------------------------------------------

inline std::string describe_subset(const Subset& c, const std::vector<FeatureSchema>& schema,
                                   const std::vector<Domain>& domains) {
  const std::string& name = schema[static_cast<std::size_t>(c.feature)].name;
  if (c.kind == FeatureKind::Nominal) {
    std::string s = name + " in {";
    for (std::size_t i = 0; i < c.levels.size(); ++i) {
      if (i) s += ", ";
      s += c.levels[i];
    }
    return s + "}";
  }
  char buf[64];
  if (c.kind == FeatureKind::Ordered) {
    const Domain& d = domains[static_cast<std::size_t>(c.feature)];
    const auto lo = static_cast<std::size_t>(std::max(0.0, std::ceil(c.iv.lo)));
    const auto hi = static_cast<std::size_t>(std::min(static_cast<double>(d.levels.size()) - 1.0,
                                                      std::floor(c.iv.hi)));
    if (lo == hi) return name + " = " + d.levels[lo];
    return name + " in [" + d.levels[lo] + " .. " + d.levels[hi] + "]";
  }
  std::string s;
  std::snprintf(buf, sizeof(buf), "%.17g", c.iv.lo);
  s += buf;
  s += c.iv.lo_open ? " < " : " <= ";
  s += name;
  s += c.iv.hi_open ? " < " : " <= ";
  std::snprintf(buf, sizeof(buf), "%.17g", c.iv.hi);
  s += buf;
  return s;
}

inline std::string serialize_candidates(const PositivityScreen& screen,
                                        const std::vector<FeatureSchema>& schema,
                                        const std::vector<Domain>& domains, double sparsity_quantile,
                                        double imbalance_ratio) {
  JsonWriter w;
  w.begin_object();
  w.key("sparsity_quantile");
  w.value(sparsity_quantile);
  w.key("imbalance_ratio");
  w.value(imbalance_ratio);
  w.key("arms");
  w.begin_array();
  for (std::size_t a = 0; a < screen.arm_levels.size(); ++a) {
    w.begin_object();
    w.key("level");
    w.value(screen.arm_levels[a]);
    w.key("size");
    w.value(screen.arm_sizes[a]);
    w.end_object();
  }
  w.end_array();
  w.key("candidates");
  w.begin_array();
  for (const ViolationCandidate& c : screen.candidates) {
    w.begin_object();
    w.key("rules");
    w.begin_array();
    for (const Subset& sub : c.base.constraints) w.value(describe_subset(sub, schema, domains));
    w.end_array();
    w.key("origin_arm");
    w.value(c.origin_arm);
    if (c.sparsity_score) {
      w.key("sparsity_score");
      w.value(*c.sparsity_score);
    }
    w.key("arm_counts");
    w.begin_array();
    for (std::size_t v : c.arm_counts) w.value(v);
    w.end_array();
    w.key("arm_fractions");
    w.begin_array();
    for (double v : c.arm_fractions) w.value(v);
    w.end_array();
    w.key("size");
    std::size_t total = 0;
    for (std::size_t v : c.arm_counts) total += v;
    w.value(total);
    w.key("flagged");
    w.value(c.flagged);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  std::string out = w.take();
  out += '\n';
  return out;
}

// Aligned text table of the screened slices: rules, per-arm counts, size.
inline std::string candidates_table(const PositivityScreen& screen,
                                    const std::vector<FeatureSchema>& schema,
                                    const std::vector<Domain>& domains) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> head{"Feature Rules"};
  for (const auto& lv : screen.arm_levels) head.push_back("Arm " + lv);
  head.push_back("Size");
  head.push_back("Flagged");
  cells.push_back(head);
  for (const ViolationCandidate& c : screen.candidates) {
    std::string rules;
    if (c.base.constraints.empty()) rules = "(full space)";
    for (std::size_t i = 0; i < c.base.constraints.size(); ++i) {
      if (i) rules += "  &  ";
      rules += describe_subset(c.base.constraints[i], schema, domains);
    }
    std::vector<std::string> row{rules};
    std::size_t total = 0;
    for (std::size_t v : c.arm_counts) {
      row.push_back(std::to_string(v));
      total += v;
    }
    row.push_back(std::to_string(total));
    row.push_back(c.flagged ? "yes" : "no");
    cells.push_back(std::move(row));
  }
  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& row : cells)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out += row[i];
      if (i + 1 < row.size()) out.append(width[i] - row[i].size() + 2, ' ');
    }
    out += '\n';
  }
  return out;
}

}  // namespace denslice
