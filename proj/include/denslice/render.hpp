#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "denslice/error.hpp"
#include "denslice/feature.hpp"
#include "denslice/partition.hpp"
#include "denslice/slice.hpp"

namespace denslice {

namespace detail {

inline std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string fmt_tick(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

// 2-D projection of the partition: one rectangle per slice over the two
// selected features (a slice not constraining a feature spans its full
// axis). Empty slices are red with opacity rising with volume rank,
// non-empty slices green with opacity rising with density rank; the data
// points are overlaid.
inline std::string render_svg(const PartitionModel& model, const Dataset& ds,
                              const std::string& x_feature, const std::string& y_feature) {
  const int xj_model = [&] {
    for (std::size_t k = 0; k < model.schema.size(); ++k)
      if (model.schema[k].name == x_feature) return static_cast<int>(k);
    return -1;
  }();
  const int yj_model = [&] {
    for (std::size_t k = 0; k < model.schema.size(); ++k)
      if (model.schema[k].name == y_feature) return static_cast<int>(k);
    return -1;
  }();
  if (xj_model < 0 || yj_model < 0)
    fail(errc::non_renderable_feature, "feature not in model: " +
                                           (xj_model < 0 ? x_feature : y_feature));
  if (xj_model == yj_model) fail(errc::non_renderable_feature, "x and y must be two different features");
  const Domain& dx = model.domains[static_cast<std::size_t>(xj_model)];
  const Domain& dy = model.domains[static_cast<std::size_t>(yj_model)];
  if (dx.kind == FeatureKind::Nominal || dy.kind == FeatureKind::Nominal)
    fail(errc::non_renderable_feature, "nominal features have no axis ordering");

  const Dataset aligned = project_onto_model(model, ds);
  const auto xj_data = static_cast<std::size_t>(xj_model);
  const auto yj_data = static_cast<std::size_t>(yj_model);

  constexpr double W = 860.0, H = 640.0;
  constexpr double ML = 70.0, MR = 20.0, MT = 20.0, MB = 55.0;
  const double plot_w = W - ML - MR, plot_h = H - MT - MB;
  auto sx = [&](double v) { return ML + (v - dx.lo) / (dx.hi - dx.lo) * plot_w; };
  auto sy = [&](double v) { return H - MB - (v - dy.lo) / (dy.hi - dy.lo) * plot_h; };

  // opacity by rank: empties by volume, non-empties by inverse mean density
  std::vector<std::size_t> empties, filled;
  for (std::size_t k = 0; k < model.slices.size(); ++k)
    (model.slices[k].is_empty ? empties : filled).push_back(k);
  auto rank_of = [](std::vector<std::size_t> ids, auto key) {
    std::sort(ids.begin(), ids.end(), key);
    return ids;
  };
  const std::vector<std::size_t> empty_rank =
      rank_of(empties, [&](std::size_t a, std::size_t b) {
        if (model.slices[a].volume != model.slices[b].volume)
          return model.slices[a].volume < model.slices[b].volume;
        return model.slices[a].id < model.slices[b].id;
      });
  const std::vector<std::size_t> filled_rank =
      rank_of(filled, [&](std::size_t a, std::size_t b) {
        const double da = model.slices[a].mean_density.value_or(0.0);
        const double db = model.slices[b].mean_density.value_or(0.0);
        if (da != db) return da > db;  // sparser first = lighter
        return model.slices[a].id < model.slices[b].id;
      });
  auto opacity = [](std::size_t pos, std::size_t count) {
    if (count <= 1) return 0.45;
    return 0.2 + 0.55 * static_cast<double>(pos) / static_cast<double>(count - 1);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fmt2(W) + "\" height=\"" +
         detail::fmt2(H) + "\" viewBox=\"0 0 " + detail::fmt2(W) + " " + detail::fmt2(H) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + detail::fmt2(W) + "\" height=\"" + detail::fmt2(H) +
         "\" fill=\"white\"/>\n";

  for (std::size_t k = 0; k < model.slices.size(); ++k) {
    const Slice& s = model.slices[k];
    double x0 = dx.lo, x1 = dx.hi, y0 = dy.lo, y1 = dy.hi;
    for (const Subset& c : s.constraints) {
      if (c.feature == xj_model) {
        x0 = c.iv.lo;
        x1 = c.iv.hi;
      }
      if (c.feature == yj_model) {
        y0 = c.iv.lo;
        y1 = c.iv.hi;
      }
    }
    std::string fill;
    double op = 0.45;
    if (s.is_empty) {
      fill = "#c62828";
      const auto pos = static_cast<std::size_t>(
          std::find(empty_rank.begin(), empty_rank.end(), k) - empty_rank.begin());
      op = opacity(pos, empty_rank.size());
    } else {
      fill = "#2e7d32";
      const auto pos = static_cast<std::size_t>(
          std::find(filled_rank.begin(), filled_rank.end(), k) - filled_rank.begin());
      op = opacity(pos, filled_rank.size());
    }
    svg += "<rect x=\"" + detail::fmt2(sx(x0)) + "\" y=\"" + detail::fmt2(sy(y1)) + "\" width=\"" +
           detail::fmt2(sx(x1) - sx(x0)) + "\" height=\"" + detail::fmt2(sy(y0) - sy(y1)) +
           "\" fill=\"" + fill + "\" fill-opacity=\"" + detail::fmt2(op) +
           "\" stroke=\"#333333\" stroke-width=\"0.8\"/>\n";
  }

  for (std::size_t i = 0; i < aligned.n; ++i) {
    const double vx = aligned.num(xj_data, i);
    const double vy = aligned.num(yj_data, i);
    if (!(vx >= dx.lo && vx <= dx.hi && vy >= dy.lo && vy <= dy.hi)) continue;
    svg += "<circle cx=\"" + detail::fmt2(sx(vx)) + "\" cy=\"" + detail::fmt2(sy(vy)) +
           "\" r=\"2.4\" fill=\"#111111\" fill-opacity=\"0.75\"/>\n";
  }

  // axes with domain bounds
  svg += "<line x1=\"" + detail::fmt2(ML) + "\" y1=\"" + detail::fmt2(H - MB) + "\" x2=\"" +
         detail::fmt2(W - MR) + "\" y2=\"" + detail::fmt2(H - MB) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"" + detail::fmt2(ML) + "\" y1=\"" + detail::fmt2(MT) + "\" x2=\"" +
         detail::fmt2(ML) + "\" y2=\"" + detail::fmt2(H - MB) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "<text x=\"" + detail::fmt2(ML) + "\" y=\"" + detail::fmt2(H - MB + 18.0) +
         "\" font-size=\"12\" text-anchor=\"middle\">" + detail::fmt_tick(dx.lo) + "</text>\n";
  svg += "<text x=\"" + detail::fmt2(W - MR) + "\" y=\"" + detail::fmt2(H - MB + 18.0) +
         "\" font-size=\"12\" text-anchor=\"middle\">" + detail::fmt_tick(dx.hi) + "</text>\n";
  svg += "<text x=\"" + detail::fmt2((ML + W - MR) / 2.0) + "\" y=\"" + detail::fmt2(H - MB + 38.0) +
         "\" font-size=\"14\" text-anchor=\"middle\">" + detail::xml_escape(x_feature) + "</text>\n";
  svg += "<text x=\"" + detail::fmt2(ML - 8.0) + "\" y=\"" + detail::fmt2(H - MB) +
         "\" font-size=\"12\" text-anchor=\"end\">" + detail::fmt_tick(dy.lo) + "</text>\n";
  svg += "<text x=\"" + detail::fmt2(ML - 8.0) + "\" y=\"" + detail::fmt2(MT + 10.0) +
         "\" font-size=\"12\" text-anchor=\"end\">" + detail::fmt_tick(dy.hi) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + detail::fmt2((MT + H - MB) / 2.0) +
         "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         detail::fmt2((MT + H - MB) / 2.0) + ")\">" + detail::xml_escape(y_feature) + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace denslice
