#pragma once

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "denslice/csv.hpp"
#include "denslice/error.hpp"
#include "denslice/io.hpp"
#include "denslice/partition.hpp"
#include "denslice/positivity.hpp"
#include "denslice/render.hpp"
#include "denslice/uniformity.hpp"

namespace denslice {

// Exit codes: 0 success, 1 data/model errors, 2 usage errors.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"density-based hyper-rectangular partitioning of tabular data"};
  app.require_subcommand(1);

  std::string data_path, schema_path, out_path, model_path;
  PartitionConfig cfg;
  std::string proxy_name = "gower-knn";
  std::uint64_t seed = 0;

  auto add_partition_flags = [&](CLI::App* sub) {
    sub->add_option("--data", data_path, "dataset CSV")->required();
    sub->add_option("--schema", schema_path, "schema JSON")->required();
    sub->add_option("--min-l", cfg.min_l, "minimum carved gap length")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--p-star", cfg.p_star, "maximum slice dimension")->check(CLI::PositiveNumber);
    sub->add_option("--min-support-frac", cfg.min_slice_size_frac, "leaf support floor as a fraction of n")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--epsilon", cfg.epsilon, "length adjustment for real features")
        ->check(CLI::Range(1e-12, 0.999999));
    sub->add_option("--proxy", proxy_name, "density proxy")
        ->check(CLI::IsMember({"gower-knn", "iforest"}));
    sub->add_option("--knn-m", cfg.proxy.knn_m, "neighbor index for the core distance (0: auto)");
    sub->add_option("--trees", cfg.proxy.trees, "isolation forest tree count");
    sub->add_option("--subsample", cfg.proxy.subsample, "isolation forest subsample size");
    sub->add_option("--trim", cfg.trim_fraction, "outlier fraction trimmed before partitioning")
        ->check(CLI::Range(0.0, 0.999999));
    sub->add_option("--min-mse-frac", cfg.min_mse_decrease_frac,
                    "minimum split MSE decrease as a fraction of Var(y)")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--seed", seed, "random seed");
  };

  CLI::App* partition = app.add_subcommand("partition", "fit a density partition and write it as JSON");
  add_partition_flags(partition);
  partition->add_option("--out", out_path, "output partition JSON")->required();

  CLI::App* metrics = app.add_subcommand("metrics", "uniformity metrics of a dataset under a model");
  metrics->add_option("--model", model_path, "partition JSON")->required();
  metrics->add_option("--data", data_path, "dataset CSV")->required();
  metrics->add_option("--schema", schema_path, "schema JSON")->required();
  metrics->add_option("--out", out_path, "output metrics JSON (default: stdout)");

  std::string treatment;
  double sparsity_quantile = 0.25;
  double imbalance_ratio = 5.0;
  CLI::App* screen = app.add_subcommand("screen-positivity",
                                        "propose positivity-violating slices under a treatment feature");
  add_partition_flags(screen);
  screen->add_option("--treatment", treatment, "treatment feature name")->required();
  screen->add_option("--sparsity-quantile", sparsity_quantile, "sparsest fraction of slices per arm")
      ->check(CLI::Range(1e-9, 0.999999999));
  screen->add_option("--imbalance-ratio", imbalance_ratio, "arm support ratio that flags a slice")
      ->check(CLI::Range(1.000000001, 1e18));
  screen->add_option("--out", out_path, "output candidates JSON")->required();

  std::string x_feature, y_feature;
  CLI::App* render = app.add_subcommand("render", "render a 2-D projection of a model as SVG");
  render->add_option("--model", model_path, "partition JSON")->required();
  render->add_option("--data", data_path, "dataset CSV")->required();
  render->add_option("--schema", schema_path, "schema JSON")->required();
  render->add_option("--x", x_feature, "x-axis feature")->required();
  render->add_option("--y", y_feature, "y-axis feature")->required();
  render->add_option("--out", out_path, "output SVG")->required();

  std::vector<const char*> argv;
  argv.push_back("denslice");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }

  try {
    if (partition->parsed() || screen->parsed()) {
      cfg.proxy.method = proxy_name == "iforest" ? ProxyMethod::IsolationForest : ProxyMethod::GowerKnn;
      cfg.seed = seed;
    }
    if (partition->parsed()) {
      const Dataset ds = load_dataset(data_path, schema_path);
      PartitionModel model = build_partition(ds, cfg);
      for (const auto& wmsg : model.warnings) err << "warning: " << wmsg << "\n";
      write_file(out_path, serialize_partition(model));
      out << "wrote " << out_path << " (" << model.slices.size() << " slices)\n";
      return 0;
    }
    if (metrics->parsed()) {
      const PartitionModel model = parse_partition(read_file(model_path));
      const Dataset ds = load_dataset(data_path, schema_path);
      const UniformityReport rep = uniformity_statistic(model, ds);
      if (rep.n_outside > 0)
        err << "warning: " << rep.n_outside << " rows fall outside the model's slices\n";
      const std::string json = serialize_metrics(model, rep);
      if (out_path.empty())
        out << json;
      else {
        write_file(out_path, json);
        out << "wrote " << out_path << "\n";
      }
      return 0;
    }
    if (screen->parsed()) {
      const Dataset ds = load_dataset(data_path, schema_path);
      const PositivityScreen result =
          screen_positivity(ds, treatment, cfg, sparsity_quantile, imbalance_ratio);
      const PartitionModel& first = result.models.front().second;
      write_file(out_path,
                 serialize_candidates(result, first.schema, first.domains, sparsity_quantile,
                                      imbalance_ratio));
      out << candidates_table(result, first.schema, first.domains);
      return 0;
    }
    if (render->parsed()) {
      const PartitionModel model = parse_partition(read_file(model_path));
      const Dataset ds = load_dataset(data_path, schema_path);
      std::string svg;
      try {
        svg = render_svg(model, ds, x_feature, y_feature);
      } catch (const error& e) {
        if (e.code() == errc::non_renderable_feature) {
          err << e.what() << "\n";
          return 2;
        }
        throw;
      }
      write_file(out_path, svg);
      out << "wrote " << out_path << "\n";
      return 0;
    }
  } catch (const error& e) {
    err << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace denslice
