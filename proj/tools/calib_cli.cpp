// Copyright 2026 The mlcalib Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mlcalib/cloud_io.hpp"
#include "mlcalib/config.hpp"
#include "mlcalib/metrics.hpp"
#include "mlcalib/noise_filter.hpp"
#include "mlcalib/pipeline.hpp"
#include "mlcalib/report.hpp"

namespace fs = std::filesystem;
using namespace mlcalib;

namespace {

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_config(path);
}

void print_summary(const RunReport& r) {
  std::printf("variant            %s\n", to_string(r.variant).c_str());
  std::printf("iterations         %d (%s)\n", r.iterations, r.convergence_reason.c_str());
  std::printf("metric error       %.6f -> %.6f m\n", r.metric_error_before, r.metric_error_after);
  if (r.initial_errors && r.final_errors) {
    std::printf("translation error  %.6f -> %.6f m\n", r.initial_errors->mean_translation_m,
                r.final_errors->mean_translation_m);
    std::printf("rotation error     %.4f -> %.4f deg\n", r.initial_errors->mean_rotation_deg,
                r.final_errors->mean_rotation_deg);
  }
  if (r.filter_score) {
    std::printf("filter P/R/F       %.3f / %.3f / %.3f\n", r.filter_score->precision,
                r.filter_score->recall, r.filter_score->f_score);
  }
  std::printf("wall clock         %.2f s\n", r.wall_clock_s);
}

int cmd_simulate(const std::string& config_path, const fs::path& out,
                 std::optional<std::uint64_t> seed) {
  RunConfig config = config_or_default(config_path);
  if (seed) config.set_seed(*seed);
  const Dataset data = simulate_dataset(config.simulation);
  save_dataset(data, out);
  std::ofstream(out / "config.json") << dump_config(config);
  std::printf("wrote %zu sensors x %zu timestamps to %s\n", data.num_sensors(),
              data.num_timestamps(), out.string().c_str());
  return 0;
}

int cmd_calibrate(const fs::path& dataset_dir, const std::string& config_path,
                  const fs::path& out, const std::string& variant) {
  RunConfig config = config_or_default(config_path);
  if (!variant.empty()) config.variant = variant_from_string(variant);
  const Dataset data = load_dataset(dataset_dir);
  const RunReport report = run_pipeline(data, config.variant, config.pipeline);
  emit_report(report, out);
  print_summary(report);
  return 0;
}

int cmd_run(const std::string& config_path, const fs::path& out, const std::string& variant,
            std::optional<std::uint64_t> seed) {
  RunConfig config = load_config(config_path);
  if (!variant.empty()) config.variant = variant_from_string(variant);
  if (seed) config.set_seed(*seed);
  const Dataset data = simulate_dataset(config.simulation);
  const RunReport report = run_pipeline(data, config.variant, config.pipeline);
  emit_report(report, out);
  std::ofstream(out / "config.json") << dump_config(config);
  print_summary(report);
  return 0;
}

int cmd_filter_bench(const std::vector<std::string>& files, int k, double cs, double cr) {
  std::vector<FilterScore> sor, dsor, pattern;
  FilterParams params;
  params.k = k;
  params.std_multiplier = cs;
  params.range_multiplier = cr;
  for (const auto& f : files) {
    const PointCloud cloud = load_cloud(f);
    if (!cloud.labels) throw Error(f + ": cloud has no labels");
    auto score = [&](const FilterReport& r) {
      std::vector<PointLabel> predicted(cloud.size(), PointLabel::kSurface);
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (r.removed_mask[i]) predicted[i] = PointLabel::kNoise;
      }
      return filter_metrics(predicted, *cloud.labels);
    };
    sor.push_back(score(sor_filter(cloud, k, cs)));
    dsor.push_back(score(dsor_filter(cloud, k, cs, cr)));
    pattern.push_back(score(pattern_filter(cloud, params)));
  }
  std::printf("method\tprecision\trecall\tf_score\n");
  const std::pair<const char*, const std::vector<FilterScore>*> rows[] = {
      {"sor", &sor}, {"dsor", &dsor}, {"pattern", &pattern}};
  for (const auto& [name, scores] : rows) {
    const FilterScore s = combine_scores(*scores);
    std::printf("%s\t%.4f\t%.4f\t%.4f\n", name, s.precision, s.recall, s.f_score);
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const fs::path& out, int seeds,
              std::uint64_t first_seed) {
  const RunConfig base = config_or_default(config_path);
  fs::create_directories(out);
  std::ofstream table(out / "summary.tsv");
  table << "seed\tvariant\tinitial_translation_m\tfinal_translation_m\tfinal_rotation_deg"
           "\tmetric_before\tmetric_after\titerations\n";
  const PipelineVariant variants[] = {PipelineVariant::kProposed,
                                      PipelineVariant::kProposedWithoutRoughRefinement,
                                      PipelineVariant::kEntireCloud};
  std::vector<double> finals[3];
  for (int s = 0; s < seeds; ++s) {
    RunConfig config = base;
    const std::uint64_t seed = first_seed + static_cast<std::uint64_t>(s);
    config.set_seed(seed);
    const Dataset data = simulate_dataset(config.simulation);
    const Preprocessed pre = preprocess(data, config.pipeline);
    for (int v = 0; v < 3; ++v) {
      const RunReport r = run_variant(data, pre, variants[v], config.pipeline);
      emit_report(r, out / ("seed_" + std::to_string(seed)) / to_string(variants[v]));
      finals[v].push_back(r.final_errors->mean_translation_m);
      table << seed << '\t' << to_string(variants[v]) << '\t'
            << r.initial_errors->mean_translation_m << '\t' << r.final_errors->mean_translation_m
            << '\t' << r.final_errors->mean_rotation_deg << '\t' << r.metric_error_before << '\t'
            << r.metric_error_after << '\t' << r.iterations << '\n';
      std::printf("seed %llu %-34s %.5f m\n", static_cast<unsigned long long>(seed),
                  to_string(variants[v]).c_str(), r.final_errors->mean_translation_m);
    }
  }
  for (int v = 0; v < 3; ++v) {
    std::printf("median %-34s %.5f m\n", to_string(variants[v]).c_str(), median(finals[v]));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Targetless extrinsic calibration for multiple LiDARs"};
  app.require_subcommand(1);

  std::string config_path, out_dir, variant, dataset_dir;
  std::optional<std::uint64_t> seed;

  auto* simulate = app.add_subcommand("simulate", "Render a synthetic dataset");
  simulate->add_option("config", config_path, "Run configuration (JSON)");
  simulate->add_option("--out", out_dir, "Dataset directory")->required();
  simulate->add_option("--seed", seed, "Scene, render and perturbation seed");

  auto* calibrate = app.add_subcommand("calibrate", "Calibrate a dataset directory");
  calibrate->add_option("dataset", dataset_dir, "Dataset directory")->required();
  calibrate->add_option("--config", config_path, "Run configuration (JSON)");
  calibrate->add_option("--out", out_dir, "Report directory")->required();
  calibrate->add_option("--variant", variant, "proposed | proposed_without_rough_refinement | entire_cloud");

  auto* run = app.add_subcommand("run", "Simulate and calibrate in one go");
  run->add_option("config", config_path, "Run configuration (JSON)")->required();
  run->add_option("--out", out_dir, "Report directory")->required();
  run->add_option("--variant", variant, "Pipeline variant override");
  run->add_option("--seed", seed, "Scene, render and perturbation seed");

  std::vector<std::string> clouds;
  int k = 20;
  double cs = 0.01, cr = 3.0;
  auto* bench = app.add_subcommand("filter-bench", "Score SOR, DSOR and the pattern filter");
  bench->add_option("clouds", clouds, "Labeled cloud files")->required();
  bench->add_option("-k", k, "Neighbors");
  bench->add_option("--cs", cs, "Standard-deviation multiplier");
  bench->add_option("--cr", cr, "Range multiplier (1/m)");

  int seeds = 10;
  std::uint64_t first_seed = 1;
  auto* sweep = app.add_subcommand("sweep", "Run all variants over several seeds");
  sweep->add_option("config", config_path, "Run configuration (JSON)");
  sweep->add_option("--out", out_dir, "Output directory")->required();
  sweep->add_option("--seeds", seeds, "Number of seeds")->check(CLI::PositiveNumber);
  sweep->add_option("--first-seed", first_seed, "First seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return cmd_simulate(config_path, out_dir, seed);
    if (*calibrate) return cmd_calibrate(dataset_dir, config_path, out_dir, variant);
    if (*run) return cmd_run(config_path, out_dir, variant, seed);
    if (*bench) return cmd_filter_bench(clouds, k, cs, cr);
    if (*sweep) return cmd_sweep(config_path, out_dir, seeds, first_seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
