// densityclust: cluster 2D projections through a density map.
//
//   densityclust cluster --input points.csv --output clusters.json
//   densityclust render  --clusters clusters.json --output clusters.svg
//   densityclust label   --input points.csv --clusters clusters.json --output labels.json
//   densityclust sql     --clusters clusters.json --id 3 --x-col x --y-col y
//   densityclust bench   --sizes 250,500,1000 --repeats 5 --seed 42
//
// Exit codes: 0 success, 1 usage/config error, 2 I/O error, 3 data error,
// 4 cluster id not found.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "densityclust/densityclust.hpp"

namespace dc = densityclust;

namespace {

// Flag values as parsed; each is applied over the config only when given.
struct Flags {
  std::string config;
  std::string input, format, x_col, y_col, weight_col, text_col, output, density_output;
  std::uint32_t width = 0, height = 0;
  double bandwidth = 0, truncation_ratio = 0, merge_distance = 0, min_peak_density = 0, padding = 0;
  int connectivity = 8, palette = 10;
  std::uint64_t seed = 0;
  std::size_t top_k = 0;
  std::vector<double> bounds;
  bool pixel_space = false, merge_labels = false;
};

void add_run_flags(CLI::App* cmd, Flags& f, bool grid) {
  cmd->add_option("--config", f.config, "JSON config file; flags override its values");
  cmd->add_option("--input", f.input, "Points file (CSV with header, or JSON lines)");
  cmd->add_option("--format", f.format, "Input format: csv or jsonl (default: by file extension)");
  cmd->add_option("--x-col", f.x_col, "X column name (default x)");
  cmd->add_option("--y-col", f.y_col, "Y column name (default y)");
  cmd->add_option("--weight-col", f.weight_col, "Weight column name (default: 'weight' if present)");
  cmd->add_option("--text-col", f.text_col, "Text column name (default: 'text' if present)");
  cmd->add_option("--output", f.output, "Output path");
  if (!grid) return;
  cmd->add_option("--width", f.width, "Grid width in pixels (default 1000)");
  cmd->add_option("--height", f.height, "Grid height in pixels (default 1000)");
  cmd->add_option("--bandwidth", f.bandwidth, "Gaussian KDE bandwidth in pixels (default 1% of max side)");
  cmd->add_option("--truncation-ratio", f.truncation_ratio, "Keep pixels >= ratio * cluster peak (default 0.1)");
  cmd->add_option("--merge-distance", f.merge_distance, "Peak-to-boundary merge threshold in pixels (default 8)");
  cmd->add_option("--connectivity", f.connectivity, "Pixel connectivity: 4 or 8 (default 8)");
  cmd->add_option("--min-peak-density", f.min_peak_density, "Drop clusters whose peak is <= this (default 0)");
  cmd->add_option("--padding", f.padding, "Viewport padding as a fraction of the data span (default 0.05)");
  cmd->add_option("--bounds", f.bounds, "Fixed viewport x_min,x_max,y_min,y_max")->delimiter(',')->expected(4);
  cmd->add_option("--palette", f.palette, "Number of colors for adjacent-distinct coloring (default 10)");
  cmd->add_option("--density-output", f.density_output, "Also write the density map as a binary dump");
  cmd->add_option("--seed", f.seed, "Seed recorded for reproducible runs");
  cmd->add_flag("--pixel-space", f.pixel_space, "Write geometry in pixel coordinates instead of data units");
}

dc::RunConfig build_config(const CLI::App* cmd, const Flags& f) {
  dc::RunConfig cfg;
  if (!f.config.empty()) dc::apply_config_json(cfg, dc::Json::parse(dc::read_file(f.config), nullptr, true, true));
  auto given = [&](const char* name) { return cmd->get_option_no_throw(name) && cmd->count(name) > 0; };
  if (given("--input")) {
    cfg.input = f.input;
    if (!given("--format") && f.config.empty()) cfg.format = dc::guess_format(cfg.input);
  }
  if (given("--format")) cfg.format = dc::parse_format(f.format);
  if (given("--x-col")) cfg.columns.x = f.x_col;
  if (given("--y-col")) cfg.columns.y = f.y_col;
  if (given("--weight-col")) cfg.columns.weight = f.weight_col;
  if (given("--text-col")) cfg.columns.text = f.text_col;
  if (given("--output")) cfg.output = f.output;
  if (given("--width")) cfg.width = f.width;
  if (given("--height")) cfg.height = f.height;
  if (given("--bandwidth")) cfg.bandwidth_px = f.bandwidth;
  if (given("--truncation-ratio")) cfg.params.truncation_ratio = f.truncation_ratio;
  if (given("--merge-distance")) cfg.params.merge_distance_px = f.merge_distance;
  if (given("--connectivity")) cfg.params.connectivity = dc::parse_connectivity(f.connectivity);
  if (given("--min-peak-density")) cfg.params.min_peak_density = f.min_peak_density;
  if (given("--padding")) cfg.padding = f.padding;
  if (given("--bounds")) cfg.bounds = std::array<double, 4>{f.bounds[0], f.bounds[1], f.bounds[2], f.bounds[3]};
  if (given("--palette")) cfg.palette = f.palette;
  if (given("--density-output")) cfg.density_output = f.density_output;
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--top-k")) cfg.top_k = f.top_k;
  if (given("--pixel-space")) cfg.pixel_space = true;
  if (given("--merge")) cfg.merge_labels = true;
  return cfg;
}

int run(int argc, char** argv) {
  CLI::App app{"Density-map clustering for 2D embedding projections"};
  app.require_subcommand(1);
  Flags f;

  auto* cluster = app.add_subcommand("cluster", "Cluster a points file and write cluster JSON");
  add_run_flags(cluster, f, true);

  auto* render = app.add_subcommand("render", "Render cluster JSON as SVG");
  std::string clusters_path, density_path;
  render->add_option("--clusters", clusters_path, "Cluster JSON")->required();
  render->add_option("--output", f.output, "SVG output path")->required();
  render->add_option("--density", density_path, "Density dump to draw underneath");

  auto* label = app.add_subcommand("label", "Label clusters from a text column (c-TF-IDF)");
  add_run_flags(label, f, false);
  label->add_option("--clusters", clusters_path, "Cluster JSON")->required();
  label->add_option("--top-k", f.top_k, "Terms per label (default 5)");
  label->add_flag("--merge", f.merge_labels, "Write the cluster JSON with labels merged in");

  auto* sql = app.add_subcommand("sql", "Print the SQL WHERE predicate selecting one cluster");
  std::int64_t sql_id = -1;
  std::string sql_x = "x", sql_y = "y";
  sql->add_option("--clusters", clusters_path, "Cluster JSON")->required();
  sql->add_option("--id", sql_id, "Cluster id")->required();
  sql->add_option("--x-col", sql_x, "X column name");
  sql->add_option("--y-col", sql_y, "Y column name");

  auto* bench = app.add_subcommand("bench", "Time KDE and clustering on seeded synthetic mixtures");
  dc::BenchConfig bench_cfg;
  std::string bench_json_path;
  bench->add_option("--sizes", bench_cfg.sizes, "Grid sizes (>= 64)")->delimiter(',');
  bench->add_option("--repeats", bench_cfg.repeats, "Repeats per size");
  bench->add_option("--seed", bench_cfg.seed, "Seed");
  bench->add_option("--points-per-pixel", bench_cfg.points_per_pixel, "Synthetic points per grid pixel");
  bench->add_option("--json", bench_json_path, "Also write the timing table as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*cluster) {
      const auto summary = dc::run_cluster(build_config(cluster, f));
      if (summary.skipped_rows) std::cerr << "warning: skipped " << summary.skipped_rows << " malformed rows\n";
      std::cout << summary.line() << "\n";
    } else if (*render) {
      dc::run_render(clusters_path, f.output, density_path.empty() ? std::nullopt : std::optional(density_path));
    } else if (*label) {
      const auto labels = dc::run_label(build_config(label, f), clusters_path);
      std::cout << "labeled " << labels.size() << " clusters\n";
    } else if (*sql) {
      if (sql_id < 0 || sql_id >= std::int64_t{dc::kBackground})
        throw dc::Error(dc::ErrorKind::not_found, "cluster " + std::to_string(sql_id) + " not found");
      std::cout << dc::run_sql(clusters_path, dc::ClusterId(sql_id), sql_x, sql_y) << "\n";
    } else if (*bench) {
      const auto rows = dc::run_bench(bench_cfg);
      std::cout << dc::bench_table(rows);
      if (!bench_json_path.empty()) dc::write_file(bench_json_path, dc::dump_json(dc::bench_json(bench_cfg, rows)));
    }
  } catch (const dc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dc::exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
