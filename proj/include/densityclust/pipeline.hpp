#pragma once

// The commands behind the CLI: cluster, render, label, sql and bench. Each one
// is a plain function so tests can drive the same code paths as the tool.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cluster_engine.hpp"
#include "cluster_labeling.hpp"
#include "error.hpp"
#include "grid_density.hpp"
#include "io.hpp"
#include "region_geometry.hpp"
#include "render.hpp"
#include "synthetic.hpp"

namespace densityclust {

struct RunConfig {
  std::string input;
  InputFormat format = InputFormat::csv;
  ColumnSpec columns;
  std::uint32_t width = 1000;
  std::uint32_t height = 1000;
  std::optional<double> bandwidth_px;  // default: 1% of the larger grid side
  ClusterParams params;
  double padding = 0.05;
  std::optional<std::array<double, 4>> bounds;  // x_min, x_max, y_min, y_max
  std::string output;
  std::optional<std::string> density_output;
  bool pixel_space = false;
  int palette = 10;
  std::uint64_t seed = 42;
  std::size_t top_k = 5;
  bool merge_labels = false;

  double bandwidth() const { return bandwidth_px.value_or(default_bandwidth_px(width, height)); }

  void validate() const {
    if (width < 1 || height < 1) throw Error(ErrorKind::parameter, "grid width and height must be >= 1");
    if (palette < 1) throw Error(ErrorKind::parameter, "palette size must be >= 1");
    if (top_k < 1) throw Error(ErrorKind::parameter, "top-k must be >= 1");
    if (!(padding >= 0.0 && padding < 1.0)) throw Error(ErrorKind::parameter, "padding must lie in [0, 1)");
    if (bandwidth_px && !(*bandwidth_px >= 0.0 && std::isfinite(*bandwidth_px)))
      throw Error(ErrorKind::parameter, "bandwidth must be finite and >= 0");
    params.validate();
  }
};

inline InputFormat parse_format(const std::string& name) {
  if (name == "csv") return InputFormat::csv;
  if (name == "jsonl") return InputFormat::jsonl;
  throw Error(ErrorKind::parameter, "unknown input format '" + name + "' (expected csv or jsonl)");
}

inline InputFormat guess_format(const std::string& path) {
  return path.ends_with(".jsonl") || path.ends_with(".ndjson") ? InputFormat::jsonl : InputFormat::csv;
}

// Keys mirror the long flag names with '-' replaced by '_'.
inline void apply_config_json(RunConfig& cfg, const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::parameter, "config file must hold a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "input") cfg.input = value.get<std::string>();
      else if (key == "format") cfg.format = parse_format(value.get<std::string>());
      else if (key == "x_col") cfg.columns.x = value.get<std::string>();
      else if (key == "y_col") cfg.columns.y = value.get<std::string>();
      else if (key == "weight_col") cfg.columns.weight = value.get<std::string>();
      else if (key == "text_col") cfg.columns.text = value.get<std::string>();
      else if (key == "width") cfg.width = value.get<std::uint32_t>();
      else if (key == "height") cfg.height = value.get<std::uint32_t>();
      else if (key == "bandwidth") cfg.bandwidth_px = value.get<double>();
      else if (key == "truncation_ratio") cfg.params.truncation_ratio = value.get<double>();
      else if (key == "merge_distance") cfg.params.merge_distance_px = value.get<double>();
      else if (key == "connectivity") cfg.params.connectivity = parse_connectivity(value.get<int>());
      else if (key == "min_peak_density") cfg.params.min_peak_density = value.get<double>();
      else if (key == "padding") cfg.padding = value.get<double>();
      else if (key == "bounds") cfg.bounds = value.get<std::array<double, 4>>();
      else if (key == "output") cfg.output = value.get<std::string>();
      else if (key == "density_output") cfg.density_output = value.get<std::string>();
      else if (key == "pixel_space") cfg.pixel_space = value.get<bool>();
      else if (key == "palette") cfg.palette = value.get<int>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "top_k") cfg.top_k = value.get<std::size_t>();
      else if (key == "merge_labels") cfg.merge_labels = value.get<bool>();
      else throw Error(ErrorKind::parameter, "unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parameter, std::string("bad config value: ") + e.what());
  }
}

inline Viewport resolve_viewport(const RunConfig& cfg, std::span<const Point2D> points) {
  if (cfg.bounds) {
    const auto& b = *cfg.bounds;
    Viewport vp{b[0], b[1], b[2], b[3], cfg.width, cfg.height};
    vp.validate();
    return vp;
  }
  return auto_viewport(points, cfg.width, cfg.height, cfg.padding);
}

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

// Geometry, colors and peaks for every final cluster.
inline ClusterDocument make_cluster_document(const DensityMap& density, const ClusterResult& result,
                                             const ClusterParams& params, double bandwidth_px, bool pixel_space,
                                             int palette) {
  ClusterDocument doc;
  doc.viewport = density.viewport;
  doc.params = params;
  doc.bandwidth_px = bandwidth_px;
  doc.pixel_space = pixel_space;
  const auto coloring = color_clusters(result.graph, palette);
  const auto shapes = trace_all(result.cmap, params.connectivity);
  for (const auto& shape : shapes) {
    const ClusterNode* node = result.graph.node(shape.cluster_id);
    if (!node) throw Error(ErrorKind::internal, "traced a cluster missing from the graph");
    ClusterRecord rec;
    rec.id = shape.cluster_id;
    const Vec2 peak_px{node->peak.x + 0.5, node->peak.y + 0.5};
    rec.peak = pixel_space ? peak_px : pixel_to_data(peak_px, density.viewport);
    rec.peak_density = node->peak_density;
    rec.area_px = node->area_px;
    const ClusterShape placed = pixel_space ? shape : to_data_space(shape, density.viewport);
    rec.outer = placed.outer;
    rec.holes = placed.holes;
    rec.rects = placed.rects;
    rec.color = coloring.colors.at(rec.id);
    doc.clusters.push_back(std::move(rec));
  }
  return doc;
}

struct ClusterSummary {
  std::size_t clusters = 0;
  std::size_t pixels = 0;
  std::size_t points = 0;
  std::size_t skipped_rows = 0;
  double kde_ms = 0.0;
  double cluster_ms = 0.0;

  std::string line() const {
    std::ostringstream os;
    os << "clusters=" << clusters << " pixels=" << pixels << " points=" << points << " kde_ms=" << kde_ms
       << " cluster_ms=" << cluster_ms;
    return os.str();
  }
};

struct ClusterRun {
  ClusterDocument document;
  ClusterSummary summary;
  DensityMap density;
};

inline ClusterRun cluster_points(std::span<const Point2D> points, const RunConfig& cfg) {
  cfg.validate();
  ClusterRun run;
  const Viewport vp = resolve_viewport(cfg, points);

  auto t0 = std::chrono::steady_clock::now();
  run.density = smooth(bin_points(points, vp), cfg.bandwidth());
  run.summary.kde_ms = elapsed_ms(t0);

  t0 = std::chrono::steady_clock::now();
  const ClusterResult result = cluster_density_map(run.density, cfg.params);
  run.summary.cluster_ms = elapsed_ms(t0);

  run.document = make_cluster_document(run.density, result, cfg.params, cfg.bandwidth(), cfg.pixel_space, cfg.palette);
  run.summary.clusters = result.graph.nodes.size();
  run.summary.pixels = run.density.size();
  run.summary.points = points.size();
  return run;
}

// `cluster`: points file -> cluster JSON (+ optional density dump).
inline ClusterSummary run_cluster(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.input.empty()) throw Error(ErrorKind::parameter, "--input is required");
  if (cfg.output.empty()) throw Error(ErrorKind::parameter, "--output is required");
  const PointTable table = read_points(cfg.input, cfg.format, cfg.columns);
  ClusterRun run = cluster_points(table.points, cfg);
  run.summary.skipped_rows = table.malformed;
  write_file(cfg.output, dump_json(to_json(run.document)));
  if (cfg.density_output) write_file(*cfg.density_output, encode_density_dump(run.density));
  return run.summary;
}

// `render`: cluster JSON -> SVG.
inline void run_render(const std::string& cluster_json, const std::string& output,
                       const std::optional<std::string>& density_dump = std::nullopt) {
  const ClusterDocument doc = read_cluster_document(cluster_json);
  std::optional<DensityDump> underlay;
  if (density_dump) underlay = decode_density_dump(read_file(*density_dump));
  write_file(output, render_svg(doc, underlay ? &*underlay : nullptr));
}

inline std::vector<LabelRecord> label_clusters(const ClusterDocument& doc, std::span<const Point2D> points,
                                               std::size_t top_k) {
  std::vector<ClusterShape> shapes;
  for (const auto& rec : doc.clusters) shapes.push_back(data_space_shape(doc, rec));
  const Assignment assignment = assign_documents(points, shapes, doc.viewport);
  std::vector<std::string> texts;
  texts.reserve(points.size());
  for (const auto& p : points) texts.push_back(p.text.value_or(""));
  std::vector<LabelRecord> out;
  for (auto& l : ctfidf_labels(assignment, texts, top_k)) out.push_back({l.cluster_id, std::move(l.top_terms)});
  return out;
}

// `label`: points file + cluster JSON -> labels JSON, or the cluster JSON with
// labels merged in when cfg.merge_labels is set.
inline std::vector<LabelRecord> run_label(const RunConfig& cfg, const std::string& cluster_json) {
  cfg.validate();
  if (cfg.input.empty()) throw Error(ErrorKind::parameter, "--input is required");
  if (cfg.output.empty()) throw Error(ErrorKind::parameter, "--output is required");
  ClusterDocument doc = read_cluster_document(cluster_json);
  const PointTable table = read_points(cfg.input, cfg.format, cfg.columns);
  if (!table.has_text) throw Error(ErrorKind::parameter, "input has no text column");
  auto labels = label_clusters(doc, table.points, cfg.top_k);
  if (cfg.merge_labels) {
    for (const auto& l : labels)
      for (auto& rec : doc.clusters)
        if (rec.id == l.id) rec.label = l.terms;
    write_file(cfg.output, dump_json(to_json(doc)));
  } else {
    write_file(cfg.output, dump_json(labels_to_json(labels)));
  }
  return labels;
}

// `sql`: WHERE predicate for one cluster, in data space.
inline std::string run_sql(const std::string& cluster_json, ClusterId id, const std::string& x_column,
                           const std::string& y_column) {
  const ClusterDocument doc = read_cluster_document(cluster_json);
  const ClusterRecord* rec = doc.find(id);
  if (!rec) throw Error(ErrorKind::not_found, "cluster " + std::to_string(id) + " not found");
  return emit_sql_predicate(data_space_shape(doc, *rec), x_column, y_column);
}

struct BenchConfig {
  std::vector<std::uint32_t> sizes{250, 500, 1000};
  std::size_t repeats = 5;
  std::uint64_t seed = 42;
  double points_per_pixel = 1.0;
  ClusterParams params;
};

struct BenchRow {
  std::uint32_t size = 0;
  std::size_t pixels = 0;
  std::size_t points = 0;
  std::size_t components = 0;
  std::size_t clusters = 0;
  double kde_ms = 0.0;      // median
  double cluster_ms = 0.0;  // median
  std::vector<double> cluster_samples;
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

// Seeded mixture of ceil(size / 10) Gaussians on a size x size grid.
inline std::vector<Point2D> bench_points(std::uint32_t size, std::uint64_t seed, double points_per_pixel,
                                         std::size_t* components = nullptr) {
  SeededRng rng(seed ^ (std::uint64_t{size} * 0x9E3779B97F4A7C15ull));
  const std::size_t count = (size + 9) / 10;
  const auto mixture = random_mixture(count, double(size), rng);
  if (components) *components = count;
  const auto n = static_cast<std::size_t>(std::llround(points_per_pixel * double(size) * double(size)));
  return sample_mixture(mixture, n, rng);
}

inline std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
  std::vector<BenchRow> rows;
  for (std::uint32_t size : cfg.sizes) {
    if (size < 64) throw Error(ErrorKind::parameter, "bench sizes must be >= 64");
    if (cfg.repeats < 1) throw Error(ErrorKind::parameter, "repeats must be >= 1");
    BenchRow row;
    row.size = size;
    row.pixels = std::size_t{size} * size;
    const auto points = bench_points(size, cfg.seed, cfg.points_per_pixel, &row.components);
    row.points = points.size();
    const Viewport vp{0.0, double(size), 0.0, double(size), size, size};
    std::vector<double> kde, clus;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      auto t0 = std::chrono::steady_clock::now();
      const DensityMap density = smooth(bin_points(points, vp), default_bandwidth_px(size, size));
      kde.push_back(elapsed_ms(t0));
      t0 = std::chrono::steady_clock::now();
      const ClusterResult result = cluster_density_map(density, cfg.params);
      clus.push_back(elapsed_ms(t0));
      row.clusters = result.graph.nodes.size();
    }
    row.kde_ms = median(kde);
    row.cluster_ms = median(clus);
    row.cluster_samples = std::move(clus);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string bench_table(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "size      pixels    points  gaussians  clusters    kde_ms  cluster_ms\n";
  for (const auto& r : rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%-6u %10zu %9zu %10zu %9zu %9.2f %11.2f\n", r.size, r.pixels, r.points,
                  r.components, r.clusters, r.kde_ms, r.cluster_ms);
    os << line;
  }
  return os.str();
}

// {"seed":..,"repeats":..,"rows":[{"size","pixels","points","gaussians","clusters","kde_ms","cluster_ms"}]}
inline Json bench_json(const BenchConfig& cfg, const std::vector<BenchRow>& rows) {
  Json j;
  j["seed"] = cfg.seed;
  j["repeats"] = cfg.repeats;
  Json arr = Json::array();
  for (const auto& r : rows)
    arr.push_back({{"size", r.size},
                   {"pixels", r.pixels},
                   {"points", r.points},
                   {"gaussians", r.components},
                   {"clusters", r.clusters},
                   {"kde_ms", r.kde_ms},
                   {"cluster_ms", r.cluster_ms}});
  j["rows"] = std::move(arr);
  return j;
}

}  // namespace densityclust
