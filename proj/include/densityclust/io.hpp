#pragma once

// File formats: point tables (CSV / JSON lines), the binary density dump, and
// the cluster and label JSON documents exchanged between commands.

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cluster_engine.hpp"
#include "error.hpp"
#include "grid_density.hpp"
#include "region_geometry.hpp"

namespace densityclust {

using Json = nlohmann::ordered_json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::io, "failed reading " + path);
  return data;
}

inline void write_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorKind::io, "failed writing " + path);
}

enum class InputFormat { csv, jsonl };

struct ColumnSpec {
  std::string x = "x";
  std::string y = "y";
  std::optional<std::string> weight;  // when unset, a "weight" column is used if present
  std::optional<std::string> text;    // when unset, a "text" column is used if present
};

struct PointTable {
  std::vector<Point2D> points;
  std::size_t rows = 0;       // data rows seen (header excluded)
  std::size_t malformed = 0;  // rows skipped
  bool has_text = false;
};

// Rows that cannot be parsed are skipped; more than this share of bad rows aborts.
inline constexpr double kMaxMalformedFraction = 0.01;

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || s.empty() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// RFC 4180 style records: quoted fields may contain commas, quotes ("") and newlines.
class CsvReader {
 public:
  explicit CsvReader(std::string_view data) : data_(data) {}

  bool next(std::vector<std::string>& fields) {
    fields.clear();
    if (pos_ >= data_.size()) return false;
    std::string field;
    bool quoted = false;
    while (pos_ < data_.size()) {
      const char c = data_[pos_++];
      if (quoted) {
        if (c == '"') {
          if (pos_ < data_.size() && data_[pos_] == '"') {
            field.push_back('"');
            ++pos_;
          } else {
            quoted = false;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else if (c == '\n') {
        break;
      } else if (c != '\r') {
        field.push_back(c);
      }
    }
    fields.push_back(std::move(field));
    return true;
  }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

inline void finish_table(PointTable& table, std::size_t first_bad_row) {
  if (table.rows > 0 && double(table.malformed) > kMaxMalformedFraction * double(table.rows))
    throw Error(ErrorKind::data, std::to_string(table.malformed) + " of " + std::to_string(table.rows) +
                                     " rows are malformed (first at row " + std::to_string(first_bad_row) + ")");
  if (table.points.empty()) throw Error(ErrorKind::data, "no data");
}

}  // namespace detail

inline PointTable parse_csv(std::string_view data, const ColumnSpec& columns) {
  detail::CsvReader reader(data);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw Error(ErrorKind::data, "no data");
  if (!fields.empty() && fields[0].starts_with("\xEF\xBB\xBF")) fields[0].erase(0, 3);

  auto find = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (detail::trim(fields[i]) == name) return i;
    return std::nullopt;
  };
  auto require = [&](const std::string& name) {
    auto i = find(name);
    if (!i) throw Error(ErrorKind::parameter, "column '" + name + "' not found in header");
    return *i;
  };
  const std::size_t xi = require(columns.x), yi = require(columns.y);
  const auto wi = columns.weight ? std::optional(require(*columns.weight)) : find("weight");
  const auto ti = columns.text ? std::optional(require(*columns.text)) : find("text");
  const std::size_t width = fields.size();

  PointTable table;
  table.has_text = ti.has_value();
  std::size_t row = 1, first_bad = 0;
  while (reader.next(fields)) {
    ++row;
    if (fields.size() == 1 && detail::trim(fields[0]).empty()) continue;
    ++table.rows;
    std::optional<double> x, y, w = 1.0;
    if (fields.size() == width) {
      x = detail::parse_real(fields[xi]);
      y = detail::parse_real(fields[yi]);
      if (wi) w = detail::parse_real(fields[*wi]);
    }
    if (!x || !y || !w || *w < 0.0) {
      if (table.malformed++ == 0) first_bad = row;
      continue;
    }
    Point2D p{*x, *y, *w, std::nullopt};
    if (ti) p.text = std::move(fields[*ti]);
    table.points.push_back(std::move(p));
  }
  detail::finish_table(table, first_bad);
  return table;
}

inline PointTable parse_jsonl(std::string_view data, const ColumnSpec& columns) {
  const std::string wkey = columns.weight.value_or("weight");
  const std::string tkey = columns.text.value_or("text");
  PointTable table;
  std::size_t line_no = 0, first_bad = 0;
  std::size_t start = 0;
  while (start < data.size()) {
    std::size_t end = data.find('\n', start);
    if (end == std::string_view::npos) end = data.size();
    const auto line = detail::trim(data.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    ++table.rows;
    auto bad = [&] {
      if (table.malformed++ == 0) first_bad = line_no;
    };
    const Json obj = Json::parse(line.begin(), line.end(), nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      bad();
      continue;
    }
    auto number = [&](const std::string& key) -> std::optional<double> {
      auto it = obj.find(key);
      if (it == obj.end() || !it->is_number()) return std::nullopt;
      const double v = it->get<double>();
      return std::isfinite(v) ? std::optional(v) : std::nullopt;
    };
    const auto x = number(columns.x), y = number(columns.y);
    std::optional<double> w = 1.0;
    if (obj.contains(wkey)) w = number(wkey);
    if (!x || !y || !w || *w < 0.0) {
      bad();
      continue;
    }
    Point2D p{*x, *y, *w, std::nullopt};
    if (auto it = obj.find(tkey); it != obj.end()) {
      p.text = it->is_string() ? it->get<std::string>() : it->dump();
      table.has_text = true;
    }
    table.points.push_back(std::move(p));
  }
  if (columns.text && !table.has_text && !table.points.empty())
    throw Error(ErrorKind::parameter, "column '" + *columns.text + "' not found in input");
  detail::finish_table(table, first_bad);
  return table;
}

inline PointTable read_points(const std::string& path, InputFormat format, const ColumnSpec& columns) {
  const std::string data = read_file(path);
  return format == InputFormat::csv ? parse_csv(data, columns) : parse_jsonl(data, columns);
}

// Little-endian: u32 width, u32 height, then width*height float32 values, row-major.
inline std::string encode_density_dump(const DensityMap& density) {
  std::string out;
  out.reserve(8 + density.size() * 4);
  auto put32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  put32(density.width());
  put32(density.height());
  for (double v : density.values) put32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

struct DensityDump {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<float> values;
};

inline DensityDump decode_density_dump(std::string_view bytes) {
  auto get32 = [&](std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
    return v;
  };
  if (bytes.size() < 8) throw Error(ErrorKind::data, "density dump is truncated");
  DensityDump dump{get32(0), get32(4), {}};
  const std::size_t n = std::size_t{dump.width} * dump.height;
  if (bytes.size() != 8 + 4 * n) throw Error(ErrorKind::data, "density dump size does not match its header");
  dump.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) dump.values[i] = std::bit_cast<float>(get32(8 + 4 * i));
  return dump;
}

// ---------------------------------------------------------------------------
// Cluster document

struct ClusterRecord {
  ClusterId id = 0;
  Vec2 peak;  // center of the peak pixel
  double peak_density = 0.0;
  std::size_t area_px = 0;
  PolygonRing outer;
  std::vector<PolygonRing> holes;
  std::vector<Rect> rects;
  int color = 0;
  std::optional<std::vector<std::pair<std::string, double>>> label;

  ClusterShape shape() const { return ClusterShape{id, outer, holes, rects}; }
};

struct ClusterDocument {
  Viewport viewport;
  ClusterParams params;
  double bandwidth_px = 0.0;
  bool pixel_space = false;
  std::vector<ClusterRecord> clusters;

  const ClusterRecord* find(ClusterId id) const {
    for (const auto& c : clusters)
      if (c.id == id) return &c;
    return nullptr;
  }
};

namespace detail {

inline Json ring_json(const PolygonRing& ring) {
  Json arr = Json::array();
  for (const auto& v : ring.vertices) arr.push_back(Json::array({v.x, v.y}));
  return arr;
}

inline Json labels_json(const std::vector<std::pair<std::string, double>>& terms) {
  Json arr = Json::array();
  for (const auto& [term, score] : terms) arr.push_back(Json::array({term, score}));
  return arr;
}

// Small schema reader that reports the path of the offending field.
class Reader {
 public:
  static const Json& field(const Json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) throw schema(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw schema(path + "." + key, "missing field");
    return *it;
  }

  static double number(const Json& v, const std::string& path) {
    if (!v.is_number()) throw schema(path, "expected a number");
    return v.get<double>();
  }

  static std::int64_t integer(const Json& v, const std::string& path) {
    if (!v.is_number_integer()) throw schema(path, "expected an integer");
    return v.get<std::int64_t>();
  }

  static const Json& array(const Json& v, const std::string& path) {
    if (!v.is_array()) throw schema(path, "expected an array");
    return v;
  }

  static Vec2 point(const Json& v, const std::string& path) {
    array(v, path);
    if (v.size() != 2) throw schema(path, "expected [x, y]");
    return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
  }

  static PolygonRing ring(const Json& v, const std::string& path) {
    PolygonRing r;
    for (std::size_t i = 0; i < array(v, path).size(); ++i) r.vertices.push_back(point(v[i], index(path, i)));
    return r;
  }

  static std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

  static Error schema(const std::string& path, const std::string& what) {
    return Error(ErrorKind::data, "schema error at " + path + ": " + what);
  }
};

}  // namespace detail

inline Json to_json(const ClusterDocument& doc) {
  const auto& vp = doc.viewport;
  Json j;
  j["viewport"] = {{"x_min", vp.x_min}, {"x_max", vp.x_max}, {"y_min", vp.y_min},
                   {"y_max", vp.y_max}, {"width", vp.width}, {"height", vp.height}};
  j["params"] = {{"bandwidth_px", doc.bandwidth_px},
                 {"truncation_ratio", doc.params.truncation_ratio},
                 {"merge_distance_px", doc.params.merge_distance_px},
                 {"connectivity", static_cast<int>(doc.params.connectivity)},
                 {"min_peak_density", doc.params.min_peak_density}};
  j["space"] = doc.pixel_space ? "pixel" : "data";
  Json clusters = Json::array();
  for (const auto& c : doc.clusters) {
    Json cj;
    cj["id"] = c.id;
    cj["peak"] = {{"x", c.peak.x}, {"y", c.peak.y}, {"density", c.peak_density}};
    cj["area_px"] = c.area_px;
    cj["outer"] = detail::ring_json(c.outer);
    Json holes = Json::array();
    for (const auto& h : c.holes) holes.push_back(detail::ring_json(h));
    cj["holes"] = std::move(holes);
    Json rects = Json::array();
    for (const auto& r : c.rects) rects.push_back(Json::array({r.x0, r.y0, r.x1, r.y1}));
    cj["rects"] = std::move(rects);
    cj["color"] = c.color;
    if (c.label) cj["label"] = detail::labels_json(*c.label);
    clusters.push_back(std::move(cj));
  }
  j["clusters"] = std::move(clusters);
  return j;
}

inline ClusterDocument cluster_document_from_json(const Json& j) {
  using R = detail::Reader;
  ClusterDocument doc;
  const Json& vp = R::field(j, "viewport", "$");
  doc.viewport.x_min = R::number(R::field(vp, "x_min", "$.viewport"), "$.viewport.x_min");
  doc.viewport.x_max = R::number(R::field(vp, "x_max", "$.viewport"), "$.viewport.x_max");
  doc.viewport.y_min = R::number(R::field(vp, "y_min", "$.viewport"), "$.viewport.y_min");
  doc.viewport.y_max = R::number(R::field(vp, "y_max", "$.viewport"), "$.viewport.y_max");
  const auto w = R::integer(R::field(vp, "width", "$.viewport"), "$.viewport.width");
  const auto h = R::integer(R::field(vp, "height", "$.viewport"), "$.viewport.height");
  if (w < 1 || h < 1 || w > UINT32_MAX || h > UINT32_MAX) throw R::schema("$.viewport", "bad grid dimensions");
  doc.viewport.width = std::uint32_t(w);
  doc.viewport.height = std::uint32_t(h);
  if (!doc.viewport.valid()) throw R::schema("$.viewport", "invalid viewport");

  if (auto it = j.find("params"); it != j.end() && it->is_object()) {
    const Json& p = *it;
    auto opt = [&](const char* key, double fallback) {
      return p.contains(key) ? R::number(p[key], std::string("$.params.") + key) : fallback;
    };
    doc.bandwidth_px = opt("bandwidth_px", 0.0);
    doc.params.truncation_ratio = opt("truncation_ratio", doc.params.truncation_ratio);
    doc.params.merge_distance_px = opt("merge_distance_px", doc.params.merge_distance_px);
    doc.params.min_peak_density = opt("min_peak_density", doc.params.min_peak_density);
    if (p.contains("connectivity"))
      doc.params.connectivity = parse_connectivity(int(R::integer(p["connectivity"], "$.params.connectivity")));
  }
  if (auto it = j.find("space"); it != j.end()) {
    if (!it->is_string() || (*it != "pixel" && *it != "data")) throw R::schema("$.space", "expected \"data\" or \"pixel\"");
    doc.pixel_space = *it == "pixel";
  }

  const Json& clusters = R::array(R::field(j, "clusters", "$"), "$.clusters");
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const std::string path = R::index("$.clusters", i);
    const Json& c = clusters[i];
    ClusterRecord rec;
    const auto id = R::integer(R::field(c, "id", path), path + ".id");
    if (id < 0 || id >= std::int64_t{kBackground}) throw R::schema(path + ".id", "out of range");
    rec.id = ClusterId(id);
    const Json& peak = R::field(c, "peak", path);
    rec.peak = {R::number(R::field(peak, "x", path + ".peak"), path + ".peak.x"),
                R::number(R::field(peak, "y", path + ".peak"), path + ".peak.y")};
    rec.peak_density = R::number(R::field(peak, "density", path + ".peak"), path + ".peak.density");
    const auto area = R::integer(R::field(c, "area_px", path), path + ".area_px");
    if (area < 0) throw R::schema(path + ".area_px", "negative area");
    rec.area_px = std::size_t(area);
    rec.outer = R::ring(R::field(c, "outer", path), path + ".outer");
    const Json& holes = R::array(R::field(c, "holes", path), path + ".holes");
    for (std::size_t k = 0; k < holes.size(); ++k) rec.holes.push_back(R::ring(holes[k], R::index(path + ".holes", k)));
    const Json& rects = R::array(R::field(c, "rects", path), path + ".rects");
    for (std::size_t k = 0; k < rects.size(); ++k) {
      const std::string rp = R::index(path + ".rects", k);
      const Json& r = R::array(rects[k], rp);
      if (r.size() != 4) throw R::schema(rp, "expected [x0, y0, x1, y1]");
      rec.rects.push_back(Rect{R::number(r[0], rp + "[0]"), R::number(r[1], rp + "[1]"), R::number(r[2], rp + "[2]"),
                               R::number(r[3], rp + "[3]")});
    }
    rec.color = c.contains("color") ? int(R::integer(c["color"], path + ".color")) : 0;
    if (rec.color < 0) throw R::schema(path + ".color", "negative color index");
    if (auto it = c.find("label"); it != c.end()) {
      std::vector<std::pair<std::string, double>> terms;
      for (std::size_t k = 0; k < R::array(*it, path + ".label").size(); ++k) {
        const Json& t = (*it)[k];
        const std::string tp = R::index(path + ".label", k);
        if (!t.is_array() || t.size() != 2 || !t[0].is_string()) throw R::schema(tp, "expected [term, score]");
        terms.emplace_back(t[0].get<std::string>(), R::number(t[1], tp + "[1]"));
      }
      rec.label = std::move(terms);
    }
    doc.clusters.push_back(std::move(rec));
  }
  return doc;
}

inline ClusterDocument parse_cluster_document(std::string_view text) {
  const Json j = Json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::data, "schema error at $: not valid JSON");
  return cluster_document_from_json(j);
}

inline ClusterDocument read_cluster_document(const std::string& path) { return parse_cluster_document(read_file(path)); }

// Geometry of one record in data space, whichever space the document stores.
inline ClusterShape data_space_shape(const ClusterDocument& doc, const ClusterRecord& rec) {
  return doc.pixel_space ? to_data_space(rec.shape(), doc.viewport) : rec.shape();
}

inline ClusterShape pixel_space_shape(const ClusterDocument& doc, const ClusterRecord& rec) {
  return doc.pixel_space ? rec.shape() : to_pixel_space(rec.shape(), doc.viewport);
}

struct LabelRecord {
  ClusterId id = 0;
  std::vector<std::pair<std::string, double>> terms;
};

inline Json labels_to_json(const std::vector<LabelRecord>& labels) {
  Json arr = Json::array();
  for (const auto& l : labels) {
    Json o;
    o["id"] = l.id;
    o["label"] = detail::labels_json(l.terms);
    arr.push_back(std::move(o));
  }
  return arr;
}

inline std::string dump_json(const Json& j) { return j.dump() + "\n"; }

}  // namespace densityclust
