#pragma once

// Constructed density maps and corpora shared by the unit tests and the
// acceptance binary.

#include <sqlite3.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "densityclust/densityclust.hpp"

namespace fixtures {

namespace dc = densityclust;

struct Blob {
  double cx, cy;  // pixel coordinates; pixel (x, y) has its center at (x + 0.5, y + 0.5)
  double sigma;
  double amplitude;
};

// Untruncated sum of Gaussians sampled at pixel centers.
inline dc::DensityMap gaussian_map(std::uint32_t w, std::uint32_t h, const std::vector<Blob>& blobs) {
  dc::DensityMap m(dc::Viewport{0.0, double(w), 0.0, double(h), w, h});
  for (std::uint32_t y = 0; y < h; ++y)
    for (std::uint32_t x = 0; x < w; ++x) {
      double v = 0.0;
      for (const auto& b : blobs) {
        const double dx = x + 0.5 - b.cx, dy = y + 0.5 - b.cy;
        v += b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
      }
      m.values[std::size_t{y} * w + x] = v;
    }
  return m;
}

// Two peaks 6 px apart; the shorter one sits two or three pixels from the saddle.
inline dc::DensityMap near_pair() { return gaussian_map(48, 32, {{21.0, 16.0, 2.0, 1.0}, {27.0, 16.0, 2.0, 0.8}}); }

// Two peaks 60 px apart; each sits about 30 px from the shared boundary.
inline dc::DensityMap far_pair() { return gaussian_map(96, 48, {{18.0, 24.0, 3.0, 1.0}, {78.0, 24.0, 3.0, 1.0}}); }

// Two broad modes, one of them with a steep sub-peak on its flank.
inline dc::DensityMap shoulder_mixture() {
  return gaussian_map(96, 64, {{25.0, 32.0, 6.0, 1.0}, {33.0, 32.0, 2.0, 0.5}, {70.0, 32.0, 6.0, 0.8}});
}

// Two blobs joined by a bar below a tenth of either peak.
inline dc::DensityMap dumbbell() {
  auto m = gaussian_map(80, 32, {{16.0, 16.0, 3.0, 1.0}, {64.0, 16.0, 3.0, 1.0}});
  for (std::uint32_t x = 16; x < 64; ++x)
    for (std::uint32_t y = 15; y < 17; ++y) m.values[std::size_t{y} * 80 + x] += 0.05;
  return m;
}

// A ring-shaped ridge: the final cluster has a hole in the middle.
inline dc::DensityMap annulus() {
  dc::DensityMap m(dc::Viewport{0.0, 64.0, 0.0, 64.0, 64, 64});
  for (std::uint32_t y = 0; y < 64; ++y)
    for (std::uint32_t x = 0; x < 64; ++x) {
      const double r = std::hypot(x + 0.5 - 32.0, y + 0.5 - 32.0);
      m.values[std::size_t{y} * 64 + x] = std::exp(-(r - 14.0) * (r - 14.0) / 18.0);
    }
  return m;
}

// Smoothed uniform noise quantized to a handful of levels, so that plateaus and
// exact ties are common; the lowest level is zero (background).
inline dc::DensityMap random_grid(std::uint64_t seed) {
  dc::SeededRng rng(seed);
  const auto w = static_cast<std::uint32_t>(8 + rng.uniform() * 57.0);
  const auto h = static_cast<std::uint32_t>(8 + rng.uniform() * 57.0);
  const double sigma = 0.5 + 2.0 * rng.uniform();
  const int levels = 3 + static_cast<int>(rng.uniform() * 10.0);
  dc::DensityMap noise(dc::Viewport{0.0, double(w), 0.0, double(h), w, h});
  for (double& v : noise.values) v = rng.uniform();
  auto smoothed = dc::smooth(noise, sigma);
  double lo = smoothed.values[0], hi = lo;
  for (double v : smoothed.values) lo = std::min(lo, v), hi = std::max(hi, v);
  for (double& v : smoothed.values) {
    const double t = hi > lo ? (v - lo) / (hi - lo) : 0.0;
    v = std::floor(t * levels) / levels;
  }
  // A flat block at an arbitrary level.
  const std::uint32_t bx = std::uint32_t(rng.uniform() * w), by = std::uint32_t(rng.uniform() * h);
  const double level = std::floor(rng.uniform() * levels) / levels;
  for (std::uint32_t y = by; y < std::min(h, by + 5); ++y)
    for (std::uint32_t x = bx; x < std::min(w, bx + 5); ++x) smoothed.values[std::size_t{y} * w + x] = level;
  return smoothed;
}

// Density from sampled points of a seeded random mixture, as the CLI builds it.
inline dc::DensityMap sampled_mixture(std::uint32_t size, std::uint64_t seed) {
  const auto points = dc::bench_points(size, seed, 1.0);
  const dc::Viewport vp{0.0, double(size), 0.0, double(size), size, size};
  return dc::smooth(dc::bin_points(points, vp), dc::default_bandwidth_px(size, size));
}

struct NamedMap {
  std::string name;
  dc::DensityMap density;
};

inline std::vector<NamedMap> corpus() {
  std::vector<NamedMap> out{{"near_pair", near_pair()},
                            {"far_pair", far_pair()},
                            {"shoulder_mixture", shoulder_mixture()},
                            {"dumbbell", dumbbell()},
                            {"annulus", annulus()}};
  for (std::uint64_t s = 1; s <= 4; ++s) out.push_back({"sampled_mixture_" + std::to_string(s), sampled_mixture(128, s)});
  for (std::uint64_t s = 1; s <= 6; ++s) out.push_back({"random_grid_" + std::to_string(s), random_grid(1000 + s)});
  return out;
}

// Data-space points for one corpus map: a jittered cloud inside the viewport
// plus every pixel corner and every pixel center, so boundaries get exercised.
inline std::vector<dc::Point2D> probe_points(const dc::Viewport& vp, std::uint64_t seed, std::size_t random_count) {
  std::vector<dc::Point2D> pts;
  dc::SeededRng rng(seed);
  for (std::size_t i = 0; i < random_count; ++i)
    pts.push_back({vp.x_min + rng.uniform() * (vp.x_max - vp.x_min), vp.y_min + rng.uniform() * (vp.y_max - vp.y_min)});
  for (std::uint32_t y = 0; y <= vp.height; ++y)
    for (std::uint32_t x = 0; x <= vp.width; ++x) {
      pts.push_back({vp.x_min + x * vp.sx(), vp.y_min + y * vp.sy()});
      if (x < vp.width && y < vp.height) pts.push_back({vp.x_min + (x + 0.5) * vp.sx(), vp.y_min + (y + 0.5) * vp.sy()});
    }
  return pts;
}

struct TopicCorpus {
  std::vector<dc::Point2D> points;
  std::vector<std::string> topics;  // planted word per blob, in blob order
};

// Three blobs in data space, each document holding its blob's topic word plus
// words drawn from a shared vocabulary.
inline TopicCorpus planted_topics(std::size_t per_blob, std::uint64_t seed) {
  TopicCorpus c;
  c.topics = {"volcano", "saxophone", "glacier"};
  const double cx[3] = {-5.0, 5.0, 0.0}, cy[3] = {-3.0, -3.0, 6.0};
  static const char* kShared[] = {"report", "people", "world", "system", "value", "result", "number", "paper"};
  dc::SeededRng rng(seed);
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t i = 0; i < per_blob; ++i) {
      std::string text = c.topics[b];
      for (int k = 0; k < 3; ++k) text += std::string(" ") + kShared[std::size_t(rng.uniform() * 8.0) % 8];
      c.points.push_back({cx[b] + 1.2 * rng.normal(), cy[b] + 1.2 * rng.normal(), 1.0, text});
    }
  return c;
}

// In-memory SQLite table pts(rowid, x, y) with the given points.
class SqlPoints {
 public:
  explicit SqlPoints(const std::vector<dc::Point2D>& points) {
    if (sqlite3_open(":memory:", &db_) != SQLITE_OK) throw std::runtime_error("sqlite open failed");
    exec("CREATE TABLE pts(id INTEGER PRIMARY KEY, x REAL, y REAL)");
    exec("BEGIN");
    sqlite3_stmt* st = nullptr;
    sqlite3_prepare_v2(db_, "INSERT INTO pts VALUES(?, ?, ?)", -1, &st, nullptr);
    for (std::size_t i = 0; i < points.size(); ++i) {
      sqlite3_bind_int64(st, 1, sqlite3_int64(i));
      sqlite3_bind_double(st, 2, points[i].x);
      sqlite3_bind_double(st, 3, points[i].y);
      if (sqlite3_step(st) != SQLITE_DONE) throw std::runtime_error(sqlite3_errmsg(db_));
      sqlite3_reset(st);
    }
    sqlite3_finalize(st);
    exec("COMMIT");
  }
  SqlPoints(const SqlPoints&) = delete;
  SqlPoints& operator=(const SqlPoints&) = delete;
  ~SqlPoints() { sqlite3_close(db_); }

  std::set<std::size_t> select(const std::string& predicate) const {
    std::set<std::size_t> rows;
    sqlite3_stmt* st = nullptr;
    const std::string q = "SELECT id FROM pts WHERE " + predicate;
    if (sqlite3_prepare_v2(db_, q.c_str(), -1, &st, nullptr) != SQLITE_OK)
      throw std::runtime_error(std::string("bad predicate: ") + sqlite3_errmsg(db_));
    while (sqlite3_step(st) == SQLITE_ROW) rows.insert(std::size_t(sqlite3_column_int64(st, 0)));
    sqlite3_finalize(st);
    return rows;
  }

 private:
  void exec(const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "sqlite error";
      sqlite3_free(err);
      throw std::runtime_error(msg);
    }
  }

  sqlite3* db_ = nullptr;
};

}  // namespace fixtures
