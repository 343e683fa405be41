#pragma once

// Cluster regions as polygons and rectangle covers.
//
// Rings follow pixel-cell edges ("cracks"), so every vertex is an integer pixel
// corner and the polygon rasterizes back to exactly the region it came from.
// Outer rings are counterclockwise and holes clockwise in a y-up frame.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cluster_engine.hpp"
#include "error.hpp"
#include "grid_density.hpp"
#include "neighborhood.hpp"

namespace densityclust {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

struct PolygonRing {
  std::vector<Vec2> vertices;  // closing vertex is implied

  // Shoelace area; positive for counterclockwise rings.
  double signed_area() const noexcept {
    double twice = 0.0;
    for (std::size_t i = 0, n = vertices.size(); i < n; ++i) {
      const auto& p = vertices[i];
      const auto& q = vertices[(i + 1) % n];
      twice += p.x * q.y - q.x * p.y;
    }
    return 0.5 * twice;
  }

  bool operator==(const PolygonRing&) const = default;
};

// Half-open box [x0, x1) x [y0, y1).
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double area() const noexcept { return (x1 - x0) * (y1 - y0); }
  bool contains(double x, double y) const noexcept { return x >= x0 && x < x1 && y >= y0 && y < y1; }
  bool operator==(const Rect&) const = default;
};

struct ClusterShape {
  ClusterId cluster_id = kBackground;
  PolygonRing outer;
  std::vector<PolygonRing> holes;
  std::vector<Rect> rects;
};

// Pixel bounding box [x0, x1) x [y0, y1) of one cluster.
struct PixelBounds {
  std::uint32_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool empty() const noexcept { return x0 >= x1 || y0 >= y1; }
};

inline std::map<ClusterId, PixelBounds> cluster_bounds(const ClusterMap& cmap) {
  std::map<ClusterId, PixelBounds> out;
  for (std::uint32_t y = 0; y < cmap.height; ++y)
    for (std::uint32_t x = 0; x < cmap.width; ++x) {
      const ClusterId id = cmap.raw(x, y);
      if (id == kBackground) continue;
      auto [it, fresh] = out.try_emplace(id, PixelBounds{x, y, x + 1, y + 1});
      if (fresh) continue;
      auto& b = it->second;
      b.x0 = std::min(b.x0, x);
      b.x1 = std::max(b.x1, x + 1);
      b.y1 = std::max(b.y1, y + 1);
    }
  return out;
}

namespace detail {

inline PixelBounds bounds_of(const ClusterMap& cmap, ClusterId id) {
  PixelBounds b{cmap.width, cmap.height, 0, 0};
  for (std::uint32_t y = 0; y < cmap.height; ++y)
    for (std::uint32_t x = 0; x < cmap.width; ++x)
      if (cmap.raw(x, y) == id) {
        b.x0 = std::min(b.x0, x);
        b.y0 = std::min(b.y0, y);
        b.x1 = std::max(b.x1, x + 1);
        b.y1 = std::max(b.y1, y + 1);
      }
  if (b.empty()) throw Error(ErrorKind::not_found, "cluster " + std::to_string(id) + " not present");
  return b;
}

enum Dir : std::uint8_t { kEast = 0, kNorth = 1, kWest = 2, kSouth = 3 };
inline constexpr std::array<int, 4> kDirDx{1, 0, -1, 0};
inline constexpr std::array<int, 4> kDirDy{0, 1, 0, -1};

class CrackTracer {
 public:
  CrackTracer(const ClusterMap& cmap, ClusterId id, PixelBounds b, Connectivity connectivity)
      : cmap_(cmap), id_(id), b_(b), vw_(b.x1 - b.x0 + 1), vh_(b.y1 - b.y0 + 1),
        out_(std::size_t(vw_) * vh_, 0), used_(std::size_t(vw_) * vh_, 0),
        prefer_right_(connectivity == Connectivity::eight) {
    for (std::uint32_t y = b.y0; y < b.y1; ++y)
      for (std::uint32_t x = b.x0; x < b.x1; ++x) {
        if (!inside(x, y)) continue;
        if (!inside(x, std::int64_t(y) - 1)) add(x, y, kEast);
        if (!inside(std::int64_t(x) + 1, y)) add(x + 1, y, kNorth);
        if (!inside(x, std::int64_t(y) + 1)) add(x + 1, y + 1, kWest);
        if (!inside(std::int64_t(x) - 1, y)) add(x, y + 1, kSouth);
      }
  }

  std::vector<PolygonRing> rings() {
    std::vector<PolygonRing> result;
    for (std::uint32_t vy = 0; vy < vh_; ++vy)
      for (std::uint32_t vx = 0; vx < vw_; ++vx) {
        const std::size_t v = std::size_t(vy) * vw_ + vx;
        for (std::uint8_t d = 0; d < 4; ++d)
          if ((out_[v] & (1u << d)) && !(used_[v] & (1u << d))) result.push_back(trace(vx, vy, static_cast<Dir>(d)));
      }
    return result;
  }

 private:
  bool inside(std::int64_t x, std::int64_t y) const {
    if (x < std::int64_t(b_.x0) || y < std::int64_t(b_.y0) || x >= std::int64_t(b_.x1) || y >= std::int64_t(b_.y1))
      return false;
    return cmap_.raw(std::uint32_t(x), std::uint32_t(y)) == id_;
  }

  void add(std::uint32_t x, std::uint32_t y, Dir d) {
    out_[std::size_t(y - b_.y0) * vw_ + (x - b_.x0)] |= std::uint8_t(1u << d);
  }

  Dir choose(std::size_t v, Dir incoming) const {
    const std::uint8_t mask = out_[v];
    if ((mask & (mask - 1)) == 0) {
      for (std::uint8_t d = 0; d < 4; ++d)
        if (mask & (1u << d)) return static_cast<Dir>(d);
    }
    // Two outgoing cracks meet at a diagonal pinch; the turn decides whether the
    // diagonal pixels belong to one region (8-connected) or two (4-connected).
    const Dir right = static_cast<Dir>((incoming + 3) % 4);
    const Dir left = static_cast<Dir>((incoming + 1) % 4);
    return prefer_right_ ? right : left;
  }

  PolygonRing trace(std::uint32_t vx, std::uint32_t vy, Dir start) {
    std::vector<Vec2> corners;
    std::uint32_t x = vx, y = vy;
    Dir d = start;
    for (;;) {
      const std::size_t v = std::size_t(y) * vw_ + x;
      if (!(out_[v] & (1u << d))) throw Error(ErrorKind::internal, "crack tracer lost the boundary");
      used_[v] |= std::uint8_t(1u << d);
      x = std::uint32_t(std::int64_t(x) + kDirDx[d]);
      y = std::uint32_t(std::int64_t(y) + kDirDy[d]);
      const std::size_t next_v = std::size_t(y) * vw_ + x;
      const Dir next_d = choose(next_v, d);
      if (next_d != d) corners.push_back({double(x + b_.x0), double(y + b_.y0)});
      if (used_[next_v] & (1u << next_d)) break;
      d = next_d;
    }
    // Start every ring at its lowest, then leftmost, corner.
    auto lowest = std::min_element(corners.begin(), corners.end(), [](const Vec2& p, const Vec2& q) {
      return p.y < q.y || (p.y == q.y && p.x < q.x);
    });
    std::rotate(corners.begin(), lowest, corners.end());
    return PolygonRing{std::move(corners)};
  }

  const ClusterMap& cmap_;
  ClusterId id_;
  PixelBounds b_;
  std::uint32_t vw_, vh_;
  std::vector<std::uint8_t> out_;
  std::vector<std::uint8_t> used_;
  bool prefer_right_;
};

inline ClusterShape trace_in_bounds(const ClusterMap& cmap, ClusterId id, PixelBounds b, Connectivity connectivity) {
  CrackTracer tracer(cmap, id, b, connectivity);
  ClusterShape shape;
  shape.cluster_id = id;
  bool have_outer = false;
  for (auto& ring : tracer.rings()) {
    if (ring.signed_area() > 0.0) {
      if (have_outer)
        throw Error(ErrorKind::structural, "cluster " + std::to_string(id) + " region is not connected");
      shape.outer = std::move(ring);
      have_outer = true;
    } else {
      shape.holes.push_back(std::move(ring));
    }
  }
  if (!have_outer) throw Error(ErrorKind::internal, "no outer boundary traced");
  return shape;
}

inline std::vector<Rect> rects_in_bounds(const ClusterMap& cmap, ClusterId id, PixelBounds b) {
  std::vector<Rect> rects;
  std::vector<std::size_t> open, next_open;  // rect indices whose y1 equals the current row
  for (std::uint32_t y = b.y0; y < b.y1; ++y) {
    next_open.clear();
    std::size_t cursor = 0;
    std::uint32_t x = b.x0;
    while (x < b.x1) {
      if (cmap.raw(x, y) != id) {
        ++x;
        continue;
      }
      const std::uint32_t run_start = x;
      while (x < b.x1 && cmap.raw(x, y) == id) ++x;
      const double x0 = run_start, x1 = x;
      while (cursor < open.size() && rects[open[cursor]].x0 < x0) ++cursor;
      if (cursor < open.size() && rects[open[cursor]].x0 == x0 && rects[open[cursor]].x1 == x1) {
        rects[open[cursor]].y1 = y + 1.0;
        next_open.push_back(open[cursor]);
      } else {
        rects.push_back(Rect{x0, double(y), x1, y + 1.0});
        next_open.push_back(rects.size() - 1);
      }
    }
    std::swap(open, next_open);
  }
  return rects;
}

}  // namespace detail

// Outer ring and holes of a connected cluster region in pixel-corner coordinates.
inline ClusterShape trace_boundary(const ClusterMap& cmap, ClusterId cluster_id,
                                   Connectivity connectivity = Connectivity::eight) {
  return detail::trace_in_bounds(cmap, cluster_id, detail::bounds_of(cmap, cluster_id), connectivity);
}

// Maximal horizontal runs per row; a run continues the rectangle above it when
// the x-extent is identical. Rectangles are ordered by (y0, x0).
inline std::vector<Rect> decompose_rectangles(const ClusterMap& cmap, ClusterId cluster_id) {
  return detail::rects_in_bounds(cmap, cluster_id, detail::bounds_of(cmap, cluster_id));
}

// Shapes (rings plus rectangles) for every cluster, in ascending id order.
inline std::vector<ClusterShape> trace_all(const ClusterMap& cmap, Connectivity connectivity = Connectivity::eight) {
  std::vector<ClusterShape> shapes;
  for (const auto& [id, bounds] : cluster_bounds(cmap)) {
    auto shape = detail::trace_in_bounds(cmap, id, bounds, connectivity);
    shape.rects = detail::rects_in_bounds(cmap, id, bounds);
    shapes.push_back(std::move(shape));
  }
  return shapes;
}

inline Vec2 pixel_to_data(Vec2 p, const Viewport& vp) noexcept {
  return {vp.x_min + p.x * vp.sx(), vp.y_min + p.y * vp.sy()};
}

inline Vec2 data_to_pixel(Vec2 p, const Viewport& vp) noexcept {
  return {(p.x - vp.x_min) / vp.sx(), (p.y - vp.y_min) / vp.sy()};
}

namespace detail {

template <typename F>
ClusterShape map_shape(const ClusterShape& shape, F&& f) {
  ClusterShape out;
  out.cluster_id = shape.cluster_id;
  auto map_ring = [&](const PolygonRing& ring) {
    PolygonRing r;
    r.vertices.reserve(ring.vertices.size());
    for (const auto& v : ring.vertices) r.vertices.push_back(f(v));
    return r;
  };
  out.outer = map_ring(shape.outer);
  for (const auto& h : shape.holes) out.holes.push_back(map_ring(h));
  for (const auto& r : shape.rects) {
    const Vec2 lo = f(Vec2{r.x0, r.y0}), hi = f(Vec2{r.x1, r.y1});
    out.rects.push_back(Rect{lo.x, lo.y, hi.x, hi.y});
  }
  return out;
}

}  // namespace detail

inline ClusterShape to_data_space(const ClusterShape& shape, const Viewport& viewport) {
  viewport.validate();
  return detail::map_shape(shape, [&](Vec2 v) { return pixel_to_data(v, viewport); });
}

inline ClusterShape to_pixel_space(const ClusterShape& shape, const Viewport& viewport) {
  viewport.validate();
  return detail::map_shape(shape, [&](Vec2 v) { return data_to_pixel(v, viewport); });
}

struct Coloring {
  std::map<ClusterId, int> colors;
  std::size_t conflicts = 0;  // edges whose endpoints share a color
};

// Greedy coloring, highest degree first. Adjacent clusters always differ when
// palette_size exceeds the maximum degree; otherwise the color that clashes with
// the fewest already-colored neighbors is used.
inline Coloring color_clusters(const ClusterGraph& graph, int palette_size) {
  if (palette_size < 1) throw Error(ErrorKind::parameter, "palette size must be >= 1");
  std::map<ClusterId, std::vector<ClusterId>> adjacent;
  for (const auto& n : graph.nodes) adjacent[n.id];
  for (const auto& e : graph.edges) {
    adjacent[e.a].push_back(e.b);
    adjacent[e.b].push_back(e.a);
  }

  std::vector<ClusterId> order;
  for (const auto& [id, _] : adjacent) order.push_back(id);
  std::stable_sort(order.begin(), order.end(),
                   [&](ClusterId l, ClusterId r) { return adjacent[l].size() > adjacent[r].size(); });

  Coloring result;
  std::vector<std::size_t> clashes(static_cast<std::size_t>(palette_size));
  for (ClusterId id : order) {
    std::fill(clashes.begin(), clashes.end(), 0);
    for (ClusterId other : adjacent[id]) {
      auto it = result.colors.find(other);
      if (it != result.colors.end()) ++clashes[std::size_t(it->second)];
    }
    const auto best = std::min_element(clashes.begin(), clashes.end());
    result.colors[id] = static_cast<int>(best - clashes.begin());
  }
  for (const auto& e : graph.edges)
    if (result.colors[e.a] == result.colors[e.b]) ++result.conflicts;
  return result;
}

}  // namespace densityclust
