#pragma once

// Deliberately naive reference implementations. Tests compare the fast paths
// against these; nothing in the production pipeline calls them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "cluster_engine.hpp"
#include "grid_density.hpp"
#include "neighborhood.hpp"
#include "region_geometry.hpp"

namespace densityclust::oracle {

// Walks uphill from every positive pixel one step at a time. A step goes to the
// top-ranked neighbor when its density is >= the current one. On a plateau two
// pixels can point at each other; that pair is the walk's terminal and the walk
// is labeled by the smaller index of the pair. Any longer cycle is a bug.
inline ClusterMap steepest_ascent(const DensityMap& density, Connectivity connectivity = Connectivity::eight) {
  density.validate();
  const std::int64_t w = density.width(), h = density.height();
  const auto& d = density.values;
  const std::size_t n = d.size();

  auto step = [&](std::size_t idx) -> std::size_t {
    const std::int64_t x = std::int64_t(idx % std::size_t(w)), y = std::int64_t(idx / std::size_t(w));
    std::size_t best = n;
    for (const auto& o : neighbor_offsets(connectivity)) {
      const std::int64_t nx = x + o.dx, ny = y + o.dy;
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      const std::size_t cand = std::size_t(ny * w + nx);
      if (best == n || ranks_above(d[cand], cand, d[best], best)) best = cand;
    }
    return (best != n && d[best] >= d[idx]) ? best : idx;
  };

  std::vector<std::size_t> terminal(n, n);
  for (std::size_t start = 0; start < n; ++start) {
    if (d[start] <= 0.0) continue;
    std::size_t prev = n, cur = start;
    for (std::size_t steps = 0;; ++steps) {
      if (steps > n) throw Error(ErrorKind::internal, "steepest ascent did not terminate");
      const std::size_t next = step(cur);
      if (next == cur) {
        terminal[start] = cur;
        break;
      }
      if (next == prev) {
        terminal[start] = std::min(cur, prev);
        break;
      }
      prev = cur;
      cur = next;
    }
  }

  ClusterMap cmap(density.width(), density.height());
  std::vector<ClusterId> label_of(n, kBackground);
  ClusterId next_id = 0;
  for (std::size_t idx = 0; idx < n; ++idx) {
    if (terminal[idx] == n) continue;
    auto& label = label_of[terminal[idx]];
    if (label == kBackground) label = next_id++;
    cmap.ids[idx] = label;
  }
  return cmap;
}

inline constexpr std::size_t kDenseOracleMaxSide = 128;

// Direct 2D convolution with the same truncated, renormalized Gaussian used by smooth().
inline DensityMap dense_convolution(const DensityMap& counts, double sigma) {
  counts.validate();
  if (counts.width() > kDenseOracleMaxSide || counts.height() > kDenseOracleMaxSide)
    throw Error(ErrorKind::parameter, "dense convolution oracle is limited to 128x128 grids");
  if (!(sigma >= 0.0)) throw Error(ErrorKind::parameter, "sigma must be >= 0");
  if (sigma == 0.0) return counts;

  const int r = kernel_radius(sigma);
  std::vector<double> kernel(std::size_t(2 * r + 1) * std::size_t(2 * r + 1));
  double total = 0.0;
  for (int j = -r; j <= r; ++j)
    for (int i = -r; i <= r; ++i) {
      const double v = std::exp(-0.5 * (i * i + j * j) / (sigma * sigma));
      kernel[std::size_t(j + r) * std::size_t(2 * r + 1) + std::size_t(i + r)] = v;
      total += v;
    }
  for (double& v : kernel) v /= total;

  const int w = int(counts.width()), h = int(counts.height());
  DensityMap out(counts.viewport);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int j = -r; j <= r; ++j)
        for (int i = -r; i <= r; ++i) {
          const int sx = x - i, sy = y - j;
          if (sx < 0 || sy < 0 || sx >= w || sy >= h) continue;
          acc += counts.values[std::size_t(sy) * w + sx] * kernel[std::size_t(j + r) * std::size_t(2 * r + 1) + std::size_t(i + r)];
        }
      out.values[std::size_t(y) * w + x] = acc;
    }
  return out;
}

// Number of connected pieces of one cluster's pixels, by breadth-first flood fill.
inline std::size_t flood_fill_components(const ClusterMap& cmap, ClusterId id,
                                         Connectivity connectivity = Connectivity::eight) {
  const std::int64_t w = cmap.width, h = cmap.height;
  std::vector<bool> seen(cmap.size(), false);
  std::size_t components = 0;
  std::vector<std::size_t> queue;
  for (std::size_t start = 0; start < cmap.size(); ++start) {
    if (seen[start] || cmap.ids[start] != id) continue;
    ++components;
    queue.assign(1, start);
    seen[start] = true;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::int64_t x = std::int64_t(queue[head] % std::size_t(w)), y = std::int64_t(queue[head] / std::size_t(w));
      for (const auto& o : neighbor_offsets(connectivity)) {
        const std::int64_t nx = x + o.dx, ny = y + o.dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t next = std::size_t(ny * w + nx);
        if (seen[next] || cmap.ids[next] != id) continue;
        seen[next] = true;
        queue.push_back(next);
      }
    }
  }
  return components;
}

// Pixels whose centers fall inside the rings under the even-odd rule, by
// scanline crossing counts. Rings are in pixel-corner coordinates.
inline std::vector<bool> rasterize(const ClusterShape& shape, std::uint32_t width, std::uint32_t height) {
  std::vector<const PolygonRing*> rings{&shape.outer};
  for (const auto& h : shape.holes) rings.push_back(&h);
  std::vector<bool> filled(std::size_t{width} * height, false);
  std::vector<double> crossings;
  for (std::uint32_t y = 0; y < height; ++y) {
    const double cy = y + 0.5;
    crossings.clear();
    for (const auto* ring : rings) {
      const auto& v = ring->vertices;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 p = v[i], q = v[(i + 1) % v.size()];
        if ((p.y < cy) != (q.y < cy)) crossings.push_back(p.x + (cy - p.y) * (q.x - p.x) / (q.y - p.y));
      }
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2)
      for (std::uint32_t x = 0; x < width; ++x) {
        const double cx = x + 0.5;
        if (cx > crossings[k] && cx < crossings[k + 1]) filled[std::size_t{y} * width + x] = true;
      }
  }
  return filled;
}

// Even-odd point-in-polygon test over a shape's rings (any coordinate space).
inline bool point_in_shape(const ClusterShape& shape, double x, double y) {
  bool inside = false;
  auto ring_test = [&](const PolygonRing& ring) {
    const auto& v = ring.vertices;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
      if ((v[i].y > y) != (v[j].y > y) && x < (v[j].x - v[i].x) * (y - v[i].y) / (v[j].y - v[i].y) + v[i].x)
        inside = !inside;
    }
  };
  ring_test(shape.outer);
  for (const auto& h : shape.holes) ring_test(h);
  return inside;
}

}  // namespace densityclust::oracle
