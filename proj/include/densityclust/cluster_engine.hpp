#pragma once

// Clustering of a density map in four phases:
//   1. hill-climbing via a disjoint set (every pixel joins its densest neighbor),
//   2. a neighborhood graph summarizing the boundaries between those regions,
//   3. greedy union of regions whose peak sits close to a shared boundary,
//   4. truncation of every region below a fraction of its peak density.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <queue>
#include <unordered_map>
#include <utility>
#include <vector>

#include "disjoint_set.hpp"
#include "error.hpp"
#include "grid_density.hpp"
#include "neighborhood.hpp"

namespace densityclust {

using ClusterId = std::uint32_t;
inline constexpr ClusterId kBackground = std::numeric_limits<ClusterId>::max();

struct ClusterParams {
  double truncation_ratio = 0.1;
  double merge_distance_px = 8.0;
  Connectivity connectivity = Connectivity::eight;
  double min_peak_density = 0.0;

  void validate() const {
    if (!(truncation_ratio >= 0.0 && truncation_ratio < 1.0))
      throw Error(ErrorKind::parameter, "truncation ratio must lie in [0, 1)");
    if (!(merge_distance_px >= 0.0) || std::isnan(merge_distance_px))
      throw Error(ErrorKind::parameter, "merge distance must be >= 0");
    if (!(min_peak_density >= 0.0) || !std::isfinite(min_peak_density))
      throw Error(ErrorKind::parameter, "minimum peak density must be finite and >= 0");
    if (connectivity != Connectivity::four && connectivity != Connectivity::eight)
      throw Error(ErrorKind::parameter, "connectivity must be 4 or 8");
  }
};

struct ClusterMap {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<ClusterId> ids;  // kBackground where no cluster

  ClusterMap() = default;
  ClusterMap(std::uint32_t w, std::uint32_t h) : width(w), height(h), ids(std::size_t{w} * h, kBackground) {}

  std::size_t size() const noexcept { return ids.size(); }
  ClusterId raw(std::uint32_t x, std::uint32_t y) const { return ids[std::size_t{y} * width + x]; }

  std::optional<ClusterId> at(std::uint32_t x, std::uint32_t y) const {
    const ClusterId id = raw(x, y);
    if (id == kBackground) return std::nullopt;
    return id;
  }

  std::size_t count(ClusterId id) const { return static_cast<std::size_t>(std::count(ids.begin(), ids.end(), id)); }

  bool operator==(const ClusterMap&) const = default;
};

struct PixelXY {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  bool operator==(const PixelXY&) const = default;
};

struct ClusterNode {
  ClusterId id = kBackground;
  PixelXY peak;
  double peak_density = 0.0;
  std::size_t area_px = 0;
};

// Nearest boundary pixel (on one endpoint's side of an edge) to that endpoint's peak.
struct BoundaryNearest {
  double distance = std::numeric_limits<double>::infinity();
  PixelXY pixel;
};

struct ClusterEdge {
  ClusterId a = kBackground;  // a < b
  ClusterId b = kBackground;
  std::size_t boundary_px_count = 0;  // adjacent pixel pairs straddling the boundary
  double max_boundary_density = 0.0;
  BoundaryNearest nearest_a;
  BoundaryNearest nearest_b;

  double merge_score() const noexcept { return std::min(nearest_a.distance, nearest_b.distance); }
};

struct ClusterGraph {
  std::vector<ClusterNode> nodes;  // sorted by id
  std::vector<ClusterEdge> edges;  // sorted by (a, b)

  const ClusterNode* node(ClusterId id) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                               [](const ClusterNode& n, ClusterId v) { return n.id < v; });
    return it != nodes.end() && it->id == id ? &*it : nullptr;
  }

  const ClusterEdge* edge(ClusterId u, ClusterId v) const {
    if (u > v) std::swap(u, v);
    auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{u, v},
                               [](const ClusterEdge& e, std::pair<ClusterId, ClusterId> k) {
                                 return std::pair{e.a, e.b} < k;
                               });
    return it != edges.end() && it->a == u && it->b == v ? &*it : nullptr;
  }

  std::size_t degree(ClusterId id) const {
    return static_cast<std::size_t>(
        std::count_if(edges.begin(), edges.end(), [id](const ClusterEdge& e) { return e.a == id || e.b == id; }));
  }
};

namespace detail {

inline double pixel_distance(PixelXY p, PixelXY q) noexcept {
  const double dx = double(p.x) - double(q.x);
  const double dy = double(p.y) - double(q.y);
  return std::sqrt(dx * dx + dy * dy);
}

inline std::size_t linear(PixelXY p, std::uint32_t width) noexcept { return std::size_t{p.y} * width + p.x; }

// Keeps the closer candidate; equal distances prefer the smaller linear index.
inline void offer_nearest(BoundaryNearest& slot, double distance, PixelXY pixel, std::uint32_t width) noexcept {
  if (distance < slot.distance ||
      (distance == slot.distance && linear(pixel, width) < linear(slot.pixel, width))) {
    slot.distance = distance;
    slot.pixel = pixel;
  }
}

inline void check_dimensions(const DensityMap& density, const ClusterMap& cmap) {
  if (cmap.width != density.width() || cmap.height != density.height() || cmap.size() != density.size())
    throw Error(ErrorKind::structural, "cluster map dimensions do not match density map");
}

}  // namespace detail

// Every positive pixel is united with its top-ranked neighbor when that
// neighbor's density is >= its own; zero pixels are background. Identifiers are
// handed out in row-major order of each set's first pixel.
inline ClusterMap initial_clusters(const DensityMap& density, Connectivity connectivity = Connectivity::eight) {
  density.validate();
  const std::uint32_t w = density.width(), h = density.height();
  const double* d = density.values.data();

  DisjointSet sets(density.size());
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      const std::size_t idx = std::size_t{y} * w + x;
      if (d[idx] <= 0.0) continue;
      std::size_t best = idx;
      double best_d = -1.0;
      for_each_neighbor(x, y, w, h, connectivity, [&](std::size_t n) {
        if (best_d < 0.0 || ranks_above(d[n], n, best_d, best)) {
          best = n;
          best_d = d[n];
        }
      });
      if (best != idx && best_d >= d[idx])
        sets.unite(static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(best));
    }
  }

  ClusterMap cmap(w, h);
  std::vector<ClusterId> root_id(density.size(), kBackground);
  ClusterId next = 0;
  for (std::size_t idx = 0; idx < density.size(); ++idx) {
    if (d[idx] <= 0.0) continue;
    const auto root = sets.find(static_cast<std::uint32_t>(idx));
    if (root_id[root] == kBackground) root_id[root] = next++;
    cmap.ids[idx] = root_id[root];
  }
  return cmap;
}

// Node peaks/areas and boundary summaries between every pair of touching regions.
inline ClusterGraph build_neighborhood_graph(const DensityMap& density, const ClusterMap& cmap,
                                             Connectivity connectivity = Connectivity::eight) {
  detail::check_dimensions(density, cmap);
  const std::uint32_t w = cmap.width, h = cmap.height;
  const double* d = density.values.data();

  ClusterId max_id = 0;
  bool any = false;
  for (ClusterId id : cmap.ids)
    if (id != kBackground) {
      max_id = std::max(max_id, id);
      any = true;
    }

  ClusterGraph graph;
  if (!any) return graph;

  std::vector<ClusterNode> by_id(std::size_t{max_id} + 1);
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      const std::size_t idx = std::size_t{y} * w + x;
      const ClusterId id = cmap.ids[idx];
      if (id == kBackground) continue;
      auto& node = by_id[id];
      if (node.area_px == 0 || d[idx] > node.peak_density) {
        node.id = id;
        node.peak = {x, y};
        node.peak_density = d[idx];
      }
      ++node.area_px;
    }
  }

  std::unordered_map<std::uint64_t, std::size_t> edge_index;
  std::vector<ClusterEdge> edges;
  const ClusterId* ids = cmap.ids.data();
  auto record = [&](std::size_t idx, std::size_t n) {
    const ClusterId c1 = ids[idx], c2 = ids[n];
    const ClusterId lo = std::min(c1, c2), hi = std::max(c1, c2);
    const std::uint64_t key = (std::uint64_t{lo} << 32) | hi;
    auto [it, inserted] = edge_index.try_emplace(key, edges.size());
    if (inserted) {
      ClusterEdge fresh;
      fresh.a = lo;
      fresh.b = hi;
      edges.push_back(fresh);
    }
    auto& e = edges[it->second];
    ++e.boundary_px_count;
    e.max_boundary_density = std::max({e.max_boundary_density, d[idx], d[n]});
    const PixelXY p{std::uint32_t(idx % w), std::uint32_t(idx / w)}, q{std::uint32_t(n % w), std::uint32_t(n / w)};
    const PixelXY lo_px = c1 == lo ? p : q;
    const PixelXY hi_px = c1 == lo ? q : p;
    detail::offer_nearest(e.nearest_a, detail::pixel_distance(by_id[lo].peak, lo_px), lo_px, w);
    detail::offer_nearest(e.nearest_b, detail::pixel_distance(by_id[hi].peak, hi_px), hi_px, w);
  };

  // Each unordered pixel pair is visited once: right, down, and for 8-connectivity
  // the two lower diagonals.
  const bool diagonal = connectivity == Connectivity::eight;
  for (std::uint32_t y = 0; y < h; ++y) {
    const bool has_down = y + 1 < h;
    for (std::uint32_t x = 0; x < w; ++x) {
      const std::size_t idx = std::size_t{y} * w + x;
      const ClusterId c = ids[idx];
      if (c == kBackground) continue;
      auto visit = [&](std::size_t n) {
        if (ids[n] != c && ids[n] != kBackground) record(idx, n);
      };
      if (x + 1 < w) visit(idx + 1);
      if (!has_down) continue;
      visit(idx + w);
      if (diagonal) {
        if (x > 0) visit(idx + w - 1);
        if (x + 1 < w) visit(idx + w + 1);
      }
    }
  }

  for (auto& node : by_id)
    if (node.area_px > 0) graph.nodes.push_back(node);
  std::sort(edges.begin(), edges.end(),
            [](const ClusterEdge& l, const ClusterEdge& r) { return std::pair{l.a, l.b} < std::pair{r.a, r.b}; });
  graph.edges = std::move(edges);
  return graph;
}

namespace detail {

// Mutable graph used while greedily merging clusters.
class MergeState {
 public:
  MergeState(const ClusterGraph& graph, std::uint32_t width) : width_(width) {
    ClusterId max_id = 0;
    for (const auto& n : graph.nodes) max_id = std::max(max_id, n.id);
    const std::size_t count = graph.nodes.empty() ? 0 : std::size_t{max_id} + 1;
    nodes_.resize(count);
    alive_.assign(count, false);
    merged_into_.assign(count, kBackground);
    adjacency_.resize(count);
    for (const auto& n : graph.nodes) {
      nodes_[n.id] = n;
      alive_[n.id] = true;
    }
    for (const auto& e : graph.edges) {
      if (e.a >= count || e.b >= count || !alive_[e.a] || !alive_[e.b] || e.a == e.b)
        throw Error(ErrorKind::structural, "edge references an unknown cluster");
      const std::size_t slot = edges_.size();
      edges_.push_back({e, true, 0});
      adjacency_[e.a][e.b] = slot;
      adjacency_[e.b][e.a] = slot;
      push(slot);
    }
  }

  void run(double threshold) {
    while (!queue_.empty()) {
      const Entry top = queue_.top();
      queue_.pop();
      const auto& slot = edges_[top.slot];
      if (!slot.alive || slot.version != top.version) continue;
      if (top.score > threshold) break;
      merge(slot.edge.a, slot.edge.b);
    }
  }

  ClusterId resolve(ClusterId id) {
    ClusterId root = id;
    while (merged_into_[root] != kBackground) root = merged_into_[root];
    while (merged_into_[id] != kBackground) {
      const ClusterId next = merged_into_[id];
      merged_into_[id] = root;
      id = next;
    }
    return root;
  }

  ClusterGraph graph() const {
    ClusterGraph g;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (alive_[i]) g.nodes.push_back(nodes_[i]);
    for (const auto& s : edges_)
      if (s.alive) g.edges.push_back(s.edge);
    std::sort(g.edges.begin(), g.edges.end(),
              [](const ClusterEdge& l, const ClusterEdge& r) { return std::pair{l.a, l.b} < std::pair{r.a, r.b}; });
    return g;
  }

 private:
  struct Slot {
    ClusterEdge edge;
    bool alive;
    std::uint32_t version;
  };

  struct Entry {
    double score;
    ClusterId a;
    ClusterId b;
    std::uint32_t version;
    std::size_t slot;

    // std::priority_queue is a max-heap; invert so the smallest score pops first.
    bool operator<(const Entry& o) const noexcept {
      if (score != o.score) return score > o.score;
      if (a != o.a) return a > o.a;
      return b > o.b;
    }
  };

  void push(std::size_t slot) {
    const auto& s = edges_[slot];
    queue_.push({s.edge.merge_score(), s.edge.a, s.edge.b, s.version, slot});
  }

  BoundaryNearest& side(ClusterEdge& e, ClusterId id) { return e.a == id ? e.nearest_a : e.nearest_b; }

  void merge(ClusterId u, ClusterId v) {
    const auto& nu = nodes_[u];
    const auto& nv = nodes_[v];
    const bool u_wins = ranks_above(nu.peak_density, linear(nu.peak, width_), nv.peak_density, linear(nv.peak, width_));
    const ClusterId keep = u_wins ? u : v;
    const ClusterId gone = u_wins ? v : u;

    nodes_[keep].area_px += nodes_[gone].area_px;
    alive_[gone] = false;
    merged_into_[gone] = keep;
    const PixelXY peak = nodes_[keep].peak;

    edges_[adjacency_[keep].at(gone)].alive = false;
    adjacency_[keep].erase(gone);
    adjacency_[gone].erase(keep);

    // Sorted so that the order of queue pushes does not depend on hashing.
    std::vector<std::pair<ClusterId, std::size_t>> moved(adjacency_[gone].begin(), adjacency_[gone].end());
    std::sort(moved.begin(), moved.end());
    adjacency_[gone].clear();

    for (const auto& [other, slot_index] : moved) {
      ClusterEdge moving = edges_[slot_index].edge;
      BoundaryNearest gone_side = side(moving, gone);
      const BoundaryNearest other_side = side(moving, other);
      gone_side.distance = pixel_distance(peak, gone_side.pixel);
      adjacency_[other].erase(gone);

      auto existing = adjacency_[keep].find(other);
      if (existing != adjacency_[keep].end()) {
        edges_[slot_index].alive = false;
        auto& target = edges_[existing->second];
        target.edge.boundary_px_count += moving.boundary_px_count;
        target.edge.max_boundary_density = std::max(target.edge.max_boundary_density, moving.max_boundary_density);
        offer_nearest(side(target.edge, keep), gone_side.distance, gone_side.pixel, width_);
        offer_nearest(side(target.edge, other), other_side.distance, other_side.pixel, width_);
        ++target.version;
        push(existing->second);
      } else {
        auto& target = edges_[slot_index];
        target.edge.a = std::min(keep, other);
        target.edge.b = std::max(keep, other);
        side(target.edge, keep) = gone_side;
        side(target.edge, other) = other_side;
        ++target.version;
        adjacency_[keep][other] = slot_index;
        adjacency_[other][keep] = slot_index;
        push(slot_index);
      }
    }
  }

  std::uint32_t width_;
  std::vector<ClusterNode> nodes_;
  std::vector<bool> alive_;
  std::vector<ClusterId> merged_into_;
  std::vector<std::unordered_map<ClusterId, std::size_t>> adjacency_;
  std::vector<Slot> edges_;
  std::priority_queue<Entry> queue_;
};

}  // namespace detail

// Greedily merges the edge with the smallest peak-to-boundary distance while that
// distance is <= params.merge_distance_px. The taller peak survives (equal peaks:
// the one with the smaller linear pixel index).
inline std::pair<ClusterGraph, ClusterMap> union_clusters(const ClusterGraph& graph, const ClusterMap& cmap,
                                                          const ClusterParams& params) {
  params.validate();
  detail::MergeState state(graph, cmap.width);
  state.run(params.merge_distance_px);

  std::vector<ClusterId> survivor;
  for (const auto& n : graph.nodes) {
    if (n.id >= survivor.size()) survivor.resize(std::size_t{n.id} + 1, kBackground);
    survivor[n.id] = state.resolve(n.id);
  }
  ClusterMap out = cmap;
  for (auto& id : out.ids) {
    if (id == kBackground) continue;
    if (id >= survivor.size() || survivor[id] == kBackground)
      throw Error(ErrorKind::structural, "cluster map id missing from graph");
    id = survivor[id];
  }
  return {state.graph(), std::move(out)};
}

// Drops pixels below truncation_ratio * peak, keeps only the piece connected to
// the peak, and removes clusters whose peak is <= min_peak_density. The returned
// graph is rebuilt from the truncated regions.
inline std::pair<ClusterGraph, ClusterMap> truncate_clusters(const DensityMap& density, const ClusterMap& cmap,
                                                             const ClusterGraph& graph, const ClusterParams& params) {
  params.validate();
  detail::check_dimensions(density, cmap);
  const std::uint32_t w = cmap.width, h = cmap.height;
  const double* d = density.values.data();

  std::vector<bool> known;
  for (const auto& n : graph.nodes) {
    if (n.id >= known.size()) known.resize(std::size_t{n.id} + 1, false);
    known[n.id] = true;
  }
  for (ClusterId id : cmap.ids)
    if (id != kBackground && (id >= known.size() || !known[id]))
      throw Error(ErrorKind::structural, "cluster map id missing from graph");

  // Grow each kept cluster from its peak through its own pixels at or above the
  // lower bound; everything not reached becomes background.
  ClusterMap out(w, h);
  std::vector<std::size_t> stack;
  for (const auto& n : graph.nodes) {
    if (n.peak_density <= params.min_peak_density) continue;
    const double lower_bound = params.truncation_ratio * n.peak_density;
    const std::size_t start = detail::linear(n.peak, w);
    if (cmap.ids[start] != n.id) throw Error(ErrorKind::structural, "cluster peak lies outside its region");
    out.ids[start] = n.id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      for_each_neighbor(std::uint32_t(cur % w), std::uint32_t(cur / w), w, h, params.connectivity,
                        [&](std::size_t next) {
                          if (out.ids[next] == kBackground && cmap.ids[next] == n.id && d[next] >= lower_bound) {
                            out.ids[next] = n.id;
                            stack.push_back(next);
                          }
                        });
    }
  }

  return {build_neighborhood_graph(density, out, params.connectivity), std::move(out)};
}

struct PhaseCounts {
  std::size_t initial = 0;
  std::size_t merged = 0;
  std::size_t truncated = 0;
};

struct ClusterResult {
  ClusterMap cmap;
  ClusterGraph graph;
  PhaseCounts phases;
};

// Full pipeline. Final identifiers are renumbered 0..K-1 preserving order.
inline ClusterResult cluster_density_map(const DensityMap& density, const ClusterParams& params = {}) {
  params.validate();
  density.validate();

  ClusterResult result;
  ClusterMap initial = initial_clusters(density, params.connectivity);
  ClusterGraph graph = build_neighborhood_graph(density, initial, params.connectivity);
  result.phases.initial = graph.nodes.size();

  auto [merged_graph, merged_map] = union_clusters(graph, initial, params);
  result.phases.merged = merged_graph.nodes.size();

  auto [final_graph, final_map] = truncate_clusters(density, merged_map, merged_graph, params);
  result.phases.truncated = final_graph.nodes.size();

  std::vector<ClusterId> remap;
  for (std::size_t i = 0; i < final_graph.nodes.size(); ++i) {
    auto& node = final_graph.nodes[i];
    if (node.id >= remap.size()) remap.resize(std::size_t{node.id} + 1, kBackground);
    remap[node.id] = static_cast<ClusterId>(i);
    node.id = static_cast<ClusterId>(i);
  }
  for (auto& e : final_graph.edges) {
    e.a = remap[e.a];
    e.b = remap[e.b];
  }
  for (auto& id : final_map.ids)
    if (id != kBackground) id = remap[id];

  result.cmap = std::move(final_map);
  result.graph = std::move(final_graph);
  return result;
}

}  // namespace densityclust
