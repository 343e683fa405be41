#pragma once

// Pixel adjacency and the ordering used to climb the density map. Both the
// disjoint-set pass and the path-following oracle use these definitions.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "error.hpp"

namespace densityclust {

enum class Connectivity : int { four = 4, eight = 8 };

struct Offset {
  int dx;
  int dy;
};

inline constexpr std::array<Offset, 8> kEightNeighbors{
    {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};
inline constexpr std::array<Offset, 4> kFourNeighbors{{{0, -1}, {-1, 0}, {1, 0}, {0, 1}}};

inline std::span<const Offset> neighbor_offsets(Connectivity c) {
  if (c == Connectivity::four) return kFourNeighbors;
  return kEightNeighbors;
}

// Calls f(neighbor_linear_index) for every in-grid neighbor of (x, y). Interior
// pixels skip the bounds checks.
template <typename F>
inline void for_each_neighbor(std::uint32_t x, std::uint32_t y, std::uint32_t w, std::uint32_t h, Connectivity c,
                              F&& f) {
  const std::size_t idx = std::size_t{y} * w + x;
  if (x > 0 && y > 0 && x + 1 < w && y + 1 < h) {
    f(idx - w);
    f(idx - 1);
    f(idx + 1);
    f(idx + w);
    if (c == Connectivity::eight) {
      f(idx - w - 1);
      f(idx - w + 1);
      f(idx + w - 1);
      f(idx + w + 1);
    }
    return;
  }
  for (const auto& o : neighbor_offsets(c)) {
    const std::int64_t nx = std::int64_t{x} + o.dx, ny = std::int64_t{y} + o.dy;
    if (nx < 0 || ny < 0 || nx >= std::int64_t{w} || ny >= std::int64_t{h}) continue;
    f(std::size_t(ny) * w + std::size_t(nx));
  }
}

// Strict ranking of pixels: higher density first, equal densities resolved
// toward the smaller linear index (y * width + x).
inline bool ranks_above(double density_a, std::size_t index_a, double density_b, std::size_t index_b) noexcept {
  return density_a > density_b || (density_a == density_b && index_a < index_b);
}

inline Connectivity parse_connectivity(int value) {
  if (value == 4) return Connectivity::four;
  if (value == 8) return Connectivity::eight;
  throw Error(ErrorKind::parameter, "connectivity must be 4 or 8, got " + std::to_string(value));
}

}  // namespace densityclust
