#pragma once

// Seeded Gaussian-mixture data for benchmarks and fixtures. Sampling uses only
// raw 64-bit engine output so results do not depend on the standard library's
// distribution implementations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "grid_density.hpp"

namespace densityclust {

class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t bits() { return engine_(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    do u = uniform(); while (u <= 0.0);
    const double v = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    spare_ = r * std::sin(2.0 * std::numbers::pi * v);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * v);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct GaussianComponent {
  double cx = 0.0;
  double cy = 0.0;
  double sigma = 1.0;
  double weight = 1.0;
};

// Random mixture on the square [0, extent]^2 with spreads proportional to extent.
inline std::vector<GaussianComponent> random_mixture(std::size_t count, double extent, SeededRng& rng) {
  std::vector<GaussianComponent> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    GaussianComponent g;
    g.cx = rng.uniform(0.05, 0.95) * extent;
    g.cy = rng.uniform(0.05, 0.95) * extent;
    g.sigma = rng.uniform(0.008, 0.025) * extent;
    g.weight = rng.uniform(0.5, 1.5);
    out.push_back(g);
  }
  return out;
}

inline std::vector<Point2D> sample_mixture(const std::vector<GaussianComponent>& mixture, std::size_t n,
                                           SeededRng& rng) {
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& g : mixture) cumulative.push_back(total += g.weight);
  std::vector<Point2D> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pick = rng.uniform() * total;
    auto k = std::size_t(std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
    k = std::min(k, mixture.size() - 1);
    const auto& g = mixture[k];
    points.push_back(Point2D{g.cx + g.sigma * rng.normal(), g.cy + g.sigma * rng.normal(), 1.0, std::nullopt});
  }
  return points;
}

// Mixture density evaluated at pixel centers; viewport covers [0, extent]^2.
inline DensityMap mixture_density(const std::vector<GaussianComponent>& mixture, std::uint32_t size, double extent) {
  Viewport vp{0.0, extent, 0.0, extent, size, size};
  DensityMap out(vp);
  const double step = extent / size;
  for (const auto& g : mixture) {
    const double reach = 4.0 * g.sigma;
    const auto lo_x = std::max<std::int64_t>(0, std::int64_t(std::floor((g.cx - reach) / step)));
    const auto hi_x = std::min<std::int64_t>(size - 1, std::int64_t(std::ceil((g.cx + reach) / step)));
    const auto lo_y = std::max<std::int64_t>(0, std::int64_t(std::floor((g.cy - reach) / step)));
    const auto hi_y = std::min<std::int64_t>(size - 1, std::int64_t(std::ceil((g.cy + reach) / step)));
    const double norm = g.weight / (2.0 * std::numbers::pi * g.sigma * g.sigma);
    for (auto y = lo_y; y <= hi_y; ++y)
      for (auto x = lo_x; x <= hi_x; ++x) {
        const double dx = (x + 0.5) * step - g.cx, dy = (y + 0.5) * step - g.cy;
        out.values[std::size_t(y) * size + std::size_t(x)] += norm * std::exp(-0.5 * (dx * dx + dy * dy) / (g.sigma * g.sigma));
      }
  }
  return out;
}

}  // namespace densityclust
