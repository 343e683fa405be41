#pragma once

// Point ingestion and kernel density estimation on a fixed pixel grid.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace densityclust {

struct Point2D {
  double x = 0.0;
  double y = 0.0;
  double weight = 1.0;
  std::optional<std::string> text;
};

// Maps the data rectangle [x_min, x_max] x [y_min, y_max] onto a width x height
// pixel grid. Pixel (0, 0) sits at (x_min, y_min); x is the column, y the row.
struct Viewport {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;
  std::uint32_t width = 1;
  std::uint32_t height = 1;

  double sx() const noexcept { return (x_max - x_min) / width; }
  double sy() const noexcept { return (y_max - y_min) / height; }
  std::size_t pixel_count() const noexcept { return std::size_t{width} * height; }

  bool valid() const noexcept {
    return std::isfinite(x_min) && std::isfinite(x_max) && std::isfinite(y_min) &&
           std::isfinite(y_max) && x_min < x_max && y_min < y_max && width >= 1 && height >= 1;
  }

  void validate() const {
    if (!valid()) throw Error(ErrorKind::parameter, "invalid viewport");
  }

  // Column/row of the pixel containing (x, y). Points on x_max / y_max land in
  // the last column / row; points outside the box yield nullopt.
  std::optional<std::pair<std::uint32_t, std::uint32_t>> pixel_of(double x, double y) const noexcept {
    if (!(x >= x_min && x <= x_max && y >= y_min && y <= y_max)) return std::nullopt;
    auto cell = [](double v, double lo, double hi, std::uint32_t n) {
      auto i = static_cast<std::int64_t>(std::floor((v - lo) / (hi - lo) * n));
      return static_cast<std::uint32_t>(std::clamp<std::int64_t>(i, 0, std::int64_t{n} - 1));
    };
    return std::pair{cell(x, x_min, x_max, width), cell(y, y_min, y_max, height)};
  }

  bool operator==(const Viewport&) const = default;
};

// Row-major grid of non-negative densities (index = y * width + x).
struct DensityMap {
  Viewport viewport;
  std::vector<double> values;

  DensityMap() = default;
  explicit DensityMap(const Viewport& vp) : viewport(vp), values(vp.pixel_count(), 0.0) {}
  DensityMap(const Viewport& vp, std::vector<double> v) : viewport(vp), values(std::move(v)) {
    validate();
  }

  std::uint32_t width() const noexcept { return viewport.width; }
  std::uint32_t height() const noexcept { return viewport.height; }
  std::size_t size() const noexcept { return values.size(); }

  double at(std::uint32_t x, std::uint32_t y) const { return values[std::size_t{y} * width() + x]; }
  double& at(std::uint32_t x, std::uint32_t y) { return values[std::size_t{y} * width() + x]; }

  double total() const noexcept {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }

  void validate() const {
    viewport.validate();
    if (values.size() != viewport.pixel_count())
      throw Error(ErrorKind::structural, "density map size does not match viewport dimensions");
    for (double v : values)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw Error(ErrorKind::data, "density values must be finite and non-negative");
  }
};

// Bounding box of the finite points, padded by padding_fraction of the span on
// each side. Zero-span axes are widened by 0.5 data units on each side.
inline Viewport auto_viewport(std::span<const Point2D> points, std::uint32_t width, std::uint32_t height,
                              double padding_fraction) {
  if (width < 1 || height < 1) throw Error(ErrorKind::parameter, "grid width and height must be >= 1");
  if (!(padding_fraction >= 0.0 && padding_fraction < 1.0))
    throw Error(ErrorKind::parameter, "padding fraction must lie in [0, 1)");

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  bool any = false;
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
    any = true;
    x_lo = std::min(x_lo, p.x);
    x_hi = std::max(x_hi, p.x);
    y_lo = std::min(y_lo, p.y);
    y_hi = std::max(y_hi, p.y);
  }
  if (!any) throw Error(ErrorKind::data, "no data");

  auto expand = [padding_fraction](double& lo, double& hi) {
    if (lo == hi) {
      lo -= 0.5;
      hi += 0.5;
      return;
    }
    const double pad = (hi - lo) * padding_fraction;
    lo -= pad;
    hi += pad;
  };
  expand(x_lo, x_hi);
  expand(y_lo, y_hi);
  return Viewport{x_lo, x_hi, y_lo, y_hi, width, height};
}

struct BinStats {
  std::size_t binned = 0;
  std::size_t outside = 0;
  std::size_t non_finite = 0;  // skipped with a warning by callers
};

inline DensityMap bin_points(std::span<const Point2D> points, const Viewport& viewport,
                             BinStats* stats = nullptr) {
  viewport.validate();
  DensityMap grid(viewport);
  BinStats local;
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.weight) || p.weight < 0.0) {
      ++local.non_finite;
      continue;
    }
    auto cell = viewport.pixel_of(p.x, p.y);
    if (!cell) {
      ++local.outside;
      continue;
    }
    grid.at(cell->first, cell->second) += p.weight;
    ++local.binned;
  }
  if (stats) *stats = local;
  return grid;
}

// Kernel radius in pixels for a Gaussian of standard deviation sigma.
inline constexpr double kKernelTruncationSigmas = 4.0;

inline int kernel_radius(double sigma) {
  return static_cast<int>(std::ceil(kKernelTruncationSigmas * sigma));
}

// Sampled Gaussian on [-radius, radius], truncated and renormalized to sum 1.
inline std::vector<double> gaussian_kernel_1d(double sigma) {
  const int r = kernel_radius(sigma);
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + r)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

inline double default_bandwidth_px(std::uint32_t width, std::uint32_t height) {
  return 0.01 * std::max(width, height);
}

// Separable Gaussian blur (x pass, then y pass) with zero padding.
inline DensityMap smooth(const DensityMap& counts, double bandwidth_px) {
  if (!(bandwidth_px >= 0.0) || !std::isfinite(bandwidth_px))
    throw Error(ErrorKind::parameter, "bandwidth must be finite and >= 0");
  counts.validate();
  if (bandwidth_px == 0.0) return counts;

  const auto kernel = gaussian_kernel_1d(bandwidth_px);
  const int r = kernel_radius(bandwidth_px);
  const int w = static_cast<int>(counts.width());
  const int h = static_cast<int>(counts.height());

  std::vector<double> tmp(counts.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    const double* row = counts.values.data() + std::size_t(y) * w;
    double* out = tmp.data() + std::size_t(y) * w;
    for (int x = 0; x < w; ++x) {
      const double v = row[x];
      if (v == 0.0) continue;
      const int lo = std::max(-r, -x), hi = std::min(r, w - 1 - x);
      for (int k = lo; k <= hi; ++k) out[x + k] += v * kernel[std::size_t(k + r)];
    }
  }

  DensityMap result(counts.viewport);
  for (int y = 0; y < h; ++y) {
    const double* src = tmp.data() + std::size_t(y) * w;
    const int lo = std::max(-r, -y), hi = std::min(r, h - 1 - y);
    for (int k = lo; k <= hi; ++k) {
      const double kv = kernel[std::size_t(k + r)];
      double* dst = result.values.data() + std::size_t(y + k) * w;
      for (int x = 0; x < w; ++x) dst[x] += src[x] * kv;
    }
  }
  return result;
}

}  // namespace densityclust
