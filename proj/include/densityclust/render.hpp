#pragma once

// SVG output: one even-odd filled path per cluster, optionally over a grayscale
// density image embedded as a PNG data URI.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <zlib.h>

#include "cluster_labeling.hpp"
#include "error.hpp"
#include "io.hpp"
#include "region_geometry.hpp"

namespace densityclust {

// Tableau 10.
inline constexpr std::array<const char*, 10> kPalette10 = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                                           "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

// Palette entry; indices past the first ten step around the hue wheel.
inline std::string palette_color(int index) {
  if (index >= 0 && index < int(kPalette10.size())) return kPalette10[std::size_t(index)];
  const double hue = std::fmod((index - 10) * 137.508, 360.0) / 60.0;
  const double c = 0.55, x = c * (1.0 - std::fabs(std::fmod(hue, 2.0) - 1.0)), m = 0.3;
  double r = 0, g = 0, b = 0;
  switch (int(hue)) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", int(std::lround((r + m) * 255)), int(std::lround((g + m) * 255)),
                int(std::lround((b + m) * 255)));
  return buf;
}

namespace detail {

inline std::string base64(const std::string& bytes) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < bytes.size(); i += 3) {
    std::uint32_t chunk = std::uint32_t(static_cast<unsigned char>(bytes[i])) << 16;
    if (i + 1 < bytes.size()) chunk |= std::uint32_t(static_cast<unsigned char>(bytes[i + 1])) << 8;
    if (i + 2 < bytes.size()) chunk |= std::uint32_t(static_cast<unsigned char>(bytes[i + 2]));
    out.push_back(kAlphabet[(chunk >> 18) & 63]);
    out.push_back(kAlphabet[(chunk >> 12) & 63]);
    out.push_back(i + 1 < bytes.size() ? kAlphabet[(chunk >> 6) & 63] : '=');
    out.push_back(i + 2 < bytes.size() ? kAlphabet[chunk & 63] : '=');
  }
  return out;
}

inline void png_chunk(std::string& out, const char* type, const std::string& data) {
  auto put32 = [&](std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<char>((v >> s) & 0xFF));
  };
  put32(static_cast<std::uint32_t>(data.size()));
  const std::string body = std::string(type, 4) + data;
  out += body;
  put32(static_cast<std::uint32_t>(crc32(0, reinterpret_cast<const Bytef*>(body.data()), uInt(body.size()))));
}

// 8-bit grayscale PNG; rows are given top to bottom.
inline std::string encode_gray_png(std::uint32_t width, std::uint32_t height, const std::vector<std::uint8_t>& pixels) {
  std::string raw;
  raw.reserve(std::size_t(height) * (width + 1));
  for (std::uint32_t y = 0; y < height; ++y) {
    raw.push_back('\0');
    raw.append(reinterpret_cast<const char*>(pixels.data()) + std::size_t(y) * width, width);
  }
  uLongf packed_size = compressBound(uLong(raw.size()));
  std::string packed(packed_size, '\0');
  if (compress2(reinterpret_cast<Bytef*>(packed.data()), &packed_size, reinterpret_cast<const Bytef*>(raw.data()),
                uLong(raw.size()), 6) != Z_OK)
    throw Error(ErrorKind::internal, "PNG compression failed");
  packed.resize(packed_size);

  std::string header;
  for (std::uint32_t v : {width, height})
    for (int s = 24; s >= 0; s -= 8) header.push_back(static_cast<char>((v >> s) & 0xFF));
  header += std::string("\x08\x00\x00\x00\x00", 5);  // depth 8, grayscale, deflate, no filter, no interlace

  std::string png("\x89PNG\r\n\x1a\n", 8);
  png_chunk(png, "IHDR", header);
  png_chunk(png, "IDAT", packed);
  png_chunk(png, "IEND", "");
  return png;
}

}  // namespace detail

inline std::string render_svg(const ClusterDocument& doc, const DensityDump* underlay = nullptr) {
  const auto& vp = doc.viewport;
  const std::string w = std::to_string(vp.width), h = std::to_string(vp.height);
  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + w + "\" height=\"" + h + "\" viewBox=\"0 0 " + w +
         " " + h + "\">\n";
  svg += "<rect width=\"" + w + "\" height=\"" + h + "\" fill=\"#ffffff\"/>\n";

  if (underlay) {
    if (underlay->width != vp.width || underlay->height != vp.height)
      throw Error(ErrorKind::structural, "density underlay dimensions do not match the cluster viewport");
    float peak = 0.0f;
    for (float v : underlay->values) peak = std::max(peak, v);
    std::vector<std::uint8_t> gray(underlay->values.size(), 255);
    for (std::uint32_t y = 0; y < vp.height; ++y)
      for (std::uint32_t x = 0; x < vp.width; ++x) {
        const float v = underlay->values[std::size_t(y) * vp.width + x];
        const double t = peak > 0.0f ? std::clamp(double(v) / peak, 0.0, 1.0) : 0.0;
        gray[std::size_t(vp.height - 1 - y) * vp.width + x] = static_cast<std::uint8_t>(std::lround(255.0 - 200.0 * t));
      }
    svg += "<image x=\"0\" y=\"0\" width=\"" + w + "\" height=\"" + h +
           "\" preserveAspectRatio=\"none\" style=\"image-rendering:pixelated\" href=\"data:image/png;base64," +
           detail::base64(detail::encode_gray_png(vp.width, vp.height, gray)) + "\"/>\n";
  }

  auto ring_path = [&](const PolygonRing& ring, std::string& d) {
    for (std::size_t i = 0; i < ring.vertices.size(); ++i) {
      const auto& v = ring.vertices[i];
      d += i == 0 ? "M" : "L";
      // Pixel corners are integers; strip the rounding left by the data-space round trip.
      const double px = std::round(v.x * 1e6) / 1e6, py = std::round(v.y * 1e6) / 1e6;
      d += format_number(px) + " " + format_number(double(vp.height) - py);
    }
    d += "Z";
  };

  for (const auto& rec : doc.clusters) {
    const ClusterShape shape = pixel_space_shape(doc, rec);
    std::string d;
    ring_path(shape.outer, d);
    for (const auto& hole : shape.holes) ring_path(hole, d);
    svg += "<path data-cluster=\"" + std::to_string(rec.id) + "\" fill=\"" + palette_color(rec.color) +
           "\" fill-opacity=\"0.6\" fill-rule=\"evenodd\" stroke=\"#333333\" stroke-width=\"0.5\" d=\"" + d + "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace densityclust
