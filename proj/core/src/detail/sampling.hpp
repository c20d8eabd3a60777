#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace motionalign::detail {

// Bilinear lookup in a row-major plane with element stride `stride`.
// Coordinates are clamped to the valid pixel-center range first, so samples
// outside the image replicate the border.
template <typename T>
inline double sample_bilinear(const T* plane, int width, int height, std::size_t stride, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  auto px = [&](int xi, int yi) {
    return static_cast<double>(plane[(static_cast<std::size_t>(yi) * width + xi) * stride]);
  };
  if (fx == 0.0 && fy == 0.0) return px(x0, y0);
  const double top = px(x0, y0) * (1.0 - fx) + px(x1, y0) * fx;
  const double bottom = px(x0, y1) * (1.0 - fx) + px(x1, y1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

// Maps a destination pixel center onto source coordinates for a resize.
inline double resample_coord(int dst, int dst_size, int src_size) {
  return (dst + 0.5) * static_cast<double>(src_size) / dst_size - 0.5;
}

}  // namespace motionalign::detail
