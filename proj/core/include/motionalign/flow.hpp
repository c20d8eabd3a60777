#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "motionalign/image.hpp"

namespace motionalign {

/// Dense displacement field in pixels; u is horizontal, v vertical, row-major.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<float> u;
  std::vector<float> v;

  FlowField() = default;
  FlowField(int w, int h, float fill_u = 0.0f, float fill_v = 0.0f);

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  bool same_shape(const FlowField& other) const { return width == other.width && height == other.height; }
};

/// Flow divided by the image diagonal sqrt(H^2 + W^2); dimensionless.
struct NormalizedFlow {
  int width = 0;
  int height = 0;
  std::vector<double> u;
  std::vector<double> v;
  double diag = 0.0;

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  bool same_shape(const NormalizedFlow& other) const { return width == other.width && height == other.height; }
};

struct ScalarField {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  // Row-major sum in index order; the fixed order keeps results reproducible.
  double mean() const;
  double max() const;
};

inline constexpr float kFloMagic = 202021.25f;

// Middlebury .flo: float32 magic, int32 width, int32 height, then interleaved
// (u, v) float32 pairs row-major. Everything little-endian.
FlowField read_flo(const std::filesystem::path& path);
void write_flo(const FlowField& flow, const std::filesystem::path& path);

double image_diagonal(int width, int height);
NormalizedFlow normalize_flow(const FlowField& flow);
FlowField denormalize_flow(const NormalizedFlow& flow);

ScalarField flow_magnitude(const NormalizedFlow& flow);

/// Color-wheel rendering: hue follows atan2(v, u), saturation is magnitude
/// over the 99th-percentile magnitude (clamped to 1), value is 1. Zero flow
/// renders white.
Image flow_to_color(const FlowField& flow);

// Bilinear resample of a field to a new resolution. Displacements are scaled
// by the per-axis size ratio so they stay in destination pixels.
FlowField resize_flow(const FlowField& flow, int width, int height);

}  // namespace motionalign
