#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace motionalign {

/// Raster image with 1 (gray) or 3 (RGB) interleaved channels, samples in [0,1].
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> data;

  Image() = default;
  Image(int w, int h, int c, float fill = 0.0f);

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  float at(int x, int y, int c = 0) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  float& at(int x, int y, int c = 0) { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
};

/// Single-channel luminance image, the estimator's working representation.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  GrayImage() = default;
  GrayImage(int w, int h, float fill = 0.0f);

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  bool same_shape(const GrayImage& other) const { return width == other.width && height == other.height; }
};

/// Coarse-to-fine pyramid; levels[0] is full resolution.
struct Pyramid {
  std::vector<GrayImage> levels;
  double scale_factor = 0.5;
};

inline constexpr int kMinPyramidSide = 8;

// Reads binary PGM (P5), binary PPM (P6) or 8-bit PNG. Samples are mapped v/255.
Image load_image(const std::filesystem::path& path);

// Writes P5 for gray images and P6 for RGB; samples are quantized round(v*255).
void write_pnm(const Image& img, const std::filesystem::path& path);
void write_png(const Image& img, const std::filesystem::path& path);
// Dispatches on extension: ".png" writes PNG, anything else PNM.
void write_image(const Image& img, const std::filesystem::path& path);

GrayImage to_grayscale(const Image& img);
Image to_image(const GrayImage& gray);

// Level k+1 is the 2x2 box average of level k (partial footprint on odd
// borders). Stops before the first level narrower or shorter than 8 pixels.
Pyramid build_pyramid(const GrayImage& img, int max_levels);

// Bilinear resample to (width, height) using pixel-center alignment.
GrayImage resize_bilinear(const GrayImage& img, int width, int height);
Image resize_bilinear(const Image& img, int width, int height);

}  // namespace motionalign
