#include "motionalign/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "detail/sampling.hpp"
#include "motionalign/error.hpp"

namespace motionalign {

namespace fs = std::filesystem;

Image::Image(int w, int h, int c, float fill)
    : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

GrayImage::GrayImage(int w, int h, float fill)
    : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

namespace {

std::vector<std::uint8_t> read_all(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error(ErrorKind::MissingFile, path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};

// Minimal cursor over a PNM header: magic, width, height, maxval, then exactly
// one whitespace byte before the raster. '#' comments are skipped.
class PnmHeaderReader {
 public:
  PnmHeaderReader(const std::vector<std::uint8_t>& bytes, const fs::path& path) : bytes_(bytes), path_(path) {}

  long next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw Error(ErrorKind::CorruptData, "malformed PNM header in " + path_.string());
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_++] - '0');
      if (value > 1'000'000'000L) throw Error(ErrorKind::CorruptData, "PNM header value overflow");
    }
    return value;
  }

  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorKind::CorruptData, "missing raster separator in " + path_.string());
    }
    return pos_ + 1;
  }

  void seek(std::size_t pos) { pos_ = pos; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  const fs::path& path_;
  std::size_t pos_ = 0;
};

Image decode_pnm(const std::vector<std::uint8_t>& bytes, const fs::path& path) {
  const char kind = static_cast<char>(bytes[1]);
  if (kind != '5' && kind != '6') {
    throw Error(ErrorKind::UnsupportedFormat, std::string("PNM variant P") + kind + " in " + path.string());
  }
  PnmHeaderReader header(bytes, path);
  header.seek(2);
  const long width = header.next_int();
  const long height = header.next_int();
  const long maxval = header.next_int();
  if (maxval != 255) {
    throw Error(ErrorKind::UnsupportedFormat, "only 8-bit PNM (maxval 255) is supported: " + path.string());
  }
  if (width <= 0 || height <= 0) throw Error(ErrorKind::CorruptData, "zero-sized PNM " + path.string());
  const int channels = kind == '5' ? 1 : 3;
  const std::size_t offset = header.raster_offset();
  const std::size_t expected = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() < offset + expected) {
    throw Error(ErrorKind::CorruptData, "truncated PNM payload in " + path.string());
  }
  Image img(static_cast<int>(width), static_cast<int>(height), channels);
  for (std::size_t i = 0; i < expected; ++i) img.data[i] = static_cast<float>(bytes[offset + i]) / 255.0f;
  return img;
}

Image decode_png(const std::vector<std::uint8_t>& bytes, const fs::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw Error(ErrorKind::CorruptData, std::string("PNG header: ") + png.message + " in " + path.string());
  }
  if (png.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&png);
    throw Error(ErrorKind::UnsupportedFormat, "16-bit PNG is not supported: " + path.string());
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  std::vector<std::uint8_t> raster(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, raster.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw Error(ErrorKind::CorruptData, "PNG payload: " + message + " in " + path.string());
  }
  Image img(static_cast<int>(png.width), static_cast<int>(png.height), channels);
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<float>(raster[i]) / 255.0f;
  return img;
}

std::uint8_t quantize(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

void check_writable(const Image& img) {
  if (img.width <= 0 || img.height <= 0) throw Error(ErrorKind::EmptyImage, "cannot write an empty image");
  if (img.channels != 1 && img.channels != 3) {
    throw Error(ErrorKind::UnsupportedFormat, "only 1 or 3 channel images can be written");
  }
}

}  // namespace

Image load_image(const fs::path& path) {
  const auto bytes = read_all(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && std::isdigit(bytes[1])) return decode_pnm(bytes, path);
  if (bytes.size() >= 8 && std::equal(std::begin(kPngSignature), std::end(kPngSignature), bytes.begin())) {
    return decode_png(bytes, path);
  }
  if (bytes.size() < 8) throw Error(ErrorKind::CorruptData, "file too short for any image header: " + path.string());
  throw Error(ErrorKind::UnsupportedFormat, "unrecognized image format: " + path.string());
}

void write_pnm(const Image& img, const fs::path& path) {
  check_writable(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  out << (img.channels == 1 ? "P5" : "P6") << '\n' << img.width << ' ' << img.height << "\n255\n";
  std::vector<char> raster(img.data.size());
  std::transform(img.data.begin(), img.data.end(), raster.begin(), [](float v) { return static_cast<char>(quantize(v)); });
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

void write_png(const Image& img, const fs::path& path) {
  check_writable(img);
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> raster(img.data.size());
  std::transform(img.data.begin(), img.data.end(), raster.begin(), quantize);
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, raster.data(), 0, nullptr)) {
    throw Error(ErrorKind::IoFailure, std::string("PNG write: ") + png.message + " for " + path.string());
  }
}

void write_image(const Image& img, const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") {
    write_png(img, path);
  } else {
    write_pnm(img, path);
  }
}

GrayImage to_grayscale(const Image& img) {
  if (img.channels != 1 && img.channels != 3) {
    throw Error(ErrorKind::UnsupportedFormat, "to_grayscale expects 1 or 3 channels");
  }
  GrayImage gray(img.width, img.height);
  if (img.channels == 1) {
    gray.data = img.data;
    return gray;
  }
  // Rec.601 luma.
  for (std::size_t i = 0; i < gray.data.size(); ++i) {
    const float* rgb = &img.data[i * 3];
    const double luma = 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
    gray.data[i] = static_cast<float>(std::clamp(luma, 0.0, 1.0));
  }
  return gray;
}

Image to_image(const GrayImage& gray) {
  Image img(gray.width, gray.height, 1);
  img.data = gray.data;
  return img;
}

Pyramid build_pyramid(const GrayImage& img, int max_levels) {
  if (img.width <= 0 || img.height <= 0) throw Error(ErrorKind::EmptyImage, "cannot build a pyramid of an empty image");
  if (max_levels < 1) throw Error(ErrorKind::InvalidConfig, "max_levels must be >= 1");

  Pyramid pyr;
  pyr.levels.push_back(img);
  while (static_cast<int>(pyr.levels.size()) < max_levels) {
    const GrayImage& fine = pyr.levels.back();
    const int w = (fine.width + 1) / 2;
    const int h = (fine.height + 1) / 2;
    if (w < kMinPyramidSide || h < kMinPyramidSide) break;

    GrayImage coarse(w, h);
    for (int y = 0; y < h; ++y) {
      const int y0 = 2 * y;
      const int y1 = std::min(y0 + 1, fine.height - 1);
      for (int x = 0; x < w; ++x) {
        const int x0 = 2 * x;
        const int x1 = std::min(x0 + 1, fine.width - 1);
        double sum = 0.0;
        int n = 0;
        for (int yy = y0; yy <= y1; ++yy) {
          for (int xx = x0; xx <= x1; ++xx) {
            sum += fine.at(xx, yy);
            ++n;
          }
        }
        coarse.at(x, y) = static_cast<float>(sum / n);
      }
    }
    pyr.levels.push_back(std::move(coarse));
  }
  return pyr;
}

GrayImage resize_bilinear(const GrayImage& img, int width, int height) {
  if (width <= 0 || height <= 0 || img.width <= 0 || img.height <= 0) {
    throw Error(ErrorKind::EmptyImage, "resize to or from an empty image");
  }
  if (width == img.width && height == img.height) return img;
  GrayImage out(width, height);
  for (int y = 0; y < height; ++y) {
    const double sy = detail::resample_coord(y, height, img.height);
    for (int x = 0; x < width; ++x) {
      const double sx = detail::resample_coord(x, width, img.width);
      out.at(x, y) = static_cast<float>(detail::sample_bilinear(img.data.data(), img.width, img.height, 1, sx, sy));
    }
  }
  return out;
}

Image resize_bilinear(const Image& img, int width, int height) {
  if (width <= 0 || height <= 0 || img.width <= 0 || img.height <= 0) {
    throw Error(ErrorKind::EmptyImage, "resize to or from an empty image");
  }
  if (width == img.width && height == img.height) return img;
  Image out(width, height, img.channels);
  for (int y = 0; y < height; ++y) {
    const double sy = detail::resample_coord(y, height, img.height);
    for (int x = 0; x < width; ++x) {
      const double sx = detail::resample_coord(x, width, img.width);
      for (int c = 0; c < img.channels; ++c) {
        out.at(x, y, c) = static_cast<float>(
            detail::sample_bilinear(img.data.data() + c, img.width, img.height, img.channels, sx, sy));
      }
    }
  }
  return out;
}

}  // namespace motionalign
