#include "motionalign/flow.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>

#include "detail/sampling.hpp"
#include "motionalign/error.hpp"

namespace motionalign {

namespace fs = std::filesystem;

FlowField::FlowField(int w, int h, float fill_u, float fill_v)
    : width(w),
      height(h),
      u(static_cast<std::size_t>(w) * h, fill_u),
      v(static_cast<std::size_t>(w) * h, fill_v) {}

double ScalarField::mean() const {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double x : values) sum += x;
  return sum / static_cast<double>(values.size());
}

double ScalarField::max() const {
  double m = 0.0;
  for (double x : values) m = std::max(m, x);
  return m;
}

namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t value) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

std::uint32_t get_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

FlowField read_flo(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error(ErrorKind::MissingFile, path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};

  if (bytes.size() < 4 || get_u32le(bytes.data()) != std::bit_cast<std::uint32_t>(kFloMagic)) {
    throw Error(ErrorKind::BadMagic, path.string());
  }
  if (bytes.size() < 12) throw Error(ErrorKind::DimensionMismatch, "truncated .flo header: " + path.string());
  const auto width = static_cast<std::int32_t>(get_u32le(bytes.data() + 4));
  const auto height = static_cast<std::int32_t>(get_u32le(bytes.data() + 8));
  if (width < 0 || height < 0) throw Error(ErrorKind::DimensionMismatch, "negative .flo dimensions: " + path.string());
  const std::uint64_t payload = 8ull * static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
  if (bytes.size() - 12 != payload) {
    throw Error(ErrorKind::DimensionMismatch, "payload size does not match " + std::to_string(width) + "x" +
                                                  std::to_string(height) + " in " + path.string());
  }

  FlowField flow(width, height);
  const std::uint8_t* p = bytes.data() + 12;
  for (std::size_t i = 0; i < flow.pixel_count(); ++i, p += 8) {
    flow.u[i] = std::bit_cast<float>(get_u32le(p));
    flow.v[i] = std::bit_cast<float>(get_u32le(p + 4));
  }
  return flow;
}

void write_flo(const FlowField& flow, const fs::path& path) {
  if (flow.u.size() != flow.pixel_count() || flow.v.size() != flow.pixel_count()) {
    throw Error(ErrorKind::DimensionMismatch, "flow component size does not match its dimensions");
  }
  std::vector<std::uint8_t> bytes;
  bytes.reserve(12 + 8 * flow.pixel_count());
  put_u32le(bytes, std::bit_cast<std::uint32_t>(kFloMagic));
  put_u32le(bytes, static_cast<std::uint32_t>(flow.width));
  put_u32le(bytes, static_cast<std::uint32_t>(flow.height));
  for (std::size_t i = 0; i < flow.pixel_count(); ++i) {
    put_u32le(bytes, std::bit_cast<std::uint32_t>(flow.u[i]));
    put_u32le(bytes, std::bit_cast<std::uint32_t>(flow.v[i]));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

double image_diagonal(int width, int height) {
  return std::sqrt(static_cast<double>(height) * height + static_cast<double>(width) * width);
}

NormalizedFlow normalize_flow(const FlowField& flow) {
  NormalizedFlow out;
  out.width = flow.width;
  out.height = flow.height;
  out.diag = image_diagonal(flow.width, flow.height);
  out.u.resize(flow.pixel_count());
  out.v.resize(flow.pixel_count());
  for (std::size_t i = 0; i < flow.pixel_count(); ++i) {
    out.u[i] = static_cast<double>(flow.u[i]) / out.diag;
    out.v[i] = static_cast<double>(flow.v[i]) / out.diag;
  }
  return out;
}

FlowField denormalize_flow(const NormalizedFlow& flow) {
  FlowField out(flow.width, flow.height);
  for (std::size_t i = 0; i < flow.pixel_count(); ++i) {
    out.u[i] = static_cast<float>(flow.u[i] * flow.diag);
    out.v[i] = static_cast<float>(flow.v[i] * flow.diag);
  }
  return out;
}

ScalarField flow_magnitude(const NormalizedFlow& flow) {
  ScalarField out{flow.width, flow.height, std::vector<double>(flow.pixel_count())};
  for (std::size_t i = 0; i < flow.pixel_count(); ++i) out.values[i] = std::hypot(flow.u[i], flow.v[i]);
  return out;
}

namespace {

std::array<double, 3> hsv_to_rgb(double hue_deg, double sat, double val) {
  const double c = val * sat;
  const double h = hue_deg / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
  std::array<double, 3> rgb{};
  switch (static_cast<int>(h) % 6) {
    case 0: rgb = {c, x, 0}; break;
    case 1: rgb = {x, c, 0}; break;
    case 2: rgb = {0, c, x}; break;
    case 3: rgb = {0, x, c}; break;
    case 4: rgb = {x, 0, c}; break;
    default: rgb = {c, 0, x}; break;
  }
  const double m = val - c;
  for (double& ch : rgb) ch += m;
  return rgb;
}

}  // namespace

Image flow_to_color(const FlowField& flow) {
  const std::size_t n = flow.pixel_count();
  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i) mag[i] = std::hypot(static_cast<double>(flow.u[i]), static_cast<double>(flow.v[i]));

  double robust_max = 0.0;
  if (n > 0) {
    std::vector<double> sorted = mag;
    const std::size_t k = std::min(n - 1, static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(n))) - 1);
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
    robust_max = sorted[k];
  }

  Image img(flow.width, flow.height, 3, 1.0f);
  if (robust_max <= 0.0) return img;
  for (std::size_t i = 0; i < n; ++i) {
    if (mag[i] == 0.0) continue;
    double hue = std::atan2(static_cast<double>(flow.v[i]), static_cast<double>(flow.u[i])) * 180.0 / std::numbers::pi;
    if (hue < 0.0) hue += 360.0;
    const auto rgb = hsv_to_rgb(hue, std::min(1.0, mag[i] / robust_max), 1.0);
    for (int c = 0; c < 3; ++c) img.data[i * 3 + c] = static_cast<float>(rgb[c]);
  }
  return img;
}

FlowField resize_flow(const FlowField& flow, int width, int height) {
  if (width <= 0 || height <= 0 || flow.width <= 0 || flow.height <= 0) {
    throw Error(ErrorKind::EmptyImage, "resize to or from an empty flow field");
  }
  if (width == flow.width && height == flow.height) return flow;
  const double sx = static_cast<double>(width) / flow.width;
  const double sy = static_cast<double>(height) / flow.height;
  FlowField out(width, height);
  for (int y = 0; y < height; ++y) {
    const double cy = detail::resample_coord(y, height, flow.height);
    for (int x = 0; x < width; ++x) {
      const double cx = detail::resample_coord(x, width, flow.width);
      const std::size_t i = out.index(x, y);
      out.u[i] = static_cast<float>(sx * detail::sample_bilinear(flow.u.data(), flow.width, flow.height, 1, cx, cy));
      out.v[i] = static_cast<float>(sy * detail::sample_bilinear(flow.v.data(), flow.width, flow.height, 1, cx, cy));
    }
  }
  return out;
}

}  // namespace motionalign
