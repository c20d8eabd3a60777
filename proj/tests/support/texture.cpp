#include "texture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "motionalign/rng.hpp"

namespace testsupport {

using namespace motionalign;

Texture::Texture(std::uint64_t seed, int components, double min_period, double max_period) {
  CounterRng rng(seed, 77);
  double total = 0.0;
  for (int k = 0; k < components; ++k) {
    const double period = min_period + (max_period - min_period) * rng.uniform();
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    const double f = 1.0 / period;
    Wave w{f * std::cos(angle), f * std::sin(angle), 2.0 * std::numbers::pi * rng.uniform(), 0.5 + rng.uniform()};
    total += w.amplitude;
    waves_.push_back(w);
  }
  scale_ = 0.45 / total;
}

double Texture::operator()(double x, double y) const {
  double s = 0.0;
  for (const auto& w : waves_) s += w.amplitude * std::sin(2.0 * std::numbers::pi * (w.fx * x + w.fy * y) + w.phase);
  return 0.5 + scale_ * s;
}

GrayImage Texture::render(int width, int height, double dx, double dy) const {
  GrayImage img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) img.at(x, y) = static_cast<float>((*this)(x - dx, y - dy));
  }
  return img;
}

Image Texture::render_rgb(int width, int height, double dx, double dy) const {
  return to_image(render(width, height, dx, dy));
}

FlowField constant_flow(int width, int height, float u, float v) { return FlowField(width, height, u, v); }

double mean_epe(const FlowField& flow, double u, double v, int margin) {
  double sum = 0.0;
  long n = 0;
  for (int y = margin; y < flow.height - margin; ++y) {
    for (int x = margin; x < flow.width - margin; ++x) {
      const auto i = flow.index(x, y);
      sum += std::hypot(flow.u[i] - u, flow.v[i] - v);
      ++n;
    }
  }
  return n ? sum / n : 0.0;
}

double median_component(const FlowField& flow, bool horizontal, int margin) {
  std::vector<double> vals;
  for (int y = margin; y < flow.height - margin; ++y) {
    for (int x = margin; x < flow.width - margin; ++x) {
      const auto i = flow.index(x, y);
      vals.push_back(horizontal ? flow.u[i] : flow.v[i]);
    }
  }
  std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
  return vals[vals.size() / 2];
}

}  // namespace testsupport
