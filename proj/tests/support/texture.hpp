#pragma once

#include <cstdint>
#include <vector>

#include "motionalign/flow.hpp"
#include "motionalign/image.hpp"

namespace testsupport {

/// Analytic band-limited texture: a sum of random sinusoids whose periods lie
/// between min_period and max_period pixels. Values stay inside [0, 1].
class Texture {
 public:
  explicit Texture(std::uint64_t seed, int components = 12, double min_period = 8.0, double max_period = 32.0);

  double operator()(double x, double y) const;

  // Pixel (x, y) of the rendered image holds texture(x - dx, y - dy), so the
  // flow from render(0, 0) to render(dx, dy) is the constant (dx, dy).
  motionalign::GrayImage render(int width, int height, double dx = 0.0, double dy = 0.0) const;
  motionalign::Image render_rgb(int width, int height, double dx = 0.0, double dy = 0.0) const;

 private:
  struct Wave {
    double fx, fy, phase, amplitude;
  };
  std::vector<Wave> waves_;
  double scale_ = 1.0;
};

motionalign::FlowField constant_flow(int width, int height, float u, float v);

// Mean endpoint error against a constant flow over pixels at least `margin`
// away from every border.
double mean_epe(const motionalign::FlowField& flow, double u, double v, int margin);
double median_component(const motionalign::FlowField& flow, bool horizontal, int margin);

}  // namespace testsupport
