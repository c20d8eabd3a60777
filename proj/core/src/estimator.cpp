#include "motionalign/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "detail/parallel.hpp"
#include "detail/sampling.hpp"
#include "motionalign/error.hpp"

namespace motionalign {

namespace fs = std::filesystem;

void EstimatorConfig::validate() const {
  if (pyramid_levels < 1) throw Error(ErrorKind::InvalidConfig, "pyramid_levels must be >= 1");
  if (window_radius < 1) throw Error(ErrorKind::InvalidConfig, "window_radius must be >= 1");
  if (iterations_per_level < 1) throw Error(ErrorKind::InvalidConfig, "iterations_per_level must be >= 1");
  if (!(min_eigen > 0.0)) throw Error(ErrorKind::InvalidConfig, "min_eigen must be > 0");
}

std::string estimator_name(const Estimator& est) {
  struct Visitor {
    std::string operator()(const LucasKanade&) const { return "lucas-kanade"; }
    std::string operator()(const Precomputed&) const { return "precomputed"; }
    std::string operator()(const ZeroFlow&) const { return "zero"; }
  };
  return std::visit(Visitor{}, est);
}

fs::path precomputed_flow_path(const Precomputed& est, const FlowKey& key) {
  return est.directory / (key.pair_id + (key.role == FlowRole::Pred ? "__pred.flo" : "__gt.flo"));
}

double StructureTensor::min_eigenvalue() const {
  const double half_trace = 0.5 * (gxx + gyy);
  const double half_gap = std::sqrt(0.25 * (gxx - gyy) * (gxx - gyy) + gxy * gxy);
  return half_trace - half_gap;
}

std::optional<Displacement> solve_lk_system(const StructureTensor& s, double min_eigen) {
  if (!(s.min_eigenvalue() >= min_eigen)) return std::nullopt;
  const double det = s.gxx * s.gyy - s.gxy * s.gxy;
  if (!(det > 0.0)) return std::nullopt;
  // d = -G^{-1} b with the explicit 2x2 inverse.
  return Displacement{-(s.gyy * s.bx - s.gxy * s.by) / det, -(s.gxx * s.by - s.gxy * s.bx) / det};
}

std::optional<Displacement> lk_solve_window(std::span<const double> ix, std::span<const double> iy,
                                            std::span<const double> it, double min_eigen) {
  if (ix.size() != iy.size() || ix.size() != it.size()) {
    throw Error(ErrorKind::DimensionMismatch, "LK window patches differ in size");
  }
  StructureTensor s;
  for (std::size_t i = 0; i < ix.size(); ++i) {
    s.gxx += ix[i] * ix[i];
    s.gxy += ix[i] * iy[i];
    s.gyy += iy[i] * iy[i];
    s.bx += ix[i] * it[i];
    s.by += iy[i] * it[i];
  }
  return solve_lk_system(s, min_eigen);
}

ImageGradients central_gradients(const GrayImage& img) {
  ImageGradients g{GrayImage(img.width, img.height), GrayImage(img.width, img.height)};
  for (int y = 0; y < img.height; ++y) {
    const int ym = std::max(y - 1, 0);
    const int yp = std::min(y + 1, img.height - 1);
    for (int x = 0; x < img.width; ++x) {
      const int xm = std::max(x - 1, 0);
      const int xp = std::min(x + 1, img.width - 1);
      g.ix.at(x, y) = 0.5f * (img.at(xp, y) - img.at(xm, y));
      g.iy.at(x, y) = 0.5f * (img.at(x, yp) - img.at(x, ym));
    }
  }
  return g;
}

GrayImage warp_image(const GrayImage& img, const FlowField& flow) {
  if (img.width != flow.width || img.height != flow.height) {
    throw Error(ErrorKind::DimensionMismatch, "warp_image: image and flow sizes differ");
  }
  GrayImage out(img.width, img.height);
  detail::parallel_for(static_cast<std::size_t>(img.height), [&](std::size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < img.width; ++x) {
      const std::size_t i = flow.index(x, y);
      out.data[i] = static_cast<float>(detail::sample_bilinear(img.data.data(), img.width, img.height, 1,
                                                               x + static_cast<double>(flow.u[i]),
                                                               y + static_cast<double>(flow.v[i])));
    }
  });
  return out;
}

namespace {

// Summed-area table over a double plane; window sums clip to the image.
class IntegralImage {
 public:
  IntegralImage(const std::vector<double>& plane, int width, int height)
      : width_(width), height_(height), table_(static_cast<std::size_t>(width + 1) * (height + 1), 0.0) {
    for (int y = 0; y < height; ++y) {
      double row = 0.0;
      for (int x = 0; x < width; ++x) {
        row += plane[static_cast<std::size_t>(y) * width + x];
        at(x + 1, y + 1) = at(x + 1, y) + row;
      }
    }
  }

  double window_sum(int cx, int cy, int radius) const {
    const int x0 = std::max(cx - radius, 0);
    const int y0 = std::max(cy - radius, 0);
    const int x1 = std::min(cx + radius + 1, width_);
    const int y1 = std::min(cy + radius + 1, height_);
    return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
  }

 private:
  double& at(int x, int y) { return table_[static_cast<std::size_t>(y) * (width_ + 1) + x]; }
  double at(int x, int y) const { return table_[static_cast<std::size_t>(y) * (width_ + 1) + x]; }

  int width_;
  int height_;
  std::vector<double> table_;
};

std::vector<double> product(const GrayImage& a, const GrayImage& b) {
  std::vector<double> out(a.pixel_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(a.data[i]) * b.data[i];
  return out;
}

// Iterative LK per window: every window is warped by its own displacement,
// so neighboring estimates never feed into each other's residuals. Samples
// that warp outside `b` carry no information and are left out of the system.
void refine_level(const GrayImage& a, const GrayImage& b, FlowField& flow, const EstimatorConfig& cfg) {
  const int w = a.width;
  const int h = a.height;
  const int r = cfg.window_radius;
  const ImageGradients grad = central_gradients(a);
  const IntegralImage sxx(product(grad.ix, grad.ix), w, h);
  const IntegralImage sxy(product(grad.ix, grad.iy), w, h);
  const IntegralImage syy(product(grad.iy, grad.iy), w, h);
  const double max_x = w - 1;
  const double max_y = h - 1;

  detail::parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
    const int y = static_cast<int>(row);
    const int y0 = std::max(y - r, 0);
    const int y1 = std::min(y + r, h - 1);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(x - r, 0);
      const int x1 = std::min(x + r, w - 1);
      const std::size_t i = flow.index(x, y);
      double du = flow.u[i];
      double dv = flow.v[i];
      const StructureTensor full{sxx.window_sum(x, y, r), sxy.window_sum(x, y, r), syy.window_sum(x, y, r), 0.0, 0.0};
      // Unsolvable windows keep the propagated flow.
      if (!(full.min_eigenvalue() >= cfg.min_eigen)) continue;

      for (int iter = 0; iter < cfg.iterations_per_level; ++iter) {
        const bool inside = x0 + du >= 0.0 && x1 + du <= max_x && y0 + dv >= 0.0 && y1 + dv <= max_y;
        StructureTensor s = full;
        if (!inside) s = StructureTensor{};
        s.bx = 0.0;
        s.by = 0.0;
        for (int py = y0; py <= y1; ++py) {
          const double sy = py + dv;
          if (!inside && (sy < 0.0 || sy > max_y)) continue;
          for (int px = x0; px <= x1; ++px) {
            const double sx = px + du;
            if (!inside && (sx < 0.0 || sx > max_x)) continue;
            const std::size_t k = static_cast<std::size_t>(py) * w + px;
            const double ix = grad.ix.data[k];
            const double iy = grad.iy.data[k];
            if (!inside) {
              s.gxx += ix * ix;
              s.gxy += ix * iy;
              s.gyy += iy * iy;
            }
            const double it = detail::sample_bilinear(b.data.data(), w, h, 1, sx, sy) - a.data[k];
            s.bx += ix * it;
            s.by += iy * it;
          }
        }
        const auto d = solve_lk_system(s, cfg.min_eigen);
        if (!d) break;
        du += d->du;
        dv += d->dv;
        if (d->du * d->du + d->dv * d->dv < 1e-8) break;
      }
      flow.u[i] = static_cast<float>(du);
      flow.v[i] = static_cast<float>(dv);
    }
  });
}

}  // namespace

FlowField lucas_kanade_flow(const GrayImage& a, const GrayImage& b, const EstimatorConfig& config) {
  config.validate();
  if (!a.same_shape(b)) throw Error(ErrorKind::DimensionMismatch, "estimate_flow: image sizes differ");
  const Pyramid pa = build_pyramid(a, config.pyramid_levels);
  const Pyramid pb = build_pyramid(b, config.pyramid_levels);

  const int coarsest = static_cast<int>(pa.levels.size()) - 1;
  FlowField flow(pa.levels[coarsest].width, pa.levels[coarsest].height);
  for (int level = coarsest; level >= 0; --level) {
    const GrayImage& la = pa.levels[level];
    if (flow.width != la.width || flow.height != la.height) flow = resize_flow(flow, la.width, la.height);
    refine_level(la, pb.levels[level], flow, config);
  }
  return flow;
}

FlowEstimate estimate_flow(const Estimator& est, const GrayImage& a, const GrayImage& b,
                           const std::optional<FlowKey>& key) {
  if (!a.same_shape(b)) throw Error(ErrorKind::DimensionMismatch, "estimate_flow: image sizes differ");

  if (const auto* lk = std::get_if<LucasKanade>(&est)) return {lucas_kanade_flow(a, b, lk->config), false};
  if (std::holds_alternative<ZeroFlow>(est)) return {FlowField(a.width, a.height), false};

  const auto& pre = std::get<Precomputed>(est);
  if (!key) throw Error(ErrorKind::UnresolvedPrecomputedFlow, "precomputed estimator needs a pair id");
  const fs::path path = precomputed_flow_path(pre, *key);
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error(ErrorKind::UnresolvedPrecomputedFlow, path.string());
  FlowEstimate out{read_flo(path), false};
  if (out.field.width != a.width || out.field.height != a.height) {
    out.field = resize_flow(out.field, a.width, a.height);
    out.resized = true;
  }
  return out;
}

}  // namespace motionalign
