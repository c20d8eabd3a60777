#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include "motionalign/flow.hpp"
#include "motionalign/image.hpp"

namespace motionalign {

struct EstimatorConfig {
  int pyramid_levels = 4;
  int window_radius = 7;  // 15x15 window
  int iterations_per_level = 5;
  double min_eigen = 1e-6;

  void validate() const;
};

struct LucasKanade {
  EstimatorConfig config;
};

/// Reads `<directory>/<pair_id>__pred.flo` and `<directory>/<pair_id>__gt.flo`.
struct Precomputed {
  std::filesystem::path directory;
};

struct ZeroFlow {};

using Estimator = std::variant<LucasKanade, Precomputed, ZeroFlow>;

std::string estimator_name(const Estimator& est);

enum class FlowRole { Pred, Gt };

/// Identifies which precomputed field a request refers to. Image-based
/// estimators ignore it.
struct FlowKey {
  std::string pair_id;
  FlowRole role = FlowRole::Pred;
};

std::filesystem::path precomputed_flow_path(const Precomputed& est, const FlowKey& key);

struct FlowEstimate {
  FlowField field;
  bool resized = false;  // precomputed field was resampled to the image size
};

// Flow mapping pixels of `a` to their locations in `b`. Throws
// DimensionMismatch for differently sized images and
// UnresolvedPrecomputedFlow when a Precomputed estimator has no file for key.
FlowEstimate estimate_flow(const Estimator& est, const GrayImage& a, const GrayImage& b,
                           const std::optional<FlowKey>& key = std::nullopt);

/// Pyramidal dense Lucas-Kanade with per-iteration warping.
FlowField lucas_kanade_flow(const GrayImage& a, const GrayImage& b, const EstimatorConfig& config);

// Samples img at (x + u, y + v) bilinearly; coordinates clamp to the border.
GrayImage warp_image(const GrayImage& img, const FlowField& flow);

struct Displacement {
  double du = 0.0;
  double dv = 0.0;
};

/// Accumulated LK normal equations: G = sum [Ix^2, IxIy; IxIy, Iy^2],
/// b = sum [IxIt, IyIt].
struct StructureTensor {
  double gxx = 0.0;
  double gxy = 0.0;
  double gyy = 0.0;
  double bx = 0.0;
  double by = 0.0;

  double min_eigenvalue() const;
};

// Solves G d = -b. Returns nullopt when the smaller eigenvalue of G is below
// min_eigen (aperture problem).
std::optional<Displacement> solve_lk_system(const StructureTensor& system, double min_eigen);

std::optional<Displacement> lk_solve_window(std::span<const double> ix, std::span<const double> iy,
                                            std::span<const double> it, double min_eigen);

struct ImageGradients {
  GrayImage ix;
  GrayImage iy;
};

// Central differences with border replication.
ImageGradients central_gradients(const GrayImage& img);

}  // namespace motionalign
