#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "motionalign/rng.hpp"

namespace motionalign {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
  double squared_norm() const { return x * x + y * y; }
};

/// Shape of the velocity network: input (x, y, t[, c]) -> tanh(H) -> tanh(H) -> 2.
struct MlpShape {
  int hidden = 32;
  bool conditioned = true;

  int input_dim() const { return conditioned ? 4 : 3; }
  std::size_t parameter_count() const;
  friend bool operator==(const MlpShape&, const MlpShape&) = default;
};

/// Small feed-forward velocity function v(z, t, c) with hand-written
/// reverse-mode gradients. Parameters live in one flat vector:
/// W1[H x in], b1[H], W2[H x H], b2[H], W3[2 x H], b3[2].
class Mlp {
 public:
  Mlp() = default;
  Mlp(MlpShape shape, CounterRng& rng);

  const MlpShape& shape() const { return shape_; }
  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters() { return params_; }

  Vec2 forward(Vec2 z, double t, double c) const;

  // Returns v(z, t, c) and adds d(upstream . v)/dtheta into grad.
  Vec2 forward_backward(Vec2 z, double t, double c, Vec2 upstream, std::span<double> grad) const;

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  MlpShape shape_;
  std::vector<double> params_;
};

/// Current policy v_theta plus the frozen old policy v_old of the running round.
struct ToyFlowModel {
  Mlp current;
  Mlp old;

  ToyFlowModel() = default;
  ToyFlowModel(MlpShape shape, std::uint64_t seed);

  void snapshot() { old = current; }
};

/// Rectified schedule: alpha_t = 1 - t, sigma_t = t, z_t = (1-t) x0 + t eps,
/// target velocity eps - x0.
struct FmSchedule {
  static double alpha(double t) { return 1.0 - t; }
  static double sigma(double t) { return t; }
  static Vec2 interpolate(Vec2 x0, Vec2 noise, double t) { return alpha(t) * x0 + sigma(t) * noise; }
  static Vec2 target_velocity(Vec2 x0, Vec2 noise) { return noise - x0; }
};

using VelocityFn = std::function<Vec2(Vec2 z, double t)>;

// Euler integration of dz = v dt from t = 1 (z = noise) down to t = 0 in
// `steps` equal steps of -1/steps.
Vec2 integrate_euler(const VelocityFn& velocity, Vec2 noise, int steps);

// guidance_scale != 1 applies classifier-free guidance against c = 0.
Vec2 sample_ode(const Mlp& model, double c, int ode_steps, Vec2 noise, double guidance_scale = 1.0);

enum class OptimizerKind { Adam, Sgd };

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate, std::size_t parameter_count);
  void step(std::span<double> params, std::span<const double> grad);

 private:
  OptimizerKind kind_;
  double lr_;
  std::vector<double> m_;
  std::vector<double> v_;
  long t_ = 0;
};

struct PretrainConfig {
  int steps = 2000;
  int batch = 64;
  double learning_rate = 3e-3;
  double conditioning = 0.0;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::Adam;
};

struct PretrainReport {
  std::vector<double> losses;  // minibatch loss per step
};

// Monte-Carlo flow-matching loss E||v(z_t, t, c) - (eps - x0)||^2 using a
// fixed draw sequence from `seed`, for before/after comparisons.
double fm_loss(const Mlp& model, std::span<const Vec2> data, double conditioning, int samples, std::uint64_t seed);

// Minimizes the flow-matching loss from the model's current parameters and
// then snapshots v_old. Throws NonFiniteLoss on divergence.
PretrainReport fm_pretrain(ToyFlowModel& model, std::span<const Vec2> data, const PretrainConfig& cfg);

}  // namespace motionalign
