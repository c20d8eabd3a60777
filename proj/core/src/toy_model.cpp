#include "motionalign/toy_model.hpp"

#include <algorithm>
#include <cmath>

#include "motionalign/error.hpp"

namespace motionalign {

std::size_t MlpShape::parameter_count() const {
  const std::size_t h = static_cast<std::size_t>(hidden);
  const std::size_t in = static_cast<std::size_t>(input_dim());
  return h * in + h + h * h + h + 2 * h + 2;
}

namespace {

struct Layout {
  std::size_t w1, b1, w2, b2, w3, b3;
};

Layout layout_of(const MlpShape& s) {
  const std::size_t h = static_cast<std::size_t>(s.hidden);
  const std::size_t in = static_cast<std::size_t>(s.input_dim());
  Layout l{};
  l.w1 = 0;
  l.b1 = l.w1 + h * in;
  l.w2 = l.b1 + h;
  l.b2 = l.w2 + h * h;
  l.w3 = l.b2 + h;
  l.b3 = l.w3 + 2 * h;
  return l;
}

// Scratch activations reused across calls on the same thread.
struct Activations {
  std::vector<double> h1, h2, g1, g2;

  void resize(int hidden) {
    const auto h = static_cast<std::size_t>(hidden);
    h1.resize(h);
    h2.resize(h);
    g1.resize(h);
    g2.resize(h);
  }
};

Activations& scratch(int hidden) {
  thread_local Activations act;
  act.resize(hidden);
  return act;
}

}  // namespace

Mlp::Mlp(MlpShape shape, CounterRng& rng) : shape_(shape), params_(shape.parameter_count(), 0.0) {
  if (shape.hidden < 1) throw Error(ErrorKind::InvalidConfig, "hidden width must be >= 1");
  const Layout l = layout_of(shape_);
  const int h = shape_.hidden;
  const int in = shape_.input_dim();
  auto fill = [&](std::size_t offset, std::size_t count, int fan_in) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i) params_[offset + i] = scale * rng.normal();
  };
  fill(l.w1, static_cast<std::size_t>(h) * in, in);
  fill(l.w2, static_cast<std::size_t>(h) * h, h);
  fill(l.w3, static_cast<std::size_t>(2) * h, h);
}

Vec2 Mlp::forward(Vec2 z, double t, double c) const {
  const Layout l = layout_of(shape_);
  const int h = shape_.hidden;
  const int in = shape_.input_dim();
  const double input[4] = {z.x, z.y, t, c};
  Activations& a = scratch(h);
  const double* p = params_.data();

  for (int j = 0; j < h; ++j) {
    double s = p[l.b1 + j];
    for (int k = 0; k < in; ++k) s += p[l.w1 + j * in + k] * input[k];
    a.h1[j] = std::tanh(s);
  }
  for (int j = 0; j < h; ++j) {
    double s = p[l.b2 + j];
    for (int k = 0; k < h; ++k) s += p[l.w2 + j * h + k] * a.h1[k];
    a.h2[j] = std::tanh(s);
  }
  Vec2 out{p[l.b3], p[l.b3 + 1]};
  for (int k = 0; k < h; ++k) {
    out.x += p[l.w3 + k] * a.h2[k];
    out.y += p[l.w3 + h + k] * a.h2[k];
  }
  return out;
}

Vec2 Mlp::forward_backward(Vec2 z, double t, double c, Vec2 upstream, std::span<double> grad) const {
  if (grad.size() != params_.size()) throw Error(ErrorKind::DimensionMismatch, "gradient buffer size");
  const Vec2 out = forward(z, t, c);  // fills scratch h1, h2
  const Layout l = layout_of(shape_);
  const int h = shape_.hidden;
  const int in = shape_.input_dim();
  const double input[4] = {z.x, z.y, t, c};
  Activations& a = scratch(h);
  const double* p = params_.data();
  double* g = grad.data();

  g[l.b3] += upstream.x;
  g[l.b3 + 1] += upstream.y;
  for (int k = 0; k < h; ++k) {
    g[l.w3 + k] += upstream.x * a.h2[k];
    g[l.w3 + h + k] += upstream.y * a.h2[k];
    const double dh2 = upstream.x * p[l.w3 + k] + upstream.y * p[l.w3 + h + k];
    a.g2[k] = dh2 * (1.0 - a.h2[k] * a.h2[k]);
  }
  std::fill(a.g1.begin(), a.g1.end(), 0.0);
  for (int j = 0; j < h; ++j) {
    const double gj = a.g2[j];
    g[l.b2 + j] += gj;
    for (int k = 0; k < h; ++k) {
      g[l.w2 + j * h + k] += gj * a.h1[k];
      a.g1[k] += gj * p[l.w2 + j * h + k];
    }
  }
  for (int j = 0; j < h; ++j) {
    const double gj = a.g1[j] * (1.0 - a.h1[j] * a.h1[j]);
    g[l.b1 + j] += gj;
    for (int k = 0; k < in; ++k) g[l.w1 + j * in + k] += gj * input[k];
  }
  return out;
}

ToyFlowModel::ToyFlowModel(MlpShape shape, std::uint64_t seed) {
  CounterRng rng(seed, 0x1417);
  current = Mlp(shape, rng);
  old = current;
}

Vec2 integrate_euler(const VelocityFn& velocity, Vec2 noise, int steps) {
  if (steps < 1) throw Error(ErrorKind::InvalidConfig, "ode_steps must be >= 1");
  const double dt = 1.0 / steps;
  Vec2 z = noise;
  for (int k = 0; k < steps; ++k) {
    const double t = 1.0 - k * dt;
    z = z - dt * velocity(z, t);
  }
  return z;
}

Vec2 sample_ode(const Mlp& model, double c, int ode_steps, Vec2 noise, double guidance_scale) {
  if (guidance_scale == 1.0) {
    return integrate_euler([&](Vec2 z, double t) { return model.forward(z, t, c); }, noise, ode_steps);
  }
  return integrate_euler(
      [&](Vec2 z, double t) {
        const Vec2 uncond = model.forward(z, t, 0.0);
        return uncond + guidance_scale * (model.forward(z, t, c) - uncond);
      },
      noise, ode_steps);
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, std::size_t parameter_count)
    : kind_(kind), lr_(learning_rate) {
  if (kind_ == OptimizerKind::Adam) {
    m_.assign(parameter_count, 0.0);
    v_.assign(parameter_count, 0.0);
  }
}

void Optimizer::step(std::span<double> params, std::span<const double> grad) {
  if (kind_ == OptimizerKind::Sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr_ * grad[i];
    return;
  }
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++t_;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
  }
}

double fm_loss(const Mlp& model, std::span<const Vec2> data, double conditioning, int samples, std::uint64_t seed) {
  if (data.empty()) throw Error(ErrorKind::InvalidConfig, "flow-matching data must be nonempty");
  CounterRng rng(seed, 0xe7a1);
  double sum = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vec2 x0 = data[rng.below(data.size())];
    const Vec2 noise{rng.normal(), rng.normal()};
    const double t = rng.uniform();
    const Vec2 diff = model.forward(FmSchedule::interpolate(x0, noise, t), t, conditioning) -
                      FmSchedule::target_velocity(x0, noise);
    sum += diff.squared_norm();
  }
  return sum / samples;
}

PretrainReport fm_pretrain(ToyFlowModel& model, std::span<const Vec2> data, const PretrainConfig& cfg) {
  if (data.empty()) throw Error(ErrorKind::InvalidConfig, "flow-matching data must be nonempty");
  if (cfg.batch < 1) throw Error(ErrorKind::InvalidConfig, "batch must be >= 1");
  CounterRng rng(cfg.seed, 0xf1a7);
  Mlp& net = model.current;
  Optimizer opt(cfg.optimizer, cfg.learning_rate, net.parameters().size());
  std::vector<double> grad(net.parameters().size());
  PretrainReport report;
  report.losses.reserve(static_cast<std::size_t>(std::max(cfg.steps, 0)));

  for (int step = 0; step < cfg.steps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    const double scale = 2.0 / cfg.batch;
    for (int b = 0; b < cfg.batch; ++b) {
      const Vec2 x0 = data[rng.below(data.size())];
      const Vec2 noise{rng.normal(), rng.normal()};
      const double t = rng.uniform();
      const Vec2 zt = FmSchedule::interpolate(x0, noise, t);
      const Vec2 target = FmSchedule::target_velocity(x0, noise);
      const Vec2 diff = net.forward(zt, t, cfg.conditioning) - target;
      loss += diff.squared_norm();
      net.forward_backward(zt, t, cfg.conditioning, scale * diff, grad);
    }
    loss /= cfg.batch;
    if (!std::isfinite(loss)) throw Error(ErrorKind::NonFiniteLoss, "flow-matching pretraining diverged");
    report.losses.push_back(loss);
    opt.step(net.parameters(), grad);
  }
  model.snapshot();
  return report;
}

}  // namespace motionalign
