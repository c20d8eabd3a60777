#include "motionalign/nft.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <sstream>

#include "detail/parallel.hpp"
#include "motionalign/error.hpp"

namespace motionalign {

void NftConfig::validate() const {
  if (!(beta_mix > 0.0)) throw Error(ErrorKind::InvalidConfig, "beta_mix must be > 0");
  if (kl_weight < 0.0) throw Error(ErrorKind::InvalidConfig, "kl_weight must be >= 0");
  if (group_size < 2) throw Error(ErrorKind::InvalidConfig, "group_size must be >= 2");
  if (groups < 1) throw Error(ErrorKind::InvalidConfig, "groups must be >= 1");
  if (ode_steps < 1) throw Error(ErrorKind::InvalidConfig, "ode_steps must be >= 1");
  if (!(ban_mean >= 0.0 && ban_mean <= 1.0)) throw Error(ErrorKind::InvalidConfig, "ban_mean must lie in [0, 1]");
  if (ban_std < 0.0) throw Error(ErrorKind::InvalidConfig, "ban_std must be >= 0");
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::InvalidConfig, "learning_rate must be > 0");
  if (rounds < 0 || epochs_per_round < 1 || minibatch < 1) {
    throw Error(ErrorKind::InvalidConfig, "rounds >= 0, epochs_per_round >= 1 and minibatch >= 1 required");
  }
  if (conditionings.empty()) throw Error(ErrorKind::InvalidConfig, "at least one conditioning value is required");
}

namespace {

// Mean accumulated as offsets from the first value, exact for constant input.
double shifted_mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double pivot = values.front();
  double sum = 0.0;
  for (double v : values) sum += v - pivot;
  return pivot + sum / static_cast<double>(values.size());
}

}  // namespace

double SampleGroup::raw_mean() const { return shifted_mean(raw_rewards); }

double SampleGroup::raw_std() const {
  if (raw_rewards.empty()) return 0.0;
  const double mean = raw_mean();
  double ss = 0.0;
  for (double r : raw_rewards) ss += (r - mean) * (r - mean);
  return std::sqrt(ss / static_cast<double>(raw_rewards.size()));
}

double global_reward_std(std::span<const SampleGroup> groups) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& g : groups) {
    for (double r : g.raw_rewards) {
      sum += r;
      ++n;
    }
  }
  if (n == 0) return 1e-6;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (const auto& g : groups) {
    for (double r : g.raw_rewards) ss += (r - mean) * (r - mean);
  }
  return std::max(std::sqrt(ss / static_cast<double>(n)), 1e-6);
}

std::vector<double> optimality_reward(std::span<const double> raw, double z_c) {
  if (raw.size() < 2) throw Error(ErrorKind::DegenerateGroup, "optimality reward needs a group of at least 2");
  if (!(z_c > 0.0)) throw Error(ErrorKind::InvalidConfig, "Z_c must be > 0");
  const double mean = shifted_mean(raw);
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = 0.5 + 0.5 * std::clamp((raw[i] - mean) / z_c, -1.0, 1.0);
  return out;
}

std::pair<Vec2, Vec2> implicit_velocities(Vec2 v_old, Vec2 v_theta, double beta_mix) {
  const Vec2 plus = (1.0 - beta_mix) * v_old + beta_mix * v_theta;
  const Vec2 minus = (1.0 + beta_mix) * v_old - beta_mix * v_theta;
  return {plus, minus};
}

std::vector<SampleGroup> group_filter(std::vector<SampleGroup> groups, double ban_mean, double ban_std) {
  std::erase_if(groups, [&](const SampleGroup& g) { return g.raw_mean() >= ban_mean || g.raw_std() <= ban_std; });
  return groups;
}

LossAndGradient nft_loss(std::span<const NftSample> batch, const ToyFlowModel& model, double beta_mix,
                         double kl_weight) {
  LossAndGradient out;
  out.gradient.assign(model.current.parameters().size(), 0.0);
  if (batch.empty()) return out;
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  for (const NftSample& s : batch) {
    if (!(s.r >= 0.0 && s.r <= 1.0)) throw Error(ErrorKind::InvalidConfig, "optimality reward outside [0, 1]");
    const Vec2 v_old = model.old.forward(s.x_t, s.t, s.conditioning);
    const Vec2 v_theta = model.current.forward(s.x_t, s.t, s.conditioning);
    const auto [plus, minus] = implicit_velocities(v_old, v_theta, beta_mix);
    const Vec2 e_plus = plus - s.target;
    const Vec2 e_minus = minus - s.target;
    const Vec2 drift = v_theta - v_old;
    out.loss += inv_n * (s.r * e_plus.squared_norm() + (1.0 - s.r) * e_minus.squared_norm() +
                         kl_weight * drift.squared_norm());

    const Vec2 upstream = inv_n * ((2.0 * beta_mix * s.r) * e_plus - (2.0 * beta_mix * (1.0 - s.r)) * e_minus +
                                   (2.0 * kl_weight) * drift);
    model.current.forward_backward(s.x_t, s.t, s.conditioning, upstream, out.gradient);
  }
  if (!std::isfinite(out.loss)) throw Error(ErrorKind::NonFiniteLoss, "NFT loss is not finite");
  return out;
}

TrainReport train_nft(ToyFlowModel& model, const RawRewardFn& reward_fn, const NftConfig& cfg) {
  cfg.validate();
  const CounterRng root(cfg.seed, 0x4e4654);
  Optimizer opt(cfg.optimizer, cfg.learning_rate, model.current.parameters().size());
  TrainReport report;

  for (int round = 0; round < cfg.rounds; ++round) {
    model.snapshot();
    RoundStats stats;
    stats.round = round;

    std::vector<SampleGroup> groups(static_cast<std::size_t>(cfg.groups));
    detail::parallel_for(groups.size(), [&](std::size_t g) {
      CounterRng rng = root.derive({static_cast<std::uint64_t>(round), g, 0});
      SampleGroup& group = groups[g];
      group.conditioning = cfg.conditionings[g % cfg.conditionings.size()];
      for (int s = 0; s < cfg.group_size; ++s) {
        const Vec2 noise{rng.normal(), rng.normal()};
        const Vec2 x0 = sample_ode(model.old, group.conditioning, cfg.ode_steps, noise, cfg.guidance_scale);
        group.samples.push_back(x0);
        group.raw_rewards.push_back(reward_fn(x0, group.conditioning));
      }
    });

    double reward_sum = 0.0;
    for (const auto& g : groups) {
      for (double r : g.raw_rewards) reward_sum += r;
    }
    stats.mean_raw_reward = reward_sum / (static_cast<double>(cfg.groups) * cfg.group_size);

    const double z_c = global_reward_std(groups);
    std::vector<SampleGroup> kept = group_filter(std::move(groups), cfg.ban_mean, cfg.ban_std);
    stats.kept_groups = static_cast<int>(kept.size());
    if (kept.empty()) {
      stats.skipped = true;
      report.rounds.push_back(stats);
      continue;
    }
    for (auto& g : kept) g.optimality = optimality_reward(g.raw_rewards, z_c);

    double loss_sum = 0.0;
    int loss_count = 0;
    std::vector<NftSample> batch;
    for (int epoch = 0; epoch < cfg.epochs_per_round; ++epoch) {
      CounterRng rng = root.derive({static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(epoch), 1});
      std::vector<NftSample> samples;
      for (const auto& g : kept) {
        for (std::size_t s = 0; s < g.samples.size(); ++s) {
          const Vec2 noise{rng.normal(), rng.normal()};
          const double t = rng.uniform();
          samples.push_back({FmSchedule::interpolate(g.samples[s], noise, t), t, g.conditioning,
                             FmSchedule::target_velocity(g.samples[s], noise), g.optimality[s]});
        }
      }
      // Fisher-Yates with the round/epoch stream.
      for (std::size_t i = samples.size(); i > 1; --i) std::swap(samples[i - 1], samples[rng.below(i)]);

      for (std::size_t begin = 0; begin < samples.size(); begin += static_cast<std::size_t>(cfg.minibatch)) {
        const std::size_t end = std::min(samples.size(), begin + static_cast<std::size_t>(cfg.minibatch));
        const auto result = nft_loss(std::span(samples).subspan(begin, end - begin), model, cfg.beta_mix, cfg.kl_weight);
        opt.step(model.current.parameters(), result.gradient);
        loss_sum += result.loss;
        ++loss_count;
      }
    }
    stats.loss = loss_sum / loss_count;
    report.rounds.push_back(stats);
  }
  return report;
}

std::vector<Vec2> two_mode_data(std::size_t count, std::uint64_t seed, double spread) {
  CounterRng rng(seed, 0xda7a);
  std::vector<Vec2> data;
  data.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double cx = (i % 2 == 0) ? 2.0 : -2.0;
    data.push_back({cx + spread * rng.normal(), spread * rng.normal()});
  }
  return data;
}

double mode_target_reward(Vec2 x0, Vec2 center, double radius) {
  return (x0 - center).squared_norm() <= radius * radius ? 1.0 : 0.0;
}

double motion_proxy_reward(Vec2 x0, Vec2 target, const RewardConfig& cfg) {
  constexpr int kSide = 4;
  const FlowField pred(kSide, kSide, static_cast<float>(x0.x), static_cast<float>(x0.y));
  const FlowField gt(kSide, kSide, static_cast<float>(target.x), static_cast<float>(target.y));
  return reward_from_flows(normalize_flow(pred), normalize_flow(gt), cfg).r_motion;
}

double mode_fraction(const Mlp& model, double conditioning, int ode_steps, int samples, std::uint64_t seed,
                     Vec2 center, double radius) {
  CounterRng rng(seed, 0x3f0de);
  int hits = 0;
  for (int i = 0; i < samples; ++i) {
    const Vec2 noise{rng.normal(), rng.normal()};
    hits += mode_target_reward(sample_ode(model, conditioning, ode_steps, noise), center, radius) > 0.5 ? 1 : 0;
  }
  return static_cast<double>(hits) / samples;
}

std::string to_json(const TrainReport& report) {
  nlohmann::ordered_json j;
  j["rounds"] = nlohmann::ordered_json::array();
  for (const auto& r : report.rounds) {
    j["rounds"].push_back({{"round", r.round},
                           {"mean_raw_reward", r.mean_raw_reward},
                           {"kept_groups", r.kept_groups},
                           {"loss", r.loss},
                           {"skipped", r.skipped}});
  }
  return j.dump(2);
}

std::string to_csv(const TrainReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "round,mean_raw_reward,kept_groups,loss\n";
  for (const auto& r : report.rounds) {
    out << r.round << ',' << r.mean_raw_reward << ',' << r.kept_groups << ',' << r.loss << '\n';
  }
  return out.str();
}

}  // namespace motionalign
