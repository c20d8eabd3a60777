#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "motionalign/reward.hpp"
#include "motionalign/toy_model.hpp"

namespace motionalign {

struct NftConfig {
  double beta_mix = 1.0;
  double kl_weight = 1e-4;
  int group_size = 8;
  int groups = 24;
  int ode_steps = 6;
  double ban_mean = 0.9;
  double ban_std = 0.05;
  double learning_rate = 1e-3;
  int rounds = 20;
  int epochs_per_round = 4;  // passes over the kept samples, fresh (t, eps) each pass
  int minibatch = 64;
  double guidance_scale = 1.0;  // classifier-free guidance at sampling; 1 = off
  std::vector<double> conditionings = {0.0};
  OptimizerKind optimizer = OptimizerKind::Adam;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SampleGroup {
  double conditioning = 0.0;
  std::vector<Vec2> samples;
  std::vector<double> raw_rewards;
  std::vector<double> optimality;

  double raw_mean() const;
  double raw_std() const;  // population standard deviation
};

// Population standard deviation of every raw reward in the step, floored at 1e-6.
double global_reward_std(std::span<const SampleGroup> groups);

// r = 1/2 + 1/2 clip((r_raw - mean) / z_c, -1, 1), mean taken over the group.
std::vector<double> optimality_reward(std::span<const double> raw, double z_c);

// v+ = (1 - beta) v_old + beta v_theta;  v- = (1 + beta) v_old - beta v_theta.
std::pair<Vec2, Vec2> implicit_velocities(Vec2 v_old, Vec2 v_theta, double beta_mix);

// Drops groups with raw mean >= ban_mean or raw std <= ban_std.
std::vector<SampleGroup> group_filter(std::vector<SampleGroup> groups, double ban_mean, double ban_std);

struct NftSample {
  Vec2 x_t;
  double t = 0.0;
  double conditioning = 0.0;
  Vec2 target;
  double r = 0.0;  // optimality reward in [0, 1]
};

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

// Batch mean of r ||v+ - v||^2 + (1 - r) ||v- - v||^2 + kl_weight ||v_theta - v_old||^2,
// with its exact gradient with respect to the current parameters.
LossAndGradient nft_loss(std::span<const NftSample> batch, const ToyFlowModel& model, double beta_mix,
                         double kl_weight);

using RawRewardFn = std::function<double(Vec2 x0, double conditioning)>;

struct RoundStats {
  int round = 0;
  double mean_raw_reward = 0.0;
  int kept_groups = 0;
  double loss = 0.0;  // mean minibatch loss; 0 for skipped rounds
  bool skipped = false;  // AllGroupsFiltered
};

struct TrainReport {
  std::vector<RoundStats> rounds;
};

// Per round: snapshot v_old, sample groups from v_old, score, filter,
// transform to optimality rewards and descend on nft_loss.
TrainReport train_nft(ToyFlowModel& model, const RawRewardFn& reward_fn, const NftConfig& cfg);

// Toy-lab helpers.
std::vector<Vec2> two_mode_data(std::size_t count, std::uint64_t seed, double spread = 0.25);
double mode_target_reward(Vec2 x0, Vec2 center = {2.0, 0.0}, double radius = 1.0);
// Scores x0 as a constant displacement field against `target` using the
// motion reward stack on a 4x4 field; returns the quantized r_motion.
double motion_proxy_reward(Vec2 x0, Vec2 target = {2.0, 0.0}, const RewardConfig& cfg = {});
double mode_fraction(const Mlp& model, double conditioning, int ode_steps, int samples, std::uint64_t seed,
                     Vec2 center = {2.0, 0.0}, double radius = 1.0);

std::string to_json(const TrainReport& report);
std::string to_csv(const TrainReport& report);

}  // namespace motionalign
