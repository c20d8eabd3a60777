#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "motionalign/nft.hpp"
#include "support/expect_error.hpp"

using namespace motionalign;

namespace {

std::vector<NftSample> random_batch(CounterRng& rng, int n, bool conditioned) {
  std::vector<NftSample> batch;
  for (int i = 0; i < n; ++i) {
    batch.push_back({{rng.normal(), rng.normal()},
                     rng.uniform(),
                     conditioned ? rng.normal() : 0.0,
                     {rng.normal(), rng.normal()},
                     rng.uniform()});
  }
  return batch;
}

ToyFlowModel perturbed_model(MlpShape shape, std::uint64_t seed) {
  ToyFlowModel m(shape, seed);
  CounterRng rng(seed, 5);
  for (double& p : m.current.parameters()) p += 0.3 * rng.normal();
  return m;
}

double max_relative_gradient_error(const ToyFlowModel& model, const std::vector<NftSample>& batch, double beta,
                                   double kl) {
  const LossAndGradient analytic = nft_loss(batch, model, beta, kl);
  ToyFlowModel probe = model;
  double worst = 0.0;
  const double h = 1e-5;
  for (std::size_t k = 0; k < analytic.gradient.size(); ++k) {
    const double saved = probe.current.parameters()[k];
    probe.current.parameters()[k] = saved + h;
    const double up = nft_loss(batch, probe, beta, kl).loss;
    probe.current.parameters()[k] = saved - h;
    const double down = nft_loss(batch, probe, beta, kl).loss;
    probe.current.parameters()[k] = saved;
    const double numeric = (up - down) / (2 * h);
    const double denom = std::max({std::abs(numeric), std::abs(analytic.gradient[k]), 1e-6});
    worst = std::max(worst, std::abs(numeric - analytic.gradient[k]) / denom);
  }
  return worst;
}

Vec2 mean_sample(const Mlp& net, int n, std::uint64_t seed, Vec2 p, double* mean_dist) {
  CounterRng rng(seed);
  Vec2 acc{};
  double dist = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec2 x = sample_ode(net, 0.0, 20, {rng.normal(), rng.normal()});
    acc = acc + x;
    dist += std::sqrt((x - p).squared_norm());
  }
  *mean_dist = dist / n;
  return (1.0 / n) * acc;
}

}  // namespace

TEST(Mlp, ParameterCount) {
  EXPECT_EQ((MlpShape{1, false}.parameter_count()), 10u);
  EXPECT_EQ((MlpShape{32, true}.parameter_count()), 32u * 4 + 32 + 32 * 32 + 32 + 64 + 2);
  CounterRng rng(1);
  EXPECT_EQ(Mlp(MlpShape{3, true}, rng).parameters().size(), MlpShape({3, true}).parameter_count());
}

TEST(Mlp, SeededInitIsDeterministic) {
  EXPECT_EQ(ToyFlowModel(MlpShape{}, 3).current, ToyFlowModel(MlpShape{}, 3).current);
  EXPECT_FALSE(ToyFlowModel(MlpShape{}, 3).current == ToyFlowModel(MlpShape{}, 4).current);
}

TEST(FmSchedule, BoundaryConditions) {
  EXPECT_EQ(FmSchedule::alpha(0.0), 1.0);
  EXPECT_EQ(FmSchedule::sigma(0.0), 0.0);
  EXPECT_EQ(FmSchedule::alpha(1.0), 0.0);
  EXPECT_EQ(FmSchedule::sigma(1.0), 1.0);
  const Vec2 x0{1.0, -2.0}, eps{0.5, 0.25};
  EXPECT_EQ(FmSchedule::interpolate(x0, eps, 0.0), x0);
  EXPECT_EQ(FmSchedule::interpolate(x0, eps, 1.0), eps);
  EXPECT_EQ(FmSchedule::target_velocity(x0, eps), (Vec2{-0.5, 2.25}));
}

TEST(IntegrateEuler, ZeroFieldReturnsNoise) {
  const Vec2 noise{0.7, -1.3};
  EXPECT_EQ(integrate_euler([](Vec2, double) { return Vec2{}; }, noise, 6), noise);
}

TEST(IntegrateEuler, LinearFieldOneStep) {
  EXPECT_EQ(integrate_euler([](Vec2 z, double) { return z; }, {0.7, -1.3}, 1), (Vec2{0.0, 0.0}));
}

TEST(IntegrateEuler, RejectsZeroSteps) {
  EXPECT_ERROR_KIND(integrate_euler([](Vec2 z, double) { return z; }, {}, 0), ErrorKind::InvalidConfig);
}

TEST(SampleOde, SameNoiseSameOutput) {
  const ToyFlowModel m(MlpShape{}, 8);
  EXPECT_EQ(sample_ode(m.current, 0.0, 6, {0.1, 0.2}), sample_ode(m.current, 0.0, 6, {0.1, 0.2}));
}

TEST(OptimalityReward, ConstantGroupMapsToHalf) {
  const std::vector<double> raw(5, 0.3);
  for (double r : optimality_reward(raw, 0.2)) EXPECT_EQ(r, 0.5);
}

TEST(OptimalityReward, ClipBoundaries) {
  const double mu = 0.4, z = 0.1;
  const std::vector<double> raw = {mu - z, mu + z};
  const auto r = optimality_reward(raw, z);
  EXPECT_NEAR(r[0], 0.0, 1e-12);
  EXPECT_NEAR(r[1], 1.0, 1e-12);
}

TEST(OptimalityReward, ThreePointExample) {
  SampleGroup g;
  g.raw_rewards = {0.0, 0.5, 1.0};
  const double z = global_reward_std(std::span<const SampleGroup>(&g, 1));
  EXPECT_NEAR(z, 0.40824829, 1e-8);
  const auto r = optimality_reward(g.raw_rewards, z);
  EXPECT_EQ(r, (std::vector<double>{0.0, 0.5, 1.0}));
}

TEST(OptimalityReward, SymmetricGroupsMapSymmetrically) {
  CounterRng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const double c = rng.uniform(), d1 = rng.uniform(), d2 = rng.uniform();
    const std::vector<double> raw = {c - d1, c - d2, c + d2, c + d1};
    const auto r = optimality_reward(raw, 0.05 + rng.uniform());
    for (double x : r) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
    }
    EXPECT_NEAR(r[0] + r[3], 1.0, 1e-12);
    EXPECT_NEAR(r[1] + r[2], 1.0, 1e-12);
  }
}

TEST(OptimalityReward, DegenerateGroup) {
  const std::vector<double> raw = {1.0};
  EXPECT_ERROR_KIND(optimality_reward(raw, 1.0), ErrorKind::DegenerateGroup);
}

TEST(GlobalRewardStd, FlooredAtMicro) {
  SampleGroup g;
  g.raw_rewards = {0.2, 0.2};
  EXPECT_EQ(global_reward_std(std::span<const SampleGroup>(&g, 1)), 1e-6);
}

TEST(ImplicitVelocities, Identities) {
  const Vec2 old{0.3, -0.7}, theta{1.1, 0.4};
  auto near = [](Vec2 a, Vec2 b) { return std::abs(a.x - b.x) < 1e-15 && std::abs(a.y - b.y) < 1e-15; };
  for (double beta : {0.37, 1.0, 3.0}) {
    const auto [p_same, m_same] = implicit_velocities(old, old, beta);
    EXPECT_TRUE(near(p_same, old));
    EXPECT_TRUE(near(m_same, old));
  }
  const auto [p1, m1] = implicit_velocities(old, theta, 1.0);
  EXPECT_TRUE(near(p1, theta));
  EXPECT_TRUE(near(m1, 2.0 * old - theta));
  for (double beta : {0.1, 0.5, 1.0, 2.5}) {
    const auto [p, m] = implicit_velocities(old, theta, beta);
    const Vec2 mid = 0.5 * (p + m);
    EXPECT_NEAR(mid.x, old.x, 1e-15);
    EXPECT_NEAR(mid.y, old.y, 1e-15);
  }
}

TEST(GroupFilter, Examples) {
  SampleGroup ones, spread;
  ones.raw_rewards = {1.0, 1.0, 1.0};
  spread.raw_rewards = {0.1, 0.9};
  const auto kept = group_filter({ones, spread}, 0.9, 0.05);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].raw_rewards, spread.raw_rewards);
  EXPECT_TRUE(group_filter({}, 0.9, 0.05).empty());
}

TEST(NftLoss, RewardOneBetaOneIsFlowMatching) {
  CounterRng rng(4);
  const ToyFlowModel model = perturbed_model(MlpShape{4, true}, 4);
  auto batch = random_batch(rng, 16, true);
  double fm = 0.0, penalty = 0.0;
  for (auto& s : batch) {
    s.r = 1.0;
    const Vec2 v = model.current.forward(s.x_t, s.t, s.conditioning);
    fm += (v - s.target).squared_norm();
    penalty += (v - model.old.forward(s.x_t, s.t, s.conditioning)).squared_norm();
  }
  EXPECT_NEAR(nft_loss(batch, model, 1.0, 0.0).loss, fm / 16, 1e-12);
  EXPECT_NEAR(nft_loss(batch, model, 1.0, 0.5).loss, (fm + 0.5 * penalty) / 16, 1e-12);
}

TEST(NftLoss, ZeroWhenOldMatchesTarget) {
  CounterRng rng(5);
  const ToyFlowModel model(MlpShape{4, true}, 5);
  auto batch = random_batch(rng, 8, true);
  for (auto& s : batch) s.target = model.old.forward(s.x_t, s.t, s.conditioning);
  EXPECT_NEAR(nft_loss(batch, model, 0.7, 1e-4).loss, 0.0, 1e-25);
}

TEST(NftLoss, IndependentOfRewardAtOldPolicy) {
  CounterRng rng(6);
  const ToyFlowModel model(MlpShape{4, true}, 6);
  auto batch = random_batch(rng, 8, true);
  const double base = nft_loss(batch, model, 1.0, 1e-4).loss;
  for (auto& s : batch) s.r = 1.0 - s.r;
  EXPECT_NEAR(nft_loss(batch, model, 1.0, 1e-4).loss, base, 1e-12);
}

TEST(NftLoss, GradientMatchesFiniteDifferencesTenParameters) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CounterRng rng(seed, 9);
    const ToyFlowModel model = perturbed_model(MlpShape{1, false}, seed);
    ASSERT_EQ(model.current.parameters().size(), 10u);
    const auto batch = random_batch(rng, 12, false);
    EXPECT_LT(max_relative_gradient_error(model, batch, 0.5 + rng.uniform(), 0.1 * rng.uniform()), 1e-4) << seed;
  }
}

TEST(NftLoss, GradientMatchesFiniteDifferencesConditioned) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    CounterRng rng(seed, 10);
    const ToyFlowModel model = perturbed_model(MlpShape{5, true}, seed + 100);
    const auto batch = random_batch(rng, 6, true);
    EXPECT_LT(max_relative_gradient_error(model, batch, 1.0, 1e-4), 1e-4) << seed;
  }
}

TEST(NftLoss, RejectsRewardOutsideUnitInterval) {
  CounterRng rng(7);
  const ToyFlowModel model(MlpShape{2, false}, 7);
  auto batch = random_batch(rng, 2, false);
  batch[0].r = 1.5;
  EXPECT_ERROR_KIND(nft_loss(batch, model, 1.0, 0.0), ErrorKind::InvalidConfig);
}

TEST(FmPretrain, ZeroStepsLeavesModelUnchanged) {
  ToyFlowModel model(MlpShape{}, 3);
  const Mlp before = model.current;
  PretrainConfig cfg;
  cfg.steps = 0;
  const std::vector<Vec2> data = {{1.0, 1.0}};
  fm_pretrain(model, data, cfg);
  EXPECT_EQ(model.current, before);
  EXPECT_EQ(model.old, before);
}

TEST(FmPretrain, LossDecreases) {
  ToyFlowModel model(MlpShape{16, true}, 2);
  const auto data = two_mode_data(512, 1);
  const double before = fm_loss(model.current, data, 0.0, 2000, 77);
  PretrainConfig cfg;
  cfg.steps = 400;
  fm_pretrain(model, data, cfg);
  EXPECT_LT(fm_loss(model.current, data, 0.0, 2000, 77), before);
  EXPECT_EQ(model.old, model.current);
}

TEST(FmPretrain, SinglePointSamplesConcentrate) {
  const Vec2 p{1.5, -0.5};
  const std::vector<Vec2> data = {p};
  ToyFlowModel model(MlpShape{16, true}, 11);
  PretrainConfig cfg;
  cfg.steps = 150;
  std::vector<double> dist;
  double d = 0.0;
  mean_sample(model.current, 400, 5, p, &d);
  dist.push_back(d);
  for (int epoch = 0; epoch < 6; ++epoch) {
    cfg.seed = static_cast<std::uint64_t>(epoch);
    fm_pretrain(model, data, cfg);
    mean_sample(model.current, 400, 5, p, &d);
    dist.push_back(d);
  }
  // Two-checkpoint moving average must not increase.
  for (std::size_t k = 2; k < dist.size(); ++k) {
    EXPECT_LE(dist[k] + dist[k - 1], dist[k - 1] + dist[k - 2] + 1e-9) << k;
  }
  EXPECT_LT(dist.back(), 0.25 * dist.front());
}

TEST(TrainNft, ConstantRewardLeavesParametersUnchanged) {
  ToyFlowModel model(MlpShape{8, true}, 1);
  const Mlp before = model.current;
  NftConfig cfg;
  cfg.rounds = 2;
  cfg.groups = 4;
  const TrainReport report = train_nft(model, [](Vec2, double) { return 0.5; }, cfg);
  EXPECT_EQ(model.current, before);
  ASSERT_EQ(report.rounds.size(), 2u);
  for (const auto& r : report.rounds) {
    EXPECT_TRUE(r.skipped);
    EXPECT_EQ(r.kept_groups, 0);
  }
}

TEST(TrainNft, Deterministic) {
  const auto data = two_mode_data(256, 3);
  PretrainConfig pcfg;
  pcfg.steps = 100;
  NftConfig cfg;
  cfg.rounds = 3;
  cfg.groups = 6;
  auto run = [&] {
    ToyFlowModel m(MlpShape{8, true}, 2);
    fm_pretrain(m, data, pcfg);
    const TrainReport r = train_nft(m, [](Vec2 x, double) { return mode_target_reward(x); }, cfg);
    return std::make_pair(to_json(r), m.current);
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(TrainNft, LargeKlKeepsParametersNearOld) {
  // Plain gradient steps: Adam normalizes away the penalty's scale.
  const auto data = two_mode_data(256, 3);
  auto drift = [&](double kl) {
    ToyFlowModel model(MlpShape{16, true}, 4);
    PretrainConfig pcfg;
    pcfg.steps = 300;
    fm_pretrain(model, data, pcfg);
    NftConfig cfg;
    cfg.rounds = 1;
    cfg.epochs_per_round = 40;
    cfg.optimizer = OptimizerKind::Sgd;
    cfg.learning_rate = 1e-4;
    cfg.kl_weight = kl;
    train_nft(model, [](Vec2 x, double) { return mode_target_reward(x); }, cfg);
    double worst = 0.0;
    for (std::size_t k = 0; k < model.current.parameters().size(); ++k) {
      worst = std::max(worst, std::abs(model.current.parameters()[k] - model.old.parameters()[k]));
    }
    return worst;
  };
  EXPECT_GT(drift(0.0), 1e-3);
  EXPECT_LT(drift(1e3), 1e-3);
}

TEST(TrainNft, ReportSerialization) {
  TrainReport r;
  r.rounds.push_back({0, 0.25, 3, 1.5, false});
  EXPECT_EQ(to_csv(r), "round,mean_raw_reward,kept_groups,loss\n0,0.25,3,1.5\n");
  EXPECT_NE(to_json(r).find("\"kept_groups\": 3"), std::string::npos);
}

TEST(NftConfig, Validation) {
  NftConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.beta_mix = 0.0;
  EXPECT_ERROR_KIND(cfg.validate(), ErrorKind::InvalidConfig);
  cfg = {};
  cfg.ban_mean = 1.5;
  EXPECT_ERROR_KIND(cfg.validate(), ErrorKind::InvalidConfig);
}

TEST(MotionProxyReward, PerfectAndStatic) {
  EXPECT_EQ(motion_proxy_reward({2.0, 0.0}), 1.0);
  EXPECT_LT(motion_proxy_reward({-2.0, 0.0}), motion_proxy_reward({2.0, 0.0}));
}
