#include "motionalign/reward.hpp"

#include <algorithm>
#include <cmath>

#include "motionalign/error.hpp"

namespace motionalign {

double RewardConfig::effective_d_max() const {
  return d_max.value_or(alpha * std::pow(2.0, q) + beta_dir + lambda_move * (tau_move + 0.5));
}

double RewardConfig::zero_pair_d_min() const { return alpha * std::pow(eps, q); }

void RewardConfig::validate() const {
  if (!(q > 0.0 && q < 1.0)) throw Error(ErrorKind::InvalidConfig, "q must lie in (0, 1)");
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidConfig, "eps must be > 0");
  if (alpha < 0.0 || beta_dir < 0.0 || lambda_move < 0.0) {
    throw Error(ErrorKind::InvalidConfig, "alpha, beta_dir and lambda_move must be >= 0");
  }
  if (tau_m < 0.0 || tau_move < 0.0) throw Error(ErrorKind::InvalidConfig, "tau_m and tau_move must be >= 0");
  if (!(effective_d_max() > zero_pair_d_min())) throw Error(ErrorKind::InvalidConfig, "d_max must exceed alpha * eps^q");
  if (levels < 2) throw Error(ErrorKind::InvalidConfig, "levels must be >= 2");
}

double MasConfig::effective_d_min(const RewardConfig& rcfg) const {
  return d_min.value_or(alpha_mas * std::pow(rcfg.eps, rcfg.q));
}

double MasConfig::effective_d_max(const RewardConfig& rcfg) const {
  return d_max.value_or(alpha_mas * std::pow(2.0, rcfg.q) + (1.0 - alpha_mas));
}

void MasConfig::validate(const RewardConfig& rcfg) const {
  if (!(rho_min > 0.0 && rho_min < 1.0)) throw Error(ErrorKind::InvalidConfig, "rho_min must lie in (0, 1)");
  if (!(alpha_mas >= 0.0 && alpha_mas <= 1.0)) throw Error(ErrorKind::InvalidConfig, "alpha_mas must lie in [0, 1]");
  if (!(effective_d_max(rcfg) > effective_d_min(rcfg))) throw Error(ErrorKind::InvalidConfig, "MAS d_max must exceed d_min");
}

namespace {

void require_same_shape(const NormalizedFlow& pred, const NormalizedFlow& gt) {
  if (!pred.same_shape(gt) || pred.u.size() != gt.u.size()) {
    throw Error(ErrorKind::DimensionMismatch, "predicted and ground-truth flows differ in size");
  }
}

}  // namespace

double magnitude_distance(const NormalizedFlow& pred, const NormalizedFlow& gt, const RewardConfig& cfg) {
  require_same_shape(pred, gt);
  const std::size_t n = pred.pixel_count();
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double l1 = std::abs(pred.u[i] - gt.u[i]) + std::abs(pred.v[i] - gt.v[i]);
    sum += std::pow(l1 + cfg.eps, cfg.q);
  }
  return sum / static_cast<double>(n);
}

double direction_distance(const NormalizedFlow& pred, const NormalizedFlow& gt, const RewardConfig& cfg) {
  require_same_shape(pred, gt);
  const ScalarField m_pred = flow_magnitude(pred);
  const ScalarField m_gt = flow_magnitude(gt);
  const double weight_scale = m_gt.max() + cfg.eps;

  double weighted_error = 0.0;
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < pred.pixel_count(); ++i) {
    const double mg = m_gt.values[i];
    if (!(mg > cfg.tau_m)) continue;
    const double w = mg / weight_scale;
    const double np = m_pred.values[i] + cfg.eps;
    const double ng = mg + cfg.eps;
    const double cosine = (pred.u[i] / np) * (gt.u[i] / ng) + (pred.v[i] / np) * (gt.v[i] / ng);
    weighted_error += w * 0.5 * (1.0 - cosine);
    weight_sum += w;
  }
  return weighted_error / (weight_sum + cfg.eps);
}

double movement_penalty(const NormalizedFlow& pred, const NormalizedFlow& gt, const RewardConfig& cfg) {
  require_same_shape(pred, gt);
  const double mean_gt = flow_magnitude(gt).mean();
  const double mean_pred = flow_magnitude(pred).mean();
  return std::max(0.0, cfg.tau_move + 0.5 * mean_gt - mean_pred);
}

double quantize_reward(double r_cont, int levels) {
  if (levels < 2) throw Error(ErrorKind::InvalidConfig, "levels must be >= 2");
  const double steps = levels - 1;
  // std::round rounds half away from zero.
  return std::round(steps * r_cont) / steps;
}

RewardBreakdown reward_from_flows(const NormalizedFlow& pred, const NormalizedFlow& gt, const RewardConfig& cfg) {
  cfg.validate();
  RewardBreakdown out;
  out.d_mag = magnitude_distance(pred, gt, cfg);
  out.d_dir = direction_distance(pred, gt, cfg);
  out.m_move = movement_penalty(pred, gt, cfg);
  out.d_comb = cfg.alpha * out.d_mag + cfg.beta_dir * out.d_dir + cfg.lambda_move * out.m_move;

  out.d_min_star = cfg.zero_pair_d_min();
  if (cfg.dmin_mode == DminMode::IdenticalPair) out.d_min_star += cfg.beta_dir * direction_distance(gt, gt, cfg);

  const double d_max = cfg.effective_d_max();
  out.d_tilde = std::clamp((out.d_comb - out.d_min_star) / (d_max - out.d_min_star), 0.0, 1.0);
  out.r_cont = 1.0 - out.d_tilde;
  out.r_motion = quantize_reward(out.r_cont, cfg.levels);
  return out;
}

MasResult mas_from_flows(const NormalizedFlow& pred, const NormalizedFlow& gt, const MasConfig& mcfg,
                         const RewardConfig& rcfg) {
  rcfg.validate();
  mcfg.validate(rcfg);
  MasResult out;
  const double d_mag = magnitude_distance(pred, gt, rcfg);
  const double d_dir = direction_distance(pred, gt, rcfg);
  out.d_ovl = mcfg.alpha_mas * d_mag + (1.0 - mcfg.alpha_mas) * d_dir;

  const double d_min = mcfg.effective_d_min(rcfg);
  const double d_max = mcfg.effective_d_max(rcfg);
  out.mas = 100.0 * (1.0 - std::clamp((out.d_ovl - d_min) / (d_max - d_min), 0.0, 1.0));

  // A static ground truth (mean magnitude <= eps) never triggers the rule.
  const double mean_gt = flow_magnitude(gt).mean();
  if (mean_gt > rcfg.eps) {
    out.motion_ratio = flow_magnitude(pred).mean() / mean_gt;
    if (out.motion_ratio < mcfg.rho_min) {
      out.static_failure = true;
      out.mas = 0.0;
    }
  }
  return out;
}

TripletFlows triplet_flows(const Image& orig, const Image& edited, const Image& gt, const Estimator& est,
                           const std::string& pred_id, const std::string& gt_id) {
  if (orig.width != edited.width || orig.height != edited.height || orig.width != gt.width ||
      orig.height != gt.height) {
    throw Error(ErrorKind::DimensionMismatch, "triplet images must share dimensions");
  }
  const GrayImage g_orig = to_grayscale(orig);
  const FlowEstimate pred = estimate_flow(est, g_orig, to_grayscale(edited), FlowKey{pred_id, FlowRole::Pred});
  const FlowEstimate truth = estimate_flow(est, g_orig, to_grayscale(gt), FlowKey{gt_id, FlowRole::Gt});
  return {normalize_flow(pred.field), normalize_flow(truth.field), pred.resized || truth.resized};
}

TripletFlows triplet_flows(const Image& orig, const Image& edited, const Image& gt, const Estimator& est,
                           const std::string& pair_id) {
  return triplet_flows(orig, edited, gt, est, pair_id, pair_id);
}

RewardBreakdown motion_reward(const Image& orig, const Image& edited, const Image& gt, const Estimator& est,
                              const RewardConfig& cfg, const std::string& pair_id) {
  const TripletFlows flows = triplet_flows(orig, edited, gt, est, pair_id);
  return reward_from_flows(flows.pred, flows.gt, cfg);
}

MasResult mas_score(const Image& orig, const Image& edited, const Image& gt, const Estimator& est,
                    const MasConfig& mcfg, const RewardConfig& rcfg, const std::string& pair_id) {
  const TripletFlows flows = triplet_flows(orig, edited, gt, est, pair_id);
  return mas_from_flows(flows.pred, flows.gt, mcfg, rcfg);
}

}  // namespace motionalign
