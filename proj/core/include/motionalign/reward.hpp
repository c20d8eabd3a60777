#pragma once

#include <optional>
#include <string>

#include "motionalign/estimator.hpp"
#include "motionalign/flow.hpp"
#include "motionalign/image.hpp"

namespace motionalign {

/// How the duplicated-input lower bound D*_min is obtained.
enum class DminMode {
  ZeroPair,       // F(I, I) = 0 for both flows: D*_min = alpha * eps^q
  IdenticalPair,  // pred flow equals gt flow: adds beta_dir * D_dir(gt, gt)
};

struct RewardConfig {
  double q = 0.4;
  double eps = 1e-12;
  double tau_m = 1e-4;     // direction-weight motion threshold, normalized units
  double tau_move = 0.01;  // hinge margin, normalized units
  double alpha = 0.7;
  double beta_dir = 0.2;
  double lambda_move = 0.1;
  std::optional<double> d_max;  // unset: alpha*2^q + beta_dir + lambda_move*(tau_move + 0.5)
  int levels = 6;
  DminMode dmin_mode = DminMode::ZeroPair;

  double effective_d_max() const;
  double zero_pair_d_min() const;  // alpha * eps^q
  void validate() const;
};

struct RewardBreakdown {
  double d_mag = 0.0;
  double d_dir = 0.0;
  double m_move = 0.0;
  double d_comb = 0.0;
  double d_min_star = 0.0;
  double d_tilde = 0.0;
  double r_cont = 0.0;
  double r_motion = 0.0;
};

struct MasConfig {
  double alpha_mas = 0.7;
  std::optional<double> d_min;  // unset: alpha_mas * eps^q (eps, q from RewardConfig)
  std::optional<double> d_max;  // unset: alpha_mas * 2^q + (1 - alpha_mas)
  double rho_min = 0.01;

  double effective_d_min(const RewardConfig& rcfg) const;
  double effective_d_max(const RewardConfig& rcfg) const;
  void validate(const RewardConfig& rcfg) const;
};

struct MasResult {
  double d_ovl = 0.0;
  double mas = 0.0;
  bool static_failure = false;
  double motion_ratio = 0.0;  // mean(m_pred) / mean(m_gt); 0 when gt is static
};

// D_mag: mean over pixels of (|du| + |dv| + eps)^q.
double magnitude_distance(const NormalizedFlow& pred, const NormalizedFlow& gt, const RewardConfig& cfg);

// D_dir: gt-magnitude-weighted mean of 1/2 (1 - cos) over pixels with
// m_gt > tau_m; weights are m_gt / (max m_gt + eps).
double direction_distance(const NormalizedFlow& pred, const NormalizedFlow& gt, const RewardConfig& cfg);

// M_move = max(0, tau + mean(m_gt) / 2 - mean(m_pred)).
double movement_penalty(const NormalizedFlow& pred, const NormalizedFlow& gt, const RewardConfig& cfg);

// round((L-1) r) / (L-1) with ties away from zero.
double quantize_reward(double r_cont, int levels);

RewardBreakdown reward_from_flows(const NormalizedFlow& pred, const NormalizedFlow& gt, const RewardConfig& cfg);
MasResult mas_from_flows(const NormalizedFlow& pred, const NormalizedFlow& gt, const MasConfig& mcfg,
                         const RewardConfig& rcfg);

/// Flows for one (orig, edited, gt) triplet: V_pred = F(orig, edited), V_gt = F(orig, gt).
struct TripletFlows {
  NormalizedFlow pred;
  NormalizedFlow gt;
  bool resized = false;
};

// `pair_id` keys precomputed flows; image-based estimators ignore it.
TripletFlows triplet_flows(const Image& orig, const Image& edited, const Image& gt, const Estimator& est,
                           const std::string& pair_id = {});
TripletFlows triplet_flows(const Image& orig, const Image& edited, const Image& gt, const Estimator& est,
                           const std::string& pred_id, const std::string& gt_id);

RewardBreakdown motion_reward(const Image& orig, const Image& edited, const Image& gt, const Estimator& est,
                              const RewardConfig& cfg, const std::string& pair_id = {});
MasResult mas_score(const Image& orig, const Image& edited, const Image& gt, const Estimator& est,
                    const MasConfig& mcfg, const RewardConfig& rcfg, const std::string& pair_id = {});

}  // namespace motionalign
