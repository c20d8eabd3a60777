#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "motionalign/estimator.hpp"
#include "motionalign/manifest.hpp"
#include "motionalign/reward.hpp"

namespace motionalign {

struct EntryScore {
  std::string entry_id;
  std::string model;
  Category category = Category::Other;
  RewardBreakdown reward;
  MasResult mas;
  std::map<std::string, double> external;
  std::optional<double> combined;
  bool resized = false;  // edited output or a precomputed flow was resampled
};

struct EntryError {
  std::string entry_id;
  std::string model;  // empty for entry-level failures
  std::string message;
};

// Scores one (entry, model) pair. The edited output is bilinearly resized to
// the input resolution when they differ. Precomputed flows are keyed as
// `<entry>__<model>` (pred) and `<entry>` (gt). Throws on failure.
EntryScore score_entry(const ManifestEntry& entry, const std::string& model, const Estimator& est,
                       const RewardConfig& rcfg, const MasConfig& mcfg);

/// wins[a][b]: percentage of shared entries where a scored strictly higher
/// than b; ties[a][b]: percentage of ties. compared[a][b] = 0 leaves both 0.
struct WinRateMatrix {
  std::vector<std::string> models;
  std::vector<std::vector<double>> wins;
  std::vector<std::vector<double>> ties;
  std::vector<std::vector<int>> compared;
};

/// model -> entry id -> score.
using ScoreTable = std::map<std::string, std::map<std::string, double>>;

// Throws InsufficientModels for fewer than two models.
WinRateMatrix win_rate(const std::vector<std::string>& models, const ScoreTable& scores);

struct MotionStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::vector<std::string> sampled_ids;
  std::vector<double> per_entry;  // aligned with the successfully scored ids
  std::vector<EntryError> errors;
};

// Mean diagonal-normalized magnitude of F(input, gt) over a seeded sample of
// entries (all entries when sample_size >= count).
MotionStats dataset_motion_stats(const BenchmarkManifest& manifest, const Estimator& est, std::size_t sample_size,
                                 std::uint64_t seed);

// sum_i w_i score_i with the "motion" weight applied to `motion` and every
// other weight matched against `external`. Throws WeightSumInvalid when the
// weights do not sum to 1 within 1e-9 and WeightMismatch for unmatched names.
double combine_rewards(double motion, const std::map<std::string, double>& external,
                       const std::map<std::string, double>& weights);

struct CategoryAggregate {
  int count = 0;
  double mean_mas = 0.0;
  double mean_r_motion = 0.0;
};

struct ModelAggregate {
  std::string model;
  int count = 0;  // scored entries
  int failures = 0;
  double mean_mas = 0.0;
  double mean_r_motion = 0.0;
  double static_failure_rate = 0.0;
  std::optional<double> mean_combined;
  std::map<Category, CategoryAggregate> categories;
};

struct Provenance {
  std::string config_hash;
  std::string estimator;
  std::string manifest_hash;
  std::string generated_at;  // timing fields: excluded from determinism checks
  double elapsed_seconds = 0.0;
};

struct Report {
  std::vector<ModelAggregate> models;
  std::string win_rate_metric;  // "mas" or "combined"
  std::optional<WinRateMatrix> win_rates;
  std::string win_rate_error;
  std::vector<EntryScore> entries;  // ordered by entry id, then model order
  std::vector<EntryError> errors;
  Provenance provenance;
};

struct BenchOptions {
  std::vector<std::string> models;
  RewardConfig reward;
  MasConfig mas;
  unsigned jobs = 1;
  std::optional<ExternalScores> external;
  std::map<std::string, double> weights;  // empty: no combined score
  std::string config_fingerprint;         // canonical config text for the provenance hash
};

// Scores every (entry, model) pair on a bounded worker pool. Per-entry
// failures are recorded in Report::errors; the output does not depend on
// the worker count.
Report run_benchmark(const BenchmarkManifest& manifest, const Estimator& est, const BenchOptions& options);

// Models named in any entry's outputs, sorted.
std::vector<std::string> manifest_models(const BenchmarkManifest& manifest);

std::string to_json(const Report& report);
std::string to_csv(const Report& report);
std::string to_json(const EntryScore& score);
std::string to_json(const RewardBreakdown& reward, const MasResult& mas);
std::string to_json(const MotionStats& stats);

// FNV-1a 64-bit, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace motionalign
