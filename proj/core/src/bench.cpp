#include "motionalign/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <thread>

#include "detail/parallel.hpp"
#include "motionalign/error.hpp"
#include "motionalign/rng.hpp"

namespace motionalign {

namespace fs = std::filesystem;

EntryScore score_entry(const ManifestEntry& entry, const std::string& model, const Estimator& est,
                       const RewardConfig& rcfg, const MasConfig& mcfg) {
  const auto out = entry.outputs.find(model);
  if (out == entry.outputs.end()) throw Error(ErrorKind::MissingReferencedFile, "no output for model '" + model + "'");

  const Image input = load_image(entry.input_path);
  const Image gt = load_image(entry.gt_path);
  Image edited = load_image(out->second);

  EntryScore score;
  score.entry_id = entry.id;
  score.model = model;
  score.category = entry.category;
  if (edited.width != input.width || edited.height != input.height) {
    edited = resize_bilinear(edited, input.width, input.height);
    score.resized = true;
  }
  const TripletFlows flows = triplet_flows(input, edited, gt, est, entry.id + "__" + model, entry.id);
  score.resized = score.resized || flows.resized;
  score.reward = reward_from_flows(flows.pred, flows.gt, rcfg);
  score.mas = mas_from_flows(flows.pred, flows.gt, mcfg, rcfg);
  return score;
}

WinRateMatrix win_rate(const std::vector<std::string>& models, const ScoreTable& scores) {
  if (models.size() < 2) throw Error(ErrorKind::InsufficientModels, "win rates need at least two models");
  const std::size_t n = models.size();
  WinRateMatrix m;
  m.models = models;
  m.wins.assign(n, std::vector<double>(n, 0.0));
  m.ties.assign(n, std::vector<double>(n, 0.0));
  m.compared.assign(n, std::vector<int>(n, 0));

  static const std::map<std::string, double> kEmpty;
  auto table_of = [&](const std::string& model) -> const std::map<std::string, double>& {
    const auto it = scores.find(model);
    return it == scores.end() ? kEmpty : it->second;
  };

  for (std::size_t a = 0; a < n; ++a) {
    const auto& sa = table_of(models[a]);
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const auto& sb = table_of(models[b]);
      int wins = 0, ties = 0, compared = 0;
      for (const auto& [entry, score_a] : sa) {
        const auto it = sb.find(entry);
        if (it == sb.end()) continue;
        ++compared;
        if (score_a > it->second) {
          ++wins;
        } else if (score_a == it->second) {
          ++ties;
        }
      }
      m.compared[a][b] = compared;
      if (compared > 0) {
        m.wins[a][b] = 100.0 * wins / compared;
        m.ties[a][b] = 100.0 * ties / compared;
      }
    }
  }
  return m;
}

MotionStats dataset_motion_stats(const BenchmarkManifest& manifest, const Estimator& est, std::size_t sample_size,
                                 std::uint64_t seed) {
  const std::size_t n = manifest.entries.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  const std::size_t take = std::min(sample_size, n);
  if (take < n) {
    CounterRng rng(seed, 0x57a7);
    for (std::size_t i = 0; i < take; ++i) std::swap(order[i], order[i + rng.below(n - i)]);
    order.resize(take);
    std::sort(order.begin(), order.end());
  }

  MotionStats stats;
  for (std::size_t idx : order) {
    const ManifestEntry& e = manifest.entries[idx];
    stats.sampled_ids.push_back(e.id);
    try {
      const GrayImage input = to_grayscale(load_image(e.input_path));
      const GrayImage gt = to_grayscale(load_image(e.gt_path));
      const FlowEstimate flow = estimate_flow(est, input, gt, FlowKey{e.id, FlowRole::Gt});
      stats.per_entry.push_back(flow_magnitude(normalize_flow(flow.field)).mean());
    } catch (const std::exception& ex) {
      stats.errors.push_back({e.id, {}, ex.what()});
    }
  }
  if (!stats.per_entry.empty()) {
    double sum = 0.0;
    for (double v : stats.per_entry) sum += v;
    stats.mean = sum / static_cast<double>(stats.per_entry.size());
    double ss = 0.0;
    for (double v : stats.per_entry) ss += (v - stats.mean) * (v - stats.mean);
    stats.stddev = std::sqrt(ss / static_cast<double>(stats.per_entry.size()));
  }
  return stats;
}

double combine_rewards(double motion, const std::map<std::string, double>& external,
                       const std::map<std::string, double>& weights) {
  double weight_sum = 0.0;
  for (const auto& [name, w] : weights) weight_sum += w;
  if (weights.empty() || std::abs(weight_sum - 1.0) > 1e-9) {
    throw Error(ErrorKind::WeightSumInvalid, "weights sum to " + std::to_string(weight_sum) + ", expected 1");
  }
  double combined = 0.0;
  for (const auto& [name, w] : weights) {
    if (name == "motion") {
      combined += w * motion;
      continue;
    }
    const auto it = external.find(name);
    if (it == external.end()) throw Error(ErrorKind::WeightMismatch, "no score named '" + name + "'");
    combined += w * it->second;
  }
  return combined;
}

std::vector<std::string> manifest_models(const BenchmarkManifest& manifest) {
  std::set<std::string> names;
  for (const auto& e : manifest.entries) {
    for (const auto& [model, path] : e.outputs) names.insert(model);
  }
  return {names.begin(), names.end()};
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string manifest_fingerprint(const BenchmarkManifest& manifest) {
  if (!manifest.source.empty()) {
    std::ifstream in(manifest.source, std::ios::binary);
    if (in) return fnv1a_hex(std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()));
  }
  std::string ids;
  for (const auto& e : manifest.entries) ids += e.id + '\n';
  return fnv1a_hex(ids);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct WorkItem {
  const ManifestEntry* entry;
  std::string model;
};

struct WorkResult {
  std::optional<EntryScore> score;
  std::optional<EntryError> error;
};

}  // namespace

Report run_benchmark(const BenchmarkManifest& manifest, const Estimator& est, const BenchOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  options.reward.validate();
  options.mas.validate(options.reward);

  std::vector<const ManifestEntry*> entries;
  for (const auto& e : manifest.entries) entries.push_back(&e);
  std::sort(entries.begin(), entries.end(), [](const auto* a, const auto* b) { return a->id < b->id; });

  std::vector<WorkItem> work;
  for (const auto* e : entries) {
    for (const auto& model : options.models) work.push_back({e, model});
  }

  std::vector<WorkResult> results(work.size());
  const unsigned jobs = std::max(1u, options.jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    detail::in_parallel_region = jobs > 1;
    for (std::size_t i = next.fetch_add(1); i < work.size(); i = next.fetch_add(1)) {
      const WorkItem& item = work[i];
      try {
        EntryScore score = score_entry(*item.entry, item.model, est, options.reward, options.mas);
        if (options.external) {
          const auto e = options.external->find(item.entry->id);
          if (e != options.external->end()) {
            const auto m = e->second.find(item.model);
            if (m != e->second.end()) score.external = m->second;
          }
        }
        if (!options.weights.empty()) {
          score.combined = combine_rewards(score.reward.r_motion, score.external, options.weights);
        }
        results[i].score = std::move(score);
      } catch (const std::exception& ex) {
        results[i].error = EntryError{item.entry->id, item.model, ex.what()};
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < std::min<std::size_t>(jobs, std::max<std::size_t>(work.size(), 1)); ++j) {
      pool.emplace_back(worker);
    }
  }

  Report report;
  for (auto& r : results) {
    if (r.score) report.entries.push_back(std::move(*r.score));
    if (r.error) report.errors.push_back(std::move(*r.error));
  }

  const bool use_combined = !options.weights.empty();
  report.win_rate_metric = use_combined ? "combined" : "mas";
  ScoreTable table;
  for (const auto& model : options.models) {
    ModelAggregate agg;
    agg.model = model;
    double mas_sum = 0.0, reward_sum = 0.0, combined_sum = 0.0;
    int static_count = 0, combined_count = 0;
    auto& scores = table[model];
    for (const auto& s : report.entries) {
      if (s.model != model) continue;
      ++agg.count;
      mas_sum += s.mas.mas;
      reward_sum += s.reward.r_motion;
      static_count += s.mas.static_failure ? 1 : 0;
      if (s.combined) {
        combined_sum += *s.combined;
        ++combined_count;
      }
      auto& cat = agg.categories[s.category];
      ++cat.count;
      cat.mean_mas += s.mas.mas;
      cat.mean_r_motion += s.reward.r_motion;
      if (use_combined) {
        if (s.combined) scores[s.entry_id] = *s.combined;
      } else {
        scores[s.entry_id] = s.mas.mas;
      }
    }
    for (const auto& e : report.errors) agg.failures += e.model == model ? 1 : 0;
    if (agg.count > 0) {
      agg.mean_mas = mas_sum / agg.count;
      agg.mean_r_motion = reward_sum / agg.count;
      agg.static_failure_rate = static_cast<double>(static_count) / agg.count;
    }
    if (combined_count > 0) agg.mean_combined = combined_sum / combined_count;
    for (auto& [c, cat] : agg.categories) {
      cat.mean_mas /= cat.count;
      cat.mean_r_motion /= cat.count;
    }
    report.models.push_back(std::move(agg));
  }

  try {
    report.win_rates = win_rate(options.models, table);
  } catch (const Error& e) {
    report.win_rate_error = e.what();
  }

  report.provenance.config_hash = fnv1a_hex(options.config_fingerprint);
  report.provenance.estimator = estimator_name(est);
  report.provenance.manifest_hash = manifest_fingerprint(manifest);
  report.provenance.generated_at = utc_timestamp();
  report.provenance.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace motionalign
