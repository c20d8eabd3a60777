// motionalign: command-line front end for flow estimation, motion scoring,
// batch benchmarking, dataset statistics and the toy NFT lab.
#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "motionalign/bench.hpp"
#include "motionalign/config.hpp"
#include "motionalign/error.hpp"
#include "motionalign/nft.hpp"

namespace fs = std::filesystem;
using namespace motionalign;

namespace {

struct Common {
  std::string config_file;
  bool print_config = false;
  std::map<std::string, std::string> overrides;
  std::vector<std::string_view> sections;
};

struct EstimatorChoice {
  std::string kind = "lk";
  std::string flo_dir;
};

// --config, --print-config and one override flag per key of `sections`.
void add_common(CLI::App* sub, Common& common, std::vector<std::string_view> sections) {
  common.sections = sections;
  sub->add_option("--config", common.config_file, "key = value configuration file")->check(CLI::ExistingFile);
  sub->add_flag("--print-config", common.print_config, "print the effective configuration and exit");
  for (const ConfigKey& key : config_keys()) {
    if (std::find(sections.begin(), sections.end(), key.section) == sections.end()) continue;
    std::string names = "--" + std::string(key.name);
    if (key.name.find('_') != std::string_view::npos) {
      std::string dashed(key.name);
      std::replace(dashed.begin(), dashed.end(), '_', '-');
      names += ",--" + dashed;
    }
    const std::string name(key.name);
    sub->add_option_function<std::string>(
           names, [&common, name](const std::string& v) { common.overrides[name] = v; }, std::string(key.help))
        ->group(std::string(key.section) + " settings");
  }
}

void add_estimator(CLI::App* sub, EstimatorChoice& est) {
  sub->add_option("--estimator", est.kind, "lk | zero | precomputed")
      ->check(CLI::IsMember({"lk", "zero", "precomputed"}));
  sub->add_option("--flo-dir", est.flo_dir, "directory of precomputed <id>__pred.flo / <id>__gt.flo files");
}

ToolConfig resolve(const Common& common) {
  ToolConfig cfg;
  if (!common.config_file.empty()) load_config_file(cfg, common.config_file);
  for (const auto& [key, value] : common.overrides) apply_setting(cfg, key, value);
  return cfg;
}

Estimator make_estimator(const EstimatorChoice& choice, const ToolConfig& cfg) {
  if (!choice.flo_dir.empty() || choice.kind == "precomputed") {
    if (choice.flo_dir.empty()) throw Error(ErrorKind::InvalidConfig, "--estimator precomputed needs --flo-dir");
    return Precomputed{choice.flo_dir};
  }
  if (choice.kind == "zero") return ZeroFlow{};
  cfg.estimator.validate();
  return LucasKanade{cfg.estimator};
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path);
  out << text << '\n';
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Checked after parsing so --print-config works without the inputs.
void need(const std::string& value, const char* name) {
  if (value.empty()) throw UsageError(std::string(name) + " is required");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::map<std::string, double> parse_weights(const std::string& text) {
  std::map<std::string, double> weights;
  for (const auto& item : split_list(text)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::InvalidConfig, "weight '" + item + "' is not name=value");
    const std::string text_value = item.substr(eq + 1);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text_value.data(), text_value.data() + text_value.size(), value);
    if (ec != std::errc() || end != text_value.data() + text_value.size()) {
      throw Error(ErrorKind::InvalidConfig, "weight '" + item + "' has a bad number");
    }
    weights[item.substr(0, eq)] = value;
  }
  return weights;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optical-flow motion alignment scoring, benchmarking and toy NFT lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "motionalign 0.1.0");

  // flow
  Common flow_common;
  EstimatorChoice flow_est;
  std::string flow_a, flow_b, flow_out, flow_viz;
  auto* flow = app.add_subcommand("flow", "estimate optical flow from image A to image B");
  flow->add_option("a", flow_a, "first image (required)");
  flow->add_option("b", flow_b, "second image (required)");
  flow->add_option("--out", flow_out, ".flo output (required)");
  flow->add_option("--viz", flow_viz, "color-wheel rendering (.png or .ppm)");
  add_estimator(flow, flow_est);
  add_common(flow, flow_common, {"estimator"});

  // score and mas
  Common score_common, mas_common;
  EstimatorChoice score_est, mas_est;
  struct TripletArgs {
    std::string input, edited, gt, id = "pair", out;
  } score_args, mas_args;
  auto add_triplet = [](CLI::App* sub, TripletArgs& t) {
    sub->add_option("--input", t.input, "original image (required)");
    sub->add_option("--edited", t.edited, "edited image (required)");
    sub->add_option("--gt", t.gt, "ground-truth image (required)");
    sub->add_option("--id", t.id, "pair id for precomputed flows")->capture_default_str();
    sub->add_option("--out", t.out, "JSON output path (default stdout)");
  };
  auto* score = app.add_subcommand("score", "motion reward breakdown and MAS for one triplet");
  add_triplet(score, score_args);
  add_estimator(score, score_est);
  add_common(score, score_common, {"estimator", "reward", "mas"});
  auto* mas = app.add_subcommand("mas", "MAS only for one triplet");
  add_triplet(mas, mas_args);
  add_estimator(mas, mas_est);
  add_common(mas, mas_common, {"estimator", "reward", "mas"});

  // bench
  Common bench_common;
  EstimatorChoice bench_est;
  std::string bench_manifest, bench_models, bench_out, bench_csv, bench_external, bench_weights;
  unsigned bench_jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* bench = app.add_subcommand("bench", "score every (entry, model) pair of a manifest");
  bench->add_option("--manifest", bench_manifest, "JSONL manifest (required)")->check(CLI::ExistingFile);
  bench->add_option("--models", bench_models, "comma-separated model names (default: all in the manifest)");
  bench->add_option("--out", bench_out, "report JSON path (required)");
  bench->add_option("--csv", bench_csv, "per-entry CSV path");
  bench->add_option("--external", bench_external, "JSONL sidecar of external scores")->check(CLI::ExistingFile);
  bench->add_option("--weights", bench_weights, "combination weights, e.g. motion=0.5,mllm=0.5");
  bench->add_option("--jobs", bench_jobs, "worker threads")->check(CLI::PositiveNumber);
  add_estimator(bench, bench_est);
  add_common(bench, bench_common, {"estimator", "reward", "mas"});

  // stats
  Common stats_common;
  EstimatorChoice stats_est;
  std::string stats_manifest, stats_out;
  std::size_t stats_sample = 100;
  std::uint64_t stats_seed = 0;
  auto* stats = app.add_subcommand("stats", "mean diagonal-normalized motion of input -> gt over a sample");
  stats->add_option("--manifest", stats_manifest, "JSONL manifest (required)")->check(CLI::ExistingFile);
  stats->add_option("--sample", stats_sample, "entries to sample")->capture_default_str();
  stats->add_option("--seed", stats_seed, "sampling seed")->capture_default_str();
  stats->add_option("--out", stats_out, "JSON output path (default stdout)");
  add_estimator(stats, stats_est);
  add_common(stats, stats_common, {"estimator"});

  // nft-lab
  Common nft_common;
  std::string nft_reward = "mode-target", nft_csv, nft_out;
  int nft_pretrain_steps = 2000, nft_hidden = 32, nft_eval_samples = 1000;
  auto* nft = app.add_subcommand("nft-lab", "negative-aware finetuning on a toy two-mode flow-matching model");
  nft->add_option("--reward", nft_reward, "mode-target | motion-proxy")->capture_default_str()
      ->check(CLI::IsMember({"mode-target", "motion-proxy"}));
  nft->add_option("--csv", nft_csv, "per-round CSV path");
  nft->add_option("--out", nft_out, "TrainReport JSON path (default stdout)");
  nft->add_option("--pretrain-steps", nft_pretrain_steps, "flow-matching pretraining steps")->capture_default_str();
  nft->add_option("--hidden", nft_hidden, "hidden width of the velocity MLP")->capture_default_str();
  nft->add_option("--eval-samples", nft_eval_samples, "samples for the rewarded-mode fraction")->capture_default_str();
  add_common(nft, nft_common, {"nft", "reward"});

  CLI11_PARSE(app, argc, argv);

  try {
    const std::pair<CLI::App*, Common*> subs[] = {{flow, &flow_common},   {score, &score_common}, {mas, &mas_common},
                                                  {bench, &bench_common}, {stats, &stats_common}, {nft, &nft_common}};
    for (const auto& [sub, common] : subs) {
      if (sub->parsed() && common->print_config) {
        std::cout << format_config(resolve(*common), common->sections);
        return 0;
      }
    }

    if (flow->parsed()) {
      need(flow_a, "a");
      need(flow_b, "b");
      need(flow_out, "--out");
      const ToolConfig cfg = resolve(flow_common);
      const GrayImage a = to_grayscale(load_image(flow_a));
      const GrayImage b = to_grayscale(load_image(flow_b));
      const FlowEstimate est = estimate_flow(make_estimator(flow_est, cfg), a, b, FlowKey{"pair", FlowRole::Pred});
      write_flo(est.field, flow_out);
      if (!flow_viz.empty()) write_image(flow_to_color(est.field), flow_viz);
      return 0;
    }

    if (score->parsed() || mas->parsed()) {
      const bool full = score->parsed();
      const TripletArgs& t = full ? score_args : mas_args;
      need(t.input, "--input");
      need(t.edited, "--edited");
      need(t.gt, "--gt");
      const ToolConfig cfg = resolve(full ? score_common : mas_common);
      const Estimator est = make_estimator(full ? score_est : mas_est, cfg);
      const TripletFlows flows = triplet_flows(load_image(t.input), load_image(t.edited), load_image(t.gt), est, t.id);
      const MasResult m = mas_from_flows(flows.pred, flows.gt, cfg.mas, cfg.reward);
      auto j = nlohmann::ordered_json::parse(to_json(reward_from_flows(flows.pred, flows.gt, cfg.reward), m));
      if (full) {
        j["resized"] = flows.resized;
        emit(j.dump(2), t.out);
      } else {
        emit(j["mas"].dump(2), t.out);
      }
      return 0;
    }

    if (bench->parsed()) {
      need(bench_manifest, "--manifest");
      need(bench_out, "--out");
      const ToolConfig cfg = resolve(bench_common);
      const Estimator est = make_estimator(bench_est, cfg);
      const BenchmarkManifest manifest = load_manifest(bench_manifest);
      BenchOptions opt;
      opt.models = bench_models.empty() ? manifest_models(manifest) : split_list(bench_models);
      opt.reward = cfg.reward;
      opt.mas = cfg.mas;
      opt.jobs = bench_jobs;
      if (!bench_external.empty()) opt.external = load_external_scores(bench_external);
      if (!bench_weights.empty()) opt.weights = parse_weights(bench_weights);
      opt.config_fingerprint = format_config(cfg, {"estimator", "reward", "mas"}) + estimator_name(est);
      const Report report = run_benchmark(manifest, est, opt);
      emit(to_json(report), bench_out);
      if (!bench_csv.empty()) {
        std::ofstream csv(bench_csv, std::ios::binary);
        if (!csv) throw Error(ErrorKind::IoFailure, "cannot write " + bench_csv);
        csv << to_csv(report);
      }
      std::fprintf(stderr, "scored %zu records, %zu errors\n", report.entries.size(), report.errors.size());
      return 0;
    }

    if (stats->parsed()) {
      need(stats_manifest, "--manifest");
      const ToolConfig cfg = resolve(stats_common);
      const MotionStats s =
          dataset_motion_stats(load_manifest(stats_manifest), make_estimator(stats_est, cfg), stats_sample, stats_seed);
      emit(to_json(s), stats_out);
      return 0;
    }

    if (nft->parsed()) {
      const ToolConfig cfg = resolve(nft_common);
      cfg.reward.validate();
      cfg.nft.validate();
      if (nft_hidden < 1) throw Error(ErrorKind::InvalidConfig, "--hidden must be >= 1");
      ToyFlowModel model(MlpShape{nft_hidden, true}, cfg.nft.seed);
      PretrainConfig pcfg;
      pcfg.steps = nft_pretrain_steps;
      pcfg.seed = cfg.nft.seed;
      pcfg.conditioning = cfg.nft.conditionings.front();
      fm_pretrain(model, two_mode_data(2048, cfg.nft.seed), pcfg);

      RawRewardFn reward_fn;
      if (nft_reward == "mode-target") {
        reward_fn = [](Vec2 x, double) { return mode_target_reward(x); };
      } else {
        const RewardConfig rcfg = cfg.reward;
        reward_fn = [rcfg](Vec2 x, double) { return motion_proxy_reward(x, {2.0, 0.0}, rcfg); };
      }
      const double c = cfg.nft.conditionings.front();
      const double before = mode_fraction(model.current, c, cfg.nft.ode_steps, nft_eval_samples, 999);
      const TrainReport report = train_nft(model, reward_fn, cfg.nft);
      const double after = mode_fraction(model.current, c, cfg.nft.ode_steps, nft_eval_samples, 999);

      if (!nft_csv.empty()) {
        std::ofstream csv(nft_csv, std::ios::binary);
        if (!csv) throw Error(ErrorKind::IoFailure, "cannot write " + nft_csv);
        csv << to_csv(report);
      }
      emit(to_json(report), nft_out);
      std::fprintf(stderr, "rewarded-mode fraction: %.3f -> %.3f\n", before, after);
      return 0;
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "%s\nRun with --help for more information.\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
