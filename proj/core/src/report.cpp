#include <json.hpp>
#include <sstream>

#include "motionalign/bench.hpp"
#include "motionalign/config.hpp"

namespace motionalign {

using nlohmann::ordered_json;

namespace {

ordered_json reward_json(const RewardBreakdown& r) {
  return {{"d_mag", r.d_mag},   {"d_dir", r.d_dir},     {"m_move", r.m_move}, {"d_comb", r.d_comb},
          {"d_min_star", r.d_min_star}, {"d_tilde", r.d_tilde}, {"r_cont", r.r_cont}, {"r_motion", r.r_motion}};
}

ordered_json mas_json(const MasResult& m) {
  return {{"d_ovl", m.d_ovl}, {"mas", m.mas}, {"static_failure", m.static_failure}, {"motion_ratio", m.motion_ratio}};
}

ordered_json entry_json(const EntryScore& s) {
  ordered_json j{{"entry_id", s.entry_id},
                 {"model", s.model},
                 {"category", std::string(to_string(s.category))},
                 {"resized", s.resized},
                 {"reward", reward_json(s.reward)},
                 {"mas", mas_json(s.mas)}};
  if (!s.external.empty()) j["external"] = s.external;
  if (s.combined) j["combined"] = *s.combined;
  return j;
}

ordered_json error_json(const EntryError& e) {
  return {{"entry_id", e.entry_id}, {"model", e.model}, {"message", e.message}};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_json(const RewardBreakdown& reward, const MasResult& mas) {
  return ordered_json{{"reward", reward_json(reward)}, {"mas", mas_json(mas)}}.dump(2);
}

std::string to_json(const EntryScore& score) { return entry_json(score).dump(2); }

std::string to_json(const MotionStats& stats) {
  ordered_json j{{"mean_normalized_magnitude", stats.mean},
                 {"stddev", stats.stddev},
                 {"scored", stats.per_entry.size()},
                 {"failed", stats.errors.size()},
                 {"sampled_ids", stats.sampled_ids},
                 {"per_entry", stats.per_entry}};
  j["errors"] = ordered_json::array();
  for (const auto& e : stats.errors) j["errors"].push_back(error_json(e));
  return j.dump(2);
}

std::string to_json(const Report& report) {
  ordered_json j;
  j["provenance"] = {{"config_hash", report.provenance.config_hash},
                     {"estimator", report.provenance.estimator},
                     {"manifest_hash", report.provenance.manifest_hash},
                     {"generated_at", report.provenance.generated_at},
                     {"elapsed_seconds", report.provenance.elapsed_seconds}};

  j["models"] = ordered_json::array();
  for (const auto& m : report.models) {
    ordered_json jm{{"model", m.model},
                    {"count", m.count},
                    {"failures", m.failures},
                    {"mean_mas", m.mean_mas},
                    {"mean_r_motion", m.mean_r_motion},
                    {"static_failure_rate", m.static_failure_rate}};
    if (m.mean_combined) jm["mean_combined"] = *m.mean_combined;
    jm["categories"] = ordered_json::object();
    for (const auto& [cat, agg] : m.categories) {
      jm["categories"][std::string(to_string(cat))] = {
          {"count", agg.count}, {"mean_mas", agg.mean_mas}, {"mean_r_motion", agg.mean_r_motion}};
    }
    j["models"].push_back(std::move(jm));
  }

  j["win_rate_metric"] = report.win_rate_metric;
  if (report.win_rates) {
    j["win_rates"] = {{"models", report.win_rates->models},
                      {"wins", report.win_rates->wins},
                      {"ties", report.win_rates->ties},
                      {"compared", report.win_rates->compared}};
  } else {
    j["win_rates"] = nullptr;
    j["win_rate_error"] = report.win_rate_error;
  }

  j["entries"] = ordered_json::array();
  for (const auto& s : report.entries) j["entries"].push_back(entry_json(s));
  j["errors"] = ordered_json::array();
  for (const auto& e : report.errors) j["errors"].push_back(error_json(e));
  return j.dump(2);
}

std::string to_csv(const Report& report) {
  std::ostringstream out;
  out << "entry_id,model,category,r_motion,d_mag,d_dir,m_move,mas,static_failure,errors\n";
  for (const auto& s : report.entries) {
    out << csv_field(s.entry_id) << ',' << csv_field(s.model) << ',' << to_string(s.category) << ','
        << format_double(s.reward.r_motion) << ',' << format_double(s.reward.d_mag) << ','
        << format_double(s.reward.d_dir) << ',' << format_double(s.reward.m_move) << ',' << format_double(s.mas.mas)
        << ',' << (s.mas.static_failure ? "true" : "false") << ",\n";
  }
  for (const auto& e : report.errors) {
    out << csv_field(e.entry_id) << ',' << csv_field(e.model) << ",,,,,,,," << csv_field(e.message) << '\n';
  }
  return out.str();
}

}  // namespace motionalign
