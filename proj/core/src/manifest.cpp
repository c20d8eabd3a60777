#include "motionalign/manifest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "motionalign/error.hpp"

namespace motionalign {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CategoryName {
  Category category;
  std::string_view canonical;
  std::string_view display;
};

constexpr std::array<CategoryName, 7> kCategories{{
    {Category::PosePosture, "pose_posture", "pose / posture"},
    {Category::LocomotionDistance, "locomotion_distance", "locomotion / distance"},
    {Category::ObjectStateFormation, "object_state_formation", "object state / formation"},
    {Category::OrientationViewpoint, "orientation_viewpoint", "orientation / viewpoint"},
    {Category::SubjectObjectInteraction, "subject_object_interaction", "subject-object interaction"},
    {Category::InterSubjectInteraction, "inter_subject_interaction", "inter-subject interaction"},
    {Category::Other, "other", "other"},
}};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
  if (!obj.contains(key) || !obj[key].is_string()) {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": missing string field '" + key + "'");
  }
  return obj[key].get<std::string>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

std::string_view to_string(Category c) {
  for (const auto& n : kCategories) {
    if (n.category == c) return n.canonical;
  }
  return "other";
}

bool parse_category(std::string_view text, Category& out) {
  std::string key = lower(trim(text));
  // Short forms: "pose", "locomotion", ...
  static const std::array<std::pair<std::string_view, Category>, 6> kShort{{
      {"pose", Category::PosePosture},
      {"locomotion", Category::LocomotionDistance},
      {"object_state", Category::ObjectStateFormation},
      {"orientation", Category::OrientationViewpoint},
      {"subject_object", Category::SubjectObjectInteraction},
      {"inter_subject", Category::InterSubjectInteraction},
  }};
  for (const auto& n : kCategories) {
    if (key == n.canonical || key == n.display) {
      out = n.category;
      return true;
    }
  }
  for (const auto& [name, cat] : kShort) {
    if (key == name) {
      out = cat;
      return true;
    }
  }
  return false;
}

BenchmarkManifest parse_manifest(std::string_view text, const fs::path& base_dir, bool check_files) {
  BenchmarkManifest manifest;
  std::set<std::string> ids;
  std::vector<std::string> missing;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object()) throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": expected an object");

    ManifestEntry entry;
    entry.id = require_string(obj, "id", line_no);
    if (entry.id.empty()) throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": empty id");
    if (!ids.insert(entry.id).second) {
      throw Error(ErrorKind::DuplicateId, "line " + std::to_string(line_no) + ": id '" + entry.id + "'");
    }
    const std::string category = obj.contains("category") && obj["category"].is_string()
                                     ? obj["category"].get<std::string>()
                                     : std::string("other");
    if (!parse_category(category, entry.category)) {
      entry.category = Category::Other;
      entry.category_unknown = true;
    }
    if (obj.contains("instruction") && obj["instruction"].is_string()) {
      entry.instruction = obj["instruction"].get<std::string>();
    }
    entry.input_path = resolve(base_dir, require_string(obj, "input", line_no));
    entry.gt_path = resolve(base_dir, require_string(obj, "gt", line_no));
    if (obj.contains("outputs")) {
      if (!obj["outputs"].is_object()) {
        throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": 'outputs' must be an object");
      }
      for (const auto& [model, path] : obj["outputs"].items()) {
        if (!path.is_string()) {
          throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": output path for '" + model +
                                                 "' must be a string");
        }
        entry.outputs.emplace(model, resolve(base_dir, path.get<std::string>()));
      }
    }

    if (check_files) {
      std::error_code ec;
      auto note = [&](const fs::path& p) {
        if (!fs::is_regular_file(p, ec)) missing.push_back(entry.id + ": " + p.string());
      };
      note(entry.input_path);
      note(entry.gt_path);
      for (const auto& [model, p] : entry.outputs) note(p);
    }
    manifest.entries.push_back(std::move(entry));
  }

  if (!missing.empty()) {
    std::string listing;
    for (const auto& m : missing) listing += "\n  " + m;
    throw Error(ErrorKind::MissingReferencedFile, std::to_string(missing.size()) + " missing path(s):" + listing);
  }
  return manifest;
}

BenchmarkManifest load_manifest(const fs::path& path, bool check_files) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  BenchmarkManifest manifest = parse_manifest(buffer.str(), path.parent_path(), check_files);
  manifest.source = path;
  return manifest;
}

ExternalScores load_external_scores(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  ExternalScores scores;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    try {
      const json obj = json::parse(line);
      scores[obj.at("entry_id").get<std::string>()][obj.at("model").get<std::string>()]
            [obj.at("name").get<std::string>()] = obj.at("value").get<double>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ParseError, path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return scores;
}

}  // namespace motionalign
