#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace motionalign {

/// Motion edit types plus a fallback for unrecognized labels.
enum class Category {
  PosePosture,
  LocomotionDistance,
  ObjectStateFormation,
  OrientationViewpoint,
  SubjectObjectInteraction,
  InterSubjectInteraction,
  Other,
};

std::string_view to_string(Category c);
// Case-insensitive; accepts the canonical snake_case names and the display
// labels ("Pose / Posture"). Returns false for unknown labels.
bool parse_category(std::string_view text, Category& out);

struct ManifestEntry {
  std::string id;
  Category category = Category::Other;
  bool category_unknown = false;  // original label was not recognized
  std::string instruction;
  std::filesystem::path input_path;
  std::filesystem::path gt_path;
  std::map<std::string, std::filesystem::path> outputs;  // model name -> edited image
};

struct BenchmarkManifest {
  std::filesystem::path source;
  std::vector<ManifestEntry> entries;
};

// One JSON object per line:
//   {"id": "e1", "category": "pose", "instruction": "...",
//    "input": "in.png", "gt": "gt.png", "outputs": {"model": "out.png"}}
// Relative paths resolve against the manifest's directory. Blank lines and
// lines starting with '#' are skipped. Throws ParseError (with line number),
// DuplicateId, or MissingReferencedFile listing every missing path when
// `check_files` is set.
BenchmarkManifest load_manifest(const std::filesystem::path& path, bool check_files = true);
BenchmarkManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir,
                                 bool check_files = true);

// Sidecar of externally computed scores, one JSON object per line:
//   {"entry_id": "e1", "model": "m", "name": "mllm", "value": 0.6}
// Keyed entry_id -> model -> score name -> value.
using ExternalScores = std::map<std::string, std::map<std::string, std::map<std::string, double>>>;
ExternalScores load_external_scores(const std::filesystem::path& path);

}  // namespace motionalign
