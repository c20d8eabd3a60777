#include "corpus.hpp"

#include <fstream>
#include <json.hpp>

#include "motionalign/image.hpp"
#include "texture.hpp"

namespace testsupport {

std::filesystem::path build_corpus(const std::filesystem::path& dir, const CorpusSpec& spec) {
  std::filesystem::create_directories(dir);
  const auto manifest = dir / "manifest.jsonl";
  std::ofstream out(manifest);
  for (int i = 0; i < spec.entries; ++i) {
    const std::string id = "e" + std::to_string(i);
    const Texture tex(spec.seed * 1000 + static_cast<std::uint64_t>(i));
    motionalign::write_png(tex.render_rgb(spec.width, spec.height), dir / (id + "_in.png"));
    motionalign::write_png(tex.render_rgb(spec.width, spec.height, spec.shift_x, spec.shift_y), dir / (id + "_gt.png"));
    nlohmann::ordered_json j{{"id", id},
                             {"category", spec.categories[static_cast<std::size_t>(i) % spec.categories.size()]},
                             {"instruction", "move the subject"},
                             {"input", id + "_in.png"},
                             {"gt", id + "_gt.png"}};
    j["outputs"] = nlohmann::ordered_json::object();
    for (const auto& m : spec.copy_gt_models) j["outputs"][m] = id + "_gt.png";
    for (const auto& m : spec.copy_input_models) j["outputs"][m] = id + "_in.png";
    out << j.dump() << '\n';
  }
  return manifest;
}

}  // namespace testsupport
