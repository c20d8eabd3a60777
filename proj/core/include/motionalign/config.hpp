#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "motionalign/estimator.hpp"
#include "motionalign/nft.hpp"
#include "motionalign/reward.hpp"

namespace motionalign {

/// Every tunable of the tool in one place: estimator, reward, MAS and toy NFT lab.
struct ToolConfig {
  EstimatorConfig estimator;
  RewardConfig reward;
  MasConfig mas;
  NftConfig nft;
};

struct ConfigKey {
  std::string_view name;
  std::string_view section;
  std::string_view help;
};

const std::vector<ConfigKey>& config_keys();

// Throws InvalidConfig for an unknown key or an unparsable value. Optional
// bounds (d_max, mas_d_min, mas_d_max) accept "auto".
void apply_setting(ToolConfig& cfg, std::string_view key, std::string_view value);
std::string get_setting(const ToolConfig& cfg, std::string_view key);

// `key = value` lines; '#' starts a comment; blank lines are ignored.
// Throws ParseError with the line number on malformed lines.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);
void load_config_file(ToolConfig& cfg, const std::filesystem::path& path);

// Re-loadable listing of the given sections ("estimator", "reward", "mas",
// "nft"); an empty list prints everything.
std::string format_config(const ToolConfig& cfg, const std::vector<std::string_view>& sections = {});

std::string format_double(double value);

}  // namespace motionalign
