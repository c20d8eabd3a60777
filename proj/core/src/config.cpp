#include "motionalign/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "motionalign/error.hpp"

namespace motionalign {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorKind::InvalidConfig, "invalid value '" + std::string(value) + "' for " + std::string(key));
}

double to_double(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) bad_value(key, text);
  return out;
}

long long to_int(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) bad_value(key, text);
  return out;
}

std::optional<double> to_optional(std::string_view key, std::string_view text) {
  if (trim(text) == "auto") return std::nullopt;
  return to_double(key, text);
}

std::string optional_text(const std::optional<double>& v) { return v ? format_double(*v) : "auto"; }

struct Binding {
  ConfigKey key;
  std::function<void(ToolConfig&, std::string_view)> set;
  std::function<std::string(const ToolConfig&)> get;
};

#define MA_DOUBLE(section, field, name, help)                                                        \
  Binding {                                                                                          \
    {name, #section, help}, [](ToolConfig& c, std::string_view v) { c.section.field = to_double(name, v); }, \
        [](const ToolConfig& c) { return format_double(c.section.field); }                           \
  }
#define MA_INT(section, field, name, help)                                                            \
  Binding {                                                                                           \
    {name, #section, help},                                                                           \
        [](ToolConfig& c, std::string_view v) { c.section.field = static_cast<decltype(c.section.field)>(to_int(name, v)); }, \
        [](const ToolConfig& c) { return std::to_string(c.section.field); }                           \
  }
#define MA_OPTIONAL(section, field, name, help)                                                          \
  Binding {                                                                                              \
    {name, #section, help}, [](ToolConfig& c, std::string_view v) { c.section.field = to_optional(name, v); }, \
        [](const ToolConfig& c) { return optional_text(c.section.field); }                               \
  }

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> table = {
      MA_INT(estimator, pyramid_levels, "pyramid_levels", "pyramid levels for Lucas-Kanade"),
      MA_INT(estimator, window_radius, "window_radius", "LK window radius in pixels"),
      MA_INT(estimator, iterations_per_level, "iterations_per_level", "LK warping iterations per level"),
      MA_DOUBLE(estimator, min_eigen, "min_eigen", "smallest structure-tensor eigenvalue accepted"),

      MA_DOUBLE(reward, q, "q", "robust exponent of the magnitude term"),
      MA_DOUBLE(reward, eps, "eps", "numerical stability constant"),
      MA_DOUBLE(reward, tau_m, "tau_m", "direction-weight motion threshold (normalized)"),
      MA_DOUBLE(reward, tau_move, "tau_move", "movement hinge margin (normalized)"),
      MA_DOUBLE(reward, alpha, "alpha", "weight of D_mag"),
      MA_DOUBLE(reward, beta_dir, "beta_dir", "weight of D_dir"),
      MA_DOUBLE(reward, lambda_move, "lambda_move", "weight of M_move"),
      MA_OPTIONAL(reward, d_max, "d_max", "reward normalization upper bound"),
      MA_INT(reward, levels, "levels", "reward quantization levels"),
      Binding{{"dmin_mode", "reward", "zero_pair | identical_pair"},
              [](ToolConfig& c, std::string_view v) {
                const std::string s = trim(v);
                if (s == "zero_pair") {
                  c.reward.dmin_mode = DminMode::ZeroPair;
                } else if (s == "identical_pair") {
                  c.reward.dmin_mode = DminMode::IdenticalPair;
                } else {
                  bad_value("dmin_mode", v);
                }
              },
              [](const ToolConfig& c) {
                return std::string(c.reward.dmin_mode == DminMode::ZeroPair ? "zero_pair" : "identical_pair");
              }},

      MA_DOUBLE(mas, alpha_mas, "alpha_mas", "MAS balance between D_mag and D_dir"),
      MA_OPTIONAL(mas, d_min, "mas_d_min", "MAS normalization lower bound"),
      MA_OPTIONAL(mas, d_max, "mas_d_max", "MAS normalization upper bound"),
      MA_DOUBLE(mas, rho_min, "rho_min", "static-failure motion ratio threshold"),

      MA_DOUBLE(nft, beta_mix, "beta_mix", "implicit policy mixing strength"),
      MA_DOUBLE(nft, kl_weight, "kl_weight", "velocity penalty toward v_old"),
      MA_INT(nft, group_size, "group_size", "samples per group"),
      MA_INT(nft, groups, "groups", "groups per round"),
      MA_INT(nft, ode_steps, "ode_steps", "Euler steps when sampling"),
      MA_DOUBLE(nft, ban_mean, "ban_mean", "drop groups with mean raw reward >= this"),
      MA_DOUBLE(nft, ban_std, "ban_std", "drop groups with raw reward std <= this"),
      MA_DOUBLE(nft, learning_rate, "learning_rate", "optimizer step size"),
      MA_INT(nft, rounds, "rounds", "NFT rounds"),
      MA_INT(nft, epochs_per_round, "epochs_per_round", "passes over kept samples per round"),
      MA_INT(nft, minibatch, "minibatch", "samples per optimizer step"),
      MA_DOUBLE(nft, guidance_scale, "guidance_scale", "classifier-free guidance at sampling (1 = off)"),
      Binding{{"conditionings", "nft", "comma-separated conditioning values cycled over groups"},
              [](ToolConfig& c, std::string_view v) {
                std::vector<double> values;
                std::string item;
                std::istringstream in{std::string(v)};
                while (std::getline(in, item, ',')) values.push_back(to_double("conditionings", item));
                if (values.empty()) bad_value("conditionings", v);
                c.nft.conditionings = std::move(values);
              },
              [](const ToolConfig& c) {
                std::string out;
                for (std::size_t i = 0; i < c.nft.conditionings.size(); ++i) {
                  if (i) out += ',';
                  out += format_double(c.nft.conditionings[i]);
                }
                return out;
              }},
      Binding{{"optimizer", "nft", "adam | sgd"},
              [](ToolConfig& c, std::string_view v) {
                const std::string s = trim(v);
                if (s == "adam") {
                  c.nft.optimizer = OptimizerKind::Adam;
                } else if (s == "sgd") {
                  c.nft.optimizer = OptimizerKind::Sgd;
                } else {
                  bad_value("optimizer", v);
                }
              },
              [](const ToolConfig& c) { return std::string(c.nft.optimizer == OptimizerKind::Adam ? "adam" : "sgd"); }},
      Binding{{"seed", "nft", "random seed"},
              [](ToolConfig& c, std::string_view v) { c.nft.seed = static_cast<std::uint64_t>(to_int("seed", v)); },
              [](const ToolConfig& c) { return std::to_string(c.nft.seed); }},
  };
  return table;
}

#undef MA_DOUBLE
#undef MA_INT
#undef MA_OPTIONAL

const Binding& find_binding(std::string_view key) {
  const auto& table = bindings();
  const auto it = std::find_if(table.begin(), table.end(), [&](const Binding& b) { return b.key.name == key; });
  if (it == table.end()) throw Error(ErrorKind::InvalidConfig, "unknown configuration key '" + std::string(key) + "'");
  return *it;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return ec == std::errc() ? std::string(buf, ptr) : std::to_string(value);
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& b : bindings()) out.push_back(b.key);
    return out;
  }();
  return keys;
}

void apply_setting(ToolConfig& cfg, std::string_view key, std::string_view value) {
  find_binding(trim(key)).set(cfg, value);
}

std::string get_setting(const ToolConfig& cfg, std::string_view key) { return find_binding(key).get(cfg); }

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::ParseError, "config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw Error(ErrorKind::ParseError, "config line " + std::to_string(line_no) + ": empty key or value");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

void load_config_file(ToolConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  for (const auto& [key, value] : parse_key_values(buffer.str())) apply_setting(cfg, key, value);
}

std::string format_config(const ToolConfig& cfg, const std::vector<std::string_view>& sections) {
  std::ostringstream out;
  std::string_view current;
  for (const auto& b : bindings()) {
    if (!sections.empty() && std::find(sections.begin(), sections.end(), b.key.section) == sections.end()) continue;
    if (b.key.section != current) {
      if (!current.empty()) out << '\n';
      out << "# " << b.key.section << '\n';
      current = b.key.section;
    }
    out << b.key.name << " = " << b.get(cfg);
    if (b.key.name == "d_max") out << "  # effective " << format_double(cfg.reward.effective_d_max());
    if (b.key.name == "mas_d_min") out << "  # effective " << format_double(cfg.mas.effective_d_min(cfg.reward));
    if (b.key.name == "mas_d_max") out << "  # effective " << format_double(cfg.mas.effective_d_max(cfg.reward));
    out << '\n';
  }
  return out.str();
}

}  // namespace motionalign
