#include <gtest/gtest.h>

#include "motionalign/config.hpp"
#include "support/expect_error.hpp"
#include "support/temp_dir.hpp"

using namespace motionalign;

TEST(Config, ApplyAndGet) {
  ToolConfig cfg;
  apply_setting(cfg, "q", "0.5");
  apply_setting(cfg, "window_radius", "3");
  apply_setting(cfg, "dmin_mode", "identical_pair");
  apply_setting(cfg, "optimizer", "sgd");
  apply_setting(cfg, "conditionings", "0,1.5");
  EXPECT_EQ(cfg.reward.q, 0.5);
  EXPECT_EQ(cfg.estimator.window_radius, 3);
  EXPECT_EQ(cfg.reward.dmin_mode, DminMode::IdenticalPair);
  EXPECT_EQ(cfg.nft.optimizer, OptimizerKind::Sgd);
  EXPECT_EQ(cfg.nft.conditionings, (std::vector<double>{0.0, 1.5}));
  EXPECT_EQ(get_setting(cfg, "q"), "0.5");
}

TEST(Config, OptionalBoundsAcceptAuto) {
  ToolConfig cfg;
  apply_setting(cfg, "d_max", "2.5");
  EXPECT_EQ(cfg.reward.d_max, 2.5);
  apply_setting(cfg, "d_max", "auto");
  EXPECT_FALSE(cfg.reward.d_max.has_value());
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  ToolConfig cfg;
  EXPECT_ERROR_KIND(apply_setting(cfg, "nope", "1"), ErrorKind::InvalidConfig);
  EXPECT_ERROR_KIND(apply_setting(cfg, "q", "abc"), ErrorKind::InvalidConfig);
  EXPECT_ERROR_KIND(apply_setting(cfg, "levels", "2.5"), ErrorKind::InvalidConfig);
}

TEST(Config, ParseKeyValues) {
  const auto kv = parse_key_values("# comment\n q = 0.3 # trailing\n\nalpha=0.6\n");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"q", "0.3"}));
  EXPECT_EQ(kv[1].second, "0.6");
  EXPECT_ERROR_KIND(parse_key_values("q 0.3\n"), ErrorKind::ParseError);
}

TEST(Config, PrintedConfigReloadsToSameValues) {
  ToolConfig cfg;
  apply_setting(cfg, "eps", "1e-8");
  apply_setting(cfg, "rho_min", "0.02");
  testsupport::TempDir dir;
  testsupport::write_bytes(dir / "c.conf", format_config(cfg));
  ToolConfig back;
  load_config_file(back, dir / "c.conf");
  for (const auto& key : config_keys()) EXPECT_EQ(get_setting(back, key.name), get_setting(cfg, key.name)) << key.name;
}

TEST(Config, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1e-12, 6.30957344480193e-4, 3.0}) EXPECT_EQ(std::stod(format_double(v)), v);
}
