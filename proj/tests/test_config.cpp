#include <gtest/gtest.h>

#include <sstream>

#include "mrasim/config.hpp"

using namespace mrasim;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

ErrorCode parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "accepted: " << text;
  return ErrorCode::IoError;
}

}  // namespace

TEST(Config, DefaultsAreValid) {
  ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.trials, 1000u);
  EXPECT_EQ(c.nrgs, 100u);
  EXPECT_EQ(c.subarrays, 1u);
  EXPECT_DOUBLE_EQ(c.analog.variation_sigma, 0.2);
}

TEST(Config, FullScale) {
  ExperimentConfig c;
  c.make_full();
  EXPECT_EQ(c.trials, 10000u);
  EXPECT_EQ(c.subarrays, 3u);
  EXPECT_EQ(c.mc_bitlines, c.geometry.n_bitlines);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, EmptyInputKeepsDefaults) {
  EXPECT_EQ(to_ini(parse("")), to_ini(ExperimentConfig{}));
}

TEST(Config, CanonicalTextRoundTrips) {
  ExperimentConfig c;
  c.seed = 42;
  c.analog.variation_sigma = 0.35;
  c.timing.t_rp = 12.25;
  c.profile.biased_senseamps = true;
  c.polarity = PolarityRule::AllAnti;
  c.geometry.decoder.group_widths = {1, 2, 2, 2, 1};
  c.success.rates[{11, 32}] = 0.125;
  c.destruct_pattern = "0ff0";
  const auto back = parse(to_ini(c));
  EXPECT_EQ(to_ini(back), to_ini(c));
  EXPECT_EQ(config_digest(back), config_digest(c));
  EXPECT_EQ(back.geometry, c.geometry);
  EXPECT_DOUBLE_EQ(back.success.lookup(11, 32), 0.125);
}

TEST(Config, DigestTracksEveryField) {
  ExperimentConfig a, b;
  EXPECT_EQ(config_digest(a), config_digest(b));
  EXPECT_EQ(config_digest(a).size(), 16u);
  b.seed = 2;
  EXPECT_NE(config_digest(a), config_digest(b));
  b = a;
  b.timing.t_faw = 30;
  EXPECT_NE(config_digest(a), config_digest(b));
  b = a;
  b.analog.static_variation = false;
  EXPECT_NE(config_digest(a), config_digest(b));
}

TEST(Config, SectionsApplyKeys) {
  const auto c = parse(
      "[dram-state]\nn_bitlines = 1024\nbiased_senseamps = true\n"
      "[analog-model]\nvariation_sigma = 0.4\nspatial_profile = m\n"
      "[command-engine]\nt_faw = 30\n"
      "[bitserial-compute]\nsuccess_m9_n32 = 0.5\n"
      "[cli-experiments]\nseed = 18446744073709551615\ntrials = 7\n");
  EXPECT_EQ(c.geometry.n_bitlines, 1024u);
  EXPECT_TRUE(c.profile.biased_senseamps);
  EXPECT_DOUBLE_EQ(c.analog.variation_sigma, 0.4);
  EXPECT_EQ(c.spatial_profile, "m");
  EXPECT_DOUBLE_EQ(c.timing.t_faw, 30);
  EXPECT_DOUBLE_EQ(c.success.lookup(9, 32), 0.5);
  EXPECT_EQ(c.seed, 18446744073709551615ull);
  EXPECT_EQ(c.trials, 7u);
}

TEST(Config, RejectsBadInput) {
  EXPECT_EQ(parse_error("[analog-model]\nvariation_sigmaa = 0.2\n"), ErrorCode::ConfigError);
  EXPECT_EQ(parse_error("[nonsense]\nx = 1\n"), ErrorCode::ConfigError);
  EXPECT_EQ(parse_error("seed = 3\n"), ErrorCode::ConfigError);
  EXPECT_EQ(parse_error("[cli-experiments]\ntrials = many\n"), ErrorCode::ConfigError);
  EXPECT_EQ(parse_error("[cli-experiments]\ntrials = 0\n"), ErrorCode::ConfigError);
  EXPECT_EQ(parse_error("[dram-state]\nbiased_senseamps = maybe\n"), ErrorCode::ConfigError);
  EXPECT_EQ(parse_error("[dram-state]\npolarity = sideways\n"), ErrorCode::ConfigError);
  EXPECT_EQ(parse_error("[command-engine]\nt_rp = 40\n"), ErrorCode::ConfigError);
  EXPECT_EQ(parse_error("[analog-model]\nvariation_sigma = 1.5\n"), ErrorCode::ConfigError);
  EXPECT_EQ(parse_error("[row-decoder]\ngroup_widths = 1,9\n"), ErrorCode::ConfigError);
  EXPECT_EQ(parse_error("[destruct]\npattern = xyz\n"), ErrorCode::ConfigError);
  EXPECT_EQ(parse_error("[bitserial-compute]\nsuccess_m3_n32 = 1.5\n"), ErrorCode::ConfigError);
  EXPECT_EQ(parse_error("[bitserial-compute]\nsuccess_m3_n32x = 0.5\n"), ErrorCode::ConfigError);
  EXPECT_EQ(parse_error("[cli-experiments]\nsubarrays = 129\n"), ErrorCode::ConfigError);
  EXPECT_EQ(parse_error("[cli-experiments\n"), ErrorCode::ConfigError);
}

TEST(Config, MissingFile) {
  try {
    load_config("/nonexistent/config.ini");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}
