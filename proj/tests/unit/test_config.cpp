#include <gtest/gtest.h>

#include "advrand/config.hpp"
#include "advrand/errors.hpp"
#include "advrand/io.hpp"

using namespace advrand;

namespace {

ParseError parse_error(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    parse_config(text, overrides);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no ParseError for:\n" << text;
  return ParseError("none", 0);
}

}  // namespace

TEST(Config, DefaultsResolveAndRoundTrip) {
  const ExperimentConfig c = parse_config("");
  EXPECT_EQ(c.master_seed, 2017u);
  EXPECT_EQ(c.evaluate.n_images, 500u);
  EXPECT_EQ(c.defense.params, RandomizationParams::desk_default());
  ASSERT_EQ(c.attacks.size(), 5u);
  EXPECT_EQ(c.attacks[0].name, "fgsm2");
  EXPECT_EQ(c.attacks[4].name, "cw");
  const std::string r = c.resolved();
  EXPECT_EQ(parse_config(r).resolved(), r);
}

TEST(Config, ShippedConfigsParseAndRoundTrip) {
  for (const char* name : {"desk.ini", "smoke.ini"}) {
    const ExperimentConfig c = load_config(std::string(ADVRAND_SOURCE_DIR) + "/configs/" + name);
    EXPECT_EQ(parse_config(c.resolved()).resolved(), c.resolved()) << name;
  }
  // desk.ini documents the defaults
  EXPECT_EQ(load_config(std::string(ADVRAND_SOURCE_DIR) + "/configs/desk.ini").resolved(), parse_config("").resolved());
}

TEST(Config, ResolvedLeavesOutRuntimeFields) {
  const ExperimentConfig a = parse_config("workers = 8\noutput = elsewhere\n");
  EXPECT_EQ(a.workers, 8u);
  EXPECT_EQ(a.output, "elsewhere");
  EXPECT_EQ(a.resolved(), parse_config("").resolved());
}

TEST(Config, SectionsRatiosListsAndJitter) {
  const ExperimentConfig c = parse_config(R"(
# comment
master_seed = 5   ; trailing comment
[data]
train_count = 100
[defense]
resize_min = 30
n_iterations = 4
brightness = off
hue = 0.1
saturation = 0.5, 1.5
[sweep]
counts = 1, 2, 3
[attack.big]
kind = fgsm
epsilon = 16/255
[attack.deepfool]
kind = deepfool
[attack.cw]
kind = cw
)");
  EXPECT_EQ(c.master_seed, 5u);
  EXPECT_EQ(c.data.synthetic.train_count, 100u);
  EXPECT_EQ(c.defense.params.resize_min, 30u);
  EXPECT_EQ(c.defense.n_iterations, 4u);
  EXPECT_FALSE(c.defense.params.jitter.brightness_max);
  EXPECT_EQ(c.defense.params.jitter.hue_max, 0.1);
  EXPECT_EQ(c.defense.params.jitter.saturation, (std::pair{0.5, 1.5}));
  EXPECT_EQ(c.sweep.counts, (std::vector<std::size_t>{1, 2, 3}));
  ASSERT_EQ(c.attacks.size(), 3u);
  EXPECT_EQ(c.attacks[0].config, AttackConfig::fgsm(16.0 / 255.0));
  EXPECT_EQ(c.attacks[2].name, "cw");
}

TEST(Config, OverridesWinOverText) {
  const ExperimentConfig c = parse_config("[evaluate]\nn_images = 10\n",
                                          {"evaluate.n_images=20", "master_seed=3", "attack.cw.c=7"});
  EXPECT_EQ(c.evaluate.n_images, 20u);
  EXPECT_EQ(c.master_seed, 3u);
  EXPECT_EQ(c.attack("cw").config.c, 7.0);
  EXPECT_THROW(c.attack("nope"), ContractError);
}

TEST(Config, ParseNumber) {
  EXPECT_DOUBLE_EQ(parse_number("5/255"), 5.0 / 255.0);
  EXPECT_DOUBLE_EQ(parse_number("-1e-3"), -1e-3);
  EXPECT_DOUBLE_EQ(parse_number(" 0.5 "), 0.5);
  EXPECT_THROW(parse_number("abc"), ContractError);
  EXPECT_THROW(parse_number("1/0"), ContractError);
}

TEST(Config, ErrorsCarryLineAndKey) {
  ParseError e = parse_error("\n[data]\ntrain_cont = 5\n");
  EXPECT_EQ(e.line(), 3);
  EXPECT_EQ(e.key(), "train_cont");
  e = parse_error("[bogus]\n");
  EXPECT_EQ(e.line(), 1);
  e = parse_error("[data\n");
  EXPECT_EQ(e.line(), 1);
  e = parse_error("[data]\nseed = 1\nseed = 2\n");
  EXPECT_EQ(e.line(), 3);
  EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  e = parse_error("[model]\nadversarial = maybe\n");
  EXPECT_EQ(e.key(), "adversarial");
  e = parse_error("[attack.x]\nepsilon = 0.1\n");
  EXPECT_EQ(e.key(), "kind");
  e = parse_error("", {"evaluate.nope=1"});
  EXPECT_EQ(e.line(), 0);
  parse_error("", {"no_equals_sign"});
}

TEST(Config, CrossFieldValidation) {
  parse_error("[evaluate]\ndefense_runs = 0\n");
  parse_error("[evaluate]\nvariant_attack = missing\n");
  parse_error("[challenge]\nmodel = other\n");
  parse_error("[defense]\nresize_min = 40\n");
  parse_error("[attack.a]\nkind = fgsm\nepsilon = 0.1\n[attack.b]\nkind = cw\n[diagnose]\nattacks = a, zzz\n");
}

TEST(Config, DerivedDefenses) {
  const ExperimentConfig c = parse_config("");
  const DefenseConfig d = c.downscale_defense();
  EXPECT_EQ(d.params.resize_min, 20u);
  EXPECT_EQ(d.params.resize_max_exclusive, 28u);
  EXPECT_EQ(d.params.pad_target, 28u);
  const DefenseConfig ch = c.challenge_defense();
  EXPECT_EQ(ch.params.resize_min, 31u);
  EXPECT_EQ(ch.params.flip_prob, 0.5);
  EXPECT_EQ(ch.n_iterations, 30u);
}

TEST(Config, MissingFileIsAPathError) {
  EXPECT_THROW(load_config("/nonexistent/advrand.ini"), PathError);
}
