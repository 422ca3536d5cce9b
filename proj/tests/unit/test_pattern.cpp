#include <gtest/gtest.h>

#include <map>
#include <set>

#include "advrand/errors.hpp"
#include "advrand/harness.hpp"
#include "advrand/image_ops.hpp"
#include "advrand/pattern.hpp"
#include "oracles.hpp"

using namespace advrand;

TEST(PatternCount, MatchesBruteForceAndKnownValues) {
  for (const auto& o : oracles::pattern_count_checks(40)) EXPECT_TRUE(o.pass) << o.name << ": " << o.detail;
}

TEST(PatternCount, DeskGeometry) {
  EXPECT_EQ(count_patterns(RandomizationParams::desk_default()), 284u);
  EXPECT_EQ(count_patterns(RandomizationParams::identity(28)), 1u);
}

TEST(PatternParams, Validation) {
  RandomizationParams p;
  p.resize_min = 36;
  EXPECT_THROW(p.validate(), ContractError);
  p = {};
  p.pad_target = 34;
  EXPECT_THROW(p.validate(), ContractError);
  p = {};
  p.flip_prob = 1.5;
  EXPECT_THROW(p.validate(), ContractError);
  EXPECT_NO_THROW(RandomizationParams::desk_default().validate());
}

TEST(PatternSample, RangesAndDeterminism) {
  const RandomizationParams p = RandomizationParams::desk_default();
  Rng a(9), b(9);
  std::set<std::size_t> sides;
  for (int i = 0; i < 2000; ++i) {
    const PatternSpec s = sample_pattern(p, a);
    EXPECT_EQ(s, sample_pattern(p, b));
    EXPECT_GE(s.resize_to, 28u);
    EXPECT_LT(s.resize_to, 36u);
    EXPECT_LE(s.pad_left, 36 - s.resize_to);
    EXPECT_LE(s.pad_top, 36 - s.resize_to);
    EXPECT_FALSE(s.flip);
    EXPECT_FALSE(s.brightness || s.saturation || s.hue || s.contrast);
    sides.insert(s.resize_to);
  }
  EXPECT_EQ(sides.size(), 8u);
}

TEST(PatternSample, JitterFactorsWithinRanges) {
  RandomizationParams p;
  p.jitter = ColorJitter::all();
  p.flip_prob = 0.5;
  Rng r(10);
  std::size_t flips = 0;
  for (int i = 0; i < 1000; ++i) {
    const PatternSpec s = sample_pattern(p, r);
    ASSERT_TRUE(s.brightness && s.saturation && s.hue && s.contrast);
    EXPECT_LE(std::abs(*s.brightness), 32.0 / 255.0);
    EXPECT_GE(*s.saturation, 0.5);
    EXPECT_LE(*s.saturation, 1.5);
    EXPECT_LE(std::abs(*s.hue), 0.2);
    EXPECT_GE(*s.contrast, 0.5);
    EXPECT_LE(*s.contrast, 1.5);
    flips += s.flip;
  }
  EXPECT_GT(flips, 400u);
  EXPECT_LT(flips, 600u);
}

TEST(PatternSample, IdentityParamsGiveIdentity) {
  Rng r(11);
  const RandomizationParams p = RandomizationParams::identity(28);
  const PatternSpec s = sample_pattern(p, r);
  EXPECT_EQ(s, PatternSpec::geometric(28, 0, 0));
  Tensor img({28, 28, 3});
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = r.uniform();
  EXPECT_EQ(apply_pattern(img, s, 28), img);
}

TEST(PatternApply, EqualsResizeThenPad) {
  Rng r(12);
  Tensor img({28, 28, 3});
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = r.uniform();
  const PatternSpec s = PatternSpec::geometric(31, 2, 4);
  EXPECT_EQ(apply_pattern(img, s, 36), pad_zero(resize_bilinear(img, 31, 31), 4, 2, 36, 36));
  PatternSpec f = s;
  f.flip = true;
  EXPECT_EQ(apply_pattern(img, f, 36), pad_zero(resize_bilinear(flip_horizontal(img), 31, 31), 4, 2, 36, 36));
}

TEST(PatternApply, RejectsPatternOffCanvas) {
  EXPECT_THROW(apply_pattern(Tensor({28, 28, 3}), PatternSpec::geometric(34, 3, 0), 36), ContractError);
}

TEST(PatternSets, CenteredAndEnsemble) {
  const RandomizationParams p = RandomizationParams::desk_default();
  EXPECT_EQ(centered_pattern(p), PatternSpec::geometric(28, 4, 4));
  RandomizationParams odd = p;
  odd.pad_target = 35;
  odd.resize_max_exclusive = 35;
  EXPECT_THROW(centered_pattern(odd), ContractError);

  const auto set = default_ensemble_patterns(p);
  EXPECT_EQ(set.size(), 21u);
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> unique;
  std::map<std::size_t, int> per_side;
  for (const auto& s : set) {
    EXPECT_NO_THROW(s.validate(36));
    unique.insert({s.resize_to, s.pad_left, s.pad_top});
    ++per_side[s.resize_to];
  }
  EXPECT_EQ(unique.size(), 21u);
  EXPECT_EQ(per_side.size(), 5u);
  EXPECT_EQ(per_side[36], 1);
  EXPECT_EQ(per_side.begin()->first, 28u);
}
