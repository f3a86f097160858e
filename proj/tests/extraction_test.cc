#include "sta/extraction.h"

#include <gtest/gtest.h>

#include <cmath>

#include "sta/embedding.h"
#include "sta/transforms.h"
#include "test_util.h"

namespace sta {
namespace {

TEST(ExtractBits, Examples) {
  const std::vector<double> v = {0.5, 0.5, 0.1, 0.9};
  const PairList pairs = {{0, 1}, {2, 3}, {3, 2}};
  EXPECT_EQ(ExtractBits(v, pairs).ToString(), "010");  // ties read as 0
  EXPECT_THROW(ExtractBits(v, {{0, 4}}), std::invalid_argument);
}

TEST(ExtractBits, InvariantUnderStrictlyIncreasingMaps) {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const ImageBuffer x = testing::RandomImage(8, 8, 3, rng.NextU64());
    const Registry reg = testing::MakeRegistry(1, 40, x.shape(), {Domain::kPixel}, t);
    const auto& pairs = reg.users[0].secret.pixel_pairs;
    const BitString base = ExtractBits(x.pixels(), pairs);
    std::vector<double> mapped(x.pixels().begin(), x.pixels().end());
    const double a = rng.Uniform(0.1, 3);
    const double b = rng.Uniform(-1, 1);
    for (double& v : mapped) v = std::exp(a * v) + b;
    EXPECT_EQ(ExtractBits(mapped, pairs), base);
  }
}

TEST(ExtractBits, NegationGivesComplementWithoutTies) {
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    const ImageBuffer x = testing::RandomImage(8, 8, 1, rng.NextU64());
    const Registry reg = testing::MakeRegistry(1, 30, x.shape(), {Domain::kPixel}, t);
    const auto& pairs = reg.users[0].secret.pixel_pairs;
    std::vector<double> neg(x.pixels().begin(), x.pixels().end());
    for (double& v : neg) v = 1.0 - v;
    EXPECT_EQ(ExtractBits(neg, pairs), Complement(ExtractBits(x.pixels(), pairs)));
  }
}

TEST(DomainValues, MatchTransforms) {
  const ImageBuffer x = testing::RandomImage(12, 10, 3, 1);
  const auto pix = DomainValues(x, Domain::kPixel);
  EXPECT_TRUE(std::equal(pix.begin(), pix.end(), x.pixels().begin()));
  EXPECT_EQ(DomainValues(x, Domain::kFreq), FftMagnitude(Luminance(x)).values);
  EXPECT_EQ(DomainValues(x, Domain::kMellin),
            FourierMellin(Luminance(x), LogPolarGrid::Default(12, 10)).values);
}

TEST(ExtractWatermark, Errors) {
  const ImageBuffer x = testing::RandomImage(8, 8, 3, 1);
  const Registry reg = testing::MakeRegistry(1, 10, x.shape(), {Domain::kPixel}, 1);
  EXPECT_THROW(ExtractWatermark(x, reg.users[0].secret, Domain::kFreq), std::invalid_argument);
  EXPECT_THROW(ExtractWatermark(testing::RandomImage(8, 9, 3, 1), reg.users[0].secret,
                                Domain::kPixel),
               std::invalid_argument);
}

TEST(DoubleTailIndicator, Boundaries) {
  const DetectionPolicy p{25, 75, 0.5};
  EXPECT_TRUE(DoubleTailIndicator(25, 100, p));
  EXPECT_FALSE(DoubleTailIndicator(26, 100, p));
  EXPECT_FALSE(DoubleTailIndicator(74, 100, p));
  EXPECT_TRUE(DoubleTailIndicator(75, 100, p));
  EXPECT_TRUE(DoubleTailIndicator(0, 100, p));
  EXPECT_TRUE(DoubleTailIndicator(100, 100, p));
}

// Writes `user`'s watermark into x exactly by setting pair values.
ImageBuffer Imprint(ImageBuffer x, const UserRecord& user) {
  const auto& pairs = user.secret.pixel_pairs;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const bool one = user.watermark[i];
    x[pairs[i].a] = one ? 0.2 : 0.8;
    x[pairs[i].b] = one ? 0.8 : 0.2;
  }
  return x;
}

TEST(Attribute, FindsOwnerAndInvertedOwner) {
  const ImageShape shape{16, 16, 3};
  const Registry reg = testing::MakeRegistry(5, 100, shape, {Domain::kPixel}, 2);
  const DetectionPolicy policy{25, 75, 0.5};
  for (const UserRecord& user : reg.users) {
    const ImageBuffer x = Imprint(testing::RandomImage(16, 16, 3, 3), user);
    AttributionResult r = Attribute(x, reg, policy);
    ASSERT_TRUE(r.matched_user);
    EXPECT_EQ(*r.matched_user, user.user_id);
    EXPECT_EQ(r.distance, 0u);
    EXPECT_FALSE(r.inverted);
    EXPECT_TRUE(Detect(x, reg, policy));

    ImageBuffer neg = x;
    for (double& v : neg.pixels()) v = 1.0 - v;
    r = Attribute(neg, reg, policy);
    ASSERT_TRUE(r.matched_user);
    EXPECT_EQ(*r.matched_user, user.user_id);
    EXPECT_EQ(r.distance, 100u);
    EXPECT_TRUE(r.inverted);
  }
}

TEST(Attribute, TieGoesToEarlierUser) {
  ImageShape shape{4, 4, 1};
  Registry reg = testing::MakeRegistry(1, 4, shape, {Domain::kPixel}, 1);
  UserRecord twin = reg.users[0];
  twin.user_id = "twin";
  reg.users.push_back(twin);
  const ImageBuffer x = Imprint(ImageBuffer(4, 4, 1, 0.5), reg.users[0]);
  const auto r = Attribute(x, reg, DetectionPolicy{0, 4, 0.5});
  ASSERT_TRUE(r.matched_user);
  EXPECT_EQ(*r.matched_user, reg.users[0].user_id);
}

TEST(Attribute, UnwatermarkedImagesRarelyMatch) {
  const ImageShape shape{16, 16, 3};
  const Registry reg = testing::MakeRegistry(10, 100, shape, {Domain::kPixel}, 4);
  const DetectionPolicy policy{22, 78, 0.5};
  int hits = 0;
  for (int t = 0; t < 100; ++t) {
    hits += Detect(testing::RandomImage(16, 16, 3, 100 + t), reg, policy);
  }
  EXPECT_EQ(hits, 0);
}

TEST(Detect, EmptyRegistryNeverMatches) {
  Registry reg;
  const ImageBuffer x = testing::RandomImage(8, 8, 3, 1);
  EXPECT_FALSE(Detect(x, reg, DetectionPolicy{}));
  EXPECT_FALSE(Attribute(x, reg, DetectionPolicy{}).matched_user);
}

TEST(Attribute3, RequiresAllDomains) {
  const Registry reg = testing::MakeRegistry(1, 10, {16, 16, 3}, {Domain::kPixel}, 1);
  EXPECT_THROW(Attribute3(testing::RandomImage(16, 16, 3, 1), reg, DetectionPolicy{}),
               std::invalid_argument);
}

TEST(Attribute3, SurvivesCircularShiftThroughFreqDomain) {
  const ImageShape shape{32, 32, 3};
  const Registry reg = testing::MakeRegistry(
      3, 30, shape, {Domain::kPixel, Domain::kFreq, Domain::kMellin}, 5);
  const UserRecord& user = reg.users[1];
  EmbedConfig cfg = EmbedConfig::TripleDomain();
  EmbedReport report;
  const ImageBuffer x0 = testing::RandomImage(32, 32, 3, 9, 0.3, 0.7);
  const ImageBuffer x = Embed(x0, user, cfg, &report);
  ASSERT_GE(report.satisfied_fraction[Domain::kFreq], 1.0);
  const ImageBuffer shifted = CircularShift(x, 5, -7);
  EXPECT_EQ(ExtractWatermark(shifted, user.secret, Domain::kFreq), user.watermark);
  const DetectionPolicy policy{5, 25, 0.5};
  const auto r = Attribute3(shifted, reg, policy);
  ASSERT_TRUE(r.matched_user);
  EXPECT_EQ(*r.matched_user, user.user_id);
  EXPECT_EQ(r.domain, Domain::kFreq);
  EXPECT_EQ(r.distance, 0u);
}

}  // namespace
}  // namespace sta
