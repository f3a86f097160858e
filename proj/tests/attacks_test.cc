#include "sta/attacks.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sta/certify.h"
#include "sta/extraction.h"
#include "test_util.h"

namespace sta {
namespace {

AttackSpec Spec(AttackKind kind, std::map<std::string, double> params = {},
                std::uint64_t seed = 0) {
  return AttackSpec{kind, std::move(params), seed};
}

TEST(AttackKind, NamesRoundTrip) {
  for (int k = 0; k <= static_cast<int>(AttackKind::kPgd); ++k) {
    const auto kind = static_cast<AttackKind>(k);
    EXPECT_EQ(ParseAttackKind(AttackKindName(kind)), kind);
  }
  EXPECT_THROW(ParseAttackKind("blur"), std::invalid_argument);
}

TEST(Renormalize, Examples) {
  ImageBuffer x(1, 3, 1);
  x[0] = 0.2;
  x[1] = 0.4;
  x[2] = 0.6;
  const ImageBuffer y = Renormalize(x);
  EXPECT_NEAR(y[0], 0.0, 1e-15);
  EXPECT_NEAR(y[1], 0.5, 1e-15);
  EXPECT_NEAR(y[2], 1.0, 1e-15);
  const ImageBuffer flat(2, 2, 3, 0.3);
  EXPECT_EQ(Renormalize(flat), flat);
}

TEST(ResolveParams, DefaultsAndErrors) {
  const AttackSpec j = ResolveParams(Spec(AttackKind::kJpeg));
  EXPECT_EQ(j.params.at("quality"), 50.0);
  const AttackSpec n = ResolveParams(Spec(AttackKind::kNoise));
  EXPECT_NEAR(n.params.at("delta"), 25.0 / 255, 1e-15);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const AttackSpec g = ResolveParams(Spec(AttackKind::kGamma, {}, seed));
    EXPECT_GE(g.params.at("g"), 0.5);
    EXPECT_LE(g.params.at("g"), 2.0);
    const AttackSpec t = ResolveParams(Spec(AttackKind::kTranslation, {}, seed));
    EXPECT_EQ(t.params.at("dx"), std::round(t.params.at("dx")));
    EXPECT_LE(std::abs(t.params.at("dy")), 10.0);
    const AttackSpec c = ResolveParams(Spec(AttackKind::kContrastNeg, {}, seed));
    EXPECT_LE(c.params.at("c"), -0.5);
  }
  EXPECT_EQ(ResolveParams(Spec(AttackKind::kGamma, {{"g", 1.5}})).params.at("g"), 1.5);
  EXPECT_THROW(ResolveParams(Spec(AttackKind::kGamma, {{"gg", 1.5}})), std::invalid_argument);
  EXPECT_THROW(ResolveParams(Spec(AttackKind::kJpeg, {{"quality", 0}})), std::invalid_argument);
}

TEST(AttackSpecJson, RoundTrip) {
  const AttackSpec s = Spec(AttackKind::kGamma, {{"g", 1.7}}, 7);
  const AttackSpec t = AttackSpecFromJson(AttackSpecToJson(s));
  EXPECT_EQ(t.kind, s.kind);
  EXPECT_EQ(t.params, s.params);
  EXPECT_EQ(t.seed, s.seed);
  EXPECT_EQ(AttackSpecFromJson(R"({"kind":"jpeg"})").kind, AttackKind::kJpeg);
  EXPECT_ANY_THROW(AttackSpecFromJson(R"({"params":{}})"));
  EXPECT_ANY_THROW(AttackSpecFromJson(R"({"kind":"gamma","seed":-1})"));
  EXPECT_ANY_THROW(AttackSpecFromJson("not json"));
}

class AttackProperties : public ::testing::Test {
 protected:
  void SetUp() override {
    image_ = testing::RandomImage(32, 32, 3, 11, 0.05, 0.95);
    registry_ = testing::MakeRegistry(1, 100, image_.shape(), {Domain::kPixel}, 3);
  }
  BitString Bits(const ImageBuffer& x) const {
    return ExtractWatermark(x, registry_.users[0].secret, Domain::kPixel);
  }
  ImageBuffer image_;
  Registry registry_;
};

TEST_F(AttackProperties, MonotoneAttacksPreserveBits) {
  const BitString base = Bits(image_);
  for (AttackKind kind : {AttackKind::kBrightness, AttackKind::kContrastPos, AttackKind::kGamma}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      EXPECT_EQ(Bits(ApplyAttack(image_, Spec(kind, {}, seed))), base)
          << AttackKindName(kind) << " seed " << seed;
    }
  }
}

TEST_F(AttackProperties, NegativeContrastComplements) {
  const BitString base = Bits(image_);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_EQ(Bits(ApplyAttack(image_, Spec(AttackKind::kContrastNeg, {}, seed))),
              Complement(base));
  }
}

TEST_F(AttackProperties, OutputsStayInUnitRangeAndAreDeterministic) {
  for (int k = 0; k < static_cast<int>(AttackKind::kPgd); ++k) {
    const AttackSpec spec = Spec(static_cast<AttackKind>(k), {}, 5);
    const ImageBuffer a = ApplyAttack(image_, spec);
    EXPECT_EQ(a, ApplyAttack(image_, spec)) << AttackKindName(spec.kind);
    EXPECT_EQ(a.shape(), image_.shape());
    for (double v : a.pixels()) {
      ASSERT_GE(v, 0.0) << AttackKindName(spec.kind);
      ASSERT_LE(v, 1.0) << AttackKindName(spec.kind);
    }
  }
  EXPECT_EQ(ApplyAttack(image_, Spec(AttackKind::kNone)), image_);
  EXPECT_THROW(ApplyAttack(image_, Spec(AttackKind::kPgd)), std::invalid_argument);
}

TEST_F(AttackProperties, NoiseDependsOnSeed) {
  EXPECT_NE(ApplyAttack(image_, Spec(AttackKind::kNoise, {}, 1)),
            ApplyAttack(image_, Spec(AttackKind::kNoise, {}, 2)));
}

TEST_F(AttackProperties, TranslationShiftsContent) {
  // Pin each channel's extremes near the center so renormalization is a no-op.
  ImageBuffer x = image_;
  for (int ch = 0; ch < 3; ++ch) {
    x.at(16, 16, ch) = 0.0;
    x.at(17, 17, ch) = 1.0;
  }
  const ImageBuffer y =
      ApplyAttack(x, Spec(AttackKind::kTranslation, {{"dx", 3}, {"dy", -2}}));
  for (int r = 0; r < 30; ++r) {
    for (int c = 3; c < 32; ++c) {
      for (int ch = 0; ch < 3; ++ch) EXPECT_NEAR(y.at(r, c, ch), x.at(r + 2, c - 3, ch), 1e-12);
    }
  }
}

TEST(Hsv, RoundTripAndExamples) {
  double h, s, v;
  RgbToHsv(1, 0, 0, &h, &s, &v);
  EXPECT_NEAR(h, 0, 1e-15);
  EXPECT_EQ(s, 1);
  EXPECT_EQ(v, 1);
  RgbToHsv(0, 0, 1, &h, &s, &v);
  EXPECT_NEAR(h, 4 * std::numbers::pi / 3, 1e-12);
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    const double r = rng.UniformDouble(), g = rng.UniformDouble(), b = rng.UniformDouble();
    double r2, g2, b2;
    RgbToHsv(r, g, b, &h, &s, &v);
    EXPECT_GE(h, 0);
    EXPECT_LT(h, 2 * std::numbers::pi);
    HsvToRgb(h, s, v, &r2, &g2, &b2);
    EXPECT_NEAR(r, r2, 1e-12);
    EXPECT_NEAR(g, g2, 1e-12);
    EXPECT_NEAR(b, b2, 1e-12);
  }
}

TEST(Jpeg, RoundTripIsCloseAndQualityMatters) {
  const ImageBuffer x = testing::RandomImage(24, 24, 3, 2, 0.4, 0.6);
  const ImageBuffer hi = JpegRoundTrip(x, 95);
  const ImageBuffer lo = JpegRoundTrip(x, 10);
  double e_hi = 0, e_lo = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    e_hi += std::abs(hi[i] - x[i]);
    e_lo += std::abs(lo[i] - x[i]);
  }
  EXPECT_LT(e_hi, e_lo);
  EXPECT_LT(e_hi / x.size(), 0.05);
  const ImageBuffer gray = JpegRoundTrip(testing::RandomImage(16, 16, 1, 3), 80);
  EXPECT_EQ(gray.channels(), 1);
}

TEST(Pgd, StaysWithinBudgetAndBox) {
  const ImageBuffer x = testing::RandomImage(32, 32, 3, 4);
  const Registry reg = testing::MakeRegistry(1, 100, x.shape(), {Domain::kPixel}, 5);
  const auto& pairs = reg.users[0].secret.pixel_pairs;
  Rng rng(6);
  std::vector<std::uint8_t> target(100);
  for (auto& b : target) b = rng.FairBit();
  for (double budget : {0.0, 0.01, 0.1}) {
    PgdConfig cfg;
    cfg.budget = budget;
    const ImageBuffer y = PgdAttack(x, pairs, BitString(target), cfg);
    for (std::size_t i = 0; i < x.size(); ++i) {
      ASSERT_LE(std::abs(y[i] - x[i]), budget + 1e-15);
      ASSERT_GE(y[i], 0.0);
      ASSERT_LE(y[i], 1.0);
    }
  }
  EXPECT_THROW(PgdAttack(x, pairs, BitString::FromString("01"), PgdConfig{}),
               std::invalid_argument);
}

TEST(Pgd, FlipsOnlyPairsWithinCertifiedRadius) {
  Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    const ImageBuffer x = testing::RandomImage(16, 16, 3, rng.NextU64());
    const Registry reg = testing::MakeRegistry(1, 100, x.shape(), {Domain::kPixel}, t);
    const auto& pairs = reg.users[0].secret.pixel_pairs;
    const BitString bits = ExtractBits(x.pixels(), pairs);
    const DeltaProfile profile = ComputeDeltaProfile(x, pairs);
    PgdConfig cfg;
    cfg.budget = 0.05;
    cfg.iters = 50;
    const ImageBuffer y = PgdAttack(x, pairs, Complement(bits), cfg);
    const std::size_t flips = HammingDistance(ExtractBits(y.pixels(), pairs), bits);
    EXPECT_LT(flips, CertifiedBits(profile, cfg.budget));
    EXPECT_GT(flips, 0u);
  }
}

}  // namespace
}  // namespace sta
