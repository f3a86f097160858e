#include "sta/keygen.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include <unistd.h>

#include "test_util.h"

namespace sta {
namespace {

TEST(SampleWatermark, IsDeterministicPerSeed) {
  KeygenConfig cfg;
  cfg.n_bits = 4;
  Rng a(42), b(42);
  EXPECT_EQ(SampleWatermark(cfg, a), SampleWatermark(cfg, b));
  cfg.n_bits = 1;
  Rng c(3);
  const BitString one = SampleWatermark(cfg, c);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_LE(one[0], 1);
}

TEST(SampleWatermark, BitsAreFair) {
  KeygenConfig cfg;
  cfg.n_bits = 10000;
  Rng rng(5);
  const BitString w = SampleWatermark(cfg, rng);
  std::size_t ones = 0;
  for (std::size_t i = 0; i < w.size(); ++i) ones += w[i];
  EXPECT_GE(ones / 1e4, 0.48);
  EXPECT_LE(ones / 1e4, 0.52);
}

TEST(SampleSecret, ExhaustsTinyPixelGrid) {
  KeygenConfig cfg;
  cfg.n_bits = 2;
  cfg.image_shape = {2, 2, 1};
  Rng rng(1);
  const SecretKey s = SampleSecret(cfg, rng);
  std::set<std::size_t> seen;
  for (const auto& p : s.pixel_pairs) {
    seen.insert(p.a);
    seen.insert(p.b);
  }
  EXPECT_EQ(seen, (std::set<std::size_t>{0, 1, 2, 3}));
}

TEST(SampleSecret, IndicesDistinctOverManySeeds) {
  KeygenConfig cfg;
  cfg.n_bits = 20;
  cfg.image_shape = {16, 16, 3};
  cfg.domains = {Domain::kPixel, Domain::kFreq, Domain::kMellin};
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const SecretKey s = SampleSecret(cfg, rng);
    ASSERT_NO_THROW(ValidateSecret(s));
    for (Domain d : cfg.domains) {
      std::set<std::size_t> seen;
      for (const auto& p : *s.pairs(d)) {
        seen.insert(p.a);
        seen.insert(p.b);
      }
      ASSERT_EQ(seen.size(), 2u * cfg.n_bits);
    }
  }
}

TEST(SampleSecret, FreqPairsAvoidDc) {
  KeygenConfig cfg;
  cfg.n_bits = 15;  // uses all 30 canonical non-DC bins of an 8x8 grid
  cfg.image_shape = {8, 8, 1};
  cfg.domains = {Domain::kFreq};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const SecretKey s = SampleSecret(cfg, rng);
    ASSERT_TRUE(s.freq_pairs.has_value());
    for (const auto& p : *s.freq_pairs) {
      EXPECT_NE(p.a, 0u);
      EXPECT_NE(p.b, 0u);
    }
  }
}

TEST(SampleSecret, RejectsGridTooSmall) {
  KeygenConfig cfg;
  cfg.n_bits = 3;
  cfg.image_shape = {2, 2, 1};
  Rng rng(0);
  EXPECT_THROW(SampleSecret(cfg, rng), std::invalid_argument);
  // 8x8 Fourier grid: 60 non-self-conjugate bins give 30 candidates, plus the
  // three self-conjugate bins other than DC.
  cfg.image_shape = {8, 8, 1};
  cfg.domains = {Domain::kFreq};
  cfg.n_bits = 16;
  EXPECT_NO_THROW(SampleSecret(cfg, rng));
  cfg.n_bits = 17;
  EXPECT_THROW(SampleSecret(cfg, rng), std::invalid_argument);
}

TEST(CandidateIndices, FourierKeepsOneOfEachConjugatePair) {
  const ImageShape shape{8, 6, 3};
  const GridDims grid = DomainGrid(Domain::kFreq, shape);
  const auto idx = CandidateIndices(Domain::kFreq, shape);
  std::set<std::size_t> set(idx.begin(), idx.end());
  EXPECT_FALSE(set.count(0));
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const std::size_t p = ConjugatePartner(i, grid);
    EXPECT_TRUE(set.count(i) || set.count(p)) << i;
    if (p != i) EXPECT_FALSE(set.count(i) && set.count(p)) << i;
  }
  EXPECT_EQ(CandidateIndices(Domain::kPixel, shape).size(), shape.size());
}

TEST(RegisterUser, GrowsRegistryAndRejectsDuplicates) {
  Registry reg;
  KeygenConfig cfg;
  reg = RegisterUser(reg, "alice", cfg);
  EXPECT_EQ(reg.users.size(), 1u);
  EXPECT_THROW(RegisterUser(reg, "alice", cfg), std::invalid_argument);
}

TEST(RegisterUser, TenUsersHaveDistinctKeys) {
  const Registry reg = testing::MakeRegistry(10, 100, {64, 64, 3}, {Domain::kPixel}, 9);
  for (std::size_t i = 0; i < reg.users.size(); ++i) {
    for (std::size_t j = i + 1; j < reg.users.size(); ++j) {
      EXPECT_NE(reg.users[i].secret, reg.users[j].secret);
      EXPECT_NE(reg.users[i].watermark, reg.users[j].watermark);
    }
  }
}

TEST(RegisterUser, RegistryIsReproducibleFromSeed) {
  const auto domains = std::vector<Domain>{Domain::kPixel, Domain::kFreq, Domain::kMellin};
  EXPECT_EQ(testing::MakeRegistry(3, 50, {32, 32, 3}, domains, 4),
            testing::MakeRegistry(3, 50, {32, 32, 3}, domains, 4));
  EXPECT_NE(testing::MakeRegistry(3, 50, {32, 32, 3}, domains, 4),
            testing::MakeRegistry(3, 50, {32, 32, 3}, domains, 5));
}

class RegistryFileTest : public ::testing::Test {
 protected:
  std::filesystem::path path_ =
      std::filesystem::temp_directory_path() /
      ("sta_registry_" + std::to_string(::getpid()) + ".json");
  void TearDown() override { std::filesystem::remove(path_); }
};

TEST_F(RegistryFileTest, RoundTripThreeUsers) {
  const Registry reg = testing::MakeRegistry(
      3, 40, {32, 32, 3}, {Domain::kPixel, Domain::kFreq, Domain::kMellin}, 2);
  PersistRegistry(reg, path_);
  EXPECT_EQ(LoadRegistry(path_), reg);
}

TEST_F(RegistryFileTest, RoundTripEmpty) {
  Registry reg;
  reg.rng_seed = 77;
  PersistRegistry(reg, path_);
  EXPECT_EQ(LoadRegistry(path_), reg);
}

TEST_F(RegistryFileTest, TruncatedFileIsAParseErrorWithOffset) {
  const Registry reg = testing::MakeRegistry(2, 10, {8, 8, 1}, {Domain::kPixel}, 2);
  const std::string text = RegistryToJson(reg);
  const std::string truncated = text.substr(0, text.size() / 2);
  std::ofstream(path_) << truncated;
  try {
    LoadRegistry(path_);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GT(e.offset(), 0u);
    EXPECT_LE(e.offset(), truncated.size() + 1);
  }
}

TEST(RegistryFromJson, SchemaErrorsNameThePath) {
  try {
    RegistryFromJson(R"({"version":1,"n_bits":2,"seed":0,"users":[{"user_id":"a"}]})");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("users"), std::string::npos) << e.what();
  }
  EXPECT_THROW(RegistryFromJson("[1,2"), ParseError);
}

}  // namespace
}  // namespace sta
