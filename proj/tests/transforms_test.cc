#include "sta/transforms.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include "test_util.h"

namespace sta {
namespace {

using cd = std::complex<double>;

// O(N^2) double-sum DFT, unnormalized.
std::vector<cd> NaiveDft(const Field2D& f) {
  const int h = f.height, w = f.width;
  std::vector<cd> out(f.size());
  for (int u = 0; u < h; ++u) {
    for (int v = 0; v < w; ++v) {
      cd sum = 0;
      for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
          const double phase = -2 * std::numbers::pi * (double(u) * r / h + double(v) * c / w);
          sum += f.at(r, c) * std::polar(1.0, phase);
        }
      }
      out[u * w + v] = sum;
    }
  }
  return out;
}

double Dot(const Field2D& a, const Field2D& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.values[i] * b.values[i];
  return s;
}

// Relative error of the VJP against central differences, per input element.
double MaxVjpError(const std::function<Field2D(const Field2D&)>& fwd,
                   const Field2D& x, const Field2D& cot, const Field2D& grad) {
  constexpr double h = 1e-6;
  double worst = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    Field2D xp = x, xm = x;
    xp.values[i] += h;
    xm.values[i] -= h;
    const double fd = (Dot(cot, fwd(xp)) - Dot(cot, fwd(xm))) / (2 * h);
    const double scale = std::max({std::abs(fd), std::abs(grad.values[i]), 1e-3});
    worst = std::max(worst, std::abs(fd - grad.values[i]) / scale);
  }
  return worst;
}

TEST(Luminance, Examples) {
  ImageBuffer gray(2, 2, 3, 0.4);
  for (double v : Luminance(gray).values) EXPECT_NEAR(v, 0.4, 1e-15);
  ImageBuffer red(1, 1, 3);
  red.at(0, 0, 0) = 1.0;
  EXPECT_DOUBLE_EQ(Luminance(red).values[0], 0.299);
  const ImageBuffer single = testing::RandomImage(3, 4, 1, 1);
  const Field2D f = Luminance(single);
  for (std::size_t i = 0; i < single.size(); ++i) EXPECT_EQ(f.values[i], single[i]);
}

TEST(Luminance, VjpIsAdjoint) {
  const ImageBuffer x = testing::RandomImage(4, 5, 3, 2);
  const Field2D cot = testing::RandomField(4, 5, 3);
  const ImageBuffer g = LuminanceVjp(x.shape(), cot);
  const ImageBuffer y = testing::RandomImage(4, 5, 3, 4);
  double lhs = Dot(cot, Luminance(y));
  double rhs = 0;
  for (std::size_t i = 0; i < y.size(); ++i) rhs += g[i] * y[i];
  EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(FftMagnitude, ConstantFieldIsDcOnly) {
  const Field2D f(6, 4, 0.25);
  const Field2D m = FftMagnitude(f);
  EXPECT_NEAR(m.values[0], 0.25 * 24, 1e-12);
  for (std::size_t i = 1; i < m.size(); ++i) EXPECT_NEAR(m.values[i], 0.0, 1e-12);
}

TEST(Dft, MatchesNaiveOracle) {
  for (auto [h, w] : {std::pair{8, 8}, std::pair{5, 7}, std::pair{1, 6}}) {
    const Field2D f = testing::RandomField(h, w, h * 31 + w);
    const auto fast = Dft(f);
    const auto slow = NaiveDft(f);
    const Field2D mag = FftMagnitude(f);
    for (std::size_t i = 0; i < f.size(); ++i) {
      EXPECT_NEAR(std::abs(fast[i] - slow[i]), 0.0, 1e-10);
      EXPECT_NEAR(mag.values[i], std::abs(slow[i]), 1e-10);
    }
  }
}

TEST(Dft, IsLinear) {
  const Field2D a = testing::RandomField(6, 6, 1);
  const Field2D b = testing::RandomField(6, 6, 2);
  Field2D sum(6, 6);
  for (std::size_t i = 0; i < sum.size(); ++i) sum.values[i] = 2 * a.values[i] - b.values[i];
  const auto fa = NaiveDft(a), fb = NaiveDft(b), fs = Dft(sum);
  for (std::size_t i = 0; i < sum.size(); ++i) {
    EXPECT_NEAR(std::abs(fs[i] - (2.0 * fa[i] - fb[i])), 0.0, 1e-10);
  }
}

TEST(FftMagnitude, InvariantUnderCircularShift) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const int h = 4 + rng.UniformInt(20), w = 4 + rng.UniformInt(20);
    const Field2D f = testing::RandomField(h, w, seed);
    const int dy = rng.UniformInt(h), dx = rng.UniformInt(w);
    const Field2D a = FftMagnitude(f);
    const Field2D b = FftMagnitude(CircularShift(f, dy, dx));
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_LE(std::abs(a.values[i] - b.values[i]), 1e-6 * std::max(1.0, a.values[i]));
    }
  }
  const Field2D f = testing::RandomField(16, 16, 99);
  const Field2D a = FftMagnitude(f), b = FftMagnitude(CircularShift(f, 3, 5));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-9);
}

TEST(CircularShift, MovesContent) {
  Field2D f(3, 4);
  f.at(0, 0) = 1.0;
  const Field2D g = CircularShift(f, 1, 2);
  EXPECT_EQ(g.at(1, 2), 1.0);
  const Field2D back = CircularShift(f, -1, -2);
  EXPECT_EQ(back.at(2, 2), 1.0);
}

TEST(FftMagnitude, VjpMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Field2D x = testing::RandomField(6, 6, seed);
    const Field2D cot = testing::RandomField(6, 6, seed + 100);
    const Field2D g = FftMagnitudeVjp(x, cot);
    EXPECT_LT(MaxVjpError([](const Field2D& f) { return FftMagnitude(f); }, x, cot, g), 1e-4);
  }
}

TEST(FftMagnitude, VjpIsZeroAtZeroModulusBins) {
  const Field2D zero(4, 4, 0.0);
  const Field2D cot = testing::RandomField(4, 4, 1);
  for (double v : FftMagnitudeVjp(zero, cot).values) EXPECT_EQ(v, 0.0);
}

TEST(LogPolarGrid, DefaultsAndValidation) {
  const LogPolarGrid g = LogPolarGrid::Default(64, 48);
  EXPECT_EQ(g.n_radial, 48);
  EXPECT_EQ(g.n_angular, 48);
  EXPECT_DOUBLE_EQ(g.r_min, 1.0);
  EXPECT_DOUBLE_EQ(g.r_max, 23.0);
  EXPECT_DOUBLE_EQ(g.center_row, 31.5);
  EXPECT_DOUBLE_EQ(g.center_col, 23.5);
  EXPECT_NO_THROW(g.Validate(64, 48));
  LogPolarGrid too_big = g;
  too_big.r_max = 25.0;
  EXPECT_THROW(too_big.Validate(64, 48), std::invalid_argument);
  EXPECT_THROW(LogPolar(Field2D(64, 48), too_big), std::invalid_argument);
}

TEST(LogPolar, ConstantFieldGivesConstantOutput) {
  const Field2D f(20, 20, 0.7);
  for (double v : LogPolar(f, LogPolarGrid::Default(20, 20)).values) EXPECT_NEAR(v, 0.7, 1e-14);
}

TEST(LogPolar, RadialFieldIsConstantAlongAngle) {
  const int n = 33;  // odd size puts the center on a pixel
  Field2D f(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) f.at(r, c) = std::hypot(r - 16.0, c - 16.0) / 16.0;
  }
  const LogPolarGrid grid = LogPolarGrid::Default(n, n);
  const Field2D lp = LogPolar(f, grid);
  for (int i = 0; i < lp.height; ++i) {
    const double radius = std::exp(std::log(grid.r_min) +
                                   (std::log(grid.r_max) - std::log(grid.r_min)) * i /
                                       (grid.n_radial - 1)) / 16.0;
    for (int j = 0; j < lp.width; ++j) {
      // Bilinear interpolation of a cone is exact up to O(1/r) curvature.
      EXPECT_NEAR(lp.at(i, j), radius, 0.05 / radius / 16.0 + 1e-12);
    }
  }
}

TEST(LogPolar, Rotation90IsAngularShiftByQuarter) {
  const Field2D f = testing::RandomField(24, 24, 5);
  const LogPolarGrid grid = LogPolarGrid::Default(24, 24);
  const Field2D a = LogPolar(f, grid);
  const Field2D b = LogPolar(Rotate(f, 90.0), grid);
  const int q = grid.n_angular / 4;
  for (int i = 0; i < a.height; ++i) {
    for (int j = 0; j < a.width; ++j) {
      EXPECT_NEAR(b.at(i, (j + q) % a.width), a.at(i, j), 1e-9);
    }
  }
  const Field2D fa = FourierMellin(f, grid), fb = FourierMellin(Rotate(f, 90.0), grid);
  for (std::size_t i = 0; i < fa.size(); ++i) EXPECT_NEAR(fa.values[i], fb.values[i], 1e-8);
}

TEST(LogPolar, VjpOfConstantCotangentIsSumOfBilinearWeights) {
  const int h = 12, w = 10;
  const LogPolarGrid grid = LogPolarGrid::Default(h, w);
  const Field2D ones(grid.n_radial, grid.n_angular, 1.0);
  const Field2D g = LogPolarVjp(h, w, grid, ones);
  // Independently accumulate the bilinear weights of every sample.
  Field2D expected(h, w);
  const double lmin = std::log(grid.r_min), lmax = std::log(grid.r_max);
  for (int i = 0; i < grid.n_radial; ++i) {
    const double rho = std::exp(lmin + (lmax - lmin) * i / (grid.n_radial - 1));
    for (int j = 0; j < grid.n_angular; ++j) {
      const double t = 2 * std::numbers::pi * j / grid.n_angular;
      const double y = std::clamp(grid.center_row + rho * std::sin(t), 0.0, h - 1.0);
      const double x = std::clamp(grid.center_col + rho * std::cos(t), 0.0, w - 1.0);
      const int y0 = std::min(static_cast<int>(y), h - 1), x0 = std::min(static_cast<int>(x), w - 1);
      const int y1 = std::min(y0 + 1, h - 1), x1 = std::min(x0 + 1, w - 1);
      const double fy = y - y0, fx = x - x0;
      expected.at(y0, x0) += (1 - fy) * (1 - fx);
      expected.at(y0, x1) += (1 - fy) * fx;
      expected.at(y1, x0) += fy * (1 - fx);
      expected.at(y1, x1) += fy * fx;
    }
  }
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g.values[i], expected.values[i], 1e-12);
  double total = 0;
  for (double v : g.values) total += v;
  EXPECT_NEAR(total, grid.n_radial * grid.n_angular, 1e-9);
}

TEST(LogPolar, VjpMatchesFiniteDifferences) {
  const Field2D x = testing::RandomField(10, 10, 8);
  const LogPolarGrid grid = LogPolarGrid::Default(10, 10);
  const Field2D cot = testing::RandomField(grid.n_radial, grid.n_angular, 9);
  const Field2D g = LogPolarVjp(10, 10, grid, cot);
  EXPECT_LT(MaxVjpError([&](const Field2D& f) { return LogPolar(f, grid); }, x, cot, g), 1e-4);
}

TEST(FourierMellin, VjpMatchesFiniteDifferences) {
  const Field2D x = testing::RandomField(8, 8, 12);
  const LogPolarGrid grid = LogPolarGrid::Default(8, 8);
  const Field2D cot = testing::RandomField(grid.n_radial, grid.n_angular, 13);
  const Field2D g = FourierMellinVjp(x, grid, cot);
  EXPECT_LT(MaxVjpError([&](const Field2D& f) { return FourierMellin(f, grid); }, x, cot, g),
            1e-4);
}

TEST(FourierMellin, ConstantFieldIsDcOnlyAndComposes) {
  const LogPolarGrid grid = LogPolarGrid::Default(16, 16);
  const Field2D fm = FourierMellin(Field2D(16, 16, 0.5), grid);
  EXPECT_NEAR(fm.values[0], 0.5 * grid.n_radial * grid.n_angular, 1e-10);
  for (std::size_t i = 1; i < fm.size(); ++i) EXPECT_NEAR(fm.values[i], 0.0, 1e-10);
  const Field2D f = testing::RandomField(16, 16, 3);
  const Field2D a = FourierMellin(f, grid);
  const Field2D b = FftMagnitude(LogPolar(f, grid));
  EXPECT_EQ(a.values, b.values);
}

// Sum of a few low-frequency sinusoids.
Field2D SmoothField(int n, std::uint64_t seed) {
  Rng rng(seed);
  Field2D f(n, n);
  for (int k = 0; k < 4; ++k) {
    const double fy = rng.Uniform(-2, 2), fx = rng.Uniform(-2, 2), ph = rng.Uniform(0, 6.3);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        f.at(r, c) += std::cos(2 * std::numbers::pi * (fy * r + fx * c) / n + ph);
      }
    }
  }
  return f;
}

TEST(FourierMellin, ApproximatelyRotationInvariantOnSmoothFields) {
  std::vector<double> errors;
  for (std::uint64_t seed = 0; seed < 9; ++seed) {
    const Field2D f = SmoothField(64, seed);
    const LogPolarGrid grid = LogPolarGrid::Default(64, 64);
    const Field2D a = FourierMellin(f, grid);
    const Field2D b = FourierMellin(Rotate(f, 10.0), grid);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      num += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
      den += a.values[i] * a.values[i];
    }
    errors.push_back(std::sqrt(num / den));
  }
  std::nth_element(errors.begin(), errors.begin() + errors.size() / 2, errors.end());
  EXPECT_LE(errors[errors.size() / 2], 0.05);
}

TEST(Vjp, DispatchAndShapeChecks) {
  const Field2D x = testing::RandomField(6, 6, 1);
  const Field2D cot = testing::RandomField(6, 6, 2);
  EXPECT_EQ(Vjp(TransformId::kIdentity, x, cot).values, cot.values);
  EXPECT_EQ(Apply(TransformId::kIdentity, x, {}).values, x.values);
  EXPECT_EQ(Vjp(TransformId::kFftMagnitude, x, cot).values, FftMagnitudeVjp(x, cot).values);
  EXPECT_THROW(Vjp(TransformId::kFftMagnitude, x, Field2D(5, 6)), std::invalid_argument);
  EXPECT_THROW(FftMagnitudeVjp(x, Field2D(6, 5)), std::invalid_argument);
}

TEST(Rotate, ZeroDegreesIsIdentityAndEdgesReplicate) {
  const Field2D f = testing::RandomField(9, 9, 4);
  const Field2D r0 = Rotate(f, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(r0.values[i], f.values[i], 1e-12);
  const Field2D r45 = Rotate(Field2D(9, 9, 0.3), 45.0);
  for (double v : r45.values) EXPECT_NEAR(v, 0.3, 1e-12);
}

}  // namespace
}  // namespace sta
