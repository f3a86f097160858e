#include "sta/transforms.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fft.h"

namespace sta {
namespace {

constexpr double kLumaR = 0.299;
constexpr double kLumaG = 0.587;
constexpr double kLumaB = 0.114;

struct Tap {
  std::size_t index;
  double weight;
};

// Four bilinear taps for a fractional position, clamped to the field.
std::array<Tap, 4> BilinearTaps(int height, int width, double row, double col) {
  row = std::clamp(row, 0.0, static_cast<double>(height - 1));
  col = std::clamp(col, 0.0, static_cast<double>(width - 1));
  const int r0 = static_cast<int>(std::floor(row));
  const int c0 = static_cast<int>(std::floor(col));
  const int r1 = std::min(r0 + 1, height - 1);
  const int c1 = std::min(c0 + 1, width - 1);
  const double fr = row - r0;
  const double fc = col - c0;
  auto idx = [width](int r, int c) {
    return static_cast<std::size_t>(r) * width + c;
  };
  return {Tap{idx(r0, c0), (1 - fr) * (1 - fc)}, Tap{idx(r0, c1), (1 - fr) * fc},
          Tap{idx(r1, c0), fr * (1 - fc)}, Tap{idx(r1, c1), fr * fc}};
}

// Position of log-polar sample (i, j).
void LogPolarPoint(const LogPolarGrid& grid, int i, int j, double* row,
                   double* col) {
  const double log_min = std::log(grid.r_min);
  const double log_max = std::log(grid.r_max);
  const double rho =
      grid.n_radial == 1
          ? log_min
          : log_min + (log_max - log_min) * i / (grid.n_radial - 1);
  const double radius = std::exp(rho);
  const double t = 2.0 * std::numbers::pi * j / grid.n_angular;
  *row = grid.center_row + radius * std::sin(t);
  *col = grid.center_col + radius * std::cos(t);
}

void RequireSameShape(const Field2D& a, int h, int w, const char* what) {
  if (a.height != h || a.width != w ||
      a.values.size() != static_cast<std::size_t>(h) * w) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

}  // namespace

LogPolarGrid LogPolarGrid::Default(int height, int width) {
  const int side = std::min(height, width);
  LogPolarGrid grid;
  grid.n_radial = side;
  grid.n_angular = side;
  grid.r_min = 1.0;
  grid.r_max = side / 2.0 - 1.0;
  grid.center_row = (height - 1) / 2.0;
  grid.center_col = (width - 1) / 2.0;
  return grid;
}

void LogPolarGrid::Validate(int height, int width) const {
  if (n_radial < 1 || n_angular < 1) {
    throw std::invalid_argument("log-polar grid needs positive sample counts");
  }
  if (!(r_min > 0.0 && r_min < r_max &&
        r_max <= std::min(height, width) / 2.0)) {
    throw std::invalid_argument(
        "log-polar radii must satisfy 0 < r_min < r_max <= min(H, W)/2");
  }
}

Field2D Luminance(const ImageBuffer& image) {
  Field2D out(image.height(), image.width());
  const auto px = image.pixels();
  if (image.channels() == 1) {
    std::copy(px.begin(), px.end(), out.values.begin());
    return out;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.values[i] =
        kLumaR * px[3 * i] + kLumaG * px[3 * i + 1] + kLumaB * px[3 * i + 2];
  }
  return out;
}

ImageBuffer LuminanceVjp(const ImageShape& shape, const Field2D& cotangent) {
  RequireSameShape(cotangent, shape.height, shape.width, "LuminanceVjp");
  ImageBuffer grad(shape.height, shape.width, shape.channels);
  if (shape.channels == 1) {
    std::copy(cotangent.values.begin(), cotangent.values.end(),
              grad.pixels().begin());
    return grad;
  }
  for (std::size_t i = 0; i < cotangent.size(); ++i) {
    grad[3 * i] = kLumaR * cotangent.values[i];
    grad[3 * i + 1] = kLumaG * cotangent.values[i];
    grad[3 * i + 2] = kLumaB * cotangent.values[i];
  }
  return grad;
}

std::vector<std::complex<double>> Dft(const Field2D& field) {
  std::vector<std::complex<double>> in(field.values.begin(), field.values.end());
  std::vector<std::complex<double>> out(in.size());
  internal::Dft2d(in, out, field.height, field.width, /*inverse=*/false);
  return out;
}

Field2D FftMagnitude(const Field2D& field) {
  const auto spectrum = Dft(field);
  Field2D out(field.height, field.width);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    out.values[k] = std::abs(spectrum[k]);
  }
  return out;
}

Field2D FftMagnitudeVjp(const Field2D& field, const Field2D& cotangent) {
  RequireSameShape(cotangent, field.height, field.width, "FftMagnitudeVjp");
  // d|F_k|/df_n = Re(conj(F_k) e^{-2 pi i k.n/N}) / |F_k|, so the gradient is
  // the real part of the unnormalized inverse DFT of cot_k * F_k / |F_k|.
  auto spectrum = Dft(field);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const double mag = std::abs(spectrum[k]);
    spectrum[k] =
        mag > 0.0 ? spectrum[k] * (cotangent.values[k] / mag) : 0.0;
  }
  std::vector<std::complex<double>> back(spectrum.size());
  internal::Dft2d(spectrum, back, field.height, field.width, /*inverse=*/true);
  Field2D grad(field.height, field.width);
  for (std::size_t n = 0; n < back.size(); ++n) grad.values[n] = back[n].real();
  return grad;
}

double SampleBilinear(const Field2D& field, double row, double col) {
  double v = 0.0;
  for (const Tap& tap : BilinearTaps(field.height, field.width, row, col)) {
    v += tap.weight * field.values[tap.index];
  }
  return v;
}

Field2D LogPolar(const Field2D& field, const LogPolarGrid& grid) {
  grid.Validate(field.height, field.width);
  Field2D out(grid.n_radial, grid.n_angular);
  for (int i = 0; i < grid.n_radial; ++i) {
    for (int j = 0; j < grid.n_angular; ++j) {
      double row, col;
      LogPolarPoint(grid, i, j, &row, &col);
      out.at(i, j) = SampleBilinear(field, row, col);
    }
  }
  return out;
}

Field2D LogPolarVjp(int height, int width, const LogPolarGrid& grid,
                    const Field2D& cotangent) {
  grid.Validate(height, width);
  RequireSameShape(cotangent, grid.n_radial, grid.n_angular, "LogPolarVjp");
  Field2D grad(height, width);
  for (int i = 0; i < grid.n_radial; ++i) {
    for (int j = 0; j < grid.n_angular; ++j) {
      double row, col;
      LogPolarPoint(grid, i, j, &row, &col);
      const double g = cotangent.at(i, j);
      for (const Tap& tap : BilinearTaps(height, width, row, col)) {
        grad.values[tap.index] += tap.weight * g;
      }
    }
  }
  return grad;
}

Field2D FourierMellin(const Field2D& field, const LogPolarGrid& grid) {
  return FftMagnitude(LogPolar(field, grid));
}

Field2D FourierMellinVjp(const Field2D& field, const LogPolarGrid& grid,
                         const Field2D& cotangent) {
  const Field2D polar = LogPolar(field, grid);
  return LogPolarVjp(field.height, field.width, grid,
                     FftMagnitudeVjp(polar, cotangent));
}

Field2D Apply(TransformId id, const Field2D& field, const LogPolarGrid& grid) {
  switch (id) {
    case TransformId::kIdentity:
      return field;
    case TransformId::kFftMagnitude:
      return FftMagnitude(field);
    case TransformId::kLogPolar:
      return LogPolar(field, grid);
    case TransformId::kFourierMellin:
      return FourierMellin(field, grid);
  }
  throw std::invalid_argument("unknown transform");
}

Field2D Vjp(TransformId id, const Field2D& field, const Field2D& cotangent,
            const LogPolarGrid& grid) {
  switch (id) {
    case TransformId::kIdentity:
      RequireSameShape(cotangent, field.height, field.width, "Vjp");
      return cotangent;
    case TransformId::kFftMagnitude:
      return FftMagnitudeVjp(field, cotangent);
    case TransformId::kLogPolar:
      return LogPolarVjp(field.height, field.width, grid, cotangent);
    case TransformId::kFourierMellin:
      return FourierMellinVjp(field, grid, cotangent);
  }
  throw std::invalid_argument("unknown transform");
}

Field2D CircularShift(const Field2D& field, int dy, int dx) {
  Field2D out(field.height, field.width);
  for (int r = 0; r < field.height; ++r) {
    const int sr = ((r - dy) % field.height + field.height) % field.height;
    for (int c = 0; c < field.width; ++c) {
      const int sc = ((c - dx) % field.width + field.width) % field.width;
      out.at(r, c) = field.at(sr, sc);
    }
  }
  return out;
}

ImageBuffer CircularShift(const ImageBuffer& image, int dy, int dx) {
  const int h = image.height();
  const int w = image.width();
  ImageBuffer out(h, w, image.channels());
  for (int r = 0; r < h; ++r) {
    const int sr = ((r - dy) % h + h) % h;
    for (int c = 0; c < w; ++c) {
      const int sc = ((c - dx) % w + w) % w;
      for (int ch = 0; ch < image.channels(); ++ch) {
        out.at(r, c, ch) = image.at(sr, sc, ch);
      }
    }
  }
  return out;
}

Field2D Rotate(const Field2D& field, double degrees) {
  const double theta = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double cr = (field.height - 1) / 2.0;
  const double cc = (field.width - 1) / 2.0;
  Field2D out(field.height, field.width);
  for (int r = 0; r < field.height; ++r) {
    for (int c = 0; c < field.width; ++c) {
      const double dy = r - cr;
      const double dx = c - cc;
      // Inverse rotation of the output position.
      const double sx = cs * dx + sn * dy;
      const double sy = -sn * dx + cs * dy;
      out.at(r, c) = SampleBilinear(field, cr + sy, cc + sx);
    }
  }
  return out;
}

}  // namespace sta
