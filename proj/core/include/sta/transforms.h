#ifndef STA_TRANSFORMS_H_
#define STA_TRANSFORMS_H_

#include <complex>
#include <cstddef>
#include <vector>

#include "sta/core_model.h"

namespace sta {

// Scalar field on a row-major H x W grid.
struct Field2D {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  Field2D() = default;
  Field2D(int h, int w, double fill = 0.0)
      : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {}
  Field2D(int h, int w, std::vector<double> v)
      : height(h), width(w), values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * width + c]; }
  double at(int r, int c) const {
    return values[static_cast<std::size_t>(r) * width + c];
  }
};

// Log-polar sampling lattice. Sample (i, j) sits at
//   center + exp(rho_i) * (sin t_j, cos t_j)     (row, col)
// with rho_i evenly spaced on [log r_min, log r_max] and t_j = 2*pi*j/n_angular.
struct LogPolarGrid {
  int n_radial = 0;
  int n_angular = 0;
  double r_min = 1.0;
  double r_max = 0.0;
  double center_row = 0.0;
  double center_col = 0.0;

  // center ((H-1)/2, (W-1)/2), r in [1, min(H,W)/2 - 1], min(H,W) samples on
  // each axis.
  static LogPolarGrid Default(int height, int width);

  // Throws std::invalid_argument unless 0 < r_min < r_max <= min(H,W)/2 and
  // both sample counts are positive.
  void Validate(int height, int width) const;
};

enum class TransformId { kIdentity, kFftMagnitude, kLogPolar, kFourierMellin };

// Single-channel pass-through, or 0.299 R + 0.587 G + 0.114 B.
Field2D Luminance(const ImageBuffer& image);
// Gradient with respect to the image of <cotangent, Luminance(image)>.
ImageBuffer LuminanceVjp(const ImageShape& shape, const Field2D& cotangent);

// Unnormalized 2-D DFT of a real field (DC = sum of samples).
std::vector<std::complex<double>> Dft(const Field2D& field);
// |Dft(field)|; exactly invariant under circular shifts.
Field2D FftMagnitude(const Field2D& field);
// Gradient of <cotangent, |DFT(f)|>. Bins with zero modulus contribute 0.
Field2D FftMagnitudeVjp(const Field2D& field, const Field2D& cotangent);

// Bilinear resampling of `field` on `grid`, coordinates clamped to the field.
Field2D LogPolar(const Field2D& field, const LogPolarGrid& grid);
// LogPolar is linear, so its adjoint depends only on the input shape.
Field2D LogPolarVjp(int height, int width, const LogPolarGrid& grid,
                    const Field2D& cotangent);

// FftMagnitude(LogPolar(field, grid)); a rotation about the grid center is a
// circular shift along the angular axis, so the magnitude is rotation
// invariant up to interpolation error.
Field2D FourierMellin(const Field2D& field, const LogPolarGrid& grid);
Field2D FourierMellinVjp(const Field2D& field, const LogPolarGrid& grid,
                         const Field2D& cotangent);

Field2D Apply(TransformId id, const Field2D& field, const LogPolarGrid& grid);
// Vector-Jacobian product of transform `id` at `field`. `grid` is used only by
// the log-polar transforms. Throws std::invalid_argument on shape mismatch.
Field2D Vjp(TransformId id, const Field2D& field, const Field2D& cotangent,
            const LogPolarGrid& grid = {});

// out(r, c) = in((r - dy) mod H, (c - dx) mod W).
Field2D CircularShift(const Field2D& field, int dy, int dx);
ImageBuffer CircularShift(const ImageBuffer& image, int dy, int dx);

// Rotation by `degrees` about ((H-1)/2, (W-1)/2) with bilinear interpolation;
// samples falling outside the frame replicate the nearest edge pixel. A
// rotation by theta shifts LogPolar output by +theta along the angular axis.
Field2D Rotate(const Field2D& field, double degrees);

// Bilinear sample at fractional (row, col), coordinates clamped to the field.
double SampleBilinear(const Field2D& field, double row, double col);

}  // namespace sta

#endif  // STA_TRANSFORMS_H_
