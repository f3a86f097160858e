#ifndef STA_ATTACKS_H_
#define STA_ATTACKS_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "sta/core_model.h"

namespace sta {

enum class AttackKind {
  kNone,
  kBrightness,
  kContrastPos,
  kContrastNeg,
  kGamma,
  kSharpness,
  kHue,
  kSaturation,
  kNoise,
  kJpeg,
  kRotation,
  kTranslation,
  // White-box attack; needs a secret, so ApplyAttack rejects it.
  kPgd,
};

std::string_view AttackKindName(AttackKind kind);
AttackKind ParseAttackKind(std::string_view name);

// Parameters by kind (pixel values on the [0,1] scale):
//   brightness   b        U[-20/255, 20/255]
//   contrast_pos c        U[0.5, 2]
//   contrast_neg c        U[-2, -0.5]
//   gamma        g        U[0.5, 2]
//   sharpness    a        2
//   hue          h        0.2 (radians)
//   saturation   s        2
//   noise        delta    25/255
//   jpeg         quality  50
//   rotation     degrees  U[-10, 10]
//   translation  dx, dy   integers U{-10..10}
//   pgd          budget 0.1, iters 10, lr 0.1
// Missing parameters are drawn from these ranges with the AttackSpec seed.
struct AttackSpec {
  AttackKind kind = AttackKind::kNone;
  std::map<std::string, double> params;
  std::uint64_t seed = 0;
};

// {"kind":"gamma","params":{"g":1.7},"seed":7}
std::string AttackSpecToJson(const AttackSpec& spec);
AttackSpec AttackSpecFromJson(std::string_view text);

// Returns `spec` with every missing parameter filled in. Throws
// std::invalid_argument on unknown parameter names.
AttackSpec ResolveParams(const AttackSpec& spec);

// Per-channel (x - min) / (max - min). Constant channels are left unchanged.
ImageBuffer Renormalize(const ImageBuffer& image);

// Applies the attack, then Renormalize. kNone returns the input unchanged.
ImageBuffer ApplyAttack(const ImageBuffer& image, const AttackSpec& spec);

// Baseline JPEG encode/decode of the 8-bit quantized image.
ImageBuffer JpegRoundTrip(const ImageBuffer& image, int quality);

// RGB <-> HSV with hue in radians on [0, 2*pi).
void RgbToHsv(double r, double g, double b, double* h, double* s, double* v);
void HsvToRgb(double h, double s, double v, double* r, double* g, double* b);

struct PgdConfig {
  double budget = 0.1;
  int iters = 10;
  double lr = 0.1;
  double margin = 0.2;
  double lambda_wm = 0.9;
  double lambda_qual = 150.0;
};

// Adam on lambda_wm * hinge(target) + lambda_qual * l2(x~, x) over the pixel
// pairs, projecting onto ||x~ - x||_inf <= budget and [0,1] after each step.
ImageBuffer PgdAttack(const ImageBuffer& image, const PairList& pairs,
                      const BitString& target, const PgdConfig& config);

}  // namespace sta

#endif  // STA_ATTACKS_H_
