#ifndef STA_EMBEDDING_H_
#define STA_EMBEDDING_H_

#include <functional>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "sta/core_model.h"
#include "sta/transforms.h"

namespace sta {

enum class CarrierKind {
  // theta is the image itself.
  kIdentity,
  // x = x0 + bilinear upsample of a (H/factor x W/factor x C) residual grid;
  // a band-limited parameterization standing in for latent-space decoding.
  kSmooth,
};

struct CarrierSpec {
  CarrierKind kind = CarrierKind::kIdentity;
  int factor = 2;
};

enum class QualityKind { kL2, kGradientL2, kSsim };

struct EmbedConfig {
  // Minimum signed gap per pixel pair.
  double margin = 0.2;
  // Minimum signed gap in the Fourier and Fourier-Mellin magnitude grids.
  // Magnitudes are unnormalized sums over the grid, hence the larger scale.
  double margin_freq = 1.0;
  double margin_mellin = 2.0;
  double lambda_wm = 0.9;
  double lambda_qual = 150.0;
  // Invariant-domain weights; a domain is embedded iff its weight is > 0.
  double lambda_t = 0.0;
  double lambda_r = 0.0;
  int steps = 700;
  double lr = 8e-3;
  int lr_halving_period = 100;
  CarrierSpec carrier;
  QualityKind quality_loss = QualityKind::kL2;
  // Rescales lambda_qual so the weighted quality loss at a reference
  // distortion equals the weighted watermark loss at the starting point.
  bool auto_balance = true;
  // Stop as soon as every constraint holds at its margin. When false, all
  // steps run and the lowest-loss iterate meeting every constraint is kept,
  // which lets the quality term undo unnecessary distortion.
  bool early_exit = false;

  // Pixel, Fourier and Fourier-Mellin embedding with lambda_t = lambda_r =
  // lambda_wm.
  static EmbedConfig TripleDomain();

  bool Enabled(Domain domain) const;
  double MarginFor(Domain domain) const;
  // Throws std::invalid_argument on margin <= 0, steps < 1, lr <= 0 or a
  // negative weight.
  void Validate() const;
};

struct EmbedReport {
  double final_wm_loss = 0.0;
  std::map<Domain, double> satisfied_fraction;
  int iterations_run = 0;
  double psnr_vs_original = 0.0;
  bool success = false;
  // Quality weight actually used after auto-balancing.
  double lambda_qual_effective = 0.0;
  // Smallest signed pixel-pair gap (-1)^w (x_a - x_b) in the output image.
  double min_pixel_margin = 0.0;
  // Largest amount by which clamping to [0,1] moved a pixel of the decoded
  // carrier output.
  double clamp_slack = 0.0;
};

struct HingeResult {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d diff_i
  // Smallest signed gap (-1)^{w_i} diff_i; +infinity for no pairs.
  double min_gap = std::numeric_limits<double>::infinity();
};

// sum_i max(0, margin - (-1)^{w_i} diff_i). The loss vanishes exactly when
// every pair satisfies the bit's ordering with at least `margin` to spare.
HingeResult WmHingeLoss(std::span<const double> diffs, const BitString& bits,
                        double margin);

struct QualityResult {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d x, image-shaped
};

// l2: mean squared difference. gradient_l2: l2 plus the mean squared
// difference of forward finite-difference gradients (both axes pooled, per
// channel). ssim: 1 - mean SSIM.
QualityResult QualityLoss(const ImageBuffer& x, const ImageBuffer& x0,
                          QualityKind kind);

// Maps optimizer parameters to an image and pulls image gradients back.
class Carrier {
 public:
  Carrier(CarrierSpec spec, ImageBuffer x0);

  std::size_t num_params() const { return num_params_; }
  std::vector<double> InitialParams() const;
  // Raw (unclamped) image.
  ImageBuffer Decode(std::span<const double> theta) const;
  std::vector<double> PullBack(std::span<const double> image_grad) const;

  const ImageBuffer& original() const { return x0_; }
  const CarrierSpec& spec() const { return spec_; }

 private:
  CarrierSpec spec_;
  ImageBuffer x0_;
  int grid_h_ = 0;
  int grid_w_ = 0;
  std::size_t num_params_ = 0;
};

struct LossValue {
  double total = 0.0;
  double wm = 0.0;  // weighted sum of all hinge terms
  std::map<Domain, double> wm_by_domain;  // unweighted hinge per domain
  std::map<Domain, double> min_gap_by_domain;
  double quality = 0.0;  // unweighted quality loss
  double box = 0.0;  // unweighted box penalty
  std::vector<double> grad;  // d total / d theta
};

// lambda_wm L_wm + lambda_qual L_qual + lambda_t L_t + lambda_r L_r evaluated
// on clamp(carrier(theta), 0, 1), plus lambda_wm times the distance by which
// the unclamped carrier output leaves [0,1] (summed over pixels).
// Throws std::invalid_argument when an enabled domain has no pairs in
// `user.secret` or the secret does not match x0's shape.
LossValue TotalLoss(std::span<const double> theta, const Carrier& carrier,
                    const UserRecord& user, const EmbedConfig& config);

struct StepResult {
  double loss = 0.0;
  std::vector<double> grad;
  // Theta meets every constraint. With early exit, optimization stops here;
  // otherwise it is a candidate for the returned iterate.
  bool converged = false;
};

using LossFn = std::function<StepResult(std::span<const double>)>;

struct OptimizeResult {
  std::vector<double> theta;
  int iterations = 0;  // Adam updates applied
  double final_loss = 0.0;
  bool converged = false;
};

// Adam (beta1 0.9, beta2 0.999, eps 1e-8) with the learning rate halved every
// `lr_halving_period` steps. Without early exit, returns the lowest-loss
// converged iterate when there is one. Throws std::runtime_error on a
// non-finite loss or gradient.
OptimizeResult Optimize(const LossFn& loss_fn, std::vector<double> theta0,
                        const EmbedConfig& config);

// Embeds `user`'s watermark into `x0`. Returns the clamped output image.
// Optimization that ends with unsatisfied pairs is reported through
// `report.success`, not thrown.
ImageBuffer Embed(const ImageBuffer& x0, const UserRecord& user,
                  const EmbedConfig& config, EmbedReport* report);

}  // namespace sta

#endif  // STA_EMBEDDING_H_
