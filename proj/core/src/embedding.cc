#include "sta/embedding.h"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "ssim.h"
#include "sta/statistics.h"

namespace sta {
namespace {

constexpr double kMarginSlack = 1e-3;

struct AxisTap {
  int lo;
  int hi;
  double frac;
};

// Half-pixel-centred bilinear mapping from an output axis of length `out` to
// a coarse axis of length `in`.
std::vector<AxisTap> UpsampleTaps(int out, int in, int factor) {
  std::vector<AxisTap> taps(out);
  for (int i = 0; i < out; ++i) {
    double src = (i + 0.5) / factor - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const int lo = static_cast<int>(std::floor(src));
    taps[i] = {lo, std::min(lo + 1, in - 1), src - lo};
  }
  return taps;
}

std::vector<double> PairDiffs(std::span<const double> values,
                              const PairList& pairs) {
  std::vector<double> diffs(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    diffs[i] = values[pairs[i].a] - values[pairs[i].b];
  }
  return diffs;
}

// Hinge on one invariant domain; adds lambda * d hinge / d image into
// `image_grad` and returns the unweighted hinge.
HingeResult InvariantHinge(Domain domain, const Field2D& luminance,
                      const ImageShape& shape, const PairList& pairs,
                      const BitString& bits, double margin, double lambda,
                      std::vector<double>& image_grad) {
  const LogPolarGrid grid = LogPolarGrid::Default(shape.height, shape.width);
  const Field2D values = domain == Domain::kFreq
                             ? FftMagnitude(luminance)
                             : FourierMellin(luminance, grid);
  HingeResult hinge = WmHingeLoss(PairDiffs(values.values, pairs), bits, margin);
  if (hinge.loss == 0.0) return hinge;
  Field2D cotangent(values.height, values.width);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    cotangent.values[pairs[i].a] += lambda * hinge.grad[i];
    cotangent.values[pairs[i].b] -= lambda * hinge.grad[i];
  }
  const Field2D lum_grad = domain == Domain::kFreq
                               ? FftMagnitudeVjp(luminance, cotangent)
                               : FourierMellinVjp(luminance, grid, cotangent);
  const ImageBuffer grad = LuminanceVjp(shape, lum_grad);
  for (std::size_t i = 0; i < image_grad.size(); ++i) image_grad[i] += grad[i];
  return hinge;
}

const PairList& RequirePairs(const SecretKey& secret, Domain domain) {
  const PairList* pairs = secret.pairs(domain);
  if (pairs == nullptr) {
    throw std::invalid_argument(std::string(DomainName(domain)) +
                                " embedding enabled but the secret has no " +
                                std::string(DomainName(domain)) + " pairs");
  }
  return *pairs;
}

// Signed gaps (-1)^{w_i} (v_a - v_b) of `domain` in `image`.
std::vector<double> SignedGaps(const ImageBuffer& image, const SecretKey& secret,
                               const BitString& bits, Domain domain) {
  std::vector<double> values;
  const Field2D lum = Luminance(image);
  switch (domain) {
    case Domain::kPixel:
      values.assign(image.pixels().begin(), image.pixels().end());
      break;
    case Domain::kFreq:
      values = FftMagnitude(lum).values;
      break;
    case Domain::kMellin:
      values = FourierMellin(lum, LogPolarGrid::Default(image.height(), image.width()))
                   .values;
      break;
  }
  auto gaps = PairDiffs(values, RequirePairs(secret, domain));
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (bits[i]) gaps[i] = -gaps[i];
  }
  return gaps;
}

}  // namespace

EmbedConfig EmbedConfig::TripleDomain() {
  EmbedConfig config;
  config.lambda_t = config.lambda_wm;
  config.lambda_r = config.lambda_wm;
  return config;
}

bool EmbedConfig::Enabled(Domain domain) const {
  switch (domain) {
    case Domain::kPixel:
      return true;
    case Domain::kFreq:
      return lambda_t > 0.0;
    case Domain::kMellin:
      return lambda_r > 0.0;
  }
  return false;
}

double EmbedConfig::MarginFor(Domain domain) const {
  switch (domain) {
    case Domain::kPixel:
      return margin;
    case Domain::kFreq:
      return margin_freq;
    case Domain::kMellin:
      return margin_mellin;
  }
  return margin;
}

void EmbedConfig::Validate() const {
  if (!(margin > 0.0 && margin_freq > 0.0 && margin_mellin > 0.0)) {
    throw std::invalid_argument("embedding margins must be positive");
  }
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (lr_halving_period < 1) {
    throw std::invalid_argument("lr_halving_period must be >= 1");
  }
  if (lambda_wm < 0 || lambda_qual < 0 || lambda_t < 0 || lambda_r < 0) {
    throw std::invalid_argument("loss weights must be non-negative");
  }
  if (carrier.kind == CarrierKind::kSmooth && carrier.factor < 1) {
    throw std::invalid_argument("smooth carrier factor must be >= 1");
  }
}

HingeResult WmHingeLoss(std::span<const double> diffs, const BitString& bits,
                        double margin) {
  if (diffs.size() != bits.size()) {
    throw std::invalid_argument("hinge: diffs and bits differ in length");
  }
  HingeResult result;
  result.grad.assign(diffs.size(), 0.0);
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    const double sign = bits[i] ? -1.0 : 1.0;
    result.min_gap = std::min(result.min_gap, sign * diffs[i]);
    const double slack = margin - sign * diffs[i];
    if (slack > 0.0) {
      result.loss += slack;
      result.grad[i] = -sign;
    }
  }
  return result;
}

QualityResult QualityLoss(const ImageBuffer& x, const ImageBuffer& x0,
                          QualityKind kind) {
  if (x.shape() != x0.shape()) {
    throw std::invalid_argument("quality loss: shape mismatch");
  }
  QualityResult result;
  const std::size_t d = x.size();
  result.grad.assign(d, 0.0);
  if (kind == QualityKind::kSsim) {
    std::vector<double> grad;
    result.loss = 1.0 - internal::MeanSsim(x, x0, &grad);
    for (std::size_t i = 0; i < d; ++i) result.grad[i] = -grad[i];
    return result;
  }

  for (std::size_t i = 0; i < d; ++i) {
    const double e = x[i] - x0[i];
    result.loss += e * e / d;
    result.grad[i] = 2.0 * e / d;
  }
  if (kind == QualityKind::kGradientL2) {
    const int h = x.height();
    const int w = x.width();
    const int c = x.channels();
    const std::size_t count =
        static_cast<std::size_t>(c) * (static_cast<std::size_t>(h) * (w - 1) +
                                       static_cast<std::size_t>(h - 1) * w);
    if (count == 0) return result;
    auto add_term = [&](std::size_t i, std::size_t j) {
      // Difference of forward differences x[j] - x[i] between x and x0.
      const double e = (x[j] - x[i]) - (x0[j] - x0[i]);
      result.loss += e * e / count;
      result.grad[j] += 2.0 * e / count;
      result.grad[i] -= 2.0 * e / count;
    };
    for (int r = 0; r < h; ++r) {
      for (int col = 0; col < w; ++col) {
        for (int ch = 0; ch < c; ++ch) {
          const std::size_t i = x.Index(r, col, ch);
          if (col + 1 < w) add_term(i, x.Index(r, col + 1, ch));
          if (r + 1 < h) add_term(i, x.Index(r + 1, col, ch));
        }
      }
    }
  }
  return result;
}

Carrier::Carrier(CarrierSpec spec, ImageBuffer x0)
    : spec_(spec), x0_(std::move(x0)) {
  if (spec_.kind == CarrierKind::kIdentity) {
    num_params_ = x0_.size();
    return;
  }
  if (spec_.factor < 1) throw std::invalid_argument("carrier factor must be >= 1");
  grid_h_ = (x0_.height() + spec_.factor - 1) / spec_.factor;
  grid_w_ = (x0_.width() + spec_.factor - 1) / spec_.factor;
  num_params_ = static_cast<std::size_t>(grid_h_) * grid_w_ * x0_.channels();
}

std::vector<double> Carrier::InitialParams() const {
  if (spec_.kind == CarrierKind::kIdentity) {
    return {x0_.pixels().begin(), x0_.pixels().end()};
  }
  return std::vector<double>(num_params_, 0.0);
}

ImageBuffer Carrier::Decode(std::span<const double> theta) const {
  if (theta.size() != num_params_) {
    throw std::invalid_argument("carrier: parameter count mismatch");
  }
  if (spec_.kind == CarrierKind::kIdentity) {
    return ImageBuffer(x0_.shape(), {theta.begin(), theta.end()});
  }
  const int c = x0_.channels();
  const auto rows = UpsampleTaps(x0_.height(), grid_h_, spec_.factor);
  const auto cols = UpsampleTaps(x0_.width(), grid_w_, spec_.factor);
  auto param = [&](int r, int col, int ch) {
    return theta[(static_cast<std::size_t>(r) * grid_w_ + col) * c + ch];
  };
  ImageBuffer out = x0_;
  for (int r = 0; r < x0_.height(); ++r) {
    const AxisTap& tr = rows[r];
    for (int col = 0; col < x0_.width(); ++col) {
      const AxisTap& tc = cols[col];
      for (int ch = 0; ch < c; ++ch) {
        out.at(r, col, ch) +=
            (1 - tr.frac) * ((1 - tc.frac) * param(tr.lo, tc.lo, ch) +
                             tc.frac * param(tr.lo, tc.hi, ch)) +
            tr.frac * ((1 - tc.frac) * param(tr.hi, tc.lo, ch) +
                       tc.frac * param(tr.hi, tc.hi, ch));
      }
    }
  }
  return out;
}

std::vector<double> Carrier::PullBack(std::span<const double> image_grad) const {
  if (image_grad.size() != x0_.size()) {
    throw std::invalid_argument("carrier: gradient size mismatch");
  }
  if (spec_.kind == CarrierKind::kIdentity) {
    return {image_grad.begin(), image_grad.end()};
  }
  const int c = x0_.channels();
  const auto rows = UpsampleTaps(x0_.height(), grid_h_, spec_.factor);
  const auto cols = UpsampleTaps(x0_.width(), grid_w_, spec_.factor);
  std::vector<double> grad(num_params_, 0.0);
  auto param = [&](int r, int col, int ch) -> double& {
    return grad[(static_cast<std::size_t>(r) * grid_w_ + col) * c + ch];
  };
  for (int r = 0; r < x0_.height(); ++r) {
    const AxisTap& tr = rows[r];
    for (int col = 0; col < x0_.width(); ++col) {
      const AxisTap& tc = cols[col];
      for (int ch = 0; ch < c; ++ch) {
        const double g = image_grad[x0_.Index(r, col, ch)];
        param(tr.lo, tc.lo, ch) += (1 - tr.frac) * (1 - tc.frac) * g;
        param(tr.lo, tc.hi, ch) += (1 - tr.frac) * tc.frac * g;
        param(tr.hi, tc.lo, ch) += tr.frac * (1 - tc.frac) * g;
        param(tr.hi, tc.hi, ch) += tr.frac * tc.frac * g;
      }
    }
  }
  return grad;
}

LossValue TotalLoss(std::span<const double> theta, const Carrier& carrier,
                    const UserRecord& user, const EmbedConfig& config) {
  const ImageShape& shape = carrier.original().shape();
  if (user.secret.image_shape != shape) {
    throw std::invalid_argument("secret was issued for a different image shape");
  }
  const ImageBuffer raw = carrier.Decode(theta);
  ImageBuffer x = Clamped(raw);
  std::vector<double> image_grad(x.size(), 0.0);
  LossValue value;

  const PairList& pixel_pairs = user.secret.pixel_pairs;
  const HingeResult pixel = WmHingeLoss(PairDiffs(x.pixels(), pixel_pairs),
                                        user.watermark, config.margin);
  value.wm_by_domain[Domain::kPixel] = pixel.loss;
  value.min_gap_by_domain[Domain::kPixel] = pixel.min_gap;
  value.wm += config.lambda_wm * pixel.loss;
  for (std::size_t i = 0; i < pixel_pairs.size(); ++i) {
    image_grad[pixel_pairs[i].a] += config.lambda_wm * pixel.grad[i];
    image_grad[pixel_pairs[i].b] -= config.lambda_wm * pixel.grad[i];
  }

  if (config.Enabled(Domain::kFreq) || config.Enabled(Domain::kMellin)) {
    const Field2D lum = Luminance(x);
    for (Domain domain : {Domain::kFreq, Domain::kMellin}) {
      if (!config.Enabled(domain)) continue;
      const double lambda =
          domain == Domain::kFreq ? config.lambda_t : config.lambda_r;
      const HingeResult hinge = InvariantHinge(
          domain, lum, shape, RequirePairs(user.secret, domain), user.watermark,
          config.MarginFor(domain), lambda, image_grad);
      value.wm_by_domain[domain] = hinge.loss;
      value.min_gap_by_domain[domain] = hinge.min_gap;
      value.wm += lambda * hinge.loss;
    }
  }

  if (config.lambda_qual > 0.0) {
    const QualityResult q = QualityLoss(x, carrier.original(), config.quality_loss);
    value.quality = q.loss;
    for (std::size_t i = 0; i < image_grad.size(); ++i) {
      image_grad[i] += config.lambda_qual * q.grad[i];
    }
  }
  value.total = value.wm + config.lambda_qual * value.quality;

  // Clamp derivative is zero outside the box; the box penalty takes over there
  // so pixels pushed past a bound can come back and re-engage the hinge.
  for (std::size_t i = 0; i < image_grad.size(); ++i) {
    if (raw[i] > 1.0) {
      value.box += raw[i] - 1.0;
      image_grad[i] = config.lambda_wm;
    } else if (raw[i] < 0.0) {
      value.box -= raw[i];
      image_grad[i] = -config.lambda_wm;
    }
  }
  value.total += config.lambda_wm * value.box;
  value.grad = carrier.PullBack(image_grad);
  return value;
}

OptimizeResult Optimize(const LossFn& loss_fn, std::vector<double> theta0,
                        const EmbedConfig& config) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  OptimizeResult result;
  result.theta = std::move(theta0);
  const std::size_t n = result.theta.size();
  std::vector<double> m(n, 0.0), v(n, 0.0);
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;
  std::optional<OptimizeResult> best;

  auto evaluate = [&](int step) {
    StepResult r = loss_fn(result.theta);
    if (!std::isfinite(r.loss)) {
      throw std::runtime_error("optimizer: non-finite loss at step " +
                               std::to_string(step));
    }
    if (r.grad.size() != n) {
      throw std::runtime_error("optimizer: gradient size mismatch");
    }
    for (double g : r.grad) {
      if (!std::isfinite(g)) {
        throw std::runtime_error("optimizer: non-finite gradient at step " +
                                 std::to_string(step));
      }
    }
    return r;
  };

  for (int step = 0; step < config.steps; ++step) {
    const StepResult r = evaluate(step);
    result.final_loss = r.loss;
    result.converged = r.converged;
    if (config.early_exit && r.converged) return result;
    if (r.converged && (!best || r.loss < best->final_loss)) {
      best = OptimizeResult{result.theta, result.iterations, r.loss, true};
    }

    const double lr =
        config.lr * std::pow(0.5, step / config.lr_halving_period);
    beta1_pow *= kBeta1;
    beta2_pow *= kBeta2;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = r.grad[i];
      m[i] = kBeta1 * m[i] + (1 - kBeta1) * g;
      v[i] = kBeta2 * v[i] + (1 - kBeta2) * g * g;
      const double m_hat = m[i] / (1 - beta1_pow);
      const double v_hat = v[i] / (1 - beta2_pow);
      result.theta[i] -= lr * m_hat / (std::sqrt(v_hat) + kEps);
    }
    ++result.iterations;
  }
  const StepResult last = evaluate(config.steps);
  result.final_loss = last.loss;
  result.converged = last.converged;
  // Without early exit, return the lowest-loss iterate that met every
  // constraint, if any did.
  if (best && (!result.converged || best->final_loss < result.final_loss)) {
    best->iterations = result.iterations;
    return *best;
  }
  return result;
}

ImageBuffer Embed(const ImageBuffer& x0, const UserRecord& user,
                  const EmbedConfig& config, EmbedReport* report) {
  config.Validate();
  ValidateSecret(user.secret);
  if (user.secret.image_shape != x0.shape()) {
    throw std::invalid_argument("secret was issued for a different image shape");
  }
  if (user.watermark.size() != user.secret.n_bits()) {
    throw std::invalid_argument("watermark length does not match secret");
  }
  std::vector<Domain> domains;
  for (Domain d : {Domain::kPixel, Domain::kFreq, Domain::kMellin}) {
    if (config.Enabled(d)) {
      RequirePairs(user.secret, d);
      domains.push_back(d);
    }
  }

  const Carrier carrier(config.carrier, x0);
  std::vector<double> theta0 = carrier.InitialParams();

  EmbedConfig run = config;
  if (config.auto_balance && config.lambda_qual > 0.0) {
    EmbedConfig wm_only = config;
    wm_only.lambda_qual = 0.0;
    const double wm0 = config.lambda_wm *
                       TotalLoss(theta0, carrier, user, wm_only).wm_by_domain[Domain::kPixel];
    // Reference distortion: checkerboard of +-margin/2 on every pixel.
    ImageBuffer ref = x0;
    for (int r = 0; r < ref.height(); ++r) {
      for (int c = 0; c < ref.width(); ++c) {
        const double s = ((r + c) % 2 == 0 ? 0.5 : -0.5) * config.margin;
        for (int ch = 0; ch < ref.channels(); ++ch) ref.at(r, c, ch) += s;
      }
    }
    const double q_ref = QualityLoss(ref, x0, config.quality_loss).loss;
    if (wm0 > 0.0 && q_ref > 0.0) run.lambda_qual = wm0 / q_ref;
  }

  // Optimize against slightly inflated margins so iterates settle strictly
  // inside the feasible set rather than oscillating across its boundary;
  // convergence is judged at the requested margins.
  run.margin *= 1 + kMarginSlack;
  run.margin_freq *= 1 + kMarginSlack;
  run.margin_mellin *= 1 + kMarginSlack;
  const LossFn loss_fn = [&](std::span<const double> theta) {
    LossValue v = TotalLoss(theta, carrier, user, run);
    bool feasible = true;
    for (const auto& [d, gap] : v.min_gap_by_domain) {
      feasible = feasible && gap >= config.MarginFor(d);
    }
    return StepResult{v.total, std::move(v.grad), feasible};
  };
  const OptimizeResult opt = Optimize(loss_fn, std::move(theta0), run);

  const ImageBuffer raw = carrier.Decode(opt.theta);
  ImageBuffer out = Clamped(raw);

  if (report != nullptr) {
    EmbedReport rep;
    rep.iterations_run = opt.iterations;
    rep.lambda_qual_effective = run.lambda_qual;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      rep.clamp_slack = std::max(rep.clamp_slack, std::abs(raw[i] - out[i]));
    }
    rep.success = true;
    for (Domain d : domains) {
      const auto gaps = SignedGaps(out, user.secret, user.watermark, d);
      const double margin = config.MarginFor(d);
      std::size_t ok = 0;
      for (double g : gaps) ok += g >= margin;
      const double fraction = static_cast<double>(ok) / gaps.size();
      rep.satisfied_fraction[d] = fraction;
      if (fraction < 1.0) rep.success = false;
      if (d == Domain::kPixel) {
        rep.min_pixel_margin = *std::min_element(gaps.begin(), gaps.end());
      }
    }
    EmbedConfig wm_only = config;
    wm_only.lambda_qual = 0.0;
    rep.final_wm_loss = TotalLoss(opt.theta, carrier, user, wm_only).wm;
    rep.psnr_vs_original = Psnr(out, x0);
    *report = std::move(rep);
  }
  return out;
}

}  // namespace sta
