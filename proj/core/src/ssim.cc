#include "ssim.h"

#include <array>
#include <cmath>
#include <stdexcept>

namespace sta::internal {
namespace {

std::array<double, kSsimWindow> GaussianKernel() {
  std::array<double, kSsimWindow> k{};
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    k[i] = std::exp(-d * d / (2 * kSsimSigma * kSsimSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Valid-mode separable Gaussian filter: h x w -> (h-10) x (w-10).
std::vector<double> Filter(const std::vector<double>& in, int h, int w) {
  static const auto k = GaussianKernel();
  const int oh = h - kSsimWindow + 1;
  const int ow = w - kSsimWindow + 1;
  std::vector<double> tmp(static_cast<std::size_t>(h) * ow, 0.0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < ow; ++c) {
      double s = 0.0;
      for (int t = 0; t < kSsimWindow; ++t) s += k[t] * in[r * w + c + t];
      tmp[r * ow + c] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow, 0.0);
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      double s = 0.0;
      for (int t = 0; t < kSsimWindow; ++t) s += k[t] * tmp[(r + t) * ow + c];
      out[r * ow + c] = s;
    }
  }
  return out;
}

// Adjoint of Filter: (h-10) x (w-10) -> h x w.
std::vector<double> FilterAdjoint(const std::vector<double>& in, int h, int w) {
  static const auto k = GaussianKernel();
  const int oh = h - kSsimWindow + 1;
  const int ow = w - kSsimWindow + 1;
  std::vector<double> tmp(static_cast<std::size_t>(h) * ow, 0.0);
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      for (int t = 0; t < kSsimWindow; ++t) tmp[(r + t) * ow + c] += k[t] * in[r * ow + c];
    }
  }
  std::vector<double> out(static_cast<std::size_t>(h) * w, 0.0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < ow; ++c) {
      for (int t = 0; t < kSsimWindow; ++t) out[r * w + c + t] += k[t] * tmp[r * ow + c];
    }
  }
  return out;
}

}  // namespace

double MeanSsim(const ImageBuffer& x, const ImageBuffer& y,
                std::vector<double>* grad_x) {
  if (x.shape() != y.shape()) throw std::invalid_argument("SSIM: shape mismatch");
  const int h = x.height();
  const int w = x.width();
  const int channels = x.channels();
  if (h < kSsimWindow || w < kSsimWindow) {
    throw std::invalid_argument("SSIM needs images of at least 11x11");
  }
  const int oh = h - kSsimWindow + 1;
  const int ow = w - kSsimWindow + 1;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  const std::size_t windows = static_cast<std::size_t>(oh) * ow;
  const double norm = 1.0 / (static_cast<double>(windows) * channels);
  if (grad_x) grad_x->assign(x.size(), 0.0);

  double total = 0.0;
  std::vector<double> xs(plane), ys(plane), xx(plane), yy(plane), xy(plane);
  for (int ch = 0; ch < channels; ++ch) {
    for (std::size_t i = 0; i < plane; ++i) {
      xs[i] = x[i * channels + ch];
      ys[i] = y[i * channels + ch];
      xx[i] = xs[i] * xs[i];
      yy[i] = ys[i] * ys[i];
      xy[i] = xs[i] * ys[i];
    }
    const auto mx = Filter(xs, h, w);
    const auto my = Filter(ys, h, w);
    const auto fxx = Filter(xx, h, w);
    const auto fyy = Filter(yy, h, w);
    const auto fxy = Filter(xy, h, w);

    std::vector<double> alpha(windows), beta(windows), gamma(windows);
    for (std::size_t p = 0; p < windows; ++p) {
      const double vx = fxx[p] - mx[p] * mx[p];
      const double vy = fyy[p] - my[p] * my[p];
      const double cxy = fxy[p] - mx[p] * my[p];
      const double a1 = 2 * mx[p] * my[p] + kSsimC1;
      const double a2 = 2 * cxy + kSsimC2;
      const double b1 = mx[p] * mx[p] + my[p] * my[p] + kSsimC1;
      const double b2 = vx + vy + kSsimC2;
      const double s = a1 * a2 / (b1 * b2);
      total += s;
      if (grad_x) {
        const double d_mean = 2 * my[p] * a2 / (b1 * b2) - s * 2 * mx[p] / b1;
        const double d_var = -s / b2;
        const double d_cov = 2 * a1 / (b1 * b2);
        alpha[p] = norm * (d_mean - 2 * mx[p] * d_var - my[p] * d_cov);
        beta[p] = norm * 2 * d_var;
        gamma[p] = norm * d_cov;
      }
    }
    if (grad_x) {
      const auto ga = FilterAdjoint(alpha, h, w);
      const auto gb = FilterAdjoint(beta, h, w);
      const auto gc = FilterAdjoint(gamma, h, w);
      for (std::size_t i = 0; i < plane; ++i) {
        (*grad_x)[i * channels + ch] = ga[i] + xs[i] * gb[i] + ys[i] * gc[i];
      }
    }
  }
  return total * norm;
}

}  // namespace sta::internal
