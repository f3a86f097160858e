#ifndef STA_SRC_SSIM_H_
#define STA_SRC_SSIM_H_

#include <vector>

#include "sta/core_model.h"

namespace sta::internal {

// Mean SSIM over every valid 11x11 Gaussian window (sigma 1.5,
// C1 = 0.01^2, C2 = 0.03^2 for unit dynamic range), averaged over channels.
// When `grad_x` is non-null it receives d(mean SSIM)/dx.
double MeanSsim(const ImageBuffer& x, const ImageBuffer& y,
                std::vector<double>* grad_x);

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;

}  // namespace sta::internal

#endif  // STA_SRC_SSIM_H_
