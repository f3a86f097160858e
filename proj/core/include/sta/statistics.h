#ifndef STA_STATISTICS_H_
#define STA_STATISTICS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sta/core_model.h"

namespace sta {

// C(n, q) p^q (1-p)^(n-q), evaluated in log space.
long double BinomialPmf(int n, int q, long double p);

// P(D <= tau1) + P(D >= tau2) for D ~ Bin(n, p). Throws
// std::invalid_argument unless 0 <= tau1 < tau2 <= n and 0 <= p <= 1.
double TwoTailProb(int n, double p, int tau1, int tau2);

// min(1, sum of per-user probabilities). Throws on entries outside [0,1].
double FprUnion(std::span<const double> per_user);

// min(1, 3 * p_hat).
double Fpr3Bound(double p_hat);

struct Thresholds {
  int tau1 = 0;
  int tau2 = 0;
  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

// Largest tau1 (with tau2 = n - tau1 > tau1) such that
// domains * m * TwoTailProb(n, p, tau1, tau2) <= target_fpr, or nothing when
// even tau1 = 0 misses the target.
std::optional<Thresholds> SolveThresholds(int n, double p, int m,
                                          double target_fpr, int domains);

struct FprReport {
  double per_user_two_tail = 0.0;
  double union_bound_m = 0.0;
  double union_bound_3m = 0.0;
  int tau1 = 0;
  int tau2 = 0;
  int n = 0;
  int m = 0;
};

FprReport MakeFprReport(int n, double p, int tau1, int tau2, int m);

// Fraction of mismatched bits over all pairs of strings. Throws
// std::invalid_argument on count or length mismatch.
double Abwe(const std::vector<BitString>& truth,
            const std::vector<BitString>& extracted);

// 10 log10(1 / MSE); +infinity for identical images.
double Psnr(const ImageBuffer& x, const ImageBuffer& y);

// Mean SSIM, 11x11 Gaussian window with sigma 1.5. Requires images of at
// least 11x11.
double Ssim(const ImageBuffer& x, const ImageBuffer& y);

struct QualityMetrics {
  double psnr = 0.0;
  double ssim = 0.0;
};

QualityMetrics MeasureQuality(const ImageBuffer& x, const ImageBuffer& y);

}  // namespace sta

#endif  // STA_STATISTICS_H_
