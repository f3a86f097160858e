#include "sta/statistics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ssim.h"

namespace sta {
namespace {

void CheckSameShape(const ImageBuffer& x, const ImageBuffer& y) {
  if (x.shape() != y.shape()) throw std::invalid_argument("image shape mismatch");
}

// Neumaier-compensated sum of pmf over [lo, hi].
long double PmfRange(int n, long double p, int lo, int hi) {
  long double sum = 0.0L;
  long double comp = 0.0L;
  for (int q = lo; q <= hi; ++q) {
    const long double term = BinomialPmf(n, q, p);
    const long double t = sum + term;
    if (std::fabs(sum) >= std::fabs(term)) {
      comp += (sum - t) + term;
    } else {
      comp += (term - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

}  // namespace

long double BinomialPmf(int n, int q, long double p) {
  if (q < 0 || q > n) return 0.0L;
  if (p == 0.0L) return q == 0 ? 1.0L : 0.0L;
  if (p == 1.0L) return q == n ? 1.0L : 0.0L;
  const long double log_c =
      std::lgamma(static_cast<long double>(n) + 1) -
      std::lgamma(static_cast<long double>(q) + 1) -
      std::lgamma(static_cast<long double>(n - q) + 1);
  return std::exp(log_c + q * std::log(p) + (n - q) * std::log1p(-p));
}

double TwoTailProb(int n, double p, int tau1, int tau2) {
  if (n < 0 || tau1 < 0 || tau1 >= tau2 || tau2 > n) {
    throw std::invalid_argument("thresholds must satisfy 0 <= tau1 < tau2 <= n");
  }
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");
  const long double total =
      PmfRange(n, p, 0, tau1) + PmfRange(n, p, tau2, n);
  return static_cast<double>(std::min(total, 1.0L));
}

double FprUnion(std::span<const double> per_user) {
  double sum = 0.0;
  for (double v : per_user) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("probabilities must lie in [0,1]");
    }
    sum += v;
  }
  return std::min(1.0, sum);
}

double Fpr3Bound(double p_hat) {
  if (!(p_hat >= 0.0 && p_hat <= 1.0)) {
    throw std::invalid_argument("p_hat must lie in [0,1]");
  }
  return std::min(1.0, 3.0 * p_hat);
}

std::optional<Thresholds> SolveThresholds(int n, double p, int m,
                                          double target_fpr, int domains) {
  if (n < 1 || m < 1 || domains < 1) {
    throw std::invalid_argument("n, m and domains must be positive");
  }
  std::optional<Thresholds> best;
  for (int tau1 = 0; 2 * tau1 < n; ++tau1) {
    const double bound =
        static_cast<double>(domains) * m * TwoTailProb(n, p, tau1, n - tau1);
    // The two-tail mass only grows with tau1.
    if (bound > target_fpr) break;
    best = Thresholds{tau1, n - tau1};
  }
  return best;
}

FprReport MakeFprReport(int n, double p, int tau1, int tau2, int m) {
  FprReport report;
  report.per_user_two_tail = TwoTailProb(n, p, tau1, tau2);
  report.union_bound_m = std::min(1.0, m * report.per_user_two_tail);
  report.union_bound_3m = Fpr3Bound(report.union_bound_m);
  report.tau1 = tau1;
  report.tau2 = tau2;
  report.n = n;
  report.m = m;
  return report;
}

double Abwe(const std::vector<BitString>& truth,
            const std::vector<BitString>& extracted) {
  if (truth.size() != extracted.size()) {
    throw std::invalid_argument("abwe: list sizes differ");
  }
  if (truth.empty()) return 0.0;
  std::size_t errors = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i].size() != truth[0].size()) {
      throw std::invalid_argument("abwe: watermarks differ in length");
    }
    errors += HammingDistance(truth[i], extracted[i]);
    total += truth[i].size();
  }
  return total == 0 ? 0.0 : static_cast<double>(errors) / total;
}

double Psnr(const ImageBuffer& x, const ImageBuffer& y) {
  CheckSameShape(x, y);
  double mse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = x[i] - y[i];
    mse += e * e;
  }
  mse /= static_cast<double>(x.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double Ssim(const ImageBuffer& x, const ImageBuffer& y) {
  CheckSameShape(x, y);
  return internal::MeanSsim(x, y, nullptr);
}

QualityMetrics MeasureQuality(const ImageBuffer& x, const ImageBuffer& y) {
  return {Psnr(x, y), Ssim(x, y)};
}

}  // namespace sta
