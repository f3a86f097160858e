#include "sta/certify.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sta/extraction.h"

namespace sta {

DeltaProfile ComputeDeltaProfile(const ImageBuffer& image, const PairList& pairs) {
  std::vector<double> gaps(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].a >= image.size() || pairs[i].b >= image.size()) {
      throw std::invalid_argument("pair " + std::to_string(i) + " out of range");
    }
    gaps[i] = std::abs(image[pairs[i].a] - image[pairs[i].b]) / 2.0;
  }
  DeltaProfile profile;
  profile.pair_order.resize(pairs.size());
  std::iota(profile.pair_order.begin(), profile.pair_order.end(), 0);
  std::stable_sort(profile.pair_order.begin(), profile.pair_order.end(),
                   [&](std::size_t l, std::size_t r) { return gaps[l] < gaps[r]; });
  profile.deltas.reserve(pairs.size());
  for (std::size_t i : profile.pair_order) profile.deltas.push_back(gaps[i]);
  return profile;
}

std::size_t CertifiedBits(const DeltaProfile& profile, double budget) {
  if (!(budget >= 0.0)) throw std::invalid_argument("budget must be >= 0");
  const auto it = std::upper_bound(profile.deltas.begin(), profile.deltas.end(), budget);
  return static_cast<std::size_t>(it - profile.deltas.begin()) + 1;
}

Certificate Certify(const DeltaProfile& profile, double budget) {
  Certificate cert;
  cert.budget = budget;
  cert.max_flips_exclusive = CertifiedBits(profile, budget);
  if (!profile.deltas.empty()) {
    const auto& d = profile.deltas;
    cert.delta_min = d.front();
    const std::size_t n = d.size();
    cert.delta_median = n % 2 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
  }
  return cert;
}

AdversaryResult WorstCaseAdversary(const ImageBuffer& image, const PairList& pairs,
                                   const BitString& bits, double budget) {
  if (!(budget >= 0.0)) throw std::invalid_argument("budget must be >= 0");
  if (bits.size() != pairs.size()) {
    throw std::invalid_argument("bits and pairs differ in length");
  }
  AdversaryResult result{image, 0};
  for (const IndexPair& p : pairs) {
    if (p.a >= image.size() || p.b >= image.size()) {
      throw std::invalid_argument("pair index out of range");
    }
    const double sign = image[p.a] - image[p.b] >= 0.0 ? 1.0 : -1.0;
    result.image[p.a] = std::clamp(image[p.a] - sign * budget, 0.0, 1.0);
    result.image[p.b] = std::clamp(image[p.b] + sign * budget, 0.0, 1.0);
  }
  result.flips = HammingDistance(ExtractBits(result.image.pixels(), pairs), bits);
  return result;
}

}  // namespace sta
