#ifndef STA_CERTIFY_H_
#define STA_CERTIFY_H_

#include <cstddef>
#include <vector>

#include "sta/core_model.h"

namespace sta {

// Half-gaps |x_a - x_b| / 2 sorted ascending. pair_order[k] is the original
// index of the pair at sorted position k (stable for equal gaps).
struct DeltaProfile {
  std::vector<double> deltas;
  std::vector<std::size_t> pair_order;
};

// Throws std::invalid_argument on an out-of-range index.
DeltaProfile ComputeDeltaProfile(const ImageBuffer& image, const PairList& pairs);

// Smallest 1-based k with budget < deltas[k-1]: any additive perturbation with
// l_inf norm at most `budget` flips fewer than k bits. Returns n + 1 when the
// budget reaches the largest gap (no guarantee). Throws on a negative budget.
std::size_t CertifiedBits(const DeltaProfile& profile, double budget);

struct Certificate {
  double budget = 0.0;
  std::size_t max_flips_exclusive = 0;
  double delta_min = 0.0;
  double delta_median = 0.0;
};

Certificate Certify(const DeltaProfile& profile, double budget);

struct AdversaryResult {
  ImageBuffer image;
  std::size_t flips = 0;
};

// Moves every pair's pixels toward each other by `budget` (a down, b up when
// x_a >= x_b, and the reverse otherwise), clamped to [0,1]. `flips` counts the
// positions where the extracted bits of the result differ from `bits`, which
// is normally the watermark extracted from `image`.
AdversaryResult WorstCaseAdversary(const ImageBuffer& image, const PairList& pairs,
                                   const BitString& bits, double budget);

}  // namespace sta

#endif  // STA_CERTIFY_H_
