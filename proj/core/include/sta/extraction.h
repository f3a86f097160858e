#ifndef STA_EXTRACTION_H_
#define STA_EXTRACTION_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sta/core_model.h"

namespace sta {

// bit_j = 0 if values[a_j] >= values[b_j], else 1. Throws
// std::invalid_argument on an out-of-range index.
BitString ExtractBits(std::span<const double> values, const PairList& pairs);

// The value grid that `domain` pairs index into: the pixels themselves, the
// Fourier magnitude of the luminance, or its Fourier-Mellin magnitude on the
// default log-polar grid.
std::vector<double> DomainValues(const ImageBuffer& image, Domain domain);

// Extracts the watermark carried by `secret` in `domain`. Throws
// std::invalid_argument when the domain is missing or the shape differs.
BitString ExtractWatermark(const ImageBuffer& image, const SecretKey& secret,
                           Domain domain);

// True iff d <= tau1 or d >= tau2.
bool DoubleTailIndicator(std::size_t d, std::size_t n,
                         const DetectionPolicy& policy);

struct AttributionResult {
  std::optional<std::string> matched_user;
  Domain domain = Domain::kPixel;
  std::size_t distance = 0;
  // The distance fell in the upper tail.
  bool inverted = false;
};

// Single-domain attribution over the pixel pairs. Among users whose distance
// fires the double-tail indicator, picks the smallest min(d, n - d); ties go
// to the earlier registry entry.
AttributionResult Attribute(const ImageBuffer& image, const Registry& registry,
                            const DetectionPolicy& policy);

// Attribution over the pixel, Fourier-Mellin and Fourier domains. Every user
// must carry all three pair lists; throws std::invalid_argument otherwise.
// Score ties across domains resolve in the order pixel, mellin, freq.
AttributionResult Attribute3(const ImageBuffer& image, const Registry& registry,
                             const DetectionPolicy& policy);

// True iff attribution finds a match. Uses Attribute3 when every user carries
// all three domains, Attribute otherwise.
bool Detect(const ImageBuffer& image, const Registry& registry,
            const DetectionPolicy& policy);

}  // namespace sta

#endif  // STA_EXTRACTION_H_
