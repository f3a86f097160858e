#include "sta/extraction.h"

#include <algorithm>
#include <stdexcept>

#include "sta/transforms.h"

namespace sta {
namespace {

void CheckShape(const ImageBuffer& image, const SecretKey& secret) {
  if (secret.image_shape != image.shape()) {
    throw std::invalid_argument("secret was issued for a different image shape");
  }
}

struct Candidate {
  std::size_t user = 0;
  std::size_t distance = 0;
  std::size_t score = 0;
};

// Best double-tail candidate for one domain, or nothing.
std::optional<Candidate> BestCandidate(const std::vector<double>& values,
                                       const Registry& registry, Domain domain,
                                       const DetectionPolicy& policy) {
  std::optional<Candidate> best;
  for (std::size_t u = 0; u < registry.users.size(); ++u) {
    const UserRecord& user = registry.users[u];
    const PairList* pairs = user.secret.pairs(domain);
    const std::size_t n = user.watermark.size();
    const std::size_t d = HammingDistance(ExtractBits(values, *pairs), user.watermark);
    if (!DoubleTailIndicator(d, n, policy)) continue;
    const std::size_t score = std::min(d, n - d);
    if (!best || score < best->score) best = Candidate{u, d, score};
  }
  return best;
}

AttributionResult ToResult(const Registry& registry, Domain domain,
                           const std::optional<Candidate>& c,
                           const DetectionPolicy& policy) {
  AttributionResult result;
  result.domain = domain;
  if (!c) return result;
  result.matched_user = registry.users[c->user].user_id;
  result.distance = c->distance;
  result.inverted = static_cast<long>(c->distance) >= policy.tau2;
  return result;
}

bool HasAllDomains(const Registry& registry) {
  for (const UserRecord& user : registry.users) {
    if (!user.secret.has(Domain::kFreq) || !user.secret.has(Domain::kMellin)) {
      return false;
    }
  }
  return !registry.users.empty();
}

}  // namespace

BitString ExtractBits(std::span<const double> values, const PairList& pairs) {
  std::vector<std::uint8_t> bits(pairs.size());
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const IndexPair& p = pairs[j];
    if (p.a >= values.size() || p.b >= values.size()) {
      throw std::invalid_argument("pair " + std::to_string(j) +
                                  " indexes outside the value grid");
    }
    bits[j] = values[p.a] >= values[p.b] ? 0 : 1;
  }
  return BitString(std::move(bits));
}

std::vector<double> DomainValues(const ImageBuffer& image, Domain domain) {
  switch (domain) {
    case Domain::kPixel:
      return {image.pixels().begin(), image.pixels().end()};
    case Domain::kFreq:
      return FftMagnitude(Luminance(image)).values;
    case Domain::kMellin:
      return FourierMellin(Luminance(image),
                           LogPolarGrid::Default(image.height(), image.width()))
          .values;
  }
  throw std::invalid_argument("unknown domain");
}

BitString ExtractWatermark(const ImageBuffer& image, const SecretKey& secret,
                           Domain domain) {
  CheckShape(image, secret);
  const PairList* pairs = secret.pairs(domain);
  if (pairs == nullptr) {
    throw std::invalid_argument("secret has no " + std::string(DomainName(domain)) +
                                " pairs");
  }
  return ExtractBits(DomainValues(image, domain), *pairs);
}

bool DoubleTailIndicator(std::size_t d, std::size_t n,
                         const DetectionPolicy& policy) {
  if (d > n) throw std::invalid_argument("distance exceeds watermark length");
  const long dd = static_cast<long>(d);
  return dd <= policy.tau1 || dd >= policy.tau2;
}

AttributionResult Attribute(const ImageBuffer& image, const Registry& registry,
                            const DetectionPolicy& policy) {
  for (const UserRecord& user : registry.users) CheckShape(image, user.secret);
  if (registry.users.empty()) return {};
  const auto values = DomainValues(image, Domain::kPixel);
  return ToResult(registry, Domain::kPixel,
                  BestCandidate(values, registry, Domain::kPixel, policy), policy);
}

AttributionResult Attribute3(const ImageBuffer& image, const Registry& registry,
                             const DetectionPolicy& policy) {
  for (const UserRecord& user : registry.users) {
    CheckShape(image, user.secret);
    if (!user.secret.has(Domain::kFreq) || !user.secret.has(Domain::kMellin)) {
      throw std::invalid_argument("user " + user.user_id +
                                  " lacks freq or mellin pairs");
    }
  }
  AttributionResult best;
  std::optional<std::size_t> best_score;
  for (Domain domain : {Domain::kPixel, Domain::kMellin, Domain::kFreq}) {
    const auto c = BestCandidate(DomainValues(image, domain), registry, domain, policy);
    if (c && (!best_score || c->score < *best_score)) {
      best = ToResult(registry, domain, c, policy);
      best_score = c->score;
    }
  }
  return best;
}

bool Detect(const ImageBuffer& image, const Registry& registry,
            const DetectionPolicy& policy) {
  if (registry.users.empty()) return false;
  const AttributionResult r = HasAllDomains(registry)
                                  ? Attribute3(image, registry, policy)
                                  : Attribute(image, registry, policy);
  return r.matched_user.has_value();
}

}  // namespace sta
