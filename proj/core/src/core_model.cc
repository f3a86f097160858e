#include "sta/core_model.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace sta {

std::string_view DomainName(Domain domain) {
  switch (domain) {
    case Domain::kPixel:
      return "pixel";
    case Domain::kFreq:
      return "freq";
    case Domain::kMellin:
      return "mellin";
  }
  return "unknown";
}

Domain ParseDomain(std::string_view name) {
  if (name == "pixel") return Domain::kPixel;
  if (name == "freq") return Domain::kFreq;
  if (name == "mellin") return Domain::kMellin;
  throw std::invalid_argument("unknown domain '" + std::string(name) + "'");
}

BitString::BitString(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (std::uint8_t b : bits_) {
    if (b > 1) throw std::invalid_argument("bit value must be 0 or 1");
  }
}

BitString BitString::FromString(std::string_view text) {
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '0' && text[i] != '1') {
      throw std::invalid_argument("invalid bit character at position " +
                                  std::to_string(i));
    }
    bits.push_back(text[i] == '1' ? 1 : 0);
  }
  return BitString(std::move(bits));
}

std::string BitString::ToString() const {
  std::string out(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out[i] = '1';
  }
  return out;
}

std::size_t HammingDistance(const BitString& a, const BitString& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("hamming distance of bitstrings of length " +
                                std::to_string(a.size()) + " and " +
                                std::to_string(b.size()));
  }
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

BitString Complement(const BitString& a) {
  std::vector<std::uint8_t> bits(a.bits().begin(), a.bits().end());
  for (auto& b : bits) b ^= 1;
  return BitString(std::move(bits));
}

const PairList* SecretKey::pairs(Domain domain) const {
  switch (domain) {
    case Domain::kPixel:
      return &pixel_pairs;
    case Domain::kFreq:
      return freq_pairs ? &*freq_pairs : nullptr;
    case Domain::kMellin:
      return mellin_pairs ? &*mellin_pairs : nullptr;
  }
  return nullptr;
}

GridDims DomainGrid(Domain domain, const ImageShape& shape) {
  switch (domain) {
    case Domain::kPixel:
      return {shape.height, shape.width * shape.channels};
    case Domain::kFreq:
      return {shape.height, shape.width};
    case Domain::kMellin: {
      const int side = std::min(shape.height, shape.width);
      return {side, side};
    }
  }
  return {};
}

std::size_t ConjugatePartner(std::size_t index, const GridDims& grid) {
  const std::size_t rows = grid.rows;
  const std::size_t cols = grid.cols;
  const std::size_t r = index / cols;
  const std::size_t c = index % cols;
  return ((rows - r) % rows) * cols + (cols - c) % cols;
}

void ValidateSecret(const SecretKey& secret) {
  const ImageShape& shape = secret.image_shape;
  if (shape.height < 1 || shape.width < 1 ||
      (shape.channels != 1 && shape.channels != 3)) {
    throw std::invalid_argument("secret has invalid image shape");
  }
  const std::size_t n = secret.pixel_pairs.size();
  if (n == 0) throw std::invalid_argument("secret has no pixel pairs");

  for (Domain domain : {Domain::kPixel, Domain::kFreq, Domain::kMellin}) {
    const PairList* pairs = secret.pairs(domain);
    if (pairs == nullptr) continue;
    const std::string name(DomainName(domain));
    if (pairs->size() != n) {
      throw std::invalid_argument(name + " pair list length " +
                                  std::to_string(pairs->size()) +
                                  " differs from " + std::to_string(n));
    }
    const GridDims grid = DomainGrid(domain, shape);
    const bool fourier = domain != Domain::kPixel;
    std::unordered_set<std::size_t> seen;
    seen.reserve(2 * n);
    for (const IndexPair& p : *pairs) {
      for (std::size_t idx : {p.a, p.b}) {
        if (idx >= grid.size()) {
          throw std::invalid_argument(name + " index " + std::to_string(idx) +
                                      " out of range");
        }
        if (!seen.insert(idx).second) {
          throw std::invalid_argument(name + " index " + std::to_string(idx) +
                                      " repeated");
        }
        if (fourier && idx == 0) {
          throw std::invalid_argument(name + " pairs contain the DC bin");
        }
      }
    }
    if (fourier) {
      for (std::size_t idx : seen) {
        const std::size_t partner = ConjugatePartner(idx, grid);
        if (partner != idx && seen.count(partner)) {
          throw std::invalid_argument(name + " indices " + std::to_string(idx) +
                                      " and " + std::to_string(partner) +
                                      " are conjugate partners");
        }
      }
    }
  }
}

const UserRecord* Registry::Find(std::string_view user_id) const {
  for (const auto& user : users) {
    if (user.user_id == user_id) return &user;
  }
  return nullptr;
}

void ValidateRegistry(const Registry& registry) {
  if (registry.n_bits < 1) throw std::invalid_argument("n_bits must be >= 1");
  std::unordered_set<std::string> ids;
  for (const auto& user : registry.users) {
    if (!ids.insert(user.user_id).second) {
      throw std::invalid_argument("duplicate user_id '" + user.user_id + "'");
    }
    if (user.watermark.size() != static_cast<std::size_t>(registry.n_bits)) {
      throw std::invalid_argument("watermark of '" + user.user_id +
                                  "' has wrong length");
    }
    if (user.secret.n_bits() != user.watermark.size()) {
      throw std::invalid_argument("secret of '" + user.user_id +
                                  "' does not match its watermark length");
    }
    ValidateSecret(user.secret);
  }
}

ImageBuffer::ImageBuffer(int height, int width, int channels, double fill)
    : ImageBuffer(ImageShape{height, width, channels},
                  std::vector<double>(static_cast<std::size_t>(height) *
                                          width * channels,
                                      fill)) {}

ImageBuffer::ImageBuffer(ImageShape shape, std::vector<double> pixels)
    : shape_(shape), pixels_(std::move(pixels)) {
  if (shape.height < 1 || shape.width < 1) {
    throw std::invalid_argument("image dimensions must be positive");
  }
  if (shape.channels != 1 && shape.channels != 3) {
    throw std::invalid_argument("image must have 1 or 3 channels");
  }
  if (pixels_.size() != shape.size()) {
    throw std::invalid_argument("pixel buffer size does not match shape");
  }
  for (double v : pixels_) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite pixel");
  }
}

ImageBuffer Clamped(ImageBuffer image) {
  for (double& v : image.pixels()) v = std::clamp(v, 0.0, 1.0);
  return image;
}

void DetectionPolicy::Validate(std::size_t n) const {
  if (tau1 < 0 || tau1 >= tau2 || static_cast<std::size_t>(tau2) > n) {
    throw std::invalid_argument("thresholds must satisfy 0 <= tau1 < tau2 <= n");
  }
  if (!(p_null > 0.0 && p_null < 1.0)) {
    throw std::invalid_argument("p_null must lie in (0, 1)");
  }
}

}  // namespace sta
