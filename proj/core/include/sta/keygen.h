#ifndef STA_KEYGEN_H_
#define STA_KEYGEN_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sta/core_model.h"
#include "sta/rng.h"

namespace sta {

struct KeygenConfig {
  int n_bits = 100;
  std::vector<Domain> domains = {Domain::kPixel};
  ImageShape image_shape = {64, 64, 3};
  std::uint64_t seed = 0;
};

// Indices a secret may draw from in `domain`. Pixel grids use every flat
// index; Fourier grids keep one representative of each conjugate pair and
// drop the DC bin.
std::vector<std::size_t> CandidateIndices(Domain domain,
                                          const ImageShape& shape);

// n_bits independent fair bits.
BitString SampleWatermark(const KeygenConfig& config, Rng& rng);

// For each requested domain, draws 2n distinct candidate indices uniformly
// without replacement and groups consecutive draws into n pairs. The pixel
// domain is always present. Throws std::invalid_argument when a grid has fewer
// than 2n candidates.
SecretKey SampleSecret(const KeygenConfig& config, Rng& rng);

// Returns `registry` extended by a fresh user. The user's generator is seeded
// from (registry.rng_seed, insertion index), so a registry is reproducible
// from its seed and the order of registrations. `config.seed` is ignored here.
Registry RegisterUser(Registry registry, std::string user_id,
                      const KeygenConfig& config);

// Registry file errors. `offset` is the byte position reported by the JSON
// parser, or 0 for schema errors (the message then names the JSON path).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

std::string RegistryToJson(const Registry& registry);
Registry RegistryFromJson(std::string_view text);

void PersistRegistry(const Registry& registry,
                     const std::filesystem::path& path);
Registry LoadRegistry(const std::filesystem::path& path);

}  // namespace sta

#endif  // STA_KEYGEN_H_
