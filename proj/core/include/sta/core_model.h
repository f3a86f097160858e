#ifndef STA_CORE_MODEL_H_
#define STA_CORE_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sta {

// The three value grids a watermark can live in: raw pixels, the 2-D Fourier
// magnitude of the luminance (translation invariant) and the Fourier-Mellin
// magnitude of the luminance (rotation invariant).
enum class Domain { kPixel, kFreq, kMellin };

std::string_view DomainName(Domain domain);
Domain ParseDomain(std::string_view name);

// A fixed-length watermark. Bits are stored one per byte, each 0 or 1.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::vector<std::uint8_t> bits);

  // Parses a string of '0'/'1' characters.
  static BitString FromString(std::string_view text);
  std::string ToString() const;

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  std::span<const std::uint8_t> bits() const { return bits_; }

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// Number of positions at which `a` and `b` differ. Throws
// std::invalid_argument on a length mismatch.
std::size_t HammingDistance(const BitString& a, const BitString& b);

BitString Complement(const BitString& a);

struct ImageShape {
  int height = 0;
  int width = 0;
  int channels = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(height) * width * channels;
  }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(height) * width;
  }
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

struct IndexPair {
  std::size_t a = 0;
  std::size_t b = 0;
  friend bool operator==(const IndexPair&, const IndexPair&) = default;
};

using PairList = std::vector<IndexPair>;

// Private key. Each domain has its own pair list because the grids differ in
// size: H*W*C for pixels, H*W for the Fourier magnitude and the log-polar
// grid size for Fourier-Mellin.
struct SecretKey {
  ImageShape image_shape;
  PairList pixel_pairs;
  std::optional<PairList> freq_pairs;
  std::optional<PairList> mellin_pairs;

  // Null when the domain is absent from this key.
  const PairList* pairs(Domain domain) const;
  bool has(Domain domain) const { return pairs(domain) != nullptr; }
  std::size_t n_bits() const { return pixel_pairs.size(); }

  friend bool operator==(const SecretKey&, const SecretKey&) = default;
};

struct GridDims {
  int rows = 0;
  int cols = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

// Grid addressed by `domain` for images of `shape`. Pixel grids are flattened
// to rows = H, cols = W * C; the Fourier grid is H x W; the Fourier-Mellin
// grid is the default log-polar resolution min(H, W) x min(H, W).
GridDims DomainGrid(Domain domain, const ImageShape& shape);

// Flat index of the Hermitian partner of bin `index` on a rows x cols
// Fourier grid. Real inputs have |F[k]| == |F[partner(k)]|.
std::size_t ConjugatePartner(std::size_t index, const GridDims& grid);

// Checks the SecretKey invariants (distinct in-range indices per list, equal
// list lengths, no DC or conjugate-partner indices in the Fourier lists).
// Throws std::invalid_argument describing the first violation.
void ValidateSecret(const SecretKey& secret);

struct UserRecord {
  std::string user_id;
  BitString watermark;
  SecretKey secret;

  friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

struct Registry {
  std::vector<UserRecord> users;
  int n_bits = 100;
  std::uint64_t rng_seed = 0;

  const UserRecord* Find(std::string_view user_id) const;

  friend bool operator==(const Registry&, const Registry&) = default;
};

void ValidateRegistry(const Registry& registry);

// H x W x C image, row-major over (row, column, channel), nominal range [0,1].
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int height, int width, int channels, double fill = 0.0);
  ImageBuffer(ImageShape shape, std::vector<double> pixels);

  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  int channels() const { return shape_.channels; }
  const ImageShape& shape() const { return shape_; }
  std::size_t size() const { return pixels_.size(); }

  std::size_t Index(int row, int col, int channel) const {
    return (static_cast<std::size_t>(row) * shape_.width + col) *
               shape_.channels +
           channel;
  }
  double& at(int row, int col, int channel) {
    return pixels_[Index(row, col, channel)];
  }
  double at(int row, int col, int channel) const {
    return pixels_[Index(row, col, channel)];
  }

  std::span<double> pixels() { return pixels_; }
  std::span<const double> pixels() const { return pixels_; }
  double& operator[](std::size_t i) { return pixels_[i]; }
  double operator[](std::size_t i) const { return pixels_[i]; }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  ImageShape shape_;
  std::vector<double> pixels_;
};

// Returns a copy with every pixel clamped to [0,1].
ImageBuffer Clamped(ImageBuffer image);

// Double-tail decision thresholds: a distance d is flagged when
// d <= tau1 or d >= tau2. `p_null` is the per-bit match probability under the
// null hypothesis.
struct DetectionPolicy {
  int tau1 = 25;
  int tau2 = 75;
  double p_null = 0.5;

  // Throws std::invalid_argument unless 0 <= tau1 < tau2 <= n and
  // 0 < p_null < 1.
  void Validate(std::size_t n) const;
};

}  // namespace sta

#endif  // STA_CORE_MODEL_H_
