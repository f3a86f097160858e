#include "fft.h"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace sta::internal {
namespace {

// FFTW's planner is not thread-safe; plans are created once per shape under a
// lock and executed through the thread-safe new-array interface.
class PlanCache {
 public:
  static PlanCache& Get() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan Plan(int rows, int cols, bool inverse) {
    std::lock_guard<std::mutex> lock(mu_);
    const auto key = std::make_tuple(rows, cols, inverse);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    fftw_complex* in = fftw_alloc_complex(n);
    fftw_complex* out = fftw_alloc_complex(n);
    fftw_plan plan =
        fftw_plan_dft_2d(rows, cols, in, out,
                         inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                         FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    if (plan == nullptr) throw std::runtime_error("fftw planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  PlanCache() = default;
  std::mutex mu_;
  std::map<std::tuple<int, int, bool>, fftw_plan> plans_;
};

}  // namespace

void Dft2d(std::span<const std::complex<double>> in,
           std::span<std::complex<double>> out, int rows, int cols,
           bool inverse) {
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  if (rows < 1 || cols < 1 || in.size() != n || out.size() != n) {
    throw std::invalid_argument("Dft2d: buffer size does not match grid");
  }
  fftw_plan plan = PlanCache::Get().Plan(rows, cols, inverse);
  // fftw_execute_dft takes a mutable input pointer.
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(scratch.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace sta::internal
