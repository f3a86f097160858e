#ifndef STA_BENCH_H_
#define STA_BENCH_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sta/attacks.h"
#include "sta/core_model.h"
#include "sta/embedding.h"
#include "sta/statistics.h"

namespace sta {

struct BenchConfig {
  // Directory of PNG files; when absent a procedural corpus is generated.
  std::optional<std::filesystem::path> corpus_dir;
  int count = 20;
  int size = 64;
  std::uint64_t corpus_seed = 7;

  // Existing registry; when absent one is generated from the fields below.
  std::optional<std::filesystem::path> registry_path;
  int users = 10;
  int n_bits = 100;
  std::uint64_t registry_seed = 1;

  std::vector<AttackSpec> attacks = {AttackSpec{}};
  // Fixed thresholds; when absent they are solved for target_fpr.
  std::optional<DetectionPolicy> policy;
  double target_fpr = 1e-6;
  double p_null = 0.5;
  // {pixel} or {pixel, freq, mellin}.
  std::vector<Domain> domains = {Domain::kPixel};
  EmbedConfig embed;
  // Stem for <stem>.csv and <stem>.json; empty writes nothing.
  std::string output_path;
  // 0: STA_THREADS, else hardware concurrency.
  int threads = 0;

  void Validate() const;
};

BenchConfig BenchConfigFromJson(std::string_view text);

struct BenchRow {
  std::string attack;
  double abwe = 0.0;
  double tpr_attribution = 0.0;
  double tpr_detection = 0.0;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  double mean_certified_budget = 0.0;
  std::map<Domain, double> abwe_by_domain;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  FprReport fpr;
  int images = 0;
  int embed_failures = 0;
  double mean_embed_psnr = 0.0;
};

// Deterministic procedural images: value-noise textures, smooth gradients and
// soft shapes, each channel spread over at least [0.1, 0.9]. Throws
// std::invalid_argument when size < 32.
std::vector<ImageBuffer> GenerateCorpus(int count, int size, std::uint64_t seed);

BenchReport RunBenchmark(const BenchConfig& config);

std::string ReportToCsv(const BenchReport& report);
std::string ReportToJson(const BenchReport& report);
// Writes <stem>.csv and <stem>.json.
void WriteReport(const BenchReport& report, const std::string& stem);

// Worker count from STA_THREADS, falling back to hardware concurrency.
int DefaultThreads();

}  // namespace sta

#endif  // STA_BENCH_H_
