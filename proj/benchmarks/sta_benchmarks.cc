#include <benchmark/benchmark.h>

#include "sta/attacks.h"
#include "sta/bench.h"
#include "sta/embedding.h"
#include "sta/extraction.h"
#include "sta/keygen.h"
#include "sta/statistics.h"
#include "sta/transforms.h"

namespace {

sta::Registry OneUser(const sta::ImageShape& shape, std::vector<sta::Domain> domains) {
  sta::KeygenConfig cfg;
  cfg.image_shape = shape;
  cfg.domains = std::move(domains);
  return sta::RegisterUser(sta::Registry{}, "u", cfg);
}

void BM_FftMagnitude(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const sta::Field2D f = sta::Luminance(sta::GenerateCorpus(1, n, 1)[0]);
  for (auto _ : state) benchmark::DoNotOptimize(sta::FftMagnitude(f));
}
BENCHMARK(BM_FftMagnitude)->Arg(64)->Arg(128)->Arg(256);

void BM_FourierMellinVjp(benchmark::State& state) {
  const sta::Field2D f = sta::Luminance(sta::GenerateCorpus(1, 64, 1)[0]);
  const sta::LogPolarGrid grid = sta::LogPolarGrid::Default(64, 64);
  const sta::Field2D cot = sta::FourierMellin(f, grid);
  for (auto _ : state) benchmark::DoNotOptimize(sta::FourierMellinVjp(f, grid, cot));
}
BENCHMARK(BM_FourierMellinVjp);

void BM_EmbedPixel(benchmark::State& state) {
  const sta::ImageBuffer x0 = sta::GenerateCorpus(1, 64, 7)[0];
  const sta::Registry reg = OneUser(x0.shape(), {sta::Domain::kPixel});
  for (auto _ : state) {
    benchmark::DoNotOptimize(sta::Embed(x0, reg.users[0], sta::EmbedConfig{}, nullptr));
  }
}
BENCHMARK(BM_EmbedPixel)->Unit(benchmark::kMillisecond);

void BM_EmbedTriple(benchmark::State& state) {
  const sta::ImageBuffer x0 = sta::GenerateCorpus(1, 64, 7)[0];
  const sta::Registry reg =
      OneUser(x0.shape(), {sta::Domain::kPixel, sta::Domain::kFreq, sta::Domain::kMellin});
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sta::Embed(x0, reg.users[0], sta::EmbedConfig::TripleDomain(), nullptr));
  }
}
BENCHMARK(BM_EmbedTriple)->Unit(benchmark::kMillisecond);

void BM_Attribute(benchmark::State& state) {
  const sta::ImageBuffer x = sta::GenerateCorpus(1, 64, 7)[0];
  sta::Registry reg;
  sta::KeygenConfig cfg;
  for (int u = 0; u < state.range(0); ++u) {
    reg = sta::RegisterUser(std::move(reg), "user" + std::to_string(u), cfg);
  }
  for (auto _ : state) benchmark::DoNotOptimize(sta::Attribute(x, reg, sta::DetectionPolicy{}));
}
BENCHMARK(BM_Attribute)->Arg(10)->Arg(100);

void BM_TwoTailProb(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sta::TwoTailProb(n, 0.5, n / 4, n - n / 4));
}
BENCHMARK(BM_TwoTailProb)->Arg(100)->Arg(1000);

void BM_SolveThresholds(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(sta::SolveThresholds(100, 0.5, 10, 1e-6, 3));
}
BENCHMARK(BM_SolveThresholds);

void BM_JpegRoundTrip(benchmark::State& state) {
  const sta::ImageBuffer x = sta::GenerateCorpus(1, 64, 7)[0];
  for (auto _ : state) benchmark::DoNotOptimize(sta::JpegRoundTrip(x, 50));
}
BENCHMARK(BM_JpegRoundTrip);

}  // namespace
BENCHMARK_MAIN();
