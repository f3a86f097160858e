#include "sta/bench.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "sta/certify.h"
#include "sta/extraction.h"
#include "sta/image_io.h"
#include "sta/keygen.h"
#include "sta/rng.h"

namespace sta {
namespace {

using nlohmann::json;

double Smooth(double t) { return t * t * (3 - 2 * t); }

// Value noise on a (cells+1)^2 lattice, sampled at n x n points.
std::vector<double> ValueNoise(int n, int cells, Rng& rng) {
  const int k = cells + 1;
  std::vector<double> lattice(static_cast<std::size_t>(k) * k);
  for (double& v : lattice) v = rng.UniformDouble();
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r) {
    const double y = static_cast<double>(r) * cells / n;
    const int y0 = static_cast<int>(y);
    const double ty = Smooth(y - y0);
    for (int c = 0; c < n; ++c) {
      const double x = static_cast<double>(c) * cells / n;
      const int x0 = static_cast<int>(x);
      const double tx = Smooth(x - x0);
      auto at = [&](int i, int j) { return lattice[static_cast<std::size_t>(i) * k + j]; };
      out[static_cast<std::size_t>(r) * n + c] =
          (1 - ty) * ((1 - tx) * at(y0, x0) + tx * at(y0, x0 + 1)) +
          ty * ((1 - tx) * at(y0 + 1, x0) + tx * at(y0 + 1, x0 + 1));
    }
  }
  return out;
}

std::vector<double> Fbm(int n, Rng& rng) {
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  double amplitude = 1.0;
  for (int cells = 3; cells <= n / 4; cells *= 2) {
    const auto octave = ValueNoise(n, cells, rng);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += amplitude * octave[i];
    amplitude *= 0.5;
  }
  return out;
}

ImageBuffer GenerateImage(int n, Rng& rng) {
  constexpr int kChannels = 3;
  const auto shared = Fbm(n, rng);
  std::vector<std::vector<double>> planes(kChannels);
  for (int ch = 0; ch < kChannels; ++ch) {
    const auto own = Fbm(n, rng);
    const double mix = rng.Uniform(0.3, 0.7);
    const double gy = rng.Uniform(-1, 1);
    const double gx = rng.Uniform(-1, 1);
    auto& plane = planes[ch];
    plane.resize(shared.size());
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        const std::size_t i = static_cast<std::size_t>(r) * n + c;
        plane[i] = mix * shared[i] + (1 - mix) * own[i] +
                   0.5 * (gy * r + gx * c) / n;
      }
    }
  }
  const int shapes = 2 + static_cast<int>(rng.UniformInt(3));
  for (int s = 0; s < shapes; ++s) {
    const double cy = rng.Uniform(0, n);
    const double cx = rng.Uniform(0, n);
    const double radius = rng.Uniform(0.1, 0.3) * n;
    const double softness = rng.Uniform(1.0, 4.0);
    double color[kChannels];
    for (double& v : color) v = rng.Uniform(-0.8, 0.8);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        const double dist = std::hypot(r - cy, c - cx);
        const double w = 1.0 / (1.0 + std::exp((dist - radius) / softness));
        for (int ch = 0; ch < kChannels; ++ch) {
          planes[ch][static_cast<std::size_t>(r) * n + c] += w * color[ch];
        }
      }
    }
  }
  ImageBuffer image(n, n, kChannels);
  for (int ch = 0; ch < kChannels; ++ch) {
    auto& plane = planes[ch];
    // Faint dither so no two pixels tie exactly.
    for (double& v : plane) v += rng.Uniform(-2e-3, 2e-3);
    const auto [lo_it, hi_it] = std::minmax_element(plane.begin(), plane.end());
    const double lo = *lo_it;
    const double span = *hi_it - lo;
    const double out_lo = rng.Uniform(0.02, 0.1);
    const double out_hi = rng.Uniform(0.9, 0.98);
    for (std::size_t i = 0; i < plane.size(); ++i) {
      image[i * kChannels + ch] = out_lo + (out_hi - out_lo) * (plane[i] - lo) / span;
    }
  }
  return image;
}

struct ImageOutcome {
  bool embed_success = false;
  double embed_psnr = 0.0;
  struct PerAttack {
    std::map<Domain, std::size_t> errors;
    bool attributed = false;
    bool detected = false;
    double psnr = 0.0;
    double ssim = 0.0;
    double cert_budget = 0.0;
  };
  std::vector<PerAttack> attacks;
};

std::vector<ImageBuffer> LoadCorpusDir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::invalid_argument("no PNG files in " + dir.string());
  std::vector<ImageBuffer> images;
  for (const auto& f : files) images.push_back(ReadPng(f));
  return images;
}

Registry MakeRegistry(const BenchConfig& config, const ImageShape& shape) {
  if (config.registry_path) return LoadRegistry(*config.registry_path);
  Registry registry;
  registry.n_bits = config.n_bits;
  registry.rng_seed = config.registry_seed;
  KeygenConfig keygen;
  keygen.n_bits = config.n_bits;
  keygen.domains = config.domains;
  keygen.image_shape = shape;
  for (int u = 0; u < config.users; ++u) {
    registry = RegisterUser(std::move(registry), "user" + std::to_string(u), keygen);
  }
  return registry;
}

bool TripleDomain(const std::vector<Domain>& domains) {
  return std::find(domains.begin(), domains.end(), Domain::kFreq) != domains.end();
}

json NumberOrString(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

ImageOutcome ProcessImage(const ImageBuffer& x0, std::size_t index,
                          const UserRecord& user, const Registry& registry,
                          const BenchConfig& config, const EmbedConfig& embed,
                          const DetectionPolicy& policy) {
  ImageOutcome outcome;
  EmbedReport report;
  const ImageBuffer x = Embed(x0, user, embed, &report);
  outcome.embed_success = report.success;
  outcome.embed_psnr = report.psnr_vs_original;
  const bool triple = TripleDomain(config.domains);
  for (const AttackSpec& spec : config.attacks) {
    AttackSpec local = spec;
    local.seed = DeriveSeed(spec.seed, index);
    ImageBuffer attacked;
    if (spec.kind == AttackKind::kPgd) {
      const AttackSpec resolved = ResolveParams(local);
      PgdConfig pgd;
      pgd.budget = resolved.params.at("budget");
      pgd.iters = static_cast<int>(resolved.params.at("iters"));
      pgd.lr = resolved.params.at("lr");
      pgd.margin = embed.margin;
      pgd.lambda_wm = embed.lambda_wm;
      pgd.lambda_qual = embed.lambda_qual;
      Rng rng(DeriveSeed(local.seed, 2));
      std::vector<std::uint8_t> bits(user.watermark.size());
      for (auto& b : bits) b = rng.FairBit();
      attacked = PgdAttack(x, user.secret.pixel_pairs, BitString(std::move(bits)), pgd);
    } else {
      attacked = ApplyAttack(x, local);
    }
    ImageOutcome::PerAttack r;
    for (Domain d : config.domains) {
      r.errors[d] = HammingDistance(ExtractWatermark(attacked, user.secret, d),
                                    user.watermark);
    }
    const AttributionResult attribution = triple
                                              ? Attribute3(attacked, registry, policy)
                                              : Attribute(attacked, registry, policy);
    r.detected = attribution.matched_user.has_value();
    r.attributed = r.detected && *attribution.matched_user == user.user_id;
    const QualityMetrics q = MeasureQuality(attacked, x0);
    r.psnr = q.psnr;
    r.ssim = q.ssim;
    r.cert_budget = Certify(ComputeDeltaProfile(attacked, user.secret.pixel_pairs), 0.0)
                        .delta_min;
    outcome.attacks.push_back(std::move(r));
  }
  return outcome;
}

}  // namespace

void BenchConfig::Validate() const {
  if (!corpus_dir && count < 1) throw std::invalid_argument("count must be >= 1");
  if (!corpus_dir && size < 32) throw std::invalid_argument("size must be >= 32");
  if (!registry_path && (users < 1 || n_bits < 1)) {
    throw std::invalid_argument("users and bits must be >= 1");
  }
  if (attacks.empty()) {
    throw std::invalid_argument("at least one attack (or \"none\") is required");
  }
  const bool pixel_only = domains.size() == 1 && domains[0] == Domain::kPixel;
  const bool triple = domains.size() == 3;
  if (!pixel_only && !triple) {
    throw std::invalid_argument("domains must be [pixel] or [pixel, freq, mellin]");
  }
  if (!policy && !(target_fpr > 0 && target_fpr < 1)) {
    throw std::invalid_argument("target_fpr must lie in (0,1)");
  }
  if (threads < 0) throw std::invalid_argument("threads must be >= 0");
  embed.Validate();
}

BenchConfig BenchConfigFromJson(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("bench config: ") + e.what(), e.byte);
  }
  BenchConfig config;
  try {
    if (j.contains("corpus")) {
      const json& corpus = j.at("corpus");
      if (corpus.contains("dir")) {
        config.corpus_dir = corpus.at("dir").get<std::string>();
      } else {
        const json& proc = corpus.at("procedural");
        config.count = proc.value("count", config.count);
        config.size = proc.value("size", config.size);
        config.corpus_seed = proc.value("seed", config.corpus_seed);
      }
    }
    if (j.contains("registry_path")) {
      config.registry_path = j.at("registry_path").get<std::string>();
    }
    config.users = j.value("users", config.users);
    config.n_bits = j.value("bits", config.n_bits);
    config.registry_seed = j.value("registry_seed", config.registry_seed);
    if (j.contains("attacks")) {
      config.attacks.clear();
      for (const json& a : j.at("attacks")) {
        config.attacks.push_back(
            a.is_string() ? AttackSpec{ParseAttackKind(a.get<std::string>()), {}, 0}
                          : AttackSpecFromJson(a.dump()));
      }
    }
    if (j.contains("policy")) {
      const json& p = j.at("policy");
      DetectionPolicy policy;
      policy.tau1 = p.at("tau1").get<int>();
      policy.tau2 = p.at("tau2").get<int>();
      policy.p_null = p.value("p_null", policy.p_null);
      config.policy = policy;
    }
    config.target_fpr = j.value("target_fpr", config.target_fpr);
    config.p_null = j.value("p_null", config.p_null);
    if (j.contains("domains")) {
      config.domains.clear();
      for (const json& d : j.at("domains")) {
        config.domains.push_back(ParseDomain(d.get<std::string>()));
      }
    }
    if (j.contains("carrier")) {
      const std::string kind = j.at("carrier").get<std::string>();
      if (kind == "identity") {
        config.embed.carrier.kind = CarrierKind::kIdentity;
      } else if (kind == "smooth") {
        config.embed.carrier.kind = CarrierKind::kSmooth;
      } else {
        throw std::invalid_argument("unknown carrier '" + kind + "'");
      }
    }
    config.embed.steps = j.value("steps", config.embed.steps);
    config.output_path = j.value("output_path", config.output_path);
    config.threads = j.value("threads", config.threads);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bench config: ") + e.what(), 0);
  }
  std::sort(config.domains.begin(), config.domains.end());
  if (TripleDomain(config.domains)) {
    const EmbedConfig triple = EmbedConfig::TripleDomain();
    config.embed.lambda_t = triple.lambda_t;
    config.embed.lambda_r = triple.lambda_r;
  }
  config.Validate();
  return config;
}

std::vector<ImageBuffer> GenerateCorpus(int count, int size, std::uint64_t seed) {
  if (size < 32) throw std::invalid_argument("corpus image size must be >= 32");
  if (count < 0) throw std::invalid_argument("corpus count must be >= 0");
  std::vector<ImageBuffer> corpus;
  corpus.reserve(count);
  for (int i = 0; i < count; ++i) {
    Rng rng(DeriveSeed(seed, i));
    corpus.push_back(GenerateImage(size, rng));
  }
  return corpus;
}

int DefaultThreads() {
  if (const char* env = std::getenv("STA_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

BenchReport RunBenchmark(const BenchConfig& config) {
  config.Validate();
  const std::vector<ImageBuffer> corpus =
      config.corpus_dir ? LoadCorpusDir(*config.corpus_dir)
                        : GenerateCorpus(config.count, config.size, config.corpus_seed);
  const Registry registry = MakeRegistry(config, corpus.front().shape());
  ValidateRegistry(registry);
  if (registry.users.empty()) throw std::invalid_argument("registry has no users");
  const int n = registry.n_bits;
  const int m = static_cast<int>(registry.users.size());
  const bool triple = TripleDomain(config.domains);

  DetectionPolicy policy;
  if (config.policy) {
    policy = *config.policy;
  } else {
    const auto t = SolveThresholds(n, config.p_null, m, config.target_fpr, triple ? 3 : 1);
    if (!t) throw std::invalid_argument("no thresholds achieve the target FPR");
    policy.tau1 = t->tau1;
    policy.tau2 = t->tau2;
    policy.p_null = config.p_null;
  }
  policy.Validate(n);

  EmbedConfig embed = config.embed;
  if (triple) {
    embed.lambda_t = embed.lambda_t > 0 ? embed.lambda_t : embed.lambda_wm;
    embed.lambda_r = embed.lambda_r > 0 ? embed.lambda_r : embed.lambda_wm;
  } else {
    embed.lambda_t = embed.lambda_r = 0.0;
  }

  std::vector<ImageOutcome> outcomes(corpus.size());
  std::vector<std::exception_ptr> errors(corpus.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < corpus.size(); i = next++) {
      const UserRecord& user = registry.users[i % registry.users.size()];
      try {
        outcomes[i] = ProcessImage(corpus[i], i, user, registry, config, embed, policy);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(config.threads > 0 ? config.threads : DefaultThreads(),
                                    static_cast<int>(corpus.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  BenchReport report;
  report.images = static_cast<int>(corpus.size());
  report.fpr = MakeFprReport(n, policy.p_null, policy.tau1, policy.tau2, m);
  const double count = static_cast<double>(corpus.size());
  for (const ImageOutcome& o : outcomes) {
    report.embed_failures += !o.embed_success;
    report.mean_embed_psnr += o.embed_psnr / count;
  }
  for (std::size_t a = 0; a < config.attacks.size(); ++a) {
    BenchRow row;
    row.attack = AttackKindName(config.attacks[a].kind);
    for (const ImageOutcome& o : outcomes) {
      const auto& r = o.attacks[a];
      for (const auto& [d, errors] : r.errors) {
        row.abwe_by_domain[d] += static_cast<double>(errors) / (count * n);
      }
      row.tpr_attribution += r.attributed / count;
      row.tpr_detection += r.detected / count;
      row.mean_psnr += r.psnr / count;
      row.mean_ssim += r.ssim / count;
      row.mean_certified_budget += r.cert_budget / count;
    }
    row.abwe = row.abwe_by_domain[Domain::kPixel];
    report.rows.push_back(std::move(row));
  }
  if (!config.output_path.empty()) WriteReport(report, config.output_path);
  return report;
}

std::string ReportToCsv(const BenchReport& report) {
  std::ostringstream out;
  out.precision(6);
  out << "attack,abwe,tpr_attr,tpr_det,psnr,ssim,cert_budget\n";
  for (const BenchRow& r : report.rows) {
    out << r.attack << ',' << r.abwe << ',' << r.tpr_attribution << ','
        << r.tpr_detection << ',' << r.mean_psnr << ',' << r.mean_ssim << ','
        << r.mean_certified_budget << '\n';
  }
  return out.str();
}

std::string ReportToJson(const BenchReport& report) {
  json j;
  j["images"] = report.images;
  j["embed_failures"] = report.embed_failures;
  j["mean_embed_psnr"] = NumberOrString(report.mean_embed_psnr);
  j["fpr"] = {{"per_user_two_tail", report.fpr.per_user_two_tail},
              {"union_bound_m", report.fpr.union_bound_m},
              {"union_bound_3m", report.fpr.union_bound_3m},
              {"tau1", report.fpr.tau1},
              {"tau2", report.fpr.tau2},
              {"n", report.fpr.n},
              {"m", report.fpr.m}};
  j["rows"] = json::array();
  for (const BenchRow& r : report.rows) {
    json row = {{"attack", r.attack},
                {"abwe", r.abwe},
                {"tpr_attribution", r.tpr_attribution},
                {"tpr_detection", r.tpr_detection},
                {"mean_psnr", NumberOrString(r.mean_psnr)},
                {"mean_ssim", r.mean_ssim},
                {"mean_certified_budget", r.mean_certified_budget}};
    for (const auto& [d, v] : r.abwe_by_domain) {
      row["abwe_by_domain"][std::string(DomainName(d))] = v;
    }
    j["rows"].push_back(std::move(row));
  }
  return j.dump(2);
}

void WriteReport(const BenchReport& report, const std::string& stem) {
  for (const auto& [ext, body] :
       {std::pair{".csv", ReportToCsv(report)}, std::pair{".json", ReportToJson(report)}}) {
    std::ofstream out(stem + ext);
    if (!out) throw std::runtime_error("cannot write " + stem + ext);
    out << body;
  }
}

}  // namespace sta
