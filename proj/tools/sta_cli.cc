// sta: keygen, embed, extract, attribute, detect, attack, certify, bench.
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sta/attacks.h"
#include "sta/bench.h"
#include "sta/certify.h"
#include "sta/embedding.h"
#include "sta/extraction.h"
#include "sta/image_io.h"
#include "sta/keygen.h"
#include "sta/statistics.h"

namespace {

using nlohmann::json;

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const sta::UserRecord& FindUser(const sta::Registry& registry, const std::string& id) {
  const sta::UserRecord* user = registry.Find(id);
  if (user == nullptr) throw std::invalid_argument("unknown user '" + id + "'");
  return *user;
}

bool AllDomains(const sta::Registry& registry) {
  for (const auto& u : registry.users) {
    if (!u.secret.has(sta::Domain::kFreq) || !u.secret.has(sta::Domain::kMellin)) {
      return false;
    }
  }
  return !registry.users.empty();
}

struct PolicyFlags {
  std::optional<int> tau1;
  std::optional<int> tau2;
  double target_fpr = 1e-6;
  double p_null = 0.5;

  void Add(CLI::App* cmd) {
    cmd->add_option("--tau1", tau1, "Lower-tail threshold");
    cmd->add_option("--tau2", tau2, "Upper-tail threshold");
    cmd->add_option("--target-fpr", target_fpr,
                    "Solve thresholds for this FPR when tau1/tau2 are absent");
    cmd->add_option("--p-null", p_null, "Per-bit match probability under H0");
  }

  sta::DetectionPolicy Resolve(const sta::Registry& registry, int domains) const {
    sta::DetectionPolicy policy;
    policy.p_null = p_null;
    if (tau1 || tau2) {
      if (!tau1 || !tau2) throw CLI::ValidationError("--tau1 and --tau2 go together");
      policy.tau1 = *tau1;
      policy.tau2 = *tau2;
    } else {
      const auto t = sta::SolveThresholds(registry.n_bits, p_null,
                                          std::max<int>(1, registry.users.size()),
                                          target_fpr, domains);
      if (!t) throw std::invalid_argument("no thresholds achieve the target FPR");
      policy.tau1 = t->tau1;
      policy.tau2 = t->tau2;
    }
    policy.Validate(registry.n_bits);
    return policy;
  }
};

json AttributionJson(const sta::AttributionResult& r, const sta::DetectionPolicy& p) {
  json j = {{"match", r.matched_user.has_value()},
            {"tau1", p.tau1},
            {"tau2", p.tau2}};
  if (r.matched_user) {
    j["user_id"] = *r.matched_user;
    j["domain"] = std::string(sta::DomainName(r.domain));
    j["distance"] = r.distance;
    j["inverted"] = r.inverted;
  } else {
    j["result"] = "no match";
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pairwise-order image watermarking: keys, embedding, attribution, attacks"};
  app.require_subcommand(1);

  // keygen
  auto* keygen = app.add_subcommand("keygen", "Create a registry of users");
  int users = 10, bits = 100, height = 64, width = 64, channels = 3;
  std::uint64_t seed = 0;
  std::vector<std::string> domain_names = {"pixel"};
  std::string out_path;
  keygen->add_option("--users", users, "Number of users")->check(CLI::PositiveNumber);
  keygen->add_option("--bits", bits, "Watermark length")->check(CLI::PositiveNumber);
  keygen->add_option("--seed", seed, "Registry seed");
  keygen->add_option("--height", height, "Image height")->check(CLI::PositiveNumber);
  keygen->add_option("--width", width, "Image width")->check(CLI::PositiveNumber);
  keygen->add_option("--channels", channels, "1 or 3")->check(CLI::IsMember({1, 3}));
  keygen->add_option("--domains", domain_names, "pixel, freq, mellin")->delimiter(',');
  keygen->add_option("-o,--output", out_path, "Registry JSON path")->required();

  // embed
  auto* embed = app.add_subcommand("embed", "Embed a user's watermark into a PNG");
  std::string registry_path, user_id, image_path, report_path, carrier = "identity";
  bool triple = false;
  int steps = 700;
  embed->add_option("--registry", registry_path)->required();
  embed->add_option("--user", user_id)->required();
  embed->add_option("-i,--input", image_path)->required();
  embed->add_option("-o,--output", out_path)->required();
  embed->add_option("--report", report_path, "Embedding report JSON path");
  embed->add_flag("--triple", triple, "Also embed in the freq and mellin domains");
  embed->add_option("--carrier", carrier)->check(CLI::IsMember({"identity", "smooth"}));
  embed->add_option("--steps", steps)->check(CLI::PositiveNumber);

  // extract
  auto* extract = app.add_subcommand("extract", "Print the watermark carried by a key");
  std::string domain_name = "pixel";
  extract->add_option("-i,--image", image_path)->required();
  extract->add_option("--registry", registry_path)->required();
  extract->add_option("--user", user_id)->required();
  extract->add_option("--domain", domain_name)->check(CLI::IsMember({"pixel", "freq", "mellin"}));

  // attribute / detect
  auto* attribute = app.add_subcommand("attribute", "Attribute an image to a registry user");
  auto* detect = app.add_subcommand("detect", "Decide whether an image carries any watermark");
  PolicyFlags policy_flags;
  for (auto* cmd : {attribute, detect}) {
    cmd->add_option("-i,--image", image_path)->required();
    cmd->add_option("--registry", registry_path)->required();
    policy_flags.Add(cmd);
  }

  // attack
  auto* attack = app.add_subcommand("attack", "Apply a removal attack to a PNG");
  std::string spec_text, kind_name;
  std::uint64_t attack_seed = 0;
  attack->add_option("-i,--input", image_path)->required();
  attack->add_option("-o,--output", out_path)->required();
  auto* spec_opt = attack->add_option("--spec", spec_text, "AttackSpec JSON");
  attack->add_option("--kind", kind_name, "Attack kind")->excludes(spec_opt);
  attack->add_option("--seed", attack_seed)->excludes(spec_opt);

  // certify
  auto* certify = app.add_subcommand("certify", "Pixel-domain robustness certificate");
  double budget = 0.0;
  certify->add_option("-i,--image", image_path)->required();
  certify->add_option("--registry", registry_path)->required();
  certify->add_option("--user", user_id)->required();
  certify->add_option("--budget", budget)->required()->check(CLI::NonNegativeNumber);

  // bench
  auto* bench = app.add_subcommand("bench", "Run the attack benchmark");
  std::string config_path;
  bench->add_option("-c,--config", config_path, "BenchConfig JSON")->required();
  bench->add_option("-o,--output", out_path, "Report stem (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*keygen) {
      sta::Registry registry;
      registry.n_bits = bits;
      registry.rng_seed = seed;
      sta::KeygenConfig cfg;
      cfg.n_bits = bits;
      cfg.image_shape = {height, width, channels};
      cfg.domains.clear();
      for (const auto& d : domain_names) cfg.domains.push_back(sta::ParseDomain(d));
      for (int u = 0; u < users; ++u) {
        registry = sta::RegisterUser(std::move(registry), "user" + std::to_string(u), cfg);
      }
      sta::PersistRegistry(registry, out_path);
    } else if (*embed) {
      const sta::Registry registry = sta::LoadRegistry(registry_path);
      const sta::ImageBuffer x0 = sta::ReadPng(image_path);
      sta::EmbedConfig cfg = triple ? sta::EmbedConfig::TripleDomain() : sta::EmbedConfig{};
      cfg.carrier.kind = carrier == "smooth" ? sta::CarrierKind::kSmooth
                                             : sta::CarrierKind::kIdentity;
      cfg.steps = steps;
      sta::EmbedReport report;
      const sta::ImageBuffer x = sta::Embed(x0, FindUser(registry, user_id), cfg, &report);
      sta::WritePng(out_path, x);
      json j = {{"success", report.success},
                {"iterations", report.iterations_run},
                {"final_wm_loss", report.final_wm_loss},
                {"psnr", report.psnr_vs_original},
                {"min_pixel_margin", report.min_pixel_margin}};
      for (const auto& [d, f] : report.satisfied_fraction) {
        j["satisfied_fraction"][std::string(sta::DomainName(d))] = f;
      }
      if (!report_path.empty()) {
        std::ofstream(report_path) << j.dump(2) << '\n';
      } else {
        std::cout << j.dump(2) << '\n';
      }
      if (!report.success) return 1;
    } else if (*extract) {
      const sta::Registry registry = sta::LoadRegistry(registry_path);
      const sta::BitString w = sta::ExtractWatermark(
          sta::ReadPng(image_path), FindUser(registry, user_id).secret,
          sta::ParseDomain(domain_name));
      std::cout << w.ToString() << '\n';
    } else if (*attribute || *detect) {
      const sta::Registry registry = sta::LoadRegistry(registry_path);
      const sta::ImageBuffer x = sta::ReadPng(image_path);
      const bool all = AllDomains(registry);
      const sta::DetectionPolicy policy = policy_flags.Resolve(registry, all ? 3 : 1);
      if (*detect) {
        std::cout << json{{"detected", sta::Detect(x, registry, policy)}}.dump() << '\n';
      } else {
        const sta::AttributionResult r = all ? sta::Attribute3(x, registry, policy)
                                             : sta::Attribute(x, registry, policy);
        std::cout << AttributionJson(r, policy).dump() << '\n';
      }
    } else if (*attack) {
      sta::AttackSpec spec;
      if (!spec_text.empty()) {
        spec = sta::AttackSpecFromJson(spec_text);
      } else if (!kind_name.empty()) {
        spec.kind = sta::ParseAttackKind(kind_name);
        spec.seed = attack_seed;
      } else {
        throw CLI::ValidationError("attack needs --spec or --kind");
      }
      const sta::AttackSpec resolved = sta::ResolveParams(spec);
      sta::WritePng(out_path, sta::ApplyAttack(sta::ReadPng(image_path), resolved));
      std::cout << sta::AttackSpecToJson(resolved) << '\n';
    } else if (*certify) {
      const sta::Registry registry = sta::LoadRegistry(registry_path);
      const sta::UserRecord& user = FindUser(registry, user_id);
      const auto profile =
          sta::ComputeDeltaProfile(sta::ReadPng(image_path), user.secret.pixel_pairs);
      const sta::Certificate c = sta::Certify(profile, budget);
      std::cout << json{{"budget", c.budget},
                        {"max_flips_exclusive", c.max_flips_exclusive},
                        {"delta_min", c.delta_min},
                        {"delta_median", c.delta_median}}
                       .dump()
                << '\n';
    } else if (*bench) {
      sta::BenchConfig cfg = sta::BenchConfigFromJson(ReadFile(config_path));
      if (!out_path.empty()) cfg.output_path = out_path;
      const sta::BenchReport report = sta::RunBenchmark(cfg);
      std::cout << sta::ReportToCsv(report);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
