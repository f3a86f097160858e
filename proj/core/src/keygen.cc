#include "sta/keygen.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace sta {
namespace {

using nlohmann::json;

constexpr int kRegistryVersion = 1;

PairList SamplePairs(const std::vector<std::size_t>& candidates, int n,
                     Rng& rng) {
  std::vector<std::size_t> pool = candidates;
  const std::size_t needed = 2 * static_cast<std::size_t>(n);
  // Partial Fisher-Yates: the first `needed` slots become a uniform sample
  // without replacement.
  for (std::size_t i = 0; i < needed; ++i) {
    const std::size_t j = i + rng.UniformInt(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  PairList pairs(n);
  for (int i = 0; i < n; ++i) {
    pairs[i] = {pool[2 * i], pool[2 * i + 1]};
  }
  return pairs;
}

json PairsToJson(const PairList& pairs) {
  json out = json::array();
  for (const auto& p : pairs) out.push_back({p.a, p.b});
  return out;
}

[[noreturn]] void SchemaError(const std::string& path, const std::string& msg) {
  throw ParseError("registry " + path + ": " + msg, 0);
}

const json& Member(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) SchemaError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) SchemaError(path, std::string("missing '") + key + "'");
  return *it;
}

std::uint64_t AsUnsigned(const json& value, const std::string& path) {
  if (!value.is_number_unsigned()) {
    SchemaError(path, "expected a non-negative integer");
  }
  return value.get<std::uint64_t>();
}

PairList PairsFromJson(const json& value, const std::string& path) {
  if (!value.is_array()) SchemaError(path, "expected an array of pairs");
  PairList pairs;
  pairs.reserve(value.size());
  for (std::size_t i = 0; i < value.size(); ++i) {
    const std::string item_path = path + "/" + std::to_string(i);
    const json& item = value[i];
    if (!item.is_array() || item.size() != 2) {
      SchemaError(item_path, "expected [a, b]");
    }
    pairs.push_back({AsUnsigned(item[0], item_path + "/0"),
                     AsUnsigned(item[1], item_path + "/1")});
  }
  return pairs;
}

}  // namespace

std::vector<std::size_t> CandidateIndices(Domain domain,
                                          const ImageShape& shape) {
  const GridDims grid = DomainGrid(domain, shape);
  std::vector<std::size_t> out;
  out.reserve(grid.size());
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    if (domain != Domain::kPixel) {
      if (idx == 0) continue;
      if (ConjugatePartner(idx, grid) < idx) continue;
    }
    out.push_back(idx);
  }
  return out;
}

BitString SampleWatermark(const KeygenConfig& config, Rng& rng) {
  if (config.n_bits < 1) throw std::invalid_argument("n_bits must be >= 1");
  std::vector<std::uint8_t> bits(config.n_bits);
  for (auto& b : bits) b = rng.FairBit() ? 1 : 0;
  return BitString(std::move(bits));
}

SecretKey SampleSecret(const KeygenConfig& config, Rng& rng) {
  if (config.n_bits < 1) throw std::invalid_argument("n_bits must be >= 1");
  const ImageShape& shape = config.image_shape;
  if (shape.height < 1 || shape.width < 1 ||
      (shape.channels != 1 && shape.channels != 3)) {
    throw std::invalid_argument("invalid image shape for secret");
  }
  SecretKey secret;
  secret.image_shape = shape;

  std::vector<Domain> domains = {Domain::kPixel};
  for (Domain d : config.domains) {
    if (std::find(domains.begin(), domains.end(), d) == domains.end()) {
      domains.push_back(d);
    }
  }
  // Fixed sampling order keeps secrets independent of how domains were listed.
  std::sort(domains.begin(), domains.end());

  for (Domain domain : domains) {
    const auto candidates = CandidateIndices(domain, shape);
    if (candidates.size() < 2 * static_cast<std::size_t>(config.n_bits)) {
      throw std::invalid_argument(
          std::string(DomainName(domain)) + " grid has " +
          std::to_string(candidates.size()) + " usable indices, need " +
          std::to_string(2 * config.n_bits));
    }
    PairList pairs = SamplePairs(candidates, config.n_bits, rng);
    switch (domain) {
      case Domain::kPixel:
        secret.pixel_pairs = std::move(pairs);
        break;
      case Domain::kFreq:
        secret.freq_pairs = std::move(pairs);
        break;
      case Domain::kMellin:
        secret.mellin_pairs = std::move(pairs);
        break;
    }
  }
  return secret;
}

Registry RegisterUser(Registry registry, std::string user_id,
                      const KeygenConfig& config) {
  if (registry.Find(user_id) != nullptr) {
    throw std::invalid_argument("user '" + user_id + "' already registered");
  }
  if (config.n_bits != registry.n_bits) {
    throw std::invalid_argument("config n_bits differs from registry n_bits");
  }
  Rng rng(DeriveSeed(registry.rng_seed, registry.users.size()));
  UserRecord user;
  user.user_id = std::move(user_id);
  user.watermark = SampleWatermark(config, rng);
  user.secret = SampleSecret(config, rng);
  registry.users.push_back(std::move(user));
  return registry;
}

std::string RegistryToJson(const Registry& registry) {
  json users = json::array();
  for (const auto& user : registry.users) {
    const SecretKey& s = user.secret;
    json secret = {
        {"image_shape",
         {s.image_shape.height, s.image_shape.width, s.image_shape.channels}},
        {"pixel_pairs", PairsToJson(s.pixel_pairs)}};
    if (s.freq_pairs) secret["freq_pairs"] = PairsToJson(*s.freq_pairs);
    if (s.mellin_pairs) secret["mellin_pairs"] = PairsToJson(*s.mellin_pairs);
    users.push_back({{"user_id", user.user_id},
                     {"watermark", user.watermark.ToString()},
                     {"secret", std::move(secret)}});
  }
  json doc = {{"version", kRegistryVersion},
              {"n_bits", registry.n_bits},
              {"seed", registry.rng_seed},
              {"users", std::move(users)}};
  return doc.dump(1);
}

Registry RegistryFromJson(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("registry parse error: ") + e.what(), e.byte);
  }
  const json& version = Member(doc, "version", "");
  if (!version.is_number_integer() || version.get<int>() != kRegistryVersion) {
    SchemaError("/version", "unsupported version");
  }
  Registry registry;
  registry.n_bits = static_cast<int>(AsUnsigned(Member(doc, "n_bits", ""), "/n_bits"));
  registry.rng_seed = AsUnsigned(Member(doc, "seed", ""), "/seed");
  const json& users = Member(doc, "users", "");
  if (!users.is_array()) SchemaError("/users", "expected an array");
  for (std::size_t i = 0; i < users.size(); ++i) {
    const std::string path = "/users/" + std::to_string(i);
    const json& u = users[i];
    UserRecord user;
    const json& id = Member(u, "user_id", path);
    if (!id.is_string()) SchemaError(path + "/user_id", "expected a string");
    user.user_id = id.get<std::string>();
    const json& wm = Member(u, "watermark", path);
    if (!wm.is_string()) SchemaError(path + "/watermark", "expected a string");
    try {
      user.watermark = BitString::FromString(wm.get<std::string>());
    } catch (const std::invalid_argument& e) {
      SchemaError(path + "/watermark", e.what());
    }
    const std::string spath = path + "/secret";
    const json& s = Member(u, "secret", path);
    const json& shape = Member(s, "image_shape", spath);
    if (!shape.is_array() || shape.size() != 3) {
      SchemaError(spath + "/image_shape", "expected [H, W, C]");
    }
    user.secret.image_shape = {
        static_cast<int>(AsUnsigned(shape[0], spath + "/image_shape/0")),
        static_cast<int>(AsUnsigned(shape[1], spath + "/image_shape/1")),
        static_cast<int>(AsUnsigned(shape[2], spath + "/image_shape/2"))};
    user.secret.pixel_pairs =
        PairsFromJson(Member(s, "pixel_pairs", spath), spath + "/pixel_pairs");
    if (s.contains("freq_pairs")) {
      user.secret.freq_pairs = PairsFromJson(s["freq_pairs"], spath + "/freq_pairs");
    }
    if (s.contains("mellin_pairs")) {
      user.secret.mellin_pairs =
          PairsFromJson(s["mellin_pairs"], spath + "/mellin_pairs");
    }
    registry.users.push_back(std::move(user));
  }
  try {
    ValidateRegistry(registry);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("registry invalid: ") + e.what(), 0);
  }
  return registry;
}

void PersistRegistry(const Registry& registry,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << RegistryToJson(registry) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Registry LoadRegistry(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return RegistryFromJson(buffer.str());
}

}  // namespace sta
