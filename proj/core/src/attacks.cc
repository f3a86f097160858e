#include "sta/attacks.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "sta/embedding.h"
#include "sta/rng.h"
#include "sta/transforms.h"

namespace sta {
namespace {

constexpr std::array<std::pair<AttackKind, std::string_view>, 13> kKindNames = {{
    {AttackKind::kNone, "none"},
    {AttackKind::kBrightness, "brightness"},
    {AttackKind::kContrastPos, "contrast_pos"},
    {AttackKind::kContrastNeg, "contrast_neg"},
    {AttackKind::kGamma, "gamma"},
    {AttackKind::kSharpness, "sharpness"},
    {AttackKind::kHue, "hue"},
    {AttackKind::kSaturation, "saturation"},
    {AttackKind::kNoise, "noise"},
    {AttackKind::kJpeg, "jpeg"},
    {AttackKind::kRotation, "rotation"},
    {AttackKind::kTranslation, "translation"},
    {AttackKind::kPgd, "pgd"},
}};

std::set<std::string> AllowedParams(AttackKind kind) {
  switch (kind) {
    case AttackKind::kNone:
      return {};
    case AttackKind::kBrightness:
      return {"b"};
    case AttackKind::kContrastPos:
    case AttackKind::kContrastNeg:
      return {"c"};
    case AttackKind::kGamma:
      return {"g"};
    case AttackKind::kSharpness:
      return {"a"};
    case AttackKind::kHue:
      return {"h"};
    case AttackKind::kSaturation:
      return {"s"};
    case AttackKind::kNoise:
      return {"delta"};
    case AttackKind::kJpeg:
      return {"quality"};
    case AttackKind::kRotation:
      return {"degrees"};
    case AttackKind::kTranslation:
      return {"dx", "dy"};
    case AttackKind::kPgd:
      return {"budget", "iters", "lr"};
  }
  return {};
}

Field2D Channel(const ImageBuffer& image, int ch) {
  Field2D field(image.height(), image.width());
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) field.at(r, c) = image.at(r, c, ch);
  }
  return field;
}

void SetChannel(ImageBuffer& image, int ch, const Field2D& field) {
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) image.at(r, c, ch) = field.at(r, c);
  }
}

template <typename F>
ImageBuffer MapPixels(const ImageBuffer& image, F f) {
  ImageBuffer out = image;
  for (double& v : out.pixels()) v = f(v);
  return out;
}

// blur + a (x - blur); border pixels keep their value, result clamped.
ImageBuffer Sharpen(const ImageBuffer& image, double a) {
  ImageBuffer out = image;
  const int h = image.height();
  const int w = image.width();
  for (int r = 1; r + 1 < h; ++r) {
    for (int c = 1; c + 1 < w; ++c) {
      for (int ch = 0; ch < image.channels(); ++ch) {
        double sum = 0.0;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) sum += image.at(r + dr, c + dc, ch);
        }
        const double x = image.at(r, c, ch);
        const double blur = (sum + 4.0 * x) / 13.0;
        out.at(r, c, ch) = blur + a * (x - blur);
      }
    }
  }
  return Clamped(std::move(out));
}

template <typename F>
ImageBuffer MapHsv(const ImageBuffer& image, F f) {
  if (image.channels() != 3) return image;
  ImageBuffer out = Clamped(image);
  for (int r = 0; r < out.height(); ++r) {
    for (int c = 0; c < out.width(); ++c) {
      double h, s, v;
      RgbToHsv(out.at(r, c, 0), out.at(r, c, 1), out.at(r, c, 2), &h, &s, &v);
      f(h, s, v);
      HsvToRgb(h, s, v, &out.at(r, c, 0), &out.at(r, c, 1), &out.at(r, c, 2));
    }
  }
  return out;
}

ImageBuffer Translate(const ImageBuffer& image, int dy, int dx) {
  ImageBuffer out = image;
  const int h = image.height();
  const int w = image.width();
  for (int r = 0; r < h; ++r) {
    const int sr = std::clamp(r - dy, 0, h - 1);
    for (int c = 0; c < w; ++c) {
      const int sc = std::clamp(c - dx, 0, w - 1);
      for (int ch = 0; ch < image.channels(); ++ch) {
        out.at(r, c, ch) = image.at(sr, sc, ch);
      }
    }
  }
  return out;
}

}  // namespace

std::string_view AttackKindName(AttackKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

AttackKind ParseAttackKind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw std::invalid_argument("unknown attack kind '" + std::string(name) + "'");
}

std::string AttackSpecToJson(const AttackSpec& spec) {
  nlohmann::json j;
  j["kind"] = AttackKindName(spec.kind);
  j["params"] = nlohmann::json::object();
  for (const auto& [k, v] : spec.params) j["params"][k] = v;
  j["seed"] = spec.seed;
  return j.dump();
}

AttackSpec AttackSpecFromJson(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("attack spec: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw std::invalid_argument("attack spec needs a string 'kind'");
  }
  AttackSpec spec;
  spec.kind = ParseAttackKind(j["kind"].get<std::string>());
  if (j.contains("params")) {
    if (!j["params"].is_object()) {
      throw std::invalid_argument("attack spec 'params' must be an object");
    }
    for (const auto& [k, v] : j["params"].items()) {
      if (!v.is_number()) {
        throw std::invalid_argument("attack param '" + k + "' must be a number");
      }
      spec.params[k] = v.get<double>();
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) {
      throw std::invalid_argument("attack spec 'seed' must be a non-negative integer");
    }
    spec.seed = j["seed"].get<std::uint64_t>();
  }
  ResolveParams(spec);
  return spec;
}

AttackSpec ResolveParams(const AttackSpec& spec) {
  const auto allowed = AllowedParams(spec.kind);
  for (const auto& [k, v] : spec.params) {
    if (!allowed.count(k)) {
      throw std::invalid_argument("attack '" + std::string(AttackKindName(spec.kind)) +
                                  "' has no parameter '" + k + "'");
    }
    if (!std::isfinite(v)) {
      throw std::invalid_argument("attack parameter '" + k + "' is not finite");
    }
  }
  AttackSpec out = spec;
  Rng rng(spec.seed);
  auto fill = [&](const std::string& key, auto draw) {
    // Draw unconditionally so each parameter's value does not depend on which
    // other parameters were given.
    const double value = draw();
    out.params.try_emplace(key, value);
  };
  auto uniform = [&](double lo, double hi) { return [&rng, lo, hi] { return rng.Uniform(lo, hi); }; };
  auto constant = [](double v) { return [v] { return v; }; };
  auto shift = [&rng] { return static_cast<double>(rng.UniformInt(21)) - 10.0; };
  switch (spec.kind) {
    case AttackKind::kNone:
      break;
    case AttackKind::kBrightness:
      fill("b", uniform(-20.0 / 255, 20.0 / 255));
      break;
    case AttackKind::kContrastPos:
      fill("c", uniform(0.5, 2.0));
      break;
    case AttackKind::kContrastNeg:
      fill("c", uniform(-2.0, -0.5));
      break;
    case AttackKind::kGamma:
      fill("g", uniform(0.5, 2.0));
      break;
    case AttackKind::kSharpness:
      fill("a", constant(2.0));
      break;
    case AttackKind::kHue:
      fill("h", constant(0.2));
      break;
    case AttackKind::kSaturation:
      fill("s", constant(2.0));
      break;
    case AttackKind::kNoise:
      fill("delta", constant(25.0 / 255));
      break;
    case AttackKind::kJpeg:
      fill("quality", constant(50.0));
      break;
    case AttackKind::kRotation:
      fill("degrees", uniform(-10.0, 10.0));
      break;
    case AttackKind::kTranslation:
      fill("dx", shift);
      fill("dy", shift);
      break;
    case AttackKind::kPgd:
      fill("budget", constant(0.1));
      fill("iters", constant(10.0));
      fill("lr", constant(0.1));
      break;
  }
  if (spec.kind == AttackKind::kJpeg) {
    const double q = out.params["quality"];
    if (q < 1 || q > 100) throw std::invalid_argument("jpeg quality must be in [1,100]");
  }
  if (spec.kind == AttackKind::kGamma && !(out.params["g"] > 0)) {
    throw std::invalid_argument("gamma exponent must be positive");
  }
  return out;
}

ImageBuffer Renormalize(const ImageBuffer& image) {
  ImageBuffer out = image;
  for (int ch = 0; ch < image.channels(); ++ch) {
    double lo = INFINITY;
    double hi = -INFINITY;
    for (std::size_t i = ch; i < image.size(); i += image.channels()) {
      lo = std::min(lo, image[i]);
      hi = std::max(hi, image[i]);
    }
    if (!(hi > lo)) continue;
    for (std::size_t i = ch; i < image.size(); i += image.channels()) {
      out[i] = (image[i] - lo) / (hi - lo);
    }
  }
  return out;
}

ImageBuffer ApplyAttack(const ImageBuffer& image, const AttackSpec& spec) {
  const AttackSpec s = ResolveParams(spec);
  auto p = [&](const char* key) { return s.params.at(key); };
  ImageBuffer out;
  switch (s.kind) {
    case AttackKind::kNone:
      return image;
    case AttackKind::kBrightness: {
      const double b = p("b");
      out = MapPixels(image, [b](double v) { return v + b; });
      break;
    }
    case AttackKind::kContrastPos:
    case AttackKind::kContrastNeg: {
      const double c = p("c");
      out = MapPixels(image, [c](double v) { return c * v; });
      break;
    }
    case AttackKind::kGamma: {
      const double g = p("g");
      out = MapPixels(image, [g](double v) { return std::pow(std::clamp(v, 0.0, 1.0), g); });
      break;
    }
    case AttackKind::kSharpness:
      out = Sharpen(image, p("a"));
      break;
    case AttackKind::kHue: {
      const double shift = p("h");
      out = MapHsv(image, [shift](double& h, double&, double&) {
        constexpr double kTwoPi = 2 * std::numbers::pi;
        h = std::fmod(h + shift, kTwoPi);
        if (h < 0) h += kTwoPi;
      });
      break;
    }
    case AttackKind::kSaturation: {
      const double factor = p("s");
      out = MapHsv(image, [factor](double&, double& sat, double&) {
        sat = std::clamp(sat * factor, 0.0, 1.0);
      });
      break;
    }
    case AttackKind::kNoise: {
      const double delta = p("delta");
      Rng rng(DeriveSeed(s.seed, 1));
      out = MapPixels(image, [&](double v) { return v + rng.Uniform(-delta, delta); });
      break;
    }
    case AttackKind::kJpeg:
      out = JpegRoundTrip(image, static_cast<int>(std::lround(p("quality"))));
      break;
    case AttackKind::kRotation:
      out = image;
      for (int ch = 0; ch < image.channels(); ++ch) {
        SetChannel(out, ch, Rotate(Channel(image, ch), p("degrees")));
      }
      break;
    case AttackKind::kTranslation:
      out = Translate(image, static_cast<int>(std::lround(p("dy"))),
                      static_cast<int>(std::lround(p("dx"))));
      break;
    case AttackKind::kPgd:
      throw std::invalid_argument("pgd needs a secret; use PgdAttack");
  }
  return Renormalize(out);
}

void RgbToHsv(double r, double g, double b, double* h, double* s, double* v) {
  const double hi = std::max({r, g, b});
  const double lo = std::min({r, g, b});
  const double delta = hi - lo;
  *v = hi;
  *s = hi > 0 ? delta / hi : 0.0;
  double hue = 0.0;
  if (delta > 0) {
    if (hi == r) {
      hue = std::fmod((g - b) / delta, 6.0);
    } else if (hi == g) {
      hue = (b - r) / delta + 2.0;
    } else {
      hue = (r - g) / delta + 4.0;
    }
  }
  hue *= std::numbers::pi / 3.0;
  if (hue < 0) hue += 2 * std::numbers::pi;
  *h = hue;
}

void HsvToRgb(double h, double s, double v, double* r, double* g, double* b) {
  const double hp = h / (std::numbers::pi / 3.0);
  const int sector = static_cast<int>(std::floor(hp)) % 6;
  const double f = hp - std::floor(hp);
  const double p = v * (1 - s);
  const double q = v * (1 - s * f);
  const double t = v * (1 - s * (1 - f));
  switch ((sector + 6) % 6) {
    case 0: *r = v; *g = t; *b = p; break;
    case 1: *r = q; *g = v; *b = p; break;
    case 2: *r = p; *g = v; *b = t; break;
    case 3: *r = p; *g = q; *b = v; break;
    case 4: *r = t; *g = p; *b = v; break;
    default: *r = v; *g = p; *b = q; break;
  }
}

ImageBuffer PgdAttack(const ImageBuffer& image, const PairList& pairs,
                      const BitString& target, const PgdConfig& config) {
  if (target.size() != pairs.size()) {
    throw std::invalid_argument("pgd: target length does not match pairs");
  }
  if (config.budget < 0) throw std::invalid_argument("pgd: negative budget");
  ImageBuffer x = image;
  if (config.budget == 0 || config.iters <= 0) return x;
  const std::size_t d = x.size();
  std::vector<double> m(d, 0.0), v(d, 0.0);
  double b1 = 1.0, b2 = 1.0;
  std::vector<double> diffs(pairs.size());
  for (int t = 0; t < config.iters; ++t) {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      diffs[i] = x[pairs[i].a] - x[pairs[i].b];
    }
    const HingeResult hinge = WmHingeLoss(diffs, target, config.margin);
    std::vector<double> grad(d, 0.0);
    if (config.lambda_qual > 0) {
      grad = QualityLoss(x, image, QualityKind::kL2).grad;
      for (double& g : grad) g *= config.lambda_qual;
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      grad[pairs[i].a] += config.lambda_wm * hinge.grad[i];
      grad[pairs[i].b] -= config.lambda_wm * hinge.grad[i];
    }
    b1 *= 0.9;
    b2 *= 0.999;
    for (std::size_t i = 0; i < d; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * grad[i];
      v[i] = 0.999 * v[i] + 0.001 * grad[i] * grad[i];
      const double step = config.lr * (m[i] / (1 - b1)) / (std::sqrt(v[i] / (1 - b2)) + 1e-8);
      const double lo = std::max(0.0, image[i] - config.budget);
      const double hi = std::max(lo, std::min(1.0, image[i] + config.budget));
      x[i] = std::clamp(x[i] - step, lo, hi);
    }
  }
  return x;
}

}  // namespace sta
