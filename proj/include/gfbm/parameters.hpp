#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "gfbm/errors.hpp"

namespace gfbm {

enum class Variant { FullRange, RiemannLiouville };

inline std::string_view to_string(Variant v) {
  return v == Variant::FullRange ? "full" : "rl";
}

inline Variant parse_variant(std::string_view s) {
  if (s == "full") return Variant::FullRange;
  if (s == "rl") return Variant::RiemannLiouville;
  throw OutOfDomain("variant", "expected \"full\" or \"rl\", got \"" + std::string(s) + "\"");
}

/// Validated (alpha, gamma) pair. The Hurst exponent is derived, never stored.
///
/// Valid iff gamma in [0, 1) and alpha in (-1/2 + gamma/2, 1/2 + gamma/2);
/// both intervals are checked exactly, endpoints excluded.
class ModelParams {
 public:
  static ModelParams validate(double alpha, double gamma, Variant variant = Variant::FullRange) {
    if (!std::isfinite(gamma) || !(gamma >= 0.0 && gamma < 1.0)) {
      throw OutOfDomain("gamma", describe("gamma", gamma, "[0, 1)"));
    }
    const double lo = -0.5 + 0.5 * gamma;
    const double hi = 0.5 + 0.5 * gamma;
    if (!std::isfinite(alpha) || !(alpha > lo && alpha < hi)) {
      std::ostringstream range;
      range.precision(17);
      range << "(" << lo << ", " << hi << ")";
      throw OutOfDomain("alpha", describe("alpha", alpha, range.str()));
    }
    return ModelParams(alpha, gamma, variant);
  }

  static ModelParams from_hurst(double hurst, double gamma, Variant variant = Variant::FullRange) {
    if (!std::isfinite(hurst) || !(hurst > 0.0 && hurst < 1.0)) {
      throw OutOfDomain("hurst", describe("hurst", hurst, "(0, 1)"));
    }
    if (!std::isfinite(gamma) || !(gamma >= 0.0 && gamma < 1.0)) {
      throw OutOfDomain("gamma", describe("gamma", gamma, "[0, 1)"));
    }
    return validate(hurst - 0.5 + 0.5 * gamma, gamma, variant);
  }

  double alpha() const noexcept { return alpha_; }
  double gamma() const noexcept { return gamma_; }
  Variant variant() const noexcept { return variant_; }
  double hurst() const noexcept { return alpha_ - 0.5 * gamma_ + 0.5; }

  ModelParams with_variant(Variant v) const { return ModelParams(alpha_, gamma_, v); }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  ModelParams(double alpha, double gamma, Variant variant)
      : alpha_(alpha), gamma_(gamma), variant_(variant) {}

  static std::string describe(const char* name, double v, const std::string& range) {
    std::ostringstream os;
    os.precision(17);
    os << name << " = " << v << " not in " << range;
    return os.str();
  }

  double alpha_;
  double gamma_;
  Variant variant_;
};

enum class Regime { NonDifferentiable, Differentiable, Invalid };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::NonDifferentiable: return "non-differentiable";
    case Regime::Differentiable: return "differentiable";
    case Regime::Invalid: return "invalid";
  }
  return "invalid";
}

struct RegionLabel {
  Regime regime = Regime::Invalid;
  bool is_fbm = false;
  bool is_bm = false;
  bool h_half_non_bm = false;
};

/// Location of the parameters in the (alpha, gamma) plane.
///
/// Paths are C^1 exactly on 1/2 < alpha < 1/2 + gamma/2 with gamma > 0; that
/// set is empty for gamma = 0, so FBM is never differentiable.
inline RegionLabel classify(const ModelParams& p) {
  RegionLabel label;
  const double a = p.alpha();
  const double g = p.gamma();
  label.regime = (g > 0.0 && a > 0.5 && a < 0.5 + 0.5 * g) ? Regime::Differentiable
                                                           : Regime::NonDifferentiable;
  label.is_fbm = g == 0.0;
  label.is_bm = g == 0.0 && a == 0.0;
  label.h_half_non_bm = g > 0.0 && a == 0.5 * g;
  return label;
}

/// Overload for unvalidated input: returns Invalid instead of throwing.
inline RegionLabel classify(double alpha, double gamma) {
  try {
    return classify(ModelParams::validate(alpha, gamma));
  } catch (const OutOfDomain&) {
    return RegionLabel{};
  }
}

// JSON manifest: {"alpha", "gamma", "variant"}; H and c are output-only.
inline void to_json(nlohmann::json& j, const ModelParams& p) {
  j = nlohmann::json{{"alpha", p.alpha()},
                     {"gamma", p.gamma()},
                     {"variant", std::string(to_string(p.variant()))},
                     {"H", p.hurst()}};
}

inline ModelParams params_from_json(const nlohmann::json& j) {
  const Variant v = j.contains("variant") ? parse_variant(j.at("variant").get<std::string>())
                                          : Variant::FullRange;
  return ModelParams::validate(j.at("alpha").get<double>(), j.at("gamma").get<double>(), v);
}

}  // namespace gfbm
