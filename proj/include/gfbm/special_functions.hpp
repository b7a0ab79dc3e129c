#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "gfbm/errors.hpp"
#include "gfbm/parameters.hpp"
#include "gfbm/quadrature.hpp"

namespace gfbm {

/// Arguments closer than this to a nonpositive integer are treated as poles.
inline constexpr double kPoleTolerance = 1e-12;

inline bool near_nonpositive_integer(double x) {
  if (x > kPoleTolerance) return false;
  return std::abs(x - std::round(x)) <= kPoleTolerance;
}

struct LogGamma {
  double value;  // log |Gamma(x)|
  int sign;      // sign of Gamma(x)
};

/// log|Gamma(x)| and its sign; x < 1/2 goes through
/// Gamma(x) Gamma(1 - x) = pi / sin(pi x).
inline LogGamma log_gamma(double x) {
  if (std::isnan(x)) throw OutOfDomain("x", "NaN argument");
  if (near_nonpositive_integer(x)) {
    throw PoleError("Gamma has a pole at x = " + std::to_string(x));
  }
  if (x >= 0.5) return {std::lgamma(x), 1};
  // sin(pi x) with the argument reduced first so large |x| keeps its digits.
  const double r = x - 2.0 * std::floor(0.5 * x);
  const double s = std::sin(std::numbers::pi * r);
  return {std::log(std::numbers::pi) - std::log(std::abs(s)) - std::lgamma(1.0 - x),
          s > 0.0 ? 1 : -1};
}

inline double gamma_fn(double x) {
  const LogGamma lg = log_gamma(x);
  return lg.sign * std::exp(lg.value);
}

inline double beta(double a, double b) {
  if (!(a > 0.0)) throw OutOfDomain("a", "Beta requires a > 0");
  if (!(b > 0.0)) throw OutOfDomain("b", "Beta requires b > 0");
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

enum class KappaRoute { ClosedForm, Quadrature };

inline std::string_view to_string(KappaRoute r) {
  return r == KappaRoute::ClosedForm ? "closed" : "quad";
}

struct KappaResult {
  double value = 0.0;
  KappaRoute route = KappaRoute::ClosedForm;
  double abs_error_estimate = 0.0;
};

/// Unnormalized Var X(1) from the Beta/Gamma closed form.
///
/// Throws PoleError when -2a, -a or -1 - 2a + g sits on a pole, which covers
/// a = 0 and the whole H = 1/2 line a = g/2.
inline KappaResult kappa_closed_form(const ModelParams& p) {
  const double a = p.alpha();
  const double g = p.gamma();
  for (const double arg : {-2.0 * a, -a, -1.0 - 2.0 * a + g}) {
    if (near_nonpositive_integer(arg)) {
      throw PoleError("closed-form kappa has a Gamma pole at argument " + std::to_string(arg) +
                      " (alpha = " + std::to_string(a) + ", gamma = " + std::to_string(g) + ")");
    }
  }
  const double bracket = gamma_fn(1.0 - g) / gamma_fn(-2.0 * a) -
                         2.0 * gamma_fn(1.0 + a - g) / gamma_fn(-a);
  const double value = beta(1.0 - g, 2.0 * a + 1.0) + bracket * gamma_fn(-1.0 - 2.0 * a + g);
  return {value, KappaRoute::ClosedForm,
          64.0 * std::numeric_limits<double>::epsilon() * std::abs(value)};
}

/// The same constant as two integrals:
///   int_0^1 (1-v)^{2a} v^{-g} dv + int_0^inf ((1+v)^a - v^a)^2 v^{-g} dv.
inline KappaResult kappa_quadrature(const ModelParams& p, const QuadratureSpec& spec = {}) {
  const double a = p.alpha();
  const double g = p.gamma();
  auto near_part = [&](double v, double vc) { return std::pow(vc, 2.0 * a) * std::pow(v, -g); };
  IntegralResult res = integrate_01_singular(near_part, -g, 2.0 * a, spec);
  if (a != 0.0) {
    auto far_part = [&](double v) {
      const double d = pow_diff(v, 1.0, a);
      return d * d * std::pow(v, -g);
    };
    res += integrate_semi_infinite(far_part, 2.0 * a - 2.0 - g, spec,
                                   std::min(0.0, 2.0 * a) - g);
  }
  return {res.value, KappaRoute::Quadrature, res.abs_error_estimate};
}

/// Closed form when available, quadrature on poles.
inline KappaResult kappa(const ModelParams& p, const QuadratureSpec& spec = {}) {
  try {
    return kappa_closed_form(p);
  } catch (const PoleError&) {
    return kappa_quadrature(p, spec);
  }
}

/// c = kappa^{-1/2} (full range) or Beta(1 - g, 2a + 1)^{-1/2} (Riemann-Liouville),
/// so that Var X(t) = t^{2H}.
inline double normalization_c(const ModelParams& p, const QuadratureSpec& spec = {}) {
  if (p.variant() == Variant::RiemannLiouville) {
    return 1.0 / std::sqrt(beta(1.0 - p.gamma(), 2.0 * p.alpha() + 1.0));
  }
  return 1.0 / std::sqrt(kappa(p, spec).value);
}

}  // namespace gfbm
