#pragma once

// Covariance Psi(s,t) and increment second moment Phi(s,t) of the generalized
// fractional Brownian motion
//
//   X(t) = c * int_R ((t-u)_+^a - (-u)_+^a) |u|^{-g/2} B(du),
//
// and of its one-sided (Riemann-Liouville) variant
//
//   X(t) = c * int_0^t (t-u)^a u^{-g/2} B(du).

#include <algorithm>
#include <cmath>
#include <utility>

#include "gfbm/errors.hpp"
#include "gfbm/parameters.hpp"
#include "gfbm/quadrature.hpp"
#include "gfbm/special_functions.hpp"

namespace gfbm {

struct KernelContext {
  ModelParams params;
  double c;
  QuadratureSpec spec;

  double c2() const { return c * c; }
  double alpha() const { return params.alpha(); }
  double gamma() const { return params.gamma(); }
  double hurst() const { return params.hurst(); }
};

inline KernelContext make_context(const ModelParams& params, const QuadratureSpec& spec = {}) {
  return KernelContext{params, normalization_c(params, spec), spec};
}

struct PhiDecomposition {
  double c1_sq = 0.0;  // int_0^s ((t-u)^a - (s-u)^a)^2 u^{-g} du
  double c2_sq = 0.0;  // int_s^t (t-u)^{2a} u^{-g} du
  double c3_sq = 0.0;  // int_0^inf ((t+u)^a - (s+u)^a)^2 u^{-g} du
  double abs_error_estimate = 0.0;

  double total() const { return c1_sq + c2_sq + c3_sq; }
};

namespace detail {

inline void check_times(double s, double t) {
  if (!(s >= 0.0) || !(t >= 0.0) || !std::isfinite(s) || !std::isfinite(t)) {
    throw OutOfDomain("time", "kernel arguments must be finite and nonnegative");
  }
}

// int_0^s (t-u)^a (s-u)^a u^{-g} du, s <= t.
inline IntegralResult one_sided_cross(const KernelContext& ctx, double s, double t) {
  const double a = ctx.alpha();
  const double g = ctx.gamma();
  const double gap = t - s;
  auto f = [&](double, double dl, double dr) {
    return std::pow(gap + dr, a) * std::pow(dr, a) * std::pow(dl, -g);
  };
  return integrate_interval(f, 0.0, s, -g, gap == 0.0 ? 2.0 * a : a, ctx.spec);
}

// int_0^inf ((t+u)^a - u^a)((s+u)^a - u^a) u^{-g} du, s <= t.
inline IntegralResult negative_axis_cross(const KernelContext& ctx, double s, double t) {
  const double a = ctx.alpha();
  if (a == 0.0) return {};
  const double g = ctx.gamma();
  auto f = [&](double u) { return pow_diff(u, t, a) * pow_diff(u, s, a) * std::pow(u, -g); };
  return integrate_positive_axis(f, {s, t}, 2.0 * std::min(a, 0.0) - g, 2.0 * a - 2.0 - g,
                                 ctx.spec);
}

// Three second moments of the increment; c = 1. Requires s <= t.
inline PhiDecomposition increment_parts(const KernelContext& ctx, double s, double t,
                                        bool include_negative_axis) {
  const double a = ctx.alpha();
  const double g = ctx.gamma();
  const double gap = t - s;
  PhiDecomposition out;
  if (gap == 0.0) return out;

  auto on_gap = [&](double, double dl, double dr) {
    return std::pow(dr, 2.0 * a) * std::pow(s + dl, -g);
  };
  const IntegralResult c2 = integrate_interval(on_gap, s, t, s == 0.0 ? -g : 0.0, 2.0 * a, ctx.spec);
  out.c2_sq = c2.value;
  out.abs_error_estimate += c2.abs_error_estimate;

  if (s > 0.0) {
    auto before = [&](double, double dl, double dr) {
      const double d = pow_diff(dr, gap, a);
      return d * d * std::pow(dl, -g);
    };
    const IntegralResult c1 =
        integrate_interval(before, 0.0, s, -g, 2.0 * std::min(a, 0.0), ctx.spec);
    out.c1_sq = c1.value;
    out.abs_error_estimate += c1.abs_error_estimate;
  }

  if (include_negative_axis && a != 0.0) {
    auto negative = [&](double u) {
      const double d = pow_diff(s + u, gap, a);
      return d * d * std::pow(u, -g);
    };
    const double left = (s > 0.0 ? 0.0 : 2.0 * std::min(a, 0.0)) - g;
    const IntegralResult c3 =
        integrate_positive_axis(negative, {s, t}, left, 2.0 * a - 2.0 - g, ctx.spec);
    out.c3_sq = c3.value;
    out.abs_error_estimate += c3.abs_error_estimate;
  }
  return out;
}

// Absolute tolerance taken relative to `scale`, the natural size of the value,
// so accuracy does not depend on the time unit.
inline KernelContext at_scale(const KernelContext& ctx, double scale) {
  KernelContext out = ctx;
  out.spec.abs_tol *= std::clamp(scale, 1e-280, 1.0);
  return out;
}

// t^{2H} (h/t)^2: a lower envelope for phi(t - h, t) in every regime.
inline double increment_scale(const KernelContext& ctx, double s, double t) {
  const double r = (t - s) / t;
  return std::pow(t, 2.0 * ctx.hurst()) * r * r;
}

inline void require_variant(const KernelContext& ctx, Variant v, const char* op) {
  if (ctx.params.variant() != v) {
    throw OutOfDomain("variant", std::string(op) + " requires the " +
                                     std::string(to_string(v)) + " variant");
  }
}

}  // namespace detail

/// Riemann-Liouville covariance c^2 int_0^s (s-u)^a (t-u)^a u^{-g} du.
inline double psi_rl(const KernelContext& ctx, double s, double t) {
  detail::require_variant(ctx, Variant::RiemannLiouville, "psi_rl");
  detail::check_times(s, t);
  if (s > t) std::swap(s, t);
  if (s == 0.0) return 0.0;
  const KernelContext local = detail::at_scale(ctx, std::pow(t, 2.0 * ctx.hurst()));
  return ctx.c2() * detail::one_sided_cross(local, s, t).value;
}

/// Riemann-Liouville increment second moment (two integrals).
inline double phi_rl(const KernelContext& ctx, double s, double t) {
  detail::require_variant(ctx, Variant::RiemannLiouville, "phi_rl");
  detail::check_times(s, t);
  if (s > t) std::swap(s, t);
  if (s == t) return 0.0;
  const KernelContext local = detail::at_scale(ctx, detail::increment_scale(ctx, s, t));
  return ctx.c2() * detail::increment_parts(local, s, t, false).total();
}

/// Covariance E[X(s) X(t)]; symmetric, zero when either time is 0.
/// Dispatches to psi_rl for a Riemann-Liouville context.
inline double psi(const KernelContext& ctx, double s, double t) {
  if (ctx.params.variant() == Variant::RiemannLiouville) return psi_rl(ctx, s, t);
  detail::check_times(s, t);
  if (s > t) std::swap(s, t);
  if (s == 0.0) return 0.0;
  const KernelContext local = detail::at_scale(ctx, std::pow(t, 2.0 * ctx.hurst()));
  const double near = detail::one_sided_cross(local, s, t).value;
  const double far = detail::negative_axis_cross(local, s, t).value;
  return ctx.c2() * (near + far);
}

/// The three independent second moments whose sum is phi(s, t), 0 < s < t.
inline PhiDecomposition phi_decomposition(const KernelContext& ctx, double s, double t) {
  detail::require_variant(ctx, Variant::FullRange, "phi_decomposition");
  detail::check_times(s, t);
  if (!(s > 0.0 && s < t)) throw OutOfDomain("time", "phi_decomposition requires 0 < s < t");
  const KernelContext local = detail::at_scale(ctx, detail::increment_scale(ctx, s, t));
  PhiDecomposition d = detail::increment_parts(local, s, t, true);
  const double c2 = ctx.c2();
  d.c1_sq *= c2;
  d.c2_sq *= c2;
  d.c3_sq *= c2;
  d.abs_error_estimate *= c2;
  return d;
}

/// E[(X(t) - X(s))^2], evaluated from its own integrals rather than from psi
/// differences so that |t - s| << s does not cancel.
inline double phi(const KernelContext& ctx, double s, double t) {
  if (ctx.params.variant() == Variant::RiemannLiouville) return phi_rl(ctx, s, t);
  detail::check_times(s, t);
  if (s > t) std::swap(s, t);
  if (s == t) return 0.0;
  const KernelContext local = detail::at_scale(ctx, detail::increment_scale(ctx, s, t));
  return ctx.c2() * detail::increment_parts(local, s, t, true).total();
}

/// Lower bound on phi used for non-differentiability, 0 < s < t,
/// a in (0, 1/2], g in (0, 1).
inline double phi_lower_bound(const KernelContext& ctx, double s, double t) {
  const double a = ctx.alpha();
  const double g = ctx.gamma();
  if (!(a > 0.0 && a <= 0.5)) throw OutOfDomain("alpha", "phi_lower_bound requires 0 < alpha <= 1/2");
  if (!(g > 0.0)) throw OutOfDomain("gamma", "phi_lower_bound requires gamma in (0, 1)");
  if (!(s > 0.0 && s < t)) throw OutOfDomain("time", "phi_lower_bound requires 0 < s < t");
  if (a == 0.5) return ctx.c2() / ((1.0 - g) * (2.0 - g)) * std::pow(t - s, 2.0 - g);
  return ctx.c2() / (2.0 * a + 1.0) * std::pow(0.5 * (t + s), -g) *
         std::pow(0.5 * (t - s), 2.0 * a + 1.0);
}

/// Var(dX/dt) at t > 0 in the differentiable regime:
///   c^2 a^2 t^{2H-2} [int_0^1 (1-u)^{2a-2} u^{-g} du + int_0^inf (1+u)^{2a-2} u^{-g} du].
inline double derivative_variance(const KernelContext& ctx, double t) {
  detail::require_variant(ctx, Variant::FullRange, "derivative_variance");
  const double a = ctx.alpha();
  const double g = ctx.gamma();
  if (!(a > 0.5)) throw OutOfDomain("alpha", "the derivative exists only for alpha > 1/2");
  if (!(g > 0.0)) throw OutOfDomain("gamma", "the derivative exists only for gamma in (0, 1)");
  if (!(t > 0.0) || !std::isfinite(t)) throw OutOfDomain("time", "derivative_variance requires t > 0");
  const double p = 2.0 * a - 2.0;
  auto inside = [&](double u, double uc) { return std::pow(uc, p) * std::pow(u, -g); };
  auto outside = [&](double u) { return std::pow(1.0 + u, p) * std::pow(u, -g); };
  const double bracket = integrate_01_singular(inside, -g, p, ctx.spec).value +
                         integrate_semi_infinite(outside, p - g, ctx.spec, -g).value;
  return ctx.c2() * a * a * std::pow(t, 2.0 * ctx.hurst() - 2.0) * bracket;
}

/// Constant C with phi(s,t) <= C |t-s|^{2H}, assembled from the three
/// component bounds c3 = 4 Beta(1-g, g), c4 = Beta(1+2a, 1-g) and c5 (the
/// finite negative-axis integral bound). For g = 0 phi is exactly |t-s|^{2H}.
inline double holder_constant(const KernelContext& ctx) {
  const double a = ctx.alpha();
  const double g = ctx.gamma();
  if (g == 0.0) return 1.0;
  const double c3 = 4.0 * beta(1.0 - g, g);
  const double c4 = beta(1.0 + 2.0 * a, 1.0 - g);
  double c5 = 0.0;
  if (a > 0.0) {
    c5 = 1.0 / (1.0 - g) + a * a / (1.0 + g - 2.0 * a);
  } else if (a < 0.0) {
    const double at = -a;
    const double gt = g - 2.0 * a;
    c5 = 1.0 / (1.0 - gt) + at * at / (1.0 + gt - 2.0 * at);
  }
  if (ctx.params.variant() == Variant::RiemannLiouville) c5 = 0.0;
  return ctx.c2() * (c3 + c4 + c5);
}

/// Variance of X(T) carried by the noise on u < -U (full-range variant).
inline double left_tail_variance(const KernelContext& ctx, double T, double U) {
  const double a = ctx.alpha();
  if (a == 0.0 || ctx.params.variant() == Variant::RiemannLiouville) return 0.0;
  const double g = ctx.gamma();
  auto f = [&](double w) {
    const double v = U / w;
    const double d = pow_diff(v, T, a);
    return d * d * std::pow(v, -g) * U / (w * w);
  };
  return ctx.c2() * integrate_01_singular(f, -(2.0 * a - 2.0 - g) - 2.0, 0.0, ctx.spec).value;
}

/// Same for the derivative process dX/dt at T.
inline double derivative_left_tail_variance(const KernelContext& ctx, double T, double U) {
  const double a = ctx.alpha();
  const double g = ctx.gamma();
  auto f = [&](double w) {
    const double v = U / w;
    return std::pow(T + v, 2.0 * a - 2.0) * std::pow(v, -g) * U / (w * w);
  };
  return ctx.c2() * a * a *
         integrate_01_singular(f, -(2.0 * a - 2.0 - g) - 2.0, 0.0, ctx.spec).value;
}

/// Standard FBM covariance, normalized so that Var B_H(t) = t^{2H}.
inline double fbm_covariance(double hurst, double s, double t) {
  return 0.5 * (std::pow(s, 2.0 * hurst) + std::pow(t, 2.0 * hurst) -
                std::pow(std::abs(t - s), 2.0 * hurst));
}

inline double fbm_increment_variance(double hurst, double s, double t) {
  return std::pow(std::abs(t - s), 2.0 * hurst);
}

}  // namespace gfbm
