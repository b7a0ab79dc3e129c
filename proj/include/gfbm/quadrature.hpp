#pragma once

// Double-exponential (tanh-sinh) quadrature for integrands with power-law
// endpoint singularities, plus semi-infinite and piecewise wrappers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "gfbm/errors.hpp"

namespace gfbm {

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_levels = 12;
  /// Expected decay exponent of semi-infinite integrands; informational
  /// default for callers that do not pass one explicitly.
  double tail_exponent_hint = -2.0;

  void check() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
      throw OutOfDomain("spec", "abs_tol and rel_tol must be positive");
    }
    if (max_levels < 4) throw OutOfDomain("spec", "max_levels must be >= 4");
  }
};

struct IntegralResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::size_t evaluations = 0;

  IntegralResult& operator+=(const IntegralResult& o) {
    value += o.value;
    abs_error_estimate += o.abs_error_estimate;
    evaluations += o.evaluations;
    return *this;
  }
};

namespace detail {

inline constexpr double kTanhSinhTMax = 5.0;
inline constexpr int kTanhSinhMaxTableLevel = 14;
inline constexpr int kTanhSinhMinLevel = 3;

// Node at abscissa t >= 0 mapped to (0, 1): x = 1/(1+exp(-2y)), y = pi/2 sinh t.
// The complement 1 - x is stored separately so endpoint distances stay exact.
struct TanhSinhNode {
  double x;
  double xc;
  double w;  // dx/dt = pi cosh(t) x (1 - x)
};

inline TanhSinhNode make_node(double t) {
  const double y = 0.5 * std::numbers::pi * std::sinh(t);
  const double x = 1.0 / (1.0 + std::exp(-2.0 * y));
  const double xc = 1.0 / (1.0 + std::exp(2.0 * y));
  return {x, xc, std::numbers::pi * std::cosh(t) * x * xc};
}

// levels[k] holds the nodes first introduced at level k (t >= 0 only).
inline const std::vector<std::vector<TanhSinhNode>>& tanh_sinh_table() {
  static const std::vector<std::vector<TanhSinhNode>> table = [] {
    std::vector<std::vector<TanhSinhNode>> levels(kTanhSinhMaxTableLevel + 1);
    for (int j = 0; j <= static_cast<int>(kTanhSinhTMax); ++j) {
      levels[0].push_back(make_node(static_cast<double>(j)));
    }
    for (int k = 1; k <= kTanhSinhMaxTableLevel; ++k) {
      const double h = std::ldexp(1.0, -k);
      for (long j = 0;; ++j) {
        const double t = static_cast<double>(2 * j + 1) * h;
        if (t > kTanhSinhTMax) break;
        levels[k].push_back(make_node(t));
      }
    }
    return levels;
  }();
  return table;
}

template <class F>
double call01(F& f, double x, double xc) {
  if constexpr (std::is_invocable_r_v<double, F&, double, double>) {
    return f(x, xc);
  } else {
    return f(x);
  }
}

inline void check_exponent(double e, const char* which) {
  if (!(e > -1.0)) {
    throw NonIntegrable(std::string(which) + " endpoint exponent " + std::to_string(e) +
                        " <= -1");
  }
}

}  // namespace detail

/// Integrates f over (0, 1).
///
/// f is called as f(x, 1 - x) when it accepts two arguments, otherwise f(x);
/// the complement is computed without cancellation. The endpoint exponents
/// declare the power-law behaviour f ~ x^left near 0 and f ~ (1-x)^right near
/// 1; they must exceed -1 and are used to account for the mass beyond the
/// outermost nodes. Endpoints themselves are never evaluated.
template <class F>
IntegralResult integrate_01_singular(F&& f, double left_exponent, double right_exponent,
                                     const QuadratureSpec& spec = {}) {
  spec.check();
  detail::check_exponent(left_exponent, "left");
  detail::check_exponent(right_exponent, "right");

  const auto& table = detail::tanh_sinh_table();
  const int max_level = std::min(spec.max_levels, detail::kTanhSinhMaxTableLevel);

  IntegralResult res;
  double raw = 0.0;      // sum of f * w over all nodes so far
  double raw_abs = 0.0;  // sum of |f * w|, for the rounding estimate
  double f_left_end = 0.0, f_right_end = 0.0;
  double x_left_end = 0.0, xc_right_end = 0.0;

  auto eval = [&](double x, double xc) {
    const double v = detail::call01(f, x, xc);
    ++res.evaluations;
    if (!std::isfinite(v)) {
      throw QuadratureFailure("integrand is not finite at x = " + std::to_string(x));
    }
    return v;
  };

  auto add_level = [&](int k) {
    const auto& nodes = table[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto& n = nodes[i];
      if (k == 0 && i == 0) {
        const double v = eval(0.5, 0.5);
        raw += v * n.w;
        raw_abs += std::abs(v * n.w);
        continue;
      }
      const double vr = eval(n.x, n.xc);
      const double vl = eval(n.xc, n.x);
      raw += (vr + vl) * n.w;
      raw_abs += (std::abs(vr) + std::abs(vl)) * n.w;
      if (k == 0 && i + 1 == nodes.size()) {
        f_right_end = vr;
        xc_right_end = n.xc;
        f_left_end = vl;
        x_left_end = n.xc;
      }
    }
  };

  // Mass beyond the outermost nodes, assuming the declared power laws.
  auto tails = [&] {
    return f_left_end * x_left_end / (1.0 + left_exponent) +
           f_right_end * xc_right_end / (1.0 + right_exponent);
  };

  add_level(0);
  double previous = raw + tails();
  for (int k = 1; k <= max_level; ++k) {
    add_level(k);
    const double h = std::ldexp(1.0, -k);
    const double current = h * raw + tails();
    const double rounding = 16.0 * std::numeric_limits<double>::epsilon() * h * raw_abs;
    res.value = current;
    res.abs_error_estimate = std::max(std::abs(current - previous), rounding);
    previous = current;
    if (k >= detail::kTanhSinhMinLevel &&
        res.abs_error_estimate <= std::max(spec.abs_tol, spec.rel_tol * std::abs(current))) {
      return res;
    }
  }
  throw QuadratureFailure("tanh-sinh did not reach tolerance after " + std::to_string(max_level) +
                          " levels (estimate " + std::to_string(res.abs_error_estimate) +
                          ", value " + std::to_string(res.value) + ")");
}

/// Integrates f(u, u - a, b - u) over (a, b). The two distance arguments are
/// exact even when u is within rounding of an endpoint.
template <class F>
IntegralResult integrate_interval(F&& f, double a, double b, double left_exponent,
                                  double right_exponent, const QuadratureSpec& spec = {}) {
  const double width = b - a;
  if (!(width > 0.0)) return {};
  auto g = [&](double x, double xc) {
    const double dl = width * x;
    const double dr = width * xc;
    return width * f(x <= 0.5 ? a + dl : b - dr, dl, dr);
  };
  return integrate_01_singular(g, left_exponent, right_exponent, spec);
}

/// Integrates f over (0, inf), split at `split`: (0, split] directly and
/// [split, inf) through u = split / w. f ~ u^left_exponent near 0 and
/// f = O(u^tail_exponent) at infinity with tail_exponent < -1.
template <class F>
IntegralResult integrate_semi_infinite(F&& f, double tail_exponent, const QuadratureSpec& spec = {},
                                       double left_exponent = 0.0, double split = 1.0) {
  if (!(tail_exponent < -1.0)) {
    throw NonIntegrable("tail exponent " + std::to_string(tail_exponent) + " >= -1");
  }
  QuadratureSpec piece = spec;
  piece.abs_tol = 0.5 * spec.abs_tol;
  IntegralResult res = integrate_interval([&](double u, double, double) { return f(u); }, 0.0,
                                          split, left_exponent, 0.0, piece);
  auto tail = [&](double w) {
    const double u = split / w;
    return f(u) * split / (w * w);
  };
  res += integrate_01_singular(tail, -tail_exponent - 2.0, 0.0, piece);
  return res;
}

/// Integrates f over (0, inf) in pieces delimited by the positive breakpoints:
/// (0, b0], [b0, b1], ..., [b_last, inf). The near-zero exponent applies to
/// the first piece only.
template <class F>
IntegralResult integrate_positive_axis(F&& f, std::vector<double> breakpoints, double left_exponent,
                                       double tail_exponent, const QuadratureSpec& spec = {}) {
  if (!(tail_exponent < -1.0)) {
    throw NonIntegrable("tail exponent " + std::to_string(tail_exponent) + " >= -1");
  }
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::remove_if(breakpoints.begin(), breakpoints.end(),
                                   [](double b) { return !(b > 0.0) || !std::isfinite(b); }),
                    breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  if (breakpoints.empty()) breakpoints.push_back(1.0);

  QuadratureSpec piece = spec;
  piece.abs_tol = spec.abs_tol / static_cast<double>(breakpoints.size() + 1);
  auto plain = [&](double u, double, double) { return f(u); };

  IntegralResult res = integrate_interval(plain, 0.0, breakpoints.front(), left_exponent, 0.0, piece);
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    res += integrate_interval(plain, breakpoints[i], breakpoints[i + 1], 0.0, 0.0, piece);
  }
  const double last = breakpoints.back();
  auto tail = [&](double w) {
    const double u = last / w;
    return f(u) * last / (w * w);
  };
  res += integrate_01_singular(tail, -tail_exponent - 2.0, 0.0, piece);
  return res;
}

/// (a + d)^p - a^p for a > 0, d >= 0 without cancellation when d << a.
inline double pow_diff(double a, double d, double p) {
  if (d > a) return std::pow(a + d, p) - std::pow(a, p);
  return std::pow(a, p) * std::expm1(p * std::log1p(d / a));
}

}  // namespace gfbm
