#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gfbm/errors.hpp"
#include "gfbm/kernels.hpp"
#include "gfbm/parallel.hpp"
#include "gfbm/simulation.hpp"

namespace gfbm {

struct VerificationReport {
  std::string check_name;
  /// Property the check targets, in words.
  std::string claim_ref;
  std::vector<double> measured;
  double target = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  double runtime = 0.0;  // seconds
  std::optional<std::uint64_t> seed;
  std::map<std::string, double> details;
};

inline void to_json(nlohmann::json& j, const VerificationReport& r) {
  j = nlohmann::json{{"check_name", r.check_name}, {"claim_ref", r.claim_ref},
                     {"measured", r.measured},     {"target", r.target},
                     {"tolerance", r.tolerance},   {"passed", r.passed},
                     {"runtime", r.runtime},       {"details", r.details}};
  j["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr);
}

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline double log_log(double x) { return std::log(std::log(x)); }

}  // namespace detail

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InsufficientData("slope fit needs >= 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(sxx > 0.0)) throw InsufficientData("slope fit needs distinct abscissae");
  return sxy / sxx;
}

/// Sample quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw InsufficientData("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double sample_variance(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) throw InsufficientData("variance needs >= 2 samples");
  return (x.array() - x.mean()).square().sum() / (n - 1.0);
}

struct KsResult {
  double statistic;
  double p_value;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InsufficientData("KS test needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  const double lambda = (ne + 0.12 + 0.11 / ne) * d;
  double p = 0.0;
  if (lambda < 1e-3) {
    p = 1.0;
  } else {
    for (int k = 1; k <= 100; ++k) {
      const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
      p += term;
      if (std::abs(term) < 1e-12) break;
    }
    p = std::clamp(p, 0.0, 1.0);
  }
  return {d, p};
}

/// H from the log-log slope of the sample variance against t (halved);
/// paths is num_paths x grid.size().
inline double hurst_estimate(const Grid& grid, const Eigen::MatrixXd& paths) {
  if (paths.rows() < 1000) {
    throw InsufficientData("hurst_estimate needs >= 1000 paths, got " + std::to_string(paths.rows()));
  }
  if (static_cast<std::size_t>(paths.cols()) != grid.size()) {
    throw OutOfDomain("paths", "column count does not match the grid");
  }
  std::vector<double> x, y;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double t = grid[j];
    if (!(t > 0.0)) continue;
    const double v = sample_variance(paths.col(static_cast<Eigen::Index>(j)));
    if (!(v > 0.0)) continue;
    x.push_back(std::log(t));
    y.push_back(std::log(v));
  }
  if (x.size() < 2) throw InsufficientData("hurst_estimate needs >= 2 positive grid times");
  return 0.5 * fit_slope(x, y);
}

inline double hurst_estimate(const PathEnsemble& ens) { return hurst_estimate(ens.grid, ens.paths); }

namespace detail {

inline double holder_ratio_max(const KernelContext& ctx, double T, std::size_t n) {
  const double two_h = 2.0 * ctx.hurst();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = i + 1; j <= n; ++j) pairs.emplace_back(i, j);
  std::vector<double> ratio(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const double s = T * static_cast<double>(pairs[k].first) / static_cast<double>(n);
      const double t = T * static_cast<double>(pairs[k].second) / static_cast<double>(n);
      ratio[k] = phi(ctx, s, t) / std::pow(t - s, two_h);
    }
  });
  return *std::max_element(ratio.begin(), ratio.end());
}

}  // namespace detail

/// Supremum of phi(s,t)/|t-s|^{2H} over the grid {T i/n}^2 (diagonal
/// excluded), compared against the same supremum on the 2n grid.
inline VerificationReport holder_ratio_scan(const KernelContext& ctx, double T, std::size_t n) {
  if (n < 32) throw OutOfDomain("n", "holder_ratio_scan requires n >= 32");
  if (!(T > 0.0)) throw OutOfDomain("T", "horizon must be positive");
  detail::Stopwatch clock;
  const double m1 = detail::holder_ratio_max(ctx, T, n);
  const double m2 = detail::holder_ratio_max(ctx, T, 2 * n);
  const double change = std::abs(m2 - m1) / m1;
  VerificationReport r;
  r.check_name = "holder_ratio_scan";
  r.claim_ref = "increment second moment bounded by a constant times |t-s|^{2H}";
  r.measured = {m1, m2};
  r.target = 0.0;
  r.tolerance = 0.2;
  r.passed = std::isfinite(m1) && std::isfinite(m2) && change < 0.2;
  r.details = {{"relative_change", change},
               {"holder_constant", holder_constant(ctx)},
               {"n", static_cast<double>(n)}};
  r.runtime = clock.seconds();
  return r;
}

/// max over s of |phi(s, s+h) - phi(0, h)|.
inline VerificationReport nonstationarity_gap(const KernelContext& ctx, double h,
                                              const std::vector<double>& s_values) {
  if (!(h > 0.0)) throw OutOfDomain("h", "increment length must be positive");
  if (s_values.empty()) throw OutOfDomain("s_values", "need at least one s");
  detail::Stopwatch clock;
  const double base = phi(ctx, 0.0, h);
  double gap = 0.0;
  for (const double s : s_values) {
    if (!(s > 0.0)) throw OutOfDomain("s_values", "s must be positive");
    gap = std::max(gap, std::abs(phi(ctx, s, s + h) - base));
  }
  VerificationReport r;
  r.check_name = "nonstationarity_gap";
  r.measured = {gap};
  if (ctx.gamma() > 0.0) {
    r.claim_ref = "increments are not second-order stationary for gamma > 0";
    r.target = 1e-3;
    r.tolerance = 1e-3;
    r.passed = gap > 1e-3;
  } else {
    r.claim_ref = "increments are stationary at gamma = 0";
    r.target = 0.0;
    r.tolerance = 1e-8;
    r.passed = gap < 1e-8;
  }
  r.details = {{"h", h}, {"phi_0_h", base}};
  r.runtime = clock.seconds();
  return r;
}

/// max over grid pairs and r of |psi(rs, rt)/r^{2H} - psi(s, t)|.
inline VerificationReport c1_scaling_check(const KernelContext& ctx, const std::vector<double>& r_values,
                                           const Grid& grid) {
  if (r_values.empty()) throw OutOfDomain("r_values", "need at least one r");
  for (const double r : r_values)
    if (!(r > 0.0)) throw OutOfDomain("r_values", "r must be positive");
  detail::Stopwatch clock;
  const double two_h = 2.0 * ctx.hurst();
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = i; j < grid.size(); ++j) pairs.emplace_back(grid[i], grid[j]);
  VerificationReport rep;
  rep.check_name = "c1_scaling_check";
  rep.claim_ref = "covariance scaling psi(rs, rt) = r^{2H} psi(s, t)";
  rep.target = 0.0;
  rep.tolerance = 1e-6;
  double worst = 0.0;
  for (const double r : r_values) {
    std::vector<double> err(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t k = begin; k < end; ++k) {
        const auto [s, t] = pairs[k];
        err[k] = std::abs(psi(ctx, r * s, r * t) / std::pow(r, two_h) - psi(ctx, s, t));
      }
    });
    const double e = *std::max_element(err.begin(), err.end());
    rep.measured.push_back(e);
    worst = std::max(worst, e);
  }
  rep.passed = worst < 1e-6;
  rep.details = {{"max_error", worst}};
  rep.runtime = clock.seconds();
  return rep;
}

/// Decay exponent of psi(s, m t)/m^H as m grows: min(H, 1 - H, (1 - g)/2),
/// which reduces to (1 - g)/2 for 0 <= alpha <= gamma.
inline double c3_decay_exponent(const ModelParams& p) {
  const double h = p.hurst();
  return std::min({h, 1.0 - h, 0.5 * (1.0 - p.gamma())});
}

/// Normalized cross moment psi(n s, m t) / (n^H m^H).
inline double c3_correlation(const KernelContext& ctx, double s, double t, double n, double m) {
  const double h = ctx.hurst();
  return psi(ctx, n * s, m * t) / (std::pow(n, h) * std::pow(m, h));
}

/// Fits log g against log(n/m) over the ratios m/n (n = 1) and compares the
/// slope with c3_decay_exponent to 5%.
inline VerificationReport c3_decay_check(const KernelContext& ctx, double s, double t,
                                         const std::vector<double>& ratios) {
  if (!(s > 0.0) || !(t > 0.0)) throw OutOfDomain("time", "c3_decay_check requires s, t > 0");
  if (ratios.size() < 2) throw InsufficientData("c3_decay_check needs >= 2 ratios");
  for (const double q : ratios)
    if (!(q >= 10.0)) throw OutOfDomain("ratios", "ratios m/n must be >= 10");
  detail::Stopwatch clock;
  std::vector<double> x, y, g;
  for (const double q : ratios) {
    const double v = c3_correlation(ctx, s, t, 1.0, q);
    if (!(v > 0.0)) throw QuadratureFailure("c3 cross moment is not positive at ratio " + std::to_string(q));
    g.push_back(v);
    x.push_back(-std::log(q));
    y.push_back(std::log(v));
  }
  const double slope = fit_slope(x, y);
  const double target = c3_decay_exponent(ctx.params);
  VerificationReport r;
  r.check_name = "c3_decay_check";
  r.claim_ref = "normalized cross moment of X(ns), X(mt) decays to 0 as a power of n/m";
  r.measured = {slope};
  r.target = target;
  r.tolerance = 0.05 * target;
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  const double g_first = g[static_cast<std::size_t>(lo - ratios.begin())];
  const double g_last = g[static_cast<std::size_t>(hi - ratios.begin())];
  r.passed = std::abs(slope - target) <= r.tolerance && g_last < g_first;
  r.details = {{"g_at_min_ratio", g_first}, {"g_at_max_ratio", g_last}};
  r.runtime = clock.seconds();
  return r;
}

/// Sorted union of the points n T j / k, j = 0..k, over every n.
inline Grid scaled_union_grid(const std::vector<double>& scales, double T, std::size_t k) {
  if (scales.empty() || k == 0 || !(T > 0.0)) throw OutOfDomain("grid", "need scales, k >= 1, T > 0");
  std::vector<double> pts;
  for (const double n : scales) {
    if (!(n > 0.0)) throw OutOfDomain("grid", "scales must be positive");
    for (std::size_t j = 1; j <= k; ++j) pts.push_back(n * T * static_cast<double>(j) / static_cast<double>(k));
  }
  return Grid::from_points(std::move(pts));
}

struct RescaledPaths {
  double n;
  std::vector<double> times;  // t in [0, T]
  Eigen::MatrixXd values;     // paths x times
  std::vector<double> sup_norms;
};

/// Z_n(t) = X(n t) / sqrt(2 n^{2H} log log n) on t = T j / k, j = 0..k,
/// with T = horizon / max(n).
inline std::vector<RescaledPaths> flil_rescaled_paths(const PathEnsemble& ens,
                                                      const std::vector<double>& n_values,
                                                      std::size_t k = 64) {
  if (n_values.empty()) throw OutOfDomain("n_values", "need at least one n");
  const double e = std::exp(1.0);
  for (const double n : n_values)
    if (!(n > e)) throw OutOfDomain("n", "log log n requires n > e, got " + std::to_string(n));
  const double T = ens.grid.horizon() / *std::max_element(n_values.begin(), n_values.end());
  const double h = ens.params.hurst();
  std::vector<RescaledPaths> out;
  for (const double n : n_values) {
    RescaledPaths rp{n, {}, Eigen::MatrixXd(static_cast<Eigen::Index>(ens.num_paths()),
                                             static_cast<Eigen::Index>(k + 1)),
                     std::vector<double>(ens.num_paths(), 0.0)};
    const double scale = std::sqrt(2.0 * std::pow(n, 2.0 * h) * detail::log_log(n));
    for (std::size_t j = 0; j <= k; ++j) rp.times.push_back(T * static_cast<double>(j) / static_cast<double>(k));
    for (std::size_t p = 0; p < ens.num_paths(); ++p) {
      double sup = 0.0;
      for (std::size_t j = 0; j <= k; ++j) {
        const double z = interpolate(ens, p, std::min(n * rp.times[j], ens.grid.horizon())) / scale;
        rp.values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)) = z;
        sup = std::max(sup, std::abs(z));
      }
      rp.sup_norms[p] = sup;
    }
    out.push_back(std::move(rp));
  }
  return out;
}

/// Boundedness of the mean sup-norm of Z_n across n: |slope of log mean
/// sup-norm against log n| < 0.05.
inline VerificationReport flil_boundedness_check(const std::vector<RescaledPaths>& rescaled) {
  detail::Stopwatch clock;
  std::vector<double> x, y;
  VerificationReport r;
  r.check_name = "flil_sup_norm";
  r.claim_ref = "rescaled paths X(nt)/sqrt(2 n^{2H} log log n) stay bounded in sup-norm";
  for (const auto& rp : rescaled) {
    const double mean = std::accumulate(rp.sup_norms.begin(), rp.sup_norms.end(), 0.0) /
                        static_cast<double>(rp.sup_norms.size());
    x.push_back(std::log(rp.n));
    y.push_back(std::log(mean));
    r.details["mean_sup_norm_n=" + std::to_string(static_cast<long long>(rp.n))] = mean;
  }
  const double slope = fit_slope(x, y);
  r.measured = {slope};
  r.target = 0.0;
  r.tolerance = 0.05;
  r.passed = std::abs(slope) < 0.05;
  r.runtime = clock.seconds();
  return r;
}

struct QuantileCurve {
  std::vector<double> u;
  std::vector<double> median;
  std::vector<double> q95;
};

/// Points u T j / k, j = 1..k, for every u: the grid llil_statistic reads.
inline Grid llil_grid(const std::vector<double>& u_values, double T, std::size_t k = 16) {
  return scaled_union_grid(u_values, T, k);
}

/// Quantiles over paths of sup_{t in (0,T]} |X(u t)| / (u^H sqrt(log log 1/u)),
/// the supremum taken over t = T j / k.
inline QuantileCurve llil_statistic(const PathEnsemble& ens, const std::vector<double>& u_values,
                                    double T, std::size_t k = 16) {
  if (!(ens.params.alpha() > 0.0)) throw OutOfDomain("alpha", "local LIL is asserted only for alpha > 0");
  const double inv_e = std::exp(-1.0);
  for (const double u : u_values)
    if (!(u > 0.0 && u < inv_e)) throw OutOfDomain("u", "u must lie in (0, 1/e)");
  if (u_values.size() < 2) throw InsufficientData("llil_statistic needs >= 2 values of u");
  const double h = ens.params.hurst();
  QuantileCurve curve;
  for (const double u : u_values) {
    const double scale = std::pow(u, h) * std::sqrt(detail::log_log(1.0 / u));
    std::vector<double> stat(ens.num_paths());
    for (std::size_t p = 0; p < ens.num_paths(); ++p) {
      double sup = 0.0;
      for (std::size_t j = 1; j <= k; ++j) {
        const double t = u * T * static_cast<double>(j) / static_cast<double>(k);
        sup = std::max(sup, std::abs(interpolate(ens, p, t)));
      }
      stat[p] = sup / scale;
    }
    curve.u.push_back(u);
    curve.median.push_back(quantile(stat, 0.5));
    curve.q95.push_back(quantile(stat, 0.95));
  }
  return curve;
}

/// |slope of log q95 against log u| < 0.05.
inline VerificationReport llil_stability_check(const QuantileCurve& curve) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < curve.u.size(); ++i) {
    x.push_back(std::log(curve.u[i]));
    y.push_back(std::log(curve.q95[i]));
  }
  VerificationReport r;
  r.check_name = "llil_quantile_stability";
  r.claim_ref = "|X(ut)|/(u^H sqrt(log log 1/u)) stays bounded as u decreases";
  const double slope = fit_slope(x, y);
  r.measured = {slope};
  r.target = 0.0;
  r.tolerance = 0.05;
  r.passed = std::isfinite(slope) && std::abs(slope) < 0.05;
  for (std::size_t i = 0; i < curve.u.size(); ++i) {
    r.details["q95_log_u=" + std::to_string(std::log(curve.u[i]))] = curve.q95[i];
  }
  return r;
}

/// Closed form b^{H^2} H^{H/2} (H+1)^{-(H+1)/2}, valid whenever psi(r,r) = r^{2H}.
inline double sigma_closed_form(double hurst, double b) {
  return std::pow(b, hurst * hurst) * std::pow(hurst, 0.5 * hurst) * std::pow(hurst + 1.0, -0.5 * (hurst + 1.0));
}

/// max over r in [0, sqrt(psi(b,b))] of sqrt(psi(r,r)) (1 - r^2/psi(b,b))^{1/2},
/// by golden-section search down to an interval of 1e-10.
inline double sigma_composition(const KernelContext& ctx, double b) {
  if (!(ctx.alpha() > 0.0)) throw OutOfDomain("alpha", "the composition LIL is asserted only for alpha > 0");
  if (!(b > 0.0) || !std::isfinite(b)) throw OutOfDomain("b", "b must be positive");
  const double vb = psi(ctx, b, b);
  auto f = [&](double r) {
    if (r <= 0.0) return 0.0;
    const double rest = 1.0 - r * r / vb;
    return rest <= 0.0 ? 0.0 : std::sqrt(psi(ctx, r, r) * rest);
  };
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 0.0, hi = std::sqrt(vb);
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > 1e-10) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  return f(0.5 * (lo + hi));
}

/// Grid for composition_statistic: the uniform grid on [0, T], the points
/// u b j / k, and k points on (0, 4 (u b)^H] where |X(u b)| typically lands.
inline Grid composition_grid(const std::vector<double>& u_values, double b, double T, std::size_t n,
                             double hurst, std::size_t k = 16) {
  std::vector<double> pts = Grid::uniform(n, T).times();
  for (const double u : u_values) {
    const double reach = std::min(T, 4.0 * std::pow(u * b, hurst));
    for (std::size_t j = 1; j <= k; ++j) {
      const double f = static_cast<double>(j) / static_cast<double>(k);
      pts.push_back(u * b * f);
      pts.push_back(reach * f);
    }
  }
  return Grid::from_points(std::move(pts));
}

/// Quantiles over paths of |X(|X(u b)|)| / (u^{H^2} (2 log log 1/u)^{(H+1)/2}).
/// Both evaluations interpolate linearly in the grid.
inline QuantileCurve composition_statistic(const PathEnsemble& ens, double b,
                                           const std::vector<double>& u_values) {
  if (!(ens.params.alpha() > 0.0)) {
    throw OutOfDomain("alpha", "the composition LIL is asserted only for alpha > 0");
  }
  if (!(b > 0.0)) throw OutOfDomain("b", "b must be positive");
  const double inv_e = std::exp(-1.0);
  const double h = ens.params.hurst();
  QuantileCurve curve;
  for (const double u : u_values) {
    if (!(u > 0.0 && u < inv_e)) throw OutOfDomain("u", "u must lie in (0, 1/e)");
    const double scale = std::pow(u, h * h) * std::pow(2.0 * detail::log_log(1.0 / u), 0.5 * (h + 1.0));
    std::vector<double> stat(ens.num_paths());
    for (std::size_t p = 0; p < ens.num_paths(); ++p) {
      const double inner = std::abs(interpolate(ens, p, u * b));
      stat[p] = std::abs(interpolate(ens, p, inner)) / scale;
    }
    curve.u.push_back(u);
    curve.median.push_back(quantile(stat, 0.5));
    curve.q95.push_back(quantile(stat, 0.95));
  }
  return curve;
}

/// Second moments of (X(t + h) - X(t)) / h over the ensemble for each h;
/// t and every t + h must be grid points.
inline std::vector<double> difference_quotient_moments(const PathEnsemble& ens, double t,
                                                       const std::vector<double>& h_values) {
  const std::size_t i0 = ens.grid.index_of(t);
  const auto c0 = static_cast<Eigen::Index>(i0);
  std::vector<double> out;
  for (const double h : h_values) {
    if (!(h > 0.0)) throw OutOfDomain("h", "h must be positive");
    const auto c1 = static_cast<Eigen::Index>(ens.grid.index_of(t + h));
    const Eigen::VectorXd q = (ens.paths.col(c1) - ens.paths.col(c0)) / h;
    out.push_back(q.squaredNorm() / static_cast<double>(q.size()));
  }
  return out;
}

}  // namespace gfbm
