#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "gfbm/errors.hpp"
#include "gfbm/kernels.hpp"
#include "gfbm/parallel.hpp"
#include "gfbm/parameters.hpp"

namespace gfbm {

/// Strictly increasing, finite, nonnegative time points.
class Grid {
 public:
  explicit Grid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.empty()) throw OutOfDomain("grid", "empty grid");
    for (std::size_t i = 0; i < times_.size(); ++i) {
      if (!std::isfinite(times_[i]) || times_[i] < 0.0) {
        throw OutOfDomain("grid", "times must be finite and nonnegative");
      }
      if (i > 0 && !(times_[i] > times_[i - 1])) {
        throw OutOfDomain("grid", "times must be strictly increasing");
      }
    }
  }

  /// {0, T/n, 2T/n, ..., T}.
  static Grid uniform(std::size_t n, double horizon) {
    if (n == 0 || !(horizon > 0.0)) throw OutOfDomain("grid", "uniform grid needs n >= 1 and T > 0");
    std::vector<double> t(n + 1);
    for (std::size_t i = 0; i <= n; ++i) t[i] = horizon * static_cast<double>(i) / static_cast<double>(n);
    t[n] = horizon;
    return Grid(std::move(t));
  }

  /// Sorted union of the given times, with 0 prepended when `with_origin`.
  static Grid from_points(std::vector<double> pts, bool with_origin = true) {
    if (with_origin) pts.push_back(0.0);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return Grid(std::move(pts));
  }

  const std::vector<double>& times() const { return times_; }
  std::size_t size() const { return times_.size(); }
  double operator[](std::size_t i) const { return times_[i]; }
  double horizon() const { return times_.back(); }
  bool starts_at_origin() const { return times_.front() == 0.0; }

  /// Index of an exact grid time.
  std::size_t index_of(double t) const {
    const auto it = std::lower_bound(times_.begin(), times_.end(), t);
    if (it == times_.end() || *it != t) throw OutOfDomain("time", "not a grid point: " + std::to_string(t));
    return static_cast<std::size_t>(it - times_.begin());
  }

 private:
  std::vector<double> times_;
};

enum class Method { ExactFactorization, RiemannDiscretization, Derivative };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::ExactFactorization: return "exact";
    case Method::RiemannDiscretization: return "riemann";
    case Method::Derivative: return "derivative";
  }
  return "exact";
}

inline Method parse_method(std::string_view s) {
  if (s == "exact") return Method::ExactFactorization;
  if (s == "riemann") return Method::RiemannDiscretization;
  if (s == "derivative") return Method::Derivative;
  throw OutOfDomain("method", "expected exact|riemann|derivative, got \"" + std::string(s) + "\"");
}

struct PathEnsemble {
  Grid grid;
  Eigen::MatrixXd paths;  // num_paths x num_times
  Method method;
  std::uint64_t seed;
  ModelParams params;
  /// Relative diagonal jitter used by the exact factorization (0 if none).
  double jitter = 0.0;
  /// Method-specific diagnostics (truncation, discretized variance, cells).
  std::map<std::string, double> diagnostics;

  std::size_t num_paths() const { return static_cast<std::size_t>(paths.rows()); }
  std::size_t num_times() const { return static_cast<std::size_t>(paths.cols()); }
};

/// Discretization of the white-noise integral.
///
/// Cells are uniform with width `mesh` on [-T, T], graded geometrically
/// (ratio `grading_ratio`, down to `grading_floor` of a cell) towards u = 0
/// and every grid time, and widen geometrically by `far_growth` on (-U, -T).
/// Nodes sit at cell midpoints, so no node coincides with a singular point.
struct RiemannSpec {
  /// Domain is cut at -U; a value <= 0 selects U automatically.
  double left_truncation = 0.0;
  double mesh = 1e-3;
  double grading_ratio = 0.8;
  double grading_floor = 1e-16;
  double far_growth = 0.05;
  /// Largest admissible truncated variance, relative to Var X(T).
  double tail_fraction = 1e-4;
};

/// Covariance matrix M[i][j] = psi(t_i, t_j).
inline Eigen::MatrixXd covariance_matrix(const KernelContext& ctx, const Grid& grid) {
  const std::size_t n = grid.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<std::pair<std::size_t, std::size_t>> upper;
  upper.reserve(n * (n + 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) upper.emplace_back(i, j);
  parallel_for(upper.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto [i, j] = upper[k];
      const double v = psi(ctx, grid[i], grid[j]);
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  });
  return m;
}

struct CholeskyFactor {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};

/// Lower factor of a covariance matrix with positive diagonal.
///
/// The factorization runs on the correlation matrix; on failure the diagonal
/// receives eps * max-diagonal with eps = 1e-14, 1e-13, ..., 1e-10.
inline CholeskyFactor factor_covariance(const Eigen::MatrixXd& cov) {
  const Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
  if ((sd.array() <= 0.0).any() || !sd.allFinite()) {
    throw FactorizationFailure("covariance has a nonpositive or non-finite diagonal entry");
  }
  const Eigen::VectorXd inv = sd.cwiseInverse();
  const Eigen::MatrixXd corr = inv.asDiagonal() * cov * inv.asDiagonal();
  for (const double eps : {0.0, 1e-14, 1e-13, 1e-12, 1e-11, 1e-10}) {
    Eigen::MatrixXd a = corr;
    a.diagonal().array() += eps;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd l = llt.matrixL();
      return {sd.asDiagonal() * l, eps};
    }
  }
  throw FactorizationFailure("covariance not positive definite after jitter up to 1e-10");
}

namespace detail {

inline void require_origin(const Grid& grid) {
  if (!grid.starts_at_origin()) throw OutOfDomain("grid", "grid must start at t = 0");
}

inline void require_positive_count(std::size_t n) {
  if (n == 0) throw OutOfDomain("paths", "num_paths must be positive");
}

// rows of `out` (paths) = weights * z, z ~ N(0, I) per path.
template <class Weights>
void fill_gaussian_paths(Eigen::MatrixXd& out, Eigen::Index first_col, const Weights& weights,
                         std::uint64_t seed) {
  const Eigen::Index dim = weights.cols();
  parallel_for(static_cast<std::size_t>(out.rows()), [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXd z(dim);
    for (std::size_t p = begin; p < end; ++p) {
      auto gen = path_stream(seed, p);
      std::normal_distribution<double> normal;
      for (Eigen::Index k = 0; k < dim; ++k) z[k] = normal(gen);
      out.row(static_cast<Eigen::Index>(p)).segment(first_col, weights.rows()) =
          (weights * z).transpose();
    }
  });
}

}  // namespace detail

/// Exact Gaussian paths from the covariance factorization on t > 0, X(0) = 0.
inline PathEnsemble sample_exact(const KernelContext& ctx, const Grid& grid, std::size_t num_paths,
                                 std::uint64_t seed) {
  detail::require_origin(grid);
  detail::require_positive_count(num_paths);
  const std::vector<double> positive(grid.times().begin() + 1, grid.times().end());
  PathEnsemble ens{grid,
                   Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_paths),
                                         static_cast<Eigen::Index>(grid.size())),
                   Method::ExactFactorization,
                   seed,
                   ctx.params};
  if (positive.empty()) return ens;
  const Eigen::MatrixXd cov = covariance_matrix(ctx, Grid(positive));
  const CholeskyFactor factor = factor_covariance(cov);
  ens.jitter = factor.jitter;
  const Eigen::MatrixXd& l = factor.lower;
  detail::fill_gaussian_paths(ens.paths, 1, l.triangularView<Eigen::Lower>(), seed);
  ens.diagnostics["jitter"] = factor.jitter;
  return ens;
}

struct RiemannCell {
  double mid;
  double width;
};

namespace detail {

inline void graded_cells(std::vector<RiemannCell>& cells, double pivot, double toward, double ratio,
                         double floor) {
  // Cells between pivot (singular) and toward, shrinking geometrically at pivot.
  const double d = toward - pivot;  // signed
  double frac = 1.0;
  while (frac > floor) {
    const double next = frac * ratio;
    const double a = pivot + d * next;
    const double b = pivot + d * frac;
    cells.push_back({0.5 * (a + b), std::abs(b - a)});
    frac = next;
  }
  cells.push_back({pivot + 0.5 * d * frac, std::abs(d * frac)});
}

// Segment [a, b] split into uniform cells of at most `mesh`, grading the
// cells adjacent to singular endpoints.
inline void segment_cells(std::vector<RiemannCell>& cells, double a, double b, bool sing_a,
                          bool sing_b, const RiemannSpec& rs) {
  const double len = b - a;
  if (!(len > 0.0)) return;
  std::size_t n = static_cast<std::size_t>(std::ceil(len / rs.mesh - 1e-9));
  n = std::max<std::size_t>(n, 1);
  if (n == 1 && sing_a && sing_b) n = 2;
  const double w = len / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = (i == 0) ? a : a + w * static_cast<double>(i);
    const double hi = (i + 1 == n) ? b : a + w * static_cast<double>(i + 1);
    if (i == 0 && sing_a) {
      graded_cells(cells, lo, hi, rs.grading_ratio, rs.grading_floor);
    } else if (i + 1 == n && sing_b) {
      graded_cells(cells, hi, lo, rs.grading_ratio, rs.grading_floor);
    } else {
      cells.push_back({0.5 * (lo + hi), hi - lo});
    }
  }
}

}  // namespace detail

/// Cells covering (-U, T) (or (0, T) when `one_sided`), singular at 0 and at
/// every time in `singular`.
inline std::vector<RiemannCell> riemann_cells(const std::vector<double>& singular, double horizon,
                                              double truncation, const RiemannSpec& rs,
                                              bool one_sided) {
  if (!(rs.mesh > 0.0) || !(rs.grading_ratio > 0.0 && rs.grading_ratio < 1.0) ||
      !(rs.grading_floor > 0.0) || !(rs.far_growth > 0.0)) {
    throw OutOfDomain("riemann", "invalid RiemannSpec");
  }
  std::vector<double> pts{0.0};
  for (const double t : singular)
    if (t > 0.0) pts.push_back(t);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  std::vector<RiemannCell> cells;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    detail::segment_cells(cells, pts[i], pts[i + 1], true, true, rs);
  }
  if (one_sided) return cells;

  const double near = std::min(horizon, truncation);
  detail::segment_cells(cells, -near, 0.0, false, true, rs);
  double x = near;
  while (x < truncation) {
    const double next = std::min(truncation, x * (1.0 + rs.far_growth));
    cells.push_back({-0.5 * (x + next), next - x});
    x = next;
  }
  return cells;
}

namespace detail {

// Smallest power-of-ten multiple of max(T, 1) meeting the tail budget.
template <class TailFn>
double choose_truncation(TailFn&& tail, double horizon, double budget) {
  double u = std::max(horizon, 1.0);
  for (int k = 0; k < 60; ++k, u *= 10.0) {
    if (tail(u) <= budget) return u;
  }
  throw TruncationError("no truncation below 1e60 meets the tail variance budget");
}

template <class Kernel>
Eigen::MatrixXd riemann_weights(const std::vector<double>& times, const std::vector<RiemannCell>& cells,
                                const KernelContext& ctx, Kernel&& kernel) {
  const double g = ctx.gamma();
  Eigen::MatrixXd w(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(cells.size()));
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const double u = cells[k].mid;
    const double scale = ctx.c * std::pow(std::abs(u), -0.5 * g) * std::sqrt(cells[k].width);
    for (std::size_t i = 0; i < times.size(); ++i) {
      w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = scale * kernel(times[i], u);
    }
  }
  return w;
}

}  // namespace detail

/// Approximate paths from the midpoint discretization of the defining white
/// noise integral; one set of cell normals per path is shared by all times.
inline PathEnsemble sample_riemann(const KernelContext& ctx, const Grid& grid, const RiemannSpec& rs,
                                   std::size_t num_paths, std::uint64_t seed) {
  detail::require_origin(grid);
  detail::require_positive_count(num_paths);
  const double T = grid.horizon();
  const double a = ctx.alpha();
  const bool one_sided = ctx.params.variant() == Variant::RiemannLiouville;
  const double var_t = std::pow(T, 2.0 * ctx.hurst());
  const double budget = rs.tail_fraction * var_t;

  double truncation = rs.left_truncation;
  double tail = 0.0;
  if (!one_sided) {
    auto tail_fn = [&](double u) { return left_tail_variance(ctx, T, u); };
    if (truncation <= 0.0) truncation = detail::choose_truncation(tail_fn, T, budget);
    tail = tail_fn(truncation);
    if (tail > budget) {
      throw TruncationError("tail variance " + std::to_string(tail) + " exceeds " +
                            std::to_string(budget) + " at U = " + std::to_string(truncation));
    }
  }

  const auto cells = riemann_cells(grid.times(), T, truncation, rs, one_sided);
  auto kernel = [a](double t, double u) {
    if (u >= t) return 0.0;
    if (u > 0.0) return std::pow(t - u, a);
    return pow_diff(-u, t, a);
  };
  const Eigen::MatrixXd w = detail::riemann_weights(grid.times(), cells, ctx, kernel);

  PathEnsemble ens{grid,
                   Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_paths),
                                         static_cast<Eigen::Index>(grid.size())),
                   Method::RiemannDiscretization,
                   seed,
                   ctx.params};
  detail::fill_gaussian_paths(ens.paths, 0, w, seed);
  ens.diagnostics["left_truncation"] = one_sided ? 0.0 : truncation;
  ens.diagnostics["tail_variance"] = tail;
  ens.diagnostics["cells"] = static_cast<double>(cells.size());
  ens.diagnostics["discretized_variance_T"] = w.row(w.rows() - 1).squaredNorm();
  ens.diagnostics["exact_variance_T"] = var_t;
  return ens;
}

/// Paths of dX/dt = c int_{-inf}^t a (t-s)^{a-1} |s|^{-g/2} dB(s) on a grid of
/// positive times, discretized like sample_riemann. Requires a > 1/2.
inline PathEnsemble sample_derivative(const KernelContext& ctx, const Grid& grid, const RiemannSpec& rs,
                                      std::size_t num_paths, std::uint64_t seed) {
  const double a = ctx.alpha();
  if (!(a > 0.5)) throw OutOfDomain("alpha", "derivative paths exist only for alpha > 1/2");
  detail::require_variant(ctx, Variant::FullRange, "sample_derivative");
  if (!(grid[0] > 0.0)) throw OutOfDomain("grid", "derivative grid must have times > 0");
  detail::require_positive_count(num_paths);
  const double T = grid.horizon();
  const double budget = rs.tail_fraction * derivative_variance(ctx, T);

  auto tail_fn = [&](double u) { return derivative_left_tail_variance(ctx, T, u); };
  double truncation = rs.left_truncation;
  if (truncation <= 0.0) truncation = detail::choose_truncation(tail_fn, T, budget);
  const double tail = tail_fn(truncation);
  if (tail > budget) {
    throw TruncationError("derivative tail variance exceeds budget at U = " + std::to_string(truncation));
  }

  const auto cells = riemann_cells(grid.times(), T, truncation, rs, false);
  auto kernel = [a](double t, double u) { return u < t ? a * std::pow(t - u, a - 1.0) : 0.0; };
  const Eigen::MatrixXd w = detail::riemann_weights(grid.times(), cells, ctx, kernel);

  PathEnsemble ens{grid,
                   Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_paths),
                                         static_cast<Eigen::Index>(grid.size())),
                   Method::Derivative,
                   seed,
                   ctx.params};
  detail::fill_gaussian_paths(ens.paths, 0, w, seed);
  ens.diagnostics["left_truncation"] = truncation;
  ens.diagnostics["tail_variance"] = tail;
  ens.diagnostics["cells"] = static_cast<double>(cells.size());
  ens.diagnostics["discretized_variance_T"] = w.row(w.rows() - 1).squaredNorm();
  return ens;
}

/// Linear interpolation of one path at time t within the grid.
inline double interpolate(const PathEnsemble& ens, std::size_t path, double t) {
  const auto& times = ens.grid.times();
  if (!(t >= times.front()) || t > times.back()) {
    throw InterpolationError("time " + std::to_string(t) + " outside grid [" +
                             std::to_string(times.front()) + ", " + std::to_string(times.back()) + "]");
  }
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  const auto j = static_cast<Eigen::Index>(it - times.begin());
  const auto row = static_cast<Eigen::Index>(path);
  if (*it == t) return ens.paths(row, j);
  const double t0 = times[static_cast<std::size_t>(j - 1)];
  const double t1 = times[static_cast<std::size_t>(j)];
  const double w = (t - t0) / (t1 - t0);
  return (1.0 - w) * ens.paths(row, j - 1) + w * ens.paths(row, j);
}

}  // namespace gfbm
