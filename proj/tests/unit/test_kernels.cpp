#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "gfbm/kernels.hpp"

using namespace gfbm;

namespace {

KernelContext ctx_of(double a, double g, Variant v = Variant::FullRange) {
  return make_context(ModelParams::validate(a, g, v));
}

// Independent high-precision quadrature of the defining integrals (30 digits).
struct KernelCase {
  double alpha, gamma, psi_half_one, phi_03_07;
};
const KernelCase kKernelTable[] = {
    {0.25, 0.5, 0.649465381838032629, 0.179164730725920664},
    {-0.1, 0.3, 0.629919790166039488, 0.423724146838530761},
    {0.625, 0.75, 0.584429102664684936, 0.144241958081154258},
};

const std::pair<double, double> kPairs[] = {{0.25, 0.5}, {-0.1, 0.3}, {0.625, 0.75}, {0.0, 0.0},
                                            {0.3, 0.0}, {0.7, 0.6}, {-0.3, 0.1}};

}  // namespace

TEST(Psi, Examples) {
  for (const auto& [a, g] : kPairs) {
    const auto ctx = ctx_of(a, g);
    EXPECT_EQ(psi(ctx, 0.0, 0.7), 0.0);
    for (const double t : {0.3, 1.0, 2.5}) {
      EXPECT_NEAR(psi(ctx, t, t), std::pow(t, 2 * ctx.hurst()), 1e-9 * std::pow(t, 2 * ctx.hurst()));
    }
  }
  const auto fbm = ctx_of(0.2, 0.0);
  const double h = fbm.hurst();
  EXPECT_NEAR(psi(fbm, 1.0, 2.0), std::pow(2.0, 2 * h - 1), 1e-9);
}

TEST(Psi, IndependentOracle) {
  for (const auto& c : kKernelTable) {
    const auto ctx = ctx_of(c.alpha, c.gamma);
    EXPECT_NEAR(psi(ctx, 0.5, 1.0), c.psi_half_one, 1e-9) << c.alpha;
    EXPECT_NEAR(psi(ctx, 1.0, 0.5), c.psi_half_one, 1e-9) << c.alpha;
    EXPECT_NEAR(phi(ctx, 0.3, 0.7), c.phi_03_07, 1e-9) << c.alpha;
  }
}

TEST(Phi, Examples) {
  for (const auto& [a, g] : kPairs) {
    const auto ctx = ctx_of(a, g);
    EXPECT_EQ(phi(ctx, 0.4, 0.4), 0.0);
    EXPECT_NEAR(phi(ctx, 0.0, 0.8), std::pow(0.8, 2 * ctx.hurst()), 1e-9);
  }
  const auto fbm = ctx_of(-0.2, 0.0);
  EXPECT_NEAR(phi(fbm, 0.3, 0.9), std::pow(0.6, 2 * fbm.hurst()), 1e-9);
  EXPECT_THROW(phi(fbm, -1.0, 0.5), OutOfDomain);
}

TEST(PhiDecomposition, SumsToPhiAndMeetsBounds) {
  for (const auto& [a, g] : kPairs) {
    const auto ctx = ctx_of(a, g);
    const double H = ctx.hurst();
    for (const auto& [s, t] : {std::pair{0.2, 0.3}, {0.5, 1.0}, {0.05, 0.9}}) {
      const auto d = phi_decomposition(ctx, s, t);
      EXPECT_NEAR(d.total(), phi(ctx, s, t), 1e-9);
      EXPECT_GE(d.c1_sq, 0.0);
      EXPECT_GE(d.c2_sq, 0.0);
      EXPECT_GE(d.c3_sq, 0.0);
      if (g > 0.0) {
        const double gap = std::pow(t - s, 2 * H);
        EXPECT_LE(d.c2_sq, ctx.c2() * beta(1 + 2 * a, 1 - g) * gap * (1 + 1e-9));
        EXPECT_LE(d.c1_sq, ctx.c2() * 4 * beta(1 - g, g) * gap * (1 + 1e-9));
      }
    }
  }
  EXPECT_THROW(phi_decomposition(ctx_of(0.25, 0.5), 0.0, 1.0), OutOfDomain);
  EXPECT_THROW(phi_decomposition(ctx_of(0.25, 0.5, Variant::RiemannLiouville), 0.5, 1.0), OutOfDomain);
}

TEST(LowerBound, Examples) {
  const auto ctx = ctx_of(0.5, 0.5);
  const double s = 0.3, t = 0.5;
  EXPECT_NEAR(phi_lower_bound(ctx, s, t),
              ctx.c2() / ((1 - 0.5) * (2 - 0.5)) * std::pow(t - s, 1.5), 1e-15);
  EXPECT_LT(phi_lower_bound(ctx_of(0.25, 0.5), 0.5, 0.5 + 1e-9), 1e-9);
  EXPECT_THROW(phi_lower_bound(ctx_of(0.6, 0.5), 0.2, 0.3), OutOfDomain);
  EXPECT_THROW(phi_lower_bound(ctx_of(0.25, 0.0), 0.2, 0.3), OutOfDomain);
  EXPECT_THROW(phi_lower_bound(ctx_of(-0.1, 0.3), 0.2, 0.3), OutOfDomain);
}

TEST(LowerBound, BelowPhiOnGrid) {
  for (const auto& [a, g] : {std::pair{0.25, 0.5}, {0.1, 0.8}, {0.4, 0.2}, {0.49, 0.5}}) {
    const auto ctx = ctx_of(a, g);
    for (int i = 1; i <= 16; ++i)
      for (int j = i + 1; j <= 16; ++j) {
        const double s = i / 16.0, t = j / 16.0;
        EXPECT_LE(phi_lower_bound(ctx, s, t), phi(ctx, s, t) * (1 + 1e-9)) << a << " " << s << " " << t;
      }
  }
}

// At alpha = 1/2 the (t-s)^{2-g} bound exceeds the very integral it is meant to
// bound from below: int_s^t (t-u) u^{-g} du = 0.1548 at g = 1/2, s = 1/2, t = 1.
TEST(LowerBound, HalfAlphaBranchExceedsPhi) {
  const auto ctx = ctx_of(0.5, 0.5);
  const double on_gap = ctx.c2() * (4.0 / 3.0 - (2.0 * std::sqrt(0.5) - (2.0 / 3.0) * std::pow(0.5, 1.5)));
  EXPECT_NEAR(phi_decomposition(ctx, 0.5, 1.0).c2_sq, on_gap, 1e-12);
  EXPECT_GT(phi_lower_bound(ctx, 0.5, 1.0), on_gap);
  // For short increments it exceeds the whole of phi as well.
  EXPECT_GT(phi_lower_bound(ctx, 0.5, 0.501), phi(ctx, 0.5, 0.501));
}

TEST(RiemannLiouville, Examples) {
  for (const auto& [a, g] : {std::pair{0.25, 0.5}, {-0.1, 0.3}, {0.0, 0.0}, {0.6, 0.5}}) {
    const auto ctx = ctx_of(a, g, Variant::RiemannLiouville);
    EXPECT_NEAR(psi_rl(ctx, 0.7, 0.7), std::pow(0.7, 2 * ctx.hurst()), 1e-9);
    EXPECT_EQ(psi_rl(ctx, 0.0, 0.7), 0.0);
    const double s = 0.35, t = 0.9;
    EXPECT_NEAR(phi_rl(ctx, s, t), psi_rl(ctx, s, s) + psi_rl(ctx, t, t) - 2 * psi_rl(ctx, s, t), 1e-9);
    EXPECT_EQ(psi(ctx, s, t), psi_rl(ctx, s, t));
  }
  EXPECT_THROW(psi_rl(ctx_of(0.25, 0.5), 0.1, 0.2), OutOfDomain);
}

TEST(DerivativeVariance, Examples) {
  const auto ctx = ctx_of(0.7, 0.6);
  // Beta-function form of the bracket, evaluated independently at 30 digits.
  EXPECT_NEAR(derivative_variance(ctx, 1.0), 0.947456058819492695, 1e-9);
  EXPECT_NEAR(derivative_variance(ctx, 2.0) / derivative_variance(ctx, 1.0),
              std::pow(2.0, 2 * ctx.hurst() - 2), 1e-10);
  EXPECT_THROW(derivative_variance(ctx_of(0.5, 0.5), 1.0), OutOfDomain);
  EXPECT_THROW(derivative_variance(ctx, 0.0), OutOfDomain);
}

TEST(DerivativeVariance, DifferenceQuotientLimit) {
  const auto ctx = ctx_of(0.7, 0.6);
  const double dv = derivative_variance(ctx, 1.0);
  double prev = 1.0;
  for (int k = 4; k <= 12; k += 2) {
    const double h = std::ldexp(1.0, -k);
    const double err = std::abs(phi(ctx, 1.0, 1.0 + h) / (h * h) / dv - 1.0);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 0.01);
}

TEST(Holder, ConstantAtFbmIsOne) { EXPECT_EQ(holder_constant(ctx_of(0.3, 0.0)), 1.0); }

TEST(KernelProperties, SelfSimilarity) {
  for (const auto& [a, g] : kPairs) {
    const auto ctx = ctx_of(a, g);
    const double H = ctx.hurst();
    for (const double r : {0.5, 2.0, 10.0}) {
      for (const auto& [s, t] : {std::pair{0.1, 0.4}, {0.5, 1.0}, {0.9, 0.95}}) {
        const double base = psi(ctx, s, t);
        EXPECT_NEAR(psi(ctx, r * s, r * t), std::pow(r, 2 * H) * base, 1e-6 * std::abs(base)) << a << "," << g;
        const double pb = phi(ctx, s, t);
        EXPECT_NEAR(phi(ctx, r * s, r * t), std::pow(r, 2 * H) * pb, 1e-6 * pb);
      }
    }
  }
}

TEST(KernelProperties, Bilinearity) {
  for (const auto& [a, g] : kPairs) {
    const auto ctx = ctx_of(a, g);
    for (const auto& [s, t] : {std::pair{0.1, 0.4}, {0.5, 1.0}, {0.3, 0.31}}) {
      EXPECT_NEAR(phi(ctx, s, t), psi(ctx, s, s) + psi(ctx, t, t) - 2 * psi(ctx, s, t), 1e-9);
    }
  }
}

TEST(KernelProperties, FbmReduction) {
  for (const double a : {-0.4, -0.1, 0.2, 0.45}) {
    const auto ctx = ctx_of(a, 0.0);
    const double H = ctx.hurst();
    for (int i = 1; i <= 8; ++i)
      for (int j = 1; j <= 8; ++j) {
        const double s = i / 8.0, t = j / 8.0 + 0.01;
        const double cov = fbm_covariance(H, s, t);
        EXPECT_NEAR(psi(ctx, s, t), cov, 1e-6 * std::abs(cov));
        const double inc = fbm_increment_variance(H, s, t);
        EXPECT_NEAR(phi(ctx, s, t), inc, 1e-6 * inc);
      }
  }
}

TEST(KernelProperties, NonStationarityWitness) {
  const auto ctx = ctx_of(0.25, 0.5);
  double gap = 0.0;
  for (const double s : {0.1, 0.5, 1.0}) gap = std::max(gap, std::abs(phi(ctx, s, s + 0.1) - phi(ctx, 0.0, 0.1)));
  EXPECT_GT(gap, 1e-3);
}

TEST(KernelProperties, HolderBoundOnGrid) {
  for (const auto& [a, g] : {std::pair{0.25, 0.5}, {-0.1, 0.3}, {0.625, 0.75}}) {
    const auto ctx = ctx_of(a, g);
    const double H = ctx.hurst();
    const double bound = holder_constant(ctx);
    double worst = 0.0;
    const int n = 100;
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j) {
        const double s = double(i) / n, t = double(j) / n;
        worst = std::max(worst, phi(ctx, s, t) / std::pow(t - s, 2 * H));
      }
    EXPECT_TRUE(std::isfinite(worst));
    EXPECT_LE(worst, bound) << a << "," << g;
  }
}

TEST(KernelProperties, CovariancePsd) {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (const auto& [a, g] : {std::pair{0.25, 0.5}, {-0.1, 0.3}, {0.7, 0.6}}) {
    const auto ctx = ctx_of(a, g);
    std::vector<double> t;
    for (int i = 0; i < 96; ++i) t.push_back(u(gen));
    std::sort(t.begin(), t.end());
    const auto n = static_cast<Eigen::Index>(t.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i; j < n; ++j) m(i, j) = m(j, i) = psi(ctx, t[i], t[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8 * m.trace() / static_cast<double>(n));
  }
}
