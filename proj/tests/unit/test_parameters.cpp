#include <gtest/gtest.h>

#include <random>

#include "gfbm/parameters.hpp"

using namespace gfbm;

TEST(Validate, BrownianMotion) {
  const auto p = ModelParams::validate(0.0, 0.0);
  EXPECT_DOUBLE_EQ(p.hurst(), 0.5);
  EXPECT_EQ(p.variant(), Variant::FullRange);
}

TEST(Validate, HalfHurstWithSingularity) {
  EXPECT_DOUBLE_EQ(ModelParams::validate(0.25, 0.5).hurst(), 0.5);
}

TEST(Validate, AlphaAboveUpperEdge) {
  try {
    ModelParams::validate(0.7, 0.2);
    FAIL() << "expected OutOfDomain";
  } catch (const OutOfDomain& e) {
    EXPECT_EQ(e.param(), "alpha");
  }
}

TEST(Validate, GammaOutOfRange) {
  for (const double g : {-0.1, 1.0, 1.5}) {
    try {
      ModelParams::validate(0.0, g);
      FAIL() << g;
    } catch (const OutOfDomain& e) {
      EXPECT_EQ(e.param(), "gamma");
    }
  }
}

TEST(Validate, EndpointsRejectedExactly) {
  EXPECT_THROW(ModelParams::validate(0.6, 0.2), OutOfDomain);
  EXPECT_THROW(ModelParams::validate(-0.4, 0.2), OutOfDomain);
  EXPECT_NO_THROW(ModelParams::validate(std::nextafter(0.6, 0.0), 0.2));
  EXPECT_THROW(ModelParams::validate(std::nan(""), 0.2), OutOfDomain);
}

TEST(FromHurst, Examples) {
  EXPECT_DOUBLE_EQ(ModelParams::from_hurst(0.25, 0.75).alpha(), 0.125);
  EXPECT_DOUBLE_EQ(ModelParams::from_hurst(0.75, 0.75).alpha(), 0.625);
  EXPECT_DOUBLE_EQ(ModelParams::from_hurst(0.5, 0.0).alpha(), 0.0);
  EXPECT_THROW(ModelParams::from_hurst(1.0, 0.5), OutOfDomain);
  EXPECT_THROW(ModelParams::from_hurst(0.5, 1.0), OutOfDomain);
}

TEST(Classify, Examples) {
  const auto d = classify(ModelParams::validate(0.6, 0.5));
  EXPECT_EQ(d.regime, Regime::Differentiable);
  EXPECT_NEAR(ModelParams::validate(0.6, 0.5).hurst(), 0.85, 1e-15);
  EXPECT_EQ(classify(ModelParams::validate(0.5, 0.5)).regime, Regime::NonDifferentiable);
  const auto bm = classify(ModelParams::validate(0.0, 0.0));
  EXPECT_EQ(bm.regime, Regime::NonDifferentiable);
  EXPECT_TRUE(bm.is_bm);
  EXPECT_TRUE(bm.is_fbm);
  EXPECT_FALSE(bm.h_half_non_bm);
  EXPECT_TRUE(classify(ModelParams::validate(0.25, 0.5)).h_half_non_bm);
  EXPECT_EQ(classify(0.7, 0.2).regime, Regime::Invalid);
}

TEST(Classify, RegionBoundaryAtHalf) {
  for (const double g : {0.1, 0.5, 0.9}) {
    EXPECT_EQ(classify(ModelParams::validate(0.5, g)).regime, Regime::NonDifferentiable);
    EXPECT_EQ(classify(ModelParams::validate(0.5 + 1e-9, g)).regime, Regime::Differentiable);
  }
}

TEST(Json, RoundTrip) {
  const auto p = ModelParams::validate(-0.1, 0.3, Variant::RiemannLiouville);
  const nlohmann::json j = p;
  EXPECT_EQ(j.at("variant"), "rl");
  EXPECT_EQ(params_from_json(j), p);
  EXPECT_THROW(parse_variant("left"), OutOfDomain);
}

// Random draws over the whole valid domain.
class ParameterProperties : public ::testing::Test {
 protected:
  std::vector<ModelParams> sample(int n) {
    std::mt19937_64 gen(20240611);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ModelParams> out;
    while (static_cast<int>(out.size()) < n) {
      const double g = 0.999 * u(gen);
      const double a = -0.5 + 0.5 * g + u(gen);
      try {
        out.push_back(ModelParams::validate(a, g));
      } catch (const OutOfDomain&) {
      }
    }
    return out;
  }
};

TEST_F(ParameterProperties, HurstInUnitInterval) {
  for (const auto& p : sample(2000)) {
    EXPECT_GT(p.hurst(), 0.0);
    EXPECT_LT(p.hurst(), 1.0);
    EXPECT_EQ(p.hurst(), p.alpha() - 0.5 * p.gamma() + 0.5);
  }
}

TEST_F(ParameterProperties, FromHurstRoundTrip) {
  for (const auto& p : sample(2000)) {
    const auto q = ModelParams::from_hurst(p.hurst(), p.gamma());
    EXPECT_NEAR(q.alpha(), p.alpha(), 1e-15);
    EXPECT_EQ(q.gamma(), p.gamma());
  }
}

TEST_F(ParameterProperties, FbmNeverDifferentiable) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-0.4999, 0.4999);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(classify(ModelParams::validate(u(gen), 0.0)).regime, Regime::NonDifferentiable);
  }
}
