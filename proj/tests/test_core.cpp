#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gail/core.hpp"

using namespace gail;

TEST(Tolfun, DocumentedValues) {
  EXPECT_DOUBLE_EQ(tolfun({1e-2, 1e-1, TolType::Max, 1.0}, 0.0), 1e-2);
  EXPECT_DOUBLE_EQ(tolfun({1e-3, 0.5, TolType::Comb, 1.0}, 7.0), 1e-3);
  EXPECT_DOUBLE_EQ(tolfun({1e-2, 1e-1, TolType::Max, 1.0}, 0.5), 5e-2);
}

TEST(Tolfun, CombIsLinearInTheta) {
  ToleranceSpec t{1e-3, 1e-2, TolType::Comb, 0.25};
  EXPECT_NEAR(tolfun(t, 3.0), 0.25 * 1e-3 + 0.75 * 1e-2 * 3.0, 1e-17);
}

TEST(Tolfun, MonotoneAndBracketed) {
  std::mt19937_64 eng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double abstol = u(eng) * 1e-2, reltol = u(eng) * 0.5, theta = u(eng), mu = u(eng) * 10;
    const double dmu = u(eng), da = u(eng) * 1e-3, dr = u(eng) * 0.1;
    for (TolType tt : {TolType::Max, TolType::Comb}) {
      ToleranceSpec s{abstol, reltol, tt, theta};
      const double base = tolfun(s, mu);
      EXPECT_GE(base, 0.0);
      EXPECT_LE(base, tolfun(s, mu + dmu));
      EXPECT_LE(base, tolfun({abstol + da, reltol, tt, theta}, mu));
      EXPECT_LE(base, tolfun({abstol, reltol + dr, tt, theta}, mu));
      if (tt == TolType::Max) {
        EXPECT_GE(base, std::min(abstol, reltol * mu));
      } else {
        const double lo = std::min(abstol, reltol * mu), hi = std::max(abstol, reltol * mu);
        EXPECT_GE(base, lo - 1e-15);
        EXPECT_LE(base, hi + 1e-15);
      }
    }
  }
}

TEST(Tolfun, InvalidSpecsThrow) {
  EXPECT_THROW(tolfun({-1e-3, 0.1, TolType::Max, 1.0}, 1.0), ConfigError);
  EXPECT_THROW(tolfun({1e-3, 1.5, TolType::Max, 1.0}, 1.0), ConfigError);
  EXPECT_THROW(tolfun({1e-3, 0.1, TolType::Comb, 1.5}, 1.0), ConfigError);
  EXPECT_THROW(tolfun({0.0, 0.0, TolType::Max, 1.0}, 1.0), ConfigError);
}

TEST(TolType, StringRoundTrip) {
  EXPECT_EQ(toltype_from_string(to_string(TolType::Max)), TolType::Max);
  EXPECT_EQ(toltype_from_string(to_string(TolType::Comb)), TolType::Comb);
  EXPECT_THROW(toltype_from_string("sum"), ConfigError);
}

TEST(RngStream, EmptyAndDeterministic) {
  EXPECT_EQ(uniform_stream(RngStream(42, 0), 0).size(), 0);
  EXPECT_EQ(normal_stream(RngStream(42, 0), 0).size(), 0);
  Eigen::VectorXd a = uniform_stream(RngStream(42, 0), 100);
  Eigen::VectorXd b = uniform_stream(RngStream(42, 0), 100);
  EXPECT_EQ(a, b);
  EXPECT_GE(a.minCoeff(), 0.0);
  EXPECT_LT(a.maxCoeff(), 1.0);
}

TEST(RngStream, DistinctIndicesUncorrelated) {
  const Index n = 100'000;
  Eigen::VectorXd a = uniform_stream(RngStream(42, 0), n);
  Eigen::VectorXd b = uniform_stream(RngStream(42, 1), n);
  Eigen::ArrayXd ca = a.array() - a.mean(), cb = b.array() - b.mean();
  const double rho = (ca * cb).sum() / std::sqrt((ca * ca).sum() * (cb * cb).sum());
  EXPECT_LT(std::abs(rho), 0.02);
  EXPECT_NE(a[0], b[0]);
}

TEST(RngStream, ChildrenDifferFromParentAndEachOther) {
  RngStream root(5, 3);
  Eigen::VectorXd p = uniform_stream(root, 4);
  Eigen::VectorXd c0 = uniform_stream(root.child(0), 4);
  Eigen::VectorXd c1 = uniform_stream(root.child(1), 4);
  EXPECT_NE(p, c0);
  EXPECT_NE(c0, c1);
  EXPECT_EQ(c1, uniform_stream(RngStream(5, 3).child(1), 4));
}

TEST(NormalStream, Moments) {
  Eigen::VectorXd z = normal_stream(RngStream(9, 0), 1'000'000);
  const double m = z.mean();
  const double v = (z.array() - m).square().sum() / static_cast<double>(z.size() - 1);
  EXPECT_LT(std::abs(m), 0.005);
  EXPECT_LT(std::abs(v - 1.0), 0.01);
}

TEST(Normal, InverseAgainstReference) {
  // reference quantiles from scipy.stats.norm.ppf
  const std::pair<double, double> ref[] = {{1e-10, -6.361340902404056},  {0.001, -3.090232306167813},
                                           {0.02425, -1.972961051311885}, {0.3, -0.5244005127080409},
                                           {0.975, 1.959963984540054},    {0.999999, 4.753424308817087}};
  for (auto [p, x] : ref) EXPECT_NEAR(norm_inv(p), x, 1e-9 * std::max(1.0, std::abs(x))) << p;
  EXPECT_NEAR(norm_inv(1e-300), -37.0470962993612, 1e-6);
  EXPECT_EQ(norm_inv(0.5), 0.0);
}

TEST(Normal, CdfAgainstReference) {
  EXPECT_NEAR(norm_cdf(-1.0), 0.15865525393145707, 1e-15);
  EXPECT_NEAR(norm_cdf(1.0), 0.8413447460685429, 1e-15);
  EXPECT_NEAR(norm_cdf(3.5), 0.9997673709209645, 1e-15);
  EXPECT_NEAR(norm_cdf(-8.0) / 6.22096057427174e-16, 1.0, 1e-12);
  EXPECT_EQ(norm_cdf(0.0), 0.5);
}

TEST(Normal, EndpointsClampedFinite) {
  EXPECT_TRUE(std::isfinite(norm_inv(0.0)));
  EXPECT_TRUE(std::isfinite(norm_inv(1.0)));
  EXPECT_LT(norm_inv(0.0), -37.0);
  EXPECT_GT(norm_inv(1.0), 8.0);
}

TEST(Normal, RoundTripProperty) {
  std::mt19937_64 eng(11);
  for (int i = 0; i < 10000; ++i) {
    const double p = to_unit(eng());
    if (p < 1e-12 || p > 1 - 1e-12) continue;
    const double back = norm_cdf(norm_inv(p));
    EXPECT_NEAR(back, p, 1e-13 + 1e-12 * p);
  }
}

TEST(AlphaSplit, MultiplicativeComplement) {
  const double a = 0.01;
  const double s = alpha_sigma_split(a);
  EXPECT_NEAR(s, 1 - std::sqrt(0.99), 1e-16);
  EXPECT_NEAR((1 - s) * (1 - s), 1 - a, 1e-15);
}

TEST(Budget, Validate) {
  Budget b;
  EXPECT_NO_THROW(b.validate());
  b.nmax = 0;
  EXPECT_THROW(b.validate(), ConfigError);
}

TEST(Diagnostics, FlagsAndJson) {
  SolverDiagnostics d;
  d.algorithm = Algorithm::CubSobol;
  d.elapsed_seconds = 1.5;
  EXPECT_TRUE(d.clean());
  d.set_flag(2);
  EXPECT_TRUE(d.flag(2));
  EXPECT_FALSE(d.flag(1));
  auto j = to_json(d);
  EXPECT_EQ(j["algorithm"], "cubsobol");
  EXPECT_EQ(j["exit_flags"], nlohmann::ordered_json::array({2}));
  EXPECT_FALSE(j.contains("elapsed_seconds"));
  EXPECT_DOUBLE_EQ(to_json(d, true)["elapsed_seconds"].get<double>(), 1.5);
}
