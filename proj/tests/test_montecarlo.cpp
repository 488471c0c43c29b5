#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gail/montecarlo.hpp"

using namespace gail;

namespace {

// ceil(log(2/alpha) / (2 abstol^2)) evaluated with mpmath at 50 digits
const double kAbstols[] = {1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4};
const double kAlphas[] = {0.1, 0.05, 0.01, 0.005, 0.001};
const Index kHoeffding[10][5] = {
    {150, 185, 265, 300, 381},
    {600, 738, 1060, 1199, 1521},
    {3745, 4612, 6623, 7490, 9502},
    {14979, 18445, 26492, 29958, 38005},
    {59915, 73778, 105967, 119830, 152019},
    {374467, 461110, 662290, 748934, 950113},
    {1497867, 1844440, 2649159, 2995733, 3800452},
    {5991465, 7377759, 10596635, 11982930, 15201805},
    {37446654, 46110994, 66228968, 74893307, 95011281},
    {149786614, 184443973, 264915869, 299573228, 380045123},
};

RandomGenerator uniform_power(double k) {
  return [k](Index n, const RngStream& s) -> Eigen::VectorXd {
    return uniform_stream(s, n).array().pow(k);
  };
}

McParams abs_params(double abstol, double alpha) {
  McParams p;
  p.tol = {abstol, 0.0, TolType::Max, 1.0};
  p.alpha = alpha;
  return p;
}

}  // namespace

TEST(Hoeffding, OracleGrid) {
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 5; ++j)
      EXPECT_EQ(hoeffding_n(kAbstols[i], kAlphas[j]), kHoeffding[i][j]) << kAbstols[i] << " " << kAlphas[j];
  EXPECT_EQ(hoeffding_n(0.05, 0.05), 738);
}

TEST(Hoeffding, InvalidInputs) {
  EXPECT_THROW(hoeffding_n(0.0, 0.01), ConfigError);
  EXPECT_THROW(hoeffding_n(1e-2, 0.0), ConfigError);
  EXPECT_THROW(hoeffding_n(1e-2, 1.0), ConfigError);
}

TEST(TwoStage, ChebyshevExample) {
  const double var = 1.0 / 12.0, fudge = 1.2, tol = 1e-2, am = 0.005;
  const double cheb = std::ceil(fudge * fudge * var / (am * tol * tol));
  EXPECT_EQ(cheb, 240000.0);
  const Index n = two_stage_n(var, fudge, tol, am, kurtmax_bound(10'000, alpha_sigma_split(0.01), fudge));
  EXPECT_LE(n, 240000);
  EXPECT_GE(n, 30);
}

TEST(TwoStage, SmallestSizeMeetingTheBound) {
  const double var = 0.3, fudge = 1.2, tol = 3e-3, am = 0.01;
  const double kurt = kurtmax_bound(10'000, alpha_sigma_split(0.02), fudge);
  const Index n = two_stage_n(var, fudge, tol, am, kurt);
  EXPECT_LE(certified_halfwidth(n, var, fudge, am, kurt), tol * (1 + 1e-12));
  EXPECT_GT(certified_halfwidth(n - 1, var, fudge, am, kurt), tol);
}

TEST(TwoStage, Monotone) {
  const double kurt = kurtmax_bound(10'000, alpha_sigma_split(0.01), 1.2);
  Index prev = std::numeric_limits<Index>::max();
  for (double tol = 1e-4; tol < 1; tol *= 1.7) {
    const Index n = two_stage_n(0.5, 1.2, tol, 0.005, kurt);
    EXPECT_LE(n, prev);
    prev = n;
  }
  prev = 0;
  for (double v = 1e-4; v < 10; v *= 1.9) {
    const Index n = two_stage_n(v, 1.2, 1e-3, 0.005, kurt);
    EXPECT_GE(n, prev);
    prev = n;
  }
}

TEST(Kurtmax, NondecreasingInFudge) {
  double prev = 0;
  for (double f = 1.05; f < 5; f += 0.1) {
    const double k = kurtmax_bound(10'000, alpha_sigma_split(0.01), f);
    EXPECT_GE(k, prev);
    prev = k;
  }
}

TEST(MeanMc, AbsoluteTolerance) {
  McResult r = mean_mc(uniform_power(2), abs_params(1e-3, 0.05), RngStream(1, 0));
  EXPECT_TRUE(r.diag.clean());
  EXPECT_NEAR(r.estimate, 1.0 / 3.0, 1e-3);
  EXPECT_EQ(r.trace.ntot, 10'000 + r.trace.n_per_iter.back());
  EXPECT_EQ(r.trace.nremain, r.diag.extra["nremain"].get<Index>());
}

TEST(MeanMc, RelativeTolerance) {
  McParams p;
  p.tol = {0.0, 1e-2, TolType::Max, 1.0};
  p.alpha = 0.05;
  RandomGenerator y = [](Index n, const RngStream& s) -> Eigen::VectorXd {
    return uniform_stream(s, n).array().cos();
  };
  McResult r = mean_mc(y, p, RngStream(2, 0));
  EXPECT_TRUE(r.diag.clean());
  EXPECT_NEAR(r.estimate, std::sin(1.0), 1e-2 * std::sin(1.0));
  EXPECT_GE(r.trace.tau, 1);
  EXPECT_EQ(r.trace.hmu.size(), r.trace.tol_per_iter.size());
}

TEST(MeanMc, ConstantVariableStopsImmediately) {
  RandomGenerator y = [](Index n, const RngStream&) -> Eigen::VectorXd { return Eigen::VectorXd::Constant(n, 2.5); };
  McResult r = mean_mc(y, abs_params(1e-4, 0.01), RngStream(3, 0));
  EXPECT_EQ(r.estimate, 2.5);
  EXPECT_EQ(r.diag.errest, 0.0);
  EXPECT_TRUE(r.diag.clean());
}

TEST(MeanMc, ReproducibleAndThreadIndependent) {
  McParams p = abs_params(2e-3, 0.01);
  McResult a = mean_mc(uniform_power(3), p, RngStream(7, 4));
  McResult b = mean_mc(uniform_power(3), p, RngStream(7, 4));
  p.threads = 4;
  McResult c = mean_mc(uniform_power(3), p, RngStream(7, 4));
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.estimate, c.estimate);
  EXPECT_EQ(to_json(a.diag).dump(), to_json(c.diag).dump());
}

TEST(MeanMc, BudgetFlag) {
  McParams p = abs_params(1e-5, 0.01);
  p.budget.nbudget = 50'000;
  McResult r = mean_mc(uniform_power(2), p, RngStream(1, 0));
  EXPECT_TRUE(r.diag.flag(1));
  EXPECT_LE(r.trace.ntot, 50'000);
  EXPECT_GT(r.diag.errest, 1e-5);
}

TEST(MeanMc, CoverageOnUniformSquare) {
  const int reps = 100;
  int fails = 0;
  for (int i = 0; i < reps; ++i) {
    McResult r = mean_mc(uniform_power(2), abs_params(5e-3, 0.05), RngStream(1000, static_cast<std::uint64_t>(i)));
    if (std::abs(r.estimate - 1.0 / 3.0) > 5e-3) ++fails;
  }
  EXPECT_LE(fails, static_cast<int>(reps * (0.05 + 3 * std::sqrt(0.05 * 0.95 / reps))));
}

TEST(MeanMc, InvalidInputs) {
  EXPECT_THROW(mean_mc(uniform_power(1), abs_params(1e-3, 1.5), RngStream()), ConfigError);
  McParams p = abs_params(1e-3, 0.01);
  p.fudge = 1.0;
  EXPECT_THROW(mean_mc(uniform_power(1), p, RngStream()), ConfigError);
  RandomGenerator short_gen = [](Index n, const RngStream&) { return Eigen::VectorXd::Zero(n / 2); };
  EXPECT_THROW(mean_mc(short_gen, abs_params(1e-3, 0.01), RngStream()), EvaluationError);
  RandomGenerator nan_gen = [](Index n, const RngStream&) {
    return Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  };
  EXPECT_THROW(mean_mc(nan_gen, abs_params(1e-3, 0.01), RngStream()), EvaluationError);
}

TEST(MeanMcBer, HoeffdingSampleAndAccuracy) {
  McResult r = mean_mc_ber(bernoulli_generator(1.0 / 9.0), 1e-3, 0.01, 1'000'000'000, RngStream(5, 0));
  EXPECT_TRUE(r.diag.clean());
  EXPECT_EQ(r.diag.n_evals, hoeffding_n(1e-3, 0.01));
  EXPECT_NEAR(r.estimate, 1.0 / 9.0, 1e-3);
}

TEST(MeanMcBer, BudgetFlag) {
  McResult r = mean_mc_ber(bernoulli_generator(0.5), 1e-3, 0.01, 1000, RngStream(5, 0));
  EXPECT_TRUE(r.diag.flag(1));
  EXPECT_EQ(r.diag.n_evals, 1000);
  EXPECT_GT(r.diag.errest, 1e-3);
}

TEST(MeanMcBer, RejectsNonBinaryValues) {
  RandomGenerator g = [](Index n, const RngStream&) { return Eigen::VectorXd::Constant(n, 0.5); };
  EXPECT_THROW(mean_mc_ber(g, 1e-2, 0.05, 100000, RngStream()), EvaluationError);
  EXPECT_THROW(bernoulli_generator(1.5), ConfigError);
}

TEST(MeanMcBer, ThreadIndependent) {
  McResult a = mean_mc_ber(bernoulli_generator(0.3), 2e-3, 0.01, 1'000'000'000, RngStream(9, 1), 1);
  McResult b = mean_mc_ber(bernoulli_generator(0.3), 2e-3, 0.01, 1'000'000'000, RngStream(9, 1), 3);
  EXPECT_EQ(a.estimate, b.estimate);
}

TEST(Hyperbox, ValidationCodes) {
  const double inf = std::numeric_limits<double>::infinity();
  auto code = [](const Hyperbox& b) {
    try {
      b.validate();
    } catch (const ConfigError& e) {
      return e.code();
    }
    return 0;
  };
  Hyperbox ok = Hyperbox::unit(3);
  EXPECT_EQ(code(ok), 0);
  EXPECT_EQ(code(Hyperbox::gaussian(2)), 0);
  Hyperbox b = ok;
  b.upper[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(code(b), 10);
  b = ok;
  b.upper.resize(2);
  EXPECT_EQ(code(b), 11);
  b = ok;
  b.upper[0] = 0;
  EXPECT_EQ(code(b), 12);
  b = ok;
  b.upper[2] = inf;
  EXPECT_EQ(code(b), 13);
  b = Hyperbox::gaussian(2);
  b.upper[0] = 4;
  EXPECT_EQ(code(b), 14);
  EXPECT_DOUBLE_EQ((Hyperbox{Eigen::Vector2d(0, -1), Eigen::Vector2d(2, 2), Measure::Uniform}).volume(), 6.0);
}

TEST(CubMc, SineOnInterval) {
  Hyperbox box{Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 2.0), Measure::Uniform};
  McParams p;
  p.tol = {1e-3, 1e-2, TolType::Max, 1.0};
  Integrand f = [](const Eigen::MatrixXd& x) -> Eigen::VectorXd { return x.col(0).array().sin(); };
  McResult r = cub_mc(f, box, p, RngStream(4, 0));
  const double truth = std::cos(1.0) - std::cos(2.0);
  EXPECT_TRUE(r.diag.clean());
  EXPECT_NEAR(r.estimate, truth, tolfun(p.tol, truth));
}

TEST(CubMc, VolumeScaling) {
  Hyperbox box{Eigen::Vector2d(-1, 0), Eigen::Vector2d(3, 0.5), Measure::Uniform};
  McParams p;
  p.tol = {1e-2, 0, TolType::Max, 1.0};
  Integrand f = [](const Eigen::MatrixXd& x) -> Eigen::VectorXd { return x.col(0) + x.col(1); };
  McResult r = cub_mc(f, box, p, RngStream(4, 1));
  // volume 2 times mean (1 + 0.25)
  EXPECT_NEAR(r.estimate, 2.5, 1e-2);
  EXPECT_DOUBLE_EQ(r.diag.extra["volume"].get<double>(), 2.0);
}

TEST(CubMc, GaussianMeasure) {
  McParams p;
  p.tol = {0, 1e-2, TolType::Max, 1.0};
  Integrand f = [](const Eigen::MatrixXd& x) -> Eigen::VectorXd { return (-x.rowwise().squaredNorm().array()).exp(); };
  McResult r = cub_mc(f, Hyperbox::gaussian(2), p, RngStream(4, 2));
  EXPECT_NEAR(r.estimate, 1.0 / 3.0, 1e-2 / 3.0);
}
