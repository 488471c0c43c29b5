#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gail/univariate.hpp"

using namespace gail;

namespace {

IntervalProblem problem(UnivariateFn f, double a = 0, double b = 1, double abstol = 1e-6) {
  IntervalProblem p;
  p.f = std::move(f);
  p.a = a;
  p.b = b;
  p.abstol = abstol;
  return p;
}

UnivariateFn square() {
  return [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x.array().square(); };
}

double sup_error(const FunappxResult& r, const std::function<double(double)>& f, double a, double b) {
  Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(100'000, a, b);
  Eigen::VectorXd ys = eval_approx(r.approx, xs);
  double e = 0;
  for (Index i = 0; i < xs.size(); ++i) e = std::max(e, std::abs(ys[i] - f(xs[i])));
  return e;
}

}  // namespace

TEST(NinitRule, PrintedValues) {
  EXPECT_EQ(ninit_rule(10, 1000, 0, 1), 100);
  EXPECT_EQ(ninit_rule(10, 1000, 0, 100), 956);
  EXPECT_EQ(ninit_rule(10, 100, -20, 20), 95);
  EXPECT_EQ(ninit_rule(10, 1000, -10, 50), 928);
  EXPECT_EQ(ninit_rule(10, 10, -2, 2), 10);
  EXPECT_EQ(ninit_rule(10, 100, -13, 8), 91);
  EXPECT_EQ(ninit_rule(10, 100, -2, 2), 64);
}

TEST(NinitRule, ClampedAndValidated) {
  for (double len : {1e-6, 0.1, 1.0, 10.0, 1e6}) {
    const Index n = ninit_rule(5, 50, 0, len);
    EXPECT_GE(n, 5);
    EXPECT_LE(n, 50);
  }
  EXPECT_THROW(ninit_rule(2, 10, 0, 1), ConfigError);
  EXPECT_THROW(ninit_rule(20, 10, 0, 1), ConfigError);
  EXPECT_THROW(ninit_rule(10, 100, 1, 0), ConfigError);
}

TEST(EvalApprox, InterpolatesAndExtrapolates) {
  PiecewiseLinearApprox a{Eigen::Vector2d(0, 1), Eigen::Vector2d(0, 2)};
  EXPECT_DOUBLE_EQ(a(0.5), 1.0);
  EXPECT_DOUBLE_EQ(a(1.5), 3.0);
  EXPECT_DOUBLE_EQ(a(-0.5), -1.0);
  PiecewiseLinearApprox b{Eigen::Vector3d(0, 0.3, 1), Eigen::Vector3d(0.1, 0.7, -2)};
  Eigen::VectorXd at = eval_approx(b, b.knots);
  EXPECT_EQ(at, b.values);
}

TEST(IntervalProblem, InvalidInputsThrow) {
  auto p = problem(square());
  p.b = p.a;
  EXPECT_THROW(funappx(p), ConfigError);
  p = problem(square());
  p.abstol = 0;
  EXPECT_THROW(integral(p), ConfigError);
  p = problem(square());
  p.b = std::numeric_limits<double>::infinity();
  EXPECT_THROW(funmin(p), ConfigError);
  p = problem(square());
  EXPECT_THROW(funmin(p, 0.0), ConfigError);
}

TEST(Funappx, SquareDefault) {
  FunappxResult r = funappx(problem(square()));
  EXPECT_TRUE(r.diag.clean());
  EXPECT_LE(r.diag.errest, 1e-6);
  EXPECT_LE(sup_error(r, [](double x) { return x * x; }, 0, 1), 1e-6);
  EXPECT_EQ(r.approx.knots.size(), 3169);
  EXPECT_NEAR(r.diag.errest, 2.7429e-07, 5e-11);
}

TEST(Funappx, ConstantNeedsNoRefinement) {
  auto f = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return Eigen::VectorXd::Constant(x.size(), 3.5); };
  FunappxResult r = funappx(problem(f, -2, 5));
  EXPECT_TRUE(r.diag.clean());
  EXPECT_EQ(r.diag.errest, 0.0);
  EXPECT_EQ(r.approx.knots.size(), ninit_rule(10, 1000, -2, 5));
  EXPECT_EQ(r.diag.iterations, 1);
}

TEST(Funappx, SineDenseGrid) {
  auto f = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return (10 * x.array()).sin(); };
  FunappxResult r = funappx(problem(f, 0, 1, 1e-5));
  EXPECT_TRUE(r.diag.clean());
  EXPECT_LE(sup_error(r, [](double x) { return std::sin(10 * x); }, 0, 1), 1e-5);
}

TEST(Funappx, KnotBookkeeping) {
  auto p = problem(square(), -3, 4, 1e-7);
  FunappxResult r = funappx(p);
  const auto& k = r.approx.knots;
  EXPECT_EQ(k[0], -3.0);
  EXPECT_EQ(k[k.size() - 1], 4.0);
  for (Index i = 1; i < k.size(); ++i) EXPECT_LT(k[i - 1], k[i]);
  EXPECT_EQ(r.diag.n_points, k.size());
  EXPECT_LE(r.diag.n_points, p.budget.nmax);
  for (Index n : r.cone.nstar_per_interval) EXPECT_GE(n, 1);
}

TEST(Funappx, BudgetFlag) {
  auto p = problem(square(), 0, 100, 1e-10);
  p.budget.nmax = 5000;
  FunappxResult r = funappx(p);
  EXPECT_TRUE(r.diag.flag(1));
  EXPECT_LE(r.diag.n_points, 5000);
  EXPECT_GT(r.diag.errest, 1e-10);
}

TEST(Funappx, ConeMembersWithinErrest) {
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  int checked = 0;
  for (int t = 0; t < 40; ++t) {
    const double a = 2 * u(eng), b = a + 0.5 + 3 * std::abs(u(eng));
    std::function<double(double)> g;
    if (t % 2 == 0) {
      const double c0 = u(eng), c1 = u(eng), c2 = u(eng);
      g = [=](double x) { return c0 + c1 * x + c2 * x * x; };
    } else {
      const double w = 20 / (b - a) * std::abs(u(eng)), ph = u(eng);
      g = [=](double x) { return std::sin(w * x + ph); };
    }
    auto f = [g](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x.unaryExpr(g); };
    FunappxResult r = funappx(problem(f, a, b, 1e-6));
    if (!r.diag.clean()) continue;
    ++checked;
    EXPECT_LE(r.diag.errest, 1e-6);
    EXPECT_LE(sup_error(r, g, a, b), r.diag.errest * (1 + 1e-9) + 1e-15) << t;
  }
  EXPECT_EQ(checked, 40);
}

TEST(Funappx, LooserToleranceNeverCostsMore) {
  const std::function<double(double)> fs[] = {[](double x) { return x * x; },
                                              [](double x) { return std::exp(-3 * x) * std::sin(5 * x); },
                                              [](double x) { return std::cos(7 * x); }};
  for (const auto& g : fs) {
    auto f = [g](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x.unaryExpr(g); };
    Index prev = std::numeric_limits<Index>::max();
    Index prev_int = prev, prev_min = prev;
    for (double tol = 1e-8; tol < 1e-2; tol *= 2) {
      const Index n = funappx(problem(f, 0, 2, tol)).diag.n_points;
      const Index ni = integral(problem(f, 0, 2, tol)).diag.n_points;
      const Index nm = funmin(problem(f, 0, 2, tol), 1e-9).diag.n_points;
      EXPECT_LE(n, prev) << tol;
      EXPECT_LE(ni, prev_int) << tol;
      EXPECT_LE(nm, prev_min) << tol;
      prev = n;
      prev_int = ni;
      prev_min = nm;
    }
  }
}

TEST(Integral, LooserToleranceNeverCostsMoreRandom) {
  std::mt19937_64 eng(21);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 25; ++t) {
    const double w = 1 + 15 * u(eng), ph = 6 * u(eng), c = u(eng);
    auto f = [=](const Eigen::VectorXd& x) -> Eigen::VectorXd {
      return (w * x.array() + ph).cos() + c * x.array().square();
    };
    Index prev = std::numeric_limits<Index>::max();
    for (double tol = 1e-9; tol < 1e-3; tol *= 2) {
      const Index n = integral(problem(f, -1, 1, tol)).diag.n_points;
      EXPECT_LE(n, prev) << t << " " << tol;
      prev = n;
    }
  }
}

TEST(Funmin, ShiftedParabolaDefault) {
  auto f = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return (x.array() - 0.3).square() + 1; };
  FunminResult r = funmin(problem(f));
  EXPECT_TRUE(r.diag.clean());
  EXPECT_NEAR(r.min.fmin, 1.0, 6.2e-7);
  bool found = false;
  for (auto [lo, hi] : r.min.intervals) found = found || (lo <= 0.3 && 0.3 <= hi);
  EXPECT_TRUE(found);
  EXPECT_LE(r.min.volumeX, 1e-2);
}

TEST(Funmin, ConstantEverywhereMinimal) {
  auto f = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return Eigen::VectorXd::Constant(x.size(), 5.0); };
  FunminResult r = funmin(problem(f, -1, 2));
  EXPECT_EQ(r.min.fmin, 5.0);
  ASSERT_EQ(r.min.intervals.size(), 1u);
  EXPECT_EQ(r.min.intervals[0].first, -1.0);
  EXPECT_EQ(r.min.intervals[0].second, 2.0);
  EXPECT_DOUBLE_EQ(r.min.volumeX, 3.0);
}

TEST(Funmin, TwoMinimizers) {
  auto f = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return (4 * M_PI * x.array()).cos(); };
  const double tolx = 1e-3;
  FunminResult r = funmin(problem(f), tolx);
  EXPECT_TRUE(r.diag.clean());
  EXPECT_NEAR(r.min.fmin, -1.0, 1e-6);
  for (double xstar : {0.25, 0.75}) {
    bool found = false;
    for (auto [lo, hi] : r.min.intervals) found = found || (lo <= xstar && xstar <= hi);
    EXPECT_TRUE(found) << xstar;
  }
  EXPECT_LE(r.min.volumeX, tolx * static_cast<double>(r.min.intervals.size()) + 1e-12);
}

TEST(Funmin, IntervalsDisjointAndCovered) {
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 30; ++t) {
    const double a = -1 - u(eng), b = 1 + 2 * u(eng), c = a + (b - a) * u(eng), s = 0.2 + 3 * u(eng);
    auto f = [=](const Eigen::VectorXd& x) -> Eigen::VectorXd { return s * (x.array() - c).square() - 2; };
    FunminResult r = funmin(problem(f, a, b, 1e-6), 1e-4);
    EXPECT_TRUE(r.diag.clean());
    bool found = false;
    double vol = 0, prev_hi = -std::numeric_limits<double>::infinity();
    for (auto [lo, hi] : r.min.intervals) {
      found = found || (lo <= c && c <= hi);
      EXPECT_GE(lo, a);
      EXPECT_LE(hi, b);
      EXPECT_GT(lo, prev_hi);
      prev_hi = hi;
      vol += hi - lo;
    }
    EXPECT_TRUE(found) << t;
    EXPECT_NEAR(vol, r.min.volumeX, 1e-12);
    EXPECT_GE(r.min.fmin, -2.0);
    EXPECT_LE(r.min.fmin - (-2.0), r.min.errest + 1e-15);
  }
}

TEST(Funmin, BudgetFlag) {
  auto f = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return (50 * x.array()).sin(); };
  auto p = problem(f, 0, 10, 1e-12);
  p.budget.nmax = 500;
  FunminResult r = funmin(p, 1e-12);
  EXPECT_TRUE(r.diag.flag(1));
}

TEST(Integral, SquareDefault) {
  IntegralResult r = integral(problem(square()));
  EXPECT_TRUE(r.diag.clean());
  EXPECT_NEAR(r.q, 1.0 / 3.0, 1e-6);
  EXPECT_LE(r.diag.errest, 1e-6);
  EXPECT_EQ(r.diag.n_points, 3565);
  EXPECT_NEAR(r.diag.errest, 9.9688e-07, 5e-11);
}

TEST(Integral, LinearIsExact) {
  auto f = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return 2 * x.array() + 1; };
  const double a = -1.5, b = 2.25;
  IntegralResult r = integral(problem(f, a, b));
  EXPECT_EQ(r.diag.errest, 0.0);
  EXPECT_EQ(r.diag.iterations, 1);
  EXPECT_NEAR(r.q, (b - a) + (b * b - a * a), 1e-13);
}

TEST(Integral, GaussianStrip) {
  auto f = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return (-x.array().square()).exp(); };
  auto p = problem(f, 1, 2, 1e-5);
  p.nlo = 100;
  p.nhi = 10000;
  IntegralResult r = integral(p);
  const double truth = std::sqrt(M_PI) / 2 * (std::erf(2.0) - std::erf(1.0));
  EXPECT_TRUE(r.diag.clean());
  EXPECT_NEAR(r.q, truth, 1e-5);
  EXPECT_NEAR(truth, 0.13525726, 1e-8);
}

TEST(Integral, CostBoundOnQuadratics) {
  std::mt19937_64 eng(8);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 40; ++t) {
    const double c0 = u(eng), c1 = u(eng), c2 = u(eng);
    const double a = u(eng), b = a + 0.25 + std::abs(u(eng));
    const double abstol = std::pow(10.0, -3 - (t % 6));
    auto f = [=](const Eigen::VectorXd& x) -> Eigen::VectorXd {
      return c0 + c1 * x.array() + c2 * x.array().square();
    };
    IntegralResult r = integral(problem(f, a, b, abstol));
    EXPECT_TRUE(r.diag.clean());
    const double exact = c0 * (b - a) + c1 * (b * b - a * a) / 2 + c2 * (b * b * b - a * a * a) / 3;
    EXPECT_NEAR(r.q, exact, abstol);
    const double nstar = r.diag.extra["nstar"].get<double>();
    const double var_fp = 2 * std::abs(c2) * (b - a);
    const double bound = std::sqrt(nstar * (b - a) * (b - a) * var_fp / (2 * abstol)) + 2 * nstar + 4;
    EXPECT_LE(static_cast<double>(r.diag.n_evals), bound) << t;
  }
}

TEST(Integral, BudgetFlag) {
  auto f = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return (30 * x.array()).sin(); };
  auto p = problem(f, 0, 10, 1e-12);
  p.budget.nmax = 2000;
  IntegralResult r = integral(p);
  EXPECT_TRUE(r.diag.flag(1));
  EXPECT_LE(r.diag.n_evals, 2000);
}
