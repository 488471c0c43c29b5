#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "gail/core.hpp"

namespace gail {

/// Vectorized univariate function: abscissae in, same-length values out.
using UnivariateFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct IntervalProblem {
  UnivariateFn f;
  double a = 0.0;
  double b = 1.0;
  double abstol = 1e-6;
  Index nlo = 10;
  Index nhi = 1000;
  Budget budget;

  void validate() const;
};

Index ninit_rule(Index nlo, Index nhi, double a, double b);

struct PiecewiseLinearApprox {
  Eigen::VectorXd knots;
  Eigen::VectorXd values;

  double operator()(double x) const;
};

/// Linear interpolation; linear extrapolation outside the knot range.
Eigen::VectorXd eval_approx(const PiecewiseLinearApprox& approx, const Eigen::VectorXd& xs);

struct ConeState {
  std::vector<Index> nstar_per_interval;
  Index tau = 0;
  bool tauchange = false;
};

struct FunappxResult {
  PiecewiseLinearApprox approx;
  SolverDiagnostics diag;
  ConeState cone;
};

FunappxResult funappx(const IntervalProblem& p);

struct MinimizerResult {
  double fmin = 0.0;
  double volumeX = 0.0;
  std::vector<std::pair<double, double>> intervals;
  double errest = 0.0;
};

struct FunminResult {
  MinimizerResult min;
  SolverDiagnostics diag;
  ConeState cone;
};

FunminResult funmin(const IntervalProblem& p, double tolx = 1e-3);

struct IntegralResult {
  double q = 0.0;
  SolverDiagnostics diag;
  ConeState cone;
};

IntegralResult integral(const IntervalProblem& p);

}  // namespace gail
