#pragma once

#include <functional>
#include <vector>

#include "gail/core.hpp"

namespace gail {

/// Draws `n` IID samples of Y from the given stream. Must be pure in
/// (n, stream) and safe to call from several threads at once.
using RandomGenerator = std::function<Eigen::VectorXd(Index n, const RngStream& rng)>;

/// Integrand on a batch of points, one point per row.
using Integrand = std::function<Eigen::VectorXd(const Eigen::MatrixXd& x)>;

enum class McFlag { Unchecked, CheckedByMeanMC, CheckedByCubMC };

struct McParams {
  ToleranceSpec tol{1e-2, 1e-1, TolType::Max, 1.0};
  double alpha = 0.01;
  double fudge = 1.2;
  Index nSig = 10'000;
  Index n1 = 10'000;
  Budget budget;
  McFlag flag = McFlag::Unchecked;
  int threads = 1;

  void validate() const;
};

struct McTrace {
  Index tau = 0;
  std::vector<Index> n_per_iter;
  std::vector<double> hmu;
  std::vector<double> tol_per_iter;
  double var_hat = 0.0;
  double kurtmax = 0.0;
  Index nremain = 0;
  Index ntot = 0;
};

struct McResult {
  double estimate = 0.0;
  SolverDiagnostics diag;
  McTrace trace;
};

Index hoeffding_n(double abstol, double alpha);

/// Upper bound on the modified kurtosis implied by the variance stage.
double kurtmax_bound(Index nSig, double alpha_sigma, double fudge);

/// Mean-stage sample size certifying a half-width of `tolfun_val` with
/// uncertainty `alpha_mu`.
Index two_stage_n(double var_hat, double fudge, double tolfun_val, double alpha_mu, double kurtmax);

/// Half-width certified by `n` samples at uncertainty `alpha_mu`.
double certified_halfwidth(Index n, double var_hat, double fudge, double alpha_mu, double kurtmax);

McResult mean_mc(const RandomGenerator& yrand, const McParams& params, const RngStream& rng);

McResult mean_mc_ber(const RandomGenerator& yrand, double abstol, double alpha, Index nmax,
                     const RngStream& rng, int threads = 1);

/// Bernoulli(p) generator built on the uniform stream.
RandomGenerator bernoulli_generator(double p);

enum class Measure { Uniform, Normal };

const char* to_string(Measure m);
Measure measure_from_string(const std::string& s);

struct Hyperbox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Measure measure = Measure::Uniform;

  Index dim() const { return lower.size(); }
  /// Throws ConfigError with the documented exit code (10..14).
  void validate() const;
  double volume() const;

  static Hyperbox unit(Index d);
  static Hyperbox gaussian(Index d);
};

McResult cub_mc(const Integrand& f, const Hyperbox& box, const McParams& params, const RngStream& rng);

}  // namespace gail
