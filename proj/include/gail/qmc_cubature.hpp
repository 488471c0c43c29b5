#pragma once

#include <functional>
#include <vector>

#include "gail/montecarlo.hpp"
#include "gail/qmc_points.hpp"

namespace gail {

using FudgeFn = std::function<double(int m)>;

/// m -> 5 * 2^-m
FudgeFn default_fudge();

struct QmcParams {
  ToleranceSpec tol{1e-4, 1e-2, TolType::Max, 1.0};
  int mmin = 10;
  int mmax = 24;
  FudgeFn fudge = default_fudge();
  Periodizer transform = Periodizer::Baker;  // lattice only

  void validate(int mmax_limit) const;
};

struct QmcResult {
  double q = 0.0;
  Index d = 0;
  Index n = 0;
  double bound_err = 0.0;
  /// bit 0: budget exhausted; bit 1: cone violation.
  std::uint32_t exitflag = 0;
  double time = 0.0;
  SolverDiagnostics diag;
};

/// Block sums S(l) of coefficient magnitudes: S(0) = |c_0|, and for l >= 1
/// the sum over wavenumbers [2^(l-1), 2^l).
std::vector<double> block_sums(const Eigen::VectorXd& coeff_abs);

/// fudge(m) times the block sum S(m - lag) of 2^m coefficient magnitudes;
/// lag 0 is the top block [2^(m-1), 2^m). The level is clamped at 1.
double coeff_error_bound(const Eigen::VectorXd& coeff_abs, int m, const FudgeFn& fudge, int lag = 0);

/// Block lag used by the cubature loop.
inline constexpr int kBoundLag = 4;

/// Single-level cone test: true when the finest block is exactly empty while
/// a coarser non-constant block carries mass.
bool cone_check(const std::vector<double>& block_sums, const FudgeFn& fudge);

/// Cross-level consistency of block sums across successive levels. Each level
/// l is checked only while m - l <= lag.
class ConeMonitor {
 public:
  ConeMonitor(int mmin, int mmax, FudgeFn fudge, int lag = 4);
  /// Feed the block sums of level m; returns true once a contradiction is seen.
  bool update(int m, const std::vector<double>& sums, double noise_per_coeff);
  bool violated() const { return violated_; }

 private:
  int lstar_;
  FudgeFn fudge_;
  int lag_;
  std::vector<double> low_, up_;
  bool violated_ = false;
};

struct MappedPoints {
  Eigen::MatrixXd x;
  double scale = 1.0;
};

MappedPoints measure_map(const Eigen::MatrixXd& u, const Hyperbox& box);

QmcResult cub_lattice(const Integrand& f, const Hyperbox& box, const QmcParams& params, const RngStream& rng);
QmcResult cub_sobol(const Integrand& f, const Hyperbox& box, const QmcParams& params, const RngStream& rng);

}  // namespace gail
