#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

namespace gail {

using Index = Eigen::Index;

/// Invalid inputs or options. `code` carries an algorithm-specific exit code
/// when one is documented (hyperbox errors use 10..14), otherwise 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int code = 1)
      : std::runtime_error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

/// The integrand or generator returned NaN, inf, or an out-of-range value.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TolType { Max, Comb };

struct ToleranceSpec {
  double abstol = 1e-2;
  double reltol = 1e-1;
  TolType toltype = TolType::Max;
  double theta = 1.0;

  void validate() const;
  bool pure_absolute() const;
};

/// Generalized error tolerance for an estimand of magnitude `mu_abs`.
double tolfun(const ToleranceSpec& spec, double mu_abs);

const char* to_string(TolType t);
TolType toltype_from_string(const std::string& s);

/// Immutable handle to a reproducible uniform stream. Children are derived
/// by index so concurrent consumers never share generator state.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t stream_index)
      : seed_(seed), index_(stream_index) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_index() const { return index_; }

  /// Stream `i` below this one; distinct paths give distinct streams.
  RngStream child(std::uint64_t i) const;

  /// Fresh engine positioned at the start of this stream.
  std::mt19937_64 engine() const;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t index_ = 0;
};

/// Uniform double in [0,1) with 53 random bits.
inline double to_unit(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

Eigen::VectorXd uniform_stream(const RngStream& rng, Index n);
Eigen::VectorXd normal_stream(const RngStream& rng, Index n);

/// Standard normal CDF and its inverse. norm_inv clamps its argument to
/// [denorm_min, 1 - 2^-53], so it is finite everywhere on [0,1].
double norm_cdf(double x);
double norm_inv(double p);

struct Budget {
  Index nmax = 10'000'000;
  Index maxiter = 1000;
  double tbudget_seconds = 100.0;
  Index nbudget = 1'000'000'000;

  void validate() const;
};

enum class Algorithm {
  Funappx,
  Funmin,
  Integral,
  MeanMC,
  MeanMCBer,
  CubMC,
  CubLattice,
  CubSobol
};

const char* to_string(Algorithm a);

struct SolverDiagnostics {
  Algorithm algorithm = Algorithm::Funappx;
  Index n_evals = 0;
  Index n_points = 0;
  Index iterations = 0;
  double errest = 0.0;
  /// Bit k-1 set means exit flag k was raised.
  std::uint32_t exit_flags = 0;
  double elapsed_seconds = 0.0;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  void set_flag(int k) { exit_flags |= (1u << (k - 1)); }
  bool flag(int k) const { return (exit_flags >> (k - 1)) & 1u; }
  bool clean() const { return exit_flags == 0; }
};

/// Serializes diagnostics; elapsed time is included only when asked so that
/// fixed-seed reports are byte-identical.
nlohmann::ordered_json to_json(const SolverDiagnostics& d, bool with_time = false);

/// Alpha share of the variance stage in two-stage Monte Carlo.
double alpha_sigma_split(double alpha);

class Stopwatch {
 public:
  Stopwatch();
  double seconds() const;

 private:
  std::int64_t start_ns_;
};

}  // namespace gail
