#include "gail/core.hpp"

#include <chrono>
#include <cmath>

namespace gail {

void ToleranceSpec::validate() const {
  if (!(abstol >= 0) || !std::isfinite(abstol))
    throw ConfigError("abstol must be a finite nonnegative number");
  if (!(reltol >= 0 && reltol <= 1)) throw ConfigError("reltol must lie in [0,1]");
  if (!(theta >= 0 && theta <= 1)) throw ConfigError("theta must lie in [0,1]");
  if (toltype == TolType::Max) {
    if (abstol == 0 && reltol == 0)
      throw ConfigError("abstol and reltol cannot both be zero");
  } else {
    if (theta == 1 && abstol == 0) throw ConfigError("theta = 1 requires abstol > 0");
    if (theta == 0 && reltol == 0) throw ConfigError("theta = 0 requires reltol > 0");
    if (abstol == 0 && reltol == 0)
      throw ConfigError("abstol and reltol cannot both be zero");
  }
}

bool ToleranceSpec::pure_absolute() const {
  if (toltype == TolType::Max) return reltol == 0;
  return theta == 1 || reltol == 0;
}

double tolfun(const ToleranceSpec& spec, double mu_abs) {
  spec.validate();
  if (!(mu_abs >= 0)) throw ConfigError("tolfun requires a nonnegative magnitude");
  if (spec.toltype == TolType::Max) return std::max(spec.abstol, spec.reltol * mu_abs);
  return spec.theta * spec.abstol + (1 - spec.theta) * spec.reltol * mu_abs;
}

const char* to_string(TolType t) { return t == TolType::Max ? "max" : "comb"; }

TolType toltype_from_string(const std::string& s) {
  if (s == "max") return TolType::Max;
  if (s == "comb") return TolType::Comb;
  throw ConfigError("toltype must be 'max' or 'comb', got '" + s + "'");
}

RngStream RngStream::child(std::uint64_t i) const {
  // splitmix64 finalizer over (index, child) keeps the path information
  std::uint64_t z = index_ * 0x9E3779B97F4A7C15ULL + (i + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return RngStream(seed_, z);
}

std::mt19937_64 RngStream::engine() const {
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32)};
  return std::mt19937_64(seq);
}

Eigen::VectorXd uniform_stream(const RngStream& rng, Index n) {
  Eigen::VectorXd out(n);
  auto eng = rng.engine();
  for (Index i = 0; i < n; ++i) out[i] = to_unit(eng());
  return out;
}

Eigen::VectorXd normal_stream(const RngStream& rng, Index n) {
  Eigen::VectorXd out(n);
  auto eng = rng.engine();
  for (Index i = 0; i < n; ++i) out[i] = norm_inv(to_unit(eng()));
  return out;
}

void Budget::validate() const {
  if (nmax <= 0 || maxiter <= 0 || !(tbudget_seconds > 0) || nbudget <= 0)
    throw ConfigError("budget entries must be positive");
}

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Funappx: return "funappx";
    case Algorithm::Funmin: return "funmin";
    case Algorithm::Integral: return "integral";
    case Algorithm::MeanMC: return "meanmc";
    case Algorithm::MeanMCBer: return "meanmcber";
    case Algorithm::CubMC: return "cubmc";
    case Algorithm::CubLattice: return "cublattice";
    case Algorithm::CubSobol: return "cubsobol";
  }
  return "unknown";
}

nlohmann::ordered_json to_json(const SolverDiagnostics& d, bool with_time) {
  nlohmann::ordered_json j;
  j["algorithm"] = to_string(d.algorithm);
  j["n_evals"] = d.n_evals;
  j["n_points"] = d.n_points;
  j["iterations"] = d.iterations;
  j["errest"] = d.errest;
  auto flags = nlohmann::ordered_json::array();
  for (int k = 1; k <= 32; ++k)
    if (d.flag(k)) flags.push_back(k);
  j["exit_flags"] = flags;
  if (with_time) j["elapsed_seconds"] = d.elapsed_seconds;
  j["extra"] = d.extra;
  return j;
}

double alpha_sigma_split(double alpha) { return 1 - std::sqrt(1 - alpha); }

Stopwatch::Stopwatch()
    : start_ns_(std::chrono::duration_cast<std::chrono::nanoseconds>(
                    std::chrono::steady_clock::now().time_since_epoch())
                    .count()) {}

double Stopwatch::seconds() const {
  auto now = std::chrono::duration_cast<std::chrono::nanoseconds>(
                 std::chrono::steady_clock::now().time_since_epoch())
                 .count();
  return static_cast<double>(now - start_ns_) * 1e-9;
}

}  // namespace gail
