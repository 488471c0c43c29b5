#include "gail/qmc_cubature.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

namespace gail {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Normalized transform coefficients of 2^m values plus the wavenumber map
// that pairs up coefficients by magnitude.
template <class C>
class CoefficientTracker {
 public:
  static C twiddle(Index k, Index nl) {
    if constexpr (std::is_same_v<C, double>) {
      (void)k;
      (void)nl;
      return 1.0;
    } else {
      const double ang = -M_PI * static_cast<double>(k) / static_cast<double>(nl);
      return C(std::cos(ang), std::sin(ang));
    }
  }

  static void transform(std::vector<C>& v) {
    const Index n = static_cast<Index>(v.size());
    for (Index nl = 1; nl < n; nl *= 2)
      for (Index b = 0; b < n; b += 2 * nl)
        for (Index k = 0; k < nl; ++k) {
          const C a = v[b + k];
          const C t = twiddle(k, nl) * v[b + k + nl];
          v[b + k] = (a + t) / 2.0;
          v[b + k + nl] = (a - t) / 2.0;
        }
  }

  void init(std::vector<C> v, int m) {
    transform(v);
    y_ = std::move(v);
    m_ = m;
    km_.resize(y_.size());
    for (std::size_t i = 0; i < km_.size(); ++i) km_[i] = static_cast<Index>(i);
    for (int l = m - 1; l >= 1; --l) flip(l);
  }

  void extend(std::vector<C> vnew, int lag) {
    transform(vnew);
    const Index nl = static_cast<Index>(y_.size());
    y_.resize(2 * nl);
    for (Index k = 0; k < nl; ++k) {
      const C a = y_[k];
      const C t = twiddle(k, nl) * vnew[k];
      y_[k] = (a + t) / 2.0;
      y_[k + nl] = (a - t) / 2.0;
    }
    ++m_;
    km_.resize(2 * nl);
    for (Index k = 0; k < nl; ++k) km_[nl + k] = nl + km_[k];
    for (int l = m_ - 1; l >= std::max(1, m_ - lag); --l) flip(l);
  }

  double mean() const { return std::real(y_[0]); }

  Eigen::VectorXd mapped_abs() const {
    Eigen::VectorXd a(static_cast<Index>(y_.size()));
    for (std::size_t k = 0; k < y_.size(); ++k) a[static_cast<Index>(k)] = std::abs(y_[km_[k]]);
    return a;
  }

 private:
  void flip(int l) {
    const Index nl = Index{1} << l;
    const Index n = static_cast<Index>(y_.size());
    std::vector<Index> which;
    for (Index f = 1; f < nl; ++f)
      if (std::abs(y_[km_[nl + f]]) > std::abs(y_[km_[f]])) which.push_back(f);
    for (Index o = 0; o < n; o += 2 * nl)
      for (Index f : which) std::swap(km_[f + o], km_[nl + f + o]);
  }

  std::vector<C> y_;
  std::vector<Index> km_;
  int m_ = 0;
};

enum class Rule { Lattice, Sobol };

template <class C>
QmcResult run_cubature(Rule rule, const Integrand& f, const Hyperbox& box, const QmcParams& params,
                       const RngStream& rng) {
  Stopwatch clock;
  box.validate();
  const Index d = box.dim();
  const int limit = rule == Rule::Lattice ? kLatticeMaxM : kSobolMaxM;
  params.validate(limit);
  if (rule == Rule::Lattice && d > kLatticeMaxDim)
    throw ConfigError("lattice cubature supports at most 250 dimensions");
  if (rule == Rule::Sobol && d > kSobolMaxDim)
    throw ConfigError("Sobol' cubature supports at most 1111 dimensions");

  std::unique_ptr<LatticeGenerator> lat;
  std::unique_ptr<SobolGenerator> sob;
  if (rule == Rule::Lattice) lat = std::make_unique<LatticeGenerator>(d, rng);
  else sob = std::make_unique<SobolGenerator>(d, rng);

  const Periodizer per = rule == Rule::Lattice ? params.transform : Periodizer::Id;
  double scale = 1.0;
  double abs_sum = 0.0;

  // Values of the transformed integrand at positions [first, first+count),
  // stored at their natural sequence index relative to `first`.
  auto sample = [&](std::uint64_t first, Index count) {
    Eigen::MatrixXd u = rule == Rule::Lattice ? lat->points(first, count) : sob->points(first, count);
    Eigen::VectorXd w = periodize_points(u, per);
    MappedPoints mp = measure_map(u, box);
    scale = mp.scale;
    Eigen::VectorXd y = f(mp.x);
    if (y.size() != count)
      throw EvaluationError("integrand returned " + std::to_string(y.size()) + " values for " +
                            std::to_string(count) + " points");
    std::vector<C> v(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i) {
      // zero weight kills the value even where the integrand overflows
      const double val = w[i] == 0.0 ? 0.0 : y[i] * w[i];
      if (!std::isfinite(val)) throw EvaluationError("integrand value is not finite");
      abs_sum += std::abs(val);
      Index pos = i;
      if (rule == Rule::Sobol)
        pos = static_cast<Index>(SobolGenerator::natural_index(first + static_cast<std::uint64_t>(i)) - first);
      v[static_cast<std::size_t>(pos)] = C(val);
    }
    return v;
  };

  QmcResult res;
  res.d = d;
  res.diag.algorithm = rule == Rule::Lattice ? Algorithm::CubLattice : Algorithm::CubSobol;
  CoefficientTracker<C> tracker;
  ConeMonitor monitor(params.mmin, params.mmax, params.fudge);
  int m = params.mmin;
  tracker.init(sample(0, Index{1} << m), m);
  auto bound_history = nlohmann::ordered_json::array();
  int iterations = 0;
  bool cone_bad = false;

  for (;;) {
    ++iterations;
    const Index n = Index{1} << m;
    const double mean_abs = abs_sum / static_cast<double>(n);
    const double noise = 4.0 * (m + 1) * kEps * mean_abs;
    Eigen::VectorXd ca = tracker.mapped_abs();
    std::vector<double> sums = block_sums(ca);
    res.q = scale * tracker.mean();
    res.bound_err = scale * (coeff_error_bound(ca, m, params.fudge, kBoundLag) + noise);
    res.n = n;
    bound_history.push_back(res.bound_err);
    const std::size_t used = static_cast<std::size_t>(std::max(1, m - kBoundLag)) + 1;
    if (cone_check(std::vector<double>(sums.begin(), sums.begin() + used), params.fudge)) cone_bad = true;
    if (monitor.update(m, sums, noise)) cone_bad = true;
    if (res.bound_err <= tolfun(params.tol, std::abs(res.q))) break;
    if (m >= params.mmax) {
      res.exitflag |= 1u;
      break;
    }
    tracker.extend(sample(std::uint64_t{1} << m, n), 4);
    ++m;
  }
  if (cone_bad) res.exitflag |= 2u;

  res.time = clock.seconds();
  res.diag.n_evals = res.n;
  res.diag.n_points = res.n;
  res.diag.iterations = iterations;
  res.diag.errest = res.bound_err;
  res.diag.exit_flags = res.exitflag;
  res.diag.elapsed_seconds = res.time;
  res.diag.extra["d"] = d;
  res.diag.extra["n"] = res.n;
  res.diag.extra["mmin"] = params.mmin;
  res.diag.extra["mmax"] = params.mmax;
  res.diag.extra["bound_err"] = res.bound_err;
  res.diag.extra["bound_history"] = bound_history;
  if (rule == Rule::Lattice) res.diag.extra["transform"] = to_string(per);
  res.diag.extra["measure"] = to_string(box.measure);
  return res;
}

}  // namespace

FudgeFn default_fudge() {
  return [](int m) { return 5.0 * std::ldexp(1.0, -m); };
}

void QmcParams::validate(int mmax_limit) const {
  tol.validate();
  if (!fudge) throw ConfigError("fudge function is missing");
  if (mmin < 1) throw ConfigError("mmin must be at least 1");
  if (mmin > mmax) throw ConfigError("mmin must not exceed mmax");
  if (mmax > mmax_limit) throw ConfigError("mmax must not exceed " + std::to_string(mmax_limit));
  for (int m = 0; m <= mmax; ++m)
    if (!(fudge(m) > 0)) throw ConfigError("fudge must be positive");
}

std::vector<double> block_sums(const Eigen::VectorXd& coeff_abs) {
  const Index n = coeff_abs.size();
  if (!is_power_of_two(n)) throw ConfigError("coefficient count must be a power of two");
  std::vector<double> s;
  s.push_back(coeff_abs[0]);
  for (Index lo = 1; lo < n; lo *= 2) s.push_back(coeff_abs.segment(lo, lo).sum());
  return s;
}

double coeff_error_bound(const Eigen::VectorXd& coeff_abs, int m, const FudgeFn& fudge, int lag) {
  if (coeff_abs.size() != (Index{1} << m)) throw ConfigError("coefficient count must be 2^m");
  if (lag < 0) throw ConfigError("lag must be nonnegative");
  if (m == 0) return 0.0;
  const int l = std::max(1, m - lag);
  const Index lo = Index{1} << (l - 1);
  return fudge(m) * coeff_abs.segment(lo, lo).sum();
}

bool cone_check(const std::vector<double>& sums, const FudgeFn& fudge) {
  (void)fudge;
  if (sums.size() < 3) return false;
  if (sums.back() != 0.0) return false;
  for (std::size_t l = 1; l + 1 < sums.size(); ++l)
    if (sums[l] > 0.0) return true;
  return false;
}

ConeMonitor::ConeMonitor(int mmin, int mmax, FudgeFn fudge, int lag)
    : lstar_(std::max(1, mmin - lag)), fudge_(std::move(fudge)), lag_(lag) {
  const std::size_t len = static_cast<std::size_t>(std::max(0, mmax - lstar_ + 1));
  low_.assign(len, -std::numeric_limits<double>::infinity());
  up_.assign(len, std::numeric_limits<double>::infinity());
}

bool ConeMonitor::update(int m, const std::vector<double>& sums, double noise_per_coeff) {
  const double omg_circ_lag = std::ldexp(1.0, -lag_);
  // only levels within `lag` of m: coarser block sums are stable to sampling
  // accuracy only, far looser than the implied band
  for (int l = std::max(lstar_, m - lag_); l <= m && l < static_cast<int>(sums.size()); ++l) {
    const int k = m - l;
    const double omg_circ = std::ldexp(1.0, -k);
    const double omg_hat = fudge_(k) / ((1 + fudge_(lag_)) * omg_circ_lag);
    const double w = omg_hat * omg_circ;
    const double floor = noise_per_coeff * std::ldexp(1.0, l - 1);
    const std::size_t i = static_cast<std::size_t>(l - lstar_);
    if (i >= low_.size()) break;
    const double s = sums[static_cast<std::size_t>(l)];
    low_[i] = std::max(low_[i], std::max(s - floor, 0.0) / (1 + w));
    if (w < 1) up_[i] = std::min(up_[i], (s + floor) / (1 - w));
    if (low_[i] > up_[i]) violated_ = true;
  }
  return violated_;
}

MappedPoints measure_map(const Eigen::MatrixXd& u, const Hyperbox& box) {
  box.validate();
  if (u.cols() != box.dim()) throw ConfigError("point dimension does not match the hyperbox");
  MappedPoints mp;
  if (box.measure == Measure::Uniform) {
    const Eigen::RowVectorXd lo = box.lower.transpose();
    const Eigen::RowVectorXd w = (box.upper - box.lower).transpose();
    mp.x = (u.array().rowwise() * w.array()).rowwise() + lo.array();
    mp.scale = box.volume();
  } else {
    mp.x = u.unaryExpr([](double p) { return norm_inv(p); });
    mp.scale = 1.0;
  }
  return mp;
}

QmcResult cub_lattice(const Integrand& f, const Hyperbox& box, const QmcParams& params, const RngStream& rng) {
  return run_cubature<std::complex<double>>(Rule::Lattice, f, box, params, rng);
}

QmcResult cub_sobol(const Integrand& f, const Hyperbox& box, const QmcParams& params, const RngStream& rng) {
  return run_cubature<double>(Rule::Sobol, f, box, params, rng);
}

}  // namespace gail
