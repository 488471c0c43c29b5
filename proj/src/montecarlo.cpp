#include "gail/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <tuple>

namespace gail {

namespace {

constexpr Index kChunk = Index{1} << 16;
constexpr Index kMinSamples = 30;
constexpr double kBerryEsseen = 0.56;
constexpr Index kMaxMeanIterations = 1000;

struct Moments {
  Index n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void merge(const Moments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double nn = static_cast<double>(n + o.n);
    const double delta = o.mean - mean;
    mean += delta * static_cast<double>(o.n) / nn;
    m2 += o.m2 + delta * delta * static_cast<double>(n) * static_cast<double>(o.n) / nn;
    n += o.n;
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

// Runs body(chunk_index, chunk_size) for every fixed-size chunk of n draws.
// Chunk boundaries and streams never depend on the thread count.
template <class Body>
void for_each_chunk(Index n, int threads, Body body) {
  const Index nchunks = (n + kChunk - 1) / kChunk;
  auto size_of = [&](Index c) { return std::min(kChunk, n - c * kChunk); };
  const int nt = static_cast<int>(std::max<Index>(1, std::min<Index>(threads, nchunks)));
  if (nt <= 1) {
    for (Index c = 0; c < nchunks; ++c) body(c, size_of(c));
    return;
  }
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (Index c = t; c < nchunks; c += nt) body(c, size_of(c));
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

Eigen::VectorXd draw_checked(const RandomGenerator& yrand, Index n, const RngStream& s) {
  Eigen::VectorXd y = yrand(n, s);
  if (y.size() != n)
    throw EvaluationError("generator returned " + std::to_string(y.size()) + " values, expected " +
                          std::to_string(n));
  return y;
}

Moments sample_moments(const RandomGenerator& yrand, Index n, const RngStream& batch, int threads) {
  const Index nchunks = (n + kChunk - 1) / kChunk;
  std::vector<Moments> parts(static_cast<std::size_t>(nchunks));
  for_each_chunk(n, threads, [&](Index c, Index m) {
    Eigen::VectorXd y = draw_checked(yrand, m, batch.child(static_cast<std::uint64_t>(c)));
    if (!y.allFinite()) throw EvaluationError("random variable produced a non-finite value");
    Moments part;
    part.n = m;
    part.mean = y.mean();
    part.m2 = (y.array() - part.mean).square().sum();
    parts[static_cast<std::size_t>(c)] = part;
  });
  Moments total;
  for (const auto& p : parts) total.merge(p);
  return total;
}

double be_tail(double n, double tol, double sigma, double kurtmax) {
  return norm_cdf(-std::sqrt(n) * tol / sigma) + kBerryEsseen * std::pow(kurtmax, 0.75) / std::sqrt(n);
}

nlohmann::ordered_json trace_json(const McTrace& t) {
  nlohmann::ordered_json j;
  j["tau"] = t.tau;
  j["n"] = t.n_per_iter;
  j["hmu"] = t.hmu;
  j["tol"] = t.tol_per_iter;
  j["var"] = t.var_hat;
  j["kurtmax"] = t.kurtmax;
  j["nremain"] = t.nremain;
  j["ntot"] = t.ntot;
  return j;
}

const char* flag_name(McFlag f) {
  switch (f) {
    case McFlag::Unchecked: return "unchecked";
    case McFlag::CheckedByMeanMC: return "checked_by_meanmc";
    case McFlag::CheckedByCubMC: return "checked_by_cubmc";
  }
  return "unknown";
}

}  // namespace

void McParams::validate() const {
  tol.validate();
  if (!(alpha > 0 && alpha < 1)) throw ConfigError("alpha must lie in (0,1)");
  if (!(fudge > 1)) throw ConfigError("fudge must be larger than 1");
  if (nSig < kMinSamples) throw ConfigError("nSig must be at least 30");
  if (n1 < kMinSamples) throw ConfigError("n1 must be at least 30");
  if (threads < 1) throw ConfigError("threads must be positive");
  budget.validate();
}

Index hoeffding_n(double abstol, double alpha) {
  if (!(abstol > 0) || abstol > 1) throw ConfigError("abstol must lie in (0,1]");
  if (!(alpha > 0 && alpha < 1)) throw ConfigError("alpha must lie in (0,1)");
  const long double a = abstol;
  const long double v = std::log(2.0L / static_cast<long double>(alpha)) / (2.0L * a * a);
  if (v > 9.0e18L) throw ConfigError("required sample size is not representable");
  const long double r = std::round(v);
  if (std::fabs(v - r) <= 1e-12L * std::max(1.0L, v)) return static_cast<Index>(r);
  return static_cast<Index>(std::ceil(v));
}

double kurtmax_bound(Index nSig, double alpha_sigma, double fudge) {
  const double n = static_cast<double>(nSig);
  const double g = 1 - 1 / (fudge * fudge);
  return (n - 3) / (n - 1) + (alpha_sigma * n / (1 - alpha_sigma)) * g * g;
}

Index two_stage_n(double var_hat, double fudge, double tolfun_val, double alpha_mu, double kurtmax) {
  if (!(var_hat >= 0) || !(fudge > 0) || !(tolfun_val > 0) || !(alpha_mu > 0 && alpha_mu < 1))
    throw ConfigError("two_stage_n requires nonnegative variance and positive tolerances");
  if (var_hat == 0) return kMinSamples;
  const double sig2 = fudge * fudge * var_hat;
  const double cheb_d = std::ceil(sig2 / (alpha_mu * tolfun_val * tolfun_val));
  const Index cap = Index{1} << 62;
  const Index cheb = cheb_d >= static_cast<double>(cap) ? cap : static_cast<Index>(cheb_d);
  const double sigma = std::sqrt(sig2);
  Index n = cheb;
  if (be_tail(static_cast<double>(cheb), tolfun_val, sigma, kurtmax) <= alpha_mu / 2) {
    Index lo = 0, hi = cheb;  // be_tail fails at lo, holds at hi
    while (hi - lo > 1) {
      Index mid = lo + (hi - lo) / 2;
      if (be_tail(static_cast<double>(mid), tolfun_val, sigma, kurtmax) <= alpha_mu / 2)
        hi = mid;
      else
        lo = mid;
    }
    n = hi;
  }
  return std::max(kMinSamples, n);
}

double certified_halfwidth(Index n, double var_hat, double fudge, double alpha_mu, double kurtmax) {
  if (var_hat == 0) return 0.0;
  const double sigma = fudge * std::sqrt(var_hat);
  const double rn = std::sqrt(static_cast<double>(n));
  double eps = sigma / std::sqrt(alpha_mu * static_cast<double>(n));
  const double r = alpha_mu / 2 - kBerryEsseen * std::pow(kurtmax, 0.75) / rn;
  if (r > 0) eps = std::min(eps, -sigma * norm_inv(r) / rn);
  return eps;
}

McResult mean_mc(const RandomGenerator& yrand, const McParams& params, const RngStream& rng) {
  params.validate();
  Stopwatch clock;
  McResult res;
  res.diag.algorithm = Algorithm::MeanMC;
  McTrace& tr = res.trace;

  const double alpha_sigma = alpha_sigma_split(params.alpha);
  const double alpha_mu = 1 - (1 - params.alpha) / (1 - alpha_sigma);
  const Index nbudget = params.budget.nbudget;
  if (params.nSig > nbudget) throw ConfigError("nbudget is smaller than nSig");

  Moments stage1 = sample_moments(yrand, params.nSig, rng.child(0), params.threads);
  tr.var_hat = stage1.variance();
  tr.kurtmax = kurtmax_bound(params.nSig, alpha_sigma, params.fudge);
  tr.ntot = params.nSig;

  auto run_batch = [&](Index t, Index n, double alpha_t) {
    Moments m = sample_moments(yrand, n, rng.child(static_cast<std::uint64_t>(t)), params.threads);
    double eps = certified_halfwidth(n, tr.var_hat, params.fudge, alpha_t, tr.kurtmax);
    tr.tau = t;
    tr.n_per_iter.push_back(n);
    tr.hmu.push_back(m.mean);
    tr.tol_per_iter.push_back(eps);
    tr.ntot += n;
    return std::pair<double, double>{m.mean, eps};
  };

  // remaining sample allowance, shrunk by the observed rate once time is short
  auto allowance = [&]() {
    Index left = nbudget - tr.ntot;
    double el = clock.seconds();
    if (el >= params.budget.tbudget_seconds) return Index{0};
    double rate = static_cast<double>(tr.ntot) / std::max(el, 1e-9);
    double by_time = rate * (params.budget.tbudget_seconds - el);
    if (by_time < static_cast<double>(left)) left = static_cast<Index>(by_time);
    return left;
  };

  double hmu = 0.0, eps = 0.0;
  if (params.tol.pure_absolute()) {
    Index n = two_stage_n(tr.var_hat, params.fudge, params.tol.abstol, alpha_mu, tr.kurtmax);
    Index left = allowance();
    if (n > left) {
      n = left;
      res.diag.set_flag(1);
    }
    if (n > 0) std::tie(hmu, eps) = run_batch(1, n, alpha_mu);
    else eps = std::numeric_limits<double>::infinity();
  } else {
    Index n = params.n1;
    for (Index t = 1;; ++t) {
      const double alpha_t = alpha_mu * std::ldexp(1.0, -static_cast<int>(std::min<Index>(t, 1000)));
      Index left = allowance();
      bool short_budget = false;
      if (n > left) {
        n = left;
        short_budget = true;
      }
      if (n <= 0) {
        res.diag.set_flag(1);
        break;
      }
      std::tie(hmu, eps) = run_batch(t, n, alpha_t);
      const double target = tolfun(params.tol, std::max(std::abs(hmu) - eps, 0.0));
      if (eps <= target) break;
      if (short_budget || t >= kMaxMeanIterations) {
        res.diag.set_flag(1);
        break;
      }
      const double next_alpha = alpha_mu * std::ldexp(1.0, -static_cast<int>(std::min<Index>(t + 1, 1000)));
      n = two_stage_n(tr.var_hat, params.fudge, std::max(target, eps / 10), next_alpha, tr.kurtmax);
    }
  }

  tr.nremain = nbudget - tr.ntot;
  res.estimate = hmu;
  res.diag.n_evals = tr.ntot;
  res.diag.n_points = tr.ntot;
  res.diag.iterations = tr.tau;
  res.diag.errest = eps;
  res.diag.extra = trace_json(tr);
  res.diag.extra["alpha_sigma"] = alpha_sigma;
  res.diag.extra["flag"] = flag_name(McFlag::CheckedByMeanMC);
  res.diag.elapsed_seconds = clock.seconds();
  return res;
}

RandomGenerator bernoulli_generator(double p) {
  if (!(p >= 0 && p <= 1)) throw ConfigError("Bernoulli probability must lie in [0,1]");
  return [p](Index n, const RngStream& rng) {
    Eigen::VectorXd y(n);
    auto eng = rng.engine();
    for (Index i = 0; i < n; ++i) y[i] = to_unit(eng()) < p ? 1.0 : 0.0;
    return y;
  };
}

McResult mean_mc_ber(const RandomGenerator& yrand, double abstol, double alpha, Index nmax,
                     const RngStream& rng, int threads) {
  if (nmax <= 0) throw ConfigError("nmax must be positive");
  if (threads < 1) throw ConfigError("threads must be positive");
  Stopwatch clock;
  McResult res;
  res.diag.algorithm = Algorithm::MeanMCBer;
  const Index need = hoeffding_n(abstol, alpha);
  Index n = need;
  if (need > nmax) {
    n = nmax;
    res.diag.set_flag(1);
  }
  const Index nchunks = (n + kChunk - 1) / kChunk;
  std::vector<Index> ones(static_cast<std::size_t>(nchunks), 0);
  for_each_chunk(n, threads, [&](Index c, Index m) {
    Eigen::VectorXd y = draw_checked(yrand, m, rng.child(static_cast<std::uint64_t>(c)));
    Index k = 0;
    for (Index i = 0; i < m; ++i) {
      if (y[i] == 1.0) ++k;
      else if (y[i] != 0.0) throw EvaluationError("Bernoulli generator produced a value outside {0,1}");
    }
    ones[static_cast<std::size_t>(c)] = k;
  });
  Index total = 0;
  for (Index k : ones) total += k;
  res.estimate = static_cast<double>(total) / static_cast<double>(n);
  res.trace.ntot = n;
  res.trace.n_per_iter = {n};
  res.trace.hmu = {res.estimate};
  res.diag.n_evals = n;
  res.diag.n_points = n;
  res.diag.iterations = 1;
  res.diag.errest = res.diag.clean() ? abstol : std::sqrt(std::log(2 / alpha) / (2.0 * static_cast<double>(n)));
  res.diag.extra["n"] = n;
  res.diag.extra["n_required"] = need;
  res.diag.extra["abstol"] = abstol;
  res.diag.extra["alpha"] = alpha;
  res.diag.elapsed_seconds = clock.seconds();
  return res;
}

const char* to_string(Measure m) { return m == Measure::Uniform ? "uniform" : "normal"; }

Measure measure_from_string(const std::string& s) {
  if (s == "uniform") return Measure::Uniform;
  if (s == "normal" || s == "gaussian" || s == "Gaussian") return Measure::Normal;
  throw ConfigError("measure must be 'uniform' or 'normal', got '" + s + "'");
}

void Hyperbox::validate() const {
  if (lower.size() != upper.size() || lower.size() == 0)
    throw ConfigError("hyperbox is not 2 x d", 11);
  for (Index i = 0; i < lower.size(); ++i)
    if (std::isnan(lower[i]) || std::isnan(upper[i]))
      throw ConfigError("hyperbox does not contain numbers", 10);
  for (Index i = 0; i < lower.size(); ++i)
    if (!(lower[i] < upper[i]))
      throw ConfigError("hyperbox is only a point in one direction", 12);
  if (measure == Measure::Uniform) {
    if (!lower.allFinite() || !upper.allFinite())
      throw ConfigError("hyperbox is infinite when measure is 'uniform'", 13);
  } else {
    for (Index i = 0; i < lower.size(); ++i)
      if (!(std::isinf(lower[i]) && lower[i] < 0 && std::isinf(upper[i]) && upper[i] > 0))
        throw ConfigError("hyperbox is not doubly infinite when measure is 'normal'", 14);
  }
}

double Hyperbox::volume() const {
  if (measure == Measure::Normal) return 1.0;
  return (upper - lower).prod();
}

Hyperbox Hyperbox::unit(Index d) {
  return {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d), Measure::Uniform};
}

Hyperbox Hyperbox::gaussian(Index d) {
  const double inf = std::numeric_limits<double>::infinity();
  return {Eigen::VectorXd::Constant(d, -inf), Eigen::VectorXd::Constant(d, inf), Measure::Normal};
}

McResult cub_mc(const Integrand& f, const Hyperbox& box, const McParams& params, const RngStream& rng) {
  box.validate();
  params.validate();
  const Index d = box.dim();
  const double vol = box.volume();
  const Hyperbox b = box;
  RandomGenerator yrand = [f, b, d](Index n, const RngStream& s) {
    Eigen::MatrixXd x(n, d);
    auto eng = s.engine();
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < d; ++j) {
        const double u = to_unit(eng());
        x(i, j) = b.measure == Measure::Uniform ? b.lower[j] + (b.upper[j] - b.lower[j]) * u
                                                : norm_inv(u);
      }
    return f(x);
  };
  McParams mp = params;
  mp.tol.abstol = params.tol.abstol / vol;
  McResult res = mean_mc(yrand, mp, rng);
  res.diag.algorithm = Algorithm::CubMC;
  res.estimate *= vol;
  res.diag.errest *= vol;
  for (double& h : res.trace.hmu) h *= vol;
  for (double& t : res.trace.tol_per_iter) t *= vol;
  res.diag.extra["hmu"] = res.trace.hmu;
  res.diag.extra["tol"] = res.trace.tol_per_iter;
  res.diag.extra["volume"] = vol;
  res.diag.extra["measure"] = to_string(box.measure);
  res.diag.extra["flag"] = flag_name(McFlag::CheckedByCubMC);
  return res;
}

}  // namespace gail
