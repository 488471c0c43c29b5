#include "gail/univariate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gail {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Eigen::VectorXd evaluate(const UnivariateFn& f, const Eigen::VectorXd& x) {
  Eigen::VectorXd y = f(x);
  if (y.size() != x.size())
    throw EvaluationError("function returned " + std::to_string(y.size()) + " values for " +
                          std::to_string(x.size()) + " abscissae");
  for (Index i = 0; i < y.size(); ++i)
    if (!std::isfinite(y[i]))
      throw EvaluationError("function value is not finite at x = " + std::to_string(x[i]));
  return y;
}

Eigen::VectorXd linspace(double a, double b, Index n) {
  Eigen::VectorXd x(n);
  double h = (b - a) / static_cast<double>(n - 1);
  for (Index i = 0; i < n; ++i) x[i] = a + static_cast<double>(i) * h;
  x[n - 1] = b;
  return x;
}

// One funappx subinterval carrying ninit equally spaced values.
struct Piece {
  double lo, hi;
  Eigen::VectorXd y;
  Index nstar;
  double err = 0.0;
};

double piece_bound_factor(Index nstar, Index n, double len) {
  return (2.0 * static_cast<double>(nstar) / len) /
         (1.0 - static_cast<double>(nstar) / static_cast<double>(n - 1));
}

// Updates err and nstar; returns false when the data contradict the cone
// even at the largest admissible nstar.
bool assess_piece(Piece& p) {
  const Index n = p.y.size();
  const double len = p.hi - p.lo;
  const double h = len / static_cast<double>(n - 1);
  const double s = (p.y[n - 1] - p.y[0]) / len;
  double v = 0.0, d2max = 0.0, ymax = 0.0;
  for (Index i = 0; i + 1 < n; ++i) v = std::max(v, std::abs((p.y[i + 1] - p.y[i]) / h - s));
  for (Index i = 1; i + 1 < n; ++i)
    d2max = std::max(d2max, std::abs(p.y[i - 1] - 2 * p.y[i] + p.y[i + 1]));
  for (Index i = 0; i < n; ++i) ymax = std::max(ymax, std::abs(p.y[i]));
  const double noise = 8 * kEps * ymax;
  const Index cap = n - 2;
  bool ok = true;
  for (;;) {
    double bound = piece_bound_factor(p.nstar, n, len) * v;
    if (d2max <= bound * h * h * (1 + 1e-12) + noise) break;
    if (p.nstar >= cap) {
      ok = false;
      break;
    }
    p.nstar = std::min(2 * p.nstar, cap);
  }
  p.err = h * h / 8 * piece_bound_factor(p.nstar, n, len) * v;
  return ok;
}

}  // namespace

void IntervalProblem::validate() const {
  if (!f) throw ConfigError("no function supplied");
  if (!std::isfinite(a) || !std::isfinite(b)) throw ConfigError("interval end points must be finite");
  if (!(a < b)) throw ConfigError("interval requires a < b");
  if (!(abstol > 0)) throw ConfigError("abstol must be positive");
  if (nlo < 3) throw ConfigError("nlo must be at least 3");
  if (nhi < nlo) throw ConfigError("nhi must be at least nlo");
  budget.validate();
}

Index ninit_rule(Index nlo, Index nhi, double a, double b) {
  if (nlo < 3 || nhi < nlo) throw ConfigError("ninit rule requires 3 <= nlo <= nhi");
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b))
    throw ConfigError("ninit rule requires finite a < b");
  double v = static_cast<double>(nhi) *
             std::pow(static_cast<double>(nlo) / static_cast<double>(nhi), 1.0 / (1.0 + (b - a)));
  // absorb the last-bit error of pow so exact products are not rounded up
  auto n = static_cast<Index>(std::ceil(v * (1 - 1e-12)));
  return std::max<Index>(3, std::clamp(n, nlo, nhi));
}

double PiecewiseLinearApprox::operator()(double x) const {
  const Index n = knots.size();
  const double* k = knots.data();
  Index j = std::upper_bound(k, k + n, x) - k;
  if (j > 0 && k[j - 1] == x) return values[j - 1];
  j = std::clamp<Index>(j, 1, n - 1);
  double t = (x - k[j - 1]) / (k[j] - k[j - 1]);
  return values[j - 1] + t * (values[j] - values[j - 1]);
}

Eigen::VectorXd eval_approx(const PiecewiseLinearApprox& approx, const Eigen::VectorXd& xs) {
  if (approx.knots.size() < 2 || approx.knots.size() != approx.values.size())
    throw ConfigError("approximant needs at least two knots with matching values");
  Eigen::VectorXd out(xs.size());
  for (Index i = 0; i < xs.size(); ++i) out[i] = approx(xs[i]);
  return out;
}

FunappxResult funappx(const IntervalProblem& p) {
  p.validate();
  Stopwatch clock;
  const Index ninit = ninit_rule(p.nlo, p.nhi, p.a, p.b);
  FunappxResult res;
  res.diag.algorithm = Algorithm::Funappx;

  std::vector<Piece> pieces;
  pieces.push_back({p.a, p.b, evaluate(p.f, linspace(p.a, p.b, ninit)),
                    std::min<Index>(p.nlo, ninit - 2)});
  Index npoints = ninit;
  Index iter = 0;

  for (;;) {
    ++iter;
    std::vector<char> bad(pieces.size(), 0);
    Index nbad = 0;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      bool cone_ok = assess_piece(pieces[k]);
      if (!cone_ok || pieces[k].err > p.abstol) {
        bad[k] = 1;
        ++nbad;
      }
    }
    if (nbad == 0) break;
    if (npoints + nbad * (ninit - 1) > p.budget.nmax) {
      res.diag.set_flag(1);
      break;
    }
    if (iter >= p.budget.maxiter) {
      res.diag.set_flag(2);
      break;
    }

    // midpoints of every cell of every bad piece, evaluated in one batch
    Eigen::VectorXd xnew(nbad * (ninit - 1));
    Index pos = 0;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      if (!bad[k]) continue;
      const double h = (pieces[k].hi - pieces[k].lo) / static_cast<double>(ninit - 1);
      for (Index i = 0; i + 1 < ninit; ++i)
        xnew[pos++] = pieces[k].lo + (static_cast<double>(i) + 0.5) * h;
    }
    Eigen::VectorXd ynew = evaluate(p.f, xnew);
    npoints += xnew.size();

    std::vector<Piece> next;
    next.reserve(pieces.size() + nbad);
    pos = 0;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      Piece& pc = pieces[k];
      if (!bad[k]) {
        next.push_back(std::move(pc));
        continue;
      }
      Eigen::VectorXd fine(2 * ninit - 1);
      for (Index i = 0; i < ninit; ++i) fine[2 * i] = pc.y[i];
      for (Index i = 0; i + 1 < ninit; ++i) fine[2 * i + 1] = ynew[pos++];
      const double mid = pc.lo + (pc.hi - pc.lo) / 2;
      next.push_back({pc.lo, mid, fine.head(ninit), pc.nstar});
      next.push_back({mid, pc.hi, fine.tail(ninit), pc.nstar});
    }
    pieces = std::move(next);
  }

  // assemble knots; neighbouring pieces share their end point
  const Index nk = static_cast<Index>(pieces.size()) * (ninit - 1) + 1;
  res.approx.knots.resize(nk);
  res.approx.values.resize(nk);
  Index pos = 0;
  double errest = 0.0;
  for (const Piece& pc : pieces) {
    const double h = (pc.hi - pc.lo) / static_cast<double>(ninit - 1);
    for (Index i = 0; i + 1 < ninit; ++i) {
      res.approx.knots[pos] = pc.lo + static_cast<double>(i) * h;
      res.approx.values[pos] = pc.y[i];
      ++pos;
    }
    errest = std::max(errest, pc.err);
    res.cone.nstar_per_interval.push_back(pc.nstar);
  }
  res.approx.knots[pos] = p.b;
  res.approx.values[pos] = pieces.back().y[ninit - 1];

  res.diag.n_evals = npoints;
  res.diag.n_points = nk;
  res.diag.iterations = iter;
  res.diag.errest = errest;
  res.diag.extra["ninit"] = ninit;
  res.diag.extra["nstar"] = res.cone.nstar_per_interval;
  res.diag.elapsed_seconds = clock.seconds();
  return res;
}

namespace {

// Quadratic lower bound of f on [x0,x1] given |f''| <= M.
double cell_lower_bound(double x0, double x1, double y0, double y1, double M) {
  const double lo = std::min(y0, y1);
  if (!(M > 0)) return lo;
  const double h = x1 - x0;
  const double t = h / 2 - (y1 - y0) / (M * h);
  if (t <= 0 || t >= h) return lo;
  const double v = (y0 + y1) / 2 - M * h * h / 8 - (y1 - y0) * (y1 - y0) / (2 * M * h * h);
  return std::min(v, lo);
}

}  // namespace

FunminResult funmin(const IntervalProblem& p, double tolx) {
  p.validate();
  if (!(tolx > 0)) throw ConfigError("TolX must be positive");
  Stopwatch clock;
  const Index ninit = ninit_rule(p.nlo, p.nhi, p.a, p.b);
  const double len = p.b - p.a;
  FunminResult res;
  res.diag.algorithm = Algorithm::Funmin;

  std::vector<double> x, y;
  {
    Eigen::VectorXd x0 = linspace(p.a, p.b, ninit);
    Eigen::VectorXd y0 = evaluate(p.f, x0);
    x.assign(x0.data(), x0.data() + ninit);
    y.assign(y0.data(), y0.data() + ninit);
  }
  Index tau = 2 * ninit - 3;
  bool tauchange = false;
  double mbest = std::numeric_limits<double>::infinity();
  Index iter = 0;
  double errest = 0.0, umin = 0.0;
  std::vector<double> lower;

  for (;;) {
    ++iter;
    const std::size_t ncell = x.size() - 1;
    const double s = (y.back() - y.front()) / len;
    double v = 0.0, hmax = 0.0, ymax = 0.0;
    std::vector<double> slope(ncell);
    for (std::size_t i = 0; i < ncell; ++i) {
      const double h = x[i + 1] - x[i];
      slope[i] = (y[i + 1] - y[i]) / h;
      v = std::max(v, std::abs(slope[i] - s));
      hmax = std::max(hmax, h);
    }
    for (double yi : y) ymax = std::max(ymax, std::abs(yi));

    // data-driven bound on |f''| and the cone check against it
    double M = 0.0;
    bool need_global = false;
    for (;;) {
      const double denom = 1 - static_cast<double>(tau) * hmax / (2 * len);
      if (denom <= 0) {
        need_global = true;
        break;
      }
      M = std::min(mbest, static_cast<double>(tau) * v / (len * denom));
      bool violated = false;
      for (std::size_t i = 0; i + 1 < ncell && !violated; ++i) {
        const double w = x[i + 2] - x[i];
        const double d2 = 2 * std::abs(slope[i + 1] - slope[i]) / w;
        const double noise = 16 * kEps * ymax / ((x[i + 1] - x[i]) * (x[i + 2] - x[i + 1]));
        if (d2 > M * (1 + 1e-12) + noise) violated = true;
      }
      if (!violated) break;
      tau *= 2;
      tauchange = true;
      mbest = std::numeric_limits<double>::infinity();
    }

    std::vector<char> split(ncell, 0);
    Index nsplit = 0;
    if (need_global) {
      std::fill(split.begin(), split.end(), 1);
      nsplit = static_cast<Index>(ncell);
    } else {
      mbest = M;
      lower.assign(ncell, 0.0);
      umin = *std::min_element(y.begin(), y.end());
      double lmin = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < ncell; ++i) {
        lower[i] = cell_lower_bound(x[i], x[i + 1], y[i], y[i + 1], M);
        lmin = std::min(lmin, lower[i]);
      }
      errest = std::max(0.0, umin - lmin);
      double vol = 0.0;
      for (std::size_t i = 0; i < ncell; ++i)
        if (lower[i] < umin + p.abstol) vol += x[i + 1] - x[i];
      if (errest <= p.abstol || vol <= tolx) break;
      for (std::size_t i = 0; i < ncell; ++i)
        if (lower[i] < umin - p.abstol) {
          split[i] = 1;
          ++nsplit;
        }
      if (nsplit == 0) break;
    }
    if (static_cast<Index>(x.size()) + nsplit > p.budget.nmax) {
      res.diag.set_flag(1);
      break;
    }
    if (iter >= p.budget.maxiter) {
      res.diag.set_flag(1);
      break;
    }

    Eigen::VectorXd xnew(nsplit);
    Index k = 0;
    for (std::size_t i = 0; i < ncell; ++i)
      if (split[i]) xnew[k++] = x[i] + (x[i + 1] - x[i]) / 2;
    Eigen::VectorXd ynew = evaluate(p.f, xnew);
    std::vector<double> nx, ny;
    nx.reserve(x.size() + nsplit);
    ny.reserve(x.size() + nsplit);
    k = 0;
    for (std::size_t i = 0; i < ncell; ++i) {
      nx.push_back(x[i]);
      ny.push_back(y[i]);
      if (split[i]) {
        nx.push_back(xnew[k]);
        ny.push_back(ynew[k]);
        ++k;
      }
    }
    nx.push_back(x.back());
    ny.push_back(y.back());
    x = std::move(nx);
    y = std::move(ny);
  }

  // a budget stop before any bound was formed still reports the sample minimum
  if (lower.size() != x.size() - 1) {
    umin = *std::min_element(y.begin(), y.end());
    lower.assign(x.size() - 1, -std::numeric_limits<double>::infinity());
    errest = std::numeric_limits<double>::infinity();
  }

  MinimizerResult& m = res.min;
  m.fmin = umin;
  m.errest = errest;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (!(lower[i] < umin + p.abstol)) continue;
    if (!m.intervals.empty() && m.intervals.back().second == x[i])
      m.intervals.back().second = x[i + 1];
    else
      m.intervals.emplace_back(x[i], x[i + 1]);
  }
  for (const auto& iv : m.intervals) m.volumeX += iv.second - iv.first;

  res.cone.tau = tau;
  res.cone.tauchange = tauchange;
  res.diag.n_evals = static_cast<Index>(x.size());
  res.diag.n_points = static_cast<Index>(x.size());
  res.diag.iterations = iter;
  res.diag.errest = errest;
  res.diag.extra["ninit"] = ninit;
  res.diag.extra["tau"] = tau;
  res.diag.extra["tauchange"] = tauchange;
  res.diag.extra["volumeX"] = m.volumeX;
  auto ivs = nlohmann::ordered_json::array();
  for (const auto& iv : m.intervals) ivs.push_back({iv.first, iv.second});
  res.diag.extra["intervals"] = ivs;
  res.diag.elapsed_seconds = clock.seconds();
  return res;
}

IntegralResult integral(const IntervalProblem& p) {
  p.validate();
  Stopwatch clock;
  const Index ninit = ninit_rule(p.nlo, p.nhi, p.a, p.b);
  const double len = p.b - p.a;
  const Index ncell0 = ninit - 1;
  IntegralResult res;
  res.diag.algorithm = Algorithm::Integral;

  Index nstar = ninit - 2;
  bool tauchange = false;
  // the grid always has ncell0 * K cells
  Index K = 1;
  Eigen::VectorXd y = evaluate(p.f, linspace(p.a, p.b, ninit));
  Index n_evals = ninit;
  Index iter = 0;
  double q = 0.0, errest = 0.0;
  bool last = false;

  auto bound_at = [&](double vtilde, double h) {
    const double tau = static_cast<double>(2 * nstar + 1);
    const double denom = 1 - tau * h / (2 * len);
    if (denom <= 0) return std::numeric_limits<double>::infinity();
    return tau * vtilde / len / denom;
  };

  // values on the grid with ncell0 * Knew cells, reusing nested points
  auto regrid = [&](Index Knew) {
    const Index nnew = ncell0 * Knew + 1;
    Eigen::VectorXd xs = linspace(p.a, p.b, nnew);
    Eigen::VectorXd yy(nnew);
    if (Knew % K == 0) {
      const Index r = Knew / K;
      Eigen::VectorXd xnew(nnew - y.size());
      Index k = 0;
      for (Index j = 0; j < nnew; ++j)
        if (j % r != 0) xnew[k++] = xs[j];
      Eigen::VectorXd ynew = evaluate(p.f, xnew);
      k = 0;
      for (Index j = 0; j < nnew; ++j) yy[j] = j % r == 0 ? y[j / r] : ynew[k++];
      n_evals += xnew.size();
    } else {
      yy = evaluate(p.f, xs);
      n_evals += nnew;
    }
    y = std::move(yy);
    K = Knew;
  };

  for (;;) {
    ++iter;
    const Index n = y.size();
    const Index ncell = n - 1;
    const double h = len / static_cast<double>(ncell);
    const double s = (y[n - 1] - y[0]) / len;
    double vtilde = 0.0, f1 = 0.0, ymax = 0.0, prev = 0.0;
    for (Index i = 0; i < ncell; ++i) {
      const double d = (y[i + 1] - y[i]) / h;
      vtilde += std::abs(d - s) * h;
      if (i > 0) f1 += std::abs(d - prev);
      prev = d;
    }
    for (Index i = 0; i < n; ++i) ymax = std::max(ymax, std::abs(y[i]));
    q = h * (y.sum() - (y[0] + y[n - 1]) / 2);
    // data linear up to rounding
    if (vtilde <= 4 * kEps * ymax * static_cast<double>(n)) vtilde = 0.0;

    const double noise = 4 * kEps * ymax * static_cast<double>(n) / h;
    double B = bound_at(vtilde, h);
    while (std::isfinite(B) && f1 > B * (1 + 1e-12) + noise) {
      nstar *= 2;
      tauchange = true;
      B = bound_at(vtilde, h);
    }
    errest = vtilde == 0.0 && std::isfinite(B) ? 0.0 : h * h / 8 * B;
    if (errest <= p.abstol) break;
    if (last) {
      res.diag.set_flag(1);
      break;
    }
    if (iter >= p.budget.maxiter) {
      res.diag.set_flag(2);
      break;
    }

    // smallest refinement of the initial grid predicted to meet abstol
    Index Knew = K + 1;
    if (vtilde > 0) {
      const double tau = static_cast<double>(2 * nstar + 1);
      const double guess = std::sqrt(tau * vtilde / len / (8 * p.abstol)) * len / static_cast<double>(ncell0);
      if (guess < 1e15) Knew = std::max(Knew, static_cast<Index>(std::floor(guess)) - 1);
      else Knew = std::numeric_limits<Index>::max() / (2 * ncell0);
      while (Knew < std::numeric_limits<Index>::max() / (2 * ncell0)) {
        const double hn = len / static_cast<double>(ncell0 * Knew);
        if (hn * hn / 8 * bound_at(vtilde, hn) <= p.abstol) break;
        ++Knew;
      }
    }
    if (Knew > (p.budget.nmax - 1) / ncell0) {
      // spend what is left of the budget on one final pass
      Knew = (p.budget.nmax - 1) / ncell0;
      last = true;
      if (Knew <= K || n_evals + ncell0 * (Knew - K) > p.budget.nmax) {
        res.diag.set_flag(1);
        break;
      }
    }
    regrid(Knew);
  }

  res.q = q;
  res.cone.nstar_per_interval = {nstar};
  res.cone.tau = 2 * nstar + 1;
  res.cone.tauchange = tauchange;
  res.diag.n_evals = n_evals;
  res.diag.n_points = y.size();
  res.diag.iterations = iter;
  res.diag.errest = errest;
  res.diag.extra["ninit"] = ninit;
  res.diag.extra["nstar"] = nstar;
  res.diag.extra["tau"] = 2 * nstar + 1;
  res.diag.extra["tauchange"] = tauchange;
  res.diag.elapsed_seconds = clock.seconds();
  return res;
}

}  // namespace gail
