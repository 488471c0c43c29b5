#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "gail/cli.hpp"
#include "gail/exprlang.hpp"
#include "gail/montecarlo.hpp"
#include "gail/qmc_cubature.hpp"
#include "gail/univariate.hpp"

namespace gail::cli {

namespace {

constexpr double kSqrtPiHalf = 0.88622692545275801365;  // sqrt(pi)/2

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double call_value() { return 100.0 * phi(0.05) - 50.0 * std::exp(-0.05 * 0.05 / 2.0); }

Json finish(const std::string& name, Json report, double truth, const std::string& source, bool pass) {
  Json j;
  j["name"] = name;
  for (auto it = report.begin(); it != report.end(); ++it) j[it.key()] = it.value();
  j["truth"] = truth;
  j["truth_source"] = source;
  j["pass"] = pass;
  return j;
}

// True when `value` rounds to `printed` at `digits` decimals.
bool shows_as(double value, double printed, int digits) {
  std::ostringstream a, b;
  a << std::fixed << std::setprecision(digits) << value;
  b << std::fixed << std::setprecision(digits) << printed;
  return a.str() == b.str();
}

IntervalProblem interval_problem(const std::string& f, double a, double b, double abstol, Index nlo, Index nhi,
                                 Index nmax) {
  Expr e = parse(f, 1);
  IntervalProblem p;
  p.f = [e](const Eigen::VectorXd& x) { return e.eval_batch(x); };
  p.a = a;
  p.b = b;
  p.abstol = abstol;
  p.nlo = nlo;
  p.nhi = nhi;
  p.budget.nmax = nmax;
  return p;
}

Json interval_inputs(const std::string& f, const IntervalProblem& p) {
  Json in;
  in["f"] = f;
  in["a"] = p.a;
  in["b"] = p.b;
  in["abstol"] = p.abstol;
  in["nlo"] = p.nlo;
  in["nhi"] = p.nhi;
  in["nmax"] = p.budget.nmax;
  return in;
}

Fixture funappx_fixture(std::string name, double a, double b, double abstol, Index nlo, Index nhi, Index nmax) {
  return {name, "funappx", [=](std::uint64_t, bool with_time) {
            const std::string f = "x^2";
            IntervalProblem p = interval_problem(f, a, b, abstol, nlo, nhi, nmax);
            FunappxResult r = funappx(p);
            const Index grid = 100'000;
            Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(grid, a, b);
            const double sup = (eval_approx(r.approx, xs) - xs.array().square().matrix()).cwiseAbs().maxCoeff();
            Json est;
            est["npoints"] = r.approx.knots.size();
            est["errest"] = r.diag.errest;
            est["sup_error"] = sup;
            const bool pass = r.diag.clean() && sup <= abstol;
            return finish(name, make_report("funappx", interval_inputs(f, p), est, r.diag, with_time), 0.0,
                          "sup error of the approximant on a 1e5-point grid, target 0", pass);
          }};
}

Fixture funmin_fixture(std::string name, double a, double b, double abstol, double tolx, Index nlo, Index nhi,
                       Index nmax) {
  return {name, "funmin", [=](std::uint64_t, bool with_time) {
            const std::string f = "(x-0.3)^2+1";
            IntervalProblem p = interval_problem(f, a, b, abstol, nlo, nhi, nmax);
            FunminResult r = funmin(p, tolx);
            bool contains = false;
            for (const auto& [lo, hi] : r.min.intervals) contains = contains || (lo <= 0.3 && 0.3 <= hi);
            const bool pass = r.diag.clean() && contains &&
                              (std::abs(r.min.fmin - 1.0) <= abstol || r.min.volumeX <= tolx);
            Json in = interval_inputs(f, p);
            in["tolx"] = tolx;
            return finish(name, make_report("funmin", in, r.min.fmin, r.diag, with_time), 1.0,
                          "minimum of (x-0.3)^2+1 is 1 at x = 0.3", pass);
          }};
}

Fixture integral_fixture(std::string name, std::string f, double a, double b, double abstol, Index nlo, Index nhi,
                         Index nmax, double truth, std::string source) {
  return {name, "integral", [=](std::uint64_t, bool with_time) {
            IntervalProblem p = interval_problem(f, a, b, abstol, nlo, nhi, nmax);
            IntegralResult r = integral(p);
            const bool pass = r.diag.clean() && std::abs(r.q - truth) <= abstol;
            return finish(name, make_report("integral", interval_inputs(f, p), r.q, r.diag, with_time), truth,
                          source, pass);
          }};
}

Json mc_inputs(const std::string& f, const McParams& mp) {
  Json in;
  in["f"] = f;
  in["abstol"] = mp.tol.abstol;
  in["reltol"] = mp.tol.reltol;
  in["alpha"] = mp.alpha;
  return in;
}

Fixture meanmc_fixture(std::string name, std::size_t index, std::string f, double abstol, double reltol,
                       double alpha, double truth, std::string source) {
  return {name, "meanmc", [=](std::uint64_t seed, bool with_time) {
            Expr e = parse(f, 1);
            RandomGenerator y = [e](Index n, const RngStream& s) {
              Eigen::MatrixXd u = uniform_stream(s, n);
              return e.eval_batch(u);
            };
            McParams mp;
            mp.tol.abstol = abstol;
            mp.tol.reltol = reltol;
            mp.alpha = alpha;
            McResult r = mean_mc(y, mp, RngStream(seed, index));
            const bool pass = r.diag.clean() && std::abs(r.estimate - truth) <= tolfun(mp.tol, std::abs(truth));
            return finish(name, make_report("meanmc", mc_inputs(f, mp), r.estimate, r.diag, with_time), truth,
                          source, pass);
          }};
}

Fixture meanmcber_fixture(std::string name, std::size_t index, double abstol, double alpha) {
  return {name, "meanmcber", [=](std::uint64_t seed, bool with_time) {
            const double p = 1.0 / 9.0;
            const Index nmax = 1'000'000'000;
            McResult r = mean_mc_ber(bernoulli_generator(p), abstol, alpha, nmax, RngStream(seed, index));
            Json in;
            in["p"] = p;
            in["abstol"] = abstol;
            in["alpha"] = alpha;
            in["nmax"] = nmax;
            const bool pass = r.diag.clean() && std::abs(r.estimate - p) <= abstol;
            return finish(name, make_report("meanmcber", in, r.estimate, r.diag, with_time), p,
                          "success probability of the generator", pass);
          }};
}

Hyperbox box_from(const std::string& text, Measure m) {
  Hyperbox box;
  parse_box(text, box.lower, box.upper);
  box.measure = m;
  return box;
}

Json cub_inputs(const std::string& f, const Hyperbox& box, const std::string& box_text, const ToleranceSpec& tol) {
  Json in;
  in["f"] = f;
  in["dim"] = box.dim();
  in["box"] = box_text;
  in["measure"] = to_string(box.measure);
  in["abstol"] = tol.abstol;
  in["reltol"] = tol.reltol;
  return in;
}

Fixture cubmc_fixture(std::string name, std::size_t index, std::string f, std::string box_text, Measure m,
                      double abstol, double reltol, double truth, std::string source) {
  return {name, "cubmc", [=](std::uint64_t seed, bool with_time) {
            Hyperbox box = box_from(box_text, m);
            Expr e = parse(f, box.dim());
            McParams mp;
            mp.tol.abstol = abstol;
            mp.tol.reltol = reltol;
            McResult r = cub_mc([e](const Eigen::MatrixXd& x) { return e.eval_batch(x); }, box, mp,
                                RngStream(seed, index));
            const bool pass = r.diag.clean() && std::abs(r.estimate - truth) <= tolfun(mp.tol, std::abs(truth));
            Json in = cub_inputs(f, box, box_text, mp.tol);
            in["alpha"] = mp.alpha;
            return finish(name, make_report("cubmc", in, r.estimate, r.diag, with_time), truth, source, pass);
          }};
}

// `printed` < 0 means no display-precision check.
Fixture qmc_fixture(std::string name, std::size_t index, bool lattice, std::string f, std::string box_text,
                    Measure m, double abstol, double reltol, Periodizer transform, double truth, std::string source,
                    double printed) {
  const std::string command = lattice ? "cublattice" : "cubsobol";
  return {name, command, [=](std::uint64_t seed, bool with_time) {
            Hyperbox box = box_from(box_text, m);
            Expr e = parse(f, box.dim());
            QmcParams qp;
            qp.tol.abstol = abstol;
            qp.tol.reltol = reltol;
            qp.transform = transform;
            Integrand fi = [e](const Eigen::MatrixXd& x) { return e.eval_batch(x); };
            const RngStream rng(seed, index);
            QmcResult r = lattice ? cub_lattice(fi, box, qp, rng) : cub_sobol(fi, box, qp, rng);
            bool pass = r.exitflag == 0 && std::abs(r.q - truth) <= tolfun(qp.tol, std::abs(truth));
            if (printed >= 0) pass = pass && shows_as(r.q, printed, 4);
            Json in = cub_inputs(f, box, box_text, qp.tol);
            if (lattice) in["transform"] = to_string(transform);
            return finish(name, make_report(command, in, r.q, r.diag, with_time), truth, source, pass);
          }};
}

std::vector<Fixture> build_fixtures() {
  const double erf_square = std::pow(kSqrtPiHalf * std::erf(1.0), 2);
  const double erf_wide = std::pow(kSqrtPiHalf * (std::erf(2.0) + std::erf(1.0)), 2);
  const double erf_strip = kSqrtPiHalf * (std::erf(2.0) - std::erf(1.0));
  const std::string prod_src = "product of one-dimensional integrals";
  const std::string moment_src = "product of standard normal second moments";
  const std::string erf_src = "error-function closed form";
  const std::string call_src = "lognormal call expectation via the normal CDF";

  std::vector<Fixture> fx;
  fx.push_back(funappx_fixture("funappx x^2 default", 0, 1, 1e-6, 10, 1000, 10'000'000));
  fx.push_back(funappx_fixture("funappx x^2 on [0,100]", 0, 100, 1e-7, 10, 1000, 100'000'000));
  fx.push_back(funappx_fixture("funappx x^2 on [-20,20]", -20, 20, 1e-7, 10, 100, 100'000'000));
  fx.push_back(funappx_fixture("funappx x^2 on [-10,50]", -10, 50, 1e-7, 10, 1000, 1'000'000));

  fx.push_back(funmin_fixture("funmin parabola default", 0, 1, 1e-6, 1e-3, 10, 1000, 10'000'000));
  fx.push_back(funmin_fixture("funmin parabola nhi 10", -2, 2, 1e-7, 1e-4, 10, 10, 1'000'000));
  fx.push_back(funmin_fixture("funmin parabola on [-13,8]", -13, 8, 1e-7, 1e-4, 10, 100, 1'000'000));
  fx.push_back(funmin_fixture("funmin parabola loose", -2, 2, 1e-4, 1e-2, 10, 100, 1'000'000));

  fx.push_back(integral_fixture("integral x^2 default", "x^2", 0, 1, 1e-6, 10, 1000, 10'000'000, 1.0 / 3.0,
                                "antiderivative x^3/3"));
  fx.push_back(integral_fixture("integral gaussian on [1,2]", "exp(-x^2)", 1, 2, 1e-5, 100, 10000, 10'000'000,
                                erf_strip, erf_src));

  std::size_t k = 0;
  fx.push_back(meanmc_fixture("meanmc U^2", k++, "x^2", 1e-3, 0, 0.05, 1.0 / 3.0, "E U^2 = 1/3"));
  fx.push_back(meanmc_fixture("meanmc exp(U)", k++, "exp(x)", 1e-3, 0, 0.01, std::exp(1.0) - 1, "E exp(U) = e-1"));
  fx.push_back(meanmc_fixture("meanmc cos(U)", k++, "cos(x)", 0, 1e-2, 0.05, std::sin(1.0), "E cos(U) = sin 1"));

  fx.push_back(meanmcber_fixture("meanmcber p=1/9 abstol 1e-3", k++, 1e-3, 0.01));
  fx.push_back(meanmcber_fixture("meanmcber p=1/9 abstol 1e-4", k++, 1e-4, 0.01));
  fx.push_back(meanmcber_fixture("meanmcber p=1/9 abstol 1e-2", k++, 1e-2, 0.05));

  fx.push_back(cubmc_fixture("cubmc sin on [1,2]", k++, "sin(x)", "1,2", Measure::Uniform, 1e-3, 1e-2,
                             std::cos(1.0) - std::cos(2.0), "antiderivative -cos"));
  fx.push_back(cubmc_fixture("cubmc gaussian on unit square", k++, "exp(-x1^2-x2^2)", "0,1;0,1", Measure::Uniform,
                             1e-3, 1e-13, erf_square, erf_src));
  fx.push_back(cubmc_fixture("cubmc scaled product d=3", k++, "2^3*prod(x)+0.555", "0,1;0,1;0,1",
                             Measure::Uniform, 1e-3, 1e-3, 1.555, prod_src));
  fx.push_back(cubmc_fixture("cubmc gaussian weight normal", k++, "exp(-x1^2-x2^2)", "-inf,inf;-inf,inf",
                             Measure::Normal, 0, 1e-2, 1.0 / 3.0, "E exp(-Z^2) = 1/sqrt(3) per coordinate"));

  const std::string call = "exp(-0.05^2/2)*max(100*exp(0.05*x)-100,0)";
  fx.push_back(qmc_fixture("lattice product d=2", k++, true, "prod(x)", "0,1;0,1", Measure::Uniform, 1e-5, 0,
                           Periodizer::C1sin, 0.25, prod_src, 0.25));
  fx.push_back(qmc_fixture("lattice moments normal d=3", k++, true, "x1^2*x2^2*x3^2", "-inf,inf;-inf,inf;-inf,inf",
                           Measure::Normal, 1e-3, 1e-3, Periodizer::C1sin, 1.0, moment_src, -1));
  fx.push_back(qmc_fixture("lattice gaussian on [-1,2]^2", k++, true, "exp(-x1^2-x2^2)", "-1,2;-1,2",
                           Measure::Uniform, 1e-3, 1e-2, Periodizer::C1, erf_wide, erf_src, -1));
  fx.push_back(qmc_fixture("lattice call option", k++, true, call, "-inf,inf", Measure::Normal, 1e-4, 1e-2,
                           Periodizer::C1sin, call_value(), call_src, -1));
  fx.push_back(qmc_fixture("lattice scaled product d=5", k++, true, "8*prod(x)", "0,1;0,1;0,1;0,1;0,1",
                           Measure::Uniform, 1e-5, 0, Periodizer::Baker, 0.25, prod_src, 0.25));
  fx.push_back(qmc_fixture("lattice periodic kernel", k++, true, "3/(5-4*cos(2*pi*x))", "0,1", Measure::Uniform,
                           1e-5, 0, Periodizer::Id, 1.0, "classical integral 3/sqrt(25-16)", 1.0));

  fx.push_back(qmc_fixture("sobol product d=2", k++, false, "prod(x)", "0,1;0,1", Measure::Uniform, 1e-5, 0,
                           Periodizer::Id, 0.25, prod_src, 0.25));
  fx.push_back(qmc_fixture("sobol moments normal d=3", k++, false, "x1^2*x2^2*x3^2", "-inf,inf;-inf,inf;-inf,inf",
                           Measure::Normal, 1e-3, 1e-3, Periodizer::Id, 1.0, moment_src, -1));
  fx.push_back(qmc_fixture("sobol gaussian on [-1,2]^2", k++, false, "exp(-x1^2-x2^2)", "-1,2;-1,2",
                           Measure::Uniform, 1e-3, 1e-2, Periodizer::Id, erf_wide, erf_src, -1));
  fx.push_back(qmc_fixture("sobol call option", k++, false, call, "-inf,inf", Measure::Normal, 1e-4, 1e-2,
                           Periodizer::Id, call_value(), call_src, -1));
  fx.push_back(qmc_fixture("sobol scaled product d=5", k++, false, "8*prod(x)", "0,1;0,1;0,1;0,1;0,1",
                           Measure::Uniform, 1e-5, 0, Periodizer::Id, 0.25, prod_src, 0.25));
  return fx;
}

}  // namespace

const std::vector<Fixture>& doc_fixtures() {
  static const std::vector<Fixture> fx = build_fixtures();
  return fx;
}

Json run_doc_examples(std::uint64_t seed, bool with_time) {
  Json out;
  out["seed"] = seed;
  Json list = Json::array();
  int passed = 0, failed = 0;
  for (const auto& f : doc_fixtures()) {
    Json r;
    try {
      r = f.run(seed, with_time);
    } catch (const std::exception& e) {
      r["name"] = f.name;
      r["command"] = f.command;
      r["error"] = e.what();
      r["pass"] = false;
    }
    (r["pass"].get<bool>() ? passed : failed) += 1;
    list.push_back(std::move(r));
  }
  out["examples"] = std::move(list);
  out["summary"] = {{"total", passed + failed}, {"passed", passed}, {"failed", failed}};
  return out;
}

}  // namespace gail::cli
