#include "gail/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "gail/exprlang.hpp"
#include "gail/montecarlo.hpp"
#include "gail/qmc_cubature.hpp"
#include "gail/univariate.hpp"

namespace gail::cli {

namespace {

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct Options {
  std::string f;
  Index dim = 0;
  double a = kUnset, b = kUnset;
  std::string box;
  std::string measure = "uniform";
  double abstol = kUnset, reltol = kUnset, alpha = kUnset, tolx = kUnset, theta = 1.0, p = kUnset;
  Index nlo = 10, nhi = 1000;
  double nmax = kUnset;
  int mmin = 10, mmax = -1;
  std::string transform = "Baker";
  std::string toltype = "max";
  std::uint64_t seed = 1;
  std::string json;
  Index grid = 0;
  int threads = 1;
  bool timing = false;
};

double or_default(double v, double d) { return std::isnan(v) ? d : v; }

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::string flags_text(const SolverDiagnostics& d) {
  if (d.clean()) return "none";
  std::string s;
  for (int k = 1; k <= 32; ++k)
    if (d.flag(k)) s += (s.empty() ? "" : ",") + std::to_string(k);
  return s;
}

ToleranceSpec tolerance(const Options& o, double abstol_default, double reltol_default) {
  ToleranceSpec t;
  t.abstol = or_default(o.abstol, abstol_default);
  t.reltol = or_default(o.reltol, reltol_default);
  t.toltype = toltype_from_string(o.toltype);
  t.theta = o.theta;
  t.validate();
  return t;
}

Json tol_json(const ToleranceSpec& t) {
  Json j;
  j["abstol"] = t.abstol;
  j["reltol"] = t.reltol;
  j["toltype"] = to_string(t.toltype);
  j["theta"] = t.theta;
  return j;
}

Index to_count(double v, const char* name) {
  if (!(v >= 1) || v > 9e18 || v != std::floor(v))
    throw ConfigError(std::string(name) + " must be a positive integer");
  return static_cast<Index>(v);
}

Hyperbox build_box(const Options& o, Index& dim) {
  Hyperbox box;
  box.measure = measure_from_string(o.measure);
  if (!o.box.empty()) {
    parse_box(o.box, box.lower, box.upper);
    if (dim == 0) dim = box.lower.size();
    if (box.lower.size() != dim) throw ConfigError("hyperbox is not 2 x d", 11);
  } else {
    if (dim == 0) dim = 1;
    box = box.measure == Measure::Uniform ? Hyperbox::unit(dim) : Hyperbox::gaussian(dim);
  }
  box.validate();
  return box;
}

Integrand as_integrand(const Expr& e) {
  return [e](const Eigen::MatrixXd& x) { return e.eval_batch(x); };
}

struct Outcome {
  Json report;
  std::string summary;
  bool clean = true;
};

Outcome run_univariate(const std::string& cmd, const Options& o) {
  if (o.f.empty()) throw ConfigError("--f is required");
  Expr e = parse(o.f, 1);
  IntervalProblem p;
  p.f = [e](const Eigen::VectorXd& x) { return e.eval_batch(x); };
  p.a = or_default(o.a, 0.0);
  p.b = or_default(o.b, 1.0);
  p.abstol = or_default(o.abstol, 1e-6);
  p.nlo = o.nlo;
  p.nhi = o.nhi;
  p.budget.nmax = to_count(or_default(o.nmax, 1e7), "nmax");
  Json in;
  in["f"] = e.render();
  in["a"] = p.a;
  in["b"] = p.b;
  in["abstol"] = p.abstol;
  in["nlo"] = p.nlo;
  in["nhi"] = p.nhi;
  in["nmax"] = p.budget.nmax;
  Outcome out;
  SolverDiagnostics diag;
  if (cmd == "funappx") {
    if (o.grid < 0) throw ConfigError("--grid must be nonnegative");
    FunappxResult r = funappx(p);
    Json est;
    est["npoints"] = r.approx.knots.size();
    est["errest"] = r.diag.errest;
    if (o.grid > 0) {
      in["grid"] = o.grid;
      Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(o.grid, p.a, p.b);
      Eigen::VectorXd ys = eval_approx(r.approx, xs);
      est["grid_x"] = std::vector<double>(xs.data(), xs.data() + xs.size());
      est["grid_y"] = std::vector<double>(ys.data(), ys.data() + ys.size());
    }
    out.report = make_report(cmd, in, est, r.diag, o.timing);
    out.summary = "npoints = " + std::to_string(r.approx.knots.size()) + ", errest = " + fmt(r.diag.errest);
    diag = r.diag;
  } else if (cmd == "funmin") {
    const double tolx = or_default(o.tolx, 1e-3);
    in["tolx"] = tolx;
    FunminResult r = funmin(p, tolx);
    out.report = make_report(cmd, in, r.min.fmin, r.diag, o.timing);
    out.summary = "fmin = " + fmt(r.min.fmin) + ", errest = " + fmt(r.min.errest) + ", volumeX = " + fmt(r.min.volumeX);
    diag = r.diag;
  } else {
    IntegralResult r = integral(p);
    out.report = make_report(cmd, in, r.q, r.diag, o.timing);
    out.summary = "q = " + fmt(r.q) + ", errest = " + fmt(r.diag.errest);
    diag = r.diag;
  }
  out.summary += ", exit flags " + flags_text(diag);
  out.clean = diag.clean();
  return out;
}

McParams mc_params(const Options& o) {
  McParams mp;
  mp.tol = tolerance(o, 1e-2, 1e-1);
  mp.alpha = or_default(o.alpha, 0.01);
  mp.threads = o.threads;
  if (!std::isnan(o.nmax)) mp.budget.nbudget = to_count(o.nmax, "nmax");
  return mp;
}

Json mc_inputs(const McParams& mp, const Options& o) {
  Json in;
  in["tol"] = tol_json(mp.tol);
  in["alpha"] = mp.alpha;
  in["fudge"] = mp.fudge;
  in["nSig"] = mp.nSig;
  in["n1"] = mp.n1;
  in["nbudget"] = mp.budget.nbudget;
  in["seed"] = o.seed;
  return in;
}

Outcome run_mc(const std::string& cmd, const Options& o) {
  const RngStream rng(o.seed, 0);
  Outcome out;
  if (cmd == "meanmcber") {
    if (std::isnan(o.p)) throw ConfigError("--p is required for meanmcber");
    const double abstol = or_default(o.abstol, 1e-2);
    const double alpha = or_default(o.alpha, 0.01);
    const Index nmax = to_count(or_default(o.nmax, 1e9), "nmax");
    McResult r = mean_mc_ber(bernoulli_generator(o.p), abstol, alpha, nmax, rng, o.threads);
    Json in;
    in["p"] = o.p;
    in["abstol"] = abstol;
    in["alpha"] = alpha;
    in["nmax"] = nmax;
    in["seed"] = o.seed;
    out.report = make_report(cmd, in, r.estimate, r.diag, o.timing);
    out.summary = "pHat = " + fmt(r.estimate) + ", n = " + std::to_string(r.diag.n_evals);
    out.clean = r.diag.clean();
    return out;
  }
  if (o.f.empty()) throw ConfigError("--f is required");
  McParams mp = mc_params(o);
  if (cmd == "meanmc") {
    const Index d = o.dim == 0 ? 1 : o.dim;
    Expr e = parse(o.f, d);
    const Measure meas = measure_from_string(o.measure);
    RandomGenerator y = [e, d, meas](Index n, const RngStream& s) {
      Eigen::MatrixXd u(n, d);
      auto eng = s.engine();
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j) {
          const double v = to_unit(eng());
          u(i, j) = meas == Measure::Uniform ? v : norm_inv(v);
        }
      return e.eval_batch(u);
    };
    McResult r = mean_mc(y, mp, rng);
    Json in = mc_inputs(mp, o);
    in["f"] = e.render();
    in["dim"] = d;
    in["measure"] = to_string(meas);
    out.report = make_report(cmd, in, r.estimate, r.diag, o.timing);
    out.summary = "tmu = " + fmt(r.estimate) + ", ntot = " + std::to_string(r.trace.ntot);
    out.clean = r.diag.clean();
    return out;
  }
  Index d = o.dim;
  Hyperbox box = build_box(o, d);
  Expr e = parse(o.f, d);
  McResult r = cub_mc(as_integrand(e), box, mp, rng);
  Json in = mc_inputs(mp, o);
  in["f"] = e.render();
  in["dim"] = d;
  in["measure"] = to_string(box.measure);
  in["box"] = o.box.empty() ? Json() : Json(o.box);
  out.report = make_report(cmd, in, r.estimate, r.diag, o.timing);
  out.summary = "Q = " + fmt(r.estimate) + ", ntot = " + std::to_string(r.trace.ntot);
  out.clean = r.diag.clean();
  return out;
}

Outcome run_qmc(const std::string& cmd, const Options& o) {
  if (o.f.empty()) throw ConfigError("--f is required");
  Index d = o.dim;
  Hyperbox box = build_box(o, d);
  Expr e = parse(o.f, d);
  QmcParams qp;
  qp.tol = tolerance(o, 1e-4, 1e-2);
  qp.mmin = o.mmin;
  qp.mmax = o.mmax < 0 ? 24 : o.mmax;
  qp.transform = periodizer_from_string(o.transform);
  const RngStream rng(o.seed, 0);
  QmcResult r = cmd == "cublattice" ? cub_lattice(as_integrand(e), box, qp, rng)
                                    : cub_sobol(as_integrand(e), box, qp, rng);
  Json in;
  in["f"] = e.render();
  in["dim"] = d;
  in["measure"] = to_string(box.measure);
  in["box"] = o.box.empty() ? Json() : Json(o.box);
  in["tol"] = tol_json(qp.tol);
  in["mmin"] = qp.mmin;
  in["mmax"] = qp.mmax;
  if (cmd == "cublattice") in["transform"] = to_string(qp.transform);
  in["seed"] = o.seed;
  Outcome out;
  out.report = make_report(cmd, in, r.q, r.diag, o.timing);
  out.summary = "q = " + fmt(r.q) + ", n = " + std::to_string(r.n) + ", bound_err = " + fmt(r.bound_err);
  out.clean = r.exitflag == 0;
  return out;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.seed, "Random seed");
  sub->add_option("--json", o.json, "Write the JSON report to PATH ('-' for stdout)");
  sub->add_option("--threads", o.threads, "Worker threads for Monte Carlo sampling");
  sub->add_flag("--timing", o.timing, "Include elapsed time in the report");
}

void add_univariate(CLI::App* sub, Options& o, bool with_tolx, bool with_grid) {
  sub->add_option("--f", o.f, "Function of x");
  sub->add_option("--a", o.a, "Left end point");
  sub->add_option("--b", o.b, "Right end point");
  sub->add_option("--abstol", o.abstol, "Absolute tolerance");
  sub->add_option("--nlo", o.nlo, "Lower bound on initial points");
  sub->add_option("--nhi", o.nhi, "Upper bound on initial points");
  sub->add_option("--nmax", o.nmax, "Cost budget");
  if (with_tolx) sub->add_option("--tolx", o.tolx, "Tolerance on the minimizer set volume");
  if (with_grid) sub->add_option("--grid", o.grid, "Dump the approximant on N equally spaced points");
  add_common(sub, o);
}

void add_tolerances(CLI::App* sub, Options& o) {
  sub->add_option("--abstol", o.abstol, "Absolute tolerance");
  sub->add_option("--reltol", o.reltol, "Relative tolerance");
  sub->add_option("--toltype", o.toltype, "max or comb");
  sub->add_option("--theta", o.theta, "Weight of the absolute tolerance under comb");
}

}  // namespace

Json make_report(const std::string& command, Json inputs, Json estimate, const SolverDiagnostics& diag,
                 bool with_time) {
  Json j;
  j["command"] = command;
  j["inputs"] = std::move(inputs);
  j["estimate"] = std::move(estimate);
  j["diagnostics"] = to_json(diag, with_time);
  return j;
}

void parse_box(const std::string& text, Eigen::VectorXd& lower, Eigen::VectorXd& upper) {
  std::vector<std::pair<double, double>> rows;
  std::stringstream rs(text);
  std::string row;
  auto number = [](std::string s) {
    s.erase(0, s.find_first_not_of(" \t"));
    s.erase(s.find_last_not_of(" \t") + 1);
    std::string l = s;
    for (auto& c : l) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (l == "inf" || l == "+inf") return std::numeric_limits<double>::infinity();
    if (l == "-inf") return -std::numeric_limits<double>::infinity();
    if (l == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw ConfigError("hyperbox does not contain numbers: '" + s + "'", 10);
    }
    if (used != s.size()) throw ConfigError("hyperbox does not contain numbers: '" + s + "'", 10);
    return v;
  };
  while (std::getline(rs, row, ';')) {
    std::stringstream cs(row);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(cs, cell, ',')) vals.push_back(number(cell));
    if (vals.size() != 2) throw ConfigError("hyperbox is not 2 x d: each ';'-separated entry needs 'lower,upper'", 11);
    rows.emplace_back(vals[0], vals[1]);
  }
  if (rows.empty()) throw ConfigError("hyperbox is not 2 x d", 11);
  lower.resize(static_cast<Index>(rows.size()));
  upper.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    lower[static_cast<Index>(i)] = rows[i].first;
    upper[static_cast<Index>(i)] = rows[i].second;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Guaranteed automatic integration and approximation"};
  app.require_subcommand(1);
  auto* s_funappx = app.add_subcommand("funappx", "Piecewise linear approximation on [a,b]");
  add_univariate(s_funappx, o, false, true);
  auto* s_funmin = app.add_subcommand("funmin", "Global minimization on [a,b]");
  add_univariate(s_funmin, o, true, false);
  auto* s_integral = app.add_subcommand("integral", "Trapezoidal integration on [a,b]");
  add_univariate(s_integral, o, false, false);

  auto* s_meanmc = app.add_subcommand("meanmc", "Mean of f(U) by Monte Carlo");
  s_meanmc->add_option("--f", o.f, "Random variable as an expression of the sample x1..xd");
  s_meanmc->add_option("--dim", o.dim, "Sample dimension");
  s_meanmc->add_option("--measure", o.measure, "uniform or normal");
  add_tolerances(s_meanmc, o);
  s_meanmc->add_option("--alpha", o.alpha, "Uncertainty");
  s_meanmc->add_option("--nmax", o.nmax, "Sample budget");
  add_common(s_meanmc, o);

  auto* s_ber = app.add_subcommand("meanmcber", "Bernoulli mean by Monte Carlo");
  s_ber->add_option("--p", o.p, "Success probability of the built-in Bernoulli generator");
  s_ber->add_option("--abstol", o.abstol, "Absolute tolerance");
  s_ber->add_option("--alpha", o.alpha, "Uncertainty");
  s_ber->add_option("--nmax", o.nmax, "Sample budget");
  add_common(s_ber, o);

  auto* s_cubmc = app.add_subcommand("cubmc", "Monte Carlo cubature over a hyperbox");
  std::vector<CLI::App*> cubs = {s_cubmc, app.add_subcommand("cublattice", "Rank-1 lattice cubature"),
                                 app.add_subcommand("cubsobol", "Sobol' cubature")};
  for (auto* sub : cubs) {
    sub->add_option("--f", o.f, "Integrand in x1..xd");
    sub->add_option("--dim", o.dim, "Dimension");
    sub->add_option("--box", o.box, "Hyperbox 'l1,u1;l2,u2;...'");
    sub->add_option("--measure", o.measure, "uniform or normal");
    add_tolerances(sub, o);
    add_common(sub, o);
  }
  s_cubmc->add_option("--alpha", o.alpha, "Uncertainty");
  s_cubmc->add_option("--nmax", o.nmax, "Sample budget");
  for (std::size_t i = 1; i < cubs.size(); ++i) {
    cubs[i]->add_option("--mmin", o.mmin, "Start with 2^mmin points");
    cubs[i]->add_option("--mmax", o.mmax, "At most 2^mmax points");
  }
  cubs[1]->add_option("--transform", o.transform, "id, Baker, C0, C1 or C1sin");

  auto* s_examples = app.add_subcommand("examples", "Run the embedded worked examples");
  add_common(s_examples, o);

  std::vector<std::string> storage = {"gail"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  auto emit = [&](const Json& report, const std::string& summary) {
    out << summary << "\n";
    const std::string text = report.dump(2) + "\n";
    if (o.json.empty() || o.json == "-") {
      out << text;
    } else {
      std::ofstream f(o.json, std::ios::binary);
      if (!f) throw ConfigError("cannot write " + o.json);
      f << text;
    }
  };

  try {
    if (o.threads < 1) throw ConfigError("--threads must be positive");
    CLI::App* sub = app.get_subcommands().front();
    const std::string cmd = sub->get_name();
    if (cmd == "examples") {
      Json rep = run_doc_examples(o.seed, o.timing);
      std::ostringstream table;
      for (const auto& ex : rep["examples"]) {
        table << (ex["pass"].get<bool>() ? "PASS " : "FAIL ") << std::left << std::setw(28)
              << ex["name"].get<std::string>() << " estimate " << std::setw(14)
              << (!ex.contains("estimate")          ? std::string("error")
                  : ex["estimate"].is_number() ? fmt(ex["estimate"].get<double>())
                                               : ex["estimate"].dump())
              << " truth " << (ex.contains("truth") ? fmt(ex["truth"].get<double>()) : "-") << "\n";
      }
      const auto& sm = rep["summary"];
      table << sm["passed"].get<int>() << "/" << sm["total"].get<int>() << " examples passed";
      emit(rep, table.str());
      return sm["failed"].get<int>() == 0 ? 0 : 3;
    }
    Outcome res;
    if (cmd == "funappx" || cmd == "funmin" || cmd == "integral") res = run_univariate(cmd, o);
    else if (cmd == "meanmc" || cmd == "meanmcber" || cmd == "cubmc") res = run_mc(cmd, o);
    else res = run_qmc(cmd, o);
    emit(res.report, res.summary);
    return res.clean ? 0 : 2;
  } catch (const ConfigError& e) {
    err << "error: " << e.what();
    if (e.code() != 1) err << " (code " << e.code() << ")";
    err << "\n";
    return 1;
  } catch (const EvaluationError& e) {
    err << "evaluation error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace gail::cli
