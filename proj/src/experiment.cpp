#include "pdfp/experiment.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "pdfp/image_io.hpp"
#include "pdfp/tomo.hpp"

namespace pdfp {

namespace {

std::string trim(const std::string &s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) { return {}; }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

const std::set<std::string> &known_keys()
{
  static const std::set<std::string> keys = {
      "problem.kind",    "problem.size",        "problem.noise",      "problem.image",
      "problem.angles",  "problem.rays",        "problem.spacing",    "problem.blur_radius",
      "problem.blur_sigma", "seed",             "reg_weight",         "tv_variant",
      "solver.name",     "solver.gamma",        "solver.gamma_beta",  "solver.lambda",
      "solver.kappa",    "solver.theta",        "solver.sigma",       "solver.tau",
      "solver.delta",    "solver.nu",           "solver.inner_max_iter", "solver.inner_tol",
      "schedule.kind",   "schedule.alpha",      "schedule.alpha_lo",  "schedule.alpha_hi",
      "schedule.gamma_lo_beta", "schedule.gamma_hi_beta", "schedule.decay", "schedule.numerator",
      "certify.sigma",   "max_iter",            "tol",                "output_dir",
      "report_timing",
  };
  return keys;
}

class Reader {
public:
  explicit Reader(const KeyValues &kv) : kv_(kv) {}

  bool has(const std::string &key) const { return kv_.count(key) != 0; }

  std::string str(const std::string &key) const
  {
    auto it = kv_.find(key);
    if (it == kv_.end()) { throw InvalidArgument("missing required key '" + key + "'"); }
    return it->second;
  }

  double num(const std::string &key) const
  {
    const std::string s = str(key);
    char *end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || !std::isfinite(v)) { bad(key, s); }
    return v;
  }

  long long integer(const std::string &key) const
  {
    const std::string s = str(key);
    char *end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0') { bad(key, s); }
    return v;
  }

  bool boolean(const std::string &key) const
  {
    const std::string s = str(key);
    if (s == "true" || s == "1" || s == "on") { return true; }
    if (s == "false" || s == "0" || s == "off") { return false; }
    bad(key, s);
  }

  void num_if(const std::string &key, double &out) const
  {
    if (has(key)) { out = num(key); }
  }
  void num_if(const std::string &key, std::optional<double> &out) const
  {
    if (has(key)) { out = num(key); }
  }

  [[noreturn]] static void bad(const std::string &key, const std::string &value)
  {
    throw InvalidArgument("invalid value '" + value + "' for key '" + key + "'");
  }

private:
  const KeyValues &kv_;
};

void require(bool ok, const std::string &key, const std::string &why)
{
  if (!ok) { throw InvalidArgument("key '" + key + "': " + why); }
}

std::vector<double> parse_angles(const std::string &key, const std::string &text)
{
  std::vector<double> out;
  auto to_num = [&](const std::string &s) {
    char *end = nullptr;
    const std::string t = trim(s);
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || *end != '\0') { Reader::bad(key, text); }
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::stringstream ss(text);
    std::string a, b, c;
    std::getline(ss, a, ':');
    std::getline(ss, b, ':');
    std::getline(ss, c);
    const double start = to_num(a);
    const double step = to_num(b);
    const double stop = to_num(c);
    require(step > 0.0, key, "range step must be > 0");
    for (int k = 0;; ++k) {
      const double v = start + k * step;
      if (v > stop + 1e-9) { break; }
      out.push_back(v);
    }
  } else {
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) { out.push_back(to_num(cell)); }
  }
  require(!out.empty(), key, "no angles");
  for (double a : out) { require(a >= 0.0 && a < 180.0, key, "angles must lie in [0, 180)"); }
  return out;
}

Image load_image(const std::filesystem::path &path)
{
  if (path.extension() == ".csv") { return read_image_csv(path); }
  return read_pgm(path);
}

StepSequence constant_sequence(double value)
{
  return [value](std::size_t) { return value; };
}

double default_lambda(const Problem &p)
{
  const double bound = p.lambda_bound();
  return std::isfinite(bound) ? bound : 1.0;
}

Mat normal_matrix(const QuadraticData &quad, Index n)
{
  Mat q(n, n);
  Vec e = Vec::Zero(n);
  for (Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    q.col(j) = quad.A.adjoint(quad.A.forward(e));
    e[j] = 0.0;
  }
  return 0.5 * (q + q.transpose());
}

} // namespace

KeyValues parse_key_values(const std::string &text)
{
  KeyValues kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) { line.erase(hash); }
    line = trim(line);
    if (line.empty()) { continue; }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) { throw InvalidArgument("line " + std::to_string(lineno) + ": empty key"); }
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues load_key_values(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in) { throw InvalidArgument("cannot read config file " + path.string()); }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str());
}

const char *solver_name(SolverKind s)
{
  switch (s) {
  case SolverKind::pdfp2o: return "pdfp2o";
  case SolverKind::pdfp2o_kappa: return "pdfp2o_kappa";
  case SolverKind::pdfp2o_ds: return "pdfp2o_ds";
  case SolverKind::pdfp2o_dsn: return "pdfp2o_dsn";
  case SolverKind::pfbs_fp2o: return "pfbs_fp2o";
  case SolverKind::ifp2o: return "ifp2o";
  case SolverKind::cp: return "cp";
  case SolverKind::siu: return "siu";
  }
  return "?";
}

const char *problem_name(ProblemKind p)
{
  switch (p) {
  case ProblemKind::denoise: return "denoise";
  case ProblemKind::deblur: return "deblur";
  case ProblemKind::ct: return "ct";
  }
  return "?";
}

ExperimentConfig parse_experiment(const KeyValues &kv)
{
  for (const auto &[key, value] : kv) {
    if (!known_keys().count(key)) { throw InvalidArgument("unknown key '" + key + "'"); }
  }
  const Reader r(kv);
  ExperimentConfig c;

  const std::string kind = r.str("problem.kind");
  if (kind == "denoise") {
    c.problem = ProblemKind::denoise;
  } else if (kind == "deblur") {
    c.problem = ProblemKind::deblur;
  } else if (kind == "ct") {
    c.problem = ProblemKind::ct;
  } else {
    throw InvalidArgument("unknown problem kind '" + kind + "' (key 'problem.kind')");
  }

  if (r.has("problem.size")) { c.size = r.integer("problem.size"); }
  r.num_if("problem.noise", c.noise);
  require(c.noise >= 0.0, "problem.noise", "must be >= 0");
  if (r.has("seed")) {
    const long long s = r.integer("seed");
    require(s >= 0, "seed", "must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (r.has("problem.image")) {
    require(c.problem != ProblemKind::ct, "problem.image", "ct always uses the phantom");
    c.image = r.str("problem.image");
    require(std::filesystem::exists(*c.image), "problem.image", "file " + c.image->string() + " does not exist");
  } else {
    require(c.size >= 16, "problem.size", "the phantom needs size >= 16");
  }
  c.angles = benchmark_geometry(16).angles_deg;
  if (r.has("problem.angles")) { c.angles = parse_angles("problem.angles", r.str("problem.angles")); }
  if (r.has("problem.rays")) { c.rays = r.integer("problem.rays"); }
  require(c.rays >= 1, "problem.rays", "must be >= 1");
  r.num_if("problem.spacing", c.spacing);
  require(c.spacing > 0.0, "problem.spacing", "must be > 0");
  if (r.has("problem.blur_radius")) { c.blur_radius = static_cast<int>(r.integer("problem.blur_radius")); }
  require(c.blur_radius >= 0, "problem.blur_radius", "must be >= 0");
  r.num_if("problem.blur_sigma", c.blur_sigma);
  require(c.blur_sigma > 0.0, "problem.blur_sigma", "must be > 0");

  r.num_if("reg_weight", c.reg_weight);
  require(c.reg_weight > 0.0, "reg_weight", "must be > 0");
  if (r.has("tv_variant")) {
    const std::string v = r.str("tv_variant");
    if (v == "anisotropic") {
      c.variant = TvVariant::anisotropic;
    } else if (v == "isotropic") {
      c.variant = TvVariant::isotropic;
    } else {
      Reader::bad("tv_variant", v);
    }
  }

  const std::string solver = r.str("solver.name");
  static const std::map<std::string, SolverKind> solvers = {
      {"pdfp2o", SolverKind::pdfp2o},       {"pdfp2o_kappa", SolverKind::pdfp2o_kappa},
      {"pdfp2o_ds", SolverKind::pdfp2o_ds}, {"pdfp2o_dsn", SolverKind::pdfp2o_dsn},
      {"pfbs_fp2o", SolverKind::pfbs_fp2o}, {"ifp2o", SolverKind::ifp2o},
      {"cp", SolverKind::cp},               {"siu", SolverKind::siu},
  };
  auto it = solvers.find(solver);
  if (it == solvers.end()) { throw InvalidArgument("unknown solver '" + solver + "' (key 'solver.name')"); }
  c.solver = it->second;

  r.num_if("solver.gamma", c.gamma);
  r.num_if("solver.gamma_beta", c.gamma_beta);
  r.num_if("solver.lambda", c.lambda);
  if (r.has("solver.kappa")) {
    c.kappa = r.num("solver.kappa");
  } else if (c.solver == SolverKind::ifp2o) {
    c.kappa = 0.5;
  }
  r.num_if("solver.theta", c.theta);
  r.num_if("solver.sigma", c.sigma);
  r.num_if("solver.tau", c.tau);
  r.num_if("solver.delta", c.delta);
  r.num_if("solver.nu", c.nu);
  if (r.has("solver.inner_max_iter")) {
    const long long n = r.integer("solver.inner_max_iter");
    require(n >= 1, "solver.inner_max_iter", "must be >= 1");
    c.inner_max_iter = static_cast<std::size_t>(n);
  }
  r.num_if("solver.inner_tol", c.inner_tol);
  require(!c.gamma || *c.gamma > 0.0, "solver.gamma", "must be > 0");
  require(c.gamma_beta > 0.0 && c.gamma_beta < 2.0, "solver.gamma_beta", "must lie in (0, 2)");
  require(!c.lambda || *c.lambda > 0.0, "solver.lambda", "must be > 0");
  require(c.kappa >= 0.0 && c.kappa < 1.0, "solver.kappa", "must lie in [0, 1)");
  require(c.solver != SolverKind::ifp2o || c.kappa > 0.0, "solver.kappa", "ifp2o needs kappa in (0, 1)");
  require(c.theta >= 0.0 && c.theta <= 1.0, "solver.theta", "must lie in [0, 1]");
  require(!c.sigma || *c.sigma > 0.0, "solver.sigma", "must be > 0");
  require(!c.tau || *c.tau > 0.0, "solver.tau", "must be > 0");
  require(!c.delta || *c.delta > 0.0, "solver.delta", "must be > 0");
  require(!c.nu || *c.nu > 0.0, "solver.nu", "must be > 0");
  require(c.inner_tol > 0.0, "solver.inner_tol", "must be > 0");

  if (r.has("schedule.kind")) {
    const std::string s = r.str("schedule.kind");
    if (s == "constant") {
      c.schedule = ScheduleKind::constant;
    } else if (s == "bb_dynamic") {
      c.schedule = ScheduleKind::bb_dynamic;
    } else if (s == "convergent_perturbation") {
      c.schedule = ScheduleKind::convergent_perturbation;
    } else {
      throw InvalidArgument("unknown schedule kind '" + s + "' (key 'schedule.kind')");
    }
  }
  r.num_if("schedule.alpha", c.alpha);
  r.num_if("schedule.alpha_lo", c.alpha_lo);
  r.num_if("schedule.alpha_hi", c.alpha_hi);
  r.num_if("schedule.gamma_lo_beta", c.gamma_lo_beta);
  r.num_if("schedule.gamma_hi_beta", c.gamma_hi_beta);
  r.num_if("schedule.decay", c.decay);
  if (r.has("schedule.numerator")) {
    const std::string s = r.str("schedule.numerator");
    if (s == "literal") {
      c.numerator = BbNumerator::literal;
    } else if (s == "half") {
      c.numerator = BbNumerator::half;
    } else {
      Reader::bad("schedule.numerator", s);
    }
  }
  require(c.alpha >= 0.0 && c.alpha < 1.0, "schedule.alpha", "must lie in [0, 1)");
  require(c.alpha_lo >= 0.0 && c.alpha_lo <= c.alpha_hi && c.alpha_hi < 1.0, "schedule.alpha_lo",
          "need 0 <= alpha_lo <= alpha_hi < 1");
  require(c.gamma_lo_beta > 0.0 && c.gamma_lo_beta <= c.gamma_hi_beta && c.gamma_hi_beta < 2.0,
          "schedule.gamma_lo_beta", "need 0 < gamma_lo_beta <= gamma_hi_beta < 2");
  require(c.decay >= 0.0, "schedule.decay", "must be >= 0");

  r.num_if("certify.sigma", c.certify_sigma);
  require(!c.certify_sigma || *c.certify_sigma > 0.0, "certify.sigma", "must be > 0");

  if (r.has("max_iter")) {
    const long long n = r.integer("max_iter");
    require(n >= 1, "max_iter", "must be >= 1");
    c.max_iter = static_cast<std::size_t>(n);
  }
  r.num_if("tol", c.tol);
  require(c.tol > 0.0, "tol", "must be > 0");
  if (r.has("output_dir")) { c.output_dir = r.str("output_dir"); }
  if (r.has("report_timing")) { c.report_timing = r.boolean("report_timing"); }

  for (const auto &[key, value] : kv) {
    if (key.rfind("problem.", 0) == 0 || key == "seed" || key == "reg_weight" || key == "tv_variant") {
      c.problem_keys[key] = value;
    }
  }
  c.problem_keys.emplace("seed", "0");
  return c;
}

BuiltProblem build_problem(const ExperimentConfig &cfg)
{
  PowerIterationOptions power;
  power.seed = cfg.seed;
  if (cfg.problem == ProblemKind::ct) {
    TomoGeometry g;
    g.image_side = cfg.size;
    g.angles_deg = cfg.angles;
    g.rays_per_angle = cfg.rays;
    g.spacing = cfg.spacing;
    TomoProblem t = make_tomo_problem(g, cfg.noise, cfg.seed);
    Problem p = make_tv_problem(t, cfg.reg_weight, cfg.variant, power);
    return BuiltProblem{std::move(p), t.x_true.pixels, cfg.size, cfg.size};
  }

  const Image truth = cfg.image ? load_image(*cfg.image) : shepp_logan(cfg.size);
  if (cfg.problem == ProblemKind::denoise) {
    const Vec b = add_relative_noise(truth.pixels, cfg.noise, cfg.seed);
    Problem p = make_image_problem(identity_op(truth.size()), b, truth.height, truth.width, cfg.reg_weight,
                                   cfg.variant, power);
    return BuiltProblem{std::move(p), truth.pixels, truth.height, truth.width};
  }
  const LinearOp blur = gaussian_blur_op(truth.height, truth.width, cfg.blur_radius, cfg.blur_sigma);
  const Vec b = add_relative_noise(blur.forward(truth.pixels), cfg.noise, cfg.seed);
  Problem p = make_image_problem(blur, b, truth.height, truth.width, cfg.reg_weight, cfg.variant, power);
  return BuiltProblem{std::move(p), truth.pixels, truth.height, truth.width};
}

ExperimentResult run_solver(const ExperimentConfig &cfg, const BuiltProblem &built)
{
  const Problem &p = built.problem;
  const double gamma = cfg.gamma.value_or(cfg.gamma_beta * p.beta);
  const double lambda = cfg.lambda.value_or(default_lambda(p));
  const StoppingRule stop{cfg.tol, cfg.max_iter};
  RunOptions opts;
  opts.x_true = built.x_true;

  ScheduleSpec spec;
  spec.kind = cfg.schedule;
  spec.gamma0 = gamma;
  spec.lambda0 = lambda;
  spec.alpha0 = cfg.alpha;
  spec.clamp = ScheduleClamp{cfg.gamma_lo_beta * p.beta, cfg.gamma_hi_beta * p.beta, 0.0, p.lambda_bound(),
                             cfg.alpha_lo, cfg.alpha_hi};
  spec.decay = cfg.decay;
  spec.numerator = cfg.numerator;

  ExperimentResult res;
  res.gamma = gamma;
  res.lambda = lambda;
  const auto start = std::chrono::steady_clock::now();
  auto take = [&](SolveResult r) {
    res.x = std::move(r.state.x);
    res.trace = std::move(r.trace);
    res.converged = r.converged;
    res.iterations = r.iterations;
  };

  switch (cfg.solver) {
  case SolverKind::pdfp2o: take(pdfp2o(p, gamma, lambda, zero_state(p), stop, opts)); break;
  case SolverKind::pdfp2o_kappa: take(pdfp2o_kappa(p, gamma, lambda, cfg.kappa, zero_state(p), stop, opts)); break;
  case SolverKind::pdfp2o_ds: take(pdfp2o_ds(p, make_schedule(spec, p), zero_state(p), stop, opts)); break;
  case SolverKind::pdfp2o_dsn: take(pdfp2o_dsn(p, make_schedule(spec, p), zero_state(p), stop, opts)); break;
  case SolverKind::pfbs_fp2o:
    take(pfbs_fp2o(p, gamma, lambda, cfg.kappa, StoppingRule{cfg.inner_tol, cfg.inner_max_iter}, zero_state(p),
                   stop, opts));
    break;
  case SolverKind::cp:
    take(chambolle_pock(p, constant_sequence(cfg.sigma.value_or(lambda / gamma)), constant_sequence(cfg.tau.value_or(gamma)),
                        cfg.theta, zero_state(p), stop, opts));
    break;
  case SolverKind::siu: {
    const double nu = cfg.nu.value_or(lambda / gamma);
    const double delta = cfg.delta.value_or(0.99 / (p.f2.lipschitz() + nu * p.lambda_max_ddt));
    SiuResult r = siu(p, constant_sequence(delta), constant_sequence(nu), split_zero_state(p), stop, opts);
    res.x = std::move(r.state.x);
    res.trace = std::move(r.trace);
    res.converged = r.converged;
    res.iterations = r.iterations;
    break;
  }
  case SolverKind::ifp2o: {
    const QuadraticData *quad = p.f2.quadratic();
    const Index n = p.primal_dim();
    if (quad == nullptr || n > 4096) {
      throw UnsupportedProblem("ifp2o needs a quadratic f2 on at most 4096 unknowns");
    }
    const Mat q = normal_matrix(*quad, n);
    double lam = lambda;
    if (!cfg.lambda) {
      const double qmin = Eigen::SelfAdjointEigenSolver<Mat>(q, Eigen::EigenvaluesOnly).eigenvalues()[0];
      lam = qmin * default_lambda(p);
    }
    res.lambda = lam;
    IfpResult r = ifp2o(q, quad->A.adjoint(quad->b), p.f1, p.D, lam, cfg.kappa, stop);
    res.x = std::move(r.x);
    res.trace = std::move(r.trace);
    res.converged = r.converged;
    res.iterations = r.iterations;
    break;
  }
  }
  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  res.objective = p.objective(res.x);
  res.snr_db = snr(res.x, built.x_true);
  res.relerr = rel_err(res.x, built.x_true);
  if (!cfg.report_timing) {
    res.wall_ms = TraceRecord::nan;
    for (auto &rec : res.trace.records) { rec.wall_ms = TraceRecord::nan; }
  }
  return res;
}

ExperimentConfig load_experiment(const std::filesystem::path &path, const Overrides &ov)
{
  KeyValues kv = load_key_values(path);
  if (ov.max_iter) { kv["max_iter"] = std::to_string(*ov.max_iter); }
  if (ov.tol) { kv["tol"] = format_double(*ov.tol); }
  if (ov.seed) { kv["seed"] = std::to_string(*ov.seed); }
  if (auto it = kv.find("problem.image"); it != kv.end()) {
    std::filesystem::path img = it->second;
    if (img.is_relative()) { it->second = (path.parent_path() / img).string(); }
  }
  ExperimentConfig cfg = parse_experiment(kv);
  if (const char *dir = std::getenv("PDFP_OUTPUT_DIR"); dir != nullptr && *dir != '\0') { cfg.output_dir = dir; }
  return cfg;
}

namespace {

void write_summary(const ExperimentConfig &cfg, const ExperimentResult &res, const std::filesystem::path &path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) { throw InvalidArgument("cannot open " + path.string() + " for writing"); }
  out << "problem=" << problem_name(cfg.problem) << '\n'
      << "solver=" << solver_name(cfg.solver) << '\n'
      << "gamma=" << format_double(res.gamma) << '\n'
      << "lambda=" << format_double(res.lambda) << '\n'
      << "iterations=" << res.iterations << '\n'
      << "converged=" << (res.converged ? "true" : "false") << '\n'
      << "objective=" << format_double(res.objective) << '\n'
      << "snr_db=" << format_double(res.snr_db) << '\n'
      << "relerr=" << format_double(res.relerr) << '\n'
      << "wall_ms=" << format_double(res.wall_ms) << '\n';
}

template <class Fn>
int guarded(std::ostream &err, Fn &&fn)
{
  try {
    return fn();
  } catch (const InvalidArgument &e) {
    err << "error: " << e.what() << '\n';
  } catch (const UnsupportedProblem &e) {
    err << "error: " << e.what() << '\n';
  } catch (const InvariantViolation &e) {
    err << "error: " << e.what() << '\n';
  } catch (const NonConvergence &e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::filesystem::filesystem_error &e) {
    err << "error: " << e.what() << '\n';
  }
  return 1;
}

} // namespace

int solve_command(const std::filesystem::path &config, const Overrides &ov, std::ostream &out, std::ostream &err)
{
  return guarded(err, [&] {
    const ExperimentConfig cfg = load_experiment(config, ov);
    const BuiltProblem built = build_problem(cfg);
    const ExperimentResult res = run_solver(cfg, built);

    std::filesystem::create_directories(cfg.output_dir);
    write_trace_csv(res.trace, cfg.output_dir / "trace.csv");
    write_pgm(Image{built.height, built.width, res.x}, cfg.output_dir / "recon.pgm");
    write_summary(cfg, res, cfg.output_dir / "summary.txt");

    out << solver_name(cfg.solver) << ": " << res.iterations << " iterations, "
        << (res.converged ? "converged" : "budget exhausted") << ", SNR " << format_double(res.snr_db)
        << " dB, RelErr " << format_double(res.relerr) << '\n';
    return res.converged ? 0 : 2;
  });
}

std::optional<std::size_t> first_crossing(const RunTrace &trace, double threshold_db)
{
  for (const auto &rec : trace.records) {
    if (rec.snr >= threshold_db) { return rec.iter; }
  }
  return std::nullopt;
}

int compare_command(const std::filesystem::path &config_a, const std::filesystem::path &config_b,
                    const std::filesystem::path &out_csv, const Overrides &ov, std::ostream &out,
                    std::ostream &err)
{
  return guarded(err, [&] {
    const ExperimentConfig a = load_experiment(config_a, ov);
    const ExperimentConfig b = load_experiment(config_b, ov);
    if (a.problem_keys != b.problem_keys) {
      std::string key;
      for (const auto &[k, v] : a.problem_keys) {
        auto it = b.problem_keys.find(k);
        if (it == b.problem_keys.end() || it->second != v) {
          key = k;
          break;
        }
      }
      if (key.empty()) { key = b.problem_keys.begin()->first; }
      throw InvalidArgument("the configs describe different problems (key '" + key + "' differs)");
    }
    const BuiltProblem built = build_problem(a);
    const ExperimentResult ra = run_solver(a, built);
    const ExperimentResult rb = run_solver(b, built);

    if (out_csv.has_parent_path()) { std::filesystem::create_directories(out_csv.parent_path()); }
    std::ofstream csv(out_csv, std::ios::binary);
    if (!csv) { throw InvalidArgument("cannot open " + out_csv.string() + " for writing"); }
    csv << "iter,snr_a,relerr_a,snr_b,relerr_b\n";
    const std::size_t rows = std::max(ra.trace.records.size(), rb.trace.records.size());
    auto cells = [](const RunTrace &t, std::size_t i) {
      if (i >= t.records.size()) { return std::string(","); }
      return format_double(t.records[i].snr) + "," + format_double(t.records[i].relerr);
    };
    for (std::size_t i = 0; i < rows; ++i) {
      csv << (i + 1) << ',' << cells(ra.trace, i) << ',' << cells(rb.trace, i) << '\n';
    }

    out << "threshold_db," << solver_name(a.solver) << "," << solver_name(b.solver) << '\n';
    auto show = [](std::optional<std::size_t> it) { return it ? std::to_string(*it) : std::string("none"); };
    for (double th : {15.0, 20.0, 23.0}) {
      out << format_double(th) << ',' << show(first_crossing(ra.trace, th)) << ','
          << show(first_crossing(rb.trace, th)) << '\n';
    }
    return 0;
  });
}

int certify_command(const std::filesystem::path &config, const Overrides &ov, std::ostream &out,
                    std::ostream &err)
{
  return guarded(err, [&]() -> int {
    const ExperimentConfig cfg = load_experiment(config, ov);
    const BuiltProblem built = build_problem(cfg);
    const Problem &p = built.problem;
    const double gamma = cfg.gamma.value_or(cfg.gamma_beta * p.beta);
    const double lambda = cfg.lambda.value_or(default_lambda(p));

    std::optional<double> sigma = cfg.certify_sigma;
    if (!sigma) {
      const QuadraticData *quad = p.f2.quadratic();
      if (quad != nullptr && quad->A.kind() == LinearOp::Kind::identity) {
        sigma = 1.0;
      } else if (quad != nullptr && quad->A.kind() == LinearOp::Kind::generic && p.primal_dim() <= 5000) {
        Vec tmp(quad->A.out_dim());
        try {
          sigma = min_eigenvalue_spd(
              [&](const Vec &x, Vec &y) {
                quad->A.forward(x, tmp);
                quad->A.adjoint(tmp, y);
              },
              p.primal_dim());
        } catch (const InvariantViolation &) {
        } catch (const NonConvergence &) {
        }
      }
    }
    std::optional<RateCertificate> cert;
    if (sigma) { cert = rate_certificate(p, gamma, lambda, cfg.alpha_lo, cfg.alpha_hi, *sigma); }
    if (!cert) {
      out << "not-applicable\n";
      return 3;
    }
    const double alpha = std::clamp(cfg.alpha, cfg.alpha_lo, cfg.alpha_hi);
    const SolveResult one = pdfp2o_kappa(p, gamma, lambda, alpha, zero_state(p), StoppingRule{0.0, 1});
    cert->d = lambda_norm(one.state, lambda);

    std::ostringstream csv;
    csv << "mu,nu,eta,theta,d\n"
        << format_double(cert->mu) << ',' << format_double(cert->nu) << ',' << format_double(cert->eta) << ','
        << format_double(cert->theta) << ',' << format_double(cert->d) << '\n';
    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream file(cfg.output_dir / "certificate.csv", std::ios::binary);
    file << csv.str();
    out << csv.str();
    return 0;
  });
}

} // namespace pdfp
