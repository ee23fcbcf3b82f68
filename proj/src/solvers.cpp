#include "pdfp/solvers.hpp"

#include <Eigen/Cholesky>
#include <chrono>
#include <cmath>
#include <sstream>

#include "pdfp/diagnostics.hpp"

namespace pdfp {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start)
{
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void check_state(const Problem &p, const PDState &u)
{
  if (u.v.size() != p.dual_dim() || u.x.size() != p.primal_dim()) {
    std::ostringstream msg;
    msg << "state dimensions (v: " << u.v.size() << ", x: " << u.x.size() << ") do not match the problem (v: "
        << p.dual_dim() << ", x: " << p.primal_dim() << ")";
    throw InvalidArgument(msg.str());
  }
}

/// Scratch vectors reused across iterations.
struct Workspace {
  Vec grad;
  Vec z;
  Vec dt;
  Vec y;
  Vec w;
  Vec prox;
};

// vout = (I - prox_{(gamma/lambda) f1})(D z + (I - lambda D D^T) v), evaluated as
// D(z - lambda D^T v) + v. Every PDFP2O-family solver goes through this one
// expression so special cases reproduce each other bit for bit.
void dual_update(const Problem &p, double gamma, double lambda, const Vec &z, const Vec &v, Vec &vout,
                 Workspace &ws)
{
  p.D.adjoint(v, ws.dt);
  ws.y = z - lambda * ws.dt;
  p.D.forward(ws.y, ws.w);
  ws.w += v;
  p.f1.prox(gamma / lambda, ws.w, ws.prox);
  vout = ws.w - ws.prox;
}

// out = T_{gamma,lambda}(u); also leaves z = x - gamma grad f2(x) in ws.z.
void tentative_step(const Problem &p, double gamma, double lambda, const PDState &u, PDState &out, Workspace &ws)
{
  p.f2.grad(u.x, ws.grad);
  ws.z = u.x - gamma * ws.grad;
  dual_update(p, gamma, lambda, ws.z, u.v, out.v, ws);
  p.D.adjoint(out.v, ws.dt);
  out.x = ws.z - lambda * ws.dt;
}

double diff_lambda_norm(const PDState &a, const PDState &b, double lambda)
{
  return std::sqrt((a.x - b.x).squaredNorm() + lambda * (a.v - b.v).squaredNorm());
}

void fill_quality(const Problem &p, const RunOptions &opts, const PDState &u, double lambda, TraceRecord &rec)
{
  if (opts.record_objective) { rec.objective = p.objective(u.x); }
  if (opts.reference) { rec.ref_dist = diff_lambda_norm(u, *opts.reference, lambda); }
  if (opts.x_true) {
    rec.snr = snr(u.x, *opts.x_true);
    rec.relerr = rel_err(u.x, *opts.x_true);
  }
}

bool stop_now(double step, double current_norm, const StoppingRule &stop)
{
  return step / std::max(1.0, current_norm) <= stop.tol;
}

SolveResult run_mann(const Problem &p, const Schedule &sched, bool relaxed, const PDState &u0,
                     const StoppingRule &stop, const RunOptions &opts)
{
  check_state(p, u0);
  const auto start = Clock::now();
  SolveResult res;
  res.state = u0;
  PDState &u = res.state;
  PDState tent{Vec(p.dual_dim()), Vec(p.primal_dim())};
  PDState next = tent;
  Workspace ws;
  if (opts.store_iterates) { res.trace.iterates.push_back(u); }
  res.trace.records.reserve(std::min<std::size_t>(stop.max_iter, 100000));

  for (std::size_t n = 0; n < stop.max_iter; ++n) {
    StepParams s = sched.at(n, u.x);
    if (!relaxed) { s.alpha = 0.0; }
    if (opts.validate) { validate_step(p, s, n); }

    tentative_step(p, s.gamma, s.lambda, u, tent, ws);
    if (s.alpha == 0.0) {
      next.v = tent.v;
      next.x = tent.x;
    } else {
      next.v = s.alpha * u.v + (1.0 - s.alpha) * tent.v;
      next.x = s.alpha * u.x + (1.0 - s.alpha) * tent.x;
    }

    TraceRecord rec;
    rec.iter = n + 1;
    rec.gamma = s.gamma;
    rec.lambda = s.lambda;
    rec.alpha = s.alpha;
    rec.residual = diff_lambda_norm(u, tent, s.lambda);
    rec.step = diff_lambda_norm(next, u, s.lambda);
    const double current_norm = lambda_norm(u, s.lambda);
    std::swap(u, next);
    fill_quality(p, opts, u, s.lambda, rec);
    rec.wall_ms = elapsed_ms(start);
    res.trace.records.push_back(rec);
    if (opts.store_iterates) { res.trace.iterates.push_back(u); }
    res.iterations = n + 1;
    if (stop_now(rec.step, current_norm, stop)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

Schedule unchecked_constant(double gamma, double lambda, double alpha)
{
  const StepParams s{gamma, lambda, alpha};
  return Schedule("constant", [s](std::size_t, const Vec &) { return s; });
}

const QuadraticData &require_quadratic(const Problem &p, const char *who)
{
  const QuadraticData *q = p.f2.quadratic();
  if (q == nullptr) {
    throw UnsupportedProblem(std::string(who) + ": requires f2 = 0.5 ||A x - b||^2");
  }
  return *q;
}

} // namespace

PDState apply_T(const Problem &p, double gamma, double lambda, const PDState &u)
{
  check_state(p, u);
  validate_step(p, StepParams{gamma, lambda, 0.0}, 0);
  PDState out;
  Workspace ws;
  tentative_step(p, gamma, lambda, u, out, ws);
  return out;
}

PDState apply_Tn(const Problem &p, const Schedule &sched, std::size_t n, const PDState &u)
{
  check_state(p, u);
  StepParams s = sched.at(n, u.x);
  validate_step(p, StepParams{s.gamma, s.lambda, 0.0}, n);
  PDState out;
  Workspace ws;
  tentative_step(p, s.gamma, s.lambda, u, out, ws);
  return out;
}

SolveResult pdfp2o(const Problem &p, double gamma, double lambda, const PDState &u0, const StoppingRule &stop,
                   const RunOptions &opts)
{
  return run_mann(p, unchecked_constant(gamma, lambda, 0.0), false, u0, stop, opts);
}

SolveResult pdfp2o_kappa(const Problem &p, double gamma, double lambda, double kappa, const PDState &u0,
                         const StoppingRule &stop, const RunOptions &opts)
{
  if (!(kappa >= 0.0 && kappa < 1.0)) { throw InvalidArgument("pdfp2o_kappa: kappa must lie in [0, 1)"); }
  return run_mann(p, unchecked_constant(gamma, lambda, kappa), true, u0, stop, opts);
}

SolveResult pdfp2o_ds(const Problem &p, const Schedule &sched, const PDState &u0, const StoppingRule &stop,
                      const RunOptions &opts)
{
  return run_mann(p, sched, false, u0, stop, opts);
}

SolveResult pdfp2o_dsn(const Problem &p, const Schedule &sched, const PDState &u0, const StoppingRule &stop,
                       const RunOptions &opts)
{
  return run_mann(p, sched, true, u0, stop, opts);
}

SolveResult pfbs_fp2o(const Problem &p, double gamma, double lambda, double kappa, const StoppingRule &inner_stop,
                      const PDState &u0, const StoppingRule &stop, const RunOptions &opts)
{
  check_state(p, u0);
  if (!(kappa >= 0.0 && kappa < 1.0)) { throw InvalidArgument("pfbs_fp2o: kappa must lie in [0, 1)"); }
  if (inner_stop.max_iter == 0) { throw InvalidArgument("pfbs_fp2o: inner budget must be >= 1"); }
  if (opts.validate) { validate_step(p, StepParams{gamma, lambda, 0.0}, 0); }

  const auto start = Clock::now();
  SolveResult res;
  res.state = u0;
  PDState &u = res.state;
  Workspace ws;
  Vec half_step(p.primal_dim());
  Vec vk(p.dual_dim());
  Vec h(p.dual_dim());
  Vec vnext(p.dual_dim());
  PDState next{Vec(p.dual_dim()), Vec(p.primal_dim())};
  if (opts.store_iterates) { res.trace.iterates.push_back(u); }

  for (std::size_t n = 0; n < stop.max_iter; ++n) {
    p.f2.grad(u.x, ws.grad);
    half_step = u.x - gamma * ws.grad;

    vk = u.v;
    std::size_t k = 0;
    bool inner_converged = false;
    while (k < inner_stop.max_iter) {
      dual_update(p, gamma, lambda, half_step, vk, h, ws);
      if (kappa == 0.0) {
        vnext = h;
      } else {
        vnext = kappa * vk + (1.0 - kappa) * h;
      }
      const double change = (vnext - vk).norm() / std::max(1.0, vk.norm());
      std::swap(vk, vnext);
      ++k;
      if (change <= inner_stop.tol) {
        inner_converged = true;
        break;
      }
    }
    next.v = vk;
    p.D.adjoint(next.v, ws.dt);
    next.x = half_step - lambda * ws.dt;

    TraceRecord rec;
    rec.iter = n + 1;
    rec.gamma = gamma;
    rec.lambda = lambda;
    rec.alpha = kappa;
    rec.inner_iters = k;
    rec.inner_converged = inner_converged || inner_stop.max_iter == 1;
    rec.step = diff_lambda_norm(next, u, lambda);
    rec.residual = rec.step;
    const double current_norm = lambda_norm(u, lambda);
    std::swap(u, next);
    fill_quality(p, opts, u, lambda, rec);
    rec.wall_ms = elapsed_ms(start);
    res.trace.records.push_back(rec);
    if (opts.store_iterates) { res.trace.iterates.push_back(u); }
    res.iterations = n + 1;
    if (stop_now(rec.step, current_norm, stop)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

IfpResult ifp2o(const Mat &Q, const Vec &b, const ProxFn &f1, const LinearOp &D, double lambda, double kappa,
                const StoppingRule &stop, const std::optional<Vec> &v0)
{
  const Index n = Q.rows();
  if (Q.cols() != n || b.size() != n || D.in_dim() != n || f1.dim() != D.out_dim()) {
    throw InvalidArgument("ifp2o: dimension mismatch between Q, b, D and f1");
  }
  if (!(kappa > 0.0 && kappa < 1.0)) { throw InvalidArgument("ifp2o: kappa must lie in (0, 1)"); }
  Eigen::LLT<Mat> llt(Q);
  if (llt.info() != Eigen::Success) { throw InvalidArgument("ifp2o: Q is singular or not positive definite"); }

  Vec tmp_n(n);
  auto dqd = [&](const Vec &v, Vec &out) {
    D.adjoint(v, tmp_n);
    tmp_n = llt.solve(tmp_n);
    D.forward(tmp_n, out);
  };
  const double lmax = max_eigenvalue(dqd, D.out_dim());
  if (!(lambda > 0.0 && lambda * lmax <= 2.0 * (1.0 + 1e-9))) {
    throw InvalidArgument("ifp2o: lambda must lie in (0, 2/lambda_max(D Q^-1 D^T)]");
  }

  IfpResult res;
  res.v = v0.value_or(Vec::Zero(D.out_dim()));
  if (res.v.size() != D.out_dim()) { throw InvalidArgument("ifp2o: v0 has the wrong dimension"); }
  auto primal = [&](const Vec &v) -> Vec { return llt.solve(b - lambda * D.adjoint(v)); };
  auto objective = [&](const Vec &x) { return f1.value(D.forward(x)) + 0.5 * x.dot(Q * x) - b.dot(x); };

  Vec w(D.out_dim());
  Vec h(D.out_dim());
  for (std::size_t it = 0; it < stop.max_iter; ++it) {
    res.x = primal(res.v);
    D.forward(res.x, w);
    w += res.v;
    h = w - f1.prox(1.0 / lambda, w);
    Vec vnext = kappa * res.v + (1.0 - kappa) * h;
    const double step = (vnext - res.v).norm();
    const double current = res.v.norm();
    res.v = std::move(vnext);

    TraceRecord rec;
    rec.iter = it + 1;
    rec.lambda = lambda;
    rec.alpha = kappa;
    rec.step = step;
    rec.residual = step / (1.0 - kappa);
    res.trace.records.push_back(rec);
    res.iterations = it + 1;
    if (step / std::max(1.0, current) <= stop.tol) {
      res.converged = true;
      break;
    }
  }
  res.x = primal(res.v);
  if (!res.trace.records.empty()) { res.trace.records.back().objective = objective(res.x); }
  return res;
}

SolveResult chambolle_pock(const Problem &p, const StepSequence &sigma, const StepSequence &tau, double theta,
                           const PDState &u0, const StoppingRule &stop, const RunOptions &opts)
{
  check_state(p, u0);
  const QuadraticData &quad = require_quadratic(p, "chambolle_pock");
  if (!(theta >= 0.0 && theta <= 1.0)) { throw InvalidArgument("chambolle_pock: theta must lie in [0, 1]"); }

  const Index n = p.primal_dim();
  const int cg_budget = static_cast<int>(std::min<Index>(10 * n + 100, 10000));
  Vec tmp_out(quad.A.out_dim());
  auto normal_op = [&](double t) {
    return [&quad, &tmp_out, t](const Vec &x, Vec &out) {
      quad.A.forward(x, tmp_out);
      quad.A.adjoint(tmp_out, out);
      out = x + t * out;
    };
  };
  const Vec atb = quad.A.adjoint(quad.b);
  auto resolvent = [&](double t, const Vec &z, const Vec &warm) -> Vec {
    switch (quad.A.kind()) {
    case LinearOp::Kind::identity: return (z + t * quad.b) / (1.0 + t);
    case LinearOp::Kind::zero: return z;
    case LinearOp::Kind::generic: break;
    }
    return conjugate_gradient(normal_op(t), z + t * atb, warm, 1e-10, cg_budget).x;
  };

  const auto start = Clock::now();
  SolveResult res;
  res.state = u0;
  PDState &u = res.state;
  Vec y = u.x;
  Vec dy(p.dual_dim());
  Vec dtv(n);
  PDState next;
  if (opts.store_iterates) { res.trace.iterates.push_back(u); }

  for (std::size_t it = 0; it < stop.max_iter; ++it) {
    const double s = sigma(it);
    const double t = tau(it);
    if (opts.validate && !(s > 0.0 && t > 0.0 && s * t <= p.lambda_bound() * (1.0 + 1e-12))) {
      std::ostringstream msg;
      msg << "iteration " << it << ": chambolle_pock needs sigma, tau > 0 and sigma*tau <= 1/lambda_max(DD^T)";
      throw InvalidArgument(msg.str());
    }
    p.D.forward(y, dy);
    next.v = conjugate_prox(p.f1, s, u.v + s * dy);
    p.D.adjoint(next.v, dtv);
    next.x = resolvent(t, u.x - t * dtv, u.x);
    y = next.x + theta * (next.x - u.x);

    // v = vbar / sigma in PDFP2O scaling, so ||.||_lambda with lambda = sigma tau weighs vbar by tau/sigma.
    const double weight = t / s;
    TraceRecord rec;
    rec.iter = it + 1;
    rec.gamma = t;
    rec.lambda = s * t;
    rec.alpha = theta;
    rec.step = diff_lambda_norm(next, u, weight);
    rec.residual = rec.step;
    const double current_norm = lambda_norm(u, weight);
    std::swap(u, next);
    fill_quality(p, opts, u, weight, rec);
    rec.wall_ms = elapsed_ms(start);
    res.trace.records.push_back(rec);
    if (opts.store_iterates) { res.trace.iterates.push_back(u); }
    res.iterations = it + 1;
    if (stop_now(rec.step, current_norm, stop)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

SplitState split_zero_state(const Problem &p)
{
  return SplitState{Vec::Zero(p.primal_dim()), Vec::Zero(p.dual_dim()), Vec::Zero(p.dual_dim())};
}

SiuResult siu(const Problem &p, const StepSequence &delta, const StepSequence &nu, const SplitState &s0,
              const StoppingRule &stop, const RunOptions &opts)
{
  require_quadratic(p, "siu");
  if (s0.x.size() != p.primal_dim() || s0.d.size() != p.dual_dim() || s0.v.size() != p.dual_dim()) {
    throw InvalidArgument("siu: state dimensions do not match the problem");
  }
  const auto start = Clock::now();
  SiuResult res;
  res.state = s0;
  for (std::size_t it = 0; it < stop.max_iter; ++it) {
    const double dl = delta(it);
    const double nv = nu(it);
    const double bound = 1.0 / (p.f2.lipschitz() + nv * p.lambda_max_ddt);
    if (opts.validate && !(dl > 0.0 && nv > 0.0 && dl <= bound * (1.0 + 1e-12))) {
      std::ostringstream msg;
      msg << "iteration " << it << ": siu needs nu > 0 and 0 < delta <= 1/(L + nu lambda_max(DD^T))";
      throw InvalidArgument(msg.str());
    }
    SplitState next = siu_step(p, dl, nv, res.state);
    const double lambda = dl * nv;
    const PDState cur{res.state.v, res.state.x};
    const PDState nxt{next.v, next.x};

    TraceRecord rec;
    rec.iter = it + 1;
    rec.gamma = dl;
    rec.lambda = lambda;
    rec.step = diff_lambda_norm(nxt, cur, lambda);
    rec.residual = rec.step;
    const double current_norm = lambda_norm(cur, lambda);
    res.state = std::move(next);
    fill_quality(p, opts, nxt, lambda, rec);
    rec.wall_ms = elapsed_ms(start);
    res.trace.records.push_back(rec);
    if (opts.store_iterates) { res.trace.iterates.push_back(nxt); }
    res.iterations = it + 1;
    if (stop_now(rec.step, current_norm, stop)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

} // namespace pdfp
